import logging
import os


def set_default_logging(parent_dir, level=logging.INFO):
    """Logs to <parent_dir>/app_logs/cycleflow.log and the console.

    Calling it again (e.g. once --debug is known) replaces the handlers of the first call.
    """
    os.makedirs(_get_log_dir(parent_dir), exist_ok=True)
    log_file = os.path.join(_get_log_dir(parent_dir), "cycleflow.log")
    all_log_handler = logging.FileHandler(log_file, encoding='utf-8')
    console_handler = logging.StreamHandler()

    logging.basicConfig(format="%(asctime)s;%(levelname)s;%(message)s",
                        datefmt='%Y-%m-%d,%H:%M:%S',
                        level=level,
                        handlers=[all_log_handler, console_handler],
                        force=True)


def get_error_logger(action_type, object_type, log_dir):
    """
    Failures are written to object specific log file.
    """
    logger = logging.getLogger(f"cycleflow_{action_type}_{object_type}")

    failed_log_file = get_error_log_file(action_type, object_type, log_dir)
    os.makedirs(_get_log_dir(log_dir), exist_ok=True)

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
    error_handler = logging.FileHandler(failed_log_file, 'w+', encoding='utf-8')
    error_handler.setLevel(logging.ERROR)

    logger.addHandler(error_handler)
    return logger


def get_error_log_file(action_type, object_type, parent_dir):
    return os.path.join(_get_log_dir(parent_dir), f"failed_{action_type}_{object_type}.log")


def _get_log_dir(parent_dir):
    return os.path.join(parent_dir, "app_logs")


def log_grid_error(error_logger, grid_name, error):
    """Records one failed grid as a single line: name, exception type and message."""
    error_logger.error(f"{grid_name};{type(error).__name__};{error}")


def raise_if_failed_task_file_exists(failed_task_log, task_name):
    if os.path.exists(failed_task_log) and os.path.getsize(failed_task_log) > 0:
        msg = f'{task_name} has failures. Refer to {failed_task_log} to see failures. Terminating pipeline.'
        logging.info(msg)
        raise RuntimeError(msg)
