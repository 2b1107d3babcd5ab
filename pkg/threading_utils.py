from concurrent.futures import ThreadPoolExecutor


def propagate_exceptions(futures):
    """Re-raises the first exception raised inside any of the futures."""
    for future in futures:
        future.result()


def map_in_parallel(fn, items, num_parallel):
    """Applies fn to every item on up to num_parallel threads, keeping the input order."""
    items = list(items)
    if num_parallel <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=num_parallel) as executor:
        futures = [executor.submit(fn, item) for item in items]
    propagate_exceptions(futures)
    return [future.result() for future in futures]
