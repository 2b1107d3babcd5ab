import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from timeit import default_timer as timer
from datetime import timedelta
from typing import List, Optional
import logging_utils


class BenchTask(ABC):
    """One bench step. Per-grid failures go to the task's own error log, keyed by
    ``action_type`` and ``object_type``; the pipeline stops when that log is non-empty.
    """
    def __init__(self, name, action_type, object_type, skip=False):
        super().__init__()
        self.name = name
        self.action_type = action_type
        self.object_type = object_type
        self.skip = skip

    def error_logger(self, working_dir):
        return logging_utils.get_error_logger(self.action_type, self.object_type, working_dir)

    def failure_log(self, working_dir):
        return logging_utils.get_error_log_file(self.action_type, self.object_type, working_dir)

    @abstractmethod
    def run(self):
        pass


class Pipeline:
    """Runs a group of tasks in dependency order; completed tasks are recorded in the
    checkpoint and skipped when the same session is resumed.

    See pipeline_test.py for examples.
    """

    @dataclass
    class Node:
        """Node within a pipeline.

        Attributes:
        - task: The task runs in the node.
        - children: The nodes that should run after the current node completes.

        DON'T create Node instance in any way other than calling add_task.
        """
        task: Optional[BenchTask] = None
        children: List["Pipeline.Node"] = field(default_factory=list)

    def __init__(self, working_dir: str, completed_pipeline_steps, dry_run: bool = False):
        """
        :param working_dir: the dir where failure logs of the tasks are looked up.
        :param completed_pipeline_steps: CheckpointKeySet of completed pipeline tasks
        """
        self._source = self.Node()
        self._working_dir = working_dir
        self._completed_steps = completed_pipeline_steps
        self._tasks = []
        self._dry_run = dry_run

    @property
    def tasks(self):
        return list(self._tasks)

    def add_task(self, task: BenchTask, parents: Optional[List[Node]] = None) -> Node:
        node = self.Node(task)
        if not parents:
            parents = [self._source]
        for parent in parents:
            parent.children.append(node)

        # Tasks run sequentially in the order of add_task; a child is always added after its
        # parents, so it only starts once they have completed.
        self._tasks.append(task)
        return node

    def run(self):
        """Runs every task on the calling thread, so bench timings never overlap."""
        for task in self._tasks:
            self._run_task(task)

    def _run_task(self, task: BenchTask):
        if self._completed_steps.contains(f'{task.name}'):
            logging.info(f'Task {task.name} already completed, found in checkpoint')
            return
        start = timer()
        logging.info(f'Start {task.name}')
        if self._dry_run or task.skip:
            logging.info(f'{task.name} Skipped.')
            return
        task.run()
        end = timer()
        logging.info(f'{task.name} Completed. Total time taken: {str(timedelta(seconds=end - start))}')
        failed_task_log = task.failure_log(self._working_dir)
        logging_utils.raise_if_failed_task_file_exists(failed_task_log, task.name)
        self._completed_steps.write(f'{task.name}')
