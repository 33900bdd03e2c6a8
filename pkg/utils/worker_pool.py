"""
Worker pool module for the GCP toolkit.
Runs independent verification checks concurrently with tracking and lifecycle handling.
"""
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from . import logger

log = logger.get_logger(__name__)


class CheckPool:
    """
    Pool of worker threads for independent checks.

    Results are always returned in submission order, so a reduction over
    them is the same whatever the number of workers.
    """
    def __init__(self, workers=1):
        self.workers = max(1, int(workers))
        self.pending_tasks = set()
        self._lock = threading.Lock()
        self._executor = None
        self._shutdown = False

    def start(self):
        """Create the executor if not already running"""
        with self._lock:
            if self._executor is not None:
                log.warning("CheckPool already started")
                return
            self._executor = ThreadPoolExecutor(
                max_workers=self.workers, thread_name_prefix="gcp-check"
            )
            log.debug("CheckPool started", extra={"workers": self.workers})

    def submit(self, func, *args, name=None, **kwargs):
        """
        Submit a callable to the pool

        Args:
            func: The callable to run
            name: Optional name for the task, used in log records

        Returns:
            concurrent.futures.Future: The future representing the task
        """
        with self._lock:
            if self._shutdown:
                raise RuntimeError("CheckPool is shutting down")
        if self._executor is None:
            self.start()

        task_name = name or getattr(func, "__name__", "task")
        run_id = logger.get_run_id()

        def _run():
            # worker threads do not inherit the submitting context
            if run_id:
                logger.set_run_context(run_id)
            return func(*args, **kwargs)

        future = self._executor.submit(_run)
        future.task_name = task_name
        future.submit_time = time.time()
        with self._lock:
            self.pending_tasks.add(future)
        future.add_done_callback(self._task_done_callback)
        return future

    def _task_done_callback(self, future):
        """Callback when a task is done"""
        with self._lock:
            self.pending_tasks.discard(future)

        task_name = getattr(future, 'task_name', 'Unknown')
        duration = time.time() - getattr(future, 'submit_time', time.time())

        if future.cancelled():
            log.warning(f"Task {task_name} was cancelled after {duration:.2f}s")
        elif future.exception() is not None:
            log.error(
                f"Task {task_name} failed after {duration:.2f}s: {future.exception()}",
                exc_info=future.exception()
            )
        else:
            log.debug(f"Task {task_name} completed in {duration:.2f}s")

    def map_ordered(self, tasks):
        """
        Run (name, callable) pairs and return their results in the given order.
        Exceptions are re-raised in the caller.
        """
        if self.workers == 1:
            return [func() for _, func in tasks]
        futures = [self.submit(func, name=name) for name, func in tasks]
        return [future.result() for future in futures]

    def shutdown(self, wait=True):
        """Shutdown the pool, waiting for pending tasks by default"""
        with self._lock:
            self._shutdown = True
            executor = self._executor
        if executor is None:
            return
        remaining = len(self.pending_tasks)
        if remaining:
            log.info(f"Waiting for {remaining} pending tasks to complete")
        executor.shutdown(wait=wait, cancel_futures=not wait)
        log.debug("CheckPool shutdown complete")

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.shutdown(wait=exc_type is None)
        return False
