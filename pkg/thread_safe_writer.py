import os
import threading


class ThreadSafeWriter():
    """Appends text to one file from several threads; every write is flushed before the lock
    is released so a crash never leaves half a line behind.

    e.g. with ThreadSafeWriter("checkpoint/bench_grids.log") as writer:
             writer.write_line("case5")
    """
    def __init__(self, path, mode='a', encoding='utf-8'):
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self.path = path
        self.global_lock = threading.Lock()
        self.filewriter = open(path, mode, encoding=encoding)

    def write(self, data):
        with self.global_lock:
            self.filewriter.write(data)
            self.filewriter.flush()

    def write_line(self, line):
        self.write(str(line).rstrip('\n') + '\n')

    def close(self):
        with self.global_lock:
            if not self.filewriter.closed:
                self.filewriter.close()

    @property
    def closed(self):
        return self.filewriter.closed

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
