from .pipeline import BenchTask, Pipeline
