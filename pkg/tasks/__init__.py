from .tasks import BenchGridTask, BenchReportTask, VerifyGridsTask, load_grid_source, source_slug
