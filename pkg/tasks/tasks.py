import logging
import os
import re

import pandas as pd

import cfconstants
import logging_utils
from cycleflow.bench import bench_grid, fit_speedup_curve
from cycleflow.errors import FitError, GridValidationError, NumericalError
from cycleflow.grid_io import load_case
from cycleflow.synth import SynthSpec, generate
from cycleflow.verify import method_deviations
from pipeline import BenchTask
from threading_utils import map_in_parallel

SYNTH_PREFIX = "synth:"


def load_grid_source(source, run_config):
    """A case path or URL, or ``synth:<nodes>:<chords>[:<seed>]`` for a generated grid."""
    if source.startswith(SYNTH_PREFIX):
        fields = source[len(SYNTH_PREFIX):].split(":")
        if len(fields) not in (2, 3) or not all(field.isdigit() for field in fields):
            raise GridValidationError(f"invalid synthetic grid '{source}'; expected synth:<nodes>:<chords>[:<seed>]")
        seed = int(fields[2]) if len(fields) == 3 else run_config['seed']
        return generate(SynthSpec(int(fields[0]), int(fields[1]), seed=seed))
    return load_case(source, run_config['timeout'], run_config['retry_total'], run_config['retry_backoff'])


def source_slug(source):
    base = source if source.startswith(SYNTH_PREFIX) else os.path.basename(source.split("?")[0])
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", base)


class BenchGridTask(BenchTask):
    """Task that benchmarks one grid and stores its report row."""

    def __init__(self, run_config, checkpoint_service, source, skip=False):
        super().__init__(f"bench_{source_slug(source)}", cfconstants.CF_BENCH, cfconstants.BENCH_GRID_OBJECT, skip)
        self.run_config = run_config
        self.checkpoint_service = checkpoint_service
        self.source = source

    def run(self):
        error_logger = self.error_logger(self.run_config['session_dir'])
        results = self.checkpoint_service.get_checkpoint_key_map(cfconstants.CF_BENCH,
                                                                 cfconstants.BENCH_RESULT_OBJECT)
        try:
            grid = load_grid_source(self.source, self.run_config)
            report = bench_grid(grid, self.run_config['repetitions'], self.run_config['mode'])
        except (GridValidationError, NumericalError, OSError) as e:
            logging_utils.log_grid_error(error_logger, self.source, e)
            return
        results.write(self.source, report.to_row())


class VerifyGridsTask(BenchTask):
    """Task that re-checks method equivalence on every benchmarked grid."""

    def __init__(self, run_config, checkpoint_service, sources, skip=False):
        super().__init__("verify_grids", cfconstants.CF_VERIFY, cfconstants.BENCH_GRID_OBJECT, skip)
        self.run_config = run_config
        self.checkpoint_service = checkpoint_service
        self.sources = list(sources)

    def run(self):
        error_logger = self.error_logger(self.run_config['session_dir'])

        def _verify(source):
            try:
                row = method_deviations(load_grid_source(source, self.run_config), self.run_config['mode'])
            except (GridValidationError, NumericalError, OSError) as e:
                logging_utils.log_grid_error(error_logger, source, e)
                return None
            if not row["passed"]:
                error_logger.error(f"{source};EquivalenceError;{row}")
            return row

        rows = map_in_parallel(_verify, self.sources, self.run_config['num_parallel'])
        passed = sum(1 for row in rows if row is not None and row["passed"])
        logging.info(f"Verified {passed} of {len(self.sources)} grids")


class BenchReportTask(BenchTask):
    """Task that writes the bench CSV from the stored rows and fits the speedup curve when possible."""

    def __init__(self, run_config, checkpoint_service, sources, skip=False):
        super().__init__("bench_report", cfconstants.CF_REPORT, cfconstants.BENCH_RESULT_OBJECT, skip)
        self.run_config = run_config
        self.checkpoint_service = checkpoint_service
        self.sources = list(sources)

    def report_path(self):
        return self.run_config.get('out') or os.path.join(self.run_config['session_dir'], "bench_report.csv")

    def run(self):
        error_logger = self.error_logger(self.run_config['session_dir'])
        results = self.checkpoint_service.get_checkpoint_key_map(cfconstants.CF_BENCH,
                                                                 cfconstants.BENCH_RESULT_OBJECT)
        rows = []
        for source in self.sources:
            if not results.contains(source):
                error_logger.error(f"{source};MissingResult;no bench result recorded")
                continue
            rows.append(results.get(source))

        frame = pd.DataFrame(rows, columns=cfconstants.BENCH_CSV_COLUMNS)
        path = self.report_path()
        frame.to_csv(path, index=False)
        logging.info(f"Wrote bench report with {len(frame)} grids to {path}")

        try:
            alpha, gamma = fit_speedup_curve(frame)
            logging.info(f"Speedup ~ {alpha:.3f} * (cycles/nodes)^-{gamma:.3f}")
        except FitError as e:
            logging.info(f"No speedup fit: {e}")
