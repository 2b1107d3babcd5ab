import logging
import os

import cfconstants
from checkpoint_service import CheckpointService
from cycleflow.errors import BenchConfigError
from pipeline import Pipeline
from tasks import BenchGridTask, BenchReportTask, VerifyGridsTask, source_slug


def build_bench_pipeline(run_config, sources) -> Pipeline:
    """
    bench_<grid 1> -> bench_<grid 2> -> ... -> verify_grids -> bench_report

    Each grid is one task so a resumed session skips grids that already finished.
    """
    if not sources:
        raise ValueError("bench needs at least one --case or --synth grid")
    slugs = [source_slug(source) for source in sources]
    if len(set(slugs)) != len(slugs):
        raise ValueError(f"grids must have distinct names, got {slugs}")
    if run_config['repetitions'] < cfconstants.MIN_REPETITIONS:
        raise BenchConfigError(f"at least {cfconstants.MIN_REPETITIONS} repetitions are needed, "
                               f"got {run_config['repetitions']}")

    if not run_config['dry_run']:
        os.makedirs(run_config['session_dir'], exist_ok=True)
    logging.info(f"Using the session id: {run_config['session']}")

    checkpoint_service = CheckpointService(run_config)
    completed_pipeline_steps = checkpoint_service.get_checkpoint_key_set(
        cfconstants.CF_BENCH, cfconstants.PIPELINE_OBJECT_TYPE)
    pipeline = Pipeline(run_config['session_dir'], completed_pipeline_steps, run_config['dry_run'])

    parents = []
    for source in sources:
        parents = [pipeline.add_task(BenchGridTask(run_config, checkpoint_service, source), parents)]
    verify = pipeline.add_task(VerifyGridsTask(run_config, checkpoint_service, sources), parents)
    pipeline.add_task(BenchReportTask(run_config, checkpoint_service, sources), [verify])
    return pipeline
