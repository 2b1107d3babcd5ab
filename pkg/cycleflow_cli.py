import json
import logging
import sys
from timeit import default_timer as timer
from datetime import timedelta

import numpy as np

import cfconstants
import logging_utils
from bench_pipeline import build_bench_pipeline
from cycleflow.applications import schedule_from_path, tie_switch_delta, unscheduled_flows
from cycleflow.bench import fit_speedup_curve, read_reports_csv
from cycleflow.conventional import (SensitivityMatrix, assemble_operators, lodf_conventional, ptdf_conventional,
                                    ptdf_prime_conventional)
from cycleflow.dual import (cycle_flows, lodf_dual, lodf_qr, ptdf_dual, ptdf_prime_dual, ptdf_prime_qr, ptdf_qr)
from cycleflow.errors import EquivalenceError, GridValidationError, NumericalError, ScheduleError
from cycleflow.grid_io import Branch, Grid, load_case, save_native
from cycleflow.output import line_labels, render_decomposition, render_matrix, render_records, write_output
from cycleflow.parser import build_run_config, get_cycleflow_parser, get_defaults
from cycleflow.synth import SynthSpec, generate
from cycleflow.topology import build_topology
from cycleflow.verify import VERIFY_COLUMNS, method_deviations


def _load(args, run_config) -> Grid:
    grid = load_case(args.case, run_config['timeout'], run_config['retry_total'], run_config['retry_backoff'])
    slack = getattr(args, 'slack', None)
    return grid.with_slack(grid.index_of(slack)) if slack is not None else grid


def run_info(args, run_config):
    grid = _load(args, run_config)
    topology = build_topology(grid)
    record = {'name': grid.name, 'nodes': grid.n_nodes, 'lines': grid.n_lines, 'cycles': grid.n_cycles,
              'cycles_per_nodes': round(grid.n_cycles / grid.n_nodes, 2), 'slack': grid.slack_id,
              'bridges': len(topology.bridges)}
    return render_records([record], run_config['format'])


def run_ptdf(args, run_config):
    grid = _load(args, run_config)
    topology = build_topology(grid)
    mode, num_parallel = run_config['mode'], run_config['num_parallel']
    if args.method == cfconstants.METHOD_CONVENTIONAL:
        ops = assemble_operators(grid, topology.incidence)
        matrix = (ptdf_prime_conventional(ops, mode, num_parallel) if args.prime
                  else ptdf_conventional(ops, grid.slack, mode, num_parallel))
    elif args.method == cfconstants.METHOD_DUAL:
        matrix = (ptdf_prime_dual(grid, topology.basis, mode, num_parallel) if args.prime
                  else ptdf_dual(grid, topology.basis, topology.tree, mode, num_parallel))
    else:
        matrix = (ptdf_prime_qr(grid, topology.basis) if args.prime
                  else ptdf_qr(grid, topology.basis, topology.tree))
    return render_matrix(grid, matrix, run_config['format'])


def run_lodf(args, run_config):
    grid = _load(args, run_config)
    topology = build_topology(grid)
    mode, num_parallel = run_config['mode'], run_config['num_parallel']
    if args.method == cfconstants.METHOD_CONVENTIONAL:
        matrix = lodf_conventional(assemble_operators(grid, topology.incidence), topology.bridges, mode, num_parallel)
    elif args.method == cfconstants.METHOD_DUAL:
        matrix = lodf_dual(grid, topology.basis, topology.bridges, mode, num_parallel)
    else:
        matrix = lodf_qr(grid, topology.basis, topology.bridges)
    if matrix.undefined_columns:
        logging.info(f"{len(matrix.undefined_columns)} bridge outages island the grid; their columns are empty")
    return render_matrix(grid, matrix, run_config['format'])


def run_decompose(args, run_config):
    grid = _load(args, run_config)
    topology = build_topology(grid)
    decomposition = cycle_flows(grid, topology.basis, topology.tree, grid.index_of(args.source),
                                grid.index_of(args.sink), args.power, run_config['mode'])
    return render_decomposition(grid, decomposition, topology.basis, run_config['format'])


def run_verify(args, run_config):
    grid = _load(args, run_config)
    with_oracle = False if args.no_oracle else None
    row = method_deviations(grid, run_config['mode'], with_oracle, run_config['num_parallel'])
    write_output(render_records([row], run_config['format'], VERIFY_COLUMNS), run_config['out'])
    if not row['passed']:
        raise EquivalenceError(f"computation routes disagree on {grid.name}")


def run_tie_switch(args, run_config):
    grid = _load(args, run_config)
    from_id, to_id, reactance = args.add
    new_branch = Branch.from_reactance(grid.n_lines, grid.index_of(from_id), grid.index_of(to_id), reactance)
    delta = tie_switch_delta(grid, new_branch, grid.slack, run_config['mode'])
    logging.info(f"Closed form matches recomputation within {delta.max_deviation:.3e}")
    matrix = SensitivityMatrix(delta.delta_ptdf, cfconstants.PTDF, 'tie-switch', grid.slack)
    return render_matrix(delta.closed_grid, matrix, run_config['format'])


def load_schedule(grid: Grid, schedule_path):
    with open(schedule_path, 'r', encoding='utf-8') as fp:
        try:
            data = json.load(fp)
        except json.JSONDecodeError as e:
            raise ScheduleError(f"{schedule_path} is not valid JSON: {e}")
    if isinstance(data, dict) and 'path' in data:
        return schedule_from_path(grid, data['path'])
    if isinstance(data, dict) and 'flows' in data:
        return np.asarray(data['flows'], dtype=float)
    raise ScheduleError(f"{schedule_path} must contain a 'path' of bus ids or per-line 'flows'")


def run_unscheduled(args, run_config):
    grid = _load(args, run_config)
    topology = build_topology(grid)
    split = unscheduled_flows(grid, topology.basis, load_schedule(grid, args.schedule), args.power,
                              run_config['mode'])
    logging.info(f"Transaction {grid.buses[split.source].id} -> {grid.buses[split.sink].id}, {split.power} MW")
    records = [{'line': line, 'branch': label, 'schedule': split.schedule[line], 'scheduled': split.scheduled[line],
                'unscheduled': split.unscheduled[line], 'actual': split.actual[line]}
               for line, label in enumerate(line_labels(grid))]
    return render_records(records, run_config['format'])


def run_synth(args, run_config):
    grid = generate(SynthSpec(args.nodes, args.chords, (args.x_min, args.x_max), run_config['seed']))
    return save_native(grid) + "\n"


def run_bench(args, run_config):
    sources = list(args.case) + list(args.synth)
    build_bench_pipeline(run_config, sources).run()


def run_fit(args, run_config):
    frame = read_reports_csv(args.report)
    alpha, gamma = fit_speedup_curve(frame)
    return render_records([{'alpha': alpha, 'gamma': gamma, 'grids': len(frame)}], run_config['format'])


COMMANDS = {
    'info': run_info,
    'ptdf': run_ptdf,
    'lodf': run_lodf,
    'decompose': run_decompose,
    'verify': run_verify,
    'tie-switch': run_tie_switch,
    'unscheduled': run_unscheduled,
    'synth': run_synth,
    'bench': run_bench,
    'fit': run_fit,
}


def main(argv=None):
    args = get_cycleflow_parser().parse_args(argv)
    try:
        run_config = build_run_config(args, get_defaults(profile=args.profile))
        level = logging.DEBUG if run_config['debug'] else logging.INFO
        logging_utils.set_default_logging(run_config['session_dir'], level)

        start = timer()
        text = COMMANDS[args.command](args, run_config)
        if text is not None:
            write_output(text, run_config['out'])
        logging.info(f"{args.command} completed in {str(timedelta(seconds=timer() - start))}")
    except (GridValidationError, ValueError, OSError) as e:
        logging.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return cfconstants.EXIT_VALIDATION
    except (NumericalError, RuntimeError) as e:
        logging.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return cfconstants.EXIT_NUMERICAL
    return cfconstants.EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
