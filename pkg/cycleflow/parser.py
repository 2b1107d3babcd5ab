import argparse
import configparser
from datetime import datetime
from os import path

import cfconstants

CONFIG_KEYS = ['mode', 'format', 'repetitions', 'num_parallel', 'working_dir']
DEFAULT_WORKING_DIR = 'logs'


def branch_spec(s):
    """Parses ``<from>:<to>:<x>`` into (from bus id, to bus id, reactance)."""
    try:
        from_id, to_id, reactance = s.split(':')
        return int(from_id), int(to_id), float(reactance)
    except ValueError:
        msg = "not a valid branch: {0!r}. It must be <from>:<to>:<x>, e.g. 3:7:0.05".format(s)
        raise argparse.ArgumentTypeError(msg)


def synth_spec(s):
    """Parses ``<nodes>:<chords>[:<seed>]`` and returns the equivalent grid source string."""
    fields = s.split(':')
    if len(fields) not in (2, 3) or not all(field.isdigit() for field in fields):
        msg = "not a valid synthetic grid: {0!r}. It must be <nodes>:<chords>[:<seed>]".format(s)
        raise argparse.ArgumentTypeError(msg)
    return 'synth:' + s


def get_defaults(config_path=cfconstants.CONFIG_FILE, profile='DEFAULT'):
    """Reads optional defaults from an INI file; a missing file means no defaults."""
    config = configparser.ConfigParser()
    abs_config_path = path.expanduser(config_path)
    if not config.read(abs_config_path):
        if profile != 'DEFAULT':
            raise ValueError(f"Profile '{profile}' requested but {abs_config_path} does not exist.")
        return {}
    if profile != 'DEFAULT' and not config.has_section(profile):
        raise ValueError(f"Unable to find profile '{profile}' in {abs_config_path}.")
    current_profile = dict(config[profile])
    unknown = sorted(set(current_profile) - set(CONFIG_KEYS))
    if unknown:
        raise ValueError(f"Unknown keys {unknown} in profile '{profile}' of {abs_config_path}; "
                         f"supported keys are {CONFIG_KEYS}")
    return current_profile


def _add_global_arguments(parser, suppress):
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)

    parser.add_argument('--mode', choices=cfconstants.MODES, default=default(None),
                        help='Linear algebra path: sparse or dense (default: sparse)')

    parser.add_argument('--format', choices=cfconstants.FORMATS, default=default(None),
                        help='Output format for matrices and tables (default: csv)')

    parser.add_argument('--out', action='store', default=default(None),
                        help='Write the result to this file instead of stdout')

    parser.add_argument('--seed', type=int, default=default(0),
                        help='Seed for synthetic grids')

    parser.add_argument('--working-dir', action='store', default=default(None),
                        help='Directory for logs, checkpoints and bench sessions (default: logs)')

    parser.add_argument('--debug', action='store_true', default=default(False),
                        help='Enable debug logging')

    parser.add_argument('--num-parallel', type=int, default=default(None),
                        help='Number of threads used for independent right-hand sides and grids')

    parser.add_argument('--profile', action='store', default=default('DEFAULT'),
                        help=f'Profile of {cfconstants.CONFIG_FILE} to read defaults from')

    parser.add_argument('--timeout', type=float, default=default(30.0),
                        help='Timeout in seconds when a case is fetched from a URL')

    parser.add_argument('--retry-total', type=int, default=default(3),
                        help='Total number of retries when fetching a case from a URL')

    parser.add_argument('--retry-backoff', type=float, default=default(1.0),
                        help='Backoff factor between retries when fetching a case from a URL')


def get_cycleflow_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='DC power flow sensitivities (PTDF, LODF) by the node and the cycle method')
    _add_global_arguments(parser, suppress=False)

    common = argparse.ArgumentParser(add_help=False)
    _add_global_arguments(common, suppress=True)

    subparsers = parser.add_subparsers(dest='command', required=True)

    info = subparsers.add_parser('info', parents=[common], help='Print grid size and cycle count')
    info.add_argument('--case', required=True, help='MATPOWER case or native JSON grid (path or URL)')

    ptdf = subparsers.add_parser('ptdf', parents=[common], help='Compute the PTDF matrix')
    ptdf.add_argument('--case', required=True, help='MATPOWER case or native JSON grid (path or URL)')
    ptdf.add_argument('--method', choices=cfconstants.PTDF_METHODS, default=cfconstants.METHOD_DUAL,
                      help='Computation route (default: dual)')
    ptdf.add_argument('--slack', type=int, default=None,
                      help='Slack bus id (default: the reference bus of the case)')
    ptdf.add_argument('--prime', action='store_true', default=False,
                      help="Compute PTDF' (transactions across each line's own endpoints) instead")

    lodf = subparsers.add_parser('lodf', parents=[common], help='Compute the LODF matrix')
    lodf.add_argument('--case', required=True, help='MATPOWER case or native JSON grid (path or URL)')
    lodf.add_argument('--method', choices=cfconstants.LODF_METHODS, default=cfconstants.METHOD_DUAL,
                      help='Computation route (default: dual)')

    decompose = subparsers.add_parser('decompose', parents=[common],
                                      help='Split a transaction into direct path and cycle flows')
    decompose.add_argument('--case', required=True, help='MATPOWER case or native JSON grid (path or URL)')
    decompose.add_argument('--from', dest='source', type=int, required=True, help='Injecting bus id')
    decompose.add_argument('--to', dest='sink', type=int, required=True, help='Withdrawing bus id')
    decompose.add_argument('--power', type=float, default=1.0, help='Transaction size in MW (default: 1)')

    verify = subparsers.add_parser('verify', parents=[common],
                                   help='Max-abs deviations between all computation routes')
    verify.add_argument('--case', required=True, help='MATPOWER case or native JSON grid (path or URL)')
    verify.add_argument('--no-oracle', action='store_true', default=False,
                        help='Skip the brute-force pseudo-inverse comparison')

    tie_switch = subparsers.add_parser('tie-switch', parents=[common],
                                       help='PTDF change from closing one branch in a radial grid')
    tie_switch.add_argument('--case', required=True, help='Radial grid (path or URL)')
    tie_switch.add_argument('--add', type=branch_spec, required=True, help='Branch to close as <from>:<to>:<x>')
    tie_switch.add_argument('--slack', type=int, default=None, help='Slack bus id')

    unscheduled = subparsers.add_parser('unscheduled', parents=[common],
                                        help='Split a scheduled transaction into scheduled and loop flows')
    unscheduled.add_argument('--case', required=True, help='MATPOWER case or native JSON grid (path or URL)')
    unscheduled.add_argument('--schedule', required=True,
                             help='JSON file with {"path": [bus ids]} or {"flows": [one value per line]}')
    unscheduled.add_argument('--power', type=float, default=1.0, help='Transaction size in MW (default: 1)')

    synth = subparsers.add_parser('synth', parents=[common], help='Generate a random connected grid')
    synth.add_argument('--nodes', type=int, required=True, help='Number of buses')
    synth.add_argument('--chords', type=int, required=True, help='Number of independent cycles')
    synth.add_argument('--x-min', type=float, default=0.01, help='Smallest line reactance in p.u.')
    synth.add_argument('--x-max', type=float, default=0.1, help='Largest line reactance in p.u.')

    bench = subparsers.add_parser('bench', parents=[common], help='Time both PTDF methods on a set of grids')
    bench.add_argument('--case', nargs='+', default=[], help='Case files or URLs to benchmark')
    bench.add_argument('--synth', nargs='+', type=synth_spec, default=[],
                       help='Synthetic grids to benchmark, as <nodes>:<chords>[:<seed>]')
    bench.add_argument('--repetitions', type=int, default=None,
                       help=f'Timed runs per measurement (default: {cfconstants.DEFAULT_REPETITIONS})')
    bench.add_argument('--session', action='store', default='',
                       help='If set, the bench resumes from the latest checkpoint of the given session; '
                            'otherwise a new session is created.')
    bench.add_argument('--use-checkpoint', action='store_true',
                       help='Checkpoint finished grids so an interrupted session can be resumed')
    bench.add_argument('--dry-run', action='store_true', default=False,
                       help='Build the bench pipeline but do not execute its tasks')

    fit = subparsers.add_parser('fit', parents=[common], help='Fit speedup = alpha * (cycles/nodes)^-gamma')
    fit.add_argument('--report', required=True, help='Bench report CSV')

    return parser


def generate_session() -> str:
    return 'B' + datetime.now().strftime('%Y%m%d%H%M%S')


def build_run_config(args, defaults=None):
    """Flags win over the defaults file, which wins over built-in defaults."""
    defaults = defaults or {}

    def pick(name, fallback, cast=str):
        value = getattr(args, name, None)
        if value is not None:
            return value
        if name in defaults:
            try:
                return cast(defaults[name])
            except ValueError:
                raise ValueError(f"invalid value {defaults[name]!r} for '{name}' in the defaults file")
        return fallback

    config = {'command': args.command,
              'mode': pick('mode', cfconstants.MODE_SPARSE),
              'format': pick('format', cfconstants.FORMAT_CSV),
              'out': args.out,
              'seed': args.seed,
              'debug': args.debug,
              'num_parallel': pick('num_parallel', 1, int),
              'repetitions': pick('repetitions', cfconstants.DEFAULT_REPETITIONS, int),
              'working_dir': pick('working_dir', DEFAULT_WORKING_DIR),
              'timeout': args.timeout,
              'retry_total': args.retry_total,
              'retry_backoff': args.retry_backoff,
              }
    if config['mode'] not in cfconstants.MODES:
        raise ValueError(f"unknown mode {config['mode']}; choose from {cfconstants.MODES}")
    if config['format'] not in cfconstants.FORMATS:
        raise ValueError(f"unknown format {config['format']}; choose from {cfconstants.FORMATS}")
    if config['num_parallel'] < 1:
        raise ValueError(f"--num-parallel must be at least 1, got {config['num_parallel']}")
    if config['seed'] < 0 or config['seed'] >= 2 ** 64:
        raise ValueError(f"--seed must be an unsigned 64-bit integer, got {config['seed']}")

    # only the bench subcommand runs in a session of its own
    if args.command == 'bench':
        config['session'] = args.session if args.session else generate_session()
        config['session_dir'] = path.join(config['working_dir'], config['session'])
        config['use_checkpoint'] = args.use_checkpoint or bool(args.session)
        config['dry_run'] = args.dry_run
    else:
        config['session'] = ''
        config['session_dir'] = config['working_dir']
        config['use_checkpoint'] = False
        config['dry_run'] = False
    return config
