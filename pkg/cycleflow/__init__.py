from .errors import *
from .grid_io import Bus, Branch, Grid, build_grid, load_case, load_native, merge_parallel_lines, \
    parse_matpower_case, save_native
from .topology import CycleBasis, IncidenceMatrix, SpanningTreePaths, Topology, build_cycle_basis, \
    build_incidence, build_spanning_tree, build_topology, cycle_space_equal
from .conventional import SensitivityMatrix, SusceptanceOperators, assemble_operators, line_flows, \
    lodf_conventional, lodf_from_ptdf_prime, ptdf_conventional, ptdf_prime_conventional
from .dual import CycleOperator, FlowDecomposition, build_cycle_operator, cycle_flows, lodf_dual, lodf_qr, \
    ptdf_dual, ptdf_prime_dual, ptdf_prime_qr, ptdf_qr
from .oracle import OracleResult, oracle, oracle_lodf, oracle_ptdf
from .applications import FlowSplit, TieSwitchDelta, post_outage_flows, tie_switch_delta, unscheduled_flows
from .synth import SynthSpec, generate
from .bench import BenchReport, MethodTiming, fit_speedup_curve, run_bench
from .verify import VERIFY_COLUMNS, method_deviations
