"""
Command-line front end for gibbssat.
Generation, solving, embedding, Gibbs analysis, sweeps, scaling windows and
plot scripts. Data goes to stdout or files; diagnostics go to stderr.

Exit codes: 0 success, 1 domain or I/O error, 2 usage or config error.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from core.cache_manager import CacheManager
from core.errors import ConfigError, GibbsSatError, InvalidParameterError, LengthMismatchError, OutputError
from core.experiments import (
    clause_count, emit_csv, emit_plot_script, emit_sweep_artifacts, estimate_scaling_window,
    format_window_report, read_csv, run_sweep
)
from core.gibbs import (
    DEFAULT_BETA_TOL, DEFAULT_SPECTRUM_LIMIT, DEFAULT_THRESHOLD, enumerate_spectrum,
    ground_occupancy, min_beta_for_occupancy, save_histogram
)
from core.ising import embed, energy, load_hamiltonian, save_hamiltonian, verify_embedding
from core.logger import get_logger
from core.presets import PresetManager
from core.sat_core import (
    CnfFormula, assignment_to_index, evaluate, generate_instance, parse_dimacs, write_dimacs
)
from core.settings import ConfigManager, RuntimeSettings, load_sweep_config
from core.solver import DEFAULT_EXHAUSTIVE_LIMIT, max_sat_bruteforce, solve


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def _read_formula(path: str) -> CnfFormula:
    try:
        data = sys.stdin.buffer.read() if path == '-' else Path(path).read_bytes()
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))
    return parse_dimacs(data)


def _write_output(text: str, path: Optional[str]) -> None:
    if path is None or path == '-':
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding='utf-8')
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def cmd_gen(args, parser) -> int:
    """Write a random k-SAT instance as DIMACS."""
    if args.vars <= args.k:
        parser.error(f"--vars must exceed --k ({args.k})")
    if args.clauses is not None and args.clauses < 0:
        parser.error("--clauses must be non-negative")
    if args.alpha is not None and args.alpha < 0:
        parser.error("--alpha must be non-negative")
    if args.seed < 0:
        parser.error("--seed must be non-negative")

    if args.clauses is not None:
        n_clauses = args.clauses
    else:
        n_clauses = clause_count(args.alpha, args.vars)
    formula = generate_instance(args.vars, n_clauses, args.k, args.seed)
    _write_output(write_dimacs(formula).decode('ascii'), args.out)
    print(f"c realized alpha = {formula.clause_density!r} (M={n_clauses}, N={args.vars})", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args, parser) -> int:
    """Decide one formula and print competition-style result lines."""
    formula = _read_formula(args.input)
    lines = []
    if args.solver == 'bruteforce':
        result = max_sat_bruteforce(formula, limit=args.limit)
        lines.append(f"s {'SATISFIABLE' if result.lambda_min == 0 else 'UNSATISFIABLE'}")
        lines.append(f"c lambda_min {result.lambda_min}")
        lines.append(f"c degeneracy {result.degeneracy}")
    else:
        result = solve(formula, method=args.solver)
        lines.append(f"s {'SATISFIABLE' if result.satisfiable else 'UNSATISFIABLE'}")
        if result.satisfiable:
            values = [j + 1 if bit else -(j + 1) for j, bit in enumerate(result.witness)]
            lines.append('v ' + ' '.join(str(v) for v in values) + ' 0')
        lines.append(f"c decisions {result.work.decisions}")
        lines.append(f"c propagations {result.work.propagations}")
        lines.append(f"c conflicts {result.work.conflicts}")
        get_logger().debug(f"Solved in {result.work.wall_time:.6f}s")
    _write_output('\n'.join(lines) + '\n', None)
    return EXIT_OK


def cmd_embed(args, parser) -> int:
    """Print the Ising Hamiltonian of a formula as JSON."""
    formula = _read_formula(args.input)
    hamiltonian = embed(formula)
    if args.verify:
        if not verify_embedding(formula, hamiltonian, limit=args.limit):
            get_logger().error("Embedding does not reproduce the violated-clause count")
            return EXIT_ERROR
        print(f"c embedding verified on all 2^{formula.n_vars} configurations", file=sys.stderr)
    if args.out and args.out != '-':
        save_hamiltonian(hamiltonian, args.out)
    else:
        _write_output(json.dumps(hamiltonian.to_json_dict(), indent=2) + '\n', None)
    return EXIT_OK


def _parse_assignment(text: str, n_vars: int) -> Tuple[bool, ...]:
    """DIMACS literal list (optional leading 'v', optional trailing 0); unlisted variables are false."""
    tokens = text.split()
    if tokens and tokens[0] == 'v':
        tokens = tokens[1:]
    bits = [False] * n_vars
    for token in tokens:
        try:
            literal = int(token)
        except ValueError:
            raise InvalidParameterError(f"assignment token '{token}' is not an integer") from None
        if literal == 0:
            break
        if abs(literal) > n_vars:
            raise InvalidParameterError(f"assignment literal {literal} outside 1..{n_vars}")
        bits[abs(literal) - 1] = literal > 0
    return tuple(bits)


def cmd_energy(args, parser) -> int:
    """Exact Ising energy of one assignment, optionally next to its violated-clause count."""
    hamiltonian = load_hamiltonian(args.hamiltonian)
    assignment = _parse_assignment(args.assignment, hamiltonian.n_spins)
    value = energy(hamiltonian, assignment)
    lines = [
        f"config {assignment_to_index(assignment)}",
        f"energy {value.numerator}/{value.denominator}",
    ]
    if args.input:
        formula = _read_formula(args.input)
        if formula.n_vars != hamiltonian.n_spins:
            raise LengthMismatchError(hamiltonian.n_spins, formula.n_vars)
        lines.append(f"violated {evaluate(formula, assignment)}")
    _write_output('\n'.join(lines) + '\n', None)
    return EXIT_OK


def cmd_gibbs(args, parser) -> int:
    """Report ground energy, degeneracy, occupancies and beta* of one formula."""
    if any(not math.isfinite(beta) or beta < 0 for beta in args.beta):
        parser.error("--beta values must be finite and non-negative")
    if not 0 < args.threshold < 1:
        parser.error("--threshold must lie in (0, 1)")
    formula = _read_formula(args.input)
    threads = RuntimeSettings.resolve(args.threads).threads
    histogram = enumerate_spectrum(formula, limit=args.limit, threads=threads)
    if args.json:
        save_histogram(histogram, args.json)

    lines = [
        f"n_vars {formula.n_vars}",
        f"n_clauses {formula.n_clauses}",
        f"lambda_min {histogram.lambda_min}",
        f"degeneracy {histogram.degeneracy}",
    ]
    for beta in args.beta:
        lines.append(f"p@{beta!r} {ground_occupancy(histogram, beta)!r}")
    beta_star = min_beta_for_occupancy(histogram, args.threshold, args.tol)
    lines.append(f"beta_star@{args.threshold!r} {beta_star!r}")
    _write_output('\n'.join(lines) + '\n', None)
    return EXIT_OK


def cmd_sweep(args, parser) -> int:
    """Run a sweep config and write one CSV and gnuplot script per N."""
    if args.config:
        config = load_sweep_config(args.config)
    else:
        config = PresetManager(args.presets_dir).build_config(args.preset)
    runtime = RuntimeSettings.resolve(args.threads, spectrum_limit=args.limit)

    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(out_dir, e.strerror or str(e))
    ConfigManager.save_config(config, out_dir / f'{config.name}.config.json')
    checkpoint_root = None if args.no_checkpoint else out_dir / 'checkpoints'
    cache = None
    if config.mode == 'gibbs' and not args.no_cache:
        cache = CacheManager(cache_dir=out_dir / 'histograms')

    points = run_sweep(config, runtime, checkpoint_root, cache)
    for path in emit_sweep_artifacts(points, config, out_dir):
        print(f"c wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_window(args, parser) -> int:
    """Scaling window of each sweep CSV."""
    if not 0 < args.delta < 1:
        parser.error("--delta must lie in (0, 1)")
    windows = []
    reports = []
    for csv_path in args.csv:
        points = read_csv(csv_path)
        window = estimate_scaling_window(points, args.delta)
        windows.append(window)
        reports.append(f"file: {csv_path}\n" + format_window_report(window, args.k))
    _write_output('\n\n'.join(reports) + '\n', None)
    if args.out:
        emit_csv(windows, args.out)
    return EXIT_OK


def cmd_plot(args, parser) -> int:
    """Write a gnuplot script for an existing sweep CSV."""
    points = read_csv(args.csv)
    out = args.out or str(Path(args.csv).with_suffix('.gp'))
    emit_plot_script(points, out, Path(args.csv).name)
    print(f"c wrote {out}", file=sys.stderr)
    return EXIT_OK


def cmd_presets(args, parser) -> int:
    """List, export, save or delete sweep presets."""
    manager = PresetManager(args.presets_dir)
    if args.action == 'list':
        lines = [f"{p['id']:<22} {p['type']:<8} {p['description']}" for p in manager.list_all_presets()]
        _write_output('\n'.join(lines) + '\n', None)
        return EXIT_OK
    if not args.name:
        parser.error(f"presets {args.action} needs a preset name")
    if args.action == 'save':
        if not args.config:
            parser.error("presets save needs --config")
        config = load_sweep_config(args.config)
        path = manager.save_preset(args.name, config.name, args.description or '', config)
        print(f"c wrote {path}", file=sys.stderr)
        return EXIT_OK
    if args.action == 'delete':
        if not manager.delete_preset(args.name):
            raise ConfigError(f"no user preset '{args.name}' to delete")
        return EXIT_OK
    if args.out:
        manager.export_preset(args.name, args.out)
    else:
        preset = manager.get_preset(args.name)
        if preset is None:
            raise ConfigError(f"unknown preset '{args.name}'")
        _write_output(json.dumps(preset['config'], indent=2) + '\n', None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gibbssat',
        description="Random k-SAT phase transitions and exact Gibbs ground-state occupancy.")
    parser.add_argument('--threads', type=int, default=None,
                        help='Worker threads (default: $GIBBSSAT_THREADS, then all cores)')
    parser.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Console log level')
    parser.add_argument('--log-file', default=None, help='Also log everything to this file')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    gen = sub.add_parser('gen', help='Generate a random k-SAT instance')
    gen.add_argument('--vars', type=int, required=True, help='Number of variables N')
    count = gen.add_mutually_exclusive_group(required=True)
    count.add_argument('--clauses', type=int, help='Number of clauses M')
    count.add_argument('--alpha', type=float, help='Clause density; M = round(alpha N)')
    gen.add_argument('--k', type=int, default=2, choices=[2, 3], help='Clause width')
    gen.add_argument('--seed', type=int, default=0, help='Instance seed')
    gen.add_argument('--out', default=None, help='DIMACS output file (default: stdout)')
    gen.set_defaults(handler=cmd_gen)

    solve_parser = sub.add_parser('solve', help='Decide a DIMACS formula')
    solve_parser.add_argument('--in', dest='input', required=True, help="DIMACS file ('-' for stdin)")
    solve_parser.add_argument('--solver', default='auto', choices=['auto', '2sat', 'dpll', 'bruteforce'])
    solve_parser.add_argument('--limit', type=int, default=DEFAULT_EXHAUSTIVE_LIMIT,
                              help='Largest N for the brute-force scan')
    solve_parser.set_defaults(handler=cmd_solve)

    embed_parser = sub.add_parser('embed', help='Ising Hamiltonian of a formula as JSON')
    embed_parser.add_argument('--in', dest='input', required=True, help="DIMACS file ('-' for stdin)")
    embed_parser.add_argument('--out', default=None, help='JSON output file (default: stdout)')
    embed_parser.add_argument('--verify', action='store_true',
                              help='Check energies against violated-clause counts exhaustively')
    embed_parser.add_argument('--limit', type=int, default=DEFAULT_EXHAUSTIVE_LIMIT,
                              help='Largest N for --verify')
    embed_parser.set_defaults(handler=cmd_embed)

    gibbs = sub.add_parser('gibbs', help='Exact ground-state occupancy of a formula')
    gibbs.add_argument('--in', dest='input', required=True, help="DIMACS file ('-' for stdin)")
    gibbs.add_argument('--beta', type=float, nargs='+', default=[1.0, 2.0, 3.0], help='Inverse temperatures')
    gibbs.add_argument('--threshold', type=float, default=DEFAULT_THRESHOLD, help='Target occupancy for beta*')
    gibbs.add_argument('--tol', type=float, default=DEFAULT_BETA_TOL, help='beta* tolerance')
    gibbs.add_argument('--json', default=None, help='Write the energy histogram to this file')
    gibbs.add_argument('--limit', type=int, default=DEFAULT_SPECTRUM_LIMIT, help='Largest N enumerated')
    gibbs.set_defaults(handler=cmd_gibbs)

    sweep = sub.add_parser('sweep', help='Run a clause-density sweep')
    source = sweep.add_mutually_exclusive_group(required=True)
    source.add_argument('--config', help='Sweep config JSON file')
    source.add_argument('--preset', help='Built-in or user preset name')
    sweep.add_argument('--out-dir', default='results', help='Directory for CSV, scripts and checkpoints')
    sweep.add_argument('--presets-dir', default='presets', help='User preset directory')
    sweep.add_argument('--limit', type=int, default=DEFAULT_SPECTRUM_LIMIT, help='Largest N enumerated')
    sweep.add_argument('--no-checkpoint', action='store_true', help='Do not write or resume checkpoints')
    sweep.add_argument('--no-cache', action='store_true', help='Do not cache Gibbs histograms on disk')
    sweep.set_defaults(handler=cmd_sweep)

    window = sub.add_parser('window', help='Finite-size scaling window of sweep CSVs')
    window.add_argument('--csv', nargs='+', required=True, help='Sweep CSV file(s), one per N')
    window.add_argument('--delta', type=float, default=0.1, help='Window level in (0, 1)')
    window.add_argument('--k', type=int, choices=[2, 3], default=None,
                        help='Clause width, to print the known 3-SAT bracket')
    window.add_argument('--out', default=None, help='Also write the windows as CSV')
    window.set_defaults(handler=cmd_window)

    energy_parser = sub.add_parser('energy', help='Ising energy of one assignment')
    energy_parser.add_argument('--hamiltonian', required=True, help='Hamiltonian JSON written by embed')
    energy_parser.add_argument('--assignment', required=True,
                               help="DIMACS literals, e.g. '1 -2 3 0' or a solver 'v' line")
    energy_parser.add_argument('--in', dest='input', default=None,
                               help='DIMACS file, to print the violated-clause count as well')
    energy_parser.set_defaults(handler=cmd_energy)

    plot = sub.add_parser('plot', help='gnuplot script for a sweep CSV')
    plot.add_argument('--csv', required=True, help='Sweep CSV file')
    plot.add_argument('--out', default=None, help='Script path (default: CSV path with .gp)')
    plot.set_defaults(handler=cmd_plot)

    presets = sub.add_parser('presets', help='List, export, save or delete sweep presets')
    presets.add_argument('action', choices=['list', 'export', 'save', 'delete'])
    presets.add_argument('name', nargs='?', default=None, help='Preset to export, save or delete')
    presets.add_argument('--config', default=None, help='Sweep config file to save as a preset')
    presets.add_argument('--description', default=None, help='Description of a saved preset')
    presets.add_argument('--out', default=None, help='Config file to write (default: stdout)')
    presets.add_argument('--presets-dir', default='presets', help='User preset directory')
    presets.set_defaults(handler=cmd_presets)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and map errors to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logger = get_logger()
    logger.set_level(args.log_level)
    if args.log_file:
        try:
            logger.add_file_handler(args.log_file)
        except OSError as e:
            logger.error(f"Cannot open log file {args.log_file}: {e}")
            return EXIT_ERROR
    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be >= 1")
        return EXIT_USAGE

    try:
        return args.handler(args, parser)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (GibbsSatError, OSError) as e:
        logger.error(str(e))
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
