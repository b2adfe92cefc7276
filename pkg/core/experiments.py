"""
Ensemble experiments for gibbssat.
Clause-density sweeps (satisfiability and Gibbs occupancy), finite-size scaling
windows, checkpoint/resume, CSV tables and gnuplot scripts.
"""

import csv
import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from core.cache_manager import CacheManager, cache_key
from core.errors import (
    EmptySweepError, InvalidParameterError, OutputError, ResumeMismatchError,
    SolverDisagreementError, TooLargeError
)
from core.gibbs import EnergyHistogram, enumerate_spectrum, ground_occupancy, min_beta_for_occupancy, set_kernel_threads
from core.logger import get_logger
from core.sat_core import derive_seed, generate_instance
from core.settings import RuntimeSettings, SweepConfig
from core.solver import solve, solve_2sat, solve_dpll


SAT_HEADER = [
    'n_vars', 'alpha_nominal', 'alpha', 'm_clauses', 'n_instances',
    'sat_fraction', 'work_mean', 'work_median',
]
GIBBS_BASE_HEADER = [
    'n_vars', 'alpha_nominal', 'alpha', 'm_clauses', 'n_instances',
    'sat_fraction', 'lambda_min_mean', 'log2_degeneracy_mean',
]
BETA_STAR_HEADER = ['beta_star_mean', 'beta_star_std', 'beta_star_stderr']
WINDOW_HEADER = ['delta', 'alpha_minus', 'alpha_plus', 'width', 'minus_clamped', 'plus_clamped']

# Rigorous 3-SAT threshold bounds, printed next to measured windows
PROVEN_3SAT_BRACKET = (3.52, 4.453)

ProgressCallback = Callable[[int, int], None]


def clause_count(alpha: float, n_vars: int) -> int:
    """M = round(alpha N), halves rounded up."""
    return int(math.floor(alpha * n_vars + 0.5))


@dataclass(frozen=True)
class InstanceRecord:
    """Outcome of one ensemble member; Gibbs records carry the histogram."""

    instance: int
    seed: int
    satisfiable: bool
    work: int = 0
    histogram: Optional[EnergyHistogram] = None

    def to_json_dict(self) -> dict:
        data = {'instance': self.instance, 'seed': self.seed,
                'satisfiable': self.satisfiable, 'work': self.work}
        if self.histogram is not None:
            data['histogram'] = self.histogram.to_json_dict()
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> 'InstanceRecord':
        histogram = data.get('histogram')
        return cls(
            instance=int(data['instance']),
            seed=int(data['seed']),
            satisfiable=bool(data['satisfiable']),
            work=int(data['work']),
            histogram=EnergyHistogram.from_json_dict(histogram) if histogram else None,
        )


@dataclass(frozen=True)
class SweepPoint:
    """
    Ensemble statistics at one clause density.

    Satisfiability points fill the work fields; Gibbs points fill the
    occupancy and beta* fields (one p entry per configured beta).
    """

    n_vars: int
    alpha_nominal: float
    alpha: float
    m_clauses: int
    n_instances: int
    sat_fraction: float
    work_mean: Optional[float] = None
    work_median: Optional[float] = None
    lambda_min_mean: Optional[float] = None
    log2_degeneracy_mean: Optional[float] = None
    betas: Tuple[float, ...] = ()
    p_mean: Tuple[float, ...] = ()
    p_std: Tuple[float, ...] = ()
    p_stderr: Tuple[float, ...] = ()
    beta_star_mean: Optional[float] = None
    beta_star_std: Optional[float] = None
    beta_star_stderr: Optional[float] = None

    @property
    def mode(self) -> str:
        return 'gibbs' if self.betas else 'satisfiability'


@dataclass(frozen=True)
class ScalingWindow:
    """Density interval where satisfiability falls from 1 - delta to delta."""

    delta: float
    alpha_minus: float
    alpha_plus: float
    minus_clamped: bool = False
    plus_clamped: bool = False
    n_vars: Optional[int] = field(default=None, compare=False)

    @property
    def width(self) -> float:
        return self.alpha_plus - self.alpha_minus


class _Task(NamedTuple):
    mode: str
    k: int
    n_vars: int
    m_clauses: int
    seed: int
    instance: int
    work_solver: str
    spectrum_limit: int


def _run_instance(task: _Task) -> InstanceRecord:
    """Generate and analyse one instance; module level so pool workers can import it."""
    formula = generate_instance(task.n_vars, task.m_clauses, task.k, task.seed)

    if task.mode == 'gibbs':
        histogram = enumerate_spectrum(formula, limit=task.spectrum_limit)
        return InstanceRecord(task.instance, task.seed, histogram.lambda_min == 0, 0, histogram)

    if task.work_solver == 'native':
        result = solve(formula)
        return InstanceRecord(task.instance, task.seed, result.satisfiable, result.work.total)

    result = solve_dpll(formula)
    if task.k == 2:
        native = solve_2sat(formula)
        if native.satisfiable != result.satisfiable:
            raise SolverDisagreementError(
                f"seed {task.seed}: implication graph says {native.satisfiable}, "
                f"DPLL says {result.satisfiable}")
    return InstanceRecord(task.instance, task.seed, result.satisfiable, result.work.total)


def _init_worker() -> None:
    # Ensemble parallelism lives in the pool; keep each kernel single-threaded
    set_kernel_threads(1)


def _summary(values: np.ndarray) -> Tuple[float, float, float]:
    """Mean, sample standard deviation and standard error (spread is 0 for one value)."""
    n = values.shape[0]
    mean = float(values.mean())
    if n < 2:
        return mean, 0.0, 0.0
    std = float(values.std(ddof=1))
    return mean, std, std / math.sqrt(n)


def aggregate_records(n_vars: int, alpha_nominal: float, m_clauses: int, records: Sequence[InstanceRecord],
                      config: SweepConfig) -> SweepPoint:
    """Reduce instance records, in instance order, to one SweepPoint."""
    records = sorted(records, key=lambda r: r.instance)
    n = len(records)
    satisfiable = np.array([r.satisfiable for r in records], dtype=np.float64)
    base = dict(
        n_vars=n_vars,
        alpha_nominal=float(alpha_nominal),
        alpha=m_clauses / n_vars,
        m_clauses=m_clauses,
        n_instances=n,
        sat_fraction=float(satisfiable.mean()),
    )

    if config.mode == 'satisfiability':
        work = np.array([r.work for r in records], dtype=np.float64)
        return SweepPoint(work_mean=float(work.mean()), work_median=float(np.median(work)), **base)

    histograms = [r.histogram for r in records]
    p_stats = []
    for beta in config.betas:
        p_stats.append(_summary(np.array([ground_occupancy(h, beta) for h in histograms])))
    beta_star = np.array([min_beta_for_occupancy(h, config.threshold, config.beta_tol) for h in histograms])
    star_mean, star_std, star_err = _summary(beta_star)
    return SweepPoint(
        lambda_min_mean=float(np.mean([h.lambda_min for h in histograms])),
        log2_degeneracy_mean=float(np.mean([math.log2(h.degeneracy) for h in histograms])),
        betas=tuple(config.betas),
        p_mean=tuple(s[0] for s in p_stats),
        p_std=tuple(s[1] for s in p_stats),
        p_stderr=tuple(s[2] for s in p_stats),
        beta_star_mean=star_mean,
        beta_star_std=star_std,
        beta_star_stderr=star_err,
        **base
    )


class Checkpoint:
    """
    Per-density results of one (config, N) sweep on disk.

    A manifest records the config hash; a directory written by another config
    is refused rather than mixed.
    """

    def __init__(self, directory: Union[str, Path], config: SweepConfig):
        self.directory = Path(directory)
        self.config = config
        self.config_hash = config.config_hash()

    def open(self) -> None:
        manifest = self.directory / 'manifest.json'
        try:
            if manifest.exists():
                recorded = json.loads(manifest.read_text(encoding='utf-8')).get('config_hash')
                if recorded != self.config_hash:
                    raise ResumeMismatchError(
                        f"{self.directory} belongs to config {recorded}, current config is {self.config_hash}")
                get_logger().info(f"Resuming from checkpoint {self.directory}")
                return
            self.directory.mkdir(parents=True, exist_ok=True)
            self._write(manifest, {'config_hash': self.config_hash, 'config': self.config.to_dict()})
        except (OSError, json.JSONDecodeError) as e:
            raise OutputError(manifest, str(e))

    def _density_path(self, density_index: int) -> Path:
        return self.directory / f'density_{density_index}.json'

    @staticmethod
    def _write(path: Path, data: dict) -> None:
        tmp = path.with_name(path.name + '.tmp')
        tmp.write_text(json.dumps(data) + '\n', encoding='utf-8')
        os.replace(tmp, path)

    def load(self, density_index: int) -> Optional[List[InstanceRecord]]:
        path = self._density_path(density_index)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
            records = [InstanceRecord.from_json_dict(r) for r in data['records']]
        except (OSError, ValueError, KeyError) as e:
            get_logger().warning(f"Ignoring unreadable checkpoint {path}: {e}")
            return None
        if len(records) != self.config.instances_per_density:
            get_logger().warning(f"Ignoring incomplete checkpoint {path}")
            return None
        return records

    def save(self, density_index: int, alpha: float, m_clauses: int, records: Sequence[InstanceRecord]) -> None:
        path = self._density_path(density_index)
        data = {
            'density_index': density_index,
            'alpha_nominal': alpha,
            'm_clauses': m_clauses,
            'records': [r.to_json_dict() for r in records],
        }
        try:
            self._write(path, data)
        except OSError as e:
            raise OutputError(path, e.strerror or str(e))


def _execute(tasks: List[_Task], pool, workers: int) -> List[InstanceRecord]:
    if pool is None:
        records = [_run_instance(task) for task in tasks]
    else:
        chunksize = max(1, len(tasks) // (4 * workers))
        records = list(pool.imap(_run_instance, tasks, chunksize=chunksize))
    return sorted(records, key=lambda r: r.instance)


def _attach_cached_histograms(records: List[InstanceRecord], cache: Optional[CacheManager], k: int,
                              n_vars: int, m_clauses: int) -> Optional[List[InstanceRecord]]:
    """Fill histograms left out of a checkpoint from the cache; None if any is gone."""
    attached = []
    for record in records:
        if record.histogram is None:
            histogram = cache.get_histogram(cache_key(k, n_vars, m_clauses, record.seed)) if cache else None
            if histogram is None:
                get_logger().warning(
                    f"Checkpoint for N={n_vars} M={m_clauses} references uncached histograms; recomputing")
                return None
            record = replace(record, histogram=histogram)
        attached.append(record)
    return attached


def _sweep_one_size(config: SweepConfig, runtime: RuntimeSettings, pool,
                    checkpoint_root: Optional[Path], cache: Optional[CacheManager],
                    progress_callback: Optional[ProgressCallback], progress_offset: int,
                    progress_total: int) -> List[SweepPoint]:
    logger = get_logger()
    n_vars = config.n_vars[0]
    checkpoint = None
    if checkpoint_root is not None:
        checkpoint = Checkpoint(Path(checkpoint_root) / f"{config.name}_n{n_vars}", config)
        checkpoint.open()

    points = []
    for density_index, alpha in enumerate(config.densities):
        started = time.perf_counter()
        m_clauses = clause_count(alpha, n_vars)
        records = checkpoint.load(density_index) if checkpoint else None
        if records is not None and config.mode == 'gibbs':
            records = _attach_cached_histograms(records, cache, config.k, n_vars, m_clauses)
        if records is not None:
            logger.info(f"N={n_vars} alpha={alpha}: loaded {len(records)} instances from checkpoint")
        else:
            records = []
            tasks = []
            for instance in range(config.instances_per_density):
                seed = derive_seed(config.master_seed, n_vars, density_index, instance)
                key = cache_key(config.k, n_vars, m_clauses, seed)
                cached = cache.get_histogram(key) if cache is not None and config.mode == 'gibbs' else None
                if cached is not None:
                    records.append(InstanceRecord(instance, seed, cached.lambda_min == 0, 0, cached))
                    continue
                tasks.append(_Task(config.mode, config.k, n_vars, m_clauses, seed, instance,
                                   config.work_solver, runtime.spectrum_limit))
            fresh = _execute(tasks, pool, runtime.threads)
            if cache is not None and config.mode == 'gibbs':
                for record in fresh:
                    cache.cache_histogram(cache_key(config.k, n_vars, m_clauses, record.seed), record.histogram)
            records = sorted(records + fresh, key=lambda r: r.instance)
            if checkpoint is not None:
                # Histograms held by the cache are not written a second time
                stored = records
                if cache is not None and config.mode == 'gibbs':
                    stored = [replace(r, histogram=None) for r in records]
                checkpoint.save(density_index, alpha, m_clauses, stored)

        point = aggregate_records(n_vars, alpha, m_clauses, records, config)
        points.append(point)
        logger.info(
            f"N={n_vars} alpha={alpha} (M={m_clauses}): sat={point.sat_fraction:.3f} "
            f"in {time.perf_counter() - started:.2f}s")
        if progress_callback:
            progress_callback(progress_offset + density_index + 1, progress_total)
    return points


def run_sweep(config: SweepConfig, runtime: Optional[RuntimeSettings] = None,
              checkpoint_root: Optional[Union[str, Path]] = None, cache: Optional[CacheManager] = None,
              progress_callback: Optional[ProgressCallback] = None) -> List[SweepPoint]:
    """
    Run every (N, density) point of a sweep.

    Instances are processed sequentially when runtime.threads == 1 and by a
    process pool otherwise; records are reduced in instance order, so the
    points do not depend on the thread count.

    Args:
        config: Validated sweep config
        runtime: Thread count and exhaustive limits
        checkpoint_root: Directory for resumable per-density results (None: off)
        cache: Histogram cache for Gibbs sweeps
        progress_callback: Function(densities_done, densities_total)

    Returns:
        Points ordered by N, then density
    """
    runtime = runtime or RuntimeSettings()
    if config.mode == 'gibbs':
        for n_vars in config.n_vars:
            if n_vars > runtime.spectrum_limit:
                raise TooLargeError(n_vars, runtime.spectrum_limit)

    total = len(config.n_vars) * len(config.densities)
    get_logger().info(
        f"Sweep '{config.name}': {config.mode}, k={config.k}, N={list(config.n_vars)}, "
        f"{len(config.densities)} densities x {config.instances_per_density} instances, "
        f"{runtime.threads} threads")

    pool = None
    kernel_threads = set_kernel_threads(None)
    if runtime.threads > 1:
        pool = multiprocessing.get_context('spawn').Pool(runtime.threads, initializer=_init_worker)
    else:
        set_kernel_threads(1)
    try:
        points = []
        for offset, n_vars in enumerate(config.n_vars):
            points.extend(_sweep_one_size(
                config.for_size(n_vars), runtime, pool,
                Path(checkpoint_root) if checkpoint_root is not None else None,
                cache, progress_callback, offset * len(config.densities), total))
        return points
    finally:
        if pool is not None:
            pool.close()
            pool.join()
        set_kernel_threads(kernel_threads)


def run_satisfiability_sweep(config: SweepConfig, runtime: Optional[RuntimeSettings] = None,
                             checkpoint_root: Optional[Union[str, Path]] = None,
                             progress_callback: Optional[ProgressCallback] = None) -> List[SweepPoint]:
    """Satisfiable fraction and solver work per density."""
    if config.mode != 'satisfiability':
        raise InvalidParameterError(f"expected a satisfiability config, got mode '{config.mode}'")
    return run_sweep(config, runtime, checkpoint_root, progress_callback=progress_callback)


def run_gibbs_sweep(config: SweepConfig, runtime: Optional[RuntimeSettings] = None,
                    checkpoint_root: Optional[Union[str, Path]] = None, cache: Optional[CacheManager] = None,
                    progress_callback: Optional[ProgressCallback] = None) -> List[SweepPoint]:
    """Ground-state occupancy per beta and beta* per density."""
    if config.mode != 'gibbs':
        raise InvalidParameterError(f"expected a gibbs config, got mode '{config.mode}'")
    return run_sweep(config, runtime, checkpoint_root, cache, progress_callback)


def _crossing(a0: float, f0: float, a1: float, f1: float, level: float) -> float:
    if f0 == f1:
        return a0
    return a0 + (a1 - a0) * (f0 - level) / (f0 - f1)


def estimate_scaling_window(points: Sequence[SweepPoint], delta: float) -> ScalingWindow:
    """
    Finite-size scaling window of one satisfiability sweep.

    alpha_minus is the last density with sat_fraction > 1 - delta, alpha_plus the
    first with sat_fraction < delta; each is refined by linear interpolation
    towards its neighbour. A missing crossing falls back to the range end and is
    flagged.
    """
    if not points:
        raise EmptySweepError("cannot estimate a scaling window from an empty sweep")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    sizes = {p.n_vars for p in points}
    if len(sizes) > 1:
        raise InvalidParameterError(f"points mix several variable counts: {sorted(sizes)}")

    ordered = sorted(points, key=lambda p: p.alpha_nominal)
    alphas = [p.alpha for p in ordered]
    fractions = [p.sat_fraction for p in ordered]
    upper = 1.0 - delta

    above = [i for i, f in enumerate(fractions) if f > upper]
    if not above:
        alpha_minus, minus_clamped = alphas[0], True
    else:
        i = above[-1]
        minus_clamped = False
        if i + 1 < len(alphas):
            alpha_minus = _crossing(alphas[i], fractions[i], alphas[i + 1], fractions[i + 1], upper)
        else:
            alpha_minus = alphas[i]

    below = [j for j, f in enumerate(fractions) if f < delta]
    if not below:
        alpha_plus, plus_clamped = alphas[-1], True
    else:
        j = below[0]
        plus_clamped = False
        if j > 0:
            alpha_plus = _crossing(alphas[j - 1], fractions[j - 1], alphas[j], fractions[j], delta)
        else:
            alpha_plus = alphas[j]

    if alpha_minus > alpha_plus:
        middle = (alpha_minus + alpha_plus) / 2.0
        get_logger().warning(
            f"Non-monotone satisfiability curve: alpha-={alpha_minus:.4f} > alpha+={alpha_plus:.4f}; "
            f"collapsing window to {middle:.4f}")
        alpha_minus = alpha_plus = middle

    return ScalingWindow(delta, alpha_minus, alpha_plus, minus_clamped, plus_clamped, ordered[0].n_vars)


def format_window_report(window: ScalingWindow, k: Optional[int] = None) -> str:
    lines = []
    if window.n_vars is not None:
        lines.append(f"n_vars: {window.n_vars}")
    lines.extend([
        f"delta: {window.delta}",
        f"alpha_minus: {window.alpha_minus:.6f}" + (" (clamped to range start)" if window.minus_clamped else ""),
        f"alpha_plus: {window.alpha_plus:.6f}" + (" (clamped to range end)" if window.plus_clamped else ""),
        f"width: {window.width:.6f}",
    ])
    if k == 3:
        low, high = PROVEN_3SAT_BRACKET
        lines.append(f"proven 3-SAT threshold bracket: [{low}, {high}]")
    return '\n'.join(lines)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def csv_header(mode: str, betas: Sequence[float] = ()) -> List[str]:
    if mode == 'satisfiability':
        return list(SAT_HEADER)
    header = list(GIBBS_BASE_HEADER)
    for beta in betas:
        b = repr(float(beta))
        header.extend([f'p_mean@{b}', f'p_std@{b}', f'p_stderr@{b}'])
    return header + BETA_STAR_HEADER


def _point_row(point: SweepPoint) -> List[str]:
    row = [point.n_vars, point.alpha_nominal, point.alpha, point.m_clauses, point.n_instances, point.sat_fraction]
    if point.mode == 'satisfiability':
        row += [point.work_mean, point.work_median]
    else:
        row += [point.lambda_min_mean, point.log2_degeneracy_mean]
        for mean, std, err in zip(point.p_mean, point.p_std, point.p_stderr):
            row += [mean, std, err]
        row += [point.beta_star_mean, point.beta_star_std, point.beta_star_stderr]
    return [_fmt(v) for v in row]


def emit_csv(data: Union[Sequence[SweepPoint], ScalingWindow, Sequence[ScalingWindow]],
             path: Union[str, Path], mode: Optional[str] = None, betas: Sequence[float] = ()) -> None:
    """
    Write sweep points or scaling windows as CSV.

    Args:
        data: Points of one sweep, or one or more windows
        path: Output file
        mode: Header used for an empty point list ('satisfiability' or 'gibbs')
        betas: Beta columns used for an empty Gibbs point list
    """
    if isinstance(data, ScalingWindow):
        data = [data]
    data = list(data)

    if data and isinstance(data[0], ScalingWindow):
        header = WINDOW_HEADER
        rows = [[_fmt(w.delta), _fmt(w.alpha_minus), _fmt(w.alpha_plus), _fmt(w.width),
                 _fmt(w.minus_clamped), _fmt(w.plus_clamped)] for w in data]
    else:
        if data:
            mode, betas = data[0].mode, data[0].betas
        header = csv_header(mode or 'satisfiability', betas)
        rows = [_point_row(p) for p in data]

    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def read_csv(path: Union[str, Path]) -> List[SweepPoint]:
    """Parse a sweep CSV written by emit_csv."""
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))
    if not rows:
        raise OutputError(path, "empty file, expected a header row")

    header, body = rows[0], rows[1:]
    if header == SAT_HEADER:
        betas = ()
    elif header[:len(GIBBS_BASE_HEADER)] == GIBBS_BASE_HEADER and header[-3:] == BETA_STAR_HEADER:
        betas = tuple(float(name.split('@', 1)[1]) for name in header if name.startswith('p_mean@'))
        if header != csv_header('gibbs', betas):
            raise OutputError(path, "unrecognised gibbs column layout")
    else:
        raise OutputError(path, "header is neither a satisfiability nor a gibbs sweep table")

    points = []
    for line_number, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise OutputError(path, f"line {line_number} has {len(row)} fields, expected {len(header)}")
        values: Dict[str, str] = dict(zip(header, row))
        base = dict(
            n_vars=int(values['n_vars']),
            alpha_nominal=float(values['alpha_nominal']),
            alpha=float(values['alpha']),
            m_clauses=int(values['m_clauses']),
            n_instances=int(values['n_instances']),
            sat_fraction=float(values['sat_fraction']),
        )
        if not betas:
            points.append(SweepPoint(work_mean=float(values['work_mean']),
                                     work_median=float(values['work_median']), **base))
            continue
        keys = [repr(b) for b in betas]
        points.append(SweepPoint(
            lambda_min_mean=float(values['lambda_min_mean']),
            log2_degeneracy_mean=float(values['log2_degeneracy_mean']),
            betas=betas,
            p_mean=tuple(float(values[f'p_mean@{b}']) for b in keys),
            p_std=tuple(float(values[f'p_std@{b}']) for b in keys),
            p_stderr=tuple(float(values[f'p_stderr@{b}']) for b in keys),
            beta_star_mean=float(values['beta_star_mean']),
            beta_star_std=float(values['beta_star_std']),
            beta_star_stderr=float(values['beta_star_stderr']),
            **base
        ))
    return points


def plot_script(csv_name: str, mode: str, betas: Sequence[float] = (), title: str = '') -> str:
    """gnuplot program for one sweep table; columns are looked up in the CSV header."""
    header = csv_header(mode, betas)
    col = {name: index + 1 for index, name in enumerate(header)}
    stem = Path(csv_name).stem
    lines = [
        "# Generated by gibbssat; run with: gnuplot " + f"{stem}.gp",
        "set datafile separator ','",
        "set terminal pngcairo size 900,700",
        f"set output '{stem}.png'",
        "set grid",
        "set xlabel 'clause density alpha = M/N'",
    ]
    alpha = col['alpha']
    if mode == 'satisfiability':
        lines += [
            f"set title '{title or stem}: satisfiability and solver work'",
            "set ylabel 'satisfiable instances (%)'",
            "set y2label 'median work (decisions + propagations)'",
            "set yrange [0:105]",
            "set ytics nomirror",
            "set y2tics",
            "set key outside bottom center horizontal",
            f"plot '{csv_name}' every ::1 using {alpha}:(${col['sat_fraction']}*100) "
            "with linespoints pt 7 title 'satisfiable %' axes x1y1, \\",
            f"     '' every ::1 using {alpha}:{col['work_median']} "
            "with linespoints pt 5 title 'median work' axes x1y2",
        ]
        return '\n'.join(lines) + '\n'

    lines += [
        "set multiplot layout 2,1",
        f"set title '{title or stem}: ground-state occupancy (bars: standard deviation)'",
        "set ylabel 'p(lambda_min, beta)'",
        "set key bottom right",
    ]
    plots = []
    for beta in betas:
        b = repr(float(beta))
        plots.append(
            f"'{csv_name}' every ::1 using {alpha}:{col[f'p_mean@{b}']}:{col[f'p_std@{b}']} "
            f"with yerrorlines title 'beta = {b}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    lines += [
        f"set title '{title or stem}: minimal beta for target occupancy'",
        "set ylabel 'beta*'",
        f"plot '{csv_name}' every ::1 using {alpha}:{col['beta_star_mean']}:{col['beta_star_std']} "
        "with yerrorlines pt 7 title 'beta*'",
        "unset multiplot",
    ]
    return '\n'.join(lines) + '\n'


def emit_plot_script(points: Sequence[SweepPoint], path: Union[str, Path], csv_name: Optional[str] = None,
                     mode: Optional[str] = None, betas: Sequence[float] = ()) -> None:
    """Write the gnuplot script for a sweep table (the CSV is referenced by name, next to the script)."""
    if points:
        mode, betas = points[0].mode, points[0].betas
    path = Path(path)
    csv_name = csv_name or path.with_suffix('.csv').name
    try:
        path.write_text(plot_script(csv_name, mode or 'satisfiability', betas), encoding='utf-8')
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def emit_sweep_artifacts(points: Sequence[SweepPoint], config: SweepConfig,
                         out_dir: Union[str, Path]) -> List[Path]:
    """One CSV and one gnuplot script per variable count."""
    out_dir = Path(out_dir)
    written = []
    for n_vars in config.n_vars:
        subset = [p for p in points if p.n_vars == n_vars]
        stem = f"{config.name}_n{n_vars}"
        csv_path = out_dir / f"{stem}.csv"
        script_path = out_dir / f"{stem}.gp"
        emit_csv(subset, csv_path, mode=config.mode, betas=config.betas if config.mode == 'gibbs' else ())
        emit_plot_script(subset, script_path, csv_path.name, mode=config.mode,
                         betas=config.betas if config.mode == 'gibbs' else ())
        written += [csv_path, script_path]
    return written
