"""
Exact Gibbs-state computations for gibbssat.
Parallel enumeration of the energy histogram, ground-state occupancy and the
minimal inverse temperature reaching a target occupancy.

Energies are violated-clause counts, so beta is dimensionless.
"""

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numba
import numpy as np
from numba import njit, prange
from scipy.optimize import brentq

from core.errors import InvalidParameterError, InvalidThresholdError, OutputError, TooLargeError
from core.logger import get_logger
from core.sat_core import CnfFormula


DEFAULT_SPECTRUM_LIMIT = 24
KERNEL_BLOCKS = 256
DEFAULT_THRESHOLD = 0.9
DEFAULT_BETA_TOL = 1e-3


@dataclass(frozen=True)
class EnergyHistogram:
    """Number of spin configurations at each integer energy level."""

    n_spins: int
    counts: Dict[int, int] = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self):
        cleaned = {int(e): int(c) for e, c in sorted(self.counts.items()) if int(c) != 0}
        if not cleaned:
            raise InvalidParameterError("histogram has no populated energy level")
        if any(e < 0 or c < 0 for e, c in cleaned.items()):
            raise InvalidParameterError("histogram levels and counts must be non-negative")
        if sum(cleaned.values()) != 1 << self.n_spins:
            raise InvalidParameterError(
                f"histogram total {sum(cleaned.values())} differs from 2^{self.n_spins}")
        object.__setattr__(self, 'counts', cleaned)

    @property
    def lambda_min(self) -> int:
        return next(iter(self.counts))

    @property
    def degeneracy(self) -> int:
        return self.counts[self.lambda_min]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @cached_property
    def _shifted(self) -> Tuple[np.ndarray, np.ndarray]:
        levels = np.array(list(self.counts.keys()), dtype=np.float64) - self.lambda_min
        weights = np.array(list(self.counts.values()), dtype=np.float64)
        return levels, weights

    def to_json_dict(self) -> dict:
        return {
            'n_spins': self.n_spins,
            'counts': {str(e): c for e, c in self.counts.items()},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> 'EnergyHistogram':
        return cls(int(data['n_spins']), {int(e): int(c) for e, c in data['counts'].items()})


@dataclass(frozen=True)
class OccupancyCurve:
    histogram: EnergyHistogram
    betas: Tuple[float, ...]
    p_values: Tuple[float, ...]


@njit(cache=True)
def _block_histogram(first, stop, masks, patterns, clause_ptr, clause_index, row):
    """Gray-code walk over indices [first, stop); only clauses on the flipped spin change."""
    m = masks.shape[0]
    violated = np.zeros(m, dtype=np.bool_)
    gray = first ^ (first >> 1)
    level = 0
    for c in range(m):
        if (gray & masks[c]) == patterns[c]:
            violated[c] = True
            level += 1
    row[level] += 1

    for i in range(first + 1, stop):
        t = i
        bit = 0
        while (t & 1) == 0:
            t >>= 1
            bit += 1
        gray ^= np.int64(1) << bit
        for p in range(clause_ptr[bit], clause_ptr[bit + 1]):
            c = clause_index[p]
            now = (gray & masks[c]) == patterns[c]
            if now != violated[c]:
                violated[c] = now
                if now:
                    level += 1
                else:
                    level -= 1
        row[level] += 1


@njit(parallel=True, cache=True)
def _spectrum_kernel(n_configs, n_blocks, masks, patterns, clause_ptr, clause_index, n_levels):
    histogram = np.zeros((n_blocks, n_levels), dtype=np.int64)
    block = (n_configs + n_blocks - 1) // n_blocks
    for b in prange(n_blocks):
        first = b * block
        stop = min(first + block, n_configs)
        if first < stop:
            _block_histogram(first, stop, masks, patterns, clause_ptr, clause_index, histogram[b])
    return histogram


def _clauses_by_variable(formula: CnfFormula) -> Tuple[np.ndarray, np.ndarray]:
    """CSR index of the clauses each variable occurs in."""
    flat_vars = formula.variables.reshape(-1)
    flat_clauses = np.repeat(np.arange(formula.n_clauses, dtype=np.int64), formula.k)
    order = np.argsort(flat_vars, kind='stable')
    ptr = np.zeros(formula.n_vars + 1, dtype=np.int64)
    ptr[1:] = np.cumsum(np.bincount(flat_vars, minlength=formula.n_vars))
    return ptr, flat_clauses[order].astype(np.int64)


def set_kernel_threads(threads: Optional[int]) -> int:
    """Clamp and apply the enumeration thread count; returns the count in effect."""
    if threads:
        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


def enumerate_spectrum(formula: CnfFormula, limit: int = DEFAULT_SPECTRUM_LIMIT,
                       threads: Optional[int] = None) -> EnergyHistogram:
    """
    Exact energy histogram over all 2^N configurations.

    The index range is cut into a fixed number of contiguous blocks, each
    filling a private histogram row; rows merge by integer addition, so the
    result does not depend on the thread count.

    Args:
        formula: Input formula
        limit: Largest N accepted
        threads: Kernel threads (None keeps the current numba setting)
    """
    if formula.n_vars > limit:
        raise TooLargeError(formula.n_vars, limit)

    n_configs = 1 << formula.n_vars
    n_blocks = min(KERNEL_BLOCKS, n_configs)
    in_effect = set_kernel_threads(threads)
    masks, patterns = formula.clause_masks
    clause_ptr, clause_index = _clauses_by_variable(formula)

    get_logger().debug(
        f"Enumerating 2^{formula.n_vars} configurations, {formula.n_clauses} clauses, "
        f"{n_blocks} blocks on {in_effect} threads")
    rows = _spectrum_kernel(
        np.int64(n_configs), np.int64(n_blocks),
        np.ascontiguousarray(masks, dtype=np.int64),
        np.ascontiguousarray(patterns, dtype=np.int64),
        clause_ptr, clause_index, formula.n_clauses + 1
    )
    merged = rows.sum(axis=0)
    return EnergyHistogram(formula.n_vars, {e: int(c) for e, c in enumerate(merged.tolist()) if c})


def partition_function(hist: EnergyHistogram, beta: float) -> float:
    """Z = sum_e counts(e) exp(-beta e), unshifted."""
    return math.fsum(c * math.exp(-beta * e) for e, c in hist.counts.items())


def ground_occupancy(hist: EnergyHistogram, beta: float) -> float:
    """
    Gibbs probability mass on the ground level.

    Computed as d / sum_e counts(e) exp(-beta (e - lambda_min)); the shift keeps
    every exponent non-positive.
    """
    if not math.isfinite(beta) or beta < 0:
        raise InvalidParameterError(f"beta must be finite and non-negative, got {beta}")
    levels, weights = hist._shifted
    boltzmann = weights * np.exp(-beta * levels)
    return hist.degeneracy / math.fsum(boltzmann.tolist())


def occupancy_curve(hist: EnergyHistogram, betas: Sequence[float]) -> OccupancyCurve:
    betas = tuple(float(b) for b in betas)
    return OccupancyCurve(hist, betas, tuple(ground_occupancy(hist, b) for b in betas))


def min_beta_for_occupancy(hist: EnergyHistogram, threshold: float = DEFAULT_THRESHOLD,
                           tol: float = DEFAULT_BETA_TOL) -> float:
    """
    Smallest beta (to within tol) with ground occupancy at least threshold.

    Returns an upper bracket: p(result) >= threshold and p(result - 2 tol) < threshold.
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidThresholdError(f"threshold must lie in (0, 1), got {threshold}")
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    if ground_occupancy(hist, 0.0) >= threshold:
        return 0.0

    # Gap >= 1, so p(N ln 2 + 10) >= 1 / (1 + e^-10)
    beta_max = hist.n_spins * math.log(2.0) + 10.0
    while ground_occupancy(hist, beta_max) < threshold:
        get_logger().warning(f"Occupancy {threshold} not reached at beta={beta_max:.3f}; doubling bracket")
        beta_max *= 2.0

    root = brentq(lambda b: ground_occupancy(hist, b) - threshold, 0.0, beta_max, xtol=tol / 4.0)
    return root + tol / 2.0


def save_histogram(hist: EnergyHistogram, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(json.dumps(hist.to_json_dict()) + '\n', encoding='utf-8')
    except OSError as e:
        raise OutputError(path, e.strerror or str(e))


def load_histogram(path: Union[str, Path]) -> EnergyHistogram:
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise OutputError(path, str(e))
    return EnergyHistogram.from_json_dict(data)
