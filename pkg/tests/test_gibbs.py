import math

import numba
import numpy as np
import pytest

from core.errors import InvalidParameterError, InvalidThresholdError, TooLargeError
from core.gibbs import (
    EnergyHistogram, enumerate_spectrum, ground_occupancy, load_histogram,
    min_beta_for_occupancy, occupancy_curve, partition_function, save_histogram
)
from core.sat_core import CnfFormula, generate_instance, violations_for_configs
from core.solver import max_sat_bruteforce


def test_empty_formula_spectrum():
    hist = enumerate_spectrum(CnfFormula(4, 2))
    assert hist.counts == {0: 16}


def test_single_clause_spectrum(single_clause):
    assert enumerate_spectrum(single_clause).counts == {0: 3, 1: 1}


def test_two_clause_formula_spectrum(two_clause_formula):
    hist = enumerate_spectrum(two_clause_formula)
    assert hist.counts == {0: 25, 1: 6, 2: 1}
    assert hist.lambda_min == 0
    assert hist.degeneracy == 25


def test_contradiction_spectrum(contradiction):
    hist = enumerate_spectrum(contradiction)
    assert hist.counts == {1: 4}
    assert ground_occupancy(hist, 0.0) == 1.0


@pytest.mark.parametrize('k, seed', [(2, 1), (2, 2), (3, 3), (3, 4)])
def test_spectrum_matches_bruteforce(k, seed):
    formula = generate_instance(12, 40, k, seed)
    hist = enumerate_spectrum(formula)
    assert hist.total == 4096
    assert (hist.lambda_min, hist.degeneracy) == tuple(max_sat_bruteforce(formula))
    direct = np.bincount(violations_for_configs(formula, np.arange(4096)))
    assert hist.counts == {e: int(c) for e, c in enumerate(direct.tolist()) if c}


def test_spectrum_is_thread_count_invariant():
    formula = generate_instance(16, 48, 3, seed=77)
    results = [enumerate_spectrum(formula, threads=t).counts
               for t in (1, 2, 4, numba.config.NUMBA_NUM_THREADS)]
    assert all(r == results[0] for r in results)


def test_spectrum_limit():
    with pytest.raises(TooLargeError):
        enumerate_spectrum(CnfFormula(25, 2))
    with pytest.raises(TooLargeError):
        enumerate_spectrum(CnfFormula(10, 2), limit=8)


def test_histogram_requires_full_count():
    with pytest.raises(InvalidParameterError):
        EnergyHistogram(2, {0: 3})
    with pytest.raises(InvalidParameterError):
        EnergyHistogram(1, {})


def test_occupancy_at_zero_beta_is_degeneracy_share(two_clause_formula):
    hist = enumerate_spectrum(two_clause_formula)
    assert ground_occupancy(hist, 0.0) == 25 / 32


def test_occupancy_limits_and_monotonicity():
    hist = enumerate_spectrum(generate_instance(14, 30, 2, seed=9))
    assert ground_occupancy(hist, 50.0) == pytest.approx(1.0, abs=1e-9)
    curve = occupancy_curve(hist, np.linspace(0.0, 10.0, 100))
    assert all(b >= a for a, b in zip(curve.p_values, curve.p_values[1:]))


@pytest.mark.parametrize('beta', [-0.5, math.inf, math.nan])
def test_occupancy_rejects_negative_or_non_finite_beta(single_clause, beta):
    with pytest.raises(InvalidParameterError):
        ground_occupancy(enumerate_spectrum(single_clause), beta)


@pytest.mark.parametrize('beta', [0.3, 1.0, 2.0, 3.0])
def test_occupancy_matches_direct_summation(beta):
    formula = generate_instance(16, 40, 3, seed=12)
    hist = enumerate_spectrum(formula)
    energies = violations_for_configs(formula, np.arange(1 << 16)).astype(np.float64)
    weights = np.exp(-beta * energies)
    direct = math.fsum(weights[energies == energies.min()].tolist()) / math.fsum(weights.tolist())
    assert ground_occupancy(hist, beta) == pytest.approx(direct, rel=1e-12)
    unshifted = hist.degeneracy * math.exp(-beta * hist.lambda_min) / partition_function(hist, beta)
    assert ground_occupancy(hist, beta) == pytest.approx(unshifted, rel=1e-12)


def test_beta_star_closed_form():
    hist = EnergyHistogram(1, {0: 1, 1: 1})
    beta_star = min_beta_for_occupancy(hist, 0.9)
    assert beta_star == pytest.approx(math.log(9), abs=1e-3)
    assert ground_occupancy(hist, beta_star) >= 0.9
    assert ground_occupancy(hist, beta_star - 2e-3) < 0.9


def test_beta_star_is_zero_when_already_reached():
    assert min_beta_for_occupancy(EnergyHistogram(3, {0: 8}), 0.9) == 0.0
    assert min_beta_for_occupancy(EnergyHistogram(2, {1: 4}), 0.5) == 0.0


def test_beta_star_expands_bracket_near_one(log_records):
    hist = EnergyHistogram(4, {0: 1, 1: 15})
    threshold = 1 - 1e-9
    beta_star = min_beta_for_occupancy(hist, threshold)
    assert ground_occupancy(hist, beta_star) >= threshold
    assert any(level == 'WARNING' for level, _ in log_records)


@pytest.mark.parametrize('threshold', [0.0, 1.0, 1.5, -0.1])
def test_beta_star_threshold_range(threshold):
    with pytest.raises(InvalidThresholdError):
        min_beta_for_occupancy(EnergyHistogram(1, {0: 1, 1: 1}), threshold)


def test_histogram_json_round_trip(tmp_path, two_clause_formula):
    hist = enumerate_spectrum(two_clause_formula)
    path = tmp_path / 'hist.json'
    save_histogram(hist, path)
    assert path.read_text().startswith('{"n_spins": 5, "counts": {"0": 25, "1": 6, "2": 1}}')
    assert load_histogram(path) == hist
