import json
import os
from pathlib import Path

import numba
import pytest

from core.cache_manager import CacheManager
from core.errors import EmptySweepError, InvalidParameterError, ResumeMismatchError, TooLargeError
from core.experiments import (
    BETA_STAR_HEADER, GIBBS_BASE_HEADER, SAT_HEADER, WINDOW_HEADER, ScalingWindow, SweepPoint,
    clause_count, csv_header, emit_csv, emit_plot_script, emit_sweep_artifacts,
    estimate_scaling_window, format_window_report, read_csv, run_gibbs_sweep,
    run_satisfiability_sweep, run_sweep
)
from core.gibbs import set_kernel_threads
from core.settings import RuntimeSettings, SweepConfig, load_sweep_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'


def sat_config(**overrides):
    config = {
        'mode': 'satisfiability', 'k': 2, 'n_vars': 30,
        'densities': [0.1, 1.0, 6.0], 'instances_per_density': 6, 'master_seed': 5,
    }
    config.update(overrides)
    return SweepConfig.from_dict(config)


def gibbs_config(**overrides):
    config = {
        'mode': 'gibbs', 'k': 2, 'n_vars': 8,
        'densities': [0.5, 1.5, 3.0], 'instances_per_density': 4,
        'betas': [1, 2, 3], 'master_seed': 9,
    }
    config.update(overrides)
    return SweepConfig.from_dict(config)


def step_points(fractions, alphas, n_vars=100):
    return [
        SweepPoint(n_vars, a, a, clause_count(a, n_vars), 10, f, 1.0, 1.0)
        for a, f in zip(alphas, fractions)
    ]


def test_clause_count_rounds_half_up():
    assert clause_count(1.0, 1000) == 1000
    assert clause_count(0.25, 10) == 3
    assert clause_count(1.15, 100) == 115


def test_satisfiability_sweep_shape():
    points = run_satisfiability_sweep(sat_config())
    assert [p.alpha_nominal for p in points] == [0.1, 1.0, 6.0]
    assert [p.m_clauses for p in points] == [3, 30, 180]
    for p in points:
        assert p.n_instances == 6
        assert 0.0 <= p.sat_fraction <= 1.0
        assert p.work_median >= 0
        assert p.mode == 'satisfiability'
    assert points[0].sat_fraction == 1.0
    assert points[-1].sat_fraction == 0.0


def test_sweep_is_repeatable():
    config = sat_config(densities=[1.0], instances_per_density=1)
    assert run_satisfiability_sweep(config) == run_satisfiability_sweep(config)


def test_native_work_solver_agrees_on_fraction():
    dpll = run_satisfiability_sweep(sat_config())
    native = run_satisfiability_sweep(sat_config(work_solver='native'))
    assert [p.sat_fraction for p in dpll] == [p.sat_fraction for p in native]


def test_sweep_rejects_wrong_mode():
    with pytest.raises(InvalidParameterError):
        run_satisfiability_sweep(gibbs_config())
    with pytest.raises(InvalidParameterError):
        run_gibbs_sweep(sat_config())


def test_gibbs_sweep_statistics():
    points = run_gibbs_sweep(gibbs_config())
    for p in points:
        assert p.betas == (1.0, 2.0, 3.0)
        assert p.p_mean[0] <= p.p_mean[1] <= p.p_mean[2]
        assert all(0.0 < v <= 1.0 for v in p.p_mean)
        assert p.beta_star_mean >= 0
        assert p.p_stderr[0] == pytest.approx(p.p_std[0] / 2)


def test_gibbs_sweep_without_clauses():
    points = run_gibbs_sweep(gibbs_config(densities=[0.01]))
    point = points[0]
    assert point.m_clauses == 0
    assert point.p_mean == (1.0, 1.0, 1.0)
    assert point.p_std == (0.0, 0.0, 0.0)
    assert point.beta_star_mean == 0.0
    assert point.log2_degeneracy_mean == 8.0


def test_gibbs_sweep_size_limit():
    with pytest.raises(TooLargeError):
        run_gibbs_sweep(gibbs_config(n_vars=30))


def test_thread_count_does_not_change_csv(tmp_path):
    config = sat_config(densities=[0.8, 1.2], instances_per_density=4)
    outputs = []
    for threads in (1, 2, os.cpu_count() or 1):
        path = tmp_path / f'threads_{threads}.csv'
        emit_csv(run_sweep(config, RuntimeSettings(threads=threads)), path)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_sequential_sweep_restores_kernel_threads():
    before = set_kernel_threads(numba.config.NUMBA_NUM_THREADS)
    run_sweep(sat_config(densities=[1.0], instances_per_density=1), RuntimeSettings(threads=1))
    assert numba.get_num_threads() == before


def test_gibbs_thread_count_invariance():
    config = gibbs_config(densities=[1.0, 2.0], instances_per_density=3)
    assert run_sweep(config, RuntimeSettings(threads=1)) == run_sweep(config, RuntimeSettings(threads=2))


def test_size_list_sweeps_each_n():
    points = run_satisfiability_sweep(sat_config(n_vars=[20, 40], densities=[1.0]))
    assert [(p.n_vars, p.m_clauses) for p in points] == [(20, 20), (40, 40)]


def test_checkpoint_resume(tmp_path, log_records):
    config = sat_config()
    first = run_satisfiability_sweep(config, checkpoint_root=tmp_path)
    folder = tmp_path / f"{config.name}_n30"
    assert (folder / 'manifest.json').exists()
    assert sorted(p.name for p in folder.glob('density_*.json')) == [
        'density_0.json', 'density_1.json', 'density_2.json']

    log_records.clear()
    again = run_satisfiability_sweep(config, checkpoint_root=tmp_path)
    assert again == first
    assert any('checkpoint' in message for _, message in log_records)


def test_checkpoint_mismatch(tmp_path):
    run_satisfiability_sweep(sat_config(), checkpoint_root=tmp_path)
    with pytest.raises(ResumeMismatchError):
        run_satisfiability_sweep(sat_config(master_seed=6), checkpoint_root=tmp_path)


def test_gibbs_checkpoint_stores_histograms(tmp_path):
    config = gibbs_config(densities=[1.0])
    run_gibbs_sweep(config, checkpoint_root=tmp_path)
    data = json.loads((tmp_path / f"{config.name}_n8" / 'density_0.json').read_text())
    histogram = data['records'][0]['histogram']
    assert histogram['n_spins'] == 8
    assert sum(histogram['counts'].values()) == 256


def test_gibbs_checkpoint_defers_histograms_to_cache(tmp_path, log_records):
    config = gibbs_config(densities=[1.0])
    first = run_gibbs_sweep(config, checkpoint_root=tmp_path / 'ck', cache=CacheManager(cache_dir=tmp_path / 'h'))
    data = json.loads((tmp_path / 'ck' / f"{config.name}_n8" / 'density_0.json').read_text())
    assert all('histogram' not in record for record in data['records'])
    assert len(list((tmp_path / 'h').glob('*.json'))) == 4

    resumed = run_gibbs_sweep(config, checkpoint_root=tmp_path / 'ck', cache=CacheManager(cache_dir=tmp_path / 'h'))
    assert resumed == first

    log_records.clear()
    without_cache = run_gibbs_sweep(config, checkpoint_root=tmp_path / 'ck', cache=CacheManager())
    assert without_cache == first
    assert any('recomputing' in message for _, message in log_records)


def test_histogram_cache_is_reused(tmp_path):
    cache = CacheManager(cache_dir=tmp_path)
    config = gibbs_config(densities=[1.0])
    first = run_gibbs_sweep(config, cache=cache)
    assert cache.get_cache_stats()['misses'] == 4
    second = run_gibbs_sweep(gibbs_config(densities=[1.0], betas=[0.5]), cache=CacheManager(cache_dir=tmp_path))
    assert second[0].sat_fraction == first[0].sat_fraction
    assert len(list(tmp_path.glob('*.json'))) == 4


def test_window_on_step_function():
    alphas = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3]
    fractions = [1, 1, 1, 1, 1, 0.5, 0, 0, 0]
    window = estimate_scaling_window(step_points(fractions, alphas), 0.1)
    assert 0.9 <= window.alpha_minus <= window.alpha_plus <= 1.1
    assert window.alpha_minus == pytest.approx(0.92)
    assert window.alpha_plus == pytest.approx(1.08)
    assert not window.minus_clamped and not window.plus_clamped


def test_window_at_median_collapses_to_crossing():
    alphas = [0.8, 0.9, 1.0, 1.1, 1.2]
    fractions = [1.0, 0.8, 0.4, 0.1, 0.0]
    window = estimate_scaling_window(step_points(fractions, alphas), 0.5)
    assert window.alpha_minus == pytest.approx(0.975)
    assert window.alpha_plus == pytest.approx(0.975)


def test_window_is_monotone_in_delta():
    alphas = [0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3]
    fractions = [1.0, 0.97, 0.9, 0.75, 0.5, 0.25, 0.08, 0.0]
    points = step_points(fractions, alphas)
    widths = [estimate_scaling_window(points, d).width for d in (0.05, 0.1, 0.2, 0.3, 0.5)]
    assert all(b <= a for a, b in zip(widths, widths[1:]))


def test_window_clamps_when_no_crossing():
    window = estimate_scaling_window(step_points([1.0, 0.95, 0.93], [0.2, 0.3, 0.4]), 0.1)
    assert window.alpha_minus == pytest.approx(0.4)
    assert window.alpha_plus == pytest.approx(0.4)
    assert window.plus_clamped
    assert not window.minus_clamped


def test_window_collapses_noisy_curve(log_records):
    window = estimate_scaling_window(step_points([1.0, 0.0, 1.0, 0.0], [1.0, 1.1, 1.2, 1.3]), 0.1)
    assert window.alpha_minus == window.alpha_plus
    assert any(level == 'WARNING' for level, _ in log_records)


def test_window_errors():
    with pytest.raises(EmptySweepError):
        estimate_scaling_window([], 0.1)
    with pytest.raises(InvalidParameterError):
        estimate_scaling_window(step_points([1.0], [1.0]), 1.0)


def test_window_report_mentions_3sat_bracket():
    report = format_window_report(ScalingWindow(0.1, 4.1, 4.4, n_vars=150), k=3)
    assert 'width: 0.300000' in report
    assert '3.52' in report and '4.453' in report


def test_csv_round_trip(tmp_path):
    points = run_gibbs_sweep(gibbs_config())
    path = tmp_path / 'gibbs.csv'
    emit_csv(points, path)
    parsed = read_csv(path)
    assert parsed == points

    sat_points = run_satisfiability_sweep(sat_config())
    emit_csv(sat_points, tmp_path / 'sat.csv')
    assert read_csv(tmp_path / 'sat.csv') == sat_points


def test_csv_headers(tmp_path):
    emit_csv([], tmp_path / 'empty.csv')
    assert (tmp_path / 'empty.csv').read_text() == ','.join(SAT_HEADER) + '\n'

    header = csv_header('gibbs', (1.0, 2.0, 3.0))
    assert len(header) == len(GIBBS_BASE_HEADER) + 3 * 3 + len(BETA_STAR_HEADER)
    assert header[8:11] == ['p_mean@1.0', 'p_std@1.0', 'p_stderr@1.0']

    emit_csv(ScalingWindow(0.1, 0.9, 1.1), tmp_path / 'window.csv')
    lines = (tmp_path / 'window.csv').read_text().splitlines()
    assert lines[0] == ','.join(WINDOW_HEADER)
    assert lines[1].split(',')[4:] == ['0', '0']


def test_plot_scripts_reference_header_columns(tmp_path):
    sat_points = run_satisfiability_sweep(sat_config())
    emit_plot_script(sat_points, tmp_path / 'sat.gp')
    script = (tmp_path / 'sat.gp').read_text()
    assert "'sat.csv'" in script
    assert 'using 3:($6*100)' in script
    assert 'using 3:8' in script

    gibbs_points = run_gibbs_sweep(gibbs_config())
    emit_plot_script(gibbs_points, tmp_path / 'gibbs.gp')
    script = (tmp_path / 'gibbs.gp').read_text()
    assert 'using 3:9:10' in script
    assert 'using 3:18:19' in script
    assert 'yerrorlines' in script


def test_sweep_artifacts_per_size(tmp_path):
    config = sat_config(n_vars=[20, 40], densities=[1.0], name='sizes')
    points = run_sweep(config)
    written = emit_sweep_artifacts(points, config, tmp_path)
    assert sorted(p.name for p in written) == ['sizes_n20.csv', 'sizes_n20.gp', 'sizes_n40.csv', 'sizes_n40.gp']
    assert [p.n_vars for p in read_csv(tmp_path / 'sizes_n40.csv')] == [40]


@pytest.mark.slow
def test_2sat_transition_and_window_shrinkage():
    grid = {'start': 0.2, 'stop': 2.0, 'step': 0.05}
    config = sat_config(n_vars=[100, 300, 1000], densities=grid, instances_per_density=1000)
    points = run_sweep(config, RuntimeSettings.resolve())
    widths = []
    for n_vars in (100, 300, 1000):
        subset = [p for p in points if p.n_vars == n_vars]
        widths.append(estimate_scaling_window(subset, 0.1).width)
        if n_vars == 1000:
            crossing = estimate_scaling_window(subset, 0.5).alpha_minus
            assert 0.85 <= crossing <= 1.15
            peak = max(subset, key=lambda p: p.work_median).alpha
            assert abs(peak - crossing) <= 0.3
    assert widths[0] > widths[1] > widths[2]


@pytest.mark.slow
def test_gibbs_occupancy_dip_2sat():
    config = gibbs_config(n_vars=16, densities={'start': 0.25, 'stop': 3.0, 'step': 0.25},
                          instances_per_density=200)
    points = run_sweep(config, RuntimeSettings.resolve())
    for index in range(3):
        dip = min(points, key=lambda p: p.p_mean[index]).alpha_nominal
        assert 1.0 <= dip <= 2.0
    peak = max(points, key=lambda p: p.beta_star_mean).alpha_nominal
    assert 1.0 <= peak <= 2.0


@pytest.mark.slow
def test_3sat_transition_and_work_peak():
    points = run_sweep(load_sweep_config(CONFIG_DIR / 'fig1_3sat.json'), RuntimeSettings.resolve())
    crossing = estimate_scaling_window(points, 0.5).alpha_minus
    assert 3.9 <= crossing <= 4.7
    peak = max(points, key=lambda p: p.work_median).alpha
    assert abs(peak - crossing) <= 0.5


@pytest.mark.slow
def test_gibbs_occupancy_dip_3sat():
    config = load_sweep_config(CONFIG_DIR / 'fig2_gibbs_3sat_n16.json')
    points = run_sweep(config, RuntimeSettings.resolve())
    for index in range(len(config.betas)):
        dip = min(points, key=lambda p: p.p_mean[index]).alpha_nominal
        assert 3.5 <= dip <= 4.5
    peak = max(points, key=lambda p: p.beta_star_mean).alpha_nominal
    assert 3.5 <= peak <= 4.5
