import json
from pathlib import Path

import pytest

from core.cache_manager import CacheManager, cache_key
from core.errors import ConfigError
from core.gibbs import EnergyHistogram
from core.presets import PresetManager
from core.settings import (
    THREADS_ENV, ConfigManager, RuntimeSettings, SweepConfig, expand_density_grid,
    load_sweep_config, resolve_threads
)


CONFIG_DIR = Path(__file__).resolve().parent.parent / 'configs'


def test_defaults_are_merged():
    config = SweepConfig.from_dict({'densities': [1.0, 2.0]})
    assert config.mode == 'satisfiability'
    assert config.k == 2
    assert config.n_vars == (100,)
    assert config.betas == (1.0, 2.0, 3.0)
    assert config.threshold == 0.9
    assert config.work_solver == 'dpll'
    assert config.name == 'sat_k2'


def test_density_grid_is_expanded_without_drift():
    config = SweepConfig.from_dict({'densities': {'start': 0.2, 'stop': 2.0, 'step': 0.05}})
    assert len(config.densities) == 37
    assert config.densities[0] == 0.2
    assert config.densities[-1] == 2.0
    assert 1.15 in config.densities
    assert expand_density_grid(2.0, 7.0, 0.1)[-1] == 7.0


def test_every_problem_is_reported():
    with pytest.raises(ConfigError) as info:
        SweepConfig.from_dict({
            'mode': 'annealing', 'k': 4, 'densities': [1.0, 0.5],
            'instances_per_density': 0, 'threshold': 1.2, 'colour': 'red',
        })
    problems = ' | '.join(info.value.problems)
    for fragment in ('unknown key', 'mode', 'k must be', 'strictly increasing', 'instances_per_density', 'threshold'):
        assert fragment in problems


@pytest.mark.parametrize('overrides', [
    {},
    {'densities': []},
    {'densities': {'start': 1.0, 'stop': 2.0}},
    {'densities': [1.0], 'n_vars': 2},
    {'densities': [1.0], 'n_vars': [50, 50]},
    {'densities': [1.0], 'betas': [-1.0]},
    {'densities': [1.0], 'betas': [float('inf')]},
    {'densities': [1.0], 'master_seed': 2 ** 64},
    {'densities': [1.0], 'work_solver': 'cdcl'},
    {'densities': [1.0], 'name': 'bad name'},
    {'densities': [1.0], 'k': True},
])
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        SweepConfig.from_dict(overrides)


def test_config_hash_is_canonical():
    first = SweepConfig.from_dict({'densities': [1.0, 2.0], 'master_seed': 3})
    second = SweepConfig.from_dict({'master_seed': 3, 'densities': [1.0, 2.0]})
    assert first.config_hash() == second.config_hash()
    assert first.config_hash() != first.for_size(50).config_hash()
    assert len(first.config_hash()) == 64


def test_load_and_save_config(tmp_path):
    path = tmp_path / 'sweep.json'
    path.write_text(json.dumps({'mode': 'gibbs', 'n_vars': 12, 'densities': [0.5, 1.0]}))
    config = load_sweep_config(path)
    assert config.mode == 'gibbs'
    assert config.name == 'gibbs_k2'

    saved = tmp_path / 'saved.json'
    ConfigManager.save_config(config, saved)
    assert load_sweep_config(saved) == config


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"densities": [1.0,')
    with pytest.raises(ConfigError):
        load_sweep_config(path)
    path.write_text('[1, 2]')
    with pytest.raises(ConfigError):
        load_sweep_config(path)


def test_thread_resolution(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, '3')
    assert resolve_threads(5) == 5
    assert resolve_threads() == 3
    monkeypatch.setenv(THREADS_ENV, 'many')
    assert resolve_threads() >= 1
    with pytest.raises(ConfigError):
        resolve_threads(0)
    monkeypatch.delenv(THREADS_ENV)
    settings = RuntimeSettings.resolve(2, spectrum_limit=20)
    assert (settings.threads, settings.exhaustive_limit, settings.spectrum_limit) == (2, 30, 20)


def test_builtin_presets_validate():
    manager = PresetManager()
    for preset_id in manager.get_builtin_presets():
        config = manager.build_config(preset_id)
        assert config.name == preset_id


def test_shipped_config_files_match_presets():
    manager = PresetManager()
    for preset_id in manager.get_builtin_presets():
        assert load_sweep_config(CONFIG_DIR / f'{preset_id}.json') == manager.build_config(preset_id)


def test_preset_overrides():
    config = PresetManager().build_config('fig2_gibbs_n16', {'instances_per_density': 5})
    assert config.instances_per_density == 5
    assert config.n_vars == (16,)
    with pytest.raises(ConfigError):
        PresetManager().build_config('fig9')


def test_user_presets(tmp_path):
    manager = PresetManager(str(tmp_path / 'presets'))
    config = manager.build_config('smoke', {'n_vars': 30, 'name': 'mine'})
    manager.save_preset('mine', 'Mine', 'bigger smoke test', config)
    listed = {p['id']: p['type'] for p in manager.list_all_presets()}
    assert listed['mine'] == 'user'
    assert listed['smoke'] == 'builtin'
    assert manager.build_config('mine') == config
    with pytest.raises(ConfigError):
        manager.save_preset('smoke', 'x', 'y', config)
    assert manager.delete_preset('mine')
    assert not manager.delete_preset('smoke')


def test_export_preset(tmp_path):
    path = tmp_path / 'fig1.json'
    PresetManager().export_preset('fig1_2sat', str(path))
    assert load_sweep_config(path).n_vars == (1000,)


def test_cache_eviction_prefers_least_accessed():
    cache = CacheManager(max_size=2)
    first, second, third = (cache_key(2, 1, 0, seed) for seed in (1, 2, 3))
    histogram = EnergyHistogram(1, {0: 2})
    cache.cache_histogram(first, histogram)
    cache.cache_histogram(second, histogram)
    assert cache.get_histogram(first) is histogram
    cache.cache_histogram(third, histogram)
    assert cache.get_histogram(second) is None
    assert cache.get_histogram(first) is histogram
    assert cache.get_cache_stats() == {'histograms_cached': 2, 'hits': 2, 'misses': 1}


def test_cache_reads_back_from_disk(tmp_path):
    key = cache_key(3, 4, 5, 0xABC)
    histogram = EnergyHistogram(4, {0: 10, 1: 6})
    CacheManager(cache_dir=tmp_path).cache_histogram(key, histogram)
    assert (tmp_path / 'k3_n4_m5_0000000000000abc.json').exists()
    assert CacheManager(cache_dir=tmp_path).get_histogram(key) == histogram
