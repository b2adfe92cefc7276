"""
Preset system for saving and loading sweep configurations.
"""

import json
import os
from typing import Any, Dict, List, Optional

from core.errors import ConfigError, OutputError
from core.logger import get_logger
from core.settings import ConfigManager, SweepConfig


class PresetManager:
    """Manages built-in and user sweep presets."""

    BUILTIN_PRESETS = {
        'fig1_2sat': {
            'name': '2-SAT transition',
            'description': '2-SAT satisfiability and solver work, N=1000, 1000 instances per density',
            'config': {
                'mode': 'satisfiability',
                'k': 2,
                'n_vars': 1000,
                'densities': {'start': 0.2, 'stop': 2.0, 'step': 0.05},
                'instances_per_density': 1000,
                'master_seed': 1,
                'name': 'fig1_2sat',
            }
        },
        'fig1_3sat': {
            'name': '3-SAT transition',
            'description': '3-SAT satisfiability and DPLL work, N=150, 500 instances per density',
            'config': {
                'mode': 'satisfiability',
                'k': 3,
                'n_vars': 150,
                'densities': {'start': 2.0, 'stop': 7.0, 'step': 0.1},
                'instances_per_density': 500,
                'master_seed': 3,
                'name': 'fig1_3sat',
            }
        },
        'fig1_2sat_sizes': {
            'name': '2-SAT size comparison',
            'description': '2-SAT transition at N=100, 300, 1000 for scaling-window shrinkage',
            'config': {
                'mode': 'satisfiability',
                'k': 2,
                'n_vars': [100, 300, 1000],
                'densities': {'start': 0.2, 'stop': 2.0, 'step': 0.05},
                'instances_per_density': 1000,
                'master_seed': 2,
                'name': 'fig1_2sat_sizes',
            }
        },
        'fig2_gibbs_n16': {
            'name': '2-SAT ground-state occupancy',
            'description': 'Gibbs occupancy at beta 1, 2, 3 and beta* for 16 spins, 200 instances per density',
            'config': {
                'mode': 'gibbs',
                'k': 2,
                'n_vars': 16,
                'densities': {'start': 0.25, 'stop': 3.0, 'step': 0.25},
                'instances_per_density': 200,
                'betas': [1.0, 2.0, 3.0],
                'threshold': 0.9,
                'master_seed': 16,
                'name': 'fig2_gibbs_n16',
            }
        },
        'fig2_gibbs_3sat_n16': {
            'name': '3-SAT ground-state occupancy',
            'description': 'Gibbs occupancy at beta 1, 2, 3 and beta* for 16 spins, 3-SAT',
            'config': {
                'mode': 'gibbs',
                'k': 3,
                'n_vars': 16,
                'densities': {'start': 1.0, 'stop': 7.0, 'step': 0.5},
                'instances_per_density': 200,
                'betas': [1.0, 2.0, 3.0],
                'threshold': 0.9,
                'master_seed': 17,
                'name': 'fig2_gibbs_3sat_n16',
            }
        },
        'smoke': {
            'name': 'Smoke test',
            'description': 'Tiny 2-SAT sweep that finishes in seconds',
            'config': {
                'mode': 'satisfiability',
                'k': 2,
                'n_vars': 20,
                'densities': [0.5, 1.0, 1.5],
                'instances_per_density': 5,
                'master_seed': 0,
                'name': 'smoke',
            }
        },
    }

    def __init__(self, presets_dir: str = 'presets'):
        """
        Initialize preset manager.

        Args:
            presets_dir: Directory holding user presets (created on first save)
        """
        self.presets_dir = presets_dir

    def get_builtin_presets(self) -> Dict[str, Dict[str, Any]]:
        return {key: dict(value) for key, value in self.BUILTIN_PRESETS.items()}

    def get_preset(self, preset_id: str) -> Optional[Dict[str, Any]]:
        """
        Get a preset by ID; built-ins shadow user presets.

        Returns:
            Preset dictionary or None if not found
        """
        if preset_id in self.BUILTIN_PRESETS:
            return json.loads(json.dumps(self.BUILTIN_PRESETS[preset_id]))

        preset_path = os.path.join(self.presets_dir, f'{preset_id}.json')
        if not os.path.exists(preset_path):
            return None
        try:
            with open(preset_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            get_logger().warning(f"Error loading preset {preset_id}: {e}")
            return None

    def save_preset(self, preset_id: str, name: str, description: str, config: SweepConfig) -> str:
        """
        Save a user preset.

        Returns:
            Path of the written file
        """
        if preset_id in self.BUILTIN_PRESETS:
            raise ConfigError(f"'{preset_id}' is a built-in preset")
        preset = {'name': name, 'description': description, 'config': config.to_dict()}
        preset_path = os.path.join(self.presets_dir, f'{preset_id}.json')
        try:
            os.makedirs(self.presets_dir, exist_ok=True)
            with open(preset_path, 'w', encoding='utf-8') as f:
                json.dump(preset, f, indent=2)
        except OSError as e:
            raise OutputError(preset_path, e.strerror or str(e))
        return preset_path

    def delete_preset(self, preset_id: str) -> bool:
        """Delete a user preset; built-ins cannot be deleted."""
        if preset_id in self.BUILTIN_PRESETS:
            return False
        preset_path = os.path.join(self.presets_dir, f'{preset_id}.json')
        if not os.path.exists(preset_path):
            return False
        os.remove(preset_path)
        return True

    def list_user_presets(self) -> List[Dict[str, Any]]:
        presets = []
        if not os.path.isdir(self.presets_dir):
            return presets

        for filename in sorted(os.listdir(self.presets_dir)):
            if filename.endswith('.json'):
                preset_id = filename[:-5]
                if preset_id in self.BUILTIN_PRESETS:
                    continue
                preset = self.get_preset(preset_id)
                if preset:
                    presets.append({
                        'id': preset_id,
                        'name': preset.get('name', preset_id),
                        'description': preset.get('description', '')
                    })
        return presets

    def list_all_presets(self) -> List[Dict[str, Any]]:
        """
        List all presets (built-in and user).

        Returns:
            List of dictionaries with id, name, description and type
        """
        presets = []
        for preset_id, preset in self.BUILTIN_PRESETS.items():
            presets.append({
                'id': preset_id,
                'name': preset['name'],
                'description': preset['description'],
                'type': 'builtin'
            })
        for preset in self.list_user_presets():
            preset['type'] = 'user'
            presets.append(preset)
        return presets

    def build_config(self, preset_id: str, overrides: Optional[Dict[str, Any]] = None) -> SweepConfig:
        """Resolve a preset, optionally overriding some keys, into a SweepConfig."""
        preset = self.get_preset(preset_id)
        if preset is None:
            raise ConfigError(f"unknown preset '{preset_id}'")
        config = dict(preset.get('config', {}))
        config.update(overrides or {})
        return ConfigManager().build(config)

    def export_preset(self, preset_id: str, path: str) -> None:
        """Write a preset's raw config as a sweep config file."""
        preset = self.get_preset(preset_id)
        if preset is None:
            raise ConfigError(f"unknown preset '{preset_id}'")
        try:
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(preset['config'], f, indent=2)
                f.write('\n')
        except OSError as e:
            raise OutputError(path, e.strerror or str(e))
