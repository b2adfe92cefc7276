"""
Configuration module for gibbssat.
Loads, merges and validates sweep configurations and resolves runtime settings.
"""

import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from core.errors import ConfigError, OutputError
from core.gibbs import DEFAULT_SPECTRUM_LIMIT
from core.logger import get_logger
from core.solver import DEFAULT_EXHAUSTIVE_LIMIT


MODES = ('satisfiability', 'gibbs')
WORK_SOLVERS = ('dpll', 'native')
SUPPORTED_WIDTHS = (2, 3)
MAX_SEED = 2 ** 64 - 1
THREADS_ENV = 'GIBBSSAT_THREADS'

_NAME_PATTERN = re.compile(r'^[A-Za-z0-9_.-]+$')


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def expand_density_grid(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """Inclusive arithmetic grid, rounded so 0.1 steps do not drift."""
    count = int(round((stop - start) / step))
    return tuple(round(start + i * step, 10) for i in range(count + 1))


@dataclass(frozen=True)
class SweepConfig:
    """Resolved sweep configuration; densities are always an explicit tuple."""

    mode: str
    k: int
    n_vars: Tuple[int, ...]
    densities: Tuple[float, ...]
    instances_per_density: int
    betas: Tuple[float, ...]
    threshold: float
    beta_tol: float
    master_seed: int
    work_solver: str
    name: str

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepConfig':
        return ConfigManager().build(data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mode': self.mode,
            'k': self.k,
            'n_vars': list(self.n_vars),
            'densities': list(self.densities),
            'instances_per_density': self.instances_per_density,
            'betas': list(self.betas),
            'threshold': self.threshold,
            'beta_tol': self.beta_tol,
            'master_seed': self.master_seed,
            'work_solver': self.work_solver,
            'name': self.name,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def for_size(self, n_vars: int) -> 'SweepConfig':
        """The same sweep restricted to one variable count."""
        return replace(self, n_vars=(int(n_vars),))


class ConfigManager:
    """Manages sweep configuration load/merge/validate."""

    DEFAULT_CONFIG = {
        'mode': 'satisfiability',
        'k': 2,
        'n_vars': 100,
        'densities': None,  # required
        'instances_per_density': 100,
        'betas': [1.0, 2.0, 3.0],
        'threshold': 0.9,
        'beta_tol': 1e-3,
        'master_seed': 0,
        'work_solver': 'dpll',
        'name': None,
    }

    def __init__(self, config_file: Optional[Union[str, Path]] = None):
        """
        Initialize config manager.

        Args:
            config_file: Path to a sweep config JSON file
        """
        self.config_file = config_file

    def load_config(self) -> Dict[str, Any]:
        """
        Load the config file and merge it onto the defaults.

        Returns:
            Merged (unvalidated) config dictionary
        """
        if self.config_file is None:
            raise ConfigError("no config file given")
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.config_file}: not valid JSON ({e})")
        except OSError as e:
            raise OutputError(self.config_file, e.strerror or str(e))
        if not isinstance(loaded, dict):
            raise ConfigError(f"{self.config_file}: top level must be a JSON object")
        return loaded

    def merge(self, overrides: Dict[str, Any]) -> Dict[str, Any]:
        merged = dict(self.DEFAULT_CONFIG)
        merged.update(overrides)
        return merged

    def validate_config(self, config: Dict[str, Any]) -> List[str]:
        """
        Check a merged config dictionary.

        Returns:
            Every problem found (empty when valid)
        """
        problems = []
        for key in sorted(set(config) - set(self.DEFAULT_CONFIG)):
            problems.append(f"unknown key '{key}'")

        if config['mode'] not in MODES:
            problems.append(f"mode must be one of {', '.join(MODES)}")
        if config['k'] not in SUPPORTED_WIDTHS or not _is_int(config['k']):
            problems.append("k must be 2 or 3")

        sizes = config['n_vars'] if isinstance(config['n_vars'], list) else [config['n_vars']]
        if not sizes:
            problems.append("n_vars list is empty")
        for n in sizes:
            if not _is_int(n) or (_is_int(config['k']) and n <= config['k']):
                problems.append(f"n_vars entry {n!r} must be an integer larger than k")
        if len(set(map(repr, sizes))) != len(sizes):
            problems.append("n_vars entries must be distinct")

        problems.extend(self._density_problems(config['densities']))

        if not _is_int(config['instances_per_density']) or config['instances_per_density'] < 1:
            problems.append("instances_per_density must be an integer >= 1")
        betas = config['betas']
        if not isinstance(betas, list) or not betas:
            problems.append("betas must be a non-empty list")
        elif any(not _is_number(b) or not math.isfinite(b) or b < 0 for b in betas):
            problems.append("betas must be finite non-negative numbers")
        if not _is_number(config['threshold']) or not 0 < config['threshold'] < 1:
            problems.append("threshold must lie in (0, 1)")
        if not _is_number(config['beta_tol']) or config['beta_tol'] <= 0:
            problems.append("beta_tol must be positive")
        if not _is_int(config['master_seed']) or not 0 <= config['master_seed'] <= MAX_SEED:
            problems.append("master_seed must be an integer in 0..2^64-1")
        if config['work_solver'] not in WORK_SOLVERS:
            problems.append(f"work_solver must be one of {', '.join(WORK_SOLVERS)}")
        name = config['name']
        if name is not None and (not isinstance(name, str) or not _NAME_PATTERN.match(name)):
            problems.append("name may only contain letters, digits, '_', '.' and '-'")
        return problems

    @staticmethod
    def _density_problems(densities: Any) -> List[str]:
        if densities is None:
            return ["densities is required"]
        if isinstance(densities, dict):
            if set(densities) != {'start', 'stop', 'step'}:
                return ["density grid needs exactly 'start', 'stop' and 'step'"]
            if not all(_is_number(v) for v in densities.values()):
                return ["density grid values must be numbers"]
            if densities['start'] <= 0 or densities['step'] <= 0 or densities['stop'] < densities['start']:
                return ["density grid needs 0 < start <= stop and step > 0"]
            return []
        if not isinstance(densities, list) or not densities:
            return ["densities must be a non-empty list or a start/stop/step grid"]
        if any(not _is_number(a) or a <= 0 for a in densities):
            return ["densities must be positive numbers"]
        if any(b <= a for a, b in zip(densities, densities[1:])):
            return ["densities must be strictly increasing"]
        return []

    def build(self, overrides: Dict[str, Any]) -> SweepConfig:
        """Merge, validate and freeze a config; raises ConfigError listing every problem."""
        config = self.merge(overrides)
        problems = self.validate_config(config)
        if problems:
            raise ConfigError(problems)

        densities = config['densities']
        if isinstance(densities, dict):
            densities = expand_density_grid(densities['start'], densities['stop'], densities['step'])
        sizes = config['n_vars'] if isinstance(config['n_vars'], list) else [config['n_vars']]
        name = config['name'] or f"{'sat' if config['mode'] == 'satisfiability' else 'gibbs'}_k{config['k']}"

        return SweepConfig(
            mode=config['mode'],
            k=config['k'],
            n_vars=tuple(sizes),
            densities=tuple(float(a) for a in densities),
            instances_per_density=config['instances_per_density'],
            betas=tuple(float(b) for b in config['betas']),
            threshold=float(config['threshold']),
            beta_tol=float(config['beta_tol']),
            master_seed=config['master_seed'],
            work_solver=config['work_solver'],
            name=name,
        )

    def load(self) -> SweepConfig:
        return self.build(self.load_config())

    @staticmethod
    def save_config(config: SweepConfig, path: Union[str, Path]) -> None:
        try:
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(config.to_dict(), f, indent=2)
                f.write('\n')
        except OSError as e:
            raise OutputError(path, e.strerror or str(e))


def load_sweep_config(path: Union[str, Path]) -> SweepConfig:
    return ConfigManager(path).load()


def resolve_threads(flag: Optional[int] = None) -> int:
    """
    Worker count: the --threads flag, then GIBBSSAT_THREADS, then os.cpu_count().
    """
    if flag is not None:
        if flag < 1:
            raise ConfigError(f"--threads must be >= 1, got {flag}")
        return flag
    env_value = os.environ.get(THREADS_ENV)
    if env_value:
        try:
            threads = int(env_value)
            if threads >= 1:
                return threads
        except ValueError:
            pass
        get_logger().warning(f"Ignoring {THREADS_ENV}={env_value!r}; expected a positive integer")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class RuntimeSettings:
    """Execution knobs that never change results."""

    threads: int = 1
    exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT
    spectrum_limit: int = DEFAULT_SPECTRUM_LIMIT

    @classmethod
    def resolve(cls, threads: Optional[int] = None, exhaustive_limit: Optional[int] = None,
                spectrum_limit: Optional[int] = None) -> 'RuntimeSettings':
        return cls(
            threads=resolve_threads(threads),
            exhaustive_limit=exhaustive_limit or DEFAULT_EXHAUSTIVE_LIMIT,
            spectrum_limit=spectrum_limit or DEFAULT_SPECTRUM_LIMIT,
        )
