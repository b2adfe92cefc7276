"""
Cache management module for gibbssat.
Keeps enumerated energy histograms so re-analysis with new betas or thresholds
does not repeat the 2^N pass.
"""

import json
import os
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from core.gibbs import EnergyHistogram
from core.logger import get_logger


CacheKey = Tuple[int, int, int, int]


def cache_key(k: int, n_vars: int, m_clauses: int, seed: int) -> CacheKey:
    """A generated instance is fully determined by (k, N, M, seed)."""
    return (int(k), int(n_vars), int(m_clauses), int(seed))


class CacheManager:
    """In-memory histogram cache with least-accessed eviction and optional disk backing."""

    def __init__(self, max_size: int = 1024, cache_dir: Optional[Union[str, Path]] = None):
        """
        Initialize cache manager.

        Args:
            max_size: Maximum number of histograms held in memory
            cache_dir: Directory of per-instance histogram JSON files (None: memory only)
        """
        self.max_size = max_size
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self._histograms: Dict[CacheKey, EnergyHistogram] = {}
        self._access_count: Dict[CacheKey, int] = {}
        self.hits = 0
        self.misses = 0

    def _path(self, key: CacheKey) -> Path:
        k, n_vars, m_clauses, seed = key
        return self.cache_dir / f"k{k}_n{n_vars}_m{m_clauses}_{seed:016x}.json"

    def cache_histogram(self, key: CacheKey, histogram: EnergyHistogram) -> None:
        if key not in self._histograms and len(self._histograms) >= self.max_size:
            self._evict_lru()
        self._histograms[key] = histogram
        self._access_count.setdefault(key, 0)

        if self.cache_dir is not None:
            path = self._path(key)
            if path.exists():
                return
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(path.name + f'.{os.getpid()}.tmp')
            try:
                tmp.write_text(json.dumps(histogram.to_json_dict()), encoding='utf-8')
                os.replace(tmp, path)
            except OSError as e:
                get_logger().warning(f"Could not write histogram cache {path}: {e}")

    def get_histogram(self, key: CacheKey) -> Optional[EnergyHistogram]:
        """Memory first, then disk; None on a miss."""
        if key in self._histograms:
            self._access_count[key] += 1
            self.hits += 1
            return self._histograms[key]

        if self.cache_dir is not None:
            path = self._path(key)
            if path.exists():
                try:
                    histogram = EnergyHistogram.from_json_dict(json.loads(path.read_text(encoding='utf-8')))
                except (OSError, ValueError, KeyError) as e:
                    get_logger().warning(f"Ignoring unreadable histogram cache {path}: {e}")
                else:
                    self.hits += 1
                    if len(self._histograms) >= self.max_size:
                        self._evict_lru()
                    self._histograms[key] = histogram
                    self._access_count[key] = 1
                    return histogram
        self.misses += 1
        return None

    def _evict_lru(self) -> None:
        """Evict the least accessed entry (oldest first on ties)."""
        if not self._histograms:
            return
        victim = min(self._histograms, key=lambda key: self._access_count.get(key, 0))
        del self._histograms[victim]
        self._access_count.pop(victim, None)

    def clear(self) -> None:
        """Clear the in-memory cache; disk files are kept."""
        self._histograms.clear()
        self._access_count.clear()

    def get_cache_stats(self) -> Dict[str, int]:
        return {
            'histograms_cached': len(self._histograms),
            'hits': self.hits,
            'misses': self.misses,
        }
