"""Functional simulator for randomized last-level caches and the occupancy
attacks used to evaluate them."""

from .cachecore import (AccessOutcome, Cache, CacheStats, active_backend,
                        build_cache)
from .config import DESIGNS, POLICIES, CacheConfig, default_config
from .experiments import ExperimentConfig, bench, load_config, run_experiment
from .traceio import Trace, load_trace, save_trace

__version__ = "0.1.0"

__all__ = [
    "AccessOutcome", "Cache", "CacheConfig", "CacheStats", "DESIGNS",
    "ExperimentConfig", "POLICIES", "Trace", "active_backend", "bench",
    "build_cache", "default_config", "load_config", "load_trace",
    "run_experiment", "save_trace", "__version__",
]
