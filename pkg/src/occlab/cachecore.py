"""Cache object facade over the simulation kernels.

``Cache`` wraps one kernel instance (compiled if the extension built,
pure Python otherwise) behind a small, stable API: byte-addressed
``access``, batched line-addressed access for the measurement harness,
occupancy queries, spurious prefill, and snapshot/restore.

Backend selection happens once at import. Set ``OCCLAB_BACKEND`` to
``compiled`` or ``python`` to force one (``compiled`` raises if the
extension is missing); the default ``auto`` quietly falls back.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import present, replacement
from ._pysim import DESIGN_CODES, NO_VICTIM, PySimKernel
from .config import CacheConfig

# Kernel caps: line numbers must survive `(line << 8) | domain` packing in
# the index memo, and the compiled memo packs per-skew set indices into
# 16-bit lanes.
MAX_LINE = 1 << 56
MAX_ADDRESS = 1 << 62

OUTCOME_NAMES = ("hit", "setfill", "sae", "gle", "coldfill")

# eviction kind reported per access; plain set fills evict nothing
EVICTION_KINDS = {0: None, 1: None, 2: "sae", 3: "gle", 4: "coldfill"}


def _load_backend():
    choice = os.environ.get("OCCLAB_BACKEND", "auto")
    if choice not in ("auto", "compiled", "python"):
        raise RuntimeError(f"OCCLAB_BACKEND must be auto/compiled/python, not {choice!r}")
    if choice == "python":
        return None
    try:
        from . import _simcore
        return _simcore
    except ImportError:
        if choice == "compiled":
            raise RuntimeError("compiled backend requested but _simcore is not built")
        return None


_SIMCORE = _load_backend()


def active_backend() -> str:
    """Name of the kernel new caches use: "compiled" or "python"."""
    return "compiled" if _SIMCORE is not None else "python"


@dataclass
class AccessOutcome:
    hit: bool
    eviction: str | None     # None, "sae", "gle" or "coldfill"
    victim_domain: int | None
    victim_line: int | None
    skew_used: int
    set_used: int
    cost: int
    outcome: int             # raw kernel code, see _pysim


@dataclass
class CacheStats:
    accesses: int
    hits: int
    misses: int
    setfill: int
    sae: int
    gle: int
    coldfill: int
    per_domain_misses: dict[int, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "accesses": self.accesses, "hits": self.hits, "misses": self.misses,
            "setfill": self.setfill, "sae": self.sae, "gle": self.gle,
            "coldfill": self.coldfill,
            "per_domain_misses": dict(self.per_domain_misses),
        }


def build_plan(cfg: CacheConfig) -> dict:
    """Flatten a config into the dict both kernels consume."""
    if cfg.skews > 4:
        raise ValueError("kernels support at most 4 skews")
    if cfg.set_bits > 16:
        raise ValueError("kernels support at most 2^16 sets per skew")
    if cfg.skews * cfg.set_bits > 64:
        raise ValueError("skews * set_bits must fit the 64-bit index slices")
    nkeys = max(1, len(cfg.keys))
    rk = np.zeros((nkeys, 32), dtype=np.uint64)
    for i, key in enumerate(cfg.keys):
        rk[i] = present.round_keys_array(key)
    return {
        "design": DESIGN_CODES[cfg.design],
        "sets": cfg.sets_per_skew,
        "set_bits": cfg.set_bits,
        "ways": cfg.base_ways(),
        "tag_ways": cfg.tag_ways(),
        "skews": cfg.skews,
        "policy": replacement.POLICY_CODES[cfg.policy],
        "capacity": cfg.data_capacity(),
        "seed": cfg.seed,
        "round_keys": rk,
    }


class Cache:
    """One simulated cache plus its config and accounting."""

    def __init__(self, cfg: CacheConfig, backend: str | None = None):
        self.cfg = cfg
        plan = build_plan(cfg)
        if backend is None:
            backend = active_backend()
        if backend == "compiled":
            if _SIMCORE is None:
                raise RuntimeError("compiled backend is not available")
            self._k = _SIMCORE.CSimKernel(plan)
        elif backend == "python":
            self._k = PySimKernel(plan)
        else:
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self._line_shift = cfg.line_bits
        self._keyed = cfg.design != "baseline"
        self._miss_cost = cfg.miss_cost + (cfg.encryption_latency if self._keyed else 0)

    # -- validation -----------------------------------------------------------

    def _check_line(self, line: int, domain: int) -> None:
        if not 0 <= line < MAX_LINE:
            raise ValueError(f"line {line:#x} outside [0, 2^56)")
        if not 0 <= domain < 256:
            raise ValueError(f"domain {domain} outside [0, 256)")

    # -- access ----------------------------------------------------------------

    def access(self, addr: int, domain: int = 0, kind: str = "L") -> AccessOutcome:
        """One byte-addressed access. Loads and stores both allocate, so
        ``kind`` only validates; it never changes behaviour."""
        if kind not in ("L", "S"):
            raise ValueError(f"kind must be 'L' or 'S', not {kind!r}")
        if not 0 <= addr < MAX_ADDRESS:
            raise ValueError(f"address {addr:#x} outside [0, 2^62)")
        return self.access_line(addr >> self._line_shift, domain)

    def access_line(self, line: int, domain: int = 0) -> AccessOutcome:
        """One access in line-address space."""
        self._check_line(line, domain)
        out, vdom, vline, skew, setidx = self._k.access(line, domain)
        hit = out == 0
        return AccessOutcome(
            hit=hit,
            eviction=EVICTION_KINDS[out],
            victim_domain=None if vdom == NO_VICTIM else int(vdom),
            victim_line=None if vdom == NO_VICTIM else int(vline),
            skew_used=int(skew),
            set_used=int(setidx),
            cost=self.cfg.hit_cost if hit else self._miss_cost,
            outcome=int(out),
        )

    def access_lines(self, lines, domains):
        """Batched line-addressed access for the harness hot loops.

        Returns (outcomes, victim_domains, victim_lines) as numpy arrays;
        victim_domain 255 means no victim. ``domains`` may be a scalar.
        """
        lines = np.ascontiguousarray(lines, dtype=np.uint64)
        if np.isscalar(domains) or getattr(domains, "ndim", 1) == 0:
            domains = np.full(len(lines), int(domains), dtype=np.uint8)
        else:
            domains = np.ascontiguousarray(domains, dtype=np.uint8)
        if len(domains) != len(lines):
            raise ValueError("lines and domains length mismatch")
        if len(lines) and int(lines.max()) >= MAX_LINE:
            raise ValueError("line address outside [0, 2^56)")
        return self._k.access_batch(lines, domains)

    def access_batch(self, addrs, domains):
        """Batched byte-addressed access; see ``access_lines``."""
        addrs = np.ascontiguousarray(addrs, dtype=np.uint64)
        if len(addrs) and int(addrs.max()) >= MAX_ADDRESS:
            raise ValueError("address outside [0, 2^62)")
        return self.access_lines(addrs >> np.uint64(self._line_shift), domains)

    def cost_of_outcomes(self, outcomes) -> int:
        """Total access cost for a batch's outcome array."""
        outcomes = np.asarray(outcomes)
        hits = int(np.count_nonzero(outcomes == 0))
        return hits * self.cfg.hit_cost + (len(outcomes) - hits) * self._miss_cost

    # -- maintenance -------------------------------------------------------------

    def spurious_prefill(self) -> int:
        return self._k.spurious_prefill()

    def flush_all(self) -> None:
        self._k.flush_all()

    def ensure_domain(self, domain: int) -> None:
        """Precompute per-domain mapping material (sass); no-op elsewhere."""
        self._k.ensure_domain(domain)

    # -- queries --------------------------------------------------------------------

    @property
    def capacity(self) -> int:
        return self.cfg.data_capacity()

    def occupancy_of(self, domain: int) -> float:
        """Fraction of the data capacity holding lines of ``domain``."""
        return self._k.occupancy_of(domain) / self.capacity

    def occupancy_lines(self, domain: int) -> int:
        """Number of cached lines tagged to ``domain``."""
        return self._k.occupancy_of(domain)

    def occupancy_total(self) -> int:
        return self._k.occupancy_total()

    def stats(self) -> CacheStats:
        return CacheStats(**self._k.stats())

    def reset_stats(self) -> None:
        self._k.reset_stats()

    def snapshot(self):
        return self._k.snapshot()

    def restore(self, snap) -> None:
        self._k.restore(snap)


def build_cache(cfg: CacheConfig, backend: str | None = None) -> Cache:
    return Cache(cfg, backend=backend)
