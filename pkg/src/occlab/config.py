"""Cache geometry and design configuration.

A ``CacheConfig`` fully determines a simulated last-level cache: the design
family (how addresses map to sets), the geometry (size, line, ways, skews),
the replacement policy, and the key material for the keyed designs. All
randomness is rooted in ``seed``, so two configs with equal fields produce
bit-identical simulations.

Geometry convention: ``ways_per_set`` counts the ways of one set *within one
skew*, and every skew has ``llc_bytes / (line_bytes * ways_per_set * skews)``
sets. For the single-skew designs this reduces to the ordinary
set-associative layout.

The published MIRAGE geometry reads "8+6 ways" per tag set, which leaves
open whether the 8 base ways are counted per skew or across the whole
cache. ``mirage_ways_scope`` exposes both readings: "skew" (default) backs
each skew-set with ``ways_per_set`` data entries, "cache" divides
``ways_per_set`` across the skews.
"""

from __future__ import annotations

from dataclasses import dataclass

DESIGNS = ("baseline", "ceaser", "ceaser_s", "scatter", "sass", "mirage")
POLICIES = ("random", "fifo", "treeplru", "weightedlru", "rrip")

# Number of 80-bit keys each design consumes. The sass entry is the master
# key from which per-domain stage keys are expanded on first use.
KEY_COUNT = {
    "baseline": 0,
    "ceaser": 1,
    "ceaser_s": None,   # one per skew
    "scatter": 1,
    "sass": 1,
    "mirage": None,     # one per skew
}

# Conventional geometry for a given design at a fixed total capacity:
# (ways per skew-set, skews). Keeps all designs at 8 ways total.
DESIGN_GEOMETRY = {
    "baseline": (8, 1),
    "ceaser": (8, 1),
    "ceaser_s": (4, 2),
    "scatter": (4, 2),
    "sass": (4, 2),
    "mirage": (8, 2),
}

MASK80 = (1 << 80) - 1


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass
class CacheConfig:
    design: str
    llc_bytes: int = 16 * 1024 * 1024
    line_bytes: int = 64
    ways_per_set: int = 8
    skews: int = 1
    policy: str = "random"
    seed: int = 0
    keys: tuple[int, ...] | None = None
    hit_cost: int = 1
    miss_cost: int = 100
    encryption_latency: int = 3
    # mirage-only knobs
    extra_tags_per_set: int = 6
    mirage_ways_scope: str = "skew"

    def __post_init__(self):
        if self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if not _is_pow2(self.line_bytes) or self.line_bytes < 8:
            raise ValueError("line_bytes must be a power of two >= 8")
        if self.llc_bytes <= 0 or self.llc_bytes % self.line_bytes:
            raise ValueError("llc_bytes must be a positive multiple of line_bytes")
        if self.ways_per_set < 1 or self.skews < 1:
            raise ValueError("ways_per_set and skews must be >= 1")

        if self.design in ("baseline", "ceaser") and self.skews != 1:
            raise ValueError(f"{self.design} is single-skew")
        if self.design in ("ceaser_s", "scatter", "mirage") and self.skews < 2:
            raise ValueError(f"{self.design} needs at least 2 skews")

        lines = self.llc_bytes // self.line_bytes
        if lines % (self.ways_per_set * self.skews):
            raise ValueError("geometry does not tile the cache")
        sets = lines // (self.ways_per_set * self.skews)
        if not _is_pow2(sets) or sets < 2:
            raise ValueError("sets per skew must be a power of two >= 2")

        if self.mirage_ways_scope not in ("skew", "cache"):
            raise ValueError("mirage_ways_scope must be 'skew' or 'cache'")
        if self.design == "mirage":
            if self.extra_tags_per_set < 1:
                raise ValueError("mirage needs extra_tags_per_set >= 1")
            if self.mirage_ways_scope == "cache" and self.ways_per_set % self.skews:
                raise ValueError("'cache' scope needs ways_per_set divisible by skews")
        if min(self.hit_cost, self.miss_cost, self.encryption_latency) < 0:
            raise ValueError("costs must be >= 0")
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must fit in 64 bits")

        if self.keys is not None:
            self.keys = tuple(int(k) for k in self.keys)
            want = self.expected_key_count()
            if len(self.keys) != want:
                raise ValueError(f"{self.design} takes {want} key(s), got {len(self.keys)}")
            for k in self.keys:
                if not 0 <= k <= MASK80:
                    raise ValueError("keys must be 80-bit")
        elif self.expected_key_count():
            from . import randfunc
            self.keys = tuple(randfunc.derive_key80(self.seed, i)
                              for i in range(self.expected_key_count()))
        else:
            self.keys = ()

    # -- derived geometry ---------------------------------------------------

    @property
    def lines(self) -> int:
        return self.llc_bytes // self.line_bytes

    @property
    def sets_per_skew(self) -> int:
        return self.lines // (self.ways_per_set * self.skews)

    @property
    def set_bits(self) -> int:
        return self.sets_per_skew.bit_length() - 1

    @property
    def line_bits(self) -> int:
        return self.line_bytes.bit_length() - 1

    def expected_key_count(self) -> int:
        n = KEY_COUNT[self.design]
        return self.skews if n is None else n

    def base_ways(self) -> int:
        """Data ways backing one skew-set (mirage), else the plain ways."""
        if self.design == "mirage" and self.mirage_ways_scope == "cache":
            return self.ways_per_set // self.skews
        return self.ways_per_set

    def tag_ways(self) -> int:
        """Tag-store ways of one skew-set; over-provisioned for mirage."""
        if self.design == "mirage":
            return self.base_ways() + self.extra_tags_per_set
        return self.ways_per_set

    def data_capacity(self) -> int:
        """Number of lines the cache can hold at once."""
        if self.design == "mirage":
            return self.skews * self.sets_per_skew * self.base_ways()
        return self.lines


def default_config(design: str, **overrides) -> CacheConfig:
    """Config with the conventional ways/skews split for ``design``."""
    ways, skews = DESIGN_GEOMETRY[design]
    params = {"ways_per_set": ways, "skews": skews}
    params.update(overrides)
    return CacheConfig(design=design, **params)
