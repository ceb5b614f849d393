"""Address-to-set mappings for the randomized designs.

Every keyed design reduces to one rule: encrypt the line address with a
per-skew key and slice a per-skew field of set-index bits out of the
ciphertext,

    index(s) = (E(line, key[s mod nkeys]) >> (s * set_bits)) & (sets - 1)

With one key per skew (CEASER-S, MIRAGE) the skews use independent
ciphertexts; with a single shared key (CEASER, ScatterCache) they read
disjoint bit fields of the same ciphertext, which is equivalent for the
adversary model here and costs one encryption instead of two.

SassCache is the exception: its mapping is a two-stage keyed function whose
second stage is a small table per (domain, skew), so distinct security
domains see distinct, partially overlapping slices of the index space.
"""

from __future__ import annotations

import numpy as np

from . import present, rng

MASK80 = (1 << 80) - 1


def derive_key80(master_seed: int, index: int) -> int:
    hi = rng.derive(master_seed, "cache-key-hi", index)
    lo = rng.derive(master_seed, "cache-key-lo", index) & 0xFFFF
    return ((hi << 16) | lo) & MASK80


def keyed_index(line: int, round_keys, skew: int, set_bits: int) -> int:
    """Set index of ``line`` in ``skew`` under one expanded key."""
    ct = present.encrypt64(line, round_keys)
    return (ct >> (skew * set_bits)) & ((1 << set_bits) - 1)


def keyed_indices_batch(lines: np.ndarray, round_keys: np.ndarray,
                        skew: int, set_bits: int) -> np.ndarray:
    """Vectorized ``keyed_index`` for uniformity studies and table builds."""
    ct = present.encrypt_batch(lines.astype(np.uint64), round_keys)
    return ((ct >> np.uint64(skew * set_bits))
            & np.uint64((1 << set_bits) - 1)).astype(np.int64)


def derive_set_indices(design: str, line: int, keys, domain: int,
                       sets: int, skews: int) -> tuple[int, ...]:
    """Per-skew set indices of ``line``, straight from the design's rule.

    This is the standalone form of the mapping the simulation kernels
    memoize internally: baseline is the address modulo ``sets``, the keyed
    designs slice encrypted line addresses, and sass routes through its
    per-domain two-stage function. Mainly useful for uniformity and
    collision studies that never build a cache.
    """
    if sets < 2 or sets & (sets - 1):
        raise ValueError("sets must be a power of two >= 2")
    if skews < 1:
        raise ValueError("skews must be >= 1")
    if design in ("baseline", "ceaser") and skews != 1:
        raise ValueError(f"{design} is single-skew")
    set_bits = sets.bit_length() - 1
    mask = sets - 1

    if design == "baseline":
        return (line & mask,)
    if design == "sass":
        master = present.key_schedule(keys[0])
        out = []
        for s in range(skews):
            k1 = present.key_schedule(sass_stage_key(master, domain, s, 1))
            k2 = present.round_keys_array(sass_stage_key(master, domain, s, 2))
            out.append(sass_index(line, k1, sass_f2_table(k2, sets), sets))
        return tuple(out)
    if design in ("ceaser", "scatter"):
        rks = [present.key_schedule(keys[0])]
    else:
        rks = [present.key_schedule(k) for k in keys]
    return tuple(keyed_index(line, rks[s % len(rks)], s, set_bits)
                 for s in range(skews))


# -- SassCache ----------------------------------------------------------------

SASS_PAD = 0x5A


def sass_stage_key(master_round_keys, domain: int, skew: int, stage: int) -> int:
    """Expand the 80-bit master into the per-(domain, skew, stage) key.

    The tweak block packs the coordinates into distinct bytes; the cipher
    output is then folded to 80 bits. Any injective packing works, it only
    has to be fixed.
    """
    tweak = (domain << 24) | (skew << 16) | (stage << 8) | SASS_PAD
    ct = present.encrypt64(tweak, master_round_keys)
    return ((ct << 16) | (ct >> 48)) & MASK80


def sass_f2_table(stage2_round_keys: np.ndarray, sets: int) -> np.ndarray:
    """Second-stage lookup table: maps a first-stage index to the final set.

    Built by encrypting the integers [0, sets) and truncating, so the table
    is a random function, not a permutation; its image covers roughly a
    (1 - 1/e) fraction of the sets, which is what bounds a domain's reach.
    """
    xs = np.arange(sets, dtype=np.uint64)
    ct = present.encrypt_batch(xs, stage2_round_keys)
    return (ct & np.uint64(sets - 1)).astype(np.uint32)


def sass_index(line: int, stage1_round_keys, f2_table: np.ndarray, sets: int) -> int:
    first = present.encrypt64(line, stage1_round_keys) & (sets - 1)
    return int(f2_table[first])


def reachable_sets(f2_table: np.ndarray) -> np.ndarray:
    """Sorted distinct sets a (domain, skew) pair can ever occupy."""
    return np.unique(f2_table)
