"""Pure-Python simulation kernel.

This is the reference backend: every observable behaviour (outcome codes,
eviction victims, random-stream consumption) is defined by this file, and
the compiled backend in ``_simcore`` mirrors it statement for statement.
State lives in flat Python lists indexed by

    flat = (skew * sets + set_index) * tag_ways + way

because list indexing is several times faster than scalar numpy indexing,
and at desk scale that is what dominates.

Outcome codes (also the order the stats counters report):

    0 hit
    1 set-fill   install into an invalid way (non-mirage)
    2 sae        set-associative eviction, a valid way was replaced
    3 gle        global eviction, a random data entry was reclaimed (mirage)
    4 cold-fill  install backed by a never-used data entry (mirage)

Random streams, all splitmix64, seeded per concern so consuming one cannot
shift another:

    prefill  line addresses for spurious_prefill
    skew     skew choice on installs (and tie/SAE skew picks)
    gle      global eviction victim index
    policy   victim way for the random replacement policy

Draw discipline on a miss, which both backends must reproduce exactly:
single-skew designs draw nothing for the skew pick; multi-skew designs draw
one skew value per install; mirage draws from the skew stream only on a tie
or a both-full SAE.
"""

from __future__ import annotations

import numpy as np

from . import present, randfunc, replacement, rng

DESIGN_CODES = {"baseline": 0, "ceaser": 1, "ceaser_s": 2, "scatter": 3,
                "sass": 4, "mirage": 5}

D_BASELINE, D_CEASER, D_CEASER_S, D_SCATTER, D_SASS, D_MIRAGE = range(6)
P_RANDOM, P_FIFO, P_TREE_PLRU, P_WEIGHTED_LRU, P_SRRIP = range(5)

NO_VICTIM = 255

OUT_HIT = 0
OUT_SETFILL = 1
OUT_SAE = 2
OUT_GLE = 3
OUT_COLDFILL = 4

PREFILL_LINE_BASE = 1 << 45
PREFILL_DOMAIN_BASE = 240


class PySimKernel:
    """One simulated cache. Built from the plan dict that cachecore prepares."""

    backend_name = "python"

    def __init__(self, plan: dict):
        self.design = plan["design"]
        self.sets = plan["sets"]
        self.set_bits = plan["set_bits"]
        self.ways = plan["ways"]
        self.tag_ways = plan["tag_ways"]
        self.skews = plan["skews"]
        self.policy = plan["policy"]
        self.capacity = plan["capacity"]
        self.seed = plan["seed"]

        rk = plan["round_keys"]
        self.round_keys = [[int(x) for x in row] for row in rk]
        self.nkeys = len(self.round_keys)

        nslots = self.skews * self.sets * self.tag_ways
        self.tag_line = [0] * nslots
        self.tag_domain = [0] * nslots
        self.tag_valid = [0] * nslots

        self.stamps = [0] * nslots
        self.rrpv = [0] * nslots
        self.plru_bits = [0] * (self.skews * self.sets)

        if self.design == D_MIRAGE:
            self.tag_data = [-1] * nslots
            self.data_tag = [-1] * self.capacity
            self.next_free = 0
        else:
            self.tag_data = None
            self.data_tag = None
            self.next_free = 0

        self.dom_count = [0] * 256
        self.occupied = 0

        self.accesses = 0
        self.hits = 0
        self.misses = 0
        self.n_setfill = 0
        self.n_sae = 0
        self.n_gle = 0
        self.n_coldfill = 0
        self.dom_miss = [0] * 256

        self.rs_prefill = rng.SplitMix64(rng.stream_seed(self.seed, rng.STREAM_PREFILL))
        self.rs_skew = rng.SplitMix64(rng.stream_seed(self.seed, rng.STREAM_SKEW))
        self.rs_gle = rng.SplitMix64(rng.stream_seed(self.seed, rng.STREAM_GLE))
        self.rs_policy = rng.SplitMix64(rng.stream_seed(self.seed, rng.STREAM_POLICY))

        self._memo: dict[int, tuple[int, ...]] = {}
        # sass per-domain mapping material, built lazily
        self._sass_k1: dict[int, list[list[int]]] = {}
        self._sass_f2: dict[int, list[np.ndarray]] = {}

    # -- index computation ----------------------------------------------------

    def ensure_domain(self, domain: int) -> None:
        """Precompute the sass per-domain stage keys and tables."""
        if self.design != D_SASS or domain in self._sass_f2:
            return
        master = self.round_keys[0]
        k1s, f2s = [], []
        for s in range(self.skews):
            k1 = randfunc.sass_stage_key(master, domain, s, 1)
            k2 = randfunc.sass_stage_key(master, domain, s, 2)
            k1s.append(present.key_schedule(k1))
            f2s.append(randfunc.sass_f2_table(present.round_keys_array(k2), self.sets))
        self._sass_k1[domain] = k1s
        self._sass_f2[domain] = f2s

    def _compute_indices(self, line: int, domain: int) -> tuple[int, ...]:
        mask = self.sets - 1
        if self.design == D_BASELINE:
            return (line & mask,)
        if self.design == D_SASS:
            self.ensure_domain(domain)
            k1s = self._sass_k1[domain]
            f2s = self._sass_f2[domain]
            return tuple(int(f2s[s][present.encrypt64(line, k1s[s]) & mask])
                         for s in range(self.skews))
        out = []
        ct = -1
        last_key = -1
        for s in range(self.skews):
            ki = s % self.nkeys
            if ki != last_key:
                ct = present.encrypt64(line, self.round_keys[ki])
                last_key = ki
            out.append((ct >> (s * self.set_bits)) & mask)
        return tuple(out)

    def _indices(self, line: int, domain: int) -> tuple[int, ...]:
        key = (line << 8) | domain
        idx = self._memo.get(key)
        if idx is None:
            idx = self._compute_indices(line, domain)
            self._memo[key] = idx
        return idx

    # -- policy helpers ---------------------------------------------------------

    def _touch(self, base: int, setflat: int, way: int) -> None:
        p = self.policy
        if p == P_WEIGHTED_LRU:
            self.stamps[base + way] = self.accesses
        elif p == P_TREE_PLRU:
            self.plru_bits[setflat] = replacement.tree_plru_touch(
                self.plru_bits[setflat], way, self.tag_ways)
        elif p == P_SRRIP:
            self.rrpv[base + way] = 0

    def _install_state(self, base: int, setflat: int, way: int) -> None:
        p = self.policy
        if p == P_FIFO or p == P_WEIGHTED_LRU:
            self.stamps[base + way] = self.accesses
        elif p == P_TREE_PLRU:
            self.plru_bits[setflat] = replacement.tree_plru_touch(
                self.plru_bits[setflat], way, self.tag_ways)
        elif p == P_SRRIP:
            self.rrpv[base + way] = replacement.SRRIP_INSERT

    def _victim_way(self, base: int, setflat: int) -> int:
        p = self.policy
        tw = self.tag_ways
        if p == P_RANDOM:
            return self.rs_policy.bounded(tw)
        if p == P_FIFO or p == P_WEIGHTED_LRU:
            return replacement.oldest_way(self.stamps[base:base + tw])
        if p == P_TREE_PLRU:
            return replacement.tree_plru_select(self.plru_bits[setflat], tw)
        row = self.rrpv[base:base + tw]
        w = replacement.srrip_select(row)
        self.rrpv[base:base + tw] = row
        return w

    # -- the access path --------------------------------------------------------

    def access(self, line: int, domain: int, use_memo: bool = True):
        """Returns (outcome, victim_domain, victim_line, skew_used, set_used)."""
        self.accesses += 1
        idx = self._indices(line, domain) if use_memo else self._compute_indices(line, domain)

        sets = self.sets
        tw = self.tag_ways
        for s in range(self.skews):
            setflat = s * sets + idx[s]
            base = setflat * tw
            for w in range(tw):
                f = base + w
                if self.tag_valid[f] and self.tag_line[f] == line \
                        and self.tag_domain[f] == domain:
                    self.hits += 1
                    self._touch(base, setflat, w)
                    return OUT_HIT, NO_VICTIM, 0, s, idx[s]

        self.misses += 1
        self.dom_miss[domain] += 1
        if self.design == D_MIRAGE:
            return self._install_mirage(line, domain, idx)
        return self._install_plain(line, domain, idx)

    def _install_plain(self, line: int, domain: int, idx):
        s = self.rs_skew.bounded(self.skews) if self.skews > 1 else 0
        setflat = s * self.sets + idx[s]
        base = setflat * self.tag_ways
        for w in range(self.tag_ways):
            f = base + w
            if not self.tag_valid[f]:
                self._write_tag(f, line, domain)
                self._install_state(base, setflat, w)
                self.n_setfill += 1
                self.occupied += 1
                return OUT_SETFILL, NO_VICTIM, 0, s, idx[s]
        w = self._victim_way(base, setflat)
        f = base + w
        vdom, vline = self.tag_domain[f], self.tag_line[f]
        self.dom_count[vdom] -= 1
        self._write_tag(f, line, domain)
        self._install_state(base, setflat, w)
        self.n_sae += 1
        return OUT_SAE, vdom, vline, s, idx[s]

    def _install_mirage(self, line: int, domain: int, idx):
        sets = self.sets
        tw = self.tag_ways
        best = -1
        best_n = -1
        tied = 0
        for s in range(self.skews):
            base = (s * sets + idx[s]) * tw
            n = 0
            for w in range(tw):
                if not self.tag_valid[base + w]:
                    n += 1
            if n > best_n:
                best, best_n, tied = s, n, 1
            elif n == best_n:
                tied += 1

        if best_n == 0:
            # every tag way valid in every skew: fall back to an ordinary
            # set-associative eviction, freeing that tag's data entry
            s = self.rs_skew.bounded(self.skews)
            setflat = s * sets + idx[s]
            base = setflat * tw
            w = self._victim_way(base, setflat)
            f = base + w
            vdom, vline = self.tag_domain[f], self.tag_line[f]
            d = self.tag_data[f]
            self.dom_count[vdom] -= 1
            self._write_tag(f, line, domain)
            self.tag_data[f] = d
            self.data_tag[d] = f
            self._install_state(base, setflat, w)
            self.n_sae += 1
            return OUT_SAE, vdom, vline, s, idx[s]

        if tied > 1:
            # pick uniformly among the skews sharing the max invalid count
            k = self.rs_skew.bounded(tied)
            for s in range(self.skews):
                base = (s * sets + idx[s]) * tw
                n = 0
                for w in range(tw):
                    if not self.tag_valid[base + w]:
                        n += 1
                if n == best_n:
                    if k == 0:
                        best = s
                        break
                    k -= 1

        setflat = best * sets + idx[best]
        base = setflat * tw
        way = -1
        for w in range(tw):
            if not self.tag_valid[base + w]:
                way = w
                break
        f = base + way

        if self.next_free < self.capacity:
            d = self.next_free
            self.next_free += 1
            self._write_tag(f, line, domain)
            self.tag_data[f] = d
            self.data_tag[d] = f
            self._install_state(base, setflat, way)
            self.n_coldfill += 1
            self.occupied += 1
            return OUT_COLDFILL, NO_VICTIM, 0, best, idx[best]

        d = self.rs_gle.bounded(self.capacity)
        vf = self.data_tag[d]
        vdom, vline = self.tag_domain[vf], self.tag_line[vf]
        self.tag_valid[vf] = 0
        self.tag_data[vf] = -1
        self.dom_count[vdom] -= 1
        self._write_tag(f, line, domain)
        self.tag_data[f] = d
        self.data_tag[d] = f
        self._install_state(base, setflat, way)
        self.n_gle += 1
        return OUT_GLE, vdom, vline, best, idx[best]

    def _write_tag(self, f: int, line: int, domain: int) -> None:
        self.tag_line[f] = line
        self.tag_domain[f] = domain
        self.tag_valid[f] = 1
        self.dom_count[domain] += 1

    # -- bulk / maintenance ------------------------------------------------------

    def access_batch(self, lines, domains):
        n = len(lines)
        outcomes = np.empty(n, dtype=np.uint8)
        vdoms = np.empty(n, dtype=np.uint8)
        vlines = np.empty(n, dtype=np.uint64)
        for i in range(n):
            o, vd, vl, _, _ = self.access(int(lines[i]), int(domains[i]))
            outcomes[i] = o
            vdoms[i] = vd
            vlines[i] = vl
        return outcomes, vdoms, vlines

    def spurious_prefill(self) -> int:
        """Fill the cache with junk lines owned by the reserved high domains.

        Returns the number of accesses performed. Junk lines live above
        2^45 so they can never collide with experiment addresses, and the
        index memo is bypassed so the table is not bloated by throwaways.
        """
        done = 0
        budget = 16 * self.capacity
        while self.occupied < self.capacity and done < budget:
            line = PREFILL_LINE_BASE | (self.rs_prefill.next_u64() & (PREFILL_LINE_BASE - 1))
            dom = PREFILL_DOMAIN_BASE + (done & 15)
            self.access(line, dom, use_memo=False)
            done += 1
        return done

    def flush_all(self) -> None:
        nslots = len(self.tag_valid)
        self.tag_line = [0] * nslots
        self.tag_domain = [0] * nslots
        self.tag_valid = [0] * nslots
        self.stamps = [0] * nslots
        self.rrpv = [0] * nslots
        self.plru_bits = [0] * (self.skews * self.sets)
        if self.design == D_MIRAGE:
            self.tag_data = [-1] * nslots
            self.data_tag = [-1] * self.capacity
            self.next_free = 0
        self.dom_count = [0] * 256
        self.occupied = 0
        self._memo.clear()
        self.reset_stats()

    def occupancy_of(self, domain: int) -> int:
        return self.dom_count[domain]

    def occupancy_total(self) -> int:
        return self.occupied

    def stats(self) -> dict:
        return {"accesses": self.accesses, "hits": self.hits, "misses": self.misses,
                "setfill": self.n_setfill, "sae": self.n_sae, "gle": self.n_gle,
                "coldfill": self.n_coldfill,
                "per_domain_misses": {d: n for d, n in enumerate(self.dom_miss) if n}}

    def reset_stats(self) -> None:
        self.accesses = self.hits = self.misses = 0
        self.n_setfill = self.n_sae = self.n_gle = self.n_coldfill = 0
        self.dom_miss = [0] * 256

    def snapshot(self) -> dict:
        snap = {
            "tag_line": list(self.tag_line),
            "tag_domain": list(self.tag_domain),
            "tag_valid": list(self.tag_valid),
            "stamps": list(self.stamps),
            "rrpv": list(self.rrpv),
            "plru_bits": list(self.plru_bits),
            "dom_count": list(self.dom_count),
            "occupied": self.occupied,
            "next_free": self.next_free,
            "memo": dict(self._memo),
            "stats": self.stats(),
        }
        if self.design == D_MIRAGE:
            snap["tag_data"] = list(self.tag_data)
            snap["data_tag"] = list(self.data_tag)
        return snap

    def restore(self, snap: dict) -> None:
        self.tag_line = list(snap["tag_line"])
        self.tag_domain = list(snap["tag_domain"])
        self.tag_valid = list(snap["tag_valid"])
        self.stamps = list(snap["stamps"])
        self.rrpv = list(snap["rrpv"])
        self.plru_bits = list(snap["plru_bits"])
        self.dom_count = list(snap["dom_count"])
        self.occupied = snap["occupied"]
        self.next_free = snap["next_free"]
        self._memo = dict(snap["memo"])
        if self.design == D_MIRAGE:
            self.tag_data = list(snap["tag_data"])
            self.data_tag = list(snap["data_tag"])
        s = snap["stats"]
        self.accesses = s["accesses"]
        self.hits = s["hits"]
        self.misses = s["misses"]
        self.n_setfill = s["setfill"]
        self.n_sae = s["sae"]
        self.n_gle = s["gle"]
        self.n_coldfill = s["coldfill"]
        self.dom_miss = [0] * 256
        for d, n in s["per_domain_misses"].items():
            self.dom_miss[d] = n
