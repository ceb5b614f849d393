# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled simulation kernel.

Statement-for-statement mirror of ``_pysim.PySimKernel``; see that module
for the semantics, outcome codes and the random-draw discipline. The two
backends must stay observationally identical, which the parity tests check
by comparing full outcome and victim sequences.

Differences are implementation only: state lives in numpy buffers accessed
through typed memoryviews, the index memo is an open-addressing table
instead of a dict, and the cipher runs on a flattened copy of the
substitution-permutation tables.
"""

import numpy as np

from . import present, randfunc

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t occlab_mulshift64(uint64_t x, uint64_t n) {
        return (uint64_t)(((__uint128_t)x * (__uint128_t)n) >> 64);
    }
    """
    unsigned long long occlab_mulshift64(unsigned long long x, unsigned long long n) nogil

ctypedef unsigned long long u64
ctypedef unsigned char u8

cdef enum:
    D_BASELINE = 0
    D_CEASER = 1
    D_CEASER_S = 2
    D_SCATTER = 3
    D_SASS = 4
    D_MIRAGE = 5

cdef enum:
    P_RANDOM = 0
    P_FIFO = 1
    P_TREE_PLRU = 2
    P_WEIGHTED_LRU = 3
    P_SRRIP = 4

cdef enum:
    NO_VICTIM = 255
    OUT_HIT = 0
    OUT_SETFILL = 1
    OUT_SAE = 2
    OUT_GLE = 3
    OUT_COLDFILL = 4
    SRRIP_MAX = 3
    SRRIP_INSERT = 2
    PREFILL_DOMAIN_BASE = 240
    STREAM_PREFILL = 1
    STREAM_SKEW = 2
    STREAM_GLE = 3
    STREAM_POLICY = 4

cdef u64 GOLDEN = <u64>0x9E3779B97F4A7C15
cdef u64 PREFILL_LINE_BASE = (<u64>1) << 45


cdef inline u64 sm_next(u64 *state) nogil:
    state[0] = state[0] + GOLDEN
    cdef u64 z = state[0]
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline u64 sm_bounded(u64 *state, u64 n) nogil:
    return occlab_mulshift64(sm_next(state), n)


cdef class CSimKernel:

    cdef public int design, sets, set_bits, ways, tag_ways, skews, policy, nkeys
    cdef public long long capacity
    cdef public u64 seed
    cdef readonly str backend_name

    cdef object a_tag_line, a_tag_domain, a_tag_valid
    cdef object a_stamps, a_rrpv, a_plru, a_dom_count, a_dom_miss
    cdef object a_tag_data, a_data_tag
    cdef object a_sp, a_rk

    cdef u64[::1] tag_line
    cdef u8[::1] tag_domain
    cdef u8[::1] tag_valid
    cdef u64[::1] stamps
    cdef u8[::1] rrpv
    cdef unsigned int[::1] plru_bits
    cdef long long[::1] dom_count
    cdef long long[::1] dom_miss
    cdef long long[::1] tag_data
    cdef long long[::1] data_tag
    cdef u64[::1] sp
    cdef u64[::1] rk

    cdef long long next_free, occupied
    cdef public long long accesses, hits, misses
    cdef public long long n_setfill, n_sae, n_gle, n_coldfill

    cdef u64 st_prefill, st_skew, st_gle, st_policy

    # open-addressing memo: (line << 8 | domain) -> packed per-skew indices
    cdef object a_mkeys, a_mvals, a_mused
    cdef u64[::1] mkeys
    cdef u64[::1] mvals
    cdef u8[::1] mused
    cdef long long msize, mcap

    # sass per-domain material
    cdef dict sass_tables
    cdef long long cached_dom
    cdef u64[::1] cur_k1
    cdef int[::1] cur_f2

    def __init__(self, dict plan):
        self.backend_name = "compiled"
        self.design = plan["design"]
        self.sets = plan["sets"]
        self.set_bits = plan["set_bits"]
        self.ways = plan["ways"]
        self.tag_ways = plan["tag_ways"]
        self.skews = plan["skews"]
        self.policy = plan["policy"]
        self.capacity = plan["capacity"]
        self.seed = plan["seed"]

        rk = np.ascontiguousarray(plan["round_keys"], dtype=np.uint64).reshape(-1)
        self.nkeys = len(rk) // 32
        self.a_rk = rk.copy()
        self.rk = self.a_rk
        self.a_sp = np.ascontiguousarray(present.SP_TABLES, dtype=np.uint64).reshape(-1).copy()
        self.sp = self.a_sp

        cdef long long nslots = self.skews * self.sets * self.tag_ways
        self.a_tag_line = np.zeros(nslots, dtype=np.uint64)
        self.a_tag_domain = np.zeros(nslots, dtype=np.uint8)
        self.a_tag_valid = np.zeros(nslots, dtype=np.uint8)
        self.a_stamps = np.zeros(nslots, dtype=np.uint64)
        self.a_rrpv = np.zeros(nslots, dtype=np.uint8)
        self.a_plru = np.zeros(self.skews * self.sets, dtype=np.uint32)
        self.a_dom_count = np.zeros(256, dtype=np.int64)
        self.a_dom_miss = np.zeros(256, dtype=np.int64)
        self.tag_line = self.a_tag_line
        self.tag_domain = self.a_tag_domain
        self.tag_valid = self.a_tag_valid
        self.stamps = self.a_stamps
        self.rrpv = self.a_rrpv
        self.plru_bits = self.a_plru
        self.dom_count = self.a_dom_count
        self.dom_miss = self.a_dom_miss

        if self.design == D_MIRAGE:
            self.a_tag_data = np.full(nslots, -1, dtype=np.int64)
            self.a_data_tag = np.full(self.capacity, -1, dtype=np.int64)
        else:
            self.a_tag_data = np.empty(0, dtype=np.int64)
            self.a_data_tag = np.empty(0, dtype=np.int64)
        self.tag_data = self.a_tag_data
        self.data_tag = self.a_data_tag

        self.next_free = 0
        self.occupied = 0
        self.accesses = self.hits = self.misses = 0
        self.n_setfill = self.n_sae = self.n_gle = self.n_coldfill = 0

        self.st_prefill = self.seed ^ (<u64>STREAM_PREFILL * GOLDEN)
        self.st_skew = self.seed ^ (<u64>STREAM_SKEW * GOLDEN)
        self.st_gle = self.seed ^ (<u64>STREAM_GLE * GOLDEN)
        self.st_policy = self.seed ^ (<u64>STREAM_POLICY * GOLDEN)

        self._memo_init(1 << 16)
        self.sass_tables = {}
        self.cached_dom = -1

    # -- memo table -----------------------------------------------------------

    cdef void _memo_init(self, long long cap):
        self.a_mkeys = np.zeros(cap, dtype=np.uint64)
        self.a_mvals = np.zeros(cap, dtype=np.uint64)
        self.a_mused = np.zeros(cap, dtype=np.uint8)
        self.mkeys = self.a_mkeys
        self.mvals = self.a_mvals
        self.mused = self.a_mused
        self.msize = 0
        self.mcap = cap

    cdef void _memo_grow(self):
        cdef object ok = self.a_mkeys
        cdef object ov = self.a_mvals
        cdef object ou = self.a_mused
        cdef long long ocap = self.mcap
        cdef u64[::1] okv = ok
        cdef u64[::1] ovv = ov
        cdef u8[::1] ouv = ou
        self._memo_init(ocap * 4)
        cdef long long i
        for i in range(ocap):
            if ouv[i]:
                self._memo_put(okv[i], ovv[i])

    cdef inline long long _memo_slot(self, u64 key) nogil:
        cdef u64 h = key * <u64>0x9E3779B97F4A7C15
        cdef long long mask = self.mcap - 1
        cdef long long i = <long long>(h >> 32) & mask
        while self.mused[i] and self.mkeys[i] != key:
            i = (i + 1) & mask
        return i

    cdef void _memo_put(self, u64 key, u64 val):
        if self.msize * 10 >= self.mcap * 7:
            self._memo_grow()
        cdef long long i = self._memo_slot(key)
        if not self.mused[i]:
            self.mused[i] = 1
            self.mkeys[i] = key
            self.msize += 1
        self.mvals[i] = val

    # -- cipher and index computation -------------------------------------------

    cdef u64 _enc(self, u64 block, int key_row):
        cdef u64 s = block
        cdef u64[::1] sp = self.sp
        cdef u64[::1] rk = self.rk
        cdef Py_ssize_t base = key_row * 32
        cdef int r
        for r in range(31):
            s = s ^ rk[base + r]
            s = (sp[s & 0xFF]
                 | sp[256 + ((s >> 8) & 0xFF)]
                 | sp[512 + ((s >> 16) & 0xFF)]
                 | sp[768 + ((s >> 24) & 0xFF)]
                 | sp[1024 + ((s >> 32) & 0xFF)]
                 | sp[1280 + ((s >> 40) & 0xFF)]
                 | sp[1536 + ((s >> 48) & 0xFF)]
                 | sp[1792 + ((s >> 56) & 0xFF)])
        return s ^ rk[base + 31]

    def ensure_domain(self, domain):
        if self.design != D_SASS or domain in self.sass_tables:
            return
        master = [int(x) for x in np.asarray(self.a_rk).reshape(-1)[:32]]
        k1 = np.empty(self.skews * 32, dtype=np.uint64)
        f2 = np.empty(self.skews * self.sets, dtype=np.int32)
        for s in range(self.skews):
            ka = randfunc.sass_stage_key(master, domain, s, 1)
            kb = randfunc.sass_stage_key(master, domain, s, 2)
            k1[s * 32:(s + 1) * 32] = present.round_keys_array(ka)
            f2[s * self.sets:(s + 1) * self.sets] = randfunc.sass_f2_table(
                present.round_keys_array(kb), self.sets)
        self.sass_tables[domain] = (k1, f2)

    cdef void _bind_domain(self, int domain):
        self.ensure_domain(domain)
        k1, f2 = self.sass_tables[domain]
        self.cur_k1 = k1
        self.cur_f2 = f2
        self.cached_dom = domain

    cdef u64 _sass_enc(self, u64 block, int skew):
        cdef u64 s = block
        cdef u64[::1] sp = self.sp
        cdef u64[::1] rk = self.cur_k1
        cdef Py_ssize_t base = skew * 32
        cdef int r
        for r in range(31):
            s = s ^ rk[base + r]
            s = (sp[s & 0xFF]
                 | sp[256 + ((s >> 8) & 0xFF)]
                 | sp[512 + ((s >> 16) & 0xFF)]
                 | sp[768 + ((s >> 24) & 0xFF)]
                 | sp[1024 + ((s >> 32) & 0xFF)]
                 | sp[1280 + ((s >> 40) & 0xFF)]
                 | sp[1536 + ((s >> 48) & 0xFF)]
                 | sp[1792 + ((s >> 56) & 0xFF)])
        return s ^ rk[base + 31]

    cdef u64 _compute_packed(self, u64 line, int domain):
        cdef u64 mask = <u64>(self.sets - 1)
        cdef u64 packed = 0
        cdef u64 ct = 0
        cdef int s, ki, last
        if self.design == D_BASELINE:
            return line & mask
        if self.design == D_SASS:
            if domain != self.cached_dom:
                self._bind_domain(domain)
            for s in range(self.skews):
                ct = self._sass_enc(line, s) & mask
                packed |= (<u64>self.cur_f2[s * self.sets + <long long>ct]) << (16 * s)
            return packed
        last = -1
        for s in range(self.skews):
            ki = s % self.nkeys
            if ki != last:
                ct = self._enc(line, ki)
                last = ki
            packed |= ((ct >> (s * self.set_bits)) & mask) << (16 * s)
        return packed

    cdef u64 _indices_packed(self, u64 line, int domain, bint use_memo):
        cdef u64 key, val
        cdef long long slot
        if not use_memo:
            return self._compute_packed(line, domain)
        key = (line << 8) | <u64>domain
        slot = self._memo_slot(key)
        if self.mused[slot]:
            return self.mvals[slot]
        val = self._compute_packed(line, domain)
        self._memo_put(key, val)
        return val

    # -- policy helpers ----------------------------------------------------------

    cdef inline void _touch(self, long long base, long long setflat, int way):
        cdef int p = self.policy
        cdef unsigned int bits
        cdef int lvl, b, idx
        if p == P_WEIGHTED_LRU:
            self.stamps[base + way] = <u64>self.accesses
        elif p == P_TREE_PLRU:
            bits = self.plru_bits[setflat]
            idx = 0
            lvl = 0
            while (1 << lvl) < self.tag_ways:
                b = (way >> lvl) & 1
                if b:
                    bits &= ~(<unsigned int>1 << idx)
                else:
                    bits |= <unsigned int>1 << idx
                idx = 2 * idx + 1 + b
                lvl += 1
            self.plru_bits[setflat] = bits
        elif p == P_SRRIP:
            self.rrpv[base + way] = 0

    cdef inline void _install_state(self, long long base, long long setflat, int way):
        cdef int p = self.policy
        if p == P_FIFO or p == P_WEIGHTED_LRU:
            self.stamps[base + way] = <u64>self.accesses
        elif p == P_TREE_PLRU:
            self._touch(base, setflat, way)
        elif p == P_SRRIP:
            self.rrpv[base + way] = SRRIP_INSERT

    cdef int _victim_way(self, long long base, long long setflat):
        cdef int p = self.policy
        cdef int tw = self.tag_ways
        cdef int w, best, lvl, b, idx
        cdef u64 best_stamp
        cdef unsigned int bits
        if p == P_RANDOM:
            return <int>sm_bounded(&self.st_policy, <u64>tw)
        if p == P_FIFO or p == P_WEIGHTED_LRU:
            best = 0
            best_stamp = self.stamps[base]
            for w in range(1, tw):
                if self.stamps[base + w] < best_stamp:
                    best = w
                    best_stamp = self.stamps[base + w]
            return best
        if p == P_TREE_PLRU:
            bits = self.plru_bits[setflat]
            idx = 0
            best = 0
            lvl = 0
            while (1 << lvl) < tw:
                b = (bits >> idx) & 1
                best |= b << lvl
                idx = 2 * idx + 1 + b
                lvl += 1
            return best % tw
        while True:
            for w in range(tw):
                if self.rrpv[base + w] >= SRRIP_MAX:
                    return w
            for w in range(tw):
                self.rrpv[base + w] += 1

    # -- access path ---------------------------------------------------------------

    cdef inline void _write_tag(self, long long f, u64 line, int domain):
        self.tag_line[f] = line
        self.tag_domain[f] = <u8>domain
        self.tag_valid[f] = 1
        self.dom_count[domain] += 1

    cdef int _access(self, u64 line, int domain, bint use_memo,
                     int *vdom, u64 *vline, int *skew_used, long long *set_used):
        cdef u64 packed
        cdef long long setflat, base, f, d, vf
        cdef int s, w, way, best, best_n, tied, n, k
        cdef int sets = self.sets
        cdef int tw = self.tag_ways

        self.accesses += 1
        vdom[0] = NO_VICTIM
        vline[0] = 0
        packed = self._indices_packed(line, domain, use_memo)

        for s in range(self.skews):
            setflat = <long long>s * sets + <long long>((packed >> (16 * s)) & 0xFFFF)
            base = setflat * tw
            for w in range(tw):
                f = base + w
                if self.tag_valid[f] and self.tag_line[f] == line \
                        and self.tag_domain[f] == <u8>domain:
                    self.hits += 1
                    self._touch(base, setflat, w)
                    skew_used[0] = s
                    set_used[0] = <long long>((packed >> (16 * s)) & 0xFFFF)
                    return OUT_HIT

        self.misses += 1
        self.dom_miss[domain] += 1
        if self.design == D_MIRAGE:
            return self._install_mirage(line, domain, packed, vdom, vline,
                                        skew_used, set_used)
        return self._install_plain(line, domain, packed, vdom, vline,
                                   skew_used, set_used)

    cdef int _install_plain(self, u64 line, int domain, u64 packed,
                            int *vdom, u64 *vline,
                            int *skew_used, long long *set_used):
        cdef int s = 0
        cdef int w
        cdef long long setflat, base, f
        if self.skews > 1:
            s = <int>sm_bounded(&self.st_skew, <u64>self.skews)
        setflat = <long long>s * self.sets + <long long>((packed >> (16 * s)) & 0xFFFF)
        base = setflat * self.tag_ways
        skew_used[0] = s
        set_used[0] = <long long>((packed >> (16 * s)) & 0xFFFF)
        for w in range(self.tag_ways):
            f = base + w
            if not self.tag_valid[f]:
                self._write_tag(f, line, domain)
                self._install_state(base, setflat, w)
                self.n_setfill += 1
                self.occupied += 1
                return OUT_SETFILL
        w = self._victim_way(base, setflat)
        f = base + w
        vdom[0] = self.tag_domain[f]
        vline[0] = self.tag_line[f]
        self.dom_count[vdom[0]] -= 1
        self._write_tag(f, line, domain)
        self._install_state(base, setflat, w)
        self.n_sae += 1
        return OUT_SAE

    cdef int _install_mirage(self, u64 line, int domain, u64 packed,
                             int *vdom, u64 *vline,
                             int *skew_used, long long *set_used):
        cdef int sets = self.sets
        cdef int tw = self.tag_ways
        cdef int s, w, way, n, k, best, best_n, tied
        cdef long long setflat, base, f, d, vf

        best = -1
        best_n = -1
        tied = 0
        for s in range(self.skews):
            base = (<long long>s * sets + <long long>((packed >> (16 * s)) & 0xFFFF)) * tw
            n = 0
            for w in range(tw):
                if not self.tag_valid[base + w]:
                    n += 1
            if n > best_n:
                best = s
                best_n = n
                tied = 1
            elif n == best_n:
                tied += 1

        if best_n == 0:
            s = <int>sm_bounded(&self.st_skew, <u64>self.skews)
            setflat = <long long>s * sets + <long long>((packed >> (16 * s)) & 0xFFFF)
            base = setflat * tw
            skew_used[0] = s
            set_used[0] = <long long>((packed >> (16 * s)) & 0xFFFF)
            w = self._victim_way(base, setflat)
            f = base + w
            vdom[0] = self.tag_domain[f]
            vline[0] = self.tag_line[f]
            d = self.tag_data[f]
            self.dom_count[vdom[0]] -= 1
            self._write_tag(f, line, domain)
            self.tag_data[f] = d
            self.data_tag[d] = f
            self._install_state(base, setflat, w)
            self.n_sae += 1
            return OUT_SAE

        if tied > 1:
            k = <int>sm_bounded(&self.st_skew, <u64>tied)
            for s in range(self.skews):
                base = (<long long>s * sets + <long long>((packed >> (16 * s)) & 0xFFFF)) * tw
                n = 0
                for w in range(tw):
                    if not self.tag_valid[base + w]:
                        n += 1
                if n == best_n:
                    if k == 0:
                        best = s
                        break
                    k -= 1

        setflat = <long long>best * sets + <long long>((packed >> (16 * best)) & 0xFFFF)
        base = setflat * tw
        skew_used[0] = best
        set_used[0] = <long long>((packed >> (16 * best)) & 0xFFFF)
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
            return OUT_COLDFILL

        d = <long long>sm_bounded(&self.st_gle, <u64>self.capacity)
        vf = self.data_tag[d]
        vdom[0] = self.tag_domain[vf]
        vline[0] = self.tag_line[vf]
        self.tag_valid[vf] = 0
        self.tag_data[vf] = -1
        self.dom_count[vdom[0]] -= 1
        self._write_tag(f, line, domain)
        self.tag_data[f] = d
        self.data_tag[d] = f
        self._install_state(base, setflat, way)
        self.n_gle += 1
        return OUT_GLE

    # -- public API ------------------------------------------------------------------

    def access(self, line, domain, use_memo=True):
        cdef int vdom = NO_VICTIM
        cdef u64 vline = 0
        cdef int skew = 0
        cdef long long setidx = 0
        cdef int out = self._access(<u64>line, <int>domain, bool(use_memo),
                                    &vdom, &vline, &skew, &setidx)
        return out, vdom, vline, skew, setidx

    def access_batch(self, lines, domains):
        cdef u64[::1] lv = np.ascontiguousarray(lines, dtype=np.uint64)
        cdef u8[::1] dv = np.ascontiguousarray(domains, dtype=np.uint8)
        cdef Py_ssize_t n = lv.shape[0]
        outcomes = np.empty(n, dtype=np.uint8)
        vdoms = np.empty(n, dtype=np.uint8)
        vlines = np.empty(n, dtype=np.uint64)
        cdef u8[::1] ov = outcomes
        cdef u8[::1] vdv = vdoms
        cdef u64[::1] vlv = vlines
        cdef Py_ssize_t i
        cdef int vdom, skew
        cdef u64 vline
        cdef long long setidx
        for i in range(n):
            ov[i] = <u8>self._access(lv[i], dv[i], True, &vdom, &vline, &skew, &setidx)
            vdv[i] = <u8>vdom
            vlv[i] = vline
        return outcomes, vdoms, vlines

    def spurious_prefill(self):
        cdef long long done = 0
        cdef long long budget = 16 * self.capacity
        cdef u64 line
        cdef int dom, vdom, skew
        cdef u64 vline
        cdef long long setidx
        while self.occupied < self.capacity and done < budget:
            line = PREFILL_LINE_BASE | (sm_next(&self.st_prefill) & (PREFILL_LINE_BASE - 1))
            dom = PREFILL_DOMAIN_BASE + <int>(done & 15)
            self._access(line, dom, False, &vdom, &vline, &skew, &setidx)
            done += 1
        return done

    def flush_all(self):
        np.asarray(self.a_tag_line)[:] = 0
        np.asarray(self.a_tag_domain)[:] = 0
        np.asarray(self.a_tag_valid)[:] = 0
        np.asarray(self.a_stamps)[:] = 0
        np.asarray(self.a_rrpv)[:] = 0
        np.asarray(self.a_plru)[:] = 0
        np.asarray(self.a_dom_count)[:] = 0
        if self.design == D_MIRAGE:
            np.asarray(self.a_tag_data)[:] = -1
            np.asarray(self.a_data_tag)[:] = -1
        self.next_free = 0
        self.occupied = 0
        self._memo_init(1 << 16)
        self.reset_stats()

    def occupancy_of(self, domain):
        return int(self.dom_count[<int>domain])

    def occupancy_total(self):
        return int(self.occupied)

    def stats(self):
        dm = np.asarray(self.a_dom_miss)
        return {"accesses": int(self.accesses), "hits": int(self.hits),
                "misses": int(self.misses), "setfill": int(self.n_setfill),
                "sae": int(self.n_sae), "gle": int(self.n_gle),
                "coldfill": int(self.n_coldfill),
                "per_domain_misses": {int(d): int(dm[d]) for d in np.nonzero(dm)[0]}}

    def reset_stats(self):
        self.accesses = self.hits = self.misses = 0
        self.n_setfill = self.n_sae = self.n_gle = self.n_coldfill = 0
        np.asarray(self.a_dom_miss)[:] = 0

    def snapshot(self):
        return {
            "tag_line": np.asarray(self.a_tag_line).copy(),
            "tag_domain": np.asarray(self.a_tag_domain).copy(),
            "tag_valid": np.asarray(self.a_tag_valid).copy(),
            "stamps": np.asarray(self.a_stamps).copy(),
            "rrpv": np.asarray(self.a_rrpv).copy(),
            "plru_bits": np.asarray(self.a_plru).copy(),
            "dom_count": np.asarray(self.a_dom_count).copy(),
            "dom_miss": np.asarray(self.a_dom_miss).copy(),
            "tag_data": np.asarray(self.a_tag_data).copy(),
            "data_tag": np.asarray(self.a_data_tag).copy(),
            "occupied": int(self.occupied),
            "next_free": int(self.next_free),
            "memo": (np.asarray(self.a_mkeys).copy(), np.asarray(self.a_mvals).copy(),
                     np.asarray(self.a_mused).copy(), int(self.msize), int(self.mcap)),
            "stats": self.stats(),
        }

    def restore(self, snap):
        np.asarray(self.a_tag_line)[:] = snap["tag_line"]
        np.asarray(self.a_tag_domain)[:] = snap["tag_domain"]
        np.asarray(self.a_tag_valid)[:] = snap["tag_valid"]
        np.asarray(self.a_stamps)[:] = snap["stamps"]
        np.asarray(self.a_rrpv)[:] = snap["rrpv"]
        np.asarray(self.a_plru)[:] = snap["plru_bits"]
        np.asarray(self.a_dom_count)[:] = snap["dom_count"]
        np.asarray(self.a_dom_miss)[:] = snap["dom_miss"]
        if self.design == D_MIRAGE:
            np.asarray(self.a_tag_data)[:] = snap["tag_data"]
            np.asarray(self.a_data_tag)[:] = snap["data_tag"]
        self.occupied = snap["occupied"]
        self.next_free = snap["next_free"]
        mk, mv, mu, msize, mcap = snap["memo"]
        self.a_mkeys = mk.copy()
        self.a_mvals = mv.copy()
        self.a_mused = mu.copy()
        self.mkeys = self.a_mkeys
        self.mvals = self.a_mvals
        self.mused = self.a_mused
        self.msize = msize
        self.mcap = mcap
        s = snap["stats"]
        self.accesses = s["accesses"]
        self.hits = s["hits"]
        self.misses = s["misses"]
        self.n_setfill = s["setfill"]
        self.n_sae = s["sae"]
        self.n_gle = s["gle"]
        self.n_coldfill = s["coldfill"]
