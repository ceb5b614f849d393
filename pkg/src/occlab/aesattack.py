"""Last-round AES key recovery through LLC occupancy.

The victim runs a T-table AES-128 whose table loads are routed through
the shared cache. The attacker never sees addresses: per encryption it
holds a fixed occupancy, lets one encryption run, and re-probes its own
lines, recording the miss count as a scalar probe cost. Profiling the
costs per InvSBox(C xor guess) label and correlating against a
known-key profile ranks each key byte; guessing entropy summarizes the
remaining search effort, and a rank-ordered brute force finishes the job
when the residual space is small.
"""

import csv
import heapq
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import rng
from .cachecore import Cache
from .occchannel import channel_cache
from .stats import pearson

AES_ATTACKER_DOMAIN = 0
AES_VICTIM_DOMAIN = 1

AES_ATTACKER_BASE = 1 << 36
# Five line-aligned 1 KB tables: Te0..Te3 for rounds 1-9 and the
# final-round table. 16 entries of 4 bytes per line, so the cache sees
# index >> 4 of every lookup.
TABLE_BASE = 1 << 35
TABLE_BYTES = 1024

NULL_GE = 104.95  # 16 * E[log2 R], R uniform on 1..256

SBOX = (
    0x63, 0x7C, 0x77, 0x7B, 0xF2, 0x6B, 0x6F, 0xC5,
    0x30, 0x01, 0x67, 0x2B, 0xFE, 0xD7, 0xAB, 0x76,
    0xCA, 0x82, 0xC9, 0x7D, 0xFA, 0x59, 0x47, 0xF0,
    0xAD, 0xD4, 0xA2, 0xAF, 0x9C, 0xA4, 0x72, 0xC0,
    0xB7, 0xFD, 0x93, 0x26, 0x36, 0x3F, 0xF7, 0xCC,
    0x34, 0xA5, 0xE5, 0xF1, 0x71, 0xD8, 0x31, 0x15,
    0x04, 0xC7, 0x23, 0xC3, 0x18, 0x96, 0x05, 0x9A,
    0x07, 0x12, 0x80, 0xE2, 0xEB, 0x27, 0xB2, 0x75,
    0x09, 0x83, 0x2C, 0x1A, 0x1B, 0x6E, 0x5A, 0xA0,
    0x52, 0x3B, 0xD6, 0xB3, 0x29, 0xE3, 0x2F, 0x84,
    0x53, 0xD1, 0x00, 0xED, 0x20, 0xFC, 0xB1, 0x5B,
    0x6A, 0xCB, 0xBE, 0x39, 0x4A, 0x4C, 0x58, 0xCF,
    0xD0, 0xEF, 0xAA, 0xFB, 0x43, 0x4D, 0x33, 0x85,
    0x45, 0xF9, 0x02, 0x7F, 0x50, 0x3C, 0x9F, 0xA8,
    0x51, 0xA3, 0x40, 0x8F, 0x92, 0x9D, 0x38, 0xF5,
    0xBC, 0xB6, 0xDA, 0x21, 0x10, 0xFF, 0xF3, 0xD2,
    0xCD, 0x0C, 0x13, 0xEC, 0x5F, 0x97, 0x44, 0x17,
    0xC4, 0xA7, 0x7E, 0x3D, 0x64, 0x5D, 0x19, 0x73,
    0x60, 0x81, 0x4F, 0xDC, 0x22, 0x2A, 0x90, 0x88,
    0x46, 0xEE, 0xB8, 0x14, 0xDE, 0x5E, 0x0B, 0xDB,
    0xE0, 0x32, 0x3A, 0x0A, 0x49, 0x06, 0x24, 0x5C,
    0xC2, 0xD3, 0xAC, 0x62, 0x91, 0x95, 0xE4, 0x79,
    0xE7, 0xC8, 0x37, 0x6D, 0x8D, 0xD5, 0x4E, 0xA9,
    0x6C, 0x56, 0xF4, 0xEA, 0x65, 0x7A, 0xAE, 0x08,
    0xBA, 0x78, 0x25, 0x2E, 0x1C, 0xA6, 0xB4, 0xC6,
    0xE8, 0xDD, 0x74, 0x1F, 0x4B, 0xBD, 0x8B, 0x8A,
    0x70, 0x3E, 0xB5, 0x66, 0x48, 0x03, 0xF6, 0x0E,
    0x61, 0x35, 0x57, 0xB9, 0x86, 0xC1, 0x1D, 0x9E,
    0xE1, 0xF8, 0x98, 0x11, 0x69, 0xD9, 0x8E, 0x94,
    0x9B, 0x1E, 0x87, 0xE9, 0xCE, 0x55, 0x28, 0xDF,
    0x8C, 0xA1, 0x89, 0x0D, 0xBF, 0xE6, 0x42, 0x68,
    0x41, 0x99, 0x2D, 0x0F, 0xB0, 0x54, 0xBB, 0x16,
)

INV_SBOX = tuple(SBOX.index(v) for v in range(256))
_INV_SBOX_ARR = np.array(INV_SBOX, dtype=np.uint8)

RCON = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)


def _build_tables():
    te0, te1, te2, te3, last = [], [], [], [], []
    for x in range(256):
        s = SBOX[x]
        s2 = ((s << 1) ^ 0x1B) & 0xFF if s & 0x80 else s << 1
        s3 = s2 ^ s
        te0.append((s2 << 24) | (s << 16) | (s << 8) | s3)
        te1.append((s3 << 24) | (s2 << 16) | (s << 8) | s)
        te2.append((s << 24) | (s3 << 16) | (s2 << 8) | s)
        te3.append((s << 24) | (s << 16) | (s3 << 8) | s2)
        last.append((s << 24) | (s << 16) | (s << 8) | s)
    return tuple(map(tuple, (te0, te1, te2, te3, last)))


TE0, TE1, TE2, TE3, TE_LAST = _build_tables()
_TABLES = (TE0, TE1, TE2, TE3, TE_LAST)


@lru_cache(maxsize=16)
def _key_schedule(key: bytes) -> tuple:
    if len(key) != 16:
        raise ValueError("AES-128 key must be 16 bytes")
    words = [int.from_bytes(key[4 * i:4 * i + 4], "big") for i in range(4)]
    for r in range(10):
        t = words[-1]
        t = ((SBOX[(t >> 16) & 0xFF] << 24) | (SBOX[(t >> 8) & 0xFF] << 16)
             | (SBOX[t & 0xFF] << 8) | SBOX[(t >> 24) & 0xFF])
        t ^= RCON[r] << 24
        for i in range(4):
            t ^= words[-4]
            words.append(t)
            t = words[-1]
    return tuple(words[:44])


def aes128_encrypt_traced(plaintext: bytes, key: bytes,
                          cache: Cache | None = None,
                          domain: int = AES_VICTIM_DOMAIN) -> bytes:
    """AES-128 encrypt one block; optionally replay table loads into a cache.

    Each of the 160 T-table lookups issues one Load at the table entry's
    byte address, in lookup order. The cache is observational only: the
    ciphertext is the same with or without it.
    """
    if len(plaintext) != 16:
        raise ValueError("plaintext must be 16 bytes")
    rk = _key_schedule(key)
    touched = []

    def lut(table: int, idx: int) -> int:
        touched.append(TABLE_BASE + table * TABLE_BYTES + 4 * idx)
        return _TABLES[table][idx]

    s0 = int.from_bytes(plaintext[0:4], "big") ^ rk[0]
    s1 = int.from_bytes(plaintext[4:8], "big") ^ rk[1]
    s2 = int.from_bytes(plaintext[8:12], "big") ^ rk[2]
    s3 = int.from_bytes(plaintext[12:16], "big") ^ rk[3]
    for r in range(1, 10):
        t0 = (lut(0, s0 >> 24) ^ lut(1, (s1 >> 16) & 0xFF)
              ^ lut(2, (s2 >> 8) & 0xFF) ^ lut(3, s3 & 0xFF) ^ rk[4 * r])
        t1 = (lut(0, s1 >> 24) ^ lut(1, (s2 >> 16) & 0xFF)
              ^ lut(2, (s3 >> 8) & 0xFF) ^ lut(3, s0 & 0xFF) ^ rk[4 * r + 1])
        t2 = (lut(0, s2 >> 24) ^ lut(1, (s3 >> 16) & 0xFF)
              ^ lut(2, (s0 >> 8) & 0xFF) ^ lut(3, s1 & 0xFF) ^ rk[4 * r + 2])
        t3 = (lut(0, s3 >> 24) ^ lut(1, (s0 >> 16) & 0xFF)
              ^ lut(2, (s1 >> 8) & 0xFF) ^ lut(3, s2 & 0xFF) ^ rk[4 * r + 3])
        s0, s1, s2, s3 = t0, t1, t2, t3
    c0 = ((lut(4, s0 >> 24) & 0xFF000000) ^ (lut(4, (s1 >> 16) & 0xFF) & 0x00FF0000)
          ^ (lut(4, (s2 >> 8) & 0xFF) & 0x0000FF00) ^ (lut(4, s3 & 0xFF) & 0x000000FF)
          ^ rk[40])
    c1 = ((lut(4, s1 >> 24) & 0xFF000000) ^ (lut(4, (s2 >> 16) & 0xFF) & 0x00FF0000)
          ^ (lut(4, (s3 >> 8) & 0xFF) & 0x0000FF00) ^ (lut(4, s0 & 0xFF) & 0x000000FF)
          ^ rk[41])
    c2 = ((lut(4, s2 >> 24) & 0xFF000000) ^ (lut(4, (s3 >> 16) & 0xFF) & 0x00FF0000)
          ^ (lut(4, (s0 >> 8) & 0xFF) & 0x0000FF00) ^ (lut(4, s1 & 0xFF) & 0x000000FF)
          ^ rk[42])
    c3 = ((lut(4, s3 >> 24) & 0xFF000000) ^ (lut(4, (s0 >> 16) & 0xFF) & 0x00FF0000)
          ^ (lut(4, (s1 >> 8) & 0xFF) & 0x0000FF00) ^ (lut(4, s2 & 0xFF) & 0x000000FF)
          ^ rk[43])
    if cache is not None:
        cache.access_batch(np.array(touched, dtype=np.uint64), domain)
    return b"".join(w.to_bytes(4, "big") for w in (c0, c1, c2, c3))


@dataclass(frozen=True)
class ObservationTuple:
    plaintext: bytes
    ciphertext: bytes
    probe_cost: int


def _install_attacker(cache: Cache, occupancy_pct: int) -> np.ndarray:
    if not 0 < occupancy_pct < 100:
        raise ValueError("occupancy_pct must be in (0, 100)")
    occ = cache.capacity * occupancy_pct // 100
    lines = (AES_ATTACKER_BASE >> 6) + np.arange(occ, dtype=np.uint64)
    cache.access_lines(lines, AES_ATTACKER_DOMAIN)
    return lines


def collect_observation(cache: Cache, victim_key: bytes, occupancy_pct: int,
                        seed: int) -> ObservationTuple:
    """One prime / encrypt / probe round from a freshly prepared cache."""
    gen = rng.generator(seed, "aes-plaintext")
    cache.flush_all()
    cache.spurious_prefill()
    lines = _install_attacker(cache, occupancy_pct)
    plaintext = gen.integers(0, 256, 16, dtype=np.uint8).tobytes()
    ciphertext = aes128_encrypt_traced(plaintext, victim_key, cache)
    cache.reset_stats()
    cache.access_lines(lines, AES_ATTACKER_DOMAIN)
    return ObservationTuple(plaintext, ciphertext,
                            int(cache.stats().misses))


class _ObservationRig:
    """Amortizes the prefill: snapshot once, restore per encryption."""

    def __init__(self, design: str, occupancy_pct: int, llc_bytes: int,
                 seed: int, policy: str = "random"):
        self.cache = channel_cache(design, llc_bytes=llc_bytes, seed=seed,
                                   policy=policy)
        self.cache.ensure_domain(AES_VICTIM_DOMAIN)
        self.cache.flush_all()
        self.cache.spurious_prefill()
        self.lines = _install_attacker(self.cache, occupancy_pct)
        self._snap = self.cache.snapshot()

    def observe(self, plaintext: bytes, victim_key: bytes) -> ObservationTuple:
        self.cache.restore(self._snap)
        ciphertext = aes128_encrypt_traced(plaintext, victim_key, self.cache)
        self.cache.reset_stats()
        self.cache.access_lines(self.lines, AES_ATTACKER_DOMAIN)
        return ObservationTuple(plaintext, ciphertext,
                                int(self.cache.stats().misses))


def collect_observations(design: str, victim_key: bytes, n: int,
                         occupancy_pct: int = 50,
                         llc_bytes: int = 1024 * 1024, seed: int = 0,
                         policy: str = "random", pt_stream: int = 0) -> list:
    """n observations against one fixed cache (seed pins its index keys).

    The profiling phase must run on the same machine as the attack, so
    callers reuse ``seed`` across runs and vary ``pt_stream`` to draw
    fresh plaintexts.
    """
    rig = _ObservationRig(design, occupancy_pct, llc_bytes, seed, policy)
    gen = rng.generator(seed, "aes-plaintext", index=pt_stream)
    out = []
    for _ in range(n):
        pt = gen.integers(0, 256, 16, dtype=np.uint8).tobytes()
        out.append(rig.observe(pt, victim_key))
    return out


@dataclass
class ProfileTable:
    """Per-label probe-cost accumulators; axes end in (..., label)."""
    sums: np.ndarray
    counts: np.ndarray

    def means(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.counts > 0, self.sums
                            / np.maximum(self.counts, 1), np.nan)


def _obs_arrays(observations):
    cts = np.frombuffer(b"".join(o.ciphertext for o in observations),
                        dtype=np.uint8).reshape(-1, 16)
    costs = np.array([o.probe_cost for o in observations], dtype=np.float64)
    return cts, costs


def build_known_profile(observations, known_key: bytes) -> ProfileTable:
    """Accumulate costs under the true last-round state labels."""
    cts, costs = _obs_arrays(observations)
    key = np.frombuffer(known_key, dtype=np.uint8)
    labels = _INV_SBOX_ARR[cts ^ key[None, :]]
    sums = np.zeros((16, 256))
    counts = np.zeros((16, 256), dtype=np.int64)
    for i in range(16):
        sums[i] = np.bincount(labels[:, i], weights=costs, minlength=256)
        counts[i] = np.bincount(labels[:, i], minlength=256)
    return ProfileTable(sums, counts)


def build_guess_profiles(observations) -> ProfileTable:
    """Accumulate costs under every candidate key byte: axes (i, guess, label)."""
    cts, costs = _obs_arrays(observations)
    sums = np.zeros((16, 256, 256))
    counts = np.zeros((16, 256, 256), dtype=np.int64)
    for i in range(16):
        column = cts[:, i]
        for guess in range(256):
            labels = _INV_SBOX_ARR[column ^ guess]
            sums[i, guess] = np.bincount(labels, weights=costs,
                                         minlength=256)
            counts[i, guess] = np.bincount(labels, minlength=256)
    return ProfileTable(sums, counts)


@dataclass
class RankReport:
    ranks: list
    ge: float


def rank_and_ge(guess_profiles: ProfileTable, known_profile: ProfileTable,
                true_key: bytes) -> RankReport:
    """Correlation-rank every guess against the known-key profile.

    A guess whose label set shares fewer than two entries with the known
    profile has no defined correlation and is pinned to rank 256.
    """
    known_means = known_profile.means()
    guess_means = guess_profiles.means()
    ranks = []
    for i in range(16):
        star = known_means[i]
        star_mask = known_profile.counts[i] > 0
        corrs = np.full(256, -np.inf)
        for guess in range(256):
            shared = star_mask & (guess_profiles.counts[i, guess] > 0)
            if shared.sum() < 2:
                continue
            corrs[guess] = pearson(star[shared],
                                   guess_means[i, guess][shared])
        if corrs[true_key[i]] == -np.inf:
            ranks.append(256)
            continue
        order = np.lexsort((np.arange(256), -corrs))
        ranks.append(int(np.nonzero(order == true_key[i])[0][0]) + 1)
    return RankReport(ranks=ranks, ge=float(np.sum(np.log2(ranks))))


@dataclass
class BruteForceResult:
    key: bytes | None
    trials: int
    exhausted: bool


def brute_force_finish(candidates, known_pair, budget: int) -> BruteForceResult:
    """Walk key combinations in nondecreasing total-rank order.

    candidates: 16 lists of byte values, best guess first. Each candidate
    key costs one encryption against the known (plaintext, ciphertext)
    pair; the search stops at a match or after ``budget`` trials.
    """
    if len(candidates) != 16 or any(not c for c in candidates):
        raise ValueError("need a non-empty candidate list per key byte")
    plaintext, ciphertext = known_pair
    heap = [(0, (0,) * 16)]
    seen = {(0,) * 16}
    trials = 0
    while heap and trials < budget:
        _, idx = heapq.heappop(heap)
        key = bytes(candidates[i][idx[i]] for i in range(16))
        trials += 1
        if aes128_encrypt_traced(plaintext, key) == ciphertext:
            return BruteForceResult(key=key, trials=trials, exhausted=False)
        for i in range(16):
            if idx[i] + 1 < len(candidates[i]):
                nxt = idx[:i] + (idx[i] + 1,) + idx[i + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (sum(nxt), nxt))
    return BruteForceResult(key=None, trials=trials, exhausted=True)


def ge_experiment(design: str, occupancy_pct: int = 50, n_obs: int = 20_000,
                  llc_bytes: int = 1024 * 1024, seed: int = 0,
                  policy: str = "random") -> dict:
    """Full pipeline: collect, profile, rank. Returns a JSON-ready report."""
    victim_key = rng.generator(seed, "aes-victim-key").integers(
        0, 256, 16, dtype=np.uint8).tobytes()
    known_key = rng.generator(seed, "aes-known-key").integers(
        0, 256, 16, dtype=np.uint8).tobytes()
    attack_obs = collect_observations(design, victim_key, n_obs,
                                      occupancy_pct, llc_bytes, seed,
                                      policy, pt_stream=0)
    known_obs = collect_observations(design, known_key, n_obs,
                                     occupancy_pct, llc_bytes, seed,
                                     policy, pt_stream=1)
    report = rank_and_ge(build_guess_profiles(attack_obs),
                         build_known_profile(known_obs, known_key),
                         victim_key)
    return {
        "design": design,
        "occupancy_pct": occupancy_pct,
        "observations": n_obs,
        "llc_bytes": llc_bytes,
        "seed": seed,
        "ranks": report.ranks,
        "ge": report.ge,
    }


def null_ge_calibration(reps: int = 50, n_obs: int = 500,
                        seed: int = 0) -> np.ndarray:
    """GE distribution when probe costs carry no signal at all."""
    ges = np.empty(reps)
    for r in range(reps):
        gen = rng.generator(seed, "aes-null", index=r)
        victim_key = gen.integers(0, 256, 16, dtype=np.uint8).tobytes()
        known_key = gen.integers(0, 256, 16, dtype=np.uint8).tobytes()

        def noise_obs(key):
            out = []
            for _ in range(n_obs):
                pt = gen.integers(0, 256, 16, dtype=np.uint8).tobytes()
                out.append(ObservationTuple(
                    pt, aes128_encrypt_traced(pt, key),
                    int(gen.integers(0, 1000))))
            return out

        report = rank_and_ge(build_guess_profiles(noise_obs(victim_key)),
                             build_known_profile(noise_obs(known_key),
                                                 known_key),
                             victim_key)
        ges[r] = report.ge
    return ges


def save_observations(path, observations) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["plaintext", "ciphertext", "probe_cost"])
        for o in observations:
            writer.writerow([o.plaintext.hex(), o.ciphertext.hex(),
                             o.probe_cost])


def load_observations(path) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["plaintext", "ciphertext", "probe_cost"]:
            raise ValueError("not an observation log: bad header")
        for row in reader:
            out.append(ObservationTuple(bytes.fromhex(row[0]),
                                        bytes.fromhex(row[1]),
                                        int(row[2])))
    if not out:
        raise ValueError("observation log is empty")
    return out
