"""Occupancy covert channel: prime, modulate, probe.

Protocol per trial, strict phase order (no timing model):

1. receiver installs ``occupancy_lines`` strided addresses (domain 0),
2. sender performs ``x`` (bit 0) or ``y`` (bit 1) strided accesses from a
   disjoint region (domain 1),
3. receiver re-accesses its addresses; its miss count is the signal.

Caches start each trial flushed; MIRAGE is additionally prefilled with
spurious lines so its global-eviction path is active (an empty MIRAGE
would absorb every install into free data entries and no design leaks
from an empty cache). The set-associative designs are measured from
empty, where a victim's lines can only die by set conflict.

The sender/receiver stride is 64,000 bytes (1,000 lines). A stride that
is not a multiple of the line size smears addresses over sets at a
fractional rate, which makes the Baseline channel open far earlier than
the published onset; 1,000-line striding reproduces it. Receiver, sender
and noise regions are disjoint and each trial shifts its bases, so trials
are independent experiments over the same keys.

Byte-wise variant (3-bit symbols): the sender encodes a value v in
[0, 8) as 1000*(v+1) accesses; the receiver decodes by nearest mean
against calibration templates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .cachecore import Cache, build_cache
from .config import CacheConfig, default_config
from .stats import welch_t

RECEIVER_DOMAIN = 0
SENDER_DOMAIN = 1
NOISE_DOMAIN = 2

# byte addresses; regions stay disjoint for every trial/occupancy in range
RECEIVER_BASE = 1 << 36
SENDER_BASE = 1 << 37
NOISE_BASE = 1 << 38
TRIAL_SHIFT = 1 << 26

DEFAULT_STRIDE = 64_000
DETECT_ALPHA = 0.01


@dataclass
class ChannelParams:
    occupancy_lines: int
    x: int = 1000
    y: int = 2000
    stride_bytes: int = DEFAULT_STRIDE
    trials: int = 100

    def __post_init__(self):
        if self.occupancy_lines < 0:
            raise ValueError("occupancy_lines must be >= 0")
        if not 0 <= self.x < self.y:
            raise ValueError("need 0 <= x < y")
        if self.stride_bytes < 128:
            raise ValueError("stride must exceed the cache line")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class ChannelTrialResult:
    bit_sent: int
    receiver_misses: int
    sender_evictions_of_receiver: int


def channel_cache(design: str, llc_bytes: int = 16 * 1024 * 1024,
                  seed: int = 0, policy: str = "random") -> Cache:
    """Cache configured the way the channel experiments expect.

    MIRAGE uses the whole-cache ways reading here (131,072 data entries at
    16 MB), the geometry whose global-eviction rate matches the published
    channel numbers.
    """
    over = {"llc_bytes": llc_bytes, "seed": seed, "policy": policy}
    if design == "mirage":
        over["mirage_ways_scope"] = "cache"
    return build_cache(default_config(design, **over))


def _strided(base: int, count: int, stride: int, trial: int) -> np.ndarray:
    start = base + trial * TRIAL_SHIFT
    return (start + stride * np.arange(count, dtype=np.uint64)).astype(np.uint64)


def run_bit_trial(cache: Cache, params: ChannelParams, bit: int,
                  trial: int = 0) -> ChannelTrialResult:
    """One prime-modulate-probe round. ``trial`` shifts the address
    regions and thereby acts as the per-trial seed."""
    if bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    occ = params.occupancy_lines
    if occ > cache.capacity:
        raise ValueError(f"occupancy {occ} exceeds data capacity {cache.capacity}")

    recv = _strided(RECEIVER_BASE, occ, params.stride_bytes, trial)
    send = _strided(SENDER_BASE, params.y if bit else params.x,
                    params.stride_bytes, trial)

    cache.flush_all()
    if cache.cfg.design == "mirage":
        cache.spurious_prefill()
    if occ:
        cache.access_batch(recv, RECEIVER_DOMAIN)

    evictions = 0
    if len(send):
        _, vdoms, _ = cache.access_batch(send, SENDER_DOMAIN)
        evictions = int(np.count_nonzero(vdoms == RECEIVER_DOMAIN))

    cache.reset_stats()
    if occ:
        cache.access_batch(recv, RECEIVER_DOMAIN)
    misses = cache.stats().misses
    return ChannelTrialResult(bit, misses, evictions)


def run_channel_trials(cache: Cache, params: ChannelParams) -> list[ChannelTrialResult]:
    """``trials`` rounds per bit value, interleaved, each on fresh regions."""
    out = []
    for t in range(params.trials):
        out.append(run_bit_trial(cache, params, 0, trial=2 * t))
        out.append(run_bit_trial(cache, params, 1, trial=2 * t + 1))
    return out


def sweep_occupancy(designs, occupancies, trials: int = 100,
                    llc_bytes: int = 16 * 1024 * 1024, seed: int = 0,
                    policy: str = "random",
                    stride_bytes: int = DEFAULT_STRIDE) -> list[dict]:
    """Distinguishability table over an occupancy grid.

    One row per (design, occupancy): mean receiver misses per bit and the
    Welch p-value between the two miss samples.
    """
    rows = []
    for design in designs:
        cache = channel_cache(design, llc_bytes=llc_bytes, seed=seed, policy=policy)
        for occ in occupancies:
            params = ChannelParams(occupancy_lines=occ, trials=trials,
                                   stride_bytes=stride_bytes)
            results = run_channel_trials(cache, params)
            m0 = [r.receiver_misses for r in results if r.bit_sent == 0]
            m1 = [r.receiver_misses for r in results if r.bit_sent == 1]
            rows.append({
                "design": design,
                "occupancy": occ,
                "mean0": float(np.mean(m0)),
                "mean1": float(np.mean(m1)),
                "p_value": welch_t(m0, m1),
            })
    return rows


def first_detect(rows, design: str, alpha: float = DETECT_ALPHA):
    """Smallest swept occupancy where the bit distributions separate,
    or None if they never do."""
    hits = [r["occupancy"] for r in rows
            if r["design"] == design and r["p_value"] < alpha]
    return min(hits) if hits else None


# -- byte-wise channel (3-bit symbols) -----------------------------------------

SYMBOLS = 8
SYMBOL_STEP = 1000


class ByteChannel:
    """Calibrated multi-level occupancy channel carrying values in [0, 8).

    The sender encodes v as 1000*(v+1) accesses; receiver miss counts grow
    with sender activity, so nearest-template-mean decoding recovers v.
    ``noise`` additional accesses from an uninvolved third domain are
    injected between the sender and the probe each round.
    """

    def __init__(self, cache: Cache, occupancy_lines: int, noise: int = 0,
                 stride_bytes: int = DEFAULT_STRIDE):
        if occupancy_lines <= 0 or occupancy_lines > cache.capacity:
            raise ValueError("occupancy outside (0, capacity]")
        if noise < 0:
            raise ValueError("noise must be >= 0")
        self.cache = cache
        self.occupancy_lines = occupancy_lines
        self.noise = noise
        self.stride_bytes = stride_bytes
        self.templates: np.ndarray | None = None
        self._trial = 0
        self._noise_rng = rng.generator(cache.cfg.seed, "channel-noise")

    def _measure(self, sender_accesses: int) -> int:
        cache = self.cache
        trial = self._trial
        self._trial += 1
        recv = _strided(RECEIVER_BASE, self.occupancy_lines, self.stride_bytes, trial)

        cache.flush_all()
        if cache.cfg.design == "mirage":
            cache.spurious_prefill()
        cache.access_batch(recv, RECEIVER_DOMAIN)
        if sender_accesses:
            send = _strided(SENDER_BASE, sender_accesses, self.stride_bytes, trial)
            cache.access_batch(send, SENDER_DOMAIN)
        if self.noise:
            lines = self._noise_rng.integers(0, 1 << 24, self.noise, dtype=np.uint64)
            cache.access_batch(NOISE_BASE + lines * np.uint64(64), NOISE_DOMAIN)
        cache.reset_stats()
        cache.access_batch(recv, RECEIVER_DOMAIN)
        return cache.stats().misses

    def calibrate(self, reps: int = 4) -> np.ndarray:
        """Per-value mean miss templates; also stored on the channel."""
        if reps < 1:
            raise ValueError("reps must be >= 1")
        means = np.empty(SYMBOLS)
        for v in range(SYMBOLS):
            means[v] = np.mean([self._measure(SYMBOL_STEP * (v + 1))
                                for _ in range(reps)])
        self.templates = means
        return means

    def send(self, value: int) -> int:
        """Transmit one value and return the receiver's decode."""
        if not 0 <= value < SYMBOLS:
            raise ValueError(f"value must be in [0, {SYMBOLS})")
        if self.templates is None:
            raise RuntimeError("calibrate() before send()")
        misses = self._measure(SYMBOL_STEP * (value + 1))
        return int(np.argmin(np.abs(self.templates - misses)))


def run_byte_channel(cache: Cache, occupancy_lines: int, values,
                     noise: int = 0, calibration_reps: int = 4) -> dict:
    """Calibrate, transmit ``values``, report decodes and the error rate."""
    chan = ByteChannel(cache, occupancy_lines, noise=noise)
    chan.calibrate(calibration_reps)
    decoded = [chan.send(int(v)) for v in values]
    wrong = sum(d != int(v) for d, v in zip(decoded, values))
    return {
        "decoded": decoded,
        "errors": wrong,
        "error_rate": wrong / len(decoded) if decoded else 0.0,
        "templates": chan.templates.tolist(),
    }
