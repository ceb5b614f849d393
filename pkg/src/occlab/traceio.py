"""Access-trace file handling and trace replay.

Trace files are line oriented text:

    # comment
    L 1a2b40            load, byte address (hex), domain 1 implied
    S 0x7fff00 D3       store, explicit domain

Kind is L or S, the address is hex with or without the 0x prefix, and the
optional third field D<n> names the security domain (default 1, so plain
traces replay as a single non-attacker process). ``#`` starts a comment,
whole-line or trailing; blank lines are skipped. Anything else is a parse
error that names the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cachecore import MAX_ADDRESS, Cache, CacheStats

DEFAULT_DOMAIN = 1


@dataclass
class Trace:
    kinds: np.ndarray    # uint8, 0 = load, 1 = store
    addrs: np.ndarray    # uint64 byte addresses
    domains: np.ndarray  # uint8

    def __len__(self) -> int:
        return len(self.addrs)


def _parse_line(text: str, lineno: int) -> tuple[int, int, int] | None:
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    parts = body.split()
    if len(parts) not in (2, 3) or parts[0] not in ("L", "S"):
        raise ValueError(f"line {lineno}: expected 'L|S <hex-addr> [D<n>]', got {text!r}")
    try:
        addr = int(parts[1], 16)
    except ValueError:
        raise ValueError(f"line {lineno}: bad address {parts[1]!r}") from None
    if not 0 <= addr < MAX_ADDRESS:
        raise ValueError(f"line {lineno}: address out of range")
    domain = DEFAULT_DOMAIN
    if len(parts) == 3:
        if not parts[2].startswith("D"):
            raise ValueError(f"line {lineno}: expected D<n>, got {parts[2]!r}")
        try:
            domain = int(parts[2][1:])
        except ValueError:
            raise ValueError(f"line {lineno}: bad domain {parts[2]!r}") from None
        if not 0 <= domain < 256:
            raise ValueError(f"line {lineno}: domain out of range")
    return (0 if parts[0] == "L" else 1), addr, domain


def load_trace(path) -> Trace:
    kinds, addrs, domains = [], [], []
    with open(path) as fh:
        for lineno, text in enumerate(fh, start=1):
            rec = _parse_line(text, lineno)
            if rec is None:
                continue
            kinds.append(rec[0])
            addrs.append(rec[1])
            domains.append(rec[2])
    if not addrs:
        raise ValueError(f"{path}: trace contains no accesses")
    return Trace(np.array(kinds, dtype=np.uint8),
                 np.array(addrs, dtype=np.uint64),
                 np.array(domains, dtype=np.uint8))


def save_trace(path, trace: Trace) -> None:
    with open(path, "w") as fh:
        for k, a, d in zip(trace.kinds, trace.addrs, trace.domains):
            kind = "L" if k == 0 else "S"
            if d == DEFAULT_DOMAIN:
                fh.write(f"{kind} {a:x}\n")
            else:
                fh.write(f"{kind} {a:x} D{d}\n")


def replay(cache: Cache, trace: Trace, warmup: int = 0) -> CacheStats:
    """Run a trace through a cache and return the post-warmup stats.

    The first ``warmup`` accesses execute normally but are dropped from
    the returned counters, so cold-start effects can be excluded.
    """
    if warmup < 0 or warmup > len(trace):
        raise ValueError("warmup outside [0, len(trace)]")
    if warmup:
        cache.access_batch(trace.addrs[:warmup], trace.domains[:warmup])
        cache.reset_stats()
    cache.access_batch(trace.addrs[warmup:], trace.domains[warmup:])
    return cache.stats()
