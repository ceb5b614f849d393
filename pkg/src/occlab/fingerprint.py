"""Template-based process fingerprinting through LLC occupancy.

Offline, the attacker holds a fixed slice of the cache (15% by default),
lets a known workload run, re-probes its own lines, and records the miss
count as that workload's template. Online, an unknown run is classified
to the template with the nearest mean. Workloads are synthetic: a strided
working set, a load/store mix, and a burstiness phase standing in for the
access-volume differences that real suites exhibit.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .occchannel import channel_cache
from .traceio import Trace, replay

ATTACKER_DOMAIN = 0
WORKLOAD_DOMAIN = 1

ATTACKER_BASE = 1 << 36
WORKLOAD_BASE = 1 << 37

BURSTINESS = ("uniform", "front-loaded", "back-loaded")

# Fraction of each trace half that touches the working set; the rest of
# the slots poll a single idle line. Front-loaded puts 80% of the real
# accesses into the first half, back-loaded mirrors it.
_PHASE_DENSITY = {
    "uniform": (1.0, 1.0),
    "front-loaded": (1.0, 0.25),
    "back-loaded": (0.25, 1.0),
}


@dataclass(frozen=True)
class WorkloadSpec:
    id: str
    accesses: int
    working_set_lines: int
    stride: int
    load_store_mix: float
    burstiness: str = "uniform"

    def __post_init__(self):
        if self.accesses < 0:
            raise ValueError("accesses must be >= 0")
        if self.working_set_lines < 1:
            raise ValueError("working_set_lines must be >= 1")
        if self.stride < 64:
            raise ValueError("stride must be at least one line (64 bytes)")
        if not 0.0 <= self.load_store_mix <= 1.0:
            raise ValueError("load_store_mix must be in [0, 1]")
        if self.burstiness not in BURSTINESS:
            raise ValueError("burstiness must be one of %s"
                             % (BURSTINESS,))


@dataclass
class TemplateSet:
    """Per-workload (mean, std) of attacker probe misses."""
    entries: dict
    reps: int
    occupancy_pct: int


def gen_workload_trace(spec: WorkloadSpec, seed: int) -> Trace:
    """Expand a workload spec into a concrete access trace.

    The trace has exactly ``spec.accesses`` slots split into two halves.
    Burstiness decides how many slots in each half visit the working set;
    idle slots go to a single line just past it. The per-line visit
    multiset of each half is fixed by the spec alone, the seed only
    permutes the order within a half, so two seeds produce traces that
    differ by phase-local shuffling and nothing else.
    """
    total = spec.accesses
    halves = (total - total // 2, total // 2)
    density = _PHASE_DENSITY[spec.burstiness]
    width = spec.working_set_lines
    idle_addr = WORKLOAD_BASE + width * spec.stride

    addr_parts = []
    kind_parts = []
    for phase, (slots, frac) in enumerate(zip(halves, density)):
        visits = int(round(slots * frac))
        lines = np.arange(visits, dtype=np.uint64) % np.uint64(width)
        addrs = np.uint64(WORKLOAD_BASE) + lines * np.uint64(spec.stride)
        addrs = np.concatenate([
            addrs,
            np.full(slots - visits, idle_addr, dtype=np.uint64),
        ])
        gen = rng.generator(seed, "workload-phase", index=phase)
        gen.shuffle(addrs)
        kinds = (gen.random(slots) >= spec.load_store_mix).astype(np.uint8)
        addr_parts.append(addrs)
        kind_parts.append(kinds)

    addrs = (np.concatenate(addr_parts) if addr_parts
             else np.empty(0, dtype=np.uint64))
    kinds = (np.concatenate(kind_parts) if kind_parts
             else np.empty(0, dtype=np.uint8))
    domains = np.full(len(addrs), WORKLOAD_DOMAIN, dtype=np.uint8)
    return Trace(kinds=kinds, addrs=addrs, domains=domains)


class _ProbeRig:
    """Prefilled cache with the attacker's lines installed.

    The post-install state is snapshotted once so each observation starts
    from the same machine state; randomness across observations comes
    from the workload trace alone.
    """

    def __init__(self, design: str, policy: str, occupancy_pct: int,
                 llc_bytes: int, seed: int):
        if not 0 < occupancy_pct < 100:
            raise ValueError("occupancy_pct must be in (0, 100)")
        self.cache = channel_cache(design, llc_bytes=llc_bytes, seed=seed,
                                   policy=policy)
        capacity = self.cache.capacity
        self.occ_lines = capacity * occupancy_pct // 100
        self.cache.ensure_domain(WORKLOAD_DOMAIN)
        self.cache.flush_all()
        self.cache.spurious_prefill()
        self.attacker_lines = ((ATTACKER_BASE >> 6)
                               + np.arange(self.occ_lines, dtype=np.uint64))
        self.cache.access_lines(self.attacker_lines, ATTACKER_DOMAIN)
        self._snap = self.cache.snapshot()

    def observe(self, spec: WorkloadSpec, trace_seed: int) -> int:
        """Run one workload from the prepared state; return probe misses."""
        if spec.working_set_lines > self.cache.capacity:
            raise ValueError("working set exceeds cache capacity")
        self.cache.restore(self._snap)
        trace = gen_workload_trace(spec, trace_seed)
        if len(trace):
            replay(self.cache, trace)
        self.cache.reset_stats()
        self.cache.access_lines(self.attacker_lines, ATTACKER_DOMAIN)
        return self.cache.stats().misses


def build_templates(design: str, policy: str, workloads,
                    occupancy_pct: int = 15, reps: int = 3,
                    llc_bytes: int = 16 * 1024 * 1024,
                    seed: int = 0) -> TemplateSet:
    if not workloads:
        raise ValueError("need at least one workload")
    rig = _ProbeRig(design, policy, occupancy_pct, llc_bytes, seed)
    entries = {}
    for spec in workloads:
        misses = [rig.observe(spec, rng.derive(seed, "fp-template-" + spec.id,
                                               index=r))
                  for r in range(reps)]
        entries[spec.id] = (float(np.mean(misses)), float(np.std(misses)))
    return TemplateSet(entries=entries, reps=reps,
                       occupancy_pct=occupancy_pct)


def classify(observed_misses: int, templates: TemplateSet) -> str:
    """Nearest-mean classification; ties break to the lower workload id."""
    if not templates.entries:
        raise ValueError("empty template set")
    best_id = None
    best_dist = None
    for wid in sorted(templates.entries):
        dist = abs(observed_misses - templates.entries[wid][0])
        if best_dist is None or dist < best_dist:
            best_id, best_dist = wid, dist
    return best_id


def accuracy_experiment(design: str, policy: str, workloads, n: int = 500,
                        seed: int = 0, occupancy_pct: int = 15,
                        reps: int = 3,
                        llc_bytes: int = 16 * 1024 * 1024) -> float:
    """Fraction of n randomly sampled runs classified to the right workload."""
    if n < 1:
        raise ValueError("n must be >= 1")
    templates = build_templates(design, policy, workloads,
                                occupancy_pct=occupancy_pct, reps=reps,
                                llc_bytes=llc_bytes, seed=seed)
    rig = _ProbeRig(design, policy, occupancy_pct, llc_bytes, seed)
    sampler = rng.generator(seed, "fp-sample")
    correct = 0
    for i in range(n):
        spec = workloads[int(sampler.integers(len(workloads)))]
        misses = rig.observe(spec, rng.derive(seed, "fp-online", index=i))
        if classify(misses, templates) == spec.id:
            correct += 1
    return correct / n


def default_suite():
    """Eight synthetic workloads spanning volume, footprint, and phase."""
    suite = []
    for i in range(8):
        width = 8_000 + 1_000 * i
        suite.append(WorkloadSpec(
            id="w%d" % i,
            accesses=4 * width,
            working_set_lines=width,
            stride=(64, 128, 256, 512)[i % 4],
            load_store_mix=0.5 + 0.5 * i / 7,
            burstiness=BURSTINESS[i % 3],
        ))
    return suite


def parse_workloads(path) -> list:
    """Read workload specs, one per line: id accesses working_set stride mix phase."""
    specs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            body = raw.split("#", 1)[0].strip()
            if not body:
                continue
            fields = body.split()
            if len(fields) != 6:
                raise ValueError("line %d: expected 6 fields, got %d"
                                 % (lineno, len(fields)))
            try:
                spec = WorkloadSpec(
                    id=fields[0],
                    accesses=int(fields[1]),
                    working_set_lines=int(fields[2]),
                    stride=int(fields[3]),
                    load_store_mix=float(fields[4]),
                    burstiness=fields[5],
                )
            except ValueError as exc:
                raise ValueError("line %d: %s" % (lineno, exc)) from None
            specs.append(spec)
    if not specs:
        raise ValueError("workload file contains no specs")
    return specs
