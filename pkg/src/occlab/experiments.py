"""Experiment configuration, dispatch, and result persistence.

Configs are flat INI files: an [experiment] section naming the kind, a
[cache] section feeding CacheConfig, and one section per experiment kind
holding its parameters. Everything is seeded from master_seed, outputs
carry a config echo, and no output contains a timestamp, so re-running
the same config produces byte-identical files.
"""

import configparser
import csv
import io
import json
from dataclasses import dataclass, field

from .aesattack import ge_experiment
from .cachecore import CacheStats, build_cache
from .config import CacheConfig, default_config
from .fingerprint import (accuracy_experiment, build_templates,
                          default_suite, parse_workloads)
from .occchannel import (ChannelParams, channel_cache, run_channel_trials,
                         sweep_occupancy)
from .traceio import load_trace, replay

KINDS = ("covert", "sweep", "fingerprint", "aes", "bench")

_DEFAULT_PARAMS = {
    "covert": {"occupancy_lines": 10_000, "x": 1_000, "y": 2_000,
               "stride_bytes": 64_000, "trials": 100},
    "sweep": {"designs": "baseline,ceaser,ceaser_s,scatter,mirage",
              "occupancies": ("2500,5000,10000,15000,20000,25000,"
                              "30000,35000,40000,45000"),
              "trials": 25},
    "fingerprint": {"workloads": "default", "n": 500, "reps": 3,
                    "occupancy_pct": 15},
    "aes": {"occupancy_pct": 50, "observations": 20_000,
            "save_observations": False},
    "bench": {"trace": "", "warmup": True},
}


@dataclass
class ExperimentConfig:
    kind: str
    cache: CacheConfig
    master_seed: int = 0
    out: str = ""
    format: str = "csv"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown experiment kind %r" % (self.kind,))
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        merged = dict(_DEFAULT_PARAMS[self.kind])
        merged.update(self.params)
        self.params = merged


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError("config file not found: %s" % (path,))
    if "experiment" not in parser:
        raise ValueError("config needs an [experiment] section")
    exp = parser["experiment"]
    kind = exp.get("kind", "")
    master_seed = exp.getint("seed", 0)

    cache_opts = {k: _coerce(v) for k, v in parser.items("cache")} \
        if "cache" in parser else {}
    design = cache_opts.pop("design", "baseline")
    cache_opts.setdefault("seed", master_seed)
    cache = default_config(design, **cache_opts)

    params = {k: _coerce(v) for k, v in parser.items(kind)} \
        if kind in parser else {}
    return ExperimentConfig(kind=kind, cache=cache, master_seed=master_seed,
                            out=exp.get("out", ""),
                            format=exp.get("format", "csv"), params=params)


def save_config(cfg: ExperimentConfig, path) -> None:
    parser = configparser.ConfigParser()
    parser["experiment"] = {"kind": cfg.kind, "seed": str(cfg.master_seed),
                            "out": cfg.out, "format": cfg.format}
    cache = {"design": cfg.cache.design, "llc_bytes": cfg.cache.llc_bytes,
             "line_bytes": cfg.cache.line_bytes,
             "ways_per_set": cfg.cache.ways_per_set,
             "skews": cfg.cache.skews, "policy": cfg.cache.policy,
             "seed": cfg.cache.seed,
             "extra_tags_per_set": cfg.cache.extra_tags_per_set,
             "mirage_ways_scope": cfg.cache.mirage_ways_scope}
    parser["cache"] = {k: str(v) for k, v in cache.items()}
    parser[cfg.kind] = {k: str(v).lower() if isinstance(v, bool) else str(v)
                        for k, v in cfg.params.items()}
    with open(path, "w") as fh:
        parser.write(fh)


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "kind": cfg.kind,
        "seed": cfg.master_seed,
        "design": cfg.cache.design,
        "llc_bytes": cfg.cache.llc_bytes,
        "policy": cfg.cache.policy,
        "params": {k: cfg.params[k] for k in sorted(cfg.params)},
    }


def bench(trace, design: str, policy: str = "random", warmup: bool = True,
          llc_bytes: int = 16 * 1024 * 1024, seed: int = 0,
          **cache_overrides) -> CacheStats:
    """Replay a trace and return its miss profile.

    warmup=True prefills the whole LLC with never-re-accessed lines first
    (strategy B2), so cold-fill credit is off the table; warmup=False is
    the bare B1 run.
    """
    cfg = default_config(design, policy=policy, llc_bytes=llc_bytes,
                         seed=seed, **cache_overrides)
    cache = build_cache(cfg)
    if warmup:
        cache.spurious_prefill()
        cache.reset_stats()
    return replay(cache, trace)


def _covert_rows(cfg: ExperimentConfig):
    p = cfg.params
    cache = channel_cache(cfg.cache.design, llc_bytes=cfg.cache.llc_bytes,
                          seed=cfg.master_seed, policy=cfg.cache.policy)
    params = ChannelParams(occupancy_lines=p["occupancy_lines"], x=p["x"],
                           y=p["y"], stride_bytes=p["stride_bytes"],
                           trials=p["trials"])
    rows = []
    for trial, res in enumerate(run_channel_trials(cache, params)):
        rows.append({"design": cfg.cache.design,
                     "occupancy": p["occupancy_lines"],
                     "bit": res.bit_sent, "trial": trial // 2,
                     "misses": res.receiver_misses,
                     "evictions": res.sender_evictions_of_receiver})
    return rows


def _sweep_rows(cfg: ExperimentConfig):
    p = cfg.params
    designs = [d.strip() for d in str(p["designs"]).split(",") if d.strip()]
    occupancies = [int(x) for x in str(p["occupancies"]).split(",")]
    return sweep_occupancy(designs, occupancies, trials=p["trials"],
                           llc_bytes=cfg.cache.llc_bytes,
                           seed=cfg.master_seed, policy=cfg.cache.policy)


def _fingerprint_result(cfg: ExperimentConfig):
    p = cfg.params
    suite = (default_suite() if p["workloads"] == "default"
             else parse_workloads(p["workloads"]))
    templates = build_templates(cfg.cache.design, cfg.cache.policy, suite,
                                occupancy_pct=p["occupancy_pct"],
                                reps=p["reps"],
                                llc_bytes=cfg.cache.llc_bytes,
                                seed=cfg.master_seed)
    accuracy = accuracy_experiment(cfg.cache.design, cfg.cache.policy, suite,
                                   n=p["n"], seed=cfg.master_seed,
                                   occupancy_pct=p["occupancy_pct"],
                                   reps=p["reps"],
                                   llc_bytes=cfg.cache.llc_bytes)
    rows = [{"workload": wid,
             "template_mean": templates.entries[wid][0],
             "template_std": templates.entries[wid][1],
             "accuracy": accuracy}
            for wid in sorted(templates.entries)]
    return rows, accuracy


def _aes_result(cfg: ExperimentConfig) -> dict:
    p = cfg.params
    return ge_experiment(cfg.cache.design, occupancy_pct=p["occupancy_pct"],
                         n_obs=p["observations"],
                         llc_bytes=cfg.cache.llc_bytes,
                         seed=cfg.master_seed, policy=cfg.cache.policy)


def _bench_result(cfg: ExperimentConfig) -> dict:
    p = cfg.params
    if not p["trace"]:
        raise ValueError("bench needs a trace file")
    trace = load_trace(p["trace"])
    stats = bench(trace, cfg.cache.design, policy=cfg.cache.policy,
                  warmup=bool(p["warmup"]), llc_bytes=cfg.cache.llc_bytes,
                  seed=cfg.master_seed)
    return stats.as_dict()


def _render_csv(rows, echo: dict) -> str:
    buf = io.StringIO()
    for key, value in echo.items():
        if key != "params":
            buf.write("# %s = %s\n" % (key, value))
    for key in sorted(echo["params"]):
        buf.write("# %s = %s\n" % (key, echo["params"][key]))
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]),
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _render_json(payload, echo: dict) -> str:
    return json.dumps({"config": echo, "result": payload},
                      indent=2, sort_keys=True) + "\n"


def run_experiment(cfg: ExperimentConfig, out=None) -> str:
    """Run one experiment and return the rendered result text.

    When ``out`` (or cfg.out) names a path the text is also written
    there. Output is deterministic for a fixed config: no timestamps,
    stable key order.
    """
    echo = _config_echo(cfg)
    if cfg.kind == "covert":
        rows = _covert_rows(cfg)
        text = (_render_csv(rows, echo) if cfg.format == "csv"
                else _render_json(rows, echo))
    elif cfg.kind == "sweep":
        rows = _sweep_rows(cfg)
        text = (_render_csv(rows, echo) if cfg.format == "csv"
                else _render_json(rows, echo))
    elif cfg.kind == "fingerprint":
        rows, accuracy = _fingerprint_result(cfg)
        text = (_render_csv(rows, echo) if cfg.format == "csv"
                else _render_json({"accuracy": accuracy, "templates": rows},
                                  echo))
    elif cfg.kind == "aes":
        text = _render_json(_aes_result(cfg), echo)
    else:
        text = _render_json(_bench_result(cfg), echo)

    path = out or cfg.out
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text
