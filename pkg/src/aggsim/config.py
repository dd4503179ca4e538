"""Run configuration: flat ``key = value`` documents with dotted keys, plus sweeps.

Example::

    policy.mode = two_layer
    traffic.model = saturated
    traffic.sizes = 40:7, 576:4, 1500:1
    channel.ber = 1e-5
    run.seeds = 1, 2, 3
    sweep.policy.mode = [none, amsdu_only, ampdu_only, two_layer]

A JSON object (nested or with dotted keys) is accepted as well.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .aggregation import FRAMINGS, MODES, AggregationPolicy
from .error_model import ChannelModel
from .errors import AggsimError, ConfigError
from .frames import MAX_MSDU_BYTES
from .negotiation import AMSDU_CAPS, DEFAULT_RATES, StationCapabilities, negotiate
from .phy_airtime import PhyTimings
from .simulator import SIM_BACKOFF_MODELS, Scenario
from .traffic import IMIX_SIZES, TRAFFIC_MODELS, TrafficSpec

MAX_RUNS = 10_000


# -- value parsers ---------------------------------------------------------


def _num(lo: Optional[float] = None, hi: Optional[float] = None, integer: bool = False, hi_open: bool = False):
    def parse(key: str, text: str) -> Any:
        try:
            v = int(text) if integer else float(text)
        except ValueError:
            raise ConfigError(f"{key}: expected {'an integer' if integer else 'a number'}, got {text!r}") from None
        too_high = hi is not None and (v >= hi if hi_open else v > hi)
        if (lo is not None and v < lo) or too_high:
            lo_s = "" if lo is None else _fmt(lo)
            hi_s = "" if hi is None else ("<" if hi_open else "=") + _fmt(hi)
            raise ConfigError(f"{key} out of range {lo_s}..{hi_s}")
        return v

    return parse


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(v)


def _choice(options):
    def parse(key: str, text: str) -> str:
        if text not in options:
            raise ConfigError(f"{key}: {text!r} is not one of {', '.join(options)}")
        return text

    return parse


def _bool(key: str, text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected true or false, got {text!r}")


def _amsdu_cap(key: str, text: str) -> Optional[int]:
    if text.lower() in ("off", "none", "disabled"):
        return None
    try:
        v = int(text)
    except ValueError:
        v = -1
    if v not in AMSDU_CAPS:
        raise ConfigError(f"{key}: must be one of {', '.join(map(str, AMSDU_CAPS))} or off")
    return v


def _target(key: str, text: str) -> Optional[int]:
    if text.lower() == "auto":
        return None
    return _num(1, integer=True)(key, text)


def _retry(key: str, text: str) -> Optional[int]:
    if text.lower() in ("inf", "infinite", "none"):
        return None
    return _num(0, integer=True)(key, text)


def _int_list(lo: int):
    def parse(key: str, text: str) -> tuple[int, ...]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ConfigError(f"{key}: empty list")
        return tuple(_num(lo, integer=True)(key, t) for t in items)

    return parse


def _sizes(key: str, text: str) -> tuple[tuple[int, float], ...]:
    if text.strip().lower() == "imix":
        return IMIX_SIZES
    out = []
    for item in (t.strip() for t in text.split(",")):
        if not item:
            continue
        size_s, _, weight_s = item.partition(":")
        size = _num(1, MAX_MSDU_BYTES, integer=True)(f"{key} size", size_s.strip())
        weight = _num(0)(f"{key} weight", weight_s.strip()) if weight_s else 1.0
        if weight <= 0:
            raise ConfigError(f"{key}: weights must be positive")
        out.append((size, weight))
    if not out:
        raise ConfigError(f"{key}: empty size distribution")
    return tuple(out)


def format_value(v: Any) -> str:
    if v is None:
        return "off"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        if v and isinstance(v[0], tuple):
            if v == IMIX_SIZES:
                return "imix"
            return ", ".join(f"{s}:{_fmt(w)}" for s, w in v)
        return ", ".join(str(x) for x in v)
    if isinstance(v, float):
        return _fmt(v)
    return str(v)


@dataclass(frozen=True)
class Key:
    name: str
    default: str
    parse: Callable[[str, str], Any]
    doc: str = ""


_STATION_KEYS = [
    ("max_amsdu_bytes", "3839", _amsdu_cap, "A-MSDU capability: 3839, 7935, 11454 or off"),
    ("max_ampdu_bytes", "65535", _num(1, 1048575, integer=True), "largest A-MPDU accepted"),
    ("max_ba_window", "64", _num(1, 64, integer=True), "Block-Ack window (MPDUs)"),
    ("supported_rates", ", ".join(map(str, DEFAULT_RATES)), _int_list(1), "data bits per OFDM symbol"),
]

SCHEMA: dict[str, Key] = {
    k.name: k
    for k in [
        Key("run.duration_us", "1000000", _num(1e-9), "simulated time"),
        Key("run.seeds", "1", _int_list(0), "one run per seed"),
        Key("run.output", "results.csv", lambda k, t: t, "CSV path"),
        Key("run.backoff", "uniform", _choice(SIM_BACKOFF_MODELS), "uniform draw, expected value, or none"),
        Key("run.warmup_fraction", "0.05", _num(0, 1, hi_open=True), "saturated runs skip this share of time"),
        Key("run.max_runs", str(MAX_RUNS), _num(1, integer=True), "refuse larger sweeps"),
        Key("run.allow_large_sweep", "false", _bool, "lift the run.max_runs bound"),
        Key("traffic.model", "saturated", _choice(TRAFFIC_MODELS)),
        Key("traffic.rate_pps", "1000", _num(1e-12), "cbr and poisson only"),
        Key("traffic.sizes", "1500", _sizes, "size:weight list, or imix"),
        Key("traffic.tid", "0", _num(0, 7, integer=True)),
        Key("traffic.endpoints", "1", _num(1, integer=True), "distinct DA/SA pairs"),
        Key("policy.mode", "two_layer", _choice(MODES)),
        Key("policy.amsdu_timeout_us", "500", _num(0)),
        Key("policy.ampdu_timeout_us", "0", _num(0)),
        Key("policy.amsdu_target_bytes", "auto", _target, "auto = negotiated limit"),
        Key("policy.lone_msdu_framing", "plain", _choice(FRAMINGS)),
        *[Key(f"{side}.{n}", d, p, doc) for side in ("initiator", "responder") for n, d, p, doc in _STATION_KEYS],
        Key("session.basic_rate", "96", _num(1, integer=True), "control responses at or below this rate"),
        Key("channel.ber", "0", _num(0, 1)),
        Key("blockack.retry_limit", "7", _retry, "integer or inf"),
        Key("timings.preamble_us", "16", _num(1e-12)),
        Key("timings.phy_header_us", "4", _num(1e-12)),
        Key("timings.symbol_us", "4", _num(1e-12)),
        Key("timings.sifs_us", "16", _num(1e-12)),
        Key("timings.difs_us", "34", _num(1e-12)),
        Key("timings.slot_us", "9", _num(1e-12)),
        Key("timings.cw_min", "15", _num(1, integer=True)),
        Key("timings.service_tail_bits", "22", _num(0, integer=True)),
        Key("timings.ack_bytes", "14", _num(0, integer=True)),
        Key("timings.block_ack_bytes", "32", _num(0, integer=True)),
    ]
}

# Keys that describe the run harness rather than one simulated scenario.
HARNESS_KEYS = ("run.seeds", "run.output", "run.max_runs", "run.allow_large_sweep")
SWEEPABLE = [k for k in SCHEMA if k not in HARNESS_KEYS]


def defaults() -> dict[str, Any]:
    return {k.name: k.parse(k.name, k.default) for k in SCHEMA.values()}


def default_document() -> str:
    lines = []
    for k in SCHEMA.values():
        doc = f"  # {k.doc}" if k.doc else ""
        lines.append(f"{k.name} = {k.default}{doc}")
    return "\n".join(lines) + "\n"


def _check_key(key: str) -> None:
    if key not in SCHEMA:
        raise ConfigError(f"unknown key {key!r}")


def _split_top(text: str) -> list[str]:
    """Split a bracketed sweep list on top-level commas."""
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    out = []
    for p in (p.strip() for p in parts):
        if p.startswith("[") and p.endswith("]"):
            p = p[1:-1]
        out.append(p.strip().strip("\"'"))
    return [p for p in out if p]


@dataclass
class RunConfig:
    values: dict[str, Any]
    sweep: list[tuple[str, list[Any]]] = field(default_factory=list)

    @property
    def seeds(self) -> tuple[int, ...]:
        return self.values["run.seeds"]

    @property
    def output(self) -> str:
        return self.values["run.output"]

    def points(self) -> list[dict[str, Any]]:
        """Sweep points in deterministic order (last axis varies fastest)."""
        if not self.sweep:
            return [{}]
        keys = [k for k, _ in self.sweep]
        return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in self.sweep))]

    def plan(self) -> list[tuple[dict[str, Any], int]]:
        return [(p, s) for p in self.points() for s in self.seeds]

    def resolve(self, point: dict[str, Any]) -> dict[str, Any]:
        merged = dict(self.values)
        merged.update(point)
        return merged

    def scenario(self, point: dict[str, Any], seed: int) -> Scenario:
        return build_scenario(self.resolve(point), seed)

    def with_seeds(self, n: int) -> "RunConfig":
        if n < 1:
            raise ConfigError("--seeds must be >= 1")
        first = self.seeds[0]
        vals = dict(self.values)
        vals["run.seeds"] = tuple(range(first, first + n))
        return RunConfig(vals, list(self.sweep))

    def check_size(self) -> None:
        n = len(self.plan())
        if n > self.values["run.max_runs"] and not self.values["run.allow_large_sweep"]:
            raise ConfigError(
                f"sweep expands to {n} runs, more than run.max_runs={self.values['run.max_runs']}; "
                "set run.allow_large_sweep = true to proceed"
            )

    def validate(self) -> None:
        self.check_size()
        for point in self.points():
            self.scenario(point, self.seeds[0]).validate()

    def echo(self) -> dict[str, str]:
        return {k: format_value(v) for k, v in self.values.items()}


def _station(v: dict[str, Any], side: str) -> StationCapabilities:
    return StationCapabilities(
        max_amsdu_bytes=v[f"{side}.max_amsdu_bytes"],
        max_ampdu_bytes=v[f"{side}.max_ampdu_bytes"],
        max_ba_window=v[f"{side}.max_ba_window"],
        supported_rates=v[f"{side}.supported_rates"],
    )


def build_scenario(v: dict[str, Any], seed: int) -> Scenario:
    """Turn fully resolved config values into a validated Scenario."""
    try:
        session = negotiate(_station(v, "initiator"), _station(v, "responder"), v["traffic.tid"], v["session.basic_rate"])
        timings = PhyTimings(
            preamble_us=v["timings.preamble_us"],
            phy_header_us=v["timings.phy_header_us"],
            symbol_us=v["timings.symbol_us"],
            sifs_us=v["timings.sifs_us"],
            difs_us=v["timings.difs_us"],
            slot_us=v["timings.slot_us"],
            cw_min=v["timings.cw_min"],
            data_bits_per_symbol=session.data_bits_per_symbol,
            ctrl_bits_per_symbol=session.ctrl_bits_per_symbol,
            service_tail_bits=v["timings.service_tail_bits"],
            ack_bytes=v["timings.ack_bytes"],
            block_ack_bytes=v["timings.block_ack_bytes"],
        )
        sc = Scenario(
            duration_us=v["run.duration_us"],
            traffic=TrafficSpec(
                model=v["traffic.model"],
                rate_pps=v["traffic.rate_pps"],
                size_dist=v["traffic.sizes"],
                tid=v["traffic.tid"],
                endpoints=v["traffic.endpoints"],
            ),
            policy=AggregationPolicy(
                mode=v["policy.mode"],
                amsdu_timeout_us=v["policy.amsdu_timeout_us"],
                ampdu_timeout_us=v["policy.ampdu_timeout_us"],
                amsdu_target_bytes=v["policy.amsdu_target_bytes"],
                lone_msdu_framing=v["policy.lone_msdu_framing"],
            ),
            session=session,
            channel=ChannelModel(v["channel.ber"], seed),
            timings=timings,
            retry_limit=v["blockack.retry_limit"],
            backoff=v["run.backoff"],
            warmup_fraction=v["run.warmup_fraction"],
        )
        sc.validate()
    except ConfigError:
        raise
    except AggsimError as exc:
        raise ConfigError(str(exc)) from exc
    return sc


def _flatten(obj: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in obj.items():
        name = f"{prefix}{k}"
        if isinstance(v, dict) and not (prefix == "" and k == "sweep"):
            out.update(_flatten(v, name + "."))
        elif name == "sweep" and isinstance(v, dict):
            for sk, sv in v.items():
                out[f"sweep.{sk}"] = sv
        else:
            out[name] = v
    return out


def _json_text(v: Any) -> str:
    if isinstance(v, list):
        return ", ".join(_json_text(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "off"
    return str(v)


def _pairs(text: str) -> list[tuple[str, str, int]]:
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
        out = []
        for k, v in _flatten(obj).items():
            if k.startswith("sweep.") and isinstance(v, list):
                out.append((k, "[" + ", ".join(f"[{_json_text(x)}]" for x in v) + "]", 0))
            else:
                out.append((k, _json_text(v), 0))
        return out
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        out.append((key.strip(), value.strip(), lineno))
    return out


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document, filling every default."""
    values = defaults()
    sweep: list[tuple[str, list[Any]]] = []
    seen: set[str] = set()
    for key, value, _ in _pairs(text):
        if key in seen:
            raise ConfigError(f"duplicate key {key!r}")
        seen.add(key)
        if key.startswith("sweep."):
            target = key[len("sweep."):]
            _check_key(target)
            if target not in SWEEPABLE:
                raise ConfigError(f"{target} cannot be swept")
            items = [SCHEMA[target].parse(target, t) for t in _split_top(value)]
            if not items:
                raise ConfigError(f"{key}: empty sweep")
            sweep.append((target, items))
        else:
            _check_key(key)
            values[key] = SCHEMA[key].parse(key, value)
    cfg = RunConfig(values, sweep)
    cfg.validate()
    return cfg
