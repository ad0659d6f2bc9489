"""Experiment configuration: scenario schema, named presets, config file parsing.

A scenario is described either by a named preset (``scenario1`` ..
``scenario4``, plus ``*_small`` desk-scale variants) or by a plain-text
file of ``key = value`` lines using the field names of
:class:`ScenarioConfig`. Unknown keys are an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from .errors import InvalidConfig

ATTACK_TYPES = ("sinkhole", "flooder")
DATA_PLANES = ("drop", "alter")
TRAFFIC_SOURCES = ("benign", "all")
MOBILITY_KINDS = ("none", "random_waypoint")


@dataclass(frozen=True)
class TrafficSpec:
    """Constant-bit-rate upward traffic: every source sends one packet to
    the root every ``period_s`` seconds, starting at t=0."""

    period_s: float = 1.0
    sources: str = "benign"  # "benign": all non-attacker non-root; "all": every non-root


@dataclass(frozen=True)
class MobilitySpec:
    kind: str = "none"
    speed_m_s: float = 0.0  # used only by random_waypoint


@dataclass(frozen=True)
class ScenarioConfig:
    node_count: int = 500
    area: tuple[float, float] = (100.0, 100.0)
    tx_range: float = 20.0
    malicious_fraction: float = 0.0
    attack_interval_s: float = 1.0
    duration_s: float = 1000.0
    packet_size_bytes: int = 512
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    dio_period_s: float = 10.0
    hello_period_s: float = 1.0
    alpha_low: float = 0.3
    alpha_high: float = 0.8
    apt_threshold: Union[str, float] = "adaptive"
    mobility: MobilitySpec = field(default_factory=MobilitySpec)
    detection_enabled: bool = True
    seed: int = 1
    # Adversary knobs surfaced through the scenario schema.
    attack_type: str = "sinkhole"
    attack_start_s: Optional[float] = None  # None: 10% of duration_s
    sinkhole_advertised_rank: int = 0
    sinkhole_data_plane: str = "drop"
    benign_rreq_rate_per_s: float = 1.0
    flooder_rreq_rate_per_s: float = 10.0
    # Engine constants.
    hop_latency_s: float = 0.005
    packet_timeout_s: float = 5.0
    packet_ttl: int = 64

    def __post_init__(self):
        validate_config(self)

    def resolved_attack_start(self) -> float:
        if self.attack_start_s is not None:
            return self.attack_start_s
        return 0.1 * self.duration_s

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def validate_config(cfg: ScenarioConfig) -> None:
    def bad(msg):
        raise InvalidConfig(msg)

    if cfg.node_count < 2:
        bad("node_count must be >= 2")
    if cfg.tx_range <= 0:
        bad("tx_range must be > 0")
    if not 0.0 <= cfg.malicious_fraction < 1.0:
        bad("malicious_fraction must be in [0, 1)")
    # duration 0 is allowed as a degenerate no-op run.
    if cfg.duration_s < 0:
        bad("duration_s must be >= 0")
    if cfg.area[0] <= 0 or cfg.area[1] <= 0:
        bad("area dimensions must be > 0")
    if cfg.packet_size_bytes <= 0:
        bad("packet_size_bytes must be > 0")
    if cfg.traffic.period_s <= 0:
        bad("traffic period must be > 0")
    if cfg.traffic.sources not in TRAFFIC_SOURCES:
        bad("traffic sources must be one of %s" % (TRAFFIC_SOURCES,))
    for name in ("dio_period_s", "hello_period_s", "attack_interval_s"):
        if getattr(cfg, name) <= 0:
            bad("%s must be > 0" % name)
    for name in ("alpha_low", "alpha_high"):
        a = getattr(cfg, name)
        if not 0.0 < a <= 1.0:
            bad("%s must be in (0, 1]" % name)
    if isinstance(cfg.apt_threshold, str):
        if cfg.apt_threshold != "adaptive":
            bad("apt_threshold must be 'adaptive' or a number")
    elif cfg.apt_threshold < 0:
        bad("apt_threshold must be >= 0")
    if cfg.mobility.kind not in MOBILITY_KINDS:
        bad("mobility kind must be one of %s" % (MOBILITY_KINDS,))
    if cfg.mobility.kind == "random_waypoint" and cfg.mobility.speed_m_s <= 0:
        bad("random_waypoint mobility requires speed > 0")
    if cfg.attack_type not in ATTACK_TYPES:
        bad("attack_type must be one of %s" % (ATTACK_TYPES,))
    if cfg.attack_start_s is not None and cfg.attack_start_s < 0:
        bad("attack_start_s must be >= 0")
    if cfg.sinkhole_advertised_rank < 0:
        bad("sinkhole_advertised_rank must be >= 0")
    if cfg.sinkhole_data_plane not in DATA_PLANES:
        bad("sinkhole_data_plane must be one of %s" % (DATA_PLANES,))
    if cfg.benign_rreq_rate_per_s < 0:
        bad("benign_rreq_rate_per_s must be >= 0")
    if cfg.flooder_rreq_rate_per_s <= 0:
        bad("flooder_rreq_rate_per_s must be > 0")
    if (
        cfg.attack_type == "flooder"
        and cfg.malicious_fraction > 0
        and cfg.flooder_rreq_rate_per_s <= cfg.benign_rreq_rate_per_s
    ):
        bad("flooder_rreq_rate_per_s must exceed benign_rreq_rate_per_s")
    if cfg.hop_latency_s <= 0:
        bad("hop_latency_s must be > 0")
    if cfg.packet_timeout_s <= 0:
        bad("packet_timeout_s must be > 0")
    if cfg.packet_ttl < 1:
        bad("packet_ttl must be >= 1")


# Named presets. scenario1..3 differ in sinkhole rate (10/20/30%); scenario4
# is the sweep base (30% sinkholes, attack interval swept via the CLI).
# The *_small variants scale down to desk size so full suites run in seconds.
_PRESET_BASE = dict(node_count=500, area=(100.0, 100.0), duration_s=1000.0)
_SMALL = dict(node_count=100, duration_s=200.0)

PRESETS: dict[str, dict] = {
    "scenario1": dict(_PRESET_BASE, malicious_fraction=0.10),
    "scenario2": dict(_PRESET_BASE, malicious_fraction=0.20),
    "scenario3": dict(_PRESET_BASE, malicious_fraction=0.30),
    "scenario4": dict(_PRESET_BASE, malicious_fraction=0.30),
}
PRESETS.update(
    {name + "_small": dict(params, **_SMALL) for name, params in list(PRESETS.items())}
)


def preset(name: str, **overrides) -> ScenarioConfig:
    """Build a named preset configuration, optionally overriding fields."""
    try:
        params = PRESETS[name]
    except KeyError:
        raise InvalidConfig(
            "unknown scenario preset %r (known: %s)" % (name, ", ".join(sorted(PRESETS)))
        )
    return ScenarioConfig(**{**params, **overrides})


_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_bool(key, raw):
    try:
        return _BOOL_WORDS[raw.lower()]
    except KeyError:
        raise InvalidConfig("%s: expected a boolean, got %r" % (key, raw))


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise InvalidConfig("%s: expected a number, got %r" % (key, raw))


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise InvalidConfig("%s: expected an integer, got %r" % (key, raw))


def _parse_area(key, raw):
    parts = raw.lower().replace("*", "x").split("x")
    if len(parts) != 2:
        raise InvalidConfig("%s: expected WIDTHxHEIGHT, got %r" % (key, raw))
    return (_parse_float(key, parts[0].strip()), _parse_float(key, parts[1].strip()))


def _parse_traffic(key, raw):
    # "cbr <period_s> [benign|all]"
    parts = raw.split()
    if not parts or parts[0].lower() != "cbr":
        raise InvalidConfig("%s: expected 'cbr <period_s> [sources]', got %r" % (key, raw))
    period = _parse_float(key, parts[1]) if len(parts) > 1 else 1.0
    sources = parts[2].lower() if len(parts) > 2 else "benign"
    if len(parts) > 3:
        raise InvalidConfig("%s: trailing tokens in %r" % (key, raw))
    return TrafficSpec(period_s=period, sources=sources)


def _parse_mobility(key, raw):
    parts = raw.split()
    kind = parts[0].lower().replace("-", "_")
    if kind == "none":
        if len(parts) > 1:
            raise InvalidConfig("%s: 'none' takes no arguments" % key)
        return MobilitySpec()
    if kind == "random_waypoint":
        if len(parts) != 2:
            raise InvalidConfig("%s: expected 'random_waypoint <speed_m_s>'" % key)
        return MobilitySpec(kind="random_waypoint", speed_m_s=_parse_float(key, parts[1]))
    raise InvalidConfig("%s: unknown mobility kind %r" % (key, parts[0]))


def _parse_threshold(key, raw):
    if raw.lower() == "adaptive":
        return "adaptive"
    return _parse_float(key, raw)


_FIELD_PARSERS = {
    "node_count": _parse_int,
    "area": _parse_area,
    "tx_range": _parse_float,
    "malicious_fraction": _parse_float,
    "attack_interval_s": _parse_float,
    "duration_s": _parse_float,
    "packet_size_bytes": _parse_int,
    "traffic": _parse_traffic,
    "dio_period_s": _parse_float,
    "hello_period_s": _parse_float,
    "alpha_low": _parse_float,
    "alpha_high": _parse_float,
    "apt_threshold": _parse_threshold,
    "mobility": _parse_mobility,
    "detection_enabled": _parse_bool,
    "seed": _parse_int,
    "attack_type": lambda k, raw: raw.lower(),
    "attack_start_s": lambda k, raw: None if raw.lower() in ("auto", "none") else _parse_float(k, raw),
    "sinkhole_advertised_rank": _parse_int,
    "sinkhole_data_plane": lambda k, raw: raw.lower(),
    "benign_rreq_rate_per_s": _parse_float,
    "flooder_rreq_rate_per_s": _parse_float,
    "hop_latency_s": _parse_float,
    "packet_timeout_s": _parse_float,
    "packet_ttl": _parse_int,
}


def parse_scenario_text(text: str, base: Optional[ScenarioConfig] = None) -> ScenarioConfig:
    """Parse ``key = value`` scenario text into a ScenarioConfig.

    Blank lines and lines starting with ``#`` are ignored. Unknown keys
    raise InvalidConfig naming the key.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InvalidConfig("line %d: expected 'key = value', got %r" % (lineno, line))
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_PARSERS:
            raise InvalidConfig("unknown config key %r (line %d)" % (key, lineno))
        if key in values:
            raise InvalidConfig("duplicate config key %r (line %d)" % (key, lineno))
        values[key] = _FIELD_PARSERS[key](key, raw)
    if base is None:
        return ScenarioConfig(**values)
    return base.with_overrides(**values)


def load_scenario(source: str, **overrides) -> ScenarioConfig:
    """Load a scenario from a preset name or a config file path."""
    if source in PRESETS:
        return preset(source, **overrides)
    try:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidConfig("cannot read scenario %r: %s" % (source, exc))
    cfg = parse_scenario_text(text)
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    return cfg
