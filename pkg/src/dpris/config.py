"""Campaign configuration: schema, defaults, JSON loading, hashing.

One JSON file drives everything.  Every key has a default mirroring the
bench prototype (2.7 GHz, 12 x 12 cells, 0.8 m feed / 1.6 m receive, 45
degree feed, 2.5 MSps, 16 dB isolation), so an empty config reproduces the
bench-scale scenario with one command.  Schema violations are reported with
their full key path and exit the CLI with code 2.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

from .channel import ChannelModelSpec, Geometry
from .hardware import HardwareConfig

MODES = ("ber_sweep", "oracle_check", "waveform_export", "file_loopback")
FIDELITIES = ("A", "B")
STREAM_RELATIONS = ("independent", "identical")
CSI_MODES = ("perfect", "calibrated", "pilot")

STREAMS = 2
BITS_PER_SYMBOL = 4
MIN_BITS_PER_POINT = 10_000


class ConfigError(ValueError):
    """A configuration value failed validation; carries its key path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class OracleCheckConfig:
    harmonic_cases: int = 1000
    parseval_cases: int = 1000
    model_identity_cases: int = 1000

    def __post_init__(self):
        for name in ("harmonic_cases", "parseval_cases", "model_identity_cases"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass(frozen=True)
class WaveformExportConfig:
    delta_phi_rad: float = 3.141592653589793
    t_shift_fraction: float = 0.25
    samples: int = 64
    harmonic_span: int = 10

    def __post_init__(self):
        if not 0.0 < self.delta_phi_rad <= 2.0 * 3.141592653589793:
            raise ValueError("delta_phi_rad must lie in (0, 2*pi]")
        if not 0.0 <= self.t_shift_fraction < 1.0:
            raise ValueError("t_shift_fraction must lie in [0, 1)")
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if self.harmonic_span < 1:
            raise ValueError("harmonic_span must be at least 1")


@dataclass(frozen=True)
class CampaignConfig:
    """Top-level campaign description; nested module configs ride along."""

    mode: str = "ber_sweep"
    seed: int = 1
    ebn0_grid_db: tuple[float, ...] = (4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)
    bits_per_point: int = 1_000_000
    fidelity: str = "A"
    coupling: bool = False
    stream_relation: str = "independent"
    symbol_rate_sps: float = 2.5e6
    csi: str = "calibrated"
    samples_per_symbol: int = 64
    pilot_length: int = 16
    zf_condition_limit: float = 1e8
    carrier_power_watts: float = 1.0
    lut_csv: str | None = None
    loopback_ebn0_db: float = 30.0
    geometry: Geometry = field(default_factory=Geometry)
    channel: ChannelModelSpec = field(default_factory=ChannelModelSpec)
    hardware: HardwareConfig = field(default_factory=HardwareConfig)
    oracle: OracleCheckConfig = field(default_factory=OracleCheckConfig)
    waveform_export: WaveformExportConfig = field(default_factory=WaveformExportConfig)

    @property
    def symbol_period_s(self) -> float:
        return 1.0 / self.symbol_rate_sps

    @property
    def throughput_bps(self) -> float:
        """Streams x bits-per-symbol x symbol rate; 20 Mbps at defaults."""
        return STREAMS * BITS_PER_SYMBOL * self.symbol_rate_sps


def validate_config(cfg: CampaignConfig) -> CampaignConfig:
    """Cross-field checks beyond what the dataclass constructors enforce."""
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}, got {cfg.mode!r}")
    if cfg.fidelity not in FIDELITIES:
        raise ConfigError("fidelity", f"must be one of {FIDELITIES}, got {cfg.fidelity!r}")
    if cfg.stream_relation not in STREAM_RELATIONS:
        raise ConfigError(
            "stream_relation", f"must be one of {STREAM_RELATIONS}, got {cfg.stream_relation!r}"
        )
    if cfg.csi not in CSI_MODES:
        raise ConfigError("csi", f"must be one of {CSI_MODES}, got {cfg.csi!r}")
    if len(cfg.ebn0_grid_db) == 0:
        raise ConfigError("ebn0_grid_db", "grid must be non-empty")
    if cfg.bits_per_point < MIN_BITS_PER_POINT:
        raise ConfigError(
            "bits_per_point", f"must be at least {MIN_BITS_PER_POINT}, got {cfg.bits_per_point}"
        )
    if cfg.symbol_rate_sps <= 0:
        raise ConfigError("symbol_rate_sps", "must be positive")
    if cfg.samples_per_symbol < 2:
        raise ConfigError("samples_per_symbol", "must be at least 2")
    if cfg.pilot_length < 2 or cfg.pilot_length % 2 != 0:
        raise ConfigError("pilot_length", "must be an even number >= 2")
    if cfg.coupling and cfg.fidelity != "B":
        raise ConfigError(
            "coupling", "voltage coupling is a waveform-level impairment; requires fidelity B"
        )
    if not cfg.seed >= 0:
        raise ConfigError("seed", "must be a non-negative integer")
    if cfg.carrier_power_watts <= 0:
        raise ConfigError("carrier_power_watts", "must be positive")
    return cfg


def _build_section(cls, values: dict, path: str):
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def _merge_section(cls, defaults_obj, raw, path: str, coercions: dict | None = None):
    if raw is None:
        return defaults_obj
    if not isinstance(raw, dict):
        raise ConfigError(path, f"expected an object, got {type(raw).__name__}")
    values = asdict(defaults_obj)
    known = set(values)
    for key, val in raw.items():
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown key")
        if coercions and key in coercions:
            val = coercions[key](val, f"{path}.{key}")
        values[key] = val
    return _build_section(cls, values, path)


def _coerce_positions(val, path):
    if val is None:
        return None
    try:
        return tuple(tuple(float(x) for x in p) for p in val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, "expected a list of [x, y, z] triples") from exc


def _coerce_dac_bits(val, path):
    if val is None or val == "ideal":
        return None
    if not isinstance(val, int) or isinstance(val, bool):
        raise ConfigError(path, f"expected an integer or \"ideal\", got {val!r}")
    return val


def _coerce_xpd(val, path):
    if val is None or val == "inf":
        return None
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(path, f"expected a number, null, or \"inf\", got {val!r}")
    return float(val)


def config_from_dict(raw: dict) -> CampaignConfig:
    """Build a validated config from a parsed JSON object.

    Unknown keys are rejected with their path so typos surface instead of
    silently falling back to defaults.
    """
    if not isinstance(raw, dict):
        raise ConfigError("<root>", f"expected an object, got {type(raw).__name__}")
    defaults = CampaignConfig()
    values = {}
    scalar_keys = {
        "mode": str,
        "seed": int,
        "bits_per_point": int,
        "fidelity": str,
        "coupling": bool,
        "stream_relation": str,
        "symbol_rate_sps": (int, float),
        "csi": str,
        "samples_per_symbol": int,
        "pilot_length": int,
        "zf_condition_limit": (int, float),
        "carrier_power_watts": (int, float),
        "loopback_ebn0_db": (int, float),
    }
    section_keys = {"geometry", "channel", "hardware", "oracle", "waveform_export"}
    for key in raw:
        if key not in scalar_keys and key not in section_keys and key not in (
            "ebn0_grid_db",
            "lut_csv",
        ):
            raise ConfigError(key, "unknown key")
    for key, types in scalar_keys.items():
        if key in raw:
            val = raw[key]
            if types is bool:
                if not isinstance(val, bool):
                    raise ConfigError(key, f"expected a boolean, got {val!r}")
            elif types is int:
                if not isinstance(val, int) or isinstance(val, bool):
                    raise ConfigError(key, f"expected an integer, got {val!r}")
            elif types is str:
                if not isinstance(val, str):
                    raise ConfigError(key, f"expected a string, got {val!r}")
            else:
                if not isinstance(val, types) or isinstance(val, bool):
                    raise ConfigError(key, f"expected a number, got {val!r}")
            values[key] = val
    if "ebn0_grid_db" in raw:
        grid = raw["ebn0_grid_db"]
        if not isinstance(grid, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in grid
        ):
            raise ConfigError("ebn0_grid_db", "expected a list of numbers")
        values["ebn0_grid_db"] = tuple(float(v) for v in grid)
    if "lut_csv" in raw:
        if raw["lut_csv"] is not None and not isinstance(raw["lut_csv"], str):
            raise ConfigError("lut_csv", "expected a path string or null")
        values["lut_csv"] = raw["lut_csv"]

    values["geometry"] = _merge_section(
        Geometry,
        defaults.geometry,
        raw.get("geometry"),
        "geometry",
        coercions={"rx_positions_m": _coerce_positions},
    )
    values["channel"] = _merge_section(
        ChannelModelSpec,
        defaults.channel,
        raw.get("channel"),
        "channel",
        coercions={"cross_polarization_discrimination_db": _coerce_xpd},
    )
    values["hardware"] = _merge_section(
        HardwareConfig,
        defaults.hardware,
        raw.get("hardware"),
        "hardware",
        coercions={"dac_bits": _coerce_dac_bits},
    )
    values["oracle"] = _merge_section(
        OracleCheckConfig, defaults.oracle, raw.get("oracle"), "oracle"
    )
    values["waveform_export"] = _merge_section(
        WaveformExportConfig, defaults.waveform_export, raw.get("waveform_export"), "waveform_export"
    )
    try:
        cfg = CampaignConfig(**{**asdict_shallow(defaults), **values})
    except ValueError as exc:
        raise ConfigError("<root>", str(exc)) from exc
    return validate_config(cfg)


def asdict_shallow(cfg: CampaignConfig) -> dict:
    """Field dict keeping nested dataclasses as objects (asdict recurses)."""
    return {name: getattr(cfg, name) for name in cfg.__dataclass_fields__}


def load_config(path: str | None, overrides: dict | None = None) -> CampaignConfig:
    """Load the JSON config file (or defaults) and apply CLI overrides."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"invalid JSON in {path}: {exc}") from exc
    if overrides:
        raw = {**raw, **{k: v for k, v in overrides.items() if v is not None}}
    return config_from_dict(raw)


def config_to_dict(cfg: CampaignConfig) -> dict:
    """Fully-resolved plain dict (JSON-ready) for hashing and reports."""
    out = asdict(cfg)
    out["ebn0_grid_db"] = list(cfg.ebn0_grid_db)
    geo = out["geometry"]
    if geo["rx_positions_m"] is not None:
        geo["rx_positions_m"] = [list(p) for p in geo["rx_positions_m"]]
    return out


def config_hash(cfg: CampaignConfig) -> str:
    """Stable short hash of the fully-resolved configuration."""
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
