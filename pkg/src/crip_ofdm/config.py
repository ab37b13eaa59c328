"""Experiment configuration: pydantic model plus JSON loader.

A configuration file is a JSON object whose keys are ExperimentConfig fields,
e.g.

    {
      "schemes": ["hermitian", "ecrip", "ocrip"],
      "n_subcarriers": 64,
      "cp_length": 8,
      "order_m": 4,
      "ebn0_db": [0, 4, 8, 12],
      "seed": 7
    }

Unset fields fall back to environment defaults (CRIP_OUT_DIR, CRIP_SEED,
CRIP_WORKERS) and then to the model defaults.
"""

import hashlib
import json
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .channel import ChannelModel, ClipperConfig
from .errors import ConfigError
from .frames import Modulation, ModulationSpec, Scheme
from .validation import is_power_of_two

logger = logging.getLogger(__name__)

# Environment variables consulted for defaults
_ENV_DEFAULTS = {
    "CRIP_OUT_DIR": "out_dir",
    "CRIP_SEED": "seed",
    "CRIP_WORKERS": "workers",
}


class ChannelPreset(str, Enum):
    IDENTITY = "identity"
    EXPONENTIAL = "exponential"


class ClipperSettings(BaseModel):
    """LED operating point in volts."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    v_th: float = 2.65
    v_st: float = 3.15
    v_dc: float = 2.9

    @model_validator(mode="after")
    def _check_order(self) -> "ClipperSettings":
        if not self.v_th < self.v_dc < self.v_st:
            raise ValueError("clipper needs v_th < v_dc < v_st")
        return self


def _default_gain_grid() -> list[float]:
    return [round(0.04 + 0.01 * i, 2) for i in range(17)]


class ExperimentConfig(BaseModel):
    """Everything a sweep needs; a sweep is a pure function of this plus the seed."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Link
    schemes: list[Scheme] = Field(
        default_factory=lambda: [Scheme.HERMITIAN, Scheme.ECRIP, Scheme.OCRIP]
    )
    s0_loaded: list[bool] = Field(default_factory=lambda: [True])
    n_subcarriers: int = 64
    cp_length: int = 8
    order_m: int = 4
    hermitian_modulation: Modulation = Modulation.QAM
    crip_modulation: Modulation = Modulation.PAM

    # Channel
    channel: ChannelPreset = ChannelPreset.IDENTITY
    channel_memory: int = 4
    channel_decay: float = 1.5
    tap_files: list[Path] = Field(default_factory=list)

    # BER sweep
    ebn0_db: list[float] = Field(default_factory=lambda: [float(x) for x in range(0, 21, 2)])
    max_frames: int = 100_000
    frames_per_batch: int = 200
    max_bit_errors: int = 500
    confidence: float = 0.95

    # Front end
    clipper: ClipperSettings = Field(default_factory=ClipperSettings)
    operating_ebn0_db: float = 20.0
    reference_drive_std: float | None = None
    gain_grid: list[float] = Field(default_factory=_default_gain_grid)
    common_gain: float | None = None
    dc_shifts: list[float] = Field(default_factory=lambda: [0.0, 0.025, 0.05, 0.075, 0.1])
    gain_multipliers: list[float] = Field(default_factory=lambda: [1.0, 1.25, 1.5, 1.75, 2.0])

    # Clipping-noise sweep
    clip_sigma2: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.25, 0.5, 1.0])
    clip_samples: int = 1_000_000

    # Complexity table
    complexity_n: list[int] = Field(default_factory=lambda: [8, 16, 32, 64, 128, 256, 512])

    # Reporting
    bandwidth_hz: float = 100e6
    seed: int = 0
    out_dir: Path = Path("results")
    workers: int = 1

    @field_validator("schemes", "s0_loaded", "ebn0_db", "gain_grid", "dc_shifts",
                     "gain_multipliers", "clip_sigma2", "complexity_n")
    @classmethod
    def _nonempty(cls, v: list, info) -> list:
        if not v:
            raise ValueError(f"{info.field_name} must not be empty")
        return v

    @field_validator("n_subcarriers")
    @classmethod
    def _check_n(cls, v: int) -> int:
        if not is_power_of_two(v) or v < 8:
            raise ValueError(f"n_subcarriers must be a power of two >= 8, got {v}")
        return v

    @field_validator("complexity_n")
    @classmethod
    def _check_complexity_n(cls, v: list[int]) -> list[int]:
        bad = [n for n in v if not is_power_of_two(n) or n < 8]
        if bad:
            raise ValueError(f"complexity_n entries must be powers of two >= 8, got {bad}")
        return v

    @field_validator("order_m")
    @classmethod
    def _check_m(cls, v: int) -> int:
        if not is_power_of_two(v) or v < 2:
            raise ValueError(f"order_m must be a power of two >= 2, got {v}")
        return v

    @field_validator("max_frames", "frames_per_batch", "max_bit_errors", "clip_samples", "workers")
    @classmethod
    def _positive(cls, v: int, info) -> int:
        if v < 1:
            raise ValueError(f"{info.field_name} must be >= 1, got {v}")
        return v

    @field_validator("gain_grid", "gain_multipliers", "clip_sigma2")
    @classmethod
    def _positive_grid(cls, v: list[float], info) -> list[float]:
        if any(x <= 0 for x in v):
            raise ValueError(f"{info.field_name} entries must be > 0")
        return v

    @field_validator("confidence")
    @classmethod
    def _check_confidence(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError(f"confidence must be in (0, 1), got {v}")
        return v

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"seed must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def _check_link(self) -> "ExperimentConfig":
        if not 0 <= self.cp_length < self.n_subcarriers:
            raise ValueError(
                f"cp_length must be in [0, {self.n_subcarriers}), got {self.cp_length}"
            )
        if self.crip_modulation is not Modulation.PAM:
            raise ValueError("CRIP schemes carry real symbols: crip_modulation must be 'pam'")
        if self.channel is ChannelPreset.EXPONENTIAL and not self.tap_files:
            if self.channel_memory > self.cp_length:
                raise ValueError(
                    f"channel_memory {self.channel_memory} exceeds cp_length {self.cp_length}"
                )
        led = self.clipper
        outside = [x for x in self.dc_shifts if not led.v_th < led.v_dc + x < led.v_st]
        if outside:
            raise ValueError(
                f"dc_shifts {outside} move v_dc={led.v_dc} outside ({led.v_th}, {led.v_st})"
            )
        if self.reference_drive_std is not None and self.reference_drive_std <= 0:
            raise ValueError("reference_drive_std must be > 0")
        if self.common_gain is not None and self.common_gain <= 0:
            raise ValueError("common_gain must be > 0")
        return self

    # -------------------------------------------------------------------------

    def modulation_for(self, scheme: Scheme) -> ModulationSpec:
        if scheme is Scheme.HERMITIAN:
            return ModulationSpec(self.hermitian_modulation, self.order_m)
        return ModulationSpec(self.crip_modulation, self.order_m)

    def s0_modes(self, scheme: Scheme) -> list[bool]:
        """s0 loading variants to run; the Hermitian layout has none."""
        return [False] if scheme is Scheme.HERMITIAN else list(dict.fromkeys(self.s0_loaded))

    def build_channels(self) -> list[ChannelModel]:
        """One channel per tap file, or the configured preset.

        Raises:
            FileNotFoundError: If a tap file is missing.
        """
        n = self.n_subcarriers
        if self.tap_files:
            return [ChannelModel.from_tap_file(p, n) for p in self.tap_files]
        if self.channel is ChannelPreset.EXPONENTIAL:
            return [ChannelModel.exponential(n, self.channel_memory, self.channel_decay)]
        return [ChannelModel.identity(n)]

    def clipper_config(self, gain: float = 1.0) -> ClipperConfig:
        return ClipperConfig(self.clipper.v_th, self.clipper.v_st, self.clipper.v_dc, gain)

    def drive_reference(self) -> float:
        """Drive standard deviation at which the nominal Eb/N0 is defined for clipping runs.

        Defaults to the nearer clip bound; below it the link is noise limited,
        above it clipping dominates.
        """
        if self.reference_drive_std is not None:
            return self.reference_drive_std
        clipper = self.clipper_config()
        return min(-clipper.lower, clipper.upper)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _env_defaults() -> dict[str, Any]:
    values = {}
    for var, field in _ENV_DEFAULTS.items():
        raw = os.environ.get(var, "").strip()
        if raw:
            values[field] = raw
    return values


def _validated(data: dict[str, Any], source: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration ({source}): {e}") from e


def load_config(path: str | Path | None = None) -> ExperimentConfig:
    """Load and validate an experiment configuration.

    Args:
        path: JSON file. Defaults to the CRIP_CONFIG_PATH env var; when neither
              is set, the model defaults (plus environment defaults) are used.

    Raises:
        FileNotFoundError: If the file doesn't exist.
        ConfigError: If the file is not valid JSON or fails validation.
    """
    if path is None:
        path = os.environ.get("CRIP_CONFIG_PATH") or None

    data = _env_defaults()
    if path is None:
        logger.debug("No configuration file; using defaults")
        return _validated(data, "defaults")

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Configuration not found: {path}")

    with open(path) as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in configuration: {e}")
    if not isinstance(raw, dict):
        raise ConfigError(f"Configuration must be a JSON object: {path}")

    data.update(raw)
    cfg = _validated(data, str(path))
    logger.info(
        "Loaded configuration: %d scheme(s), N=%d, seed=%d from %s",
        len(cfg.schemes), cfg.n_subcarriers, cfg.seed, path,
    )
    return cfg


def with_overrides(cfg: ExperimentConfig, **updates: Any) -> ExperimentConfig:
    """Re-validated copy of ``cfg`` with non-None ``updates`` applied."""
    changes = {k: v for k, v in updates.items() if v is not None}
    if not changes:
        return cfg
    return _validated({**cfg.model_dump(), **changes}, "overrides")
