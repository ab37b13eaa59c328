"""Experiment orchestration: BER, clipping-noise, degradation and complexity sweeps.

Every Monte-Carlo batch draws from RngStream(seed, (sweep, point, channel, batch)),
and early stopping is decided between batches in index order, so results do
not depend on the worker count. Sweep points fan out to a process pool and are
reduced in submission order.
"""

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np
from scipy.special import ndtri

from . import __version__
from .channel import ChannelModel, ClipperConfig, RngStream, channel_eigenvalues, propagate
from .clipnoise import (
    ClipRegime,
    clip_noise_power_ocrip,
    clip_noise_power_single,
    monte_carlo_ocrip,
    monte_carlo_single,
    q_function,
)
from .config import ExperimentConfig
from .errors import ConfigError, DomainError
from .frames import FrameLayout, Scheme, build_frame, default_modulation, map_bits, symbols_per_frame
from .modem import LinkConfig, noise_power_for_ebn0, run_batch, rx, tx
from .transforms import TransformMethod, op_count, receiver_extras

logger = logging.getLogger(__name__)

INTERVAL_METHOD = "wilson"


class _Stream(int, Enum):
    """First spawn-key component; keeps the sweeps' random streams disjoint."""

    BER = 0
    GAIN_SEARCH = 1
    DEGRADE_DC = 2
    DEGRADE_GAIN = 3


# =============================================================================
# Statistics
# =============================================================================


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    z = float(ndtri(0.5 + confidence / 2.0))
    p = errors / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + z2n / 2.0) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def theoretical_ber_pam(order_m: int, ebn0_db: float) -> float:
    """Gray M-PAM bit error rate over AWGN (also per-dimension M^2-QAM).

    M = 2 reduces to Q(sqrt(2 Eb/N0)).
    """
    k = int(order_m).bit_length() - 1
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    arg = math.sqrt(6.0 * k * ebn0 / (order_m**2 - 1))
    return float(2.0 * (order_m - 1) / (order_m * k) * q_function(arg))


# =============================================================================
# Results
# =============================================================================


@dataclass(frozen=True)
class BerRecord:
    scheme: Scheme
    s0_loaded: bool
    x: float
    ber: float
    ci_low: float
    ci_high: float
    bit_errors: int
    bits: int
    frames: int
    clip_rate: float = 0.0

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0

    @property
    def label(self) -> str:
        if self.scheme is Scheme.HERMITIAN:
            return self.scheme.value
        return f"{self.scheme.value}-{'s0' if self.s0_loaded else 'nos0'}"

    def as_row(self) -> list[Any]:
        return [
            self.scheme.value, self.s0_loaded, self.x, self.ber, self.ci_low,
            self.ci_high, self.half_width, self.bit_errors, self.bits, self.frames,
            self.clip_rate,
        ]


def _ber_columns(x_label: str) -> list[str]:
    return [
        "scheme", "s0_loaded", x_label, "ber", "ci_low", "ci_high", "half_width",
        "bit_errors", "bits", "frames", "clip_rate",
    ]


@dataclass(frozen=True)
class ClipNoiseRecord:
    sigma_x2: float
    analytic_single: float
    analytic_ocrip: float
    mc_single: float
    mc_ocrip: float
    mc_stderr: float

    def as_row(self) -> list[Any]:
        return list(asdict(self).values())


CLIPNOISE_COLUMNS = ["sigma_x2", "analytic_single", "analytic_ocrip", "mc_single", "mc_ocrip", "mc_stderr"]


@dataclass(frozen=True)
class ComplexityRecord:
    n: int
    method: TransformMethod
    multiplications: int
    additions: int
    rx_subtractions: int
    rx_conjugations: int

    def as_row(self) -> list[Any]:
        return [
            self.n, self.method.value, self.multiplications, self.additions,
            self.rx_subtractions, self.rx_conjugations,
        ]


COMPLEXITY_COLUMNS = ["n", "method", "multiplications", "additions", "rx_subtractions", "rx_conjugations"]


@dataclass
class SweepResult:
    """Typed records of one sweep plus reproducibility metadata."""

    name: str
    x_label: str
    columns: list[str]
    records: list
    metadata: dict[str, Any] = field(default_factory=dict)

    def rows(self) -> list[list[Any]]:
        return [r.as_row() for r in self.records]

    def write_csv(self, path: Path) -> Path:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.columns)
            for row in self.rows():
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return path

    def write(self, out_dir: Path, plot: bool = True) -> list[Path]:
        """Write <name>.csv, <name>.meta.json and (optionally) <name>.gp."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [self.write_csv(out_dir / f"{self.name}.csv")]

        meta_path = out_dir / f"{self.name}.meta.json"
        meta_path.write_text(json.dumps(self.metadata, indent=2, sort_keys=True) + "\n")
        paths.append(meta_path)

        if plot:
            gp_path = out_dir / f"{self.name}.gp"
            gp_path.write_text(_plot_script(self))
            paths.append(gp_path)

        for p in paths:
            logger.info("Wrote %s", p)
        return paths


def _plot_script(result: SweepResult) -> str:
    data = f"{result.name}.csv"
    lines = [
        "# gnuplot script",
        'set datafile separator ","',
        "set logscale y",
        "set grid",
        f"set xlabel '{result.x_label}'",
        "set terminal pngcairo size 900,600",
        f"set output '{result.name}.png'",
    ]
    if result.columns == CLIPNOISE_COLUMNS:
        lines.append("set ylabel 'clipping noise power'")
        plots = [
            f"'{data}' every ::1 using 1:{i + 1} with linespoints title '{col}'"
            for i, col in enumerate(result.columns[1:5], start=1)
        ]
    else:
        lines.append("set ylabel 'BER'")
        x_col = result.columns.index(result.x_label) + 1
        labels = list(dict.fromkeys((r.scheme.value, r.s0_loaded, r.label) for r in result.records))
        plots = [
            f"'{data}' every ::1 using {x_col}:(strcol(1) eq '{scheme}' && "
            f"strcol(2) eq '{s0}' ? $4 : 1/0) with linespoints title '{label}'"
            for scheme, s0, label in labels
        ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def _metadata(cfg: ExperimentConfig, sweep: str, **extra: Any) -> dict[str, Any]:
    meta = {
        "sweep": sweep,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "interval": INTERVAL_METHOD,
        "confidence": cfg.confidence,
        "max_frames": cfg.max_frames,
        "max_bit_errors": cfg.max_bit_errors,
        "n_subcarriers": cfg.n_subcarriers,
        "cp_length": cfg.cp_length,
    }
    meta.update(extra)
    return meta


# =============================================================================
# Monte-Carlo points
# =============================================================================


@dataclass(frozen=True)
class PointTask:
    """One sweep point: the same link over one or more channels."""

    stream: tuple[int, int]
    links: tuple[LinkConfig, ...]
    seed: int
    max_frames: int
    frames_per_batch: int
    max_bit_errors: int


@dataclass(frozen=True)
class PointOutcome:
    bit_errors: int
    bits: int
    frames: int
    clip_events: int
    samples: int


def run_point(task: PointTask) -> PointOutcome:
    """Run batches until the error target or the frame budget is reached.

    With several channels (tap files) each gets the full frame budget and an
    equal share of the error target; counts are pooled, so the BER is the
    average over channels.
    """
    error_target = math.ceil(task.max_bit_errors / len(task.links))
    errors = bits = frames = events = samples = 0
    for c, link in enumerate(task.links):
        link_errors = link_frames = batch = 0
        while link_frames < task.max_frames and link_errors < error_target:
            count = min(task.frames_per_batch, task.max_frames - link_frames)
            rng = RngStream(task.seed, (*task.stream, c, batch))
            diag = run_batch(link, count, rng)
            link_errors += diag.bit_errors
            link_frames += diag.frames
            bits += diag.bits
            events += diag.clip_events
            samples += diag.samples
            batch += 1
        logger.debug(
            "point %s channel %d: %d errors in %d frames (%d batches)",
            task.stream, c, link_errors, link_frames, batch,
        )
        errors += link_errors
        frames += link_frames
    return PointOutcome(errors, bits, frames, events, samples)


def _map_points(tasks: list[PointTask], workers: int) -> list[PointOutcome]:
    if workers <= 1 or len(tasks) <= 1:
        return [run_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_point, tasks))


def _record(
    scheme: Scheme, s0: bool, x: float, outcome: PointOutcome, confidence: float
) -> BerRecord:
    ber = outcome.bit_errors / outcome.bits if outcome.bits else 0.0
    lo, hi = wilson_interval(outcome.bit_errors, outcome.bits, confidence)
    return BerRecord(
        scheme=scheme,
        s0_loaded=s0,
        x=float(x),
        ber=ber,
        ci_low=lo,
        ci_high=hi,
        bit_errors=outcome.bit_errors,
        bits=outcome.bits,
        frames=outcome.frames,
        clip_rate=outcome.clip_events / outcome.samples if outcome.samples else 0.0,
    )


def _task(cfg: ExperimentConfig, stream: tuple[int, int], links: Iterable[LinkConfig]) -> PointTask:
    return PointTask(
        stream=stream,
        links=tuple(links),
        seed=cfg.seed,
        max_frames=cfg.max_frames,
        frames_per_batch=cfg.frames_per_batch,
        max_bit_errors=cfg.max_bit_errors,
    )


def _checked_channels(cfg: ExperimentConfig) -> list[ChannelModel]:
    """Build the configured channels and fail before any trial if one is singular."""
    channels = cfg.build_channels()
    for i, ch in enumerate(channels):
        try:
            channel_eigenvalues(ch)
        except Exception:
            logger.error("Channel %d (%s) cannot be equalized", i, np.array2string(ch.taps))
            raise
    return channels


def _links(
    cfg: ExperimentConfig,
    channels: list[ChannelModel],
    scheme: Scheme,
    s0: bool,
    noise_power: float,
    clipper: ClipperConfig | None = None,
) -> list[LinkConfig]:
    return [
        LinkConfig(
            scheme=scheme,
            channel=ch.with_noise(noise_power),
            cp_length=cfg.cp_length,
            spec=cfg.modulation_for(scheme),
            clipper=clipper,
            s0_loaded=s0 if scheme.layout is FrameLayout.CRIP else True,
        )
        for ch in channels
    ]


def _bits_per_frame(cfg: ExperimentConfig, channels: list[ChannelModel], scheme: Scheme, s0: bool) -> int:
    return _links(cfg, channels[:1], scheme, s0, 0.0)[0].bits_per_frame


# =============================================================================
# Sweeps
# =============================================================================


def ber_sweep(cfg: ExperimentConfig) -> SweepResult:
    """BER versus Eb/N0 with an ideal (unclipped) front end.

    Raises:
        SingularChannelError: If a configured channel cannot be equalized.
    """
    channels = _checked_channels(cfg)
    keys, tasks = [], []
    for scheme in cfg.schemes:
        for s0 in cfg.s0_modes(scheme):
            bpf = _bits_per_frame(cfg, channels, scheme, s0)
            for ebn0 in cfg.ebn0_db:
                noise = noise_power_for_ebn0(ebn0, 1.0, cfg.n_subcarriers, bpf)
                keys.append((scheme, s0, ebn0))
                tasks.append(
                    _task(cfg, (_Stream.BER, len(tasks)), _links(cfg, channels, scheme, s0, noise))
                )

    logger.info(
        "BER sweep: %d point(s) over %d channel(s), seed %d", len(tasks), len(channels), cfg.seed
    )
    outcomes = _map_points(tasks, cfg.workers)
    records = [
        _record(scheme, s0, ebn0, out, cfg.confidence)
        for (scheme, s0, ebn0), out in zip(keys, outcomes)
    ]
    for r in records:
        logger.info("  %-10s Eb/N0=%5.1f dB  BER=%.3e (%d errors)", r.label, r.x, r.ber, r.bit_errors)
    return SweepResult(
        name="ber",
        x_label="ebn0_db",
        columns=_ber_columns("ebn0_db"),
        records=records,
        metadata=_metadata(cfg, "ber", channels=len(channels)),
    )


def clipnoise_sweep(
    sigma2_grid: Iterable[float],
    clipper: ClipperConfig,
    n_samples: int = 1_000_000,
    seed: int = 0,
    cfg: ExperimentConfig | None = None,
) -> SweepResult:
    """Analytic and sampled clipping-noise power for single-branch and O-CRIP drives.

    A point whose regime is degenerate is logged and written as NaN; the sweep
    continues.
    """
    lower, upper = clipper.lower, clipper.upper
    if not lower < 0 < upper:
        raise ConfigError(f"Clip bounds must satisfy B < 0 < T, got B={lower}, T={upper}")

    records = []
    for i, sigma2 in enumerate(sigma2_grid):
        try:
            regime = ClipRegime(sigma2, lower, upper)
            single = monte_carlo_single(regime, n_samples, seed=seed + i)
            ocrip = monte_carlo_ocrip(sigma2, lower, upper, n_samples, seed=seed + i)
        except DomainError as e:
            logger.warning("Skipping sigma^2=%g: %s", sigma2, e)
            nan = float("nan")
            records.append(ClipNoiseRecord(float(sigma2), nan, nan, nan, nan, nan))
            continue
        records.append(
            ClipNoiseRecord(
                sigma_x2=float(sigma2),
                analytic_single=single.analytic,
                analytic_ocrip=ocrip.analytic,
                mc_single=single.monte_carlo,
                mc_ocrip=ocrip.monte_carlo,
                mc_stderr=max(single.stderr, ocrip.stderr),
            )
        )
        logger.info(
            "  sigma^2=%-6g single=%.4e (MC %.4e)  ocrip=%.4e (MC %.4e)",
            sigma2, single.analytic, single.monte_carlo, ocrip.analytic, ocrip.monte_carlo,
        )

    meta = {"sweep": "clipnoise", "seed": seed, "version": __version__, "samples": n_samples,
            "lower": lower, "upper": upper}
    if cfg is not None:
        meta["config_hash"] = cfg.config_hash()
    return SweepResult("clipnoise", "sigma_x2", CLIPNOISE_COLUMNS, records, meta)


def analytic_clip_curves(sigma2_grid: Iterable[float], clipper: ClipperConfig) -> list[tuple[float, float, float]]:
    """(sigma^2, single-branch, O-CRIP) closed-form powers without sampling."""
    return [
        (
            float(s2),
            clip_noise_power_single(ClipRegime(s2, clipper.lower, clipper.upper)),
            clip_noise_power_ocrip(s2, clipper.lower, clipper.upper),
        )
        for s2 in sigma2_grid
    ]


@dataclass(frozen=True)
class GainSearch:
    gain: float
    grid: tuple[float, ...]
    ber: tuple[float, ...]


def _clipping_noise_power(cfg: ExperimentConfig, scheme: Scheme, s0: bool, ebn0_db: float,
                          channels: list[ChannelModel]) -> float:
    """Receiver noise fixed by Eb/N0 at the reference drive level."""
    bpf = _bits_per_frame(cfg, channels, scheme, s0)
    return noise_power_for_ebn0(ebn0_db, cfg.drive_reference() ** 2, cfg.n_subcarriers, bpf)


def optimum_gain_search(
    scheme: Scheme,
    clipper: ClipperConfig,
    channels: ChannelModel | list[ChannelModel],
    ebn0_db: float,
    cfg: ExperimentConfig,
    s0_loaded: bool = True,
    gain_grid: Iterable[float] | None = None,
) -> GainSearch:
    """Grid search for the amplifier gain with the lowest measured BER.

    The receiver noise is held at the level set by ``ebn0_db`` for the reference
    drive, so raising the gain trades noise for clipping. A gain whose
    confidence interval overlaps that of the lowest BER counts as a tie, and
    ties go to the smaller gain. Deterministic for a given seed.

    Raises:
        ConfigError: If the gain grid is empty.
    """
    grid = sorted(float(g) for g in (cfg.gain_grid if gain_grid is None else gain_grid))
    if not grid:
        raise ConfigError("Gain search needs a nonempty grid")
    if isinstance(channels, ChannelModel):
        channels = [channels]
    scheme = Scheme(scheme)
    s0 = s0_loaded if scheme.layout is FrameLayout.CRIP else True

    noise = _clipping_noise_power(cfg, scheme, s0, ebn0_db, channels)
    point_base = list(Scheme).index(scheme) * 1000 + (0 if s0 else 500)
    tasks = [
        _task(cfg, (_Stream.GAIN_SEARCH, point_base + i),
              _links(cfg, channels, scheme, s0, noise, clipper.with_gain(g)))
        for i, g in enumerate(grid)
    ]
    outcomes = _map_points(tasks, cfg.workers)
    bers = [o.bit_errors / o.bits for o in outcomes]
    intervals = [wilson_interval(o.bit_errors, o.bits, cfg.confidence) for o in outcomes]
    lowest = min(range(len(grid)), key=lambda i: (bers[i], i))
    low, high = intervals[lowest]
    best = next(i for i, (lo, hi) in enumerate(intervals) if lo <= high and hi >= low)
    logger.info(
        "Optimum gain for %s: %g (BER %.3e; lowest %.3e at %g)",
        scheme.value, grid[best], bers[best], bers[lowest], grid[lowest],
    )
    return GainSearch(gain=grid[best], grid=tuple(grid), ber=tuple(bers))


class DegradationKind(str, Enum):
    DC_SHIFT = "dc_shift"
    GAIN = "gain"


def degradation_sweep(kind: DegradationKind | str, cfg: ExperimentConfig) -> SweepResult:
    """BER versus LED bias shift or amplifier-gain multiplier at a fixed Eb/N0.

    Each scheme starts from its own optimum gain (or ``cfg.common_gain`` when
    set). O-CRIP branches clip independently.
    """
    kind = DegradationKind(kind)
    channels = _checked_channels(cfg)
    base = cfg.clipper_config()
    ebn0 = cfg.operating_ebn0_db

    keys, tasks, gains = [], [], {}
    stream = _Stream.DEGRADE_DC if kind is DegradationKind.DC_SHIFT else _Stream.DEGRADE_GAIN
    grid = cfg.dc_shifts if kind is DegradationKind.DC_SHIFT else cfg.gain_multipliers
    for scheme in cfg.schemes:
        for s0 in cfg.s0_modes(scheme):
            if cfg.common_gain is not None:
                gain = cfg.common_gain
            else:
                gain = optimum_gain_search(scheme, base, channels, ebn0, cfg, s0).gain
            label = scheme.value if scheme is Scheme.HERMITIAN else f"{scheme.value}-{int(s0)}"
            gains[label] = gain
            noise = _clipping_noise_power(cfg, scheme, s0, ebn0, channels)
            for x in grid:
                if kind is DegradationKind.DC_SHIFT:
                    clipper = base.shifted(x).with_gain(gain)
                else:
                    clipper = base.with_gain(gain * x)
                keys.append((scheme, s0, x))
                tasks.append(
                    _task(cfg, (stream, len(tasks)), _links(cfg, channels, scheme, s0, noise, clipper))
                )

    logger.info("Degradation sweep (%s) at %.1f dB: %d point(s)", kind.value, ebn0, len(tasks))
    outcomes = _map_points(tasks, cfg.workers)
    records = [
        _record(scheme, s0, x, out, cfg.confidence) for (scheme, s0, x), out in zip(keys, outcomes)
    ]
    x_label = "dc_shift" if kind is DegradationKind.DC_SHIFT else "gain_multiplier"
    return SweepResult(
        name=f"degrade_{kind.value}",
        x_label=x_label,
        columns=_ber_columns(x_label),
        records=records,
        metadata=_metadata(
            cfg, f"degrade_{kind.value}", operating_ebn0_db=ebn0, gains=gains,
            reference_drive_std=cfg.drive_reference(),
        ),
    )


def complexity_report(ns: Iterable[int]) -> SweepResult:
    """Operation counts of all four transmit methods plus receiver extras.

    Raises:
        SizingError: If any N is not a power of two >= 8.
    """
    records = []
    for n in ns:
        for method in TransformMethod:
            ops = op_count(method, n)
            extras = receiver_extras(method, n)
            records.append(
                ComplexityRecord(n, method, ops.multiplications, ops.additions,
                                 extras.subtractions, extras.conjugations)
            )
    meta = {"sweep": "complexity", "version": __version__}
    return SweepResult("complexity", "n", COMPLEXITY_COLUMNS, records, meta)


# =============================================================================
# Self test
# =============================================================================


@dataclass(frozen=True)
class SelftestCheck:
    name: str
    passed: bool
    detail: str = ""


# Published operation counts: (method, N) -> (multiplications, additions)
_REFERENCE_COUNTS = {
    (TransformMethod.OCRIP, 64): (98, 420),
    (TransformMethod.HERMITIAN, 512): (3076, 12292),
    (TransformMethod.DCT, 8): (12, 29),
    (TransformMethod.ECRIP, 128): (258, 1156),
}


def _check_counts() -> SelftestCheck:
    bad = [
        f"{m.value}@{n}"
        for (m, n), expected in _REFERENCE_COUNTS.items()
        if (op_count(m, n).multiplications, op_count(m, n).additions) != expected
    ]
    return SelftestCheck("operation counts", not bad, ", ".join(bad))


def _check_rates() -> SelftestCheck:
    from .frames import frame_rate

    h = frame_rate(Scheme.HERMITIAN, 64, 8).bitrate_bps
    full = frame_rate(Scheme.ECRIP, 64, 8, s0_loaded=True).bitrate_bps
    empty = frame_rate(Scheme.ECRIP, 64, 8, s0_loaded=False).bitrate_bps
    ok = h == 290.625e6 and full - h == 9.375e6 and empty - h == 4.6875e6
    return SelftestCheck("rate arithmetic", ok, f"{h / 1e6} / +{(full - h) / 1e6} / +{(empty - h) / 1e6} Mbps")


def _check_isi(seed: int, trials: int = 20) -> SelftestCheck:
    worst = 0.0
    gen = RngStream(seed, (99,)).generator()
    for _ in range(trials):
        taps = np.concatenate([[1.0], gen.uniform(0.0, 0.6, size=int(gen.integers(0, 9)))])
        ch = ChannelModel(taps, 0.0, 64)
        for scheme in Scheme:
            spec = default_modulation(scheme, 4)
            count = symbols_per_frame(scheme, 64)
            x = map_bits(gen.integers(0, 2, size=count * spec.bits_per_symbol), spec)
            received = tuple(propagate(b, ch) for b in tx(build_frame(x, 64, scheme), 8, scheme).branches)
            err = rx(received, ch, scheme) - x.values
            worst = max(worst, float(np.sqrt(np.mean(np.abs(err) ** 2))))
    return SelftestCheck("noiseless ISI elimination", worst < 1e-9, f"max RMS error {worst:.1e}")


def _check_lemmas(seed: int) -> SelftestCheck:
    from .transforms import dft, split_even_odd_parts

    frames = RngStream(seed, (98,)).generator().standard_normal((200, 64))
    s_fr, s_fi = split_even_odd_parts(frames)
    worst = max(np.abs(dft(s_fr).imag).max(), np.abs(dft(s_fi).real).max())
    return SelftestCheck("real/imaginary part symmetry", bool(worst < 1e-10), f"max residue {worst:.2e}")


def _check_clip_ordering() -> SelftestCheck:
    curves = analytic_clip_curves([0.05, 0.1, 0.25, 0.5, 1.0], ClipperConfig())
    ok = all(ocrip < single for _, single, ocrip in curves)
    return SelftestCheck("two-LED clipping noise below single LED", ok)


SELFTEST_CHECKS: list[Callable[[int], SelftestCheck]] = [
    lambda seed: _check_counts(),
    lambda seed: _check_rates(),
    _check_isi,
    _check_lemmas,
    lambda seed: _check_clip_ordering(),
]


def run_selftest(seed: int = 0) -> list[SelftestCheck]:
    """Fast deterministic checks of the core identities."""
    return [check(seed) for check in SELFTEST_CHECKS]
