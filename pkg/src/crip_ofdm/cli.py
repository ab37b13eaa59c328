"""crip command-line interface.

Usage:
    crip ber            # BER vs Eb/N0, ideal front end
    crip clipnoise      # clipping-noise power vs drive variance
    crip degrade-dc     # BER vs LED bias shift at the operating Eb/N0
    crip degrade-gain   # BER vs amplifier-gain multiplier
    crip complexity     # transform operation counts
    crip rate           # bits per frame and bitrate of each scheme
    crip selftest       # fast deterministic checks

Exit codes: 0 success, 2 configuration error, 3 runtime / singular-channel error.
"""

import logging
import os
from pathlib import Path
from typing import Callable, List, Optional, TypeVar

import typer
from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .config import ExperimentConfig, load_config, with_overrides
from .errors import ConfigError, CripError, SizingError
from .frames import Scheme, frame_rate
from .harness import (
    DegradationKind,
    SweepResult,
    clipnoise_sweep,
    complexity_report,
    ber_sweep,
    degradation_sweep,
    run_selftest,
)

app = typer.Typer(
    name="crip",
    help="Real-valued optical OFDM simulation toolkit (Hermitian symmetry, E-CRIP, O-CRIP).",
    no_args_is_help=True,
)
console = Console()
logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_RUNTIME = 3

T = TypeVar("T")


def _configure_logging(verbose: bool) -> None:
    level = "DEBUG" if verbose else os.environ.get("CRIP_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging."),
):
    """Load .env defaults and set up logging."""
    load_dotenv()
    _configure_logging(verbose)


def _guarded(fn: Callable[[], T]) -> T:
    """Run fn, mapping toolkit errors onto exit codes."""
    try:
        return fn()
    except (ConfigError, SizingError, ValidationError, FileNotFoundError) as e:
        console.print(f"[red]Configuration error:[/red] {e}")
        raise typer.Exit(EXIT_CONFIG)
    except CripError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_RUNTIME)
    except Exception as e:
        logger.exception("Unexpected failure")
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_RUNTIME)


def _load(
    config: Optional[Path], seed: Optional[int], out_dir: Optional[Path], trials: Optional[int],
    workers: Optional[int] = None,
) -> ExperimentConfig:
    cfg = load_config(config)
    return with_overrides(cfg, seed=seed, out_dir=out_dir, max_frames=trials, workers=workers)


def _write(result: SweepResult, out_dir: Path, plot: bool = True) -> None:
    paths = result.write(out_dir, plot=plot)
    for p in paths:
        console.print(f"  [green]✓[/green] {p}")


def _ber_table(result: SweepResult, title: str) -> Table:
    table = Table(title=title, show_header=True, header_style="bold")
    table.add_column("Scheme", style="cyan")
    table.add_column(result.x_label, justify="right")
    table.add_column("BER", justify="right")
    table.add_column("95% CI" if result.metadata.get("confidence") == 0.95 else "CI", justify="right")
    table.add_column("Errors", justify="right")
    table.add_column("Frames", justify="right")
    for r in result.records:
        table.add_row(
            r.label, f"{r.x:g}", f"{r.ber:.3e}", f"[{r.ci_low:.2e}, {r.ci_high:.2e}]",
            str(r.bit_errors), str(r.frames),
        )
    return table


# Shared options
ConfigOpt = typer.Option(None, "--config", "-c", help="JSON experiment configuration.")
SeedOpt = typer.Option(None, "--seed", help="Base seed (overrides config).")
OutOpt = typer.Option(None, "--out-dir", "-o", help="Output directory (overrides config).")
TrialsOpt = typer.Option(None, "--trials", help="Max frames per point (overrides config).")
WorkersOpt = typer.Option(None, "--workers", "-j", help="Worker processes.")


# =============================================================================
# Sweeps
# =============================================================================


@app.command()
def ber(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    out_dir: Optional[Path] = OutOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
):
    """BER versus Eb/N0 for every configured scheme (ideal front end)."""
    def run():
        cfg = _load(config, seed, out_dir, trials, workers)
        result = ber_sweep(cfg)
        console.print(_ber_table(result, "BER vs Eb/N0"))
        _write(result, cfg.out_dir)

    _guarded(run)


@app.command()
def clipnoise(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    out_dir: Optional[Path] = OutOpt,
    samples: Optional[int] = typer.Option(None, "--samples", help="Monte-Carlo samples per point."),
):
    """Clipping-noise power versus drive variance (analytic and sampled)."""
    def run():
        cfg = with_overrides(_load(config, seed, out_dir, None), clip_samples=samples)
        result = clipnoise_sweep(
            cfg.clip_sigma2, cfg.clipper_config(), cfg.clip_samples, cfg.seed, cfg=cfg
        )
        table = Table(title="Clipping noise power", show_header=True, header_style="bold")
        for col in result.columns:
            table.add_column(col, justify="right")
        for row in result.rows():
            table.add_row(*(f"{v:.4e}" for v in row))
        console.print(table)
        _write(result, cfg.out_dir)

    _guarded(run)


def _degrade(kind: DegradationKind, config, seed, out_dir, trials, workers) -> None:
    def run():
        cfg = _load(config, seed, out_dir, trials, workers)
        result = degradation_sweep(kind, cfg)
        console.print(_ber_table(result, f"BER vs {result.x_label} at {cfg.operating_ebn0_db:g} dB"))
        gains = ", ".join(f"{k}={v:g}" for k, v in result.metadata["gains"].items())
        console.print(f"[dim]Amplifier gains: {gains}[/dim]")
        _write(result, cfg.out_dir)

    _guarded(run)


@app.command("degrade-dc")
def degrade_dc(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    out_dir: Optional[Path] = OutOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
):
    """BER versus LED bias shift."""
    _degrade(DegradationKind.DC_SHIFT, config, seed, out_dir, trials, workers)


@app.command("degrade-gain")
def degrade_gain(
    config: Optional[Path] = ConfigOpt,
    seed: Optional[int] = SeedOpt,
    out_dir: Optional[Path] = OutOpt,
    trials: Optional[int] = TrialsOpt,
    workers: Optional[int] = WorkersOpt,
):
    """BER versus amplifier gain above each scheme's optimum."""
    _degrade(DegradationKind.GAIN, config, seed, out_dir, trials, workers)


# =============================================================================
# Tables
# =============================================================================


@app.command()
def complexity(
    n: Optional[List[int]] = typer.Option(None, "--n", help="Subcarrier counts (repeatable)."),
    config: Optional[Path] = ConfigOpt,
    out_dir: Optional[Path] = OutOpt,
):
    """Multiplications and additions of each transmit transform."""
    def run():
        cfg = _load(config, None, out_dir, None)
        result = complexity_report(n or cfg.complexity_n)
        table = Table(title="Operation counts", show_header=True, header_style="bold")
        for col in result.columns:
            table.add_column(col, justify="right")
        for row in result.rows():
            table.add_row(*(str(v) for v in row))
        console.print(table)
        console.print(
            "[dim]CRIP receivers add N subtractions (Re - Im); "
            "Hermitian receivers add (N-2)/2 conjugations.[/dim]"
        )
        _write(result, cfg.out_dir, plot=False)

    _guarded(run)


@app.command()
def rate(
    n: int = typer.Option(64, "--n", help="Subcarriers."),
    m: int = typer.Option(8, "--m", help="Per-dimension modulation depth."),
    bandwidth: float = typer.Option(100e6, "--bandwidth", help="Bandwidth W in Hz."),
):
    """Bits per frame and bitrate W*R/N (cyclic prefix not counted)."""
    def run():
        base = frame_rate(Scheme.HERMITIAN, n, m, bandwidth_hz=bandwidth)
        table = Table(title=f"Rates at N={n}, M={m}, W={bandwidth / 1e6:g} MHz", header_style="bold")
        table.add_column("Scheme", style="cyan")
        table.add_column("Bits/frame", justify="right")
        table.add_column("Mbps", justify="right")
        table.add_column("Gain over Hermitian", justify="right")
        for label, s0 in (("hermitian", False), ("crip, s0 loaded", True), ("crip, s0 empty", False)):
            scheme = Scheme.HERMITIAN if label == "hermitian" else Scheme.ECRIP
            r = frame_rate(scheme, n, m, s0_loaded=s0, bandwidth_hz=bandwidth)
            gain = r.bitrate_bps - base.bitrate_bps
            table.add_row(
                label, str(r.bits_per_frame), f"{r.bitrate_bps / 1e6:g}",
                f"+{gain / 1e6:g} Mbps ({100 * gain / base.bitrate_bps:.1f}%)",
            )
        console.print(table)

    _guarded(run)


@app.command()
def selftest(seed: int = typer.Option(0, "--seed")):
    """Run the fast deterministic checks."""
    console.print(Panel.fit(f"[bold]crip-ofdm {__version__}[/bold]\nSelf test", border_style="blue"))
    checks = _guarded(lambda: run_selftest(seed))
    for c in checks:
        mark = "[green]✓[/green]" if c.passed else "[red]✗[/red]"
        detail = f" [dim]({c.detail})[/dim]" if c.detail else ""
        console.print(f"  {mark} {c.name}{detail}")

    if all(c.passed for c in checks):
        console.print("\n[bold green]All checks passed![/bold green]")
    else:
        console.print("\n[bold red]Some checks failed.[/bold red]")
        raise typer.Exit(EXIT_RUNTIME)


if __name__ == "__main__":
    app()
