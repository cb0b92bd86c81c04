#!/usr/bin/env python3
"""CLI entry point for the hybrid turbo decoding simulator."""

from pathlib import Path

import click
from click.core import ParameterSource
from rich.table import Table

from src.hybrid import MLD_SCHEME, NAMED_SCHEMES, Detection, default_eta, parse_scheme
from src.report import ebn0_at_fer, load_results, summary_table
from src.runner import SpecError, console, load_config, parse_spec, run_sweep
from src.turbo import CodeConfig

# flags that feed parse_spec, by parameter name
SPEC_OPTIONS = (
    "k", "scheme", "ebn0", "frames_max", "errors_min", "seed", "eta", "osd_order", "osd_start_iter",
    "accum_alpha", "max_iters", "detection", "crc_mode", "extrinsic_scale", "out", "format", "workers",
)


@click.group()
def cli():
    """Monte Carlo FER/UER sweeps for CRC-aided hybrid turbo decoding."""
    pass


@cli.command()
@click.option("--k", type=int, default=None, help="Code block size (LTE QPP size, CRC included).")
@click.option("--scheme", default=None, help="Scheme name, e.g. 'STD+OSD(2,1,0)+CRC-aided'. See `schemes`.")
@click.option("--ebn0", default=None, help="Comma list of Eb/N0 points in dB.")
@click.option("--frames-max", type=int, default=None, help="Stop a point after this many frames.")
@click.option("--errors-min", type=int, default=None, help="Stop a point after this many frame errors.")
@click.option("--seed", type=int, default=None, help="Master seed.")
@click.option("--eta", type=float, default=None, help="NED threshold in [0, 1].")
@click.option("--osd-order", type=int, default=None, help="OSD order N (0..2).")
@click.option("--osd-start-iter", default=None, help="First iteration running OSD (1..T, or 'T').")
@click.option("--accum-alpha", type=float, default=None, help="LLR accumulation factor.")
@click.option("--max-iters", type=int, default=None, help="Turbo iterations T.")
@click.option("--detection", type=click.Choice(["crc", "ned", "genie"]), default=None)
@click.option("--crc-mode", type=click.Choice(["aided", "filter"]), default=None)
@click.option("--extrinsic-scale", type=float, default=None, help="Extrinsic LLR scaling factor.")
@click.option("--out", default=None, help="Output file (default: results/k<k>_<scheme>.<format>).")
@click.option("--format", "format", type=click.Choice(["csv", "json"]), default=None)
@click.option("--workers", type=int, default=None, help="Worker processes for Eb/N0 points.")
@click.option("--config", "config_file", default=None, help="Scenario YAML; wins over flags.")
@click.option("--defaults", "defaults_file", default="config.yaml", show_default=True,
              help="Runtime defaults YAML.")
@click.pass_context
def run(ctx, config_file, defaults_file, **options):
    """Run one Eb/N0 sweep."""
    explicit = {
        name for name in SPEC_OPTIONS
        if ctx.get_parameter_source(name) is ParameterSource.COMMANDLINE
    }
    try:
        spec = parse_spec(options, config_file, explicit, load_config(defaults_file))
    except SpecError as e:
        raise click.UsageError(str(e)) from None
    try:
        run_sweep(spec)
    except OSError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise SystemExit(1)
    click.echo(f"Results: {spec.out}")


@cli.command()
@click.option("--input", "input_path", required=True, help="Results file (CSV or JSON).")
@click.option("--target-fer", type=float, default=None, help="Also report the Eb/N0 reaching this FER.")
def report(input_path, target_fer):
    """Summarise a results file."""
    p = Path(input_path)
    if not p.exists():
        click.echo(f"Results file not found: {p}")
        click.echo("Run a sweep first: python run.py run --k 40 --scheme STD --ebn0 0,1,2")
        raise SystemExit(1)

    config, points = load_results(p)
    console.print(summary_table(points, f"{config.get('scheme', '?')} (k={config.get('k', '?')})"))
    if target_fer is not None:
        ebn0 = ebn0_at_fer(points, target_fer)
        if ebn0 is None:
            click.echo(f"FER {target_fer:g} not reached")
        else:
            click.echo(f"FER {target_fer:g} at {ebn0:.3f} dB")


@cli.command()
@click.option("--k", type=int, default=40, show_default=True)
def schemes(k):
    """List the named schemes and the default NED threshold for k."""
    try:
        code = CodeConfig.for_size(k)
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    click.echo(f"k={code.k}, m={code.m}, rate={code.rate}, default eta={default_eta(code.k):g}")
    table = Table(title="Named schemes")
    for column in ("Scheme", "N", "f", "alpha", "CRC", "Detection", "eta"):
        table.add_column(column, no_wrap=column == "Scheme")
    for name in NAMED_SCHEMES:
        if name == MLD_SCHEME:
            table.add_row(name, "-", "-", "-", "-", "-", "-")
            continue
        cfg = parse_scheme(name)
        if not cfg.uses_osd:
            table.add_row(name, "-", "-", "-", "-", cfg.detection.value, "-")
            continue
        eta = f"{cfg.resolved_eta(code.k):g}" if cfg.detection is Detection.NED else "-"
        table.add_row(name, str(cfg.osd_order), str(cfg.start_iteration), f"{cfg.accum_alpha:g}",
                      cfg.crc_mode.value, cfg.detection.value, eta)
    console.print(table)


if __name__ == "__main__":
    cli()
