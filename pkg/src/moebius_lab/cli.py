"""moebius-lab command line"""
import json
import logging
import sys

import click

from moebius_lab.core.errors import ConfigError
from moebius_lab.core.registry import get_registry
from moebius_lab.core.settings import load_settings

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _parse_tolerances(values) -> dict:
    out = {}
    for item in values:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--tol expects CHECK=VALUE, got '{item}'", field="tol")
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"--tol value for '{name}' is not a number: '{raw}'", field="tol")
        if not value > 0:
            raise ConfigError(f"--tol value for '{name}' must be positive, got {value}", field="tol")
        out[name] = value
    return out


def _config_error(e: ConfigError):
    click.echo(f"Error: {e}", err=True)
    if e.field:
        click.echo(f"Field: {e.field}", err=True)
    if e.line:
        click.echo(f"Line: {e.line}", err=True)
    sys.exit(EXIT_CONFIG)


@click.group()
@click.option("--verbose", is_flag=True, help="Show debug logs")
@click.option("--config", "config_path", default=None, help="Lab settings YAML (default: bundled moebius_lab/configs/default.yaml)")
@click.pass_context
def cli(ctx, verbose, config_path):
    """Moebius submanifold geometry lab"""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT)
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
@click.option("--out", default=None, help="Output path prefix (default: scenario 'output' or ./<name>)")
@click.option("--jobs", type=int, default=None, help="Worker threads (default: $MOEBIUS_LAB_JOBS or settings)")
@click.option("--tol", "tolerances", multiple=True, metavar="CHECK=VAL", help="Override a check tolerance")
@click.option("--detail", is_flag=True, help="Print every failing point")
@click.pass_context
def run(ctx, scenario_file, out, jobs, tolerances, detail):
    """Run a scenario file and write its report"""
    from moebius_lab.engine.runner import exit_status, run_scenario
    from moebius_lab.presentations import BriefPresentation, ComprehensivePresentation

    try:
        settings = load_settings(ctx.obj.get("config_path"))
        report = run_scenario(scenario_file, out=out, jobs=jobs, tol_overrides=_parse_tolerances(tolerances),
                              settings=settings)
    except ConfigError as e:
        _config_error(e)
    presentation = ComprehensivePresentation(report) if detail else BriefPresentation(report)
    click.echo(presentation.render_text())
    sys.exit(exit_status(report))


@cli.command("list-checks")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable listing")
def list_checks(as_json):
    """List registered checks with anchors and default tolerances"""
    checks = get_registry().list_checks()
    if as_json:
        click.echo(json.dumps([
            {"name": c.name, "anchor": c.anchor, "default_tol": c.default_tol, "module": c.module,
             "description": c.description, "tags": c.tags}
            for c in checks
        ], indent=2))
        return
    width = max(len(c.name) for c in checks)
    for c in checks:
        click.echo(f"{c.name:<{width}}  {c.default_tol:<8.1e}  {c.module:<18}  {c.anchor}")
    click.echo(f"\n{len(checks)} checks")


@cli.command()
@click.argument("scenario_file", type=click.Path(dir_okay=False))
@click.option("--build", is_flag=True, help="Also construct the chart and its grid")
@click.pass_context
def validate(ctx, scenario_file, build):
    """Validate a scenario file against the schema"""
    from moebius_lab.engine.runner import chart_from_scenario, scenario_grid
    from moebius_lab.external.contracts import load_scenario

    try:
        scenario = load_scenario(scenario_file)
        message = f"OK: {scenario.name} ({len(scenario.checks)} checks)"
        if build:
            settings = load_settings(ctx.obj.get("config_path"))
            chart, _ = chart_from_scenario(scenario, settings)
            points = scenario_grid(chart, scenario, settings)
            message += f", chart {chart.label}, {len(points)} points"
    except ConfigError as e:
        _config_error(e)
    click.echo(message)


@cli.command()
def schema():
    """Print the JSON schema of scenario files"""
    from moebius_lab.external.contracts import Scenario

    click.echo(json.dumps(Scenario.model_json_schema(), indent=2))


if __name__ == "__main__":
    cli()
