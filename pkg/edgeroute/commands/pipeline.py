"""Run the whole routing experiment from one YAML config."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape

from edgeroute.commands.analyze import policy_table, render_report
from edgeroute.commands.route import rule_table
from edgeroute.config import load_config
from edgeroute.errors import EXIT_INTERNAL, EdgeRouteError
from edgeroute.pipeline import run_pipeline
from edgeroute.utils.console import fail, spinner

console = Console()


def pipeline_command(
    config_path: Path = typer.Option(..., "--config", "-c", help="Pipeline YAML config"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Override output_dir from the config"),
) -> None:
    """
    ingest -> records -> route-train -> route-apply -> analyze.

    The router is trained on the router split and every report describes the
    held-out split. A .partial marker stays in the output directory if a
    stage fails.

    \b
    Example:
        edgeroute pipeline --config configs/synthetic_demo.yaml
    """
    try:
        config = load_config(config_path)
        with spinner(console) as progress:
            progress.add_task("Running pipeline...")
            result = run_pipeline(config, out)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)
    except Exception as e:  # pylint: disable=broad-except
        console.print(f"[red]Error: unexpected failure: {escape(str(e))}[/red]")
        raise typer.Exit(EXIT_INTERNAL) from e

    console.print(rule_table(result.rule, result.router_records))
    console.print(policy_table(result.router_policies, title="Router split performance by policy"))
    render_report(result.report)
    console.print(f"\n[green]Success! Wrote {len(result.artifacts)} artifacts to {result.output_dir}[/green]")
