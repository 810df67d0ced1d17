"""Analyse evaluation records under a routing rule and write the report files."""

from pathlib import Path
from typing import Dict

import typer
from rich.console import Console
from rich.table import Table

from edgeroute.analysis import DEFAULT_ALPHA, TABLE_HEADER, AnalysisReport, analyze, table_rows, write_reports
from edgeroute.errors import EdgeRouteError
from edgeroute.router import load_rule, meta_performances, read_records
from edgeroute.utils.console import fail

console = Console()


def performance_table(report: AnalysisReport) -> Table:
    table = Table(title="Performance by Modality")
    table.add_column("modality", style="cyan")
    for column in TABLE_HEADER[1:]:
        table.add_column(column, justify="right")
    for row in table_rows(report.table):
        table.add_row(*row)
    return table


def loss_table(report: AnalysisReport) -> Table:
    table = Table(title="Loss: edge - raw (paired t-test)")
    for column in ("Modality", "Loss raw", "Loss edge", "Mean diff", "95% CI", "p", ""):
        table.add_column(column)
    for c in report.losses:
        t = c.ttest
        table.add_row(
            c.modality,
            f"{c.mean_loss_raw:.4f}",
            f"{c.mean_loss_edge:.4f}",
            f"{t.mean_diff:+.4f}",
            f"[{t.ci_low:+.4f}, {t.ci_high:+.4f}]",
            f"{t.p_value:.3g}",
            t.stars,
        )
    return table


def policy_table(policies: Dict[str, float], title: str = "Aggregate performance by policy") -> Table:
    table = Table(title=title)
    table.add_column("Policy", style="cyan")
    table.add_column("Performance", justify="right")
    for name, value in policies.items():
        table.add_row(name, f"{value:.2f}")
    return table


def render_report(report: AnalysisReport) -> None:
    console.print(performance_table(report))
    if report.losses:
        console.print(loss_table(report))
    console.print(policy_table(report.policies))
    divergent = [feature for feature, flag in report.hypotheses.divergent.items() if flag]
    if divergent:
        console.print(f"[yellow]Direction of effect differs across modalities for: {', '.join(divergent)}[/yellow]")


def analyze_command(
    records_path: Path = typer.Option(..., "--records", "-r", help="Records CSV"),
    rule_path: Path = typer.Option(..., "--rule", help="Rule file from 'edgeroute route-train'"),
    out: Path = typer.Option(Path("report"), "--out", "-o", help="Output directory"),
    alpha: float = typer.Option(DEFAULT_ALPHA, "--alpha", min=0.0, max=1.0, help="Significance level"),
) -> None:
    """
    Write report.json, report.csv, ttests.csv and regression.csv.

    The routed performance of a record is the performance of the pipeline
    the rule selects for it.

    \b
    Example:
        edgeroute analyze --records records_holdout.csv --rule rule.json --out report/
    """
    try:
        records = read_records(records_path)
        rule = load_rule(rule_path)
        report = analyze(records, meta_performances(rule, records), alpha)
        written = write_reports(report, out)
    except (EdgeRouteError, OSError) as e:
        fail(console, e)

    render_report(report)
    console.print(f"\n[green]Success! Wrote {len(written)} report files to {out}[/green]")
