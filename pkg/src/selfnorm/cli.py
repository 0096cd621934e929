"""
selfnorm command line.

Subcommands:
    check SPEC          decide membership with both deciders
    witness SPEC        brute force only: witness subgroup and lattice census
    star SD_FILE        star property of ad_x on a semidirect spec file
    sweep FAMILY [a..b] family sweeps (D, C, SL2, PSL2) or sd-random
    crosscheck [SPEC..] cross-check the given specs or the default catalog

Exit codes: 0 member / all agree, 1 non-member, 2 refused (budget or cap),
3 usage or parse error, 4 the deciders disagree.
"""

import functools
import logging
import sys
import time
from typing import Optional, Sequence

import click

from .catalog import DEFAULT_CATALOG, build_named, parse_semidirect_file, parse_spec
from .config import load_settings
from .errors import BudgetRefusal, SelfnormError
from .lattice import all_subgroups
from .logs import configure_logging
from .report import FORMATS, ReportDocument, build_report, star_record, write_report, write_rows
from .star import AdAction
from .structure import structure_profile
from .sweep import DEFAULT_ACTIONS_CAP, FAMILIES, SweepRow, parse_range, sweep_exit_code, sweep_family, sweep_semidirect
from .verdict import bruteforce_verdict, cross_check, structural_verdict

logger = logging.getLogger(__name__)

EXIT_MEMBER = 0
EXIT_NON_MEMBER = 1
EXIT_REFUSED = 2
EXIT_USAGE = 3
EXIT_DISAGREEMENT = 4


def _common_options(fn):
    """Flags shared by every subcommand; they override the environment settings."""
    options = [
        click.option("--budget", type=click.IntRange(min=1), default=None,
                     help="Largest order for the exact subgroup lattice (default SELFNORM_BUDGET or 2000)."),
        click.option("--format", "fmt", type=click.Choice(FORMATS), default="text", show_default=True,
                     help="Report format."),
        click.option("--parallel", type=click.IntRange(min=1), default=None,
                     help="Worker count for lattice joins and per-subgroup checks."),
        click.option("--slow-iso", is_flag=True, default=False,
                     help="Certify fingerprint matches with an explicit isomorphism (orders <= 200)."),
        click.option("--seed", type=click.IntRange(min=0), default=None,
                     help="Seed for randomised spot checks and action sampling."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _settings(ctx: click.Context, budget, parallel, seed, slow_iso):
    return ctx.obj.with_overrides(budget=budget, parallel=parallel, seed=seed, slow_iso=slow_iso or None)


def _handles_errors(fn):
    """Turn SelfnormError into its exit code; click's own exits pass through."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = fn(*args, **kwargs)
        except SelfnormError as exc:
            logger.error("%s", exc)
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)
        ctx.exit(code or 0)
    return wrapper


def _emit(data: bytes) -> None:
    click.echo(data.decode("utf-8"), nl=False)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging on stderr.")
@click.pass_context
def cli(ctx: click.Context, verbose: bool):
    """Decide whether a finite group has only self-normalizing non-nilpotent subgroups."""
    configure_logging(verbose)
    try:
        ctx.obj = load_settings()
    except SelfnormError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(exc.exit_code)


# ============================================================================
# check / witness
# ============================================================================

@cli.command()
@click.argument("spec")
@_common_options
@click.pass_context
@_handles_errors
def check(ctx, spec, budget, fmt, parallel, slow_iso, seed):
    """Decide membership of SPEC with both deciders."""
    settings = _settings(ctx, budget, parallel, seed, slow_iso)
    parsed = parse_spec(spec)
    timings = {}
    start = time.perf_counter()
    G = build_named(parsed)
    timings["build"] = (time.perf_counter() - start) * 1000

    start = time.perf_counter()
    structural = structural_verdict(G, settings)
    timings["structural"] = (time.perf_counter() - start) * 1000

    start = time.perf_counter()
    brute, refusal = None, None
    try:
        brute = bruteforce_verdict(G, settings)
    except BudgetRefusal as exc:
        refusal = str(exc)
    timings["bruteforce"] = (time.perf_counter() - start) * 1000

    profile = structure_profile(G, settings=settings).summary()
    doc = build_report(spec, G, profile, structural, brute, refusal, timings_ms=timings)
    _emit(write_report(doc, fmt))

    if brute is None:
        logger.info("check %s: brute force refused; structural verdict %s", spec, structural)
        return EXIT_REFUSED
    if brute.member != structural.member:
        logger.error("check %s: deciders disagree", spec)
        return EXIT_DISAGREEMENT
    return EXIT_MEMBER if structural.member else EXIT_NON_MEMBER


@cli.command()
@click.argument("spec")
@_common_options
@click.pass_context
@_handles_errors
def witness(ctx, spec, budget, fmt, parallel, slow_iso, seed):
    """Brute-force only: print a witness subgroup (if any) and the lattice census."""
    settings = _settings(ctx, budget, parallel, seed, slow_iso)
    G = build_named(parse_spec(spec))
    start = time.perf_counter()
    brute = bruteforce_verdict(G, settings)
    lattice = all_subgroups(G, settings)
    census = None if lattice.truncated else lattice.census()
    doc = build_report(spec, G, bruteforce=brute, census=census,
                       timings_ms={"bruteforce": (time.perf_counter() - start) * 1000})
    _emit(write_report(doc, fmt))
    return EXIT_MEMBER if brute.member else EXIT_NON_MEMBER


# ============================================================================
# star
# ============================================================================

@cli.command()
@click.argument("sd_path", type=click.Path(dir_okay=False))
@_common_options
@click.pass_context
@_handles_errors
def star(ctx, sd_path, budget, fmt, parallel, slow_iso, seed):
    """Check the star property of ad_x on the normal factor of a semidirect spec."""
    settings = _settings(ctx, budget, parallel, seed, slow_iso)
    sd = parse_semidirect_file(sd_path)
    G = sd.build(name=f"sd:{sd_path}")
    action = AdAction(G, G.labels["x"], G.embeddings["H"])
    report = action.star_check(settings.parallel)
    if fmt == "json":
        doc = ReportDocument(spec=f"sd:{sd_path}", order=G.order,
                             verdicts=[{"decider": "star", "member": report.holds, "route": "star",
                                        "evidence": star_record(report)}])
        _emit(write_report(doc, "json"))
    else:
        lines = [f"sd:{sd_path}  (order {G.order}, H = {sd.h_spec}, x of order {sd.x_order})"]
        for trace in report.traces:
            members = " ".join(str(m) for m in trace.K.members)
            lines.append(f"  K order {trace.K.order:>4} [{members}]: {trace.label}")
        if report.holds:
            lines.append("holds")
        else:
            lines.append("violated_by K = [" + " ".join(str(m) for m in report.violator.members) + "]")
        click.echo("\n".join(lines))
    return EXIT_MEMBER if report.holds else EXIT_NON_MEMBER


# ============================================================================
# sweep / crosscheck
# ============================================================================

@cli.command()
@click.argument("family", type=click.Choice(FAMILIES))
@click.argument("param_range", required=False)
@click.option("--order-max", type=click.IntRange(min=2), default=64, show_default=True,
              help="sd-random: largest order of the abelian group A.")
@click.option("--primes", default="2,3,5,7", show_default=True,
              help="sd-random: comma-separated primes p for C_p x| A.")
@click.option("--actions-cap", type=click.IntRange(min=1), default=DEFAULT_ACTIONS_CAP, show_default=True,
              help="sd-random: automorphisms sampled per (A, p).")
@_common_options
@click.pass_context
@_handles_errors
def sweep(ctx, family, param_range, order_max, primes, actions_cap, budget, fmt, parallel, slow_iso, seed):
    """Sweep FAMILY over a..b, or sd-random over semidirect products C_p x| A."""
    settings = _settings(ctx, budget, parallel, seed, slow_iso)
    if family == "sd-random":
        try:
            prime_list = [int(p) for p in primes.split(",") if p.strip()]
        except ValueError:
            raise click.BadParameter(f"expected comma-separated integers, got {primes!r}", param_hint="--primes")
        rows = sweep_semidirect(order_max, prime_list, actions_cap, settings)
        title = f"sd-random, |A| <= {order_max}, p in {prime_list}"
    else:
        if not param_range:
            raise click.UsageError(f"family {family} needs a range a..b")
        a, b = parse_range(param_range)
        rows = sweep_family(family, a, b, settings)
        title = f"{family} {a}..{b}"
    _emit(write_rows(rows, fmt, title))
    return sweep_exit_code(rows)


@cli.command()
@click.argument("specs", nargs=-1)
@_common_options
@click.pass_context
@_handles_errors
def crosscheck(ctx, specs, budget, fmt, parallel, slow_iso, seed):
    """Cross-check SPECS (default: the built-in catalog)."""
    settings = _settings(ctx, budget, parallel, seed, slow_iso)
    parsed = [parse_spec(s) for s in (specs or DEFAULT_CATALOG)]
    rows = []
    for spec in parsed:
        start = time.perf_counter()
        G = build_named(spec)
        result = cross_check(G, settings, strict=False)
        rows.append(SweepRow(
            label=str(spec),
            order=G.order,
            structural=result.structural.member,
            bruteforce=result.bruteforce.member if result.bruteforce is not None else None,
            route=result.structural.route_label,
            refusal=result.refusal,
            timing_ms=(time.perf_counter() - start) * 1000,
        ))
    _emit(write_rows(rows, fmt, "crosscheck"))
    return sweep_exit_code(rows)


# ============================================================================
# Entry point
# ============================================================================

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code (click usage errors map to 3)."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="selfnorm",
                          standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.exceptions.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except SelfnormError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
