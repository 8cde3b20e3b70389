"""Command line interface for Surface Influence.

Exit codes: 0 when every check passes, 1 when a theorem check fails or a
computation breaks, 2 for usage errors (bad parameters, missing files,
unknown fixtures).
"""

import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import numpy as np

from surface_influence.__version__ import __version__
from surface_influence.core.algebra import Coefficients
from surface_influence.core.config import Config
from surface_influence.core.constructions import (
    FAMILIES,
    FIXTURES,
    AnnulusVariant,
    Construction,
    ParameterError,
    assemble_generator,
    build_family,
    build_fixture,
)
from surface_influence.core.continuation import robustness_verdict, sweep
from surface_influence.core.dynamics import (
    CellLabel,
    ClassificationParams,
    NotIsolatingError,
    influence_decomposition,
)
from surface_influence.core.logging_config import get_logger, setup_logging
from surface_influence.core.mesh import MeshError, euler_characteristic
from surface_influence.core.validation import (
    ValidationError,
    ensure_valid,
    parse_lambda_grid,
    parse_partition,
    validate_integration_parameters,
    validate_lambda_grid,
    validate_partition,
)
from surface_influence.core.verify import (
    SCHEMA_VERSION,
    Verdict,
    VerdictDocument,
    emit_report,
    prepare_context,
    random_generator_configs,
    run_checks,
    suite_summary,
    verify_document,
)
from surface_influence.surface_io.mesh_io import (
    MeshFormatError,
    SurfaceBundle,
    read_subcomplex,
    read_surface,
    write_subcomplex,
    write_surface,
)
from surface_influence.surface_io.report_io import (
    DocumentError,
    flow_from_spec,
    flow_to_spec,
    read_json,
    report_document,
    sweep_document,
    write_json,
)
from surface_influence.visualization.portrait import render_svg

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (
    FileNotFoundError,
    ValidationError,
    DocumentError,
    MeshFormatError,
)


def _usage_error(message: str) -> None:
    click.echo(f"✗ Error: {message}", err=True)
    sys.exit(EXIT_USAGE)


def _failure(message: str) -> None:
    click.echo(f"✗ Error: {message}", err=True)
    sys.exit(EXIT_FAILURE)


def _out_dir(cfg: Config) -> Path:
    return Path(cfg.get("out", ".")).expanduser()


def _subdiv(ctx: click.Context, key: str = "refine") -> int:
    """Refinement level: the --refine flag wins over the config key."""
    if ctx.obj.get("refine") is not None:
        return int(ctx.obj["refine"])
    return int(ctx.obj["config"].get(key))


def _params(cfg: Config) -> ClassificationParams:
    ensure_valid(validate_integration_parameters(cfg.get("step"), cfg.get("t_max")))
    return ClassificationParams.from_config(cfg)


def _load_construction(ctx: click.Context, bundle: Optional[str], fixture: Optional[str]) -> Construction:
    """Load (surface, K, flow) from a generated bundle or a builtin fixture."""
    if bool(bundle) == bool(fixture):
        raise ValidationError("Give exactly one of --bundle or --fixture")
    if fixture:
        if fixture not in FIXTURES:
            raise ValidationError(f"Unknown fixture {fixture!r}; choose from {', '.join(sorted(FIXTURES))}")
        return build_fixture(fixture, _subdiv(ctx))

    files = SurfaceBundle(Path(bundle).expanduser())
    surface = read_surface(files.surface_path, files.sidecar_path)
    spec = read_json(files.flow_path, kind="flow")
    construction = flow_from_spec(spec, surface)
    core = read_subcomplex(files.core_path, construction.surface)
    return Construction(construction.surface, core, construction.flow)


@click.group(name="surface_influence")
@click.version_option(version=__version__)
@click.option("--config", "-c", type=click.Path(), help="Path to configuration file")
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.option("--log-file", type=str, help="Log file path")
@click.option("--step", type=float, help="Integrator step in chart units")
@click.option("--tmax", type=float, help="Time horizon for limit-set estimation")
@click.option("--refine", type=int, help="Subdivision level of the builtin meshes")
@click.option("--seed", type=int, help="Seed for streamline sampling and random suites")
@click.option("--coeff", type=click.Choice(["z", "z2"]), help="Cohomology coefficients")
@click.option("--out", type=click.Path(), help="Output directory")
@click.pass_context
def main(ctx, config, debug, log_file, step, tmax, refine, seed, coeff, out):
    """
    Surface Influence

    Regions of influence of isolated non-saddle sets for flows on
    triangulated closed orientable surfaces.

    Builds the surfaces and flows of the genus generator, classifies every
    point as purely attracted, purely repelled or homoclinic, checks the
    cohomological bounds on the complexity, tracks non-saddle sets through
    continuation families and draws phase portraits.
    """
    level = "DEBUG" if debug else "INFO"
    setup_logging(level=level, log_file=log_file, console_output=False)

    logger = get_logger("cli")
    logger.debug(f"Starting Surface Influence CLI with debug={debug}, log_file={log_file}")

    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = Config(Path(config) if config else None)
        if ctx.obj["config"].config_path:
            logger.debug(f"Loaded config from: {ctx.obj['config'].config_path}")
    except Exception as e:
        if config:
            click.echo(f"✗ Error loading config file: {e}", err=True)
            sys.exit(EXIT_USAGE)
        ctx.obj["config"] = Config()

    if refine is not None and refine < 0:
        _usage_error("--refine must be a non-negative integer")
    ctx.obj["refine"] = refine
    ctx.obj["config"].update({"step": step, "t_max": tmax, "seed": seed, "coeff": coeff, "out": out})


@main.command()
@click.argument("g", type=int)
@click.argument("ks", default="")
@click.option(
    "--annulus-variant",
    type=click.Choice([v.value for v in AnnulusVariant]),
    default=AnnulusVariant.DEGENERATE.value,
    help="Flow on the annulus parts (k = 1)",
)
@click.pass_context
def generate(ctx, g: int, ks: str, annulus_variant: str):
    """Build the genus G surface for the partition KS (e.g. "1,1").

    Writes surface.off, surface.sidecar, flow.json and core.sub to --out.
    """
    logger = get_logger("cli.generate")
    cfg = ctx.obj["config"]

    try:
        parts = parse_partition(ks)
        ensure_valid(validate_partition(g, parts))
    except ValidationError as e:
        _usage_error(str(e))

    try:
        name = "sphere" if g == 0 and not parts else None
        construction = assemble_generator(
            g, parts, _subdiv(ctx), annulus_variant=AnnulusVariant(annulus_variant), name=name
        )
        files = SurfaceBundle(_out_dir(cfg))
        write_surface(construction.surface, files.surface_path, files.sidecar_path)
        write_json(flow_to_spec(construction.flow), files.flow_path)
        write_subcomplex(construction.core, files.core_path)
        logger.info(f"Generated {construction.flow.name} in {files.directory}")
    except ParameterError as e:
        _usage_error(str(e))
    except (MeshError, DocumentError, OSError) as e:
        _failure(str(e))

    surface = construction.surface
    click.echo(f"✓ Generated {construction.flow.name}")
    click.echo(
        f"  {surface.n_vertices} vertices, {surface.n_edges} edges, {surface.n_triangles} triangles, "
        f"χ = {euler_characteristic(surface)}, genus {surface.genus}"
    )
    for path in files.paths:
        click.echo(f"  • {path}")


@main.command()
@click.option("--bundle", "-b", type=click.Path(), help="Directory written by 'generate'")
@click.option("--fixture", "-f", type=str, help="Builtin fixture name")
@click.option("--output", "-o", type=click.Path(), help="Report path (default: <out>/report.json)")
@click.pass_context
def analyze(ctx, bundle: Optional[str], fixture: Optional[str], output: Optional[str]):
    """Classify the region of influence of K and write a report."""
    logger = get_logger("cli.analyze")
    cfg = ctx.obj["config"]

    try:
        params = _params(cfg)
        construction = _load_construction(ctx, bundle, fixture)
    except USAGE_ERRORS + (ParameterError,) as e:
        _usage_error(str(e))
    except MeshError as e:
        _failure(str(e))

    M, K, flow = construction
    coeff = Coefficients(cfg.get("coeff"))
    output_path = Path(output).expanduser() if output else _out_dir(cfg) / "report.json"

    try:
        click.echo(f"📊 Analyzing {flow.name} ({M.n_triangles} cells, |K| = {len(K.cells)})")
        report = influence_decomposition(M, K, flow, params)
        context = prepare_context(M, K, flow, params, report, coeff)
        try:
            spec = flow_to_spec(flow)
        except DocumentError:
            spec = None
        write_json(report_document(report, context, spec), output_path)
    except NotIsolatingError as e:
        _failure(str(e))

    click.echo(f"  Complexity: {report.complexity} (k = {report.k}, m = {report.m})")
    click.echo(f"  Local complexities: {report.local_complexities}")
    click.echo(f"  Dissonant cells: {len(report.dissonant)}")
    click.echo(f"  i*: H¹(M) → H¹(K) kernel {context.kernel_rank}, image {context.image_rank}")
    if not report.valid:
        message = f"Report invalid: {'; '.join(report.invalid_reasons)}; refine the mesh or raise --tmax"
        click.echo(f"  ⚠️  {message}")
        logger.warning(message)
    click.echo(f"✓ Report written: {output_path}")


def _suite_targets(target: Optional[str], random_count: int, seed: int) -> List[Tuple[str, Optional[Tuple[int, List[int]]]]]:
    """(name, generator config) pairs; fixtures carry no config."""
    if target == "all":
        targets: List[Tuple[str, Optional[Tuple[int, List[int]]]]] = [(name, None) for name in FIXTURES]
    elif target:
        targets = [(target, None)]
    else:
        targets = []
    for g, ks in random_generator_configs(random_count, seed):
        targets.append((f"generator-{g}-" + "-".join(str(k) for k in ks), (g, ks)))
    return targets


@main.command()
@click.argument("target", required=False)
@click.option("--random", "random_count", type=int, default=0, help="Also verify N random generator partitions")
@click.option("--output", "-o", type=click.Path(), help="Verdict path (default: <out>/verdicts.json)")
@click.pass_context
def verify(ctx, target: Optional[str], random_count: int, output: Optional[str]):
    """Check the theorems on a stored report, a fixture, or 'all' fixtures."""
    logger = get_logger("cli.verify")
    cfg = ctx.obj["config"]
    output_path = Path(output).expanduser() if output else _out_dir(cfg) / "verdicts.json"

    if target is None and random_count <= 0:
        _usage_error("Give a report file, a fixture name or 'all'")
    if random_count < 0:
        _usage_error("--random must be non-negative")

    if target and Path(target).exists():
        try:
            result = verify_document(read_json(target, kind="influence-report"))
        except (DocumentError, ValueError) as e:
            _usage_error(str(e))
        write_json(result.document, output_path)
        _echo_verdicts(result)
        click.echo(f"  Verdicts written: {output_path}")
        sys.exit(result.exit_code)

    if target and target != "all" and target not in FIXTURES:
        _usage_error(f"Unknown fixture or missing report {target!r}; fixtures: {', '.join(sorted(FIXTURES))}")

    try:
        params = _params(cfg)
    except ValidationError as e:
        _usage_error(str(e))
    coeff = Coefficients(cfg.get("coeff"))
    subdiv = _subdiv(ctx)

    runs: Dict[str, VerdictDocument] = {}
    verdicts: Dict[str, List[Verdict]] = {}
    try:
        for name, config in _suite_targets(target, random_count, int(cfg.get("seed"))):
            click.echo(f"🔍 Verifying {name}...")
            if config is None:
                construction = build_fixture(name, subdiv)
            else:
                construction = assemble_generator(config[0], config[1], subdiv, name=name)
            M, K, flow = construction
            context = prepare_context(M, K, flow, params, coeff=coeff, name=name)
            verdicts[name] = run_checks(context)
            runs[name] = emit_report(verdicts[name], name, coeff.value)
    except (MeshError, NotIsolatingError, ParameterError) as e:
        _failure(str(e))

    if len(runs) == 1:
        result = next(iter(runs.values()))
        write_json(result.document, output_path)
        _echo_verdicts(result)
        click.echo(f"  Verdicts written: {output_path}")
        sys.exit(result.exit_code)

    exit_code = max(run.exit_code for run in runs.values())
    write_json(
        {
            "schema": SCHEMA_VERSION,
            "kind": "verdict-suite",
            "runs": {name: run.document for name, run in runs.items()},
            "exit_code": exit_code,
        },
        output_path,
    )
    summary = suite_summary(verdicts)
    summary_path = output_path.with_suffix(".csv")
    summary.to_csv(summary_path, index=False)
    failed = summary[summary["status"] == "fail"]
    for _, row in failed.iterrows():
        click.echo(f"  ❌ {row['config']}: {row['check']}: {row['message']}")
    for name, run in runs.items():
        if run.document["untrusted"]:
            click.echo(f"  ⚠️  {name}: report invalid, {len(run.document['untrusted'])} checks skipped")
    logger.info(f"Verified {len(runs)} configurations, {len(failed)} failed checks")
    symbol = "✓" if exit_code == EXIT_OK else "✗"
    click.echo(f"{symbol} {len(runs)} configurations, {len(failed)} failed checks")
    click.echo(f"  Verdicts written: {output_path}")
    click.echo(f"  Summary written: {summary_path}")
    sys.exit(exit_code)


def _echo_verdicts(result: VerdictDocument) -> None:
    for verdict in result.document["verdicts"]:
        symbol = {"pass": "✓", "fail": "❌", "not-applicable": "–"}[verdict["status"]]
        click.echo(f"  {symbol} {verdict['name']}: {verdict['message']}")
    if result.exit_code == EXIT_OK:
        click.echo(f"✓ All checks passed for {result.document['name']}")
    elif not result.document["failed"]:
        click.echo(f"✗ Report invalid, checks skipped: {', '.join(result.document['untrusted'])}")
    else:
        click.echo(f"✗ Failed: {', '.join(result.document['failed'])}")


@main.command("sweep")
@click.argument("family_name", metavar="FAMILY")
@click.option("--lambda-grid", type=str, help='Comma separated λ values, e.g. "0,0.05,0.1"')
@click.option("--depth", type=int, help="Nested stars checked by the saddle probe (0 skips it)")
@click.option("--output", "-o", type=click.Path(), help="Sweep path (default: <out>/sweep.json)")
@click.pass_context
def sweep_command(ctx, family_name: str, lambda_grid: Optional[str], depth: Optional[int], output: Optional[str]):
    """Continue the non-saddle set of FAMILY over a λ grid."""
    logger = get_logger("cli.sweep")
    cfg = ctx.obj["config"]

    try:
        if lambda_grid:
            grid = parse_lambda_grid(lambda_grid)
        else:
            grid = [round(x, 10) for x in np.linspace(0.0, float(cfg.get("lambda_max")), int(cfg.get("lambda_points")))]
        ensure_valid(validate_lambda_grid(grid))
        depth = int(cfg.get("probe_depth")) if depth is None else depth
        if depth < 0:
            raise ValidationError("--depth must be non-negative")
        if family_name not in FAMILIES:
            raise ValidationError(f"Unknown family {family_name!r}; choose from {', '.join(sorted(FAMILIES))}")
        params = _params(cfg)
    except ValidationError as e:
        _usage_error(str(e))

    output_path = Path(output).expanduser() if output else _out_dir(cfg) / "sweep.json"
    try:
        family = build_family(family_name, _subdiv(ctx, "sweep_refine"))
        click.echo(f"🔍 Sweeping {family_name} over {len(grid)} values of λ")
        result = sweep(family, None, grid, depth, params, Coefficients(cfg.get("coeff")))
        verdict = robustness_verdict(result)
        write_json(sweep_document(result, verdict), output_path)
    except ValueError as e:
        # includes NotIsolatingError and λ outside the family's interval
        _failure(str(e))

    frame = result.to_dataframe()
    click.echo(frame[["size", "betti", "rchar", "strongrob", "saddle_probe"]].to_string())
    if depth == 0:
        click.echo("  ⚠️  Saddle probe skipped (depth 0)")
    for column in result.columns:
        if column.empty:
            click.echo(f"  ⚠️  K_λ empty at λ={column.lam:g}; column excluded from the criteria")
    logger.info(f"Sweep {family_name}: {verdict.status.value}")
    if verdict.failed:
        click.echo(f"✗ {verdict.message}")
    else:
        click.echo(f"✓ {verdict.message}")
    click.echo(f"  Sweep written: {output_path}")
    sys.exit(EXIT_FAILURE if verdict.failed else EXIT_OK)


@main.command()
@click.option("--bundle", "-b", type=click.Path(), help="Directory written by 'generate'")
@click.option("--fixture", "-f", type=str, help="Builtin fixture name")
@click.option("--report", "-r", type=click.Path(), help="Influence report whose labels color the cells")
@click.option("--output", "-o", type=click.Path(), help="SVG path (default: <out>/portrait.svg)")
@click.pass_context
def render(ctx, bundle: Optional[str], fixture: Optional[str], report: Optional[str], output: Optional[str]):
    """Draw the phase portrait of a flow as SVG."""
    cfg = ctx.obj["config"]

    labels = None
    dissonant: List[int] = []
    try:
        construction = _load_construction(ctx, bundle, fixture)
        if report:
            document = read_json(report, kind="influence-report")
            labels = [CellLabel(value) for value in document.get("cell_labels", [])]
            dissonant = [int(c) for c in document.get("dissonant_cells", [])]
            if not labels:
                labels = None
            elif len(labels) != construction.surface.n_triangles:
                raise DocumentError(
                    f"Report has {len(labels)} cell labels, mesh has {construction.surface.n_triangles} cells"
                )
    except USAGE_ERRORS + (ParameterError,) as e:
        _usage_error(str(e))
    except MeshError as e:
        _failure(str(e))
    except ValueError as e:
        _usage_error(f"Invalid report: {e}")

    output_path = Path(output).expanduser() if output else _out_dir(cfg) / "portrait.svg"
    try:
        render_svg(
            construction.flow,
            output_path,
            K=construction.core,
            labels=labels,
            dissonant=dissonant,
            seed=int(cfg.get("seed")),
            seed_count=int(cfg.get("seed_count")),
            step=float(cfg.get("step")),
        )
    except (OSError, ValueError) as e:
        _failure(str(e))
    click.echo(f"✓ Portrait written: {output_path}")


@main.command()
def info():
    """List the builtin fixtures, families and labels."""
    click.echo("📚 Builtin fixtures (analyze/verify/render --fixture)\n")
    for name in FIXTURES:
        click.echo(f"   • {name}")
    click.echo("\n🌊 Continuation families (sweep FAMILY)\n")
    for name in FAMILIES:
        click.echo(f"   • {name}")
    click.echo("\n🎯 Cell labels\n")
    click.echo("   • purely-attracted: ω-limit in K, α-limit elsewhere")
    click.echo("   • purely-repelled: α-limit in K, ω-limit elsewhere")
    click.echo("   • homoclinic: both limits in K")
    click.echo("   • outside-I(K): neither limit in K")
    click.echo("   • undetermined: no limit settled within --tmax")


@main.group()
def config():
    """Manage configuration settings."""
    pass


@config.command("init")
@click.option("--path", "-p", type=click.Path(), help="Config file path")
@click.option("--force", "-f", is_flag=True, help="Overwrite existing config file")
def config_init(path, force):
    """Create a new configuration file with default values."""
    if path:
        config_path = Path(path).expanduser()
    else:
        config_path = Path.home() / ".surface_influence.yaml"

    if config_path.exists() and not force:
        click.echo(f"✗ Config file already exists: {config_path}")
        click.echo("  Use --force to overwrite or specify a different path")
        sys.exit(EXIT_FAILURE)

    try:
        Config.create_default_config(config_path)
        click.echo(f"✓ Configuration file created: {config_path}")
        click.echo("\nEdit this file to customize default settings.")
        click.echo("\nAlternatively, place a config file at:")
        click.echo("  • ~/.surface_influence.yaml (in home directory)")
        click.echo("  • ./surface_influence.yaml (in current directory)")
    except Exception as e:
        click.echo(f"✗ Error creating config file: {e}", err=True)
        sys.exit(EXIT_FAILURE)


@config.command("show")
@click.pass_context
def config_show(ctx):
    """Display current configuration."""
    cfg = ctx.obj["config"]

    if cfg.config_path:
        click.echo(f"Configuration loaded from: {cfg.config_path}\n")
    else:
        click.echo("Using default configuration (no config file loaded)\n")

    click.echo("Current Settings:")
    click.echo("=" * 50)
    for key, value in cfg.as_dict().items():
        click.echo(f"  {key:25s} = {value}")

    is_valid, errors = cfg.validate()
    if not is_valid:
        click.echo("\n⚠️  Invalid settings:")
        for error in errors:
            click.echo(f"  • {error}")


@config.command("get")
@click.argument("key")
@click.pass_context
def config_get(ctx, key):
    """Get a configuration value."""
    value = ctx.obj["config"].get(key)

    if value is None:
        click.echo(f"✗ Key '{key}' not found in configuration", err=True)
        sys.exit(EXIT_FAILURE)

    click.echo(value)


@config.command("set")
@click.argument("key")
@click.argument("value")
@click.pass_context
def config_set(ctx, key, value):
    """Set a configuration value."""
    cfg = ctx.obj["config"]

    if not cfg.config_path:
        click.echo(
            "✗ No config file loaded. Create one with 'surface-influence config init'",
            err=True,
        )
        sys.exit(EXIT_FAILURE)

    try:
        if value.lower() in ("true", "false"):
            value = value.lower() == "true"
        elif value.replace(".", "", 1).isdigit():
            value = float(value) if "." in value else int(value)

        cfg.set(key, value)
        cfg.save_to_file()
        click.echo(f"✓ Set {key} = {value}")
        click.echo(f"  Saved to: {cfg.config_path}")
    except Exception as e:
        click.echo(f"✗ Error saving config: {e}", err=True)
        sys.exit(EXIT_FAILURE)


if __name__ == "__main__":
    main()
