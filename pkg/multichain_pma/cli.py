"""Command-line driver: fixtures, exact evaluation, projections, mirror ascent and property suites."""

import functools
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from .average_reward.core.chain_analysis import chain_constants, classify, visitation
from .average_reward.core.errors import InfeasibleConfigError, InvalidMdpError, MdpError
from .average_reward.core.mdp_core import as_distribution, require_interior, uniform_distribution
from .average_reward.core.mdp_core import validate_mdp, validate_policy
from .average_reward.core.pma import (
    check_linear_envelope,
    check_sublinear_envelope,
    compute_reference,
    estimate_coefficients,
    run_pma,
)
from .average_reward.core.projection import euclid_project_floor, kl_project_floor
from .average_reward.core.sampling import (
    GenerativeModel,
    check_inexact_envelope,
    classify_by_sampling_with_retry,
    critic,
    run_spma,
    suggest_windows,
)
from .average_reward.core.values import bellman_residuals, evaluate
from .average_reward.models import (
    Classification,
    CoefficientEstimate,
    CriticConfig,
    DivergenceKind,
    EnvelopeReport,
    ExperimentConfig,
    FixtureName,
    Mdp,
    PmaTrace,
    Policy,
    RunArtifact,
    ScheduleKind,
    StepSchedule,
)
from .average_reward.models.experiment import CheckSuite
from .average_reward.utils.checks import run_suite
from .average_reward.utils.exporters import DataExporter, load_distribution, load_mdp, load_policy
from .average_reward.utils.fixtures import gen_fixture
from .shared.config import settings
from .shared.logging import configure_logging, get_logger

logger = get_logger(__name__)
console = Console()

app = typer.Typer(
    name="multichain-pma",
    help="Average-reward multichain MDP toolkit: exact evaluation and alpha-clipped policy mirror ascent.",
    no_args_is_help=True,
)

EXIT_INVALID_MDP = 2
EXIT_INFEASIBLE = 3
EXIT_SUITE_FAILED = 4

MdpOption = typer.Option(None, "--mdp", help="MDP JSON file")
FixtureOption = typer.Option(None, "--fixture", help="Generate the MDP from a named fixture instead of a file")
ParamOption = typer.Option([], "--param", help="Fixture or suite parameter key=value (repeatable)")
SeedOption = typer.Option(0, "--seed", min=0, help="Root seed")
OutOption = typer.Option(None, "--out", help="Output directory (defaults to MCPMA_OUTPUT_DIR)")
MuOption = typer.Option("uniform", "--mu", help="'uniform' or a distribution JSON file")
PolicyOption = typer.Option(None, "--policy", help="Policy JSON file (uniform when omitted)")


def _guard(command):
    """Map package errors to exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except InvalidMdpError as exc:
            logger.error(str(exc))
            console.print("[red]Invalid MDP[/red]")
            for line in exc.violations:
                console.print(f"  - {line}")
            raise typer.Exit(code=EXIT_INVALID_MDP)
        except (MdpError, ValidationError) as exc:
            logger.error(str(exc))
            console.print(f"[red]Error:[/red] {exc}")
            raise typer.Exit(code=EXIT_INFEASIBLE)

    return wrapper


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if "," in raw:
        return [_parse_value(part.strip()) for part in raw.split(",") if part.strip()]
    return raw


def parse_params(items: List[str]) -> Dict[str, Any]:
    """Turn ``key=value`` strings into a dictionary; values are JSON when they parse."""
    params: Dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise InfeasibleConfigError(f"parameter must look like key=value, got {item!r}")
        params[key.strip()] = _parse_value(raw.strip())
    return params


def _config(**fields: Any) -> ExperimentConfig:
    out = fields.pop("out", None)
    return ExperimentConfig(output_dir=Path(out or settings.output_dir), **fields)


def _load_mdp(cfg: ExperimentConfig) -> Mdp:
    if cfg.mdp_path is not None:
        m = load_mdp(cfg.mdp_path)
    else:
        m = gen_fixture(cfg.fixture, cfg.fixture_params, cfg.seed)
    report = validate_mdp(m)
    if not report.ok:
        raise InvalidMdpError(report.messages())
    return m


def _load_mu(cfg: ExperimentConfig, n_states: int) -> np.ndarray:
    if cfg.mu == "uniform":
        return uniform_distribution(n_states)
    return as_distribution(load_distribution(cfg.mu), n_states, full_support=True)


def _load_policy(path: Optional[Path], m: Mdp) -> Policy:
    if path is None:
        return Policy.uniform(m.n_states, m.n_actions)
    p = load_policy(path, m.n_states, m.n_actions)
    validate_policy(m, p)
    return p


def _classes_table(c: Classification, title: str) -> Table:
    table = Table(title=title)
    table.add_column("Set")
    table.add_column("States")
    for i, cls in enumerate(c.recurrent_classes):
        table.add_row(f"R{i + 1}", ", ".join(map(str, cls)))
    table.add_row("T", ", ".join(map(str, c.transient)) or "-")
    return table


def _summary_table(summary: Dict[str, Any], title: str) -> Table:
    table = Table(title=title)
    table.add_column("Quantity")
    table.add_column("Value", justify="right")
    for key, value in summary.items():
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    return table


def _coefficients(m: Mdp, mu: np.ndarray, cfg: ExperimentConfig, c: Classification) -> CoefficientEstimate:
    return estimate_coefficients(m, mu, cfg.alpha, c, seed=cfg.seed)


def _schedule(cfg: ExperimentConfig, coeffs: CoefficientEstimate) -> StepSchedule:
    if cfg.schedule == ScheduleKind.CONSTANT:
        return StepSchedule(kind=ScheduleKind.CONSTANT, eta0=cfg.eta)
    c_alpha = cfg.c_alpha
    if c_alpha is None:
        c_alpha = coeffs.c_alpha
        if c_alpha <= 1.0:
            raise InfeasibleConfigError(
                f"estimated C_alpha = {c_alpha:.6g} does not exceed 1; pass --c-alpha for the adaptive schedule"
            )
    return StepSchedule(kind=ScheduleKind.ADAPTIVE, eta0=cfg.eta, c_alpha=c_alpha)


def _envelope(trace: PmaTrace, coeffs: CoefficientEstimate, schedule: StepSchedule) -> EnvelopeReport:
    if schedule.kind == ScheduleKind.CONSTANT:
        return check_sublinear_envelope(trace, coeffs, schedule.eta0)
    return check_linear_envelope(trace, coeffs, schedule.eta0)


def _trace_summary(trace: PmaTrace, coeffs: CoefficientEstimate, envelope: EnvelopeReport) -> Dict[str, Any]:
    final = trace.final
    return {
        "iterations": final.k,
        "initial_J_mu": trace.records[0].j_mu,
        "final_J_mu": final.j_mu,
        "reference_J_mu": trace.reference_value,
        "reference_source": trace.reference_source.value if trace.reference_source else None,
        "final_gap": final.gap,
        "samples_used": trace.total_samples,
        "B_alpha_hat": coeffs.b_alpha,
        "C_alpha_hat": coeffs.c_alpha,
        "envelope_shape_ok": envelope.shape_ok,
        "envelope_statistic": envelope.shape_statistic,
        "envelope_threshold": envelope.shape_threshold,
        "envelope_advisory_ok": envelope.advisory_ok,
        "envelope_min_margin": min(r.margin for r in envelope.rows),
    }


def _trace_table(trace: PmaTrace, rows: int = 10) -> Table:
    table = Table(title=f"Trace (last {min(rows, len(trace.records))} of {len(trace.records)})")
    for header in ("k", "J_mu", "gap", "eta", "samples"):
        table.add_column(header, justify="right")
    for r in trace.records[-rows:]:
        table.add_row(
            str(r.k),
            f"{r.j_mu:.10g}",
            "-" if r.gap is None else f"{r.gap:.3e}",
            "-" if r.eta is None else f"{r.eta:.4g}",
            str(r.samples_cum),
        )
    return table


def _artifact(
    exporter: DataExporter,
    cfg: ExperimentConfig,
    summary: Dict[str, Any],
    trace_csv: Optional[Path] = None,
    tables: Optional[Dict[str, Path]] = None,
) -> RunArtifact:
    artifact = RunArtifact(
        trace_csv=trace_csv,
        summary_json=exporter.export_summary(summary),
        config_json=exporter.export_config(cfg),
        tables=tables or {},
        summary=summary,
    )
    logger.info(f"Wrote {len(artifact.paths())} files to {exporter.output_dir}")
    return artifact


def _reference_iters(iters: int) -> int:
    return 10 * max(iters, 20)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level"),
    progress: bool = typer.Option(False, "--progress", help="Show progress bars"),
):
    """Average-reward multichain MDP toolkit."""
    if verbose:
        configure_logging(level="DEBUG", log_file=settings.log_file)
    settings.show_progress = progress


@app.command()
@_guard
def gen(
    name: FixtureName = typer.Option(..., "--name", help="Fixture family"),
    param: List[str] = ParamOption,
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Generate a fixture MDP and write it as JSON."""
    m = gen_fixture(name, parse_params(param), seed)
    report = validate_mdp(m)
    if not report.ok:
        raise InvalidMdpError(report.messages())
    path = DataExporter(out).export_mdp(m, name.value)
    console.print(_classes_table(classify(m), f"{name.value}: |S|={m.n_states}, |A|={m.n_actions}"))
    console.print(f"[green]Wrote[/green] {path}")


@app.command()
@_guard
def solve(
    mdp: Optional[Path] = MdpOption,
    fixture: Optional[FixtureName] = FixtureOption,
    param: List[str] = ParamOption,
    policy: Optional[Path] = PolicyOption,
    mu: str = MuOption,
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Exact evaluation: J, V, K, Q, G, visitation measures and chain constants."""
    cfg = _config(mdp_path=mdp, fixture=fixture, fixture_params=parse_params(param), mu=mu, seed=seed, out=out)
    m = _load_mdp(cfg)
    p = _load_policy(policy, m)
    require_interior(p)
    mu_vec = _load_mu(cfg, m.n_states)
    c = classify(m)
    values = evaluate(m, p, c)
    vis = visitation(m, p, mu_vec, c)
    constants = chain_constants(m, p, c, seed=cfg.seed)
    residuals = bellman_residuals(m, p, values)

    exporter = DataExporter(cfg.output_dir)
    tables = {"states": exporter.export_state_table(
        {"J": values.j, "V": values.v, "d": vis.d, "delta": vis.delta, "rho": vis.rho}, "states"
    )}
    for name, table in (("K", values.k), ("Q", values.q), ("G", values.g), ("policy", p.table)):
        tables[name] = exporter.export_action_table(table, name)
    summary = {
        "J_mu": float(mu_vec @ values.j),
        "n_classes": c.m,
        "recurrent_classes": c.recurrent_classes,
        "transient": c.transient,
        "t_tar": constants.t_tar,
        "t_half": constants.t_half,
        "t_cov": constants.t_cov,
        "t_cov_estimated": any(constants.t_cov_estimated),
        "gain_residual": residuals.gain,
        "bias_residual": residuals.bias,
        "normalization_residual": residuals.normalization,
    }
    artifact = _artifact(exporter, cfg, summary, tables=tables)

    console.print(_classes_table(c, "Classification"))
    table = Table(title="Values")
    for header in ("state", "J", "V", "rho"):
        table.add_column(header, justify="right")
    for s in range(m.n_states):
        table.add_row(str(s), f"{values.j[s]:.10g}", f"{values.v[s]:.10g}", f"{vis.rho[s]:.6g}")
    console.print(table)
    console.print(_summary_table({k: v for k, v in summary.items() if not isinstance(v, list)}, "Summary"))
    return artifact


@app.command("classify")
@_guard
def classify_cmd(
    mdp: Optional[Path] = MdpOption,
    fixture: Optional[FixtureName] = FixtureOption,
    param: List[str] = ParamOption,
    policy: Optional[Path] = PolicyOption,
    sampled: bool = typer.Option(False, "--sampled", help="Also classify from sampled trajectories"),
    delta: float = typer.Option(0.05, "--delta", help="Failure probability for the suggested windows"),
    m1: Optional[int] = typer.Option(None, "--m1", help="Burn-in window (suggested when omitted)"),
    m2: Optional[int] = typer.Option(None, "--m2", help="Collection window (suggested when omitted)"),
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Recurrent classes and transient states, exactly and optionally by sampling."""
    cfg = _config(mdp_path=mdp, fixture=fixture, fixture_params=parse_params(param), seed=seed, out=out)
    m = _load_mdp(cfg)
    c = classify(m)
    console.print(_classes_table(c, "Exact classification"))
    summary: Dict[str, Any] = {"recurrent_classes": c.recurrent_classes, "transient": c.transient}

    if sampled:
        p = _load_policy(policy, m)
        require_interior(p)
        if m1 is None or m2 is None:
            suggested = suggest_windows(chain_constants(m, p, c, seed=cfg.seed), delta)
            m1 = suggested[0] if m1 is None else m1
            m2 = suggested[1] if m2 is None else m2
        gm = GenerativeModel(m, cfg.seed)
        estimate = classify_by_sampling_with_retry(gm, p, m1, m2)
        console.print(_classes_table(estimate, f"Sampled classification (m1={m1}, m2={m2})"))
        summary.update(
            sampled_classes=estimate.recurrent_classes,
            sampled_transient=estimate.transient,
            windows=[m1, m2],
            samples_used=gm.samples,
            agrees=estimate.same_as(c),
        )

    exporter = DataExporter(cfg.output_dir)
    exporter.export_summary(summary, "classification")
    exporter.export_config(cfg)


@app.command()
@_guard
def project(
    q: str = typer.Option(..., "--q", help="Comma-separated point (euclid) or positive weights (kl)"),
    alpha: float = typer.Option(0.05, "--alpha", help="Floor alpha <= 1/d"),
    div: DivergenceKind = typer.Option(DivergenceKind.KL, "--div", help="Divergence"),
    out: Optional[Path] = OutOption,
):
    """Project a vector onto the floored simplex."""
    try:
        point = np.array([float(x) for x in q.split(",")], dtype=float)
    except ValueError as exc:
        raise InfeasibleConfigError(f"--q must be comma-separated numbers, got {q!r}") from exc
    fast = euclid_project_floor if div == DivergenceKind.EUCLIDEAN else kl_project_floor
    result = fast(point, alpha)
    console.print(", ".join(repr(float(x)) for x in result.p))
    if out is not None:
        DataExporter(out).export_summary(
            {"divergence": div.value, "alpha": alpha, "input": point, "projection": result.p}, "projection"
        )


def _mirror_config(**fields: Any) -> ExperimentConfig:
    fields["fixture_params"] = parse_params(fields.pop("param"))
    fields["divergence"] = fields.pop("div")
    return _config(**fields)


@app.command()
@_guard
def pma(
    mdp: Optional[Path] = MdpOption,
    fixture: Optional[FixtureName] = FixtureOption,
    param: List[str] = ParamOption,
    mu: str = MuOption,
    alpha: float = typer.Option(0.05, "--alpha", help="Policy floor in (0, 1/|A|)"),
    div: DivergenceKind = typer.Option(DivergenceKind.KL, "--div", help="Divergence"),
    eta: float = typer.Option(0.5, "--eta", help="Constant step, or initial step for adaptive"),
    schedule: ScheduleKind = typer.Option(ScheduleKind.CONSTANT, "--schedule", help="Step schedule"),
    c_alpha: Optional[float] = typer.Option(None, "--c-alpha", help="Adaptive ratio (estimated when omitted)"),
    iters: int = typer.Option(200, "--iters", min=0, help="Iterations K"),
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Exact alpha-clipped policy mirror ascent."""
    cfg = _mirror_config(
        mdp_path=mdp, fixture=fixture, param=param, mu=mu, alpha=alpha, div=div, eta=eta,
        schedule=schedule, c_alpha=c_alpha, iters=iters, seed=seed, out=out,
    )
    m = _load_mdp(cfg)
    mu_vec = _load_mu(cfg, m.n_states)
    c = classify(m)
    coeffs = _coefficients(m, mu_vec, cfg, c)
    steps = _schedule(cfg, coeffs)
    reference = compute_reference(
        m, mu_vec, cfg.alpha, cfg.divergence, c, iters=_reference_iters(cfg.iters), seed=cfg.seed
    )

    trace = run_pma(m, mu_vec, cfg.alpha, steps, cfg.divergence, cfg.iters, reference=reference, c=c)
    envelope = _envelope(trace, coeffs, steps)
    summary = _trace_summary(trace, coeffs, envelope)

    exporter = DataExporter(cfg.output_dir)
    trace_path = exporter.export_trace(trace)
    policy_path = exporter.export_policy(Policy(table=trace.final.policy, floor=cfg.alpha), "final_policy")
    artifact = _artifact(exporter, cfg, summary, trace_csv=trace_path, tables={"final_policy": policy_path})
    console.print(_trace_table(trace))
    console.print(_summary_table(summary, "PMA summary"))
    return artifact


@app.command()
@_guard
def spma(
    mdp: Optional[Path] = MdpOption,
    fixture: Optional[FixtureName] = FixtureOption,
    param: List[str] = ParamOption,
    mu: str = MuOption,
    alpha: float = typer.Option(0.05, "--alpha", help="Policy floor in (0, 1/|A|)"),
    div: DivergenceKind = typer.Option(DivergenceKind.KL, "--div", help="Divergence"),
    eta: float = typer.Option(0.5, "--eta", help="Constant step, or initial step for adaptive"),
    schedule: ScheduleKind = typer.Option(ScheduleKind.CONSTANT, "--schedule", help="Step schedule"),
    c_alpha: Optional[float] = typer.Option(None, "--c-alpha", help="Adaptive ratio (estimated when omitted)"),
    iters: int = typer.Option(50, "--iters", min=0, help="Iterations K"),
    n: int = typer.Option(50, "--n", min=1, help="Critic trajectories N"),
    horizon: int = typer.Option(200, "--horizon", min=1, help="Critic horizon H"),
    n2: int = typer.Option(50, "--n2", min=1, help="Critic trajectories N'"),
    horizon2: int = typer.Option(200, "--horizon2", min=1, help="Critic horizon H'"),
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Stochastic alpha-clipped policy mirror ascent driven by the critic."""
    cfg = _mirror_config(
        mdp_path=mdp, fixture=fixture, param=param, mu=mu, alpha=alpha, div=div, eta=eta,
        schedule=schedule, c_alpha=c_alpha, iters=iters, n=n, horizon=horizon, n2=n2, horizon2=horizon2,
        seed=seed, out=out,
    )
    m = _load_mdp(cfg)
    mu_vec = _load_mu(cfg, m.n_states)
    c = classify(m)
    coeffs = _coefficients(m, mu_vec, cfg, c)
    steps = _schedule(cfg, coeffs)
    reference = compute_reference(
        m, mu_vec, cfg.alpha, cfg.divergence, c, iters=_reference_iters(cfg.iters), seed=cfg.seed
    )
    budget = CriticConfig(n=cfg.n, h=cfg.horizon, n2=cfg.n2, h2=cfg.horizon2)

    gm = GenerativeModel(m, cfg.seed)
    trace = run_spma(
        gm, mu_vec, cfg.alpha, steps, cfg.divergence, cfg.iters, budget, c=c, reference=reference, coeffs=coeffs
    )
    exact = run_pma(m, mu_vec, cfg.alpha, steps, cfg.divergence, cfg.iters, reference=reference, c=c)
    envelope = check_inexact_envelope(trace, exact.final.gap, coeffs)
    summary = _trace_summary(trace, coeffs, envelope)
    summary.update(
        exact_final_gap=exact.final.gap,
        max_g_error=max((r.g_error for r in trace.records if r.g_error is not None), default=0.0),
        samples_per_iteration=budget.samples(m.n_states, m.n_actions),
    )

    exporter = DataExporter(cfg.output_dir)
    trace_path = exporter.export_trace(trace)
    policy_path = exporter.export_policy(Policy(table=trace.final.policy, floor=cfg.alpha), "final_policy")
    artifact = _artifact(exporter, cfg, summary, trace_csv=trace_path, tables={"final_policy": policy_path})
    console.print(_trace_table(trace))
    console.print(_summary_table(summary, "Stochastic PMA summary"))
    return artifact


@app.command("critic")
@_guard
def critic_cmd(
    mdp: Optional[Path] = MdpOption,
    fixture: Optional[FixtureName] = FixtureOption,
    param: List[str] = ParamOption,
    policy: Optional[Path] = PolicyOption,
    n: int = typer.Option(50, "--n", min=1, help="Critic trajectories N"),
    horizon: int = typer.Option(200, "--horizon", min=1, help="Critic horizon H"),
    n2: int = typer.Option(50, "--n2", min=1, help="Critic trajectories N'"),
    horizon2: int = typer.Option(200, "--horizon2", min=1, help="Critic horizon H'"),
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Monte Carlo estimates of K, Q and G under one policy."""
    cfg = _config(
        mdp_path=mdp, fixture=fixture, fixture_params=parse_params(param),
        n=n, horizon=horizon, n2=n2, horizon2=horizon2, seed=seed, out=out,
    )
    m = _load_mdp(cfg)
    p = _load_policy(policy, m)
    require_interior(p)
    c = classify(m)
    budget = CriticConfig(n=cfg.n, h=cfg.horizon, n2=cfg.n2, h2=cfg.horizon2)
    estimate = critic(GenerativeModel(m, cfg.seed), p, budget, c)
    exact = evaluate(m, p, c)

    exporter = DataExporter(cfg.output_dir)
    tables = {
        name: exporter.export_action_table(table, name)
        for name, table in (("K_hat", estimate.k_hat), ("Q_hat", estimate.q_hat), ("G_hat", estimate.g_hat))
    }
    summary = {
        "transitions": estimate.transitions,
        "samples_used": estimate.samples_used,
        "sup_error_G": float(np.max(np.abs(estimate.g_hat - exact.g))),
        "sup_error_K": float(np.max(np.abs(estimate.k_hat - exact.k))),
    }
    artifact = _artifact(exporter, cfg, summary, tables=tables)
    console.print(_summary_table(summary, "Critic"))
    return artifact


@app.command()
@_guard
def check(
    suite: CheckSuite = typer.Option(..., "--suite", help="Property suite"),
    param: List[str] = ParamOption,
    seed: int = SeedOption,
    out: Optional[Path] = OutOption,
):
    """Run a property suite; exit code 4 when any assertion fails."""
    report = run_suite(suite, seed, **parse_params(param))

    table = Table(title=f"Suite {report.suite.value} (seed {report.seed})")
    for header in ("Assertion", "Measured", "Threshold", "Margin", "Status"):
        table.add_column(header, justify="right" if header not in ("Assertion", "Status") else "left")
    for a in report.assertions:
        status = "[green]pass[/green]" if a.passed else "[red]FAIL[/red]"
        table.add_row(a.name, f"{a.measured:.3e}", f"{a.threshold:.3e}", f"{a.margin:.3e}", status)
    console.print(table)

    if out is not None:
        DataExporter(out).export_report(report)
    if not report.passed:
        raise typer.Exit(code=EXIT_SUITE_FAILED)


if __name__ == "__main__":
    app()
