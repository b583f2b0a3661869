"""Property suites run by the ``check`` command.

Each suite draws its cases from keyed streams of the root seed and returns a
``SuiteReport`` of measured quantities against thresholds.
"""

import inspect
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ...shared.config import settings
from ...shared.logging import get_logger, progress
from ..core.chain_analysis import chain_constants, classify, target_time_report
from ..core.errors import ClassificationInconsistencyError, InfeasibleConfigError
from ..core.oracles import brute_force_project
from ..core.pma import compute_reference, estimate_coefficients, iterations_to_epsilon, run_pma
from ..core.pma import check_linear_envelope, check_sublinear_envelope, select_alpha_weakly_communicating
from ..core.policy_iteration import policy_iteration
from ..core.projection import euclid_project_floor, kl_project_floor
from ..core.sampling import GenerativeModel, classify_by_sampling, critic, suggest_windows
from ..core.values import (
    bellman_residuals,
    evaluate,
    finite_diff_directional,
    performance_difference,
    policy_gradient,
)
from ..models.experiment import CheckSuite, FixtureName, SuiteReport
from ..models.mdp import Mdp, Policy, TangentDirection
from ..models.pma import ScheduleKind, StepSchedule
from ..models.projection import DivergenceKind
from ..models.sampling import CriticConfig
from .fixtures import gen_fixture
from .streams import keyed_generator

logger = get_logger(__name__)

NAMED_FIXTURES: List[Tuple[FixtureName, Dict[str, Any]]] = [
    (FixtureName.TWOCHAIN, {}),
    (FixtureName.RANDOM_MULTICHAIN, {}),
    (FixtureName.WEAKLY_COMM, {}),
    (FixtureName.ERGODIC_RING, {}),
]
WEAKLY_COMMUNICATING_FIXTURES = [NAMED_FIXTURES[2], NAMED_FIXTURES[3]]


def child_seed(seed: int, *key: int) -> int:
    """Integer seed derived from ``(seed, key...)``."""
    return int(keyed_generator(seed, key).integers(2**63))


def random_case(seed: int, *key: int) -> Mdp:
    """Small random multichain MDP: 1-3 classes of 1-3 states, 0-3 transient states."""
    rng = keyed_generator(seed, key)
    n_classes = int(rng.integers(1, 4))
    params = {
        "sizes": [int(x) for x in rng.integers(1, 4, size=n_classes)],
        "transient": int(rng.integers(0, 4)),
        "n_actions": int(rng.integers(2, 4)),
    }
    return gen_fixture(FixtureName.RANDOM_MULTICHAIN, params, seed=int(rng.integers(2**31)))


def random_mu(rng: np.random.Generator, n_states: int) -> np.ndarray:
    """Full-support distribution: half Dirichlet, half uniform."""
    return 0.5 * rng.dirichlet(np.ones(n_states)) + 0.5 / n_states


def bellman_suite(seed: int, n_cases: int = 100) -> SuiteReport:
    """Bellman residuals, Cesaro identities and class-wise constancy of J and K."""
    report = SuiteReport(suite=CheckSuite.BELLMAN, seed=seed)
    worst = dict.fromkeys(["gain", "bias", "normalization", "cesaro", "j_spread", "k_spread", "j_bound"], 0.0)

    for i in progress(range(n_cases), "bellman"):
        m = random_case(seed, 0, i)
        p = Policy.random(keyed_generator(seed, (1, i)), m.n_states, m.n_actions, 0.01)
        c = classify(m)
        values = evaluate(m, p, c)
        res = bellman_residuals(m, p, values)
        worst["gain"] = max(worst["gain"], res.gain)
        worst["bias"] = max(worst["bias"], res.bias)
        worst["normalization"] = max(worst["normalization"], res.normalization)

        p_pi = np.einsum("sa,sat->st", p.table, m.kernel)
        star = values.p_star
        for lhs in (star @ p_pi, p_pi @ star, star @ star):
            worst["cesaro"] = max(worst["cesaro"], float(np.max(np.abs(lhs - star))))
        for cls in c.recurrent_classes:
            worst["j_spread"] = max(worst["j_spread"], float(np.ptp(values.j[cls])))
            worst["k_spread"] = max(worst["k_spread"], float(np.ptp(values.k[cls])))
        worst["j_bound"] = max(worst["j_bound"], float(np.max(np.abs(values.j))) - m.reward_bound)

    report.add("gain_residual", worst["gain"], settings.bellman_tol)
    report.add("bias_residual", worst["bias"], settings.bellman_tol)
    report.add("bias_normalization", worst["normalization"], settings.bellman_tol)
    report.add("cesaro_identities", worst["cesaro"], settings.identity_tol)
    report.add("gain_constant_on_classes", worst["j_spread"], settings.identity_tol)
    report.add("action_gain_constant_on_classes", worst["k_spread"], settings.identity_tol)
    report.add("gain_within_reward_bound", worst["j_bound"], settings.identity_tol)
    return report


def pdl_suite(seed: int, n_cases: int = 10, n_pairs: int = 100) -> SuiteReport:
    """Performance difference identity on random multichain and unichain MDPs."""
    report = SuiteReport(suite=CheckSuite.PDL, seed=seed)
    identity, transient = 0.0, 0.0

    for i in progress(range(n_cases), "pdl"):
        for unichain in (False, True):
            if unichain:
                m = gen_fixture(FixtureName.RANDOM_MULTICHAIN, {"sizes": [3], "transient": 2}, seed=child_seed(seed, 2, i))
            else:
                m = random_case(seed, 0, i)
            c = classify(m)
            rng = keyed_generator(seed, (1, i, int(unichain)))
            for _ in range(n_pairs):
                p = Policy.random(rng, m.n_states, m.n_actions, 0.01)
                p2 = Policy.random(rng, m.n_states, m.n_actions, 0.01)
                result = performance_difference(m, p, p2, random_mu(rng, m.n_states), c)
                identity = max(identity, result.gap)
                if unichain:
                    transient = max(transient, abs(result.transient_term))

    report.add("performance_difference", identity, 1e-8)
    report.add("unichain_transient_term", transient, settings.identity_tol)
    return report


def grad_suite(seed: int, n_cases: int = 100, h: Optional[float] = None) -> SuiteReport:
    """Analytic directional derivatives against central differences."""
    report = SuiteReport(suite=CheckSuite.GRAD, seed=seed)
    worst = 0.0
    for i in progress(range(n_cases), "grad"):
        m = random_case(seed, 0, i)
        c = classify(m)
        rng = keyed_generator(seed, (1, i))
        p = Policy.random(rng, m.n_states, m.n_actions, 0.05)
        u = TangentDirection.random(rng, m.n_states, m.n_actions)
        mu = random_mu(rng, m.n_states)
        analytic = policy_gradient(m, p, mu, c).directional(u.table)
        numeric = finite_diff_directional(m, p, mu, u, h=h, c=c)
        worst = max(worst, abs(analytic - numeric) / (1.0 + abs(analytic)))
    report.add("directional_derivative_relative_error", worst, 1e-5)
    return report


def proj_suite(seed: int, n_cases: int = 1000, max_dim: int = 8) -> SuiteReport:
    """Fast projections against KKT enumeration, feasibility and worked values."""
    report = SuiteReport(suite=CheckSuite.PROJ, seed=seed)
    mismatch = {DivergenceKind.EUCLIDEAN: 0.0, DivergenceKind.KL: 0.0}
    feasibility = 0.0

    for i in progress(range(n_cases), "proj"):
        rng = keyed_generator(seed, (0, i))
        d = int(rng.integers(1, max_dim + 1))
        alpha = float(rng.uniform(0.0, 1.0 / d))
        q = 2.0 * rng.standard_normal(d)
        w = rng.dirichlet(np.ones(d))
        for kind, point, fast in (
            (DivergenceKind.EUCLIDEAN, q, euclid_project_floor),
            (DivergenceKind.KL, w, kl_project_floor),
        ):
            p = fast(point, alpha).p
            mismatch[kind] = max(mismatch[kind], float(np.max(np.abs(p - brute_force_project(kind, point, alpha)))))
            feasibility = max(feasibility, abs(p.sum() - 1.0), float(alpha - p.min()))

    report.add("euclid_vs_enumeration", mismatch[DivergenceKind.EUCLIDEAN], 1e-8)
    report.add("kl_vs_enumeration", mismatch[DivergenceKind.KL], 1e-8)
    report.add("feasibility", feasibility, settings.prob_tol)

    target = np.array([0.8, 0.2])
    euclid = euclid_project_floor(np.array([1.0, 0.0]), 0.2).p
    kl = kl_project_floor(np.array([0.9, 0.1]), 0.2).p
    report.add("euclid_worked_value", float(np.max(np.abs(euclid - target))), 1e-15)
    report.add("kl_worked_value", float(np.max(np.abs(kl - target))), 1e-15)
    return report


def classify_suite(seed: int, n_seeds: int = 100, delta: float = 0.05) -> SuiteReport:
    """Sampling-based classification against the exact classes."""
    report = SuiteReport(suite=CheckSuite.CLASSIFY, seed=seed)
    for f, (name, params) in enumerate(NAMED_FIXTURES):
        m = gen_fixture(name, params, seed=seed)
        p = Policy.uniform(m.n_states, m.n_actions)
        exact = classify(m)
        m1, m2 = suggest_windows(chain_constants(m, p, exact, seed=seed), delta)

        failures, inconsistent = 0, 0
        for j in progress(range(n_seeds), f"classify {name.value}"):
            try:
                sampled = classify_by_sampling(GenerativeModel(m, child_seed(seed, f, j)), p, m1, m2)
                failures += int(not sampled.same_as(exact))
            except ClassificationInconsistencyError:
                failures += 1
            try:
                classify_by_sampling(GenerativeModel(m, child_seed(seed, f, j, 1)), p, 4 * m1, 4 * m2)
            except ClassificationInconsistencyError:
                inconsistent += 1

        logger.info(f"{name.value}: windows ({m1}, {m2}), {failures}/{n_seeds} misclassified")
        report.add(f"{name.value}_failure_rate", failures / n_seeds, delta)
        report.add(f"{name.value}_inconsistent_at_4x", inconsistent, 0)
    return report


def critic_suite(seed: int, n_seeds: int = 100, n: int = 50, horizon: int = 200, eps: float = 0.05) -> SuiteReport:
    """Critic accuracy, truncation bias, sample accounting and determinism on twochain."""
    report = SuiteReport(suite=CheckSuite.CRITIC, seed=seed)
    m = gen_fixture(FixtureName.TWOCHAIN, {}, seed=seed)
    p = Policy.uniform(m.n_states, m.n_actions)
    c = classify(m)
    exact = evaluate(m, p, c)
    cfg = CriticConfig(n=n, h=horizon, n2=n, h2=horizon)

    within, accounting = 0, 0
    k_hats = []
    for j in progress(range(n_seeds), "critic"):
        estimate = critic(GenerativeModel(m, child_seed(seed, j)), p, cfg, c)
        within += int(np.max(np.abs(estimate.g_hat - exact.g)) <= eps)
        accounting = max(accounting, abs(estimate.samples_used - cfg.samples(m.n_states, m.n_actions)))
        k_hats.append(estimate.k_hat)

    bias = float(np.max(np.abs(np.mean(k_hats, axis=0) - exact.k)))
    bias_bound = 2.0 * (float(np.max(np.abs(exact.v))) + m.reward_bound) / (horizon + 1)
    first = critic(GenerativeModel(m, seed), p, cfg, c).g_hat
    again = critic(GenerativeModel(m, seed), p, cfg, c).g_hat

    report.add("miss_rate", 1.0 - within / n_seeds, 0.05)
    report.add("action_gain_bias", bias, bias_bound)
    report.add("sample_accounting", accounting, 0)
    report.add("replay_difference", float(np.max(np.abs(first - again))), 0.0)
    return report


def rates_suite(seed: int, iters: int = 500, alpha: float = 0.05, eta: float = 0.5) -> SuiteReport:
    """Rate shapes, monotone improvement and first-order optimality of exact PMA."""
    report = SuiteReport(suite=CheckSuite.RATES, seed=seed)
    for name, params in NAMED_FIXTURES[:3]:
        m = gen_fixture(name, params, seed=seed)
        mu = np.full(m.n_states, 1.0 / m.n_states)
        c = classify(m)
        coeffs = estimate_coefficients(m, mu, alpha, c, n_samples=50, seed=seed)
        c_step = coeffs.c_alpha if coeffs.c_alpha > 1.0 + 1e-9 else 2.0

        for kind in (DivergenceKind.EUCLIDEAN, DivergenceKind.KL):
            ref = compute_reference(m, mu, alpha, kind, c, n_starts=3, iters=300, seed=seed)
            label = f"{name.value}_{kind.value}"

            constant = run_pma(m, mu, alpha, StepSchedule(eta0=eta), kind, iters, reference=ref, c=c)
            env = check_sublinear_envelope(constant, coeffs, eta)
            report.add(f"{label}_constant_scaled_gap", env.shape_statistic, env.shape_threshold)

            adaptive = run_pma(
                m, mu, alpha, StepSchedule(kind=ScheduleKind.ADAPTIVE, eta0=eta, c_alpha=c_step), kind,
                iters, reference=ref, c=c,
            )
            env = check_linear_envelope(adaptive, coeffs, eta)
            report.add(f"{label}_adaptive_log_slope", env.shape_statistic, env.shape_threshold)

            drops, first_order = 0.0, -np.inf
            for trace in (constant, adaptive):
                drops = max(drops, float(np.max(-np.diff(trace.values), initial=0.0)))
                first_order = max(first_order, max((r.first_order for r in trace.records[:-1]), default=-np.inf))
            report.add(f"{label}_monotone", drops, settings.identity_tol)
            report.add(f"{label}_first_order", first_order, settings.identity_tol)
    return report


def target_suite(seed: int, ks: Tuple[int, ...] = (1, 10, 100)) -> SuiteReport:
    """Cesaro-average deviation against 2 t_tar / k on every named fixture."""
    report = SuiteReport(suite=CheckSuite.TARGET, seed=seed)
    for name, params in NAMED_FIXTURES:
        m = gen_fixture(name, params, seed=seed)
        p = Policy.uniform(m.n_states, m.n_actions)
        rows = target_time_report(m, p, classify(m), ks)
        report.add(f"{name.value}_excess", max(r.deviation - r.bound for r in rows), 1e-12)
    return report


def weak_suite(seed: int, eps: float = 0.05, n_samples: int = 50, n_starts: int = 3) -> SuiteReport:
    """Floor and iteration count chosen from eps on weakly communicating fixtures.

    alpha comes from ``select_alpha_weakly_communicating`` and K from
    ``iterations_to_epsilon`` with adaptive steps; pi_K must be within eps
    of the optimal gain and within eps/2 of the best policy of Pi_alpha.
    """
    report = SuiteReport(suite=CheckSuite.WEAK, seed=seed)
    for name, params in WEAKLY_COMMUNICATING_FIXTURES:
        m = gen_fixture(name, params, seed=seed)
        mu = np.full(m.n_states, 1.0 / m.n_states)
        c = classify(m)
        optimal = policy_iteration(m)
        alpha = select_alpha_weakly_communicating(eps, m.n_actions, optimal.q_star_norm)

        reference = compute_reference(m, mu, alpha, DivergenceKind.KL, c, n_starts=n_starts, seed=seed)
        coeffs = estimate_coefficients(m, mu, alpha, c, n_samples=n_samples, seed=seed)
        c_step = coeffs.c_alpha if coeffs.c_alpha > 1.0 + 1e-9 else 2.0
        schedule = StepSchedule(kind=ScheduleKind.ADAPTIVE, eta0=1.0, c_alpha=c_step)

        start = run_pma(m, mu, alpha, schedule, DivergenceKind.KL, 0, reference=reference, c=c).final
        iters = iterations_to_epsilon(eps, start.gap, start.divergence_to_ref, c_step, schedule)
        trace = run_pma(
            m, mu, alpha, schedule, DivergenceKind.KL, iters, reference=reference, c=c, log_every=max(1, iters // 10)
        )

        logger.info(f"{name.value}: alpha = {alpha:.4g}, C_alpha >= {coeffs.c_alpha:.4g}, K = {iters}")
        report.add(f"{name.value}_optimality_gap", float(mu @ optimal.gain) - trace.final.j_mu, eps)
        report.add(f"{name.value}_reference_gap", trace.final.gap, eps / 2)
    return report


SUITES: Dict[CheckSuite, Callable[..., SuiteReport]] = {
    CheckSuite.BELLMAN: bellman_suite,
    CheckSuite.PDL: pdl_suite,
    CheckSuite.GRAD: grad_suite,
    CheckSuite.PROJ: proj_suite,
    CheckSuite.CLASSIFY: classify_suite,
    CheckSuite.CRITIC: critic_suite,
    CheckSuite.RATES: rates_suite,
    CheckSuite.TARGET: target_suite,
    CheckSuite.WEAK: weak_suite,
}


def run_suite(suite: CheckSuite, seed: Optional[int] = None, **params: Any) -> SuiteReport:
    """Run one property suite.

    Args:
        suite: Suite name
        seed: Root seed (``settings.default_seed`` when None)
        **params: Suite-specific overrides such as ``n_cases`` or ``iters``

    Returns:
        SuiteReport

    Raises:
        InfeasibleConfigError: Unknown suite or parameter
    """
    try:
        fn = SUITES[CheckSuite(suite)]
    except ValueError as exc:
        raise InfeasibleConfigError(f"unknown suite {suite!r}; choose from {[s.value for s in CheckSuite]}") from exc
    allowed = set(inspect.signature(fn).parameters) - {"seed"}
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise InfeasibleConfigError(f"unknown parameters for {fn.__name__}: {unknown} (allowed {sorted(allowed)})")

    seed = settings.default_seed if seed is None else int(seed)
    report = fn(seed, **params)
    status = "passed" if report.passed else f"FAILED ({len(report.failures)} assertions)"
    logger.info(f"Suite {report.suite.value} {status}")
    return report
