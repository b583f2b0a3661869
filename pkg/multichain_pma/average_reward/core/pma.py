"""Alpha-clipped policy mirror ascent with exact gradients, coefficients and envelopes."""

import itertools
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from ...shared.base import BaseSolver
from ...shared.config import settings
from ...shared.logging import get_logger, progress
from ..models.chain import Classification
from ..models.mdp import Mdp, Policy
from ..models.pma import (
    CoefficientEstimate,
    CoefficientMethod,
    EnvelopeReport,
    EnvelopeRow,
    IterationRecord,
    PmaTrace,
    ReferencePolicy,
    ReferenceSource,
    ScheduleKind,
    StepSchedule,
)
from ..models.projection import DivergenceKind
from ..models.values import ValueBundle
from ..utils.streams import keyed_generator
from .chain_analysis import classify, visitation
from .errors import InfeasibleConfigError, InvalidPolicyError
from .mdp_core import Distribution, as_distribution, validate_policy
from .policy_iteration import policy_iteration
from .projection import divergence, mirror_table
from .values import evaluate, gain

logger = get_logger(__name__)

GradientStep = Tuple[np.ndarray, int, Optional[float]]


def weighted_divergence(kind: DivergenceKind, rho: np.ndarray, p: np.ndarray, p2: np.ndarray) -> float:
    """sum_s rho(s) D(p(.|s), p2(.|s))."""
    return float(sum(rho[s] * divergence(kind, p[s], p2[s]) for s in range(p.shape[0])))


def check_floor(alpha: float, n_actions: int) -> None:
    """Require 0 < alpha < 1/|A|."""
    if not (0.0 < alpha < 1.0 / n_actions):
        raise InfeasibleConfigError(f"floor alpha = {alpha!r} must lie in (0, 1/{n_actions})")


class PolicyMirrorAscent(BaseSolver):
    """Per-state mirror ascent over Pi_alpha driven by exact G^pi."""

    stochastic = False

    def __init__(
        self,
        m: Mdp,
        mu: Distribution,
        alpha: float,
        schedule: StepSchedule,
        kind: DivergenceKind = DivergenceKind.KL,
        c: Optional[Classification] = None,
        reference: Optional[ReferencePolicy] = None,
        name: Optional[str] = None,
        **kwargs,
    ):
        """Initialize the solver.

        Args:
            m: MDP
            mu: Full-support initial distribution
            alpha: Policy floor in (0, 1/|A|)
            schedule: Step-size schedule
            kind: Divergence of the mirror step
            c: Classification (computed from ``m`` when omitted)
            reference: Comparison policy for gaps and divergences
            name: Solver name for logging
            **kwargs: Solver options such as ``log_every``
        """
        super().__init__(name=name, **kwargs)
        check_floor(alpha, m.n_actions)
        self.mdp = m
        self.mu = as_distribution(mu, m.n_states, full_support=True)
        self.alpha = alpha
        self.schedule = schedule
        self.kind = DivergenceKind(kind)
        self.classification = classify(m) if c is None else c
        self.reference = reference
        self._reference_rho = None
        if reference is not None:
            ref_policy = Policy(table=reference.policy)
            self._reference_rho = visitation(m, ref_policy, self.mu, self.classification).rho

    def gradient(self, k: int, table: np.ndarray, values: ValueBundle) -> GradientStep:
        """G used for step ``k``: (table, samples consumed, sup error against exact G)."""
        return values.g, 0, None

    def _policy(self, table: np.ndarray) -> Policy:
        return Policy(table=table, floor=self.alpha)

    def run(self, iters: int, pi0: Optional[Policy] = None) -> PmaTrace:
        """Run ``iters`` mirror steps from ``pi0``.

        Args:
            iters: Number of updates K (the trace holds K + 1 iterates)
            pi0: Starting policy in Pi_alpha (uniform by default)

        Returns:
            PmaTrace
        """
        if iters < 0:
            raise InfeasibleConfigError(f"iteration count must be nonnegative, got {iters}")
        m = self.mdp
        if pi0 is None:
            pi0 = Policy.uniform(m.n_states, m.n_actions)
        validate_policy(m, pi0)
        if not pi0.in_floor(self.alpha):
            raise InvalidPolicyError(f"initial policy is outside Pi_alpha for alpha = {self.alpha}")

        steps = self.schedule.steps(iters, cap=settings.max_step_size)
        trace = PmaTrace(
            alpha=self.alpha,
            divergence=self.kind,
            schedule=self.schedule,
            reference_value=None if self.reference is None else self.reference.j_mu,
            reference_source=None if self.reference is None else self.reference.source,
            stochastic=self.stochastic,
        )

        table = np.array(pi0.table)
        samples = 0
        for k in self.iterations(iters):
            values = evaluate(m, self._policy(table), self.classification)
            j_mu = float(self.mu @ values.j)

            next_table, eta, first_order, g_error = None, None, None, None
            if k < iters:
                g, used, g_error = self.gradient(k, table, values)
                samples += used
                eta = steps[k]
                next_table = mirror_table(table, g, eta, self.kind, self.alpha)
                first_order = float(np.max(np.sum(g * (table - next_table), axis=1)))

            gap, div = None, None
            if self.reference is not None:
                gap = self.reference.j_mu - j_mu
                div = weighted_divergence(self.kind, self._reference_rho, self.reference.policy, table)

            trace.records.append(IterationRecord(
                k=k,
                policy=table,
                j_mu=j_mu,
                gap=gap,
                divergence_to_ref=div,
                eta=eta,
                first_order=first_order,
                samples_cum=samples,
                g_error=g_error,
                inexact_slack=self._slack(g_error),
                wall_time=self.elapsed,
            ))
            if self.should_log(k, iters):
                self.logger.debug(f"k={k} J_mu={j_mu:.12g}" + ("" if gap is None else f" gap={gap:.3e}"))
            if next_table is not None:
                table = next_table

        self.logger.info(
            f"{self.name}: {iters} iterations, J_mu {trace.records[0].j_mu:.6g} -> {trace.final.j_mu:.6g}"
            + ("" if trace.final.gap is None else f", final gap {trace.final.gap:.3e}")
        )
        return trace

    def _slack(self, g_error: Optional[float]) -> Optional[float]:
        return None


def _as_reference(
    m: Mdp, mu: np.ndarray, c: Classification, reference: Union[Policy, ReferencePolicy, None]
) -> Optional[ReferencePolicy]:
    if reference is None or isinstance(reference, ReferencePolicy):
        return reference
    return ReferencePolicy(policy=reference.table, j_mu=gain(m, reference, mu, c), source=ReferenceSource.SUPPLIED)


def run_pma(
    m: Mdp,
    mu: Distribution,
    alpha: float,
    schedule: StepSchedule,
    kind: DivergenceKind = DivergenceKind.KL,
    iters: int = 200,
    pi0: Optional[Policy] = None,
    reference: Union[Policy, ReferencePolicy, None] = None,
    c: Optional[Classification] = None,
    log_every: Optional[int] = None,
) -> PmaTrace:
    """Exact alpha-clipped policy mirror ascent.

    Args:
        m: MDP
        mu: Full-support initial distribution
        alpha: Floor in (0, 1/|A|)
        schedule: Constant or adaptive steps
        kind: Divergence of the mirror step
        iters: Number of updates K
        pi0: Starting policy in Pi_alpha (uniform by default)
        reference: Policy (or precomputed reference) for gaps
        c: Classification of ``m``
        log_every: Iterates between debug lines (``settings.log_every`` when None)

    Returns:
        PmaTrace with K + 1 records
    """
    c = classify(m) if c is None else c
    mu_vec = as_distribution(mu, m.n_states, full_support=True)
    solver = PolicyMirrorAscent(
        m, mu_vec, alpha, schedule, kind, c=c, reference=_as_reference(m, mu_vec, c, reference), log_every=log_every
    )
    return solver.run(iters, pi0)


def compute_reference(
    m: Mdp,
    mu: Distribution,
    alpha: float,
    kind: DivergenceKind = DivergenceKind.KL,
    c: Optional[Classification] = None,
    n_starts: int = 10,
    iters: int = 200,
    schedule: Optional[StepSchedule] = None,
    seed: Optional[int] = None,
) -> ReferencePolicy:
    """Best known policy of Pi_alpha.

    Compares multi-start mirror ascent (random starts in Pi_alpha) with the
    alpha-clipped gain-bias optimal deterministic policy and keeps the larger
    J_mu.
    """
    c = classify(m) if c is None else c
    mu_vec = as_distribution(mu, m.n_states, full_support=True)
    check_floor(alpha, m.n_actions)
    seed = settings.default_seed if seed is None else seed
    schedule = schedule or StepSchedule(kind=ScheduleKind.ADAPTIVE, eta0=1.0, c_alpha=2.0)
    solver = PolicyMirrorAscent(m, mu_vec, alpha, schedule, kind, c=c, name="ReferenceSearch")

    best_table, best_value = None, -math.inf
    starts = [Policy.uniform(m.n_states, m.n_actions)] + [
        Policy.random(keyed_generator(seed, (0, j)), m.n_states, m.n_actions, alpha)
        for j in range(max(n_starts - 1, 0))
    ]
    for start in progress(starts, desc="reference starts"):
        final = solver.run(iters, start).final
        if final.j_mu > best_value:
            best_table, best_value = final.policy, final.j_mu

    optimal = policy_iteration(m)
    clipped = Policy.deterministic(optimal.actions, m.n_actions, alpha)
    clipped_value = gain(m, clipped, mu_vec, c)

    if clipped_value > best_value:
        ref = ReferencePolicy(policy=clipped.table, j_mu=clipped_value, source=ReferenceSource.CLIPPED_POLICY_ITERATION)
    else:
        ref = ReferencePolicy(policy=best_table, j_mu=best_value, source=ReferenceSource.MULTI_START)
    solver.logger.info(f"Reference J_mu = {ref.j_mu:.12g} from {ref.source.value}")
    return ref


def estimate_coefficients(
    m: Mdp,
    mu: Distribution,
    alpha: float,
    c: Optional[Classification] = None,
    n_samples: int = 100,
    seed: Optional[int] = None,
    include_vertices: bool = True,
) -> CoefficientEstimate:
    """Sampled lower bounds on B_alpha = max ||rho||_1 and C_alpha = max rho ratio.

    Evaluates every alpha-clipped deterministic policy when there are at most
    ``settings.vertex_enum_max`` of them, plus ``n_samples`` uniform draws
    from Pi_alpha.
    """
    c = classify(m) if c is None else c
    mu_vec = as_distribution(mu, m.n_states, full_support=True)
    check_floor(alpha, m.n_actions)
    seed = settings.default_seed if seed is None else seed

    policies: List[Policy] = []
    methods: List[CoefficientMethod] = []
    n_vertices = 0
    if include_vertices and m.n_actions ** m.n_states <= settings.vertex_enum_max:
        for actions in itertools.product(range(m.n_actions), repeat=m.n_states):
            policies.append(Policy.deterministic(actions, m.n_actions, alpha))
        n_vertices = len(policies)
        methods.append(CoefficientMethod.VERTEX_ENUMERATION)
    if n_samples > 0:
        policies.extend(
            Policy.random(keyed_generator(seed, (1, j)), m.n_states, m.n_actions, alpha)
            for j in range(n_samples)
        )
        methods.append(CoefficientMethod.RANDOM_SAMPLING)
    if not policies:
        raise InfeasibleConfigError("coefficient estimation needs at least one policy")

    rhos = np.array([visitation(m, p, mu_vec, c).rho for p in policies])
    b_alpha = float(np.max(rhos.sum(axis=1)))
    c_alpha = float(np.max(rhos.max(axis=0) / rhos.min(axis=0)))

    logger.warning(
        f"B_alpha >= {b_alpha:.6g} and C_alpha >= {c_alpha:.6g} are sampled lower bounds "
        f"({n_vertices} vertices, {n_samples} random policies)"
    )
    return CoefficientEstimate(
        b_alpha=b_alpha,
        c_alpha=c_alpha,
        methods=methods,
        n_samples=n_samples,
        n_vertices=n_vertices,
    )


def _reference_gaps(trace: PmaTrace, reference_value: Optional[float]) -> Tuple[np.ndarray, float]:
    j_ref = trace.reference_value if reference_value is None else reference_value
    if j_ref is None:
        raise InfeasibleConfigError("envelope checks need a reference value")
    if not trace.records:
        raise InfeasibleConfigError("envelope checks need a nonempty trace")
    return j_ref - trace.values, j_ref


def _initial_divergence(trace: PmaTrace, notes: List[str]) -> float:
    d0 = trace.records[0].divergence_to_ref
    if d0 is None:
        notes.append("trace has no reference divergence; D(pi_ref, pi_0) taken as 0")
        return 0.0
    return d0


def check_sublinear_envelope(
    trace: PmaTrace,
    coeffs: CoefficientEstimate,
    eta: float,
    reference_value: Optional[float] = None,
    burn_in: int = 5,
    factor: float = 2.0,
) -> EnvelopeReport:
    """Gaps of a constant-step run against (D0/eta + C gap0)/(k+1).

    The bound uses the sampled C_alpha, so ``advisory_ok`` is advisory. The
    hard check is that gap_k (k+1) stays within ``factor`` times its value at
    ``burn_in`` for every later k.
    """
    gaps, _ = _reference_gaps(trace, reference_value)
    notes = ["C_alpha is a sampled lower bound; the envelope is advisory"]
    d0 = _initial_divergence(trace, notes)
    head = d0 / eta + coeffs.c_alpha * gaps[0]

    rows = []
    for k, gap in enumerate(gaps):
        bound = head / (k + 1)
        rows.append(EnvelopeRow(k=k, gap=float(gap), bound=float(bound), margin=float(bound - gap)))

    ks = np.arange(gaps.size)
    scaled = gaps * (ks + 1)
    anchor = min(burn_in, gaps.size - 1)
    threshold = factor * max(scaled[anchor], 0.0) + 1e-9
    statistic = float(np.max(scaled[anchor:]))
    return EnvelopeReport(
        kind=ScheduleKind.CONSTANT,
        rows=rows,
        advisory_ok=all(r.margin >= -1e-12 for r in rows),
        shape_ok=statistic <= threshold,
        shape_statistic=statistic,
        shape_threshold=float(threshold),
        notes=notes,
    )


def check_linear_envelope(
    trace: PmaTrace,
    coeffs: CoefficientEstimate,
    eta0: float,
    reference_value: Optional[float] = None,
    slope_tol: float = 0.05,
    gap_floor: float = 1e-10,
) -> EnvelopeReport:
    """Gaps of an adaptive-step run against (1 - 1/C)^k (D0/(eta0 (C-1)) + gap0).

    The hard check fits a least-squares line to log(gap_k) over gaps above
    ``gap_floor`` and requires its slope to be at most log(1 - 1/C) + ``slope_tol``.
    """
    gaps, _ = _reference_gaps(trace, reference_value)
    notes = ["C_alpha is a sampled lower bound; the envelope is advisory"]
    d0 = _initial_divergence(trace, notes)
    c_hat = coeffs.c_alpha

    rows = []
    if c_hat > 1.0:
        rate = 1.0 - 1.0 / c_hat
        head = d0 / (eta0 * (c_hat - 1.0)) + gaps[0]
        threshold = math.log(rate) + slope_tol
    else:
        notes.append("C_alpha estimate is 1; the geometric envelope is undefined")
        rate, head, threshold = 1.0, math.inf, math.inf
    for k, gap in enumerate(gaps):
        bound = head * rate ** k
        rows.append(EnvelopeRow(k=k, gap=float(gap), bound=float(bound), margin=float(bound - gap)))

    ks = np.flatnonzero(gaps > gap_floor)
    if ks.size >= 2:
        slope = float(np.polyfit(ks, np.log(gaps[ks]), 1)[0])
    else:
        notes.append(f"fewer than two gaps above {gap_floor:g}; decay treated as immediate")
        slope = -math.inf
    return EnvelopeReport(
        kind=ScheduleKind.ADAPTIVE,
        rows=rows,
        advisory_ok=all(r.margin >= -1e-12 for r in rows),
        shape_ok=slope <= threshold,
        shape_statistic=slope,
        shape_threshold=threshold,
        notes=notes,
    )


def select_alpha_weakly_communicating(epsilon: float, n_actions: int, q_star_norm: float) -> float:
    """Floor alpha = eps / (2 (|A| + 1) ||Q^pi_star||_inf).

    Raises:
        InfeasibleConfigError: eps outside (0, 1), a nonpositive norm, or alpha >= 1/|A|
    """
    if not 0.0 < epsilon < 1.0:
        raise InfeasibleConfigError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not q_star_norm > 0.0:
        raise InfeasibleConfigError(f"||Q*|| must be positive, got {q_star_norm!r}")
    alpha = epsilon / (2.0 * (n_actions + 1) * q_star_norm)
    if alpha >= 1.0 / n_actions:
        raise InfeasibleConfigError(
            f"alpha = {alpha:.6g} is not below 1/|A| = {1.0 / n_actions:.6g}; epsilon too large"
        )
    return alpha


def iterations_to_epsilon(
    epsilon: float,
    gap0: float,
    divergence0: float,
    c_alpha: float,
    schedule: StepSchedule,
) -> int:
    """Iterations after which the weakly communicating rates give an eps/2 gap.

    Constant steps: (2/eps)(D0/eta + C gap0).
    Adaptive steps: log(2 (gap0 + D0/(eta0 (C-1))) / eps) / log(C/(C-1)).
    """
    if not epsilon > 0.0:
        raise InfeasibleConfigError(f"epsilon must be positive, got {epsilon!r}")
    gap0 = max(gap0, 0.0)
    if schedule.kind == ScheduleKind.CONSTANT:
        count = (2.0 / epsilon) * (divergence0 / schedule.eta0 + c_alpha * gap0)
    else:
        if c_alpha <= 1.0:
            raise InfeasibleConfigError("adaptive iteration count needs C_alpha > 1")
        head = 2.0 * (gap0 + divergence0 / (schedule.eta0 * (c_alpha - 1.0))) / epsilon
        count = math.log(head) / math.log(c_alpha / (c_alpha - 1.0)) if head > 1.0 else 0.0
    return max(1, math.ceil(count))
