"""Generative-model rollouts, the critic, classification by sampling and stochastic PMA."""

import math
from typing import Callable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from ...shared.config import settings
from ...shared.logging import get_logger
from ..models.chain import ChainConstants, Classification
from ..models.mdp import Mdp, Policy
from ..models.pma import (
    CoefficientEstimate,
    EnvelopeReport,
    EnvelopeRow,
    PmaTrace,
    ReferencePolicy,
    StepSchedule,
)
from ..models.projection import DivergenceKind
from ..models.sampling import CriticConfig, GEstimate, Trajectory
from ..models.values import ValueBundle
from ..utils.streams import cumulative, keyed_generator, sample_indices
from .chain_analysis import classify
from .errors import ClassificationInconsistencyError, InfeasibleConfigError
from .mdp_core import Distribution, as_distribution, validate_policy
from .pma import GradientStep, PolicyMirrorAscent, _as_reference
from .values import evaluate

logger = get_logger(__name__)

# first element of every stream key
PHASE_ROLLOUT = 0
PHASE_GAIN = 1
PHASE_RELATIVE = 2
PHASE_CLASSIFY = 3

GradientOracle = Callable[[Policy], np.ndarray]


class GenerativeModel:
    """Next-state oracle for an MDP with a sample meter.

    Every trajectory reads its uniforms from a Philox stream keyed by
    ``(seed, key...)``, so results depend only on the seed and the keys, not
    on the order in which trajectories are generated.
    """

    def __init__(self, mdp: Mdp, seed: Optional[int] = None):
        """Initialize the generative model.

        Args:
            mdp: MDP to sample from
            seed: Root seed (``settings.default_seed`` when None)
        """
        self.mdp = mdp
        self.seed = settings.default_seed if seed is None else int(seed)
        self.samples = 0
        self._calls = 0
        self._kernel_cdf = cumulative(mdp.kernel)

    def stream(self, *key: int) -> np.random.Generator:
        return keyed_generator(self.seed, key)

    def next_call(self) -> int:
        """Index distinguishing successive high-level calls."""
        self._calls += 1
        return self._calls - 1

    def simulate(
        self,
        p: Policy,
        s0: int,
        a0: Optional[int],
        horizon: int,
        keys: Sequence[Tuple[int, ...]],
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Simulate one trajectory per key from (s0, a0).

        Args:
            p: Policy choosing the actions after the first
            s0: Start state
            a0: First action (drawn from ``p`` when None)
            horizon: Transitions per trajectory
            keys: Stream key of each trajectory

        Returns:
            (states, actions), each of shape (len(keys), horizon + 1)
        """
        if horizon < 0:
            raise ValueError(f"horizon must be nonnegative, got {horizon}")
        n = len(keys)
        uniforms = np.stack([self.stream(*key).random((horizon + 1, 2)) for key in keys])
        policy_cdf = cumulative(p.table)

        states = np.empty((n, horizon + 1), dtype=int)
        actions = np.empty((n, horizon + 1), dtype=int)
        states[:, 0] = s0
        if a0 is None:
            actions[:, 0] = sample_indices(np.repeat(policy_cdf[s0][None, :], n, axis=0), uniforms[:, 0, 1])
        else:
            actions[:, 0] = a0

        for i in range(1, horizon + 1):
            rows = self._kernel_cdf[states[:, i - 1], actions[:, i - 1]]
            states[:, i] = sample_indices(rows, uniforms[:, i, 0])
            actions[:, i] = sample_indices(policy_cdf[states[:, i]], uniforms[:, i, 1])

        self.samples += n * horizon
        return states, actions


def rollout(
    gm: GenerativeModel,
    p: Policy,
    s0: int,
    a0: Optional[int],
    horizon: int,
    key: Optional[Tuple[int, ...]] = None,
) -> Trajectory:
    """One trajectory (s_0, a_0), ..., (s_H, a_H) under ``p``.

    Args:
        gm: Generative model (its counter advances by ``horizon``)
        p: Policy
        s0: Start state
        a0: First action, drawn from ``p`` when None
        horizon: Number of transitions H
        key: Stream key (a fresh call index when omitted)

    Returns:
        Trajectory
    """
    validate_policy(gm.mdp, p)
    key = (PHASE_ROLLOUT, gm.next_call()) if key is None else tuple(key)
    states, actions = gm.simulate(p, s0, a0, horizon, [key])
    return Trajectory(states=states[0].tolist(), actions=actions[0].tolist())


def critic(gm: GenerativeModel, p: Policy, cfg: CriticConfig, c: Classification) -> GEstimate:
    """Monte Carlo estimates of K, Q and G.

    K_hat(s, a) averages (1/(H+1)) sum_i r(s_i, a_i) over N trajectories
    started at (s, a). Q_hat averages the nested partial sums
    (1/(H'+1)) sum_h sum_{i<=h} (r - K_hat)(s_i, a_i) over N' trajectories.

    Args:
        gm: Generative model
        p: Interior policy
        cfg: Trajectory budgets
        c: Classification used to splice G_hat

    Returns:
        GEstimate
    """
    m = gm.mdp
    validate_policy(m, p)
    call = gm.next_call()
    before = gm.samples
    k_hat = np.zeros((m.n_states, m.n_actions))
    q_hat = np.zeros((m.n_states, m.n_actions))

    for s in range(m.n_states):
        for a in range(m.n_actions):
            keys = [(PHASE_GAIN, call, s, a, j) for j in range(cfg.n)]
            states, actions = gm.simulate(p, s, a, cfg.h, keys)
            k_hat[s, a] = m.reward[states, actions].mean()

    weights = (cfg.h2 + 1 - np.arange(cfg.h2 + 1)) / (cfg.h2 + 1)
    for s in range(m.n_states):
        for a in range(m.n_actions):
            keys = [(PHASE_RELATIVE, call, s, a, j) for j in range(cfg.n2)]
            states, actions = gm.simulate(p, s, a, cfg.h2, keys)
            centred = m.reward[states, actions] - k_hat[states, actions]
            q_hat[s, a] = float((centred @ weights).mean())

    g_hat = np.where(c.recurrent_mask[:, None], q_hat, k_hat)
    transitions = gm.samples - before
    starts = m.n_states * m.n_actions * (cfg.n + cfg.n2)
    logger.debug(f"Critic call {call}: {transitions} transitions")
    return GEstimate(
        g_hat=g_hat,
        k_hat=k_hat,
        q_hat=q_hat,
        transitions=transitions,
        samples_used=transitions + starts,
    )


def critic_budget(
    eps: float,
    delta: float,
    t_tar: float,
    v_norm: float,
    r_bound: float,
    n_states: int,
    n_actions: int,
) -> CriticConfig:
    """Trajectory budgets that make ||G_hat - G||_inf <= eps with probability 1 - delta.

    These are the conservative constants of the concentration and truncation
    arguments: H' = ceil(3 (2 t_tar + 1) ||V|| / eps), eps_K = 2 eps / (3 (H' + 2)),
    H = ceil(4 (||V|| + R) / eps_K), N = ceil(8 R^2 / eps_K^2 log(2|S||A|/delta)),
    N' = ceil(2 R^2 (H' + 2)^2 / (eps/3)^2 log(2|S||A|/delta)).
    """
    if not eps > 0.0:
        raise InfeasibleConfigError(f"accuracy must be positive, got {eps!r}")
    if not 0.0 < delta < 1.0:
        raise InfeasibleConfigError(f"confidence delta must lie in (0, 1), got {delta!r}")
    log_term = math.log(2.0 * n_states * n_actions / delta)
    h2 = max(1, math.ceil(3.0 * (2.0 * t_tar + 1.0) * v_norm / eps))
    eps_k = 2.0 * eps / (3.0 * (h2 + 2))
    h = max(1, math.ceil(4.0 * (v_norm + r_bound) / eps_k))
    n = max(1, math.ceil(8.0 * r_bound ** 2 / eps_k ** 2 * log_term))
    n2 = max(1, math.ceil(2.0 * r_bound ** 2 * (h2 + 2) ** 2 / (eps / 3.0) ** 2 * log_term))
    return CriticConfig(n=n, h=h, n2=n2, h2=h2)


def classify_by_sampling(
    gm: GenerativeModel,
    p: Policy,
    m1: int,
    m2: int,
    probe_states: Optional[Sequence[int]] = None,
) -> Classification:
    """Recover the recurrent classes from single trajectories.

    Each unclassified probe rolls one trajectory s_0..s_{m1+m2-1}; the states
    visited in the window [m1, m1 + m2) form a class. The probe is recurrent
    when it lies in that window set and transient otherwise.

    Args:
        gm: Generative model
        p: Interior policy
        m1: Burn-in length
        m2: Window length
        probe_states: Probe order; unlisted states are appended

    Returns:
        Classification

    Raises:
        ClassificationInconsistencyError: two window sets overlap without
            being equal, or a state declared transient shows up in a window
    """
    m = gm.mdp
    validate_policy(m, p)
    if m1 < 1 or m2 < 1:
        raise InfeasibleConfigError(f"windows must be positive, got m1={m1}, m2={m2}")
    order = list(dict.fromkeys(int(s) for s in (probe_states or [])))
    order += [s for s in range(m.n_states) if s not in set(order)]

    call = gm.next_call()
    classes: List[Set[int]] = []
    transient: Set[int] = set()
    classified: Set[int] = set()

    for probe in order:
        if probe in classified:
            continue
        states, _ = gm.simulate(p, probe, None, m1 + m2 - 1, [(PHASE_CLASSIFY, call, probe)])
        window = set(int(s) for s in states[0, m1:m1 + m2])

        if window & transient:
            raise ClassificationInconsistencyError(sorted(window & transient), sorted(window), probe)
        for known in classes:
            if known & window and known != window:
                raise ClassificationInconsistencyError(sorted(known), sorted(window), probe)
        if window not in classes:
            classes.append(window)
        classified |= window
        if probe not in window:
            transient.add(probe)
            classified.add(probe)

    return Classification(
        n_states=m.n_states,
        recurrent_classes=[sorted(cls) for cls in classes],
        transient=sorted(transient),
    )


def classify_by_sampling_with_retry(
    gm: GenerativeModel,
    p: Policy,
    m1: int,
    m2: int,
    probe_states: Optional[Sequence[int]] = None,
    max_retries: int = 3,
) -> Classification:
    """``classify_by_sampling`` doubling both windows after each inconsistency."""
    for attempt in range(max_retries + 1):
        try:
            return classify_by_sampling(gm, p, m1, m2, probe_states)
        except ClassificationInconsistencyError as exc:
            if attempt == max_retries:
                raise
            logger.warning(f"{exc}; retrying with windows ({2 * m1}, {2 * m2})")
            m1, m2 = 2 * m1, 2 * m2
    raise AssertionError("unreachable")


def suggest_windows(constants: ChainConstants, delta: float) -> Tuple[int, int]:
    """Windows m1 = ceil(t_half log(2/delta)), m2 = ceil(e t_cov log(2/delta)), both at least 1."""
    if not 0.0 < delta < 1.0:
        raise InfeasibleConfigError(f"delta must lie in (0, 1), got {delta!r}")
    log_term = math.log(2.0 / delta)
    slack = 1e-9
    m1 = max(1, math.ceil(constants.t_half * log_term - slack))
    m2 = max(1, math.ceil(math.e * constants.t_cov * log_term - slack))
    return m1, m2


def exact_gradient_oracle(m: Mdp, c: Classification) -> GradientOracle:
    """Oracle returning the exact G^pi, for zero-error stochastic runs."""
    return lambda policy: evaluate(m, policy, c).g


class StochasticPolicyMirrorAscent(PolicyMirrorAscent):
    """Mirror ascent whose steps use critic estimates of G."""

    stochastic = True

    def __init__(
        self,
        gm: GenerativeModel,
        mu: Distribution,
        alpha: float,
        schedule: StepSchedule,
        cfgs: Union[CriticConfig, Sequence[CriticConfig]],
        kind: DivergenceKind = DivergenceKind.KL,
        c: Optional[Classification] = None,
        reference: Optional[ReferencePolicy] = None,
        oracle: Optional[GradientOracle] = None,
        coeffs: Optional[CoefficientEstimate] = None,
        name: Optional[str] = None,
        **kwargs,
    ):
        """Initialize the stochastic solver.

        Args:
            gm: Generative model supplying every critic sample
            mu: Full-support initial distribution
            alpha: Policy floor
            schedule: Step-size schedule
            cfgs: Critic budgets, one shared config or one per iteration
            kind: Divergence of the mirror step
            c: Classification used by the critic
            reference: Comparison policy for gaps
            oracle: Replaces the critic when given (no samples are drawn)
            coeffs: Coefficient estimate used for the monotonicity slack
            name: Solver name for logging
            **kwargs: Solver options such as ``log_every``
        """
        super().__init__(gm.mdp, mu, alpha, schedule, kind, c=c, reference=reference, name=name, **kwargs)
        self.gm = gm
        self.cfgs = cfgs
        self.oracle = oracle
        self.coeffs = coeffs

    def _config(self, k: int) -> CriticConfig:
        if isinstance(self.cfgs, CriticConfig):
            return self.cfgs
        if k >= len(self.cfgs):
            raise InfeasibleConfigError(f"no critic config for iteration {k} ({len(self.cfgs)} supplied)")
        return self.cfgs[k]

    def gradient(self, k: int, table: np.ndarray, values: ValueBundle) -> GradientStep:
        policy = self._policy(table)
        if self.oracle is not None:
            g_hat, used = np.asarray(self.oracle(policy), dtype=float), 0
        else:
            estimate = critic(self.gm, policy, self._config(k), self.classification)
            g_hat, used = estimate.g_hat, estimate.samples_used
        return g_hat, used, float(np.max(np.abs(g_hat - values.g)))

    def _slack(self, g_error: Optional[float]) -> Optional[float]:
        if g_error is None or self.coeffs is None:
            return None
        return 2.0 * self.coeffs.b_alpha * g_error


def run_spma(
    gm: GenerativeModel,
    mu: Distribution,
    alpha: float,
    schedule: StepSchedule,
    kind: DivergenceKind,
    iters: int,
    cfgs: Union[CriticConfig, Sequence[CriticConfig]],
    pi0: Optional[Policy] = None,
    c: Optional[Classification] = None,
    reference: Union[Policy, ReferencePolicy, None] = None,
    oracle: Optional[GradientOracle] = None,
    coeffs: Optional[CoefficientEstimate] = None,
    log_every: Optional[int] = None,
) -> PmaTrace:
    """Stochastic alpha-clipped policy mirror ascent.

    J_mu and ||G_hat - G||_inf are computed exactly at every iterate for
    diagnosis only; the update itself uses the critic (or ``oracle``).
    ``log_every`` thins the per-iterate debug lines.
    """
    m = gm.mdp
    c = classify(m) if c is None else c
    mu_vec = as_distribution(mu, m.n_states, full_support=True)
    solver = StochasticPolicyMirrorAscent(
        gm, mu_vec, alpha, schedule, cfgs, kind,
        c=c, reference=_as_reference(m, mu_vec, c, reference), oracle=oracle, coeffs=coeffs,
        log_every=log_every,
    )
    trace = solver.run(iters, pi0)
    logger.info(f"Stochastic run used {trace.total_samples} generative-model samples")
    return trace


def check_inexact_envelope(
    trace: PmaTrace,
    exact_final_gap: float,
    coeffs: CoefficientEstimate,
    eps: Optional[float] = None,
    slack: float = 1e-6,
) -> EnvelopeReport:
    """Final stochastic gap against exact gap + 4 C_alpha B_alpha eps.

    ``eps`` defaults to the largest measured ||G_hat - G||_inf in the trace.
    """
    final = trace.final
    if final.gap is None:
        raise InfeasibleConfigError("inexact envelope needs a trace with reference gaps")
    if eps is None:
        errors = [r.g_error for r in trace.records if r.g_error is not None]
        eps = max(errors) if errors else 0.0
    bound = exact_final_gap + 4.0 * coeffs.c_alpha * coeffs.b_alpha * eps + slack
    ok = final.gap <= bound
    return EnvelopeReport(
        kind=trace.schedule.kind,
        rows=[EnvelopeRow(k=final.k, gap=final.gap, bound=bound, margin=bound - final.gap)],
        advisory_ok=ok,
        shape_ok=ok,
        shape_statistic=final.gap,
        shape_threshold=bound,
        notes=[f"measured eps = {eps:.3e}; coefficients are sampled lower bounds"],
    )
