"""Loss composition, expected throughput, threshold bounds, and the optimizer.

A packet survives if it is not dropped by buffer overflow, not dropped by
the queueing deadline, and then decoded above the SINR threshold; the
three loss probabilities compose multiplicatively.  The feasible range of
the fading threshold follows from queue stability (upper bound) and the
curvature of the loss curve (lower bound), and a Jacobi best-response
iteration lets every node tune its own threshold against the others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize
import scipy.special as sp

from . import channel as ch
from . import interference as itf
from . import queueing as qn
from . import specfun
from .channel import FadingModel, LinkChannel, Rayleigh, Rician
from .errors import DomainError, InfeasibleLoadError, LowerBoundNotFoundError, StabilityError
from .interference import GammaFit, InterfererLink, NoiseModel, ZeroInterference
from .queueing import QueueParams
from .scenario_io import Scenario
from .specfun import DEFAULT_QUAD, QuadratureSpec

__all__ = [
    "PolicyVector",
    "LossBreakdown",
    "BetaBounds",
    "SourceView",
    "compose_loss",
    "expected_throughput",
    "beta_upper",
    "beta_upper_erf",
    "beta_lower",
    "beta_bounds",
    "source_view",
    "reduced_loss",
    "loss_derivative",
    "evaluate",
    "evaluate_view",
    "JacobiResult",
    "jacobi_best_response",
]


@dataclass(frozen=True)
class PolicyVector:
    """Per-node fading thresholds, keyed by node id."""

    betas: dict[str, float]

    def __post_init__(self):
        for node_id, beta in self.betas.items():
            if beta < 0:
                raise DomainError(f"PolicyVector: beta for node {node_id!r} must be >= 0")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> "PolicyVector":
        return cls({node.id: node.beta for node in scenario.nodes})

    def get(self, node_id: str) -> float:
        return self.betas[node_id]

    def updated(self, node_id: str, beta: float) -> "PolicyVector":
        new = dict(self.betas)
        new[node_id] = beta
        return PolicyVector(new)


@dataclass(frozen=True)
class LossBreakdown:
    """All loss components and the resulting throughput for one source."""

    p_delay: float
    p_overflow: float
    p_error: float
    p_loss: float
    throughput: float


@dataclass(frozen=True)
class BetaBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not 0.0 <= self.lower <= self.upper:
            raise DomainError("BetaBounds: need 0 <= lower <= upper")


@dataclass(frozen=True)
class SourceView:
    """Everything needed to evaluate one node's losses against fixed opponents."""

    node_id: str
    link: LinkChannel
    power: float
    queue: QueueParams
    noise: NoiseModel
    sinr_threshold: float
    num_channels: int
    interferers: tuple[InterfererLink, ...]

    @property
    def model(self) -> FadingModel:
        return self.link.fading


def compose_loss(p_ov: float, p_dly: float, p_err: float) -> float:
    """Overall loss: overflow, then deadline drop, then SINR error.

    Algebraically 1 - (1-p_ov)(1-p_dly)(1-p_err).
    """
    for name, p in (("p_ov", p_ov), ("p_dly", p_dly), ("p_err", p_err)):
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"compose_loss: {name} must lie in [0, 1], got {p}")
    return 1.0 - (1.0 - p_ov) * (1.0 - p_dly) * (1.0 - p_err)


def expected_throughput(arrival_rate: float, p_loss: float, approximate: bool = False) -> float:
    """Delivered packet rate given the loss probability.

    In approximate mode ``p_loss`` is the plain sum of the three loss
    components (which may exceed 1, dropping the cross terms), and the
    result clamps at zero; the sum-form never exceeds the exact form.
    """
    if arrival_rate <= 0:
        raise DomainError(f"arrival_rate must be > 0, got {arrival_rate}")
    if approximate:
        return max(0.0, arrival_rate * (1.0 - p_loss))
    if not 0.0 <= p_loss <= 1.0:
        raise DomainError(f"p_loss must lie in [0, 1], got {p_loss}")
    return arrival_rate * (1.0 - p_loss)


# --------------------------------------------------------------------------
# Threshold bounds
# --------------------------------------------------------------------------


def _load(q: QueueParams) -> float:
    load = q.arrival_rate * q.slot_duration
    if not 0.0 < load < 1.0:
        raise InfeasibleLoadError(
            f"arrival_rate * slot_duration = {load:.6g} leaves no stable threshold",
            margin=load - 1.0,
        )
    return load


def beta_upper(model: FadingModel, q: QueueParams, num_channels: int) -> float:
    """Largest threshold keeping the queue stable: transmit prob equals load.

    Closed form for Rayleigh; for Rician the (monotone) CDF is inverted by
    bracketed root-finding to 1e-12.
    """
    load = _load(q)
    target_cdf = (1.0 - load) ** (1.0 / num_channels)
    if isinstance(model, Rayleigh):
        return math.sqrt(-model.omega * math.log1p(-target_cdf))

    def excess(beta: float) -> float:
        return ch.fading_cdf(model, beta) - target_cdf

    hi = model.b + 10.0
    while excess(hi) < 0.0:
        hi += 10.0
    return float(scipy.optimize.brentq(excess, 0.0, hi, xtol=1e-12, rtol=8.9e-16))


def beta_upper_erf(model: Rician, q: QueueParams, num_channels: int) -> float:
    """Gaussian-tail surrogate of the Rician upper bound (intended for b > 3)."""
    if not isinstance(model, Rician):
        raise DomainError("beta_upper_erf applies to Rician fading only")
    load = _load(q)
    rhs = 1.0 - 2.0 * (1.0 - load) ** (1.0 / num_channels)
    return model.b - math.sqrt(2.0) * specfun.erfinv(rhs)


# --------------------------------------------------------------------------
# Loss derivatives (reduced loss: deadline drop + raw SINR error)
# --------------------------------------------------------------------------


def _fading_pdf_derivative(model: FadingModel, x: float) -> float:
    if isinstance(model, Rayleigh):
        om = model.omega
        return (2.0 / om) * math.exp(-x * x / om) * (1.0 - 2.0 * x * x / om)
    b = model.b
    diff = x - b
    envelope = math.exp(-0.5 * diff * diff)
    xb = x * b
    return envelope * ((1.0 - x * x) * float(sp.i0e(xb)) + xb * float(sp.i1e(xb)))


def _delay_factors(view: SourceView, beta: float) -> tuple[float, float, float, float]:
    """(P_dly, cdf, pdf, pdf') at beta, raising beyond the stability bound."""
    phi = ch.transmit_prob(view.model, beta, view.num_channels)
    p_dly = qn.p_delay(qn.service_rate(phi), view.queue)
    cdf = ch.fading_cdf(view.model, beta)
    pdf = ch.fading_pdf(view.model, beta)
    dpdf = _fading_pdf_derivative(view.model, beta)
    return p_dly, cdf, pdf, dpdf


def reduced_loss(
    view: SourceView,
    beta: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    fit: GammaFit | ZeroInterference | None = None,
) -> float:
    """Deadline-drop probability plus the raw (unconditioned) error integral.

    This is the objective whose curvature defines the lower threshold
    bound; buffer overflow is omitted because its contribution is
    negligible over the feasible range.
    """
    phi = ch.transmit_prob(view.model, beta, view.num_channels)
    p_dly = qn.p_delay(qn.service_rate(phi), view.queue)
    p_err_raw = itf.p_error(
        view.link,
        view.power,
        beta,
        view.interferers,
        view.noise,
        view.sinr_threshold,
        view.num_channels,
        conditional=False,
        quad=quad,
        fit=fit,
    )
    return p_dly + p_err_raw


def loss_derivative(
    view: SourceView,
    beta: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
    fit: GammaFit | ZeroInterference | None = None,
) -> tuple[float, float]:
    """Analytic first and second derivatives of :func:`reduced_loss` in beta.

    The error part differentiates the integral through its lower limit;
    the interference tail's own derivative enters via the Gamma density
    chain rule.  The deadline part differentiates the exponential waiting
    tail through the transmit probability.
    """
    if beta <= 0.0:
        raise DomainError(f"loss_derivative: beta must be > 0, got {beta}")
    upper = beta_upper(view.model, view.queue, view.num_channels)
    if beta >= upper:
        raise StabilityError(
            f"beta {beta:.6g} is at or beyond the stability bound {upper:.6g}",
            margin=beta - upper,
            node=view.node_id,
        )
    p_dly, cdf, pdf, dpdf = _delay_factors(view, beta)
    if fit is None:
        fit = itf.fit_interference(view.interferers, view.num_channels, quad)
    margin_rate = view.power * view.link.path_loss_amplitude**2 / view.sinr_threshold
    excess = margin_rate * beta * beta - view.noise.power
    tail = itf.interference_ccdf(fit, excess)
    # d(tail)/d(beta) through the Gamma density; zero where the tail is pinned at 1
    dtail = -itf.interference_pdf(fit, excess) * 2.0 * margin_rate * beta if excess > 0 else 0.0

    d_err_1 = -pdf * tail
    d_err_2 = -dpdf * tail - pdf * dtail

    n = view.num_channels
    rate = view.queue.delay_threshold / view.queue.slot_duration
    psi = rate * n * cdf ** (n - 1) * pdf
    dpsi = rate * n * ((n - 1) * cdf ** max(n - 2, 0) * pdf * pdf + cdf ** (n - 1) * dpdf)
    d_dly_1 = p_dly * psi
    d_dly_2 = p_dly * (psi * psi + dpsi)
    return d_err_1 + d_dly_1, d_err_2 + d_dly_2


def beta_lower(
    view: SourceView,
    grid_size: int = 512,
    tol: float = 1e-6,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """Smallest beta where the reduced-loss curvature turns positive.

    Scans a grid over the feasible range, then bisects the sign change.
    Returns 0 when the curvature is positive from the start; raises
    :class:`LowerBoundNotFoundError` with the scan attached when it never
    turns positive.
    """
    if grid_size < 2:
        raise DomainError(f"grid_size must be >= 2, got {grid_size}")
    upper = beta_upper(view.model, view.queue, view.num_channels)
    fit = itf.fit_interference(view.interferers, view.num_channels, quad)
    grid = np.linspace(upper * 1e-3, upper * (1.0 - 1e-9), grid_size)
    curv = np.array([loss_derivative(view, float(b), quad, fit)[1] for b in grid])
    if curv[0] > 0.0:
        return 0.0
    positive = np.nonzero(curv > 0.0)[0]
    if positive.size == 0:
        raise LowerBoundNotFoundError(
            "reduced-loss curvature never turns positive on the feasible range",
            diagnostics={"grid": grid.tolist(), "curvature": curv.tolist()},
        )
    hi_idx = int(positive[0])
    lo, hi = float(grid[hi_idx - 1]), float(grid[hi_idx])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if loss_derivative(view, mid, quad, fit)[1] > 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def beta_bounds(
    view: SourceView, grid_size: int = 512, tol: float = 1e-6
) -> BetaBounds:
    return BetaBounds(
        lower=beta_lower(view, grid_size=grid_size, tol=tol),
        upper=beta_upper(view.model, view.queue, view.num_channels),
    )


# --------------------------------------------------------------------------
# Scenario evaluation
# --------------------------------------------------------------------------


def source_view(
    scenario: Scenario,
    policy: PolicyVector | None = None,
    node_id: str | None = None,
) -> SourceView:
    """Assemble the evaluation context for one node against all the others."""
    if policy is None:
        policy = PolicyVector.from_scenario(scenario)
    if node_id is None:
        node_id = scenario.source().id
    me = scenario.node(node_id)
    link = ch.build_link(me.position, scenario.destination, scenario.environment, me.fading_override)
    interferers = []
    for other in scenario.nodes:
        if other.id == node_id:
            continue
        other_link = ch.build_link(
            other.position, scenario.destination, scenario.environment, other.fading_override
        )
        interferers.append(
            InterfererLink(
                transmit_power=other.transmit_power,
                path_loss_amplitude=other_link.path_loss_amplitude,
                fading=other_link.fading,
                beta=policy.get(other.id),
            )
        )
    queue = replace(me.queue, slot_duration=scenario.slot_duration)
    return SourceView(
        node_id=node_id,
        link=link,
        power=me.transmit_power,
        queue=queue,
        noise=scenario.noise,
        sinr_threshold=scenario.sinr_threshold,
        num_channels=scenario.num_channels,
        interferers=tuple(interferers),
    )


def evaluate_view(
    view: SourceView,
    beta: float,
    fit: GammaFit | ZeroInterference | None = None,
    approximate: bool = False,
    conditional_error: bool = True,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> LossBreakdown:
    """Loss breakdown of one node at threshold ``beta`` under fixed opponents."""
    phi = ch.transmit_prob(view.model, beta, view.num_channels)
    try:
        mu = qn.service_rate(phi)
        p_dly = qn.p_delay(mu, view.queue)
        p_ov = qn.p_overflow(mu, view.queue)
    except StabilityError as exc:
        raise StabilityError(
            f"node {view.node_id!r}: beta {beta:.6g} exceeds the stability bound "
            f"({exc})",
            margin=exc.margin,
            node=view.node_id,
        ) from exc
    p_err = itf.p_error(
        view.link,
        view.power,
        beta,
        view.interferers,
        view.noise,
        view.sinr_threshold,
        view.num_channels,
        conditional=conditional_error,
        quad=quad,
        fit=fit,
    )
    p_loss = compose_loss(p_ov, p_dly, p_err)
    if approximate:
        rate = expected_throughput(view.queue.arrival_rate, p_ov + p_dly + p_err, approximate=True)
    else:
        rate = expected_throughput(view.queue.arrival_rate, p_loss)
    return LossBreakdown(
        p_delay=p_dly, p_overflow=p_ov, p_error=p_err, p_loss=p_loss, throughput=rate
    )


def evaluate(
    scenario: Scenario,
    policy: PolicyVector | None = None,
    node_id: str | None = None,
    approximate: bool = False,
    conditional_error: bool = True,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> LossBreakdown:
    """Evaluate the loss breakdown of the scenario's source (or ``node_id``)."""
    if policy is None:
        policy = PolicyVector.from_scenario(scenario)
    view = source_view(scenario, policy, node_id)
    beta = policy.get(view.node_id)
    return evaluate_view(
        view, beta, approximate=approximate, conditional_error=conditional_error, quad=quad
    )


# --------------------------------------------------------------------------
# Jacobi best response
# --------------------------------------------------------------------------


@dataclass
class JacobiResult:
    policy: PolicyVector
    trace: list[dict]
    converged: bool
    iterations: int


def jacobi_best_response(
    scenario: Scenario,
    initial: PolicyVector | None = None,
    grid_size: int = 64,
    tol: float = 1e-3,
    max_iters: int = 50,
    objective: str = "own",
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> JacobiResult:
    """Simultaneous best-response iteration on every node's own threshold.

    Each iteration, every node grid-searches its own throughput (or the
    network sum with ``objective='sum'``) holding the others at the
    previous iterate; ties break toward the smaller threshold.  Stops when
    no threshold moves by more than ``tol``.  Best-response dynamics need
    not converge, so hitting ``max_iters`` returns the last iterate with
    ``converged=False`` rather than raising.
    """
    if objective not in ("own", "sum"):
        raise DomainError(f"objective must be 'own' or 'sum', got {objective!r}")
    if grid_size < 2:
        raise DomainError(f"grid_size must be >= 2, got {grid_size}")
    policy = initial if initial is not None else PolicyVector.from_scenario(scenario)
    node_ids = [node.id for node in scenario.nodes]
    grids: dict[str, np.ndarray] = {}
    for node in scenario.nodes:
        view = source_view(scenario, policy, node.id)
        upper = beta_upper(view.model, view.queue, view.num_channels)
        grids[node.id] = np.linspace(0.0, upper, grid_size)

    trace: list[dict] = []
    converged = False
    iterations = 0
    for iteration in range(max_iters):
        iterations = iteration + 1
        new_betas: dict[str, float] = {}
        chosen_rate: dict[str, float] = {}
        previous_rate: dict[str, float] = {}
        for node_id in node_ids:
            view = source_view(scenario, policy, node_id)
            fit = itf.fit_interference(view.interferers, view.num_channels, quad)

            def own_rate(beta: float) -> float:
                try:
                    return evaluate_view(view, beta, fit=fit, quad=quad).throughput
                except StabilityError:
                    return -math.inf

            if objective == "own":
                score = own_rate
            else:

                def score(beta: float) -> float:
                    trial = policy.updated(node_id, beta)
                    total = 0.0
                    for other_id in node_ids:
                        other_view = source_view(scenario, trial, other_id)
                        try:
                            total += evaluate_view(
                                other_view, trial.get(other_id), quad=quad
                            ).throughput
                        except StabilityError:
                            return -math.inf
                    return total

            values = np.array([score(float(b)) for b in grids[node_id]])
            best_idx = int(np.argmax(values))  # first max = smallest beta
            new_betas[node_id] = float(grids[node_id][best_idx])
            chosen_rate[node_id] = own_rate(new_betas[node_id])
            previous_rate[node_id] = own_rate(policy.get(node_id))
        delta = max(abs(new_betas[i] - policy.get(i)) for i in node_ids)
        policy = PolicyVector(new_betas)
        trace.append(
            {
                "iteration": iteration,
                "betas": dict(new_betas),
                "throughput": dict(chosen_rate),
                "previous_throughput": dict(previous_rate),
                "max_change": delta,
            }
        )
        if delta < tol:
            converged = True
            break
    return JacobiResult(policy=policy, trace=trace, converged=converged, iterations=iterations)
