"""Link geometry, LoS probability, path loss, and small-scale fading.

The pipeline goes elevation angle -> LoS probability -> path-loss exponent
and amplitude -> fading family (Rayleigh for NLoS, Rician for LoS), ending
in the per-slot transmit probability of a threshold policy: a node sends
only when the best of its ``num_channels`` i.i.d. fading draws clears its
threshold.

The path-loss amplitude is evaluated at the carrier frequency only and
treated as flat across the sub-channels; the per-channel variation lives
entirely in the fading draws.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from . import specfun
from .errors import DegenerateGeometryError, DomainError
from .specfun import DEFAULT_QUAD, QuadratureSpec

# Propagation constant used by the path-loss amplitude (m/s).
SPEED_OF_LIGHT = 3.0e8

__all__ = [
    "SPEED_OF_LIGHT",
    "Position",
    "EnvironmentParams",
    "FadingKind",
    "Rayleigh",
    "Rician",
    "FadingModel",
    "LinkChannel",
    "elevation_angle",
    "p_los",
    "path_loss_exponent",
    "path_loss_amplitude",
    "rician_b",
    "fading_pdf",
    "fading_cdf",
    "transmit_prob",
    "truncated_power_moment",
    "classify_link",
    "build_link",
]


@dataclass(frozen=True)
class Position:
    """Cartesian position in meters; altitude z must be non-negative."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.z < 0:
            raise DomainError(f"Position.z must be >= 0, got {self.z}")


@dataclass(frozen=True)
class EnvironmentParams:
    """Environment constants of the propagation model.

    Defaults are the suburban-style values used by the bundled presets:
    logistic LoS parameters (a1, b1 per radian), Rician K-factor endpoints
    k0 at zero elevation and k_pi2 at vertical incidence, path-loss
    exponents alpha0 (ground) and alpha_pi2 (vertical), Rayleigh spread
    omega, reference distance d0, and the carrier frequency.
    """

    a1: float = 9.61
    b1: float = 9.1673
    k0: float = 1.0
    k_pi2: float = 15.0
    alpha0: float = 3.5
    alpha_pi2: float = 2.0
    omega: float = 2.0
    d0: float = 20.0
    carrier_frequency: float = 900e6

    def __post_init__(self):
        if not (self.a1 > 0 and self.b1 > 0):
            raise DomainError("EnvironmentParams: a1 and b1 must be > 0")
        if not (self.k_pi2 >= self.k0 > 0):
            raise DomainError("EnvironmentParams: need k_pi2 >= k0 > 0")
        if not (self.alpha0 >= self.alpha_pi2 >= 2.0):
            raise DomainError("EnvironmentParams: need alpha0 >= alpha_pi2 >= 2")
        if self.omega <= 0:
            raise DomainError("EnvironmentParams: omega must be > 0")
        if self.d0 <= 0:
            raise DomainError("EnvironmentParams: d0 must be > 0")
        if self.carrier_frequency <= 0:
            raise DomainError("EnvironmentParams: carrier_frequency must be > 0")


class FadingKind(enum.Enum):
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"


@dataclass(frozen=True)
class Rayleigh:
    """Rayleigh fading amplitude with spread factor omega = E[amplitude^2]."""

    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise DomainError(f"Rayleigh.omega must be > 0, got {self.omega}")


@dataclass(frozen=True)
class Rician:
    """Rician fading amplitude with line-of-sight parameter b = sqrt(2K)."""

    b: float

    def __post_init__(self):
        if self.b < 0:
            raise DomainError(f"Rician.b must be >= 0, got {self.b}")


FadingModel = Rayleigh | Rician


@dataclass(frozen=True)
class LinkChannel:
    """Resolved channel of one link: fading family plus path-loss amplitude."""

    fading: FadingModel
    path_loss_amplitude: float
    distance: float
    elevation: float

    def __post_init__(self):
        if self.path_loss_amplitude <= 0:
            raise DomainError("LinkChannel.path_loss_amplitude must be > 0")
        if not 0.0 <= self.elevation <= math.pi / 2:
            raise DomainError("LinkChannel.elevation must lie in [0, pi/2]")


def elevation_angle(a: Position, b: Position) -> float:
    """Elevation angle between two positions, in [0, pi/2].

    Returns pi/2 for vertically stacked endpoints and raises for
    coincident ones.
    """
    dv = abs(a.z - b.z)
    dh = math.hypot(a.x - b.x, a.y - b.y)
    if dv == 0.0 and dh == 0.0:
        raise DegenerateGeometryError("elevation_angle: positions coincide")
    if dh == 0.0:
        return math.pi / 2
    return math.atan2(dv, dh)


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= math.pi / 2:
        raise DomainError(f"elevation must lie in [0, pi/2], got {theta}")
    return theta


def p_los(theta: float, env: EnvironmentParams) -> float:
    """Line-of-sight probability, a logistic curve in the elevation angle."""
    theta = _check_theta(theta)
    return 1.0 / (1.0 + env.a1 * math.exp(-env.b1 * theta))


def path_loss_exponent(theta: float, env: EnvironmentParams) -> float:
    """Elevation-dependent path-loss exponent, between alpha_pi2 and alpha0."""
    theta = _check_theta(theta)
    return env.alpha0 + (env.alpha_pi2 - env.alpha0) * p_los(theta, env)


def path_loss_amplitude(d: float, theta: float, env: EnvironmentParams) -> float:
    """Square root of the single-slope path-loss gain at distance d >= d0."""
    if d < env.d0:
        raise DomainError(
            f"path_loss_amplitude: distance {d} is below reference distance {env.d0}"
        )
    alpha = path_loss_exponent(theta, env)
    scale = SPEED_OF_LIGHT / (4.0 * math.pi * env.carrier_frequency)
    return scale * math.sqrt(env.d0 ** (alpha - 2.0) / d**alpha)


def rician_b(theta: float, env: EnvironmentParams) -> float:
    """Line-of-sight fading parameter b = sqrt(2 K(theta)).

    K grows exponentially in elevation from k0 at theta=0 to k_pi2 at
    theta=pi/2.
    """
    theta = _check_theta(theta)
    k_factor = env.k0 * (env.k_pi2 / env.k0) ** (2.0 * theta / math.pi)
    return math.sqrt(2.0 * k_factor)


def fading_pdf(model: FadingModel, x: float) -> float:
    """Density of the fading amplitude at x >= 0.

    The Rician branch is evaluated in the exponentially-scaled form
    x * exp(-(x-b)^2/2) * i0e(xb), which stays finite for all x.
    """
    x = float(x)
    if x < 0:
        raise DomainError(f"fading_pdf: x must be >= 0, got {x}")
    if isinstance(model, Rayleigh):
        return (2.0 * x / model.omega) * math.exp(-x * x / model.omega)
    diff = x - model.b
    return x * math.exp(-0.5 * diff * diff) * specfun.bessel_i0_scaled(x * model.b)


def fading_cdf(model: FadingModel, beta: float) -> float:
    """Probability that the fading amplitude falls below ``beta``."""
    beta = float(beta)
    if beta < 0:
        raise DomainError(f"fading_cdf: beta must be >= 0, got {beta}")
    if math.isinf(beta):
        return 1.0
    if isinstance(model, Rayleigh):
        return -math.expm1(-beta * beta / model.omega)
    return 1.0 - specfun.marcum_q1(model.b, beta)


def transmit_prob(model: FadingModel, beta: float, num_channels: int) -> float:
    """Probability the best of ``num_channels`` i.i.d. draws clears ``beta``."""
    if num_channels < 1:
        raise DomainError(f"transmit_prob: num_channels must be >= 1, got {num_channels}")
    return 1.0 - fading_cdf(model, beta) ** num_channels


def truncated_power_moment(
    model: FadingModel,
    beta: float,
    power: int,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """E[amplitude^power on the event amplitude >= beta] for power in {2, 4}.

    Rayleigh has closed forms; Rician is integrated numerically.
    """
    beta = float(beta)
    if beta < 0:
        raise DomainError(f"truncated_power_moment: beta must be >= 0, got {beta}")
    if power not in (2, 4):
        raise DomainError(f"truncated_power_moment: power must be 2 or 4, got {power}")
    if math.isinf(beta):
        return 0.0
    if isinstance(model, Rayleigh):
        om = model.omega
        u = beta * beta / om
        if power == 2:
            return (beta * beta + om) * math.exp(-u)
        return (beta**4 + 2.0 * om * beta * beta + 2.0 * om * om) * math.exp(-u)
    return _rician_truncated_moment(model.b, beta, power, quad)


@lru_cache(maxsize=16384)
def _rician_truncated_moment(b: float, beta: float, power: int, quad: QuadratureSpec) -> float:
    # cached: sweeps and the optimizer revisit the same (b, beta) pairs heavily
    def integrand(x: float) -> float:
        diff = x - b
        return x ** (power + 1) * math.exp(-0.5 * diff * diff) * specfun.bessel_i0_scaled(x * b)

    return specfun.integrate(integrand, beta, math.inf, quad).value


def classify_link(
    a: Position,
    b: Position,
    env: EnvironmentParams,
    override: FadingKind | None = None,
) -> FadingModel:
    """Pick the fading family of a link: Rician when LoS is likely, else Rayleigh.

    The decision is deterministic (LoS probability >= 1/2) so that repeated
    runs of a scenario see identical channels; ``override`` forces a family
    regardless of geometry.
    """
    theta = elevation_angle(a, b)
    kind = override
    if kind is None:
        kind = FadingKind.RICIAN if p_los(theta, env) >= 0.5 else FadingKind.RAYLEIGH
    if kind is FadingKind.RICIAN:
        return Rician(b=rician_b(theta, env))
    return Rayleigh(omega=env.omega)


def build_link(
    a: Position,
    b: Position,
    env: EnvironmentParams,
    override: FadingKind | None = None,
) -> LinkChannel:
    """Resolve the full channel (fading + path loss) between two positions."""
    theta = elevation_angle(a, b)
    dist = math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))
    return LinkChannel(
        fading=classify_link(a, b, env, override),
        path_loss_amplitude=path_loss_amplitude(dist, theta, env),
        distance=dist,
        elevation=theta,
    )
