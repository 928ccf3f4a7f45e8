"""Pointwise physics of the relativistic perfect fluid with p = sigma*rho.

Three coordinate systems on the state space are used throughout: the fluid
variables (rho, v), the conserved pair (u0, u1) of flat-space energy and
momentum densities, and the Riemann invariants (r, s) in which rarefaction
curves are straight lines.  All conversions here are exact closed forms and
accept scalars or numpy arrays.  The speed of light is fixed at c = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeDiscriminant, NonpositiveDensity, NonPhysicalInput

__all__ = [
    "EosParams",
    "FluidState",
    "Conserved",
    "RiemannInvariants",
    "to_conserved",
    "from_conserved",
    "to_invariants",
    "from_invariants",
    "partial_density",
    "eigenvalues",
    "v_from_lambda",
    "lorentz_compose",
    "minkowski_stress",
    "conserved_arrays",
    "fluid_arrays",
    "invariant_arrays",
]


@dataclass(frozen=True)
class EosParams:
    """Equation of state p = sigma*rho with constant sigma.

    sqrt(sigma) is the sound speed; K = 2*sigma/(1+sigma)^2 is the constant
    appearing in the Riemann invariants.
    """

    sigma: float = 1.0 / 3.0

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise NonPhysicalInput(f"sigma must lie in (0, 1), got {self.sigma}")

    @property
    def sound_speed(self) -> float:
        return np.sqrt(self.sigma)

    @property
    def K(self) -> float:
        return 2.0 * self.sigma / (1.0 + self.sigma) ** 2

    @property
    def sqrt_K_half(self) -> float:
        return np.sqrt(self.K / 2.0)

    @property
    def sqrt_2K(self) -> float:
        return np.sqrt(2.0 * self.K)


@dataclass(frozen=True)
class FluidState:
    """Primitive fluid variables: energy density rho > 0 and velocity |v| < 1."""

    rho: float
    v: float

    def __post_init__(self):
        if not self.rho > 0.0:
            raise NonpositiveDensity(f"rho must be positive, got {self.rho}")
        if not abs(self.v) < 1.0:
            raise NonPhysicalInput(f"|v| must be < 1, got {self.v}")


@dataclass(frozen=True)
class Conserved:
    """Flat-space conserved densities (u0, u1) = (T00_M, T01_M)."""

    u0: float
    u1: float


@dataclass(frozen=True)
class RiemannInvariants:
    r: float
    s: float


def rapidity(v):
    """0.5*ln((1+v)/(1-v)); velocities compose additively in this variable."""
    return 0.5 * np.log((1.0 + v) / (1.0 - v))


def conserved_arrays(rho, v, eos: EosParams):
    """(u0, u1) as arrays; the array kernel behind :func:`to_conserved`."""
    sig = eos.sigma
    gam = 1.0 / (1.0 - v * v)
    u0 = rho * ((sig + 1.0) * v * v * gam + 1.0)
    u1 = rho * (sig + 1.0) * v * gam
    return u0, u1


def fluid_arrays(u0, u1, eos: EosParams, check: bool = True):
    """(rho, v) as arrays, inverting :func:`conserved_arrays`.

    The quadratic for v is evaluated in the rationalized form
    v = 2*u1 / ((sigma+1)*u0 + sqrt(disc)), which selects the |v| < 1 root
    and passes smoothly through u1 = 0.
    """
    sig = eos.sigma
    disc = (sig + 1.0) ** 2 * u0 * u0 - 4.0 * sig * u1 * u1
    if check:
        if np.any(np.asarray(disc) < 0.0):
            raise NegativeDiscriminant(
                "conserved pair outside the physical region (disc < 0)"
            )
        if np.any(np.asarray(u0) <= 0.0):
            raise NonpositiveDensity("u0 must be positive")
    denom = (sig + 1.0) * u0 + np.sqrt(np.maximum(disc, 0.0))
    v = 2.0 * u1 / denom
    rho = (1.0 - v * v) * denom / (2.0 * (sig + 1.0))
    return rho, v


def invariant_arrays(rho, v, eos: EosParams):
    """(r, s) as arrays; the array kernel behind :func:`to_invariants`."""
    phi = rapidity(v)
    lr = eos.sqrt_K_half * np.log(rho)
    return phi - lr, phi + lr


def to_conserved(f: FluidState, eos: EosParams) -> Conserved:
    u0, u1 = conserved_arrays(f.rho, f.v, eos)
    return Conserved(float(u0), float(u1))


def from_conserved(u: Conserved, eos: EosParams) -> FluidState:
    rho, v = fluid_arrays(u.u0, u.u1, eos)
    return FluidState(float(rho), float(v))


def to_invariants(f: FluidState, eos: EosParams) -> RiemannInvariants:
    r, s = invariant_arrays(f.rho, f.v, eos)
    return RiemannInvariants(float(r), float(s))


def from_invariants(ri: RiemannInvariants, eos: EosParams) -> FluidState:
    rho, v = fluid_from_invariant_arrays(ri.r, ri.s, eos)
    return FluidState(float(rho), float(v))


def fluid_from_invariant_arrays(r, s, eos: EosParams):
    rho = np.exp((s - r) / eos.sqrt_2K)
    e = np.exp(s + r)
    v = -(1.0 - e) / (1.0 + e)
    return rho, v


def partial_density(invariant_value, which: str, v, eos: EosParams):
    """Density from one invariant plus the velocity.

    which='r' inverts r(rho, v); which='s' inverts s(rho, v).  Used to fill
    rarefaction fans, where one invariant is constant across the wave.
    """
    phi = rapidity(v)
    if which == "r":
        return np.exp(-(invariant_value - phi) / eos.sqrt_K_half)
    if which == "s":
        return np.exp((invariant_value - phi) / eos.sqrt_K_half)
    raise ValueError(f"which must be 'r' or 's', got {which!r}")


def eigenvalues(f: FluidState, eos: EosParams):
    """Characteristic speeds (lambda1, lambda2) of the flat-space system."""
    return lambda1_arrays(f.v, eos), lambda2_arrays(f.v, eos)


def lambda1_arrays(v, eos: EosParams):
    a = eos.sound_speed
    return (v - a) / (1.0 - a * v)


def lambda2_arrays(v, eos: EosParams):
    a = eos.sound_speed
    return (v + a) / (1.0 + a * v)


def v_from_lambda(lam, family: int, eos: EosParams):
    """Invert an eigenvalue for the fluid velocity inside a rarefaction fan."""
    a = eos.sound_speed
    if family == 1:
        return (lam + a) / (1.0 + a * lam)
    if family == 2:
        return (lam - a) / (1.0 - a * lam)
    raise ValueError(f"family must be 1 or 2, got {family}")


def lorentz_compose(v, w):
    """Relativistic velocity addition (v + w)/(1 + v*w), c = 1."""
    return (v + w) / (1.0 + v * w)


def minkowski_stress(f: FluidState, eos: EosParams, x: float):
    """Flat-space stress components (T00_M, T01_M, T11_M, T22) at radius x.

    T00_M and T01_M coincide with the conserved pair; T22 carries the 1/x^2
    angular factor.
    """
    if not x > 0.0:
        raise NonPhysicalInput(f"radius must be positive, got {x}")
    sig = eos.sigma
    rho, v = f.rho, f.v
    gam = 1.0 / (1.0 - v * v)
    t00 = (1.0 + sig * v * v) * gam * rho
    t01 = (1.0 + sig) * v * gam * rho
    t11 = (v * v + sig) * gam * rho
    t22 = sig * rho / (x * x)
    return t00, t01, t11, t22


def t11_from_conserved(u0, u1, eos: EosParams, check: bool = True):
    """T11_M evaluated from the conserved pair (array kernel for fluxes)."""
    rho, v = fluid_arrays(u0, u1, eos, check=check)
    return rho * ((eos.sigma + 1.0) * v * v / (1.0 - v * v) + eos.sigma)
