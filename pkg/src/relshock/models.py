"""Closed-form spacetimes in standard Schwarzschild coordinates.

Covers the critical expanding-universe metric in its two coordinate images
(here called FRW-1 and FRW-2, distinguished by the integrating factor used
to diagonalize the time coordinate), the static isothermal-sphere metric
(TOV), and the one-parameter continuous matching of the two across an
initial fluid discontinuity, forward or time reversed.

Conventions: G = c = 1, kappa = 8*pi.  Radii, times and masses are all in
the same (mass) unit; `units_convert` moves results to km / s / Msun-km^-3
for presentation only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalInput, OutsideDomain, SuperluminalCoordinate
from .fluid import EosParams

KAPPA = 8.0 * np.pi

# presentation-layer constants: geometric mass unit -> km and seconds
G_KM_PER_MSUN = 1.47664
C_KM_PER_S = 3.0e5

__all__ = [
    "KAPPA",
    "ModelPoint",
    "MatchData",
    "gamma",
    "tov_exponent",
    "frw1_state",
    "frw2_state",
    "frw2_frw_time",
    "tov_state",
    "integrating_factor_check",
    "match",
    "Frw1Model",
    "Frw2Model",
    "TovModel",
    "MatchedModel",
    "make_model",
    "initial_profile",
    "ghost_values",
    "units_convert",
]


@dataclass(frozen=True)
class ModelPoint:
    """Exact-solution sample: fluid, metric and mass at one (t, r)."""

    rho: float
    v: float
    A: float
    B: float
    M: float

    @property
    def light_speed(self) -> float:
        return float(np.sqrt(self.A * self.B))


def gamma(eos: EosParams) -> float:
    """Density coefficient of the static isothermal sphere, rho = gamma/r^2."""
    sig = eos.sigma
    return sig / (2.0 * np.pi * (1.0 + 6.0 * sig + sig * sig))


def tov_exponent(eos: EosParams) -> float:
    """Power of r in the static metric's time component: B = B0 * r^(4s/(1+s))."""
    return 4.0 * eos.sigma / (1.0 + eos.sigma)


def frw1_state(t_bar, r_bar):
    """Expanding universe in the coordinates where light speed is exactly 1.

    Self-similar in xi = r/t; valid for |xi| < 1 (t < 0 gives the time
    reversed solution).  Requires the radiation equation of state.
    """
    xi = np.asarray(r_bar, dtype=float) / t_bar
    if np.any(np.abs(xi) >= 1.0):
        raise SuperluminalCoordinate(f"|r/t| >= 1 on the requested slice (t={t_bar})")
    small = np.abs(xi) < 1e-14
    xi_safe = np.where(small, 1.0, xi)
    v = np.where(small, 0.5 * xi, (1.0 - np.sqrt(1.0 - xi * xi)) / xi_safe)
    rho = 3.0 * v * v / (KAPPA * np.asarray(r_bar) ** 2)
    A = 1.0 - v * v
    B = 1.0 / A
    M = np.asarray(r_bar) * v * v / 2.0
    return rho, v, A, B, M


def frw2_frw_time(t_bar, r_bar, psi0: float):
    """Comoving time t of the expanding universe from FRW-2 coordinates."""
    t4 = np.asarray(t_bar, dtype=float) ** 4
    disc = t4 - np.asarray(r_bar, dtype=float) ** 2 * psi0**4
    if np.any(disc < 0.0):
        raise OutsideDomain("t_bar^4 < r_bar^2 psi0^4: outside the FRW-2 chart")
    return (t_bar**2 + np.sqrt(disc)) / (2.0 * psi0**2)


def frw2_state(t_bar, r_bar, psi0: float):
    """Expanding universe under the dynamical integrating factor."""
    t = frw2_frw_time(t_bar, r_bar, psi0)
    r = np.asarray(r_bar, dtype=float)
    v = r / (2.0 * t)
    if np.any(np.abs(v) >= 1.0):
        raise SuperluminalCoordinate("fluid speed >= 1 on the requested slice")
    rho = 3.0 / (4.0 * KAPPA * t * t)
    psi = psi0 * np.sqrt(t / (4.0 * t * t + r * r))
    A = 1.0 - v * v
    B = 1.0 / (psi * psi * A)
    M = r * v * v / 2.0
    return rho, v, A, B, M


def tov_state(r_bar, b0: float, eos: EosParams):
    """Static isothermal sphere: rho = gamma/r^2, constant A, B = b0*r^q."""
    r = np.asarray(r_bar, dtype=float)
    if np.any(r <= 0.0) or b0 <= 0.0:
        raise NonPhysicalInput("tov_state needs r > 0 and b0 > 0")
    g = gamma(eos)
    rho = g / (r * r)
    v = np.zeros_like(r)
    A = np.full_like(r, 1.0 - KAPPA * g)
    B = b0 * r ** tov_exponent(eos)
    M = 4.0 * np.pi * g * r
    return rho, v, A, B, M


def integrating_factor_check(t: float, r_bar: float, which: str, h: float = 1e-5):
    """Finite-difference residual of the integrating-factor equation
    d/dr [Psi (1 - r^2/4t^2)] - d/dt [Psi r/(2t)] for the constant or the
    dynamical solution; O(h^2) for a true solution."""
    if which == "constant":
        psi = lambda tt, rr: 1.0
    elif which == "dynamical":
        psi = lambda tt, rr: np.sqrt(tt / (4.0 * tt * tt + rr * rr))
    else:
        raise ValueError(f"which must be 'constant' or 'dynamical', got {which!r}")
    return _integrating_factor_residual(psi, t, r_bar, h)


def _integrating_factor_residual(psi, t, r_bar, h):
    fr = lambda tt, rr: psi(tt, rr) * (1.0 - rr * rr / (4.0 * tt * tt))
    ft = lambda tt, rr: psi(tt, rr) * rr / (2.0 * tt)
    d_r = (fr(t, r_bar + h) - fr(t, r_bar - h)) / (2.0 * h)
    d_t = (ft(t + h, r_bar) - ft(t - h, r_bar)) / (2.0 * h)
    return d_r - d_t


@dataclass(frozen=True)
class MatchData:
    """Matching constants of the composite initial data at radius r0."""

    r0: float
    t0: float         # start time in the simulated coordinates
    v0: float         # fluid velocity on the expanding side of the jump
    b0: float         # time scale of the static exterior
    psi0: float | None = None   # integrating factor constant (FRW-2 only)
    t0_frw: float | None = None  # comoving time at the jump (FRW-2 only)


def _v0(eos: EosParams, reversed_time: bool) -> float:
    sig = eos.sigma
    v0 = np.sqrt(4.0 * sig / (1.0 + 6.0 * sig + sig * sig))
    return -v0 if reversed_time else v0


def _require_radiation(eos: EosParams):
    if abs(eos.sigma - 1.0 / 3.0) > 1e-12:
        raise NonPhysicalInput(
            "the expanding-universe charts require sigma = 1/3 (sound speed of radiation)"
        )


def match(variant: str, r0: float, eos: EosParams, reversed_time: bool = False) -> MatchData:
    """Continuity constants for the composite metric with the jump at r0.

    variant 'frw1' or 'frw2'.  The metric components match continuously at
    r0 while the fluid jumps; b0 is fixed by B-continuity and is the same
    for both variants.  Reversal flips the sign of v0 (and hence t0).
    """
    _require_radiation(eos)
    if r0 <= 0.0:
        raise NonPhysicalInput("r0 must be positive")
    v0 = _v0(eos, reversed_time)
    b0 = r0 ** (-tov_exponent(eos)) / (1.0 - v0 * v0)
    if variant == "frw1":
        t0 = r0 * (1.0 + v0 * v0) / (2.0 * v0)
        return MatchData(r0=r0, t0=float(t0), v0=float(v0), b0=float(b0))
    if variant == "frw2":
        if reversed_time:
            raise NonPhysicalInput("the FRW-2 matching is forward-time only")
        t0_frw = r0 / (2.0 * v0)
        psi0 = np.sqrt((4.0 * t0_frw**2 + r0**2) / t0_frw)
        t0 = psi0**2 / 2.0
        return MatchData(
            r0=r0, t0=float(t0), v0=float(v0), b0=float(b0),
            psi0=float(psi0), t0_frw=float(t0_frw),
        )
    raise ValueError(f"variant must be 'frw1' or 'frw2', got {variant!r}")


class Frw1Model:
    """Pure expanding universe, unit light speed chart (psi0 = 1)."""

    name = "frw1"

    def __init__(self, eos: EosParams, t_start: float, reversed_time: bool = False):
        _require_radiation(eos)
        self.eos = eos
        self.t_start = float(t_start)
        self.reversed_time = reversed_time

    def evaluate(self, t, r):
        return frw1_state(t, r)


class Frw2Model:
    """Pure expanding universe under the dynamical integrating factor."""

    name = "frw2"

    def __init__(self, eos: EosParams, t_start: float, psi0: float | None = None):
        _require_radiation(eos)
        self.eos = eos
        self.t_start = float(t_start)
        # default makes the coordinate light speed exactly 1 on the start slice
        self.psi0 = float(psi0) if psi0 is not None else float(np.sqrt(2.0 * t_start))

    def evaluate(self, t, r):
        return frw2_state(t, r, self.psi0)


class TovModel:
    """Pure static isothermal sphere."""

    name = "tov"

    def __init__(self, eos: EosParams, b0: float = 1.0, t_start: float = 0.0):
        self.eos = eos
        self.b0 = float(b0)
        self.t_start = float(t_start)

    def evaluate(self, t, r):
        return tov_state(r, self.b0, self.eos)


class MatchedModel:
    """Composite expanding-interior / static-exterior initial-value model.

    Valid as a pointwise exact solution only outside the interaction region
    that grows from r0; the scheme samples it there (initial slice and
    ghost cells).
    """

    def __init__(self, variant: str, r0: float, eos: EosParams,
                 reversed_time: bool = False):
        self.eos = eos
        self.variant = variant
        self.reversed_time = reversed_time
        self.data = match(variant, r0, eos, reversed_time)
        self.name = f"{variant}_tov" + ("_reversed" if reversed_time else "")
        self.t_start = self.data.t0

    @property
    def r0(self) -> float:
        return self.data.r0

    def evaluate_inner(self, t, r):
        if self.variant == "frw1":
            return frw1_state(t, r)
        return frw2_state(t, r, self.data.psi0)

    def evaluate_outer(self, t, r):
        return tov_state(r, self.data.b0, self.eos)

    def evaluate(self, t, r):
        r = np.asarray(r, dtype=float)
        inner = r < self.data.r0
        if inner.all():
            return self.evaluate_inner(t, r)
        if not inner.any():
            return self.evaluate_outer(t, r)
        # placeholder radius keeps masked-out inner evaluations in-domain
        # (well inside both charts: |r/t| = 1/4, and r psi0^2 < t^2)
        parts_in = self.evaluate_inner(t, np.where(inner, r, abs(t) / 4.0))
        parts_out = self.evaluate_outer(t, np.where(inner, self.data.r0, r))
        return tuple(np.where(inner, a, b) for a, b in zip(parts_in, parts_out))


def make_model(variant: str, eos: EosParams, *, r0: float | None = None,
               t_start: float | None = None, b0: float = 1.0,
               psi0: float | None = None, reversed_time: bool = False):
    """Model factory keyed by the run-config variant name."""
    if variant == "frw1":
        return Frw1Model(eos, t_start if t_start is not None else 15.0, reversed_time)
    if variant == "frw2":
        return Frw2Model(eos, t_start if t_start is not None else 15.0, psi0)
    if variant == "tov":
        return TovModel(eos, b0)
    if variant == "frw1_tov":
        return MatchedModel("frw1", r0, eos, reversed_time)
    if variant == "frw2_tov":
        return MatchedModel("frw2", r0, eos)
    raise ValueError(f"unknown model variant {variant!r}")


def initial_profile(model, r):
    """Exact-solution slice (rho, v, A, B, M) at the model's start time."""
    return model.evaluate(model.t_start, np.asarray(r, dtype=float))


def ghost_values(model, side: str, t, x_ghost: float, x_half: float):
    """Boundary data for one ghost cell: fluid at the ghost center, metric
    at the staggered half gridpoint between the ghost and the first
    interior cell."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    rho, v, _, _, _ = model.evaluate(t, np.asarray(x_ghost))
    _, _, A, B, M = model.evaluate(t, np.asarray(x_half))
    return (float(rho), float(v)), (float(A), float(B), float(M))


def units_convert(value: float, to: str) -> float:
    """Geometric (mass-unit) value to presentation units."""
    if to == "length-km":
        return value * G_KM_PER_MSUN
    if to == "time-sec":
        return value * G_KM_PER_MSUN / C_KM_PER_S
    if to == "density-Msun-per-km3":
        return value / G_KM_PER_MSUN**3
    raise ValueError(f"unknown conversion target {to!r}")
