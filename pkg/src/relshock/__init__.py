"""Spherically symmetric relativistic fluid evolution in standard
Schwarzschild coordinates by a locally inertial Godunov scheme, with exact
flat-space Riemann solutions, closed-form cosmological/static models, and
a convergence and diagnostics harness."""

from .fluid import Conserved, EosParams, FluidState, RiemannInvariants
from .riemann import WaveFan, sample, solve_middle_state
from .scheme import SimGrid, advance, init, run

__all__ = [
    "EosParams",
    "FluidState",
    "Conserved",
    "RiemannInvariants",
    "WaveFan",
    "solve_middle_state",
    "sample",
    "SimGrid",
    "init",
    "advance",
    "run",
]

__version__ = "0.1.0"
