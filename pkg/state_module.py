"""
state_module.py
The 5-component two-fluid state in primitive (alpha, c, rho, u, w) and conserved

    W = (alpha rho, c rho, rho, rho u, w)

coordinates, the (alpha, c, v, u, q) chart of the convexity analysis, and
constructors for equilibrium states.

Array helpers work on arrays of shape (5,) or (5, n_cells).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors_module import DomainError, StateAdmissibilityError
from eos_module import (
    MixtureEos,
    phase_density_at_pressure,
    phase_pressure,
    phase_psi,
)

# --- Constants ---
STATE_MARGIN = 1e-12
FIELD_NAMES = ("alpha", "c", "rho", "u", "w")


def _check_fractions(alpha: float, c: float, rho: float, margin: float = STATE_MARGIN) -> None:
    if not (rho > 0 and math.isfinite(rho)):
        raise StateAdmissibilityError(f"mixture density must be > 0, got {rho}")
    if not (margin < alpha < 1.0 - margin):
        raise StateAdmissibilityError(f"alpha={alpha} outside ({margin}, {1.0 - margin})")
    if not (margin < c < 1.0 - margin):
        raise StateAdmissibilityError(f"c={c} outside ({margin}, {1.0 - margin})")


@dataclass(frozen=True)
class PrimitiveState:
    alpha: float
    c: float
    rho: float
    u: float
    w: float = 0.0

    def __post_init__(self):
        _check_fractions(self.alpha, self.c, self.rho)
        if not (math.isfinite(self.u) and math.isfinite(self.w)):
            raise StateAdmissibilityError("velocities must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.c, self.rho, self.u, self.w], dtype=float)

    @classmethod
    def from_array(cls, values) -> "PrimitiveState":
        return cls(*(float(x) for x in np.asarray(values, dtype=float)))

    def to_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in FIELD_NAMES}


@dataclass(frozen=True)
class ConservedState:
    w1: float
    w2: float
    w3: float
    w4: float
    w5: float

    def __post_init__(self):
        if not self.w3 > 0:
            raise StateAdmissibilityError(f"w3 (mixture density) must be > 0, got {self.w3}")
        _check_fractions(self.w1 / self.w3, self.w2 / self.w3, self.w3)

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4, self.w5], dtype=float)

    @classmethod
    def from_array(cls, values) -> "ConservedState":
        return cls(*(float(x) for x in np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class RelaxationParams:
    """Relaxation times tau_alpha, tau_c and friction zeta of the sources xi_alpha, xi_c, xi_w."""

    tau_alpha: float = 1.0
    tau_c: float = 1.0
    zeta: float = 1.0
    enable_alpha: bool = True
    enable_c: bool = False
    enable_w: bool = True

    def __post_init__(self):
        for name in ("tau_alpha", "tau_c", "zeta"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be a positive finite number, got {value}")

    @property
    def any_enabled(self) -> bool:
        return self.enable_alpha or self.enable_c or self.enable_w


@dataclass(frozen=True)
class EquilibriumReport:
    mechanical: bool
    chemical: bool
    kinetic: bool
    mechanical_residual: float
    chemical_residual: float
    kinetic_residual: float


# ---------------------------------------------------------------------
# Array transforms
# ---------------------------------------------------------------------

def as_array(state) -> np.ndarray:
    if isinstance(state, (PrimitiveState, ConservedState)):
        return state.as_array()
    return np.asarray(state, dtype=float)


def to_conserved_array(prim) -> np.ndarray:
    alpha, c, rho, u, w = as_array(prim)
    return np.array([alpha * rho, c * rho, rho, rho * u, w])


def to_primitive_array(W) -> np.ndarray:
    w1, w2, w3, w4, w5 = as_array(W)
    return np.array([w1 / w3, w2 / w3, w3, w4 / w3, w5 * np.ones_like(w3)])


def phase_fields_array(alpha, c, rho, u, w):
    rho1 = c * rho / alpha
    rho2 = (1.0 - c) * rho / (1.0 - alpha)
    u1 = u + (1.0 - c) * w
    u2 = u - c * w
    return rho1, rho2, u1, u2


def admissible(W, margin: float = STATE_MARGIN) -> np.ndarray:
    """Elementwise admissibility of conserved arrays (True where the cell is valid)."""
    w1, w2, w3, w4, w5 = as_array(W)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = w1 / w3
        c = w2 / w3
        ok = (w3 > 0) & (alpha > margin) & (alpha < 1.0 - margin) & (c > margin) & (c < 1.0 - margin)
    return ok & np.isfinite(w4) & np.isfinite(w5)


def to_volume_chart(W) -> np.ndarray:
    """W → (alpha, c, v, u, q) with v = 1/rho and q = v w."""
    w1, w2, w3, w4, w5 = as_array(W)
    return np.array([w1 / w3, w2 / w3, 1.0 / w3, w4 / w3, w5 / w3])


def from_volume_chart(chart) -> np.ndarray:
    """(alpha, c, v, u, q) → W; the map is its own inverse."""
    alpha, c, v, u, q = np.asarray(chart, dtype=float)
    return np.array([alpha / v, c / v, 1.0 / v, u / v, q / v])


# ---------------------------------------------------------------------
# Record transforms
# ---------------------------------------------------------------------

def primitive_to_conserved(p: PrimitiveState) -> ConservedState:
    return ConservedState.from_array(to_conserved_array(p))


def conserved_to_primitive(W: ConservedState) -> PrimitiveState:
    w = as_array(W)
    if not w[2] > 0:
        raise StateAdmissibilityError(f"w3 (mixture density) must be > 0, got {w[2]}")
    return PrimitiveState.from_array(to_primitive_array(w))


def phase_fields(p: PrimitiveState) -> Tuple[float, float, float, float]:
    """(rho_1, rho_2, u_1, u_2) of a primitive state."""
    rho1, rho2, u1, u2 = phase_fields_array(p.alpha, p.c, p.rho, p.u, p.w)
    return float(rho1), float(rho2), float(u1), float(u2)


# ---------------------------------------------------------------------
# Equilibria
# ---------------------------------------------------------------------

def make_mechanical_equilibrium(mix: MixtureEos, p_star: float, alpha: float, u: float = 0.0) -> PrimitiveState:
    """State with w = 0 and p_1(rho_1) = p_2(rho_2) = p_star at volume fraction alpha."""
    if not (0.0 < alpha < 1.0):
        raise StateAdmissibilityError(f"alpha={alpha} outside (0, 1)")
    rho1 = phase_density_at_pressure(mix.phase1, p_star)
    rho2 = phase_density_at_pressure(mix.phase2, p_star)
    rho = alpha * rho1 + (1.0 - alpha) * rho2
    c = alpha * rho1 / rho
    state = PrimitiveState(alpha=alpha, c=c, rho=rho, u=u, w=0.0)
    p1 = phase_pressure(mix.phase1, state.c * state.rho / state.alpha)
    p2 = phase_pressure(mix.phase2, (1.0 - state.c) * state.rho / (1.0 - state.alpha))
    if abs(p1 - p2) > 1e-12 * max(abs(p_star), abs(p1), abs(p2)):
        raise DomainError(f"could not realise mechanical equilibrium at p*={p_star} (p1={p1}, p2={p2})")
    return state


def is_equilibrium(mix: MixtureEos, p: PrimitiveState, tol: float) -> EquilibriumReport:
    rho1, rho2, _, _ = phase_fields(p)
    mech = abs(phase_pressure(mix.phase2, rho2) - phase_pressure(mix.phase1, rho1)) / p.rho
    chem = abs(phase_psi(mix.phase1, rho1) - phase_psi(mix.phase2, rho2) + 0.5 * (1.0 - 2.0 * p.c) * p.w * p.w)
    kin = abs(p.c * (1.0 - p.c) * p.w)
    return EquilibriumReport(
        mechanical=bool(mech <= tol),
        chemical=bool(chem <= tol),
        kinetic=bool(kin <= tol),
        mechanical_residual=float(mech),
        chemical_residual=float(chem),
        kinetic_residual=float(kin),
    )
