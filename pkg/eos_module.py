"""
eos_module.py
Barotropic phase equations of state and the mixture generalized energy

    Phi(alpha, c, rho, w) = c phi_1(rho_1) + (1 - c) phi_2(rho_2) + c (1 - c) w^2 / 2,
    rho_1 = c rho / alpha,  rho_2 = (1 - c) rho / (1 - alpha),

with the first and second derivatives used by the structure checks.

All functions accept floats or numpy arrays (broadcast elementwise) and
return a float for scalar input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from errors_module import DomainError

# --- Constants ---
ROOT_RTOL = 1e-14
MAX_BRACKET_DOUBLINGS = 1100


class EosFamily(str, enum.Enum):
    POLYTROPIC = "polytropic-isentropic"
    ISOTHERMAL = "ideal-isothermal"
    STIFFENED = "stiffened-gas"


@dataclass(frozen=True)
class PhaseEosSpec:
    """One barotropic phase law.

    polytropic-isentropic  p = K rho^gamma           phi = K rho^(gamma-1)/(gamma-1)
    ideal-isothermal       p = cT2 rho               phi = cT2 ln(rho)
    stiffened-gas          p = K rho^gamma - pInf    phi = K rho^(gamma-1)/(gamma-1) + pInf/rho

    phi0 is added to phi (and therefore psi) only.
    """

    family: EosFamily
    K: float = 1.0
    gamma: float = 1.4
    cT2: float = 1.0
    pInf: float = 0.0
    phi0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", EosFamily(self.family))
        if self.family is EosFamily.ISOTHERMAL:
            if not self.cT2 > 0:
                raise DomainError(f"ideal-isothermal needs cT2 > 0, got {self.cT2}")
        else:
            if not self.K > 0:
                raise DomainError(f"{self.family.value} needs K > 0, got {self.K}")
            if not self.gamma > 1:
                raise DomainError(f"{self.family.value} needs gamma > 1, got {self.gamma}")
        if not math.isfinite(self.phi0):
            raise DomainError("phi0 must be finite")

    @property
    def regime(self) -> str:
        """'isothermal' when phi is a free energy (psi a Gibbs energy), else 'isentropic'."""
        return "isothermal" if self.family is EosFamily.ISOTHERMAL else "isentropic"


@dataclass(frozen=True)
class MixtureEos:
    phase1: PhaseEosSpec
    phase2: PhaseEosSpec

    def swapped(self) -> "MixtureEos":
        return MixtureEos(self.phase2, self.phase1)


@dataclass(frozen=True)
class MixDerivs1:
    """First derivatives of Phi(alpha, c, rho, w)."""

    dphi_dalpha: float
    dphi_dc: float
    dphi_drho: float
    dphi_dw: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dphi_dalpha, self.dphi_dc, self.dphi_drho, self.dphi_dw])


@dataclass(frozen=True)
class MixDerivs2:
    """Second derivatives in the (alpha, c, v, q) chart, q = v w.

    phi_* are the six entries of the Hessian of phi(alpha, c, v);
    gen_* are the ten entries of the Hessian of Phi(alpha, c, v, q).
    """

    phi_aa: float
    phi_ac: float
    phi_av: float
    phi_cc: float
    phi_cv: float
    phi_vv: float
    gen_aa: float
    gen_ac: float
    gen_av: float
    gen_aq: float
    gen_cc: float
    gen_cv: float
    gen_cq: float
    gen_vv: float
    gen_vq: float
    gen_qq: float

    def phi_hessian(self) -> np.ndarray:
        return np.array([
            [self.phi_aa, self.phi_ac, self.phi_av],
            [self.phi_ac, self.phi_cc, self.phi_cv],
            [self.phi_av, self.phi_cv, self.phi_vv],
        ])

    def gen_hessian(self) -> np.ndarray:
        return np.array([
            [self.gen_aa, self.gen_ac, self.gen_av, self.gen_aq],
            [self.gen_ac, self.gen_cc, self.gen_cv, self.gen_cq],
            [self.gen_av, self.gen_cv, self.gen_vv, self.gen_vq],
            [self.gen_aq, self.gen_cq, self.gen_vq, self.gen_qq],
        ])


# ---------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------

def _out(value):
    arr = np.asarray(value)
    return float(arr) if arr.ndim == 0 else arr


def _density(spec: PhaseEosSpec, rho_i) -> np.ndarray:
    rho = np.asarray(rho_i, dtype=float)
    if not np.all(rho > 0):
        raise DomainError(f"{spec.family.value}: density must be > 0, got min {np.min(rho)!r}")
    return rho


def _fractions(alpha, c, rho) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    alpha = np.asarray(alpha, dtype=float)
    c = np.asarray(c, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if not (np.all(alpha > 0) and np.all(alpha < 1)):
        raise DomainError("volume fraction alpha must lie in (0, 1)")
    if not (np.all(c > 0) and np.all(c < 1)):
        raise DomainError("mass fraction c must lie in (0, 1)")
    if not np.all(rho > 0):
        raise DomainError("mixture density must be > 0")
    return alpha, c, rho


def phase_densities(alpha, c, rho):
    """rho_1 = c rho / alpha, rho_2 = (1 - c) rho / (1 - alpha)."""
    alpha, c, rho = _fractions(alpha, c, rho)
    return _out(c * rho / alpha), _out((1.0 - c) * rho / (1.0 - alpha))


# ---------------------------------------------------------------------
# Phase laws
# ---------------------------------------------------------------------

def phase_pressure(spec: PhaseEosSpec, rho_i):
    rho = _density(spec, rho_i)
    if spec.family is EosFamily.ISOTHERMAL:
        return _out(spec.cT2 * rho)
    p = spec.K * np.power(rho, spec.gamma)
    if spec.family is EosFamily.STIFFENED:
        p = p - spec.pInf
        if not np.all(p + spec.pInf > 0):
            raise DomainError("stiffened-gas: p + pInf must be > 0")
    return _out(p)


def phase_potential(spec: PhaseEosSpec, rho_i):
    rho = _density(spec, rho_i)
    if spec.family is EosFamily.ISOTHERMAL:
        phi = spec.cT2 * np.log(rho)
    else:
        phi = spec.K * np.power(rho, spec.gamma - 1.0) / (spec.gamma - 1.0)
        if spec.family is EosFamily.STIFFENED:
            phi = phi + spec.pInf / rho
    return _out(phi + spec.phi0)


def phase_psi(spec: PhaseEosSpec, rho_i):
    """Specific enthalpy (isentropic) or Gibbs energy (isothermal): phi + p/rho."""
    rho = _density(spec, rho_i)
    return _out(np.asarray(phase_potential(spec, rho)) + np.asarray(phase_pressure(spec, rho)) / rho)


def phase_sound_speed_sq(spec: PhaseEosSpec, rho_i):
    rho = _density(spec, rho_i)
    if spec.family is EosFamily.ISOTHERMAL:
        return _out(np.full_like(rho, spec.cT2))
    return _out(spec.K * spec.gamma * np.power(rho, spec.gamma - 1.0))


def phase_density_at_pressure(spec: PhaseEosSpec, p_target: float) -> float:
    """Invert the (strictly increasing) phase law: Brent on a doubling bracket, then one Newton step."""
    p_target = float(p_target)
    floor = -spec.pInf if spec.family is EosFamily.STIFFENED else 0.0
    if not (p_target > floor and math.isfinite(p_target)):
        raise DomainError(f"{spec.family.value}: pressure {p_target} is not reachable (needs p > {floor})")

    def residual(r: float) -> float:
        return phase_pressure(spec, r) - p_target

    lo = hi = 1.0
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if residual(lo) < 0:
            break
        lo *= 0.5
    else:
        raise DomainError(f"{spec.family.value}: no lower bracket for p={p_target}")
    for _ in range(MAX_BRACKET_DOUBLINGS):
        if residual(hi) > 0:
            break
        hi *= 2.0
    else:
        raise DomainError(f"{spec.family.value}: no upper bracket for p={p_target}")

    rho = brentq(residual, lo, hi, xtol=np.finfo(float).tiny, rtol=ROOT_RTOL, maxiter=500)
    polished = rho - residual(rho) / phase_sound_speed_sq(spec, rho)
    if polished > 0 and abs(residual(polished)) <= abs(residual(rho)):
        rho = polished
    scale = abs(p_target) + (spec.pInf if spec.family is EosFamily.STIFFENED else 0.0)
    if abs(residual(rho)) > 1e-12 * scale:
        raise DomainError(f"{spec.family.value}: root finding for p={p_target} did not converge")
    return float(rho)


# ---------------------------------------------------------------------
# Mixture
# ---------------------------------------------------------------------

def mixture_potential(mix: MixtureEos, alpha, c, rho, w=0.0):
    alpha, c, rho = _fractions(alpha, c, rho)
    rho1, rho2 = c * rho / alpha, (1.0 - c) * rho / (1.0 - alpha)
    w = np.asarray(w, dtype=float)
    phi = c * np.asarray(phase_potential(mix.phase1, rho1)) + (1.0 - c) * np.asarray(phase_potential(mix.phase2, rho2))
    return _out(phi + 0.5 * c * (1.0 - c) * w * w)


def mixture_potential_vq(mix: MixtureEos, alpha, c, v, q):
    """Phi in the (alpha, c, v, q) chart used by the convexity analysis."""
    v = np.asarray(v, dtype=float)
    return mixture_potential(mix, alpha, c, 1.0 / v, np.asarray(q, dtype=float) / v)


def mixture_pressure(mix: MixtureEos, alpha, c, rho):
    alpha, c, rho = _fractions(alpha, c, rho)
    rho1, rho2 = c * rho / alpha, (1.0 - c) * rho / (1.0 - alpha)
    return _out(alpha * np.asarray(phase_pressure(mix.phase1, rho1))
                + (1.0 - alpha) * np.asarray(phase_pressure(mix.phase2, rho2)))


def mixture_sound_speed_sq(mix: MixtureEos, alpha, c, rho):
    alpha, c, rho = _fractions(alpha, c, rho)
    rho1, rho2 = c * rho / alpha, (1.0 - c) * rho / (1.0 - alpha)
    return _out(c * np.asarray(phase_sound_speed_sq(mix.phase1, rho1))
                + (1.0 - c) * np.asarray(phase_sound_speed_sq(mix.phase2, rho2)))


def mixture_first_derivs(mix: MixtureEos, alpha, c, rho, w=0.0) -> MixDerivs1:
    alpha, c, rho = _fractions(alpha, c, rho)
    w = np.asarray(w, dtype=float)
    rho1, rho2 = c * rho / alpha, (1.0 - c) * rho / (1.0 - alpha)
    p1 = np.asarray(phase_pressure(mix.phase1, rho1))
    p2 = np.asarray(phase_pressure(mix.phase2, rho2))
    psi1 = np.asarray(phase_psi(mix.phase1, rho1))
    psi2 = np.asarray(phase_psi(mix.phase2, rho2))
    p = alpha * p1 + (1.0 - alpha) * p2
    return MixDerivs1(
        dphi_dalpha=_out((p2 - p1) / rho),
        dphi_dc=_out(psi1 - psi2 + 0.5 * (1.0 - 2.0 * c) * w * w),
        dphi_drho=_out(p / (rho * rho)),
        dphi_dw=_out(c * (1.0 - c) * w),
    )


def mixture_second_derivs(mix: MixtureEos, alpha, c, v, q=0.0) -> MixDerivs2:
    v = np.asarray(v, dtype=float)
    if not np.all(v > 0):
        raise DomainError("specific volume must be > 0")
    alpha, c, _ = _fractions(alpha, c, 1.0 / v)
    q = np.asarray(q, dtype=float)
    v1 = alpha * v / c
    v2 = (1.0 - alpha) * v / (1.0 - c)
    a1 = np.asarray(phase_sound_speed_sq(mix.phase1, 1.0 / v1))
    a2 = np.asarray(phase_sound_speed_sq(mix.phase2, 1.0 / v2))
    p1 = np.asarray(phase_pressure(mix.phase1, 1.0 / v1))
    p2 = np.asarray(phase_pressure(mix.phase2, 1.0 / v2))

    phi_aa = v * (a1 / (alpha * v1) + a2 / ((1.0 - alpha) * v2))
    phi_ac = -(a1 / alpha + a2 / (1.0 - alpha))
    phi_av = -p1 + a1 / v1 + p2 - a2 / v2
    phi_cc = a1 / c + a2 / (1.0 - c)
    phi_cv = -(a1 - a2) / v
    phi_vv = (c * a1 + (1.0 - c) * a2) / (v * v)

    kin = c * (1.0 - c)
    return MixDerivs2(
        phi_aa=_out(phi_aa), phi_ac=_out(phi_ac), phi_av=_out(phi_av),
        phi_cc=_out(phi_cc), phi_cv=_out(phi_cv), phi_vv=_out(phi_vv),
        gen_aa=_out(phi_aa), gen_ac=_out(phi_ac), gen_av=_out(phi_av), gen_aq=_out(np.zeros_like(phi_aa)),
        gen_cc=_out(phi_cc - (q / v) ** 2),
        gen_cv=_out(phi_cv - (1.0 - 2.0 * c) * q * q / v ** 3),
        gen_cq=_out((1.0 - 2.0 * c) * q / (v * v)),
        gen_vv=_out(phi_vv + 3.0 * kin * q * q / v ** 4),
        gen_vq=_out(-2.0 * kin * q / v ** 3),
        gen_qq=_out(kin / (v * v)),
    )


def calibrate_offsets(mix: MixtureEos, p_star: float) -> MixtureEos:
    """Shift phase 2's phi0 so psi_1 = psi_2 at the common pressure p_star."""
    rho1 = phase_density_at_pressure(mix.phase1, p_star)
    rho2 = phase_density_at_pressure(mix.phase2, p_star)
    shift = phase_psi(mix.phase1, rho1) - phase_psi(mix.phase2, rho2)
    if shift == 0.0:
        return mix
    return replace(mix, phase2=replace(mix.phase2, phi0=mix.phase2.phi0 + shift))
