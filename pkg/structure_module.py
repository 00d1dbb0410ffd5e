"""
structure_module.py
Equilibrium Jacobian and eigenstructure, convexity of the generalized energy,
semi-dissipativity of the relaxation sources and the Shizuta-Kawashima
products, each next to a finite-difference or eigensolver oracle.

Field order everywhere: (1-, 2-, C, 2+, 1+).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

import fd_module as fd
from config_module import log_debug
from dynamics_module import conservative_flux, source_vector
from eos_module import (
    MixtureEos,
    mixture_first_derivs,
    mixture_potential,
    mixture_potential_vq,
    mixture_second_derivs,
    phase_pressure,
    phase_psi,
    phase_sound_speed_sq,
)
from errors_module import DomainError, PreconditionError
from state_module import (
    PrimitiveState,
    RelaxationParams,
    admissible,
    phase_fields,
    to_conserved_array,
    to_primitive_array,
)

# --- Constants ---
FIELDS = ("1-", "2-", "C", "2+", "1+")
GENUINELY_NONLINEAR = "genuinely-nonlinear"
LINEARLY_DEGENERATE = "linearly-degenerate"
DEGENERATE_RTOL = 1e-8


@dataclass(frozen=True)
class Tolerances:
    eigen_rtol: float = 1e-5
    residual_rtol: float = 1e-9
    h2_rtol: float = 1e-10
    h3_tol: float = 1e-9
    psd_tol: float = 1e-9
    null_tol: float = 1e-10
    dissip: float = 1e-12
    sk_rtol: float = 1e-8
    sk_closed_rtol: float = 1e-10
    sk_fd_rtol: float = 1e-9
    deriv_rtol: float = 1e-6
    ld_tol: float = 1e-7
    eq_tol: float = 1e-8

    @classmethod
    def from_mapping(cls, data: Dict[str, float]) -> "Tolerances":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown tolerances: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class EigenStructure:
    lambdas: np.ndarray             # (5,)
    rvecs: np.ndarray               # (5, 5), column k is the eigenvector of field k
    character: Tuple[str, ...]
    gnl: np.ndarray                 # grad(lambda) . R per field
    residuals: np.ndarray           # |A R - lambda R|_inf / (|A|_inf |R|_inf)
    epsilon: float


@dataclass(frozen=True)
class PhiHessian:
    matrix: np.ndarray              # (alpha, c, v)
    H1: float
    H2: float
    H3: float
    H1_closed: float
    H2_closed: float
    H3_normalized: float
    degenerate: bool


@dataclass(frozen=True)
class EquilibriumHessian:
    matrix: np.ndarray
    psd_gap: float
    null_modes: int
    printed_entry_13: float


@dataclass(frozen=True)
class DissipativityResult:
    production: float               # -grad E . Xi
    quadratic: float                # (tau_a/rho) Xi1^2 + (tau_c/rho) Xi2^2 + (rho^2/zeta) Xi5^2
    epsilon: float
    margin: float                   # production - epsilon |Xi|^2
    identity_error: float


@dataclass(frozen=True)
class SkResult:
    grad_xi_alpha: np.ndarray
    grad_xi_alpha_fd: np.ndarray
    products: np.ndarray            # -tau_alpha grad(xi_alpha) . R_k
    products_fd: np.ndarray
    closed_forms: np.ndarray
    scale: float
    sk_pass: bool
    acoustic_ok: bool


@dataclass
class StructureReport:
    state: Dict[str, float]
    lambdas: List[float]
    eigen_residuals: List[float]
    minors: Dict[str, float]
    psd_gap: float
    dissipativity_margin: float
    sk_products: List[float]
    sk_pass: bool
    spectrum_error: float = 0.0
    character: List[str] = field(default_factory=list)
    sk_closed_forms: List[float] = field(default_factory=list)
    sk_products_fd: List[float] = field(default_factory=list)
    source_products: List[float] = field(default_factory=list)
    dissipativity_identity_error: float = 0.0
    derivative_errors: Dict[str, float] = field(default_factory=dict)
    null_modes: int = 0
    degenerate: bool = False
    discrepancies: List[Dict[str, object]] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> Dict[str, object]:
        return asdict(self)


# ---------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------

def _local(mix: MixtureEos, state: PrimitiveState):
    """(rho_1, rho_2, a_1^2, a_2^2); a1, a2 below always denote squared sound speeds."""
    rho1, rho2, _, _ = phase_fields(state)
    a1 = float(phase_sound_speed_sq(mix.phase1, rho1))
    a2 = float(phase_sound_speed_sq(mix.phase2, rho2))
    return rho1, rho2, a1, a2


def _require_equilibrium(mix: MixtureEos, state: PrimitiveState, tol: float) -> None:
    rho1, rho2, a1, a2 = _local(mix, state)
    p1 = float(phase_pressure(mix.phase1, rho1))
    p2 = float(phase_pressure(mix.phase2, rho2))
    dp = abs(p1 - p2)
    if dp > tol * max(abs(p1), abs(p2), state.rho * (a1 + a2)) or abs(state.w) > tol * np.sqrt(max(a1, a2)):
        raise PreconditionError(
            f"state is not in mechanical+kinetic equilibrium (|p1-p2|={dp:.3e}, w={state.w:.3e})")


def _w_scale(W: np.ndarray, mix: MixtureEos) -> np.ndarray:
    """FD step scales for conserved coordinates.

    w1, w2, w3 share the smallest of the partial masses so that neither phase
    density moves by more than the relative step.
    """
    w1, w2, w3, w4, w5 = W
    mass = min(w1, w3 - w1, w2, w3 - w2)
    rho1 = w2 * w3 / w1
    rho2 = (w3 - w2) * w3 / (w3 - w1)
    a = np.sqrt(max(float(phase_sound_speed_sq(mix.phase1, rho1)), float(phase_sound_speed_sq(mix.phase2, rho2))))
    return np.array([mass, mass, mass, max(abs(w4), w3 * a), max(abs(w5), a)])


def _fraction_scale(x: float) -> float:
    return min(x, 1.0 - x)


def _is_admissible(W) -> bool:
    return bool(admissible(W))


def _chart_admissible(x) -> bool:
    alpha, c, v = x[0], x[1], x[2]
    return bool(0.0 < alpha < 1.0 and 0.0 < c < 1.0 and v > 0.0)


def is_degenerate(mix: MixtureEos, state: PrimitiveState) -> bool:
    rho1, rho2, _, _ = _local(mix, state)
    return bool(abs(rho1 - rho2) <= DEGENERATE_RTOL * max(rho1, rho2))


# ---------------------------------------------------------------------
# Jacobian and eigenstructure
# ---------------------------------------------------------------------

def analytic_jacobian(mix: MixtureEos, state: PrimitiveState, tol: float = Tolerances.eq_tol) -> np.ndarray:
    """Flux Jacobian dF/dW at mechanical and kinetic equilibrium."""
    _require_equilibrium(mix, state, tol)
    alpha, c, rho, u = state.alpha, state.c, state.rho, state.u
    rho1, rho2, a1, a2 = _local(mix, state)
    alpha2, c2 = 1.0 - alpha, 1.0 - c
    drho2_dw3 = (alpha2 - alpha * c2) / alpha2 ** 2

    A = np.zeros((5, 5))
    A[0] = [u, 0.0, -alpha * u, alpha, 0.0]
    A[1] = [0.0, u, -c * u, c, c * c2 * rho]
    A[2] = [0.0, 0.0, 0.0, 1.0, 0.0]
    A[3] = [
        -c * a1 / alpha + c2 * a2 / alpha2,
        a1 - a2,
        -u * u + c * a1 + alpha2 * a2 * drho2_dw3,
        2.0 * u,
        0.0,
    ]
    A[4] = [
        -a1 / (alpha * rho) - a2 / (alpha2 * rho),
        a1 / (alpha * rho1) + a2 / (alpha2 * rho2),
        a1 / rho - a2 * drho2_dw3 / rho2,
        0.0,
        u,
    ]
    return A


def numeric_flux_jacobian(mix: MixtureEos, W, rel_step: float = fd.REL_STEP) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    if not _is_admissible(W):
        raise DomainError(f"inadmissible conserved state {W}")
    return fd.jacobian(lambda V: conservative_flux(mix, V), W, rel_step=rel_step,
                       scale=_w_scale(W, mix), admissible=_is_admissible)


def equilibrium_eigenvalues(mix: MixtureEos, state: PrimitiveState) -> np.ndarray:
    _, _, a1, a2 = _local(mix, state)
    s1, s2 = np.sqrt(a1), np.sqrt(a2)
    u = state.u
    return np.array([u - s1, u - s2, u, u + s2, u + s1])


def _field_speeds(mix: MixtureEos, W) -> np.ndarray:
    """Wave speeds as functions of W, used for the genuine-nonlinearity test."""
    alpha, c, rho, u, _ = to_primitive_array(W)
    rho1 = c * rho / alpha
    rho2 = (1.0 - c) * rho / (1.0 - alpha)
    s1 = np.sqrt(phase_sound_speed_sq(mix.phase1, rho1))
    s2 = np.sqrt(phase_sound_speed_sq(mix.phase2, rho2))
    return np.array([u - s1, u - s2, u, u + s2, u + s1])


def eigen_structure(mix: MixtureEos, state: PrimitiveState, tol: Tolerances = Tolerances()) -> EigenStructure:
    A = analytic_jacobian(mix, state, tol.eq_tol)
    alpha, c, rho, u = state.alpha, state.c, state.rho, state.u
    rho1, rho2, a1, a2 = _local(mix, state)
    alpha2, c2 = 1.0 - alpha, 1.0 - c
    if alpha2 * c == 0.0:
        raise DomainError("contact eigenvector undefined for alpha_2 c_1 = 0")
    eps = -(alpha * c2 - alpha2 * c) / (alpha2 * c)
    s1, s2 = np.sqrt(a1), np.sqrt(a2)

    R = np.column_stack([
        [alpha, 1.0, 1.0, u - s1, -s1 / (alpha * rho1)],
        [alpha, 0.0, 1.0, u - s2, s2 / (alpha2 * rho2)],
        [alpha * eps + alpha / c, 1.0, eps, u * eps, 0.0],
        [alpha, 0.0, 1.0, u + s2, -s2 / (alpha2 * rho2)],
        [alpha, 1.0, 1.0, u + s1, s1 / (alpha * rho1)],
    ])
    lambdas = equilibrium_eigenvalues(mix, state)

    a_norm = np.max(np.sum(np.abs(A), axis=1))
    residuals = np.array([
        np.max(np.abs(A @ R[:, k] - lambdas[k] * R[:, k])) / (a_norm * np.max(np.abs(R[:, k])))
        for k in range(5)
    ])

    W = to_conserved_array(state)
    mass = float(_w_scale(W, mix)[0])
    gnl = np.array([
        fd.directional_derivative(lambda V, k=k: _field_speeds(mix, V)[k], W, R[:, k], admissible=_is_admissible,
                                  h=fd.REL_STEP * mass / np.max(np.abs(R[:3, k])))
        for k in range(5)
    ])
    threshold = tol.ld_tol * max(1.0, float(np.max(np.abs(gnl))))
    character = tuple(LINEARLY_DEGENERATE if abs(g) <= threshold else GENUINELY_NONLINEAR for g in gnl)
    return EigenStructure(lambdas=lambdas, rvecs=R, character=character, gnl=gnl, residuals=residuals, epsilon=eps)


def spectrum_error(mix: MixtureEos, state: PrimitiveState) -> Tuple[float, np.ndarray]:
    """Max distance between sorted FD-Jacobian eigenvalues and u +- a_i, u; relative to |u| + max a."""
    W = to_conserved_array(state)
    eig = np.linalg.eigvals(numeric_flux_jacobian(mix, W))
    numeric = np.sort(eig.real)
    expected = np.sort(equilibrium_eigenvalues(mix, state))
    _, _, a1, a2 = _local(mix, state)
    scale = abs(state.u) + np.sqrt(max(a1, a2))
    err = max(float(np.max(np.abs(numeric - expected))), float(np.max(np.abs(eig.imag))))
    return err / scale, numeric


# ---------------------------------------------------------------------
# Convexity
# ---------------------------------------------------------------------

def _chart_volumes(alpha: float, c: float, v: float) -> Tuple[float, float]:
    return alpha * v / c, (1.0 - alpha) * v / (1.0 - c)


def hessian_phi(mix: MixtureEos, alpha: float, c: float, v: float) -> PhiHessian:
    d2 = mixture_second_derivs(mix, alpha, c, v, 0.0)
    H = d2.phi_hessian()
    v1, v2 = _chart_volumes(alpha, c, v)
    a1 = float(phase_sound_speed_sq(mix.phase1, 1.0 / v1))
    a2 = float(phase_sound_speed_sq(mix.phase2, 1.0 / v2))
    H1 = float(H[0, 0])
    H2 = float(H[0, 0] * H[1, 1] - H[0, 1] ** 2)
    H3 = float(np.linalg.det(H))
    H1_closed = v * (a1 / (alpha * v1) + a2 / ((1.0 - alpha) * v2))
    H2_closed = a1 * a2 * (v1 - v2) ** 2 / (v1 * v2 * alpha * (1.0 - alpha))
    norm = abs(H[0, 0] * H[1, 1] * H[2, 2])
    return PhiHessian(
        matrix=H, H1=H1, H2=H2, H3=H3, H1_closed=float(H1_closed), H2_closed=float(H2_closed),
        H3_normalized=abs(H3) / norm if norm > 0 else abs(H3),
        degenerate=abs(v1 - v2) <= DEGENERATE_RTOL * max(v1, v2),
    )


def fd_hessian_phi(mix: MixtureEos, alpha: float, c: float, v: float) -> np.ndarray:
    return fd.hessian(lambda x: mixture_potential_vq(mix, x[0], x[1], x[2], 0.0),
                      np.array([alpha, c, v]), scale=[_fraction_scale(alpha), _fraction_scale(c), v],
                      admissible=_chart_admissible)


def fd_hessian_Phi(mix: MixtureEos, alpha: float, c: float, v: float, q: float, q_scale: float) -> np.ndarray:
    return fd.hessian(lambda x: mixture_potential_vq(mix, x[0], x[1], x[2], x[3]),
                      np.array([alpha, c, v, q]), scale=[_fraction_scale(alpha), _fraction_scale(c), v, max(abs(q), q_scale)],
                      admissible=_chart_admissible)


def _mechanical_check(mix: MixtureEos, alpha: float, c: float, v: float, tol: float) -> Tuple[float, float, float, float, float, float]:
    v1, v2 = _chart_volumes(alpha, c, v)
    p1 = float(phase_pressure(mix.phase1, 1.0 / v1))
    p2 = float(phase_pressure(mix.phase2, 1.0 / v2))
    a1 = float(phase_sound_speed_sq(mix.phase1, 1.0 / v1))
    a2 = float(phase_sound_speed_sq(mix.phase2, 1.0 / v2))
    if abs(p1 - p2) > tol * max(abs(p1), abs(p2), (a1 + a2) / v):
        raise PreconditionError(f"not in mechanical equilibrium: p1={p1}, p2={p2}")
    return v1, v2, p1, p2, a1, a2


def _psd(H: np.ndarray, null_tol: float) -> Tuple[float, int]:
    eig = np.linalg.eigvalsh(H)
    scale = float(np.max(np.abs(eig)))
    return float(eig[0]), int(np.sum(np.abs(eig) <= null_tol * scale))


def hessian_Phi_equilibrium(mix: MixtureEos, alpha: float, c: float, v: float,
                            tol: Tolerances = Tolerances()) -> EquilibriumHessian:
    """Hessian of Phi(alpha, c, v, q) at q = 0 and p_1 = p_2, in block form."""
    v1, v2, p1, p2, a1, a2 = _mechanical_check(mix, alpha, c, v, tol.eq_tol)
    kin = c * (1.0 - c)
    H = np.zeros((4, 4))
    H[0, 0] = v * (a1 / (alpha * v1) + a2 / ((1.0 - alpha) * v2))
    H[0, 1] = H[1, 0] = -(a1 / alpha + a2 / (1.0 - alpha))
    H[0, 2] = H[2, 0] = a1 / v1 - a2 / v2
    H[1, 1] = a1 / c + a2 / (1.0 - c)
    H[1, 2] = H[2, 1] = -(a1 - a2) / v
    H[2, 2] = (c * a1 + (1.0 - c) * a2) / (v * v)
    H[3, 3] = kin / (v * v)
    gap, nulls = _psd(H, tol.null_tol)
    return EquilibriumHessian(matrix=H, psd_gap=gap, null_modes=nulls,
                              printed_entry_13=a1 / (v1 * p1) - a2 / (v2 * p2))


def hessian_total_energy_equilibrium(mix: MixtureEos, alpha: float, c: float, v: float,
                                     tol: Tolerances = Tolerances()) -> EquilibriumHessian:
    """Hessian of Phi + u^2/2 in (alpha, c, v, u, q): the phi block, 1 for u, c(1-c)/v^2 for q."""
    eq = hessian_Phi_equilibrium(mix, alpha, c, v, tol)
    H = np.zeros((5, 5))
    H[:3, :3] = eq.matrix[:3, :3]
    H[3, 3] = 1.0
    H[4, 4] = eq.matrix[3, 3]
    gap, nulls = _psd(H, tol.null_tol)
    return EquilibriumHessian(matrix=H, psd_gap=gap, null_modes=nulls, printed_entry_13=eq.printed_entry_13)


# ---------------------------------------------------------------------
# Energy gradient and dissipativity
# ---------------------------------------------------------------------

def energy_of_conserved(mix: MixtureEos, W) -> float:
    """E(W) = w3 Phi + w4^2 / (2 w3)."""
    alpha, c, rho, u, w = to_primitive_array(W)
    return float(rho * mixture_potential(mix, alpha, c, rho, w) + 0.5 * rho * u * u)


def grad_energy_conserved(mix: MixtureEos, W, literal: bool = False) -> np.ndarray:
    """dE/dW; literal=True reproduces the printed variant with u^2 as fourth entry."""
    alpha, c, rho, u, w = (float(x) for x in to_primitive_array(W))
    d1 = mixture_first_derivs(mix, alpha, c, rho, w)
    Phi = float(mixture_potential(mix, alpha, c, rho, w))
    return np.array([
        d1.dphi_dalpha,
        d1.dphi_dc,
        Phi - alpha * d1.dphi_dalpha - c * d1.dphi_dc + rho * d1.dphi_drho - 0.5 * u * u,
        u * u if literal else u,
        rho * d1.dphi_dw,
    ])


def fd_grad_energy(mix: MixtureEos, W) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    return fd.gradient(lambda V: energy_of_conserved(mix, V), W, scale=_w_scale(W, mix), admissible=_is_admissible)


def energy_gradient_discrepancy(mix: MixtureEos, W) -> List[Dict[str, float]]:
    """Per component: analytic, printed variant, FD oracle and relative errors of both."""
    W = np.asarray(W, dtype=float)
    exact = grad_energy_conserved(mix, W)
    printed = grad_energy_conserved(mix, W, literal=True)
    oracle = fd_grad_energy(mix, W)
    floor = float(np.max(np.abs(oracle)))
    rows = []
    for k in range(5):
        denom = max(abs(oracle[k]), 1e-3 * floor, np.finfo(float).tiny)
        rows.append({
            "component": k + 1,
            "analytic": float(exact[k]),
            "printed": float(printed[k]),
            "fd": float(oracle[k]),
            "analytic_rel_error": float(abs(exact[k] - oracle[k]) / denom),
            "printed_rel_error": float(abs(printed[k] - oracle[k]) / denom),
        })
    return rows


def dissipativity_check(mix: MixtureEos, relax: RelaxationParams, W) -> DissipativityResult:
    W = np.asarray(W, dtype=float)
    rho = float(W[2])
    Xi = source_vector(mix, relax, W)
    production = float(-grad_energy_conserved(mix, W) @ Xi)
    quadratic = float((relax.tau_alpha / rho) * Xi[0] ** 2 + (relax.tau_c / rho) * Xi[1] ** 2
                      + (rho ** 2 / relax.zeta) * Xi[4] ** 2)
    eps = min(relax.tau_alpha / rho, relax.tau_c / rho, rho ** 2 / relax.zeta)
    margin = production - eps * float(Xi @ Xi)
    scale = max(abs(production), abs(quadratic))
    identity_error = abs(production - quadratic) / scale if scale > 0 else 0.0
    return DissipativityResult(production=production, quadratic=quadratic, epsilon=eps,
                               margin=margin, identity_error=identity_error)


# ---------------------------------------------------------------------
# Shizuta-Kawashima
# ---------------------------------------------------------------------

def grad_xi_alpha(mix: MixtureEos, relax: RelaxationParams, state: PrimitiveState) -> np.ndarray:
    """Gradient of xi_alpha = -(p_2 - p_1)/tau_alpha with respect to W."""
    alpha, c = state.alpha, state.c
    rho1, rho2, a1, a2 = _local(mix, state)
    alpha2, c2 = 1.0 - alpha, 1.0 - c
    drho2_dw3 = (alpha2 - alpha * c2) / alpha2 ** 2
    grad_p1 = a1 * np.array([-c / alpha ** 2, 1.0 / alpha, c / alpha, 0.0, 0.0])
    grad_p2 = a2 * np.array([c2 / alpha2 ** 2, -1.0 / alpha2, drho2_dw3, 0.0, 0.0])
    return -(grad_p2 - grad_p1) / relax.tau_alpha


def sk_closed_forms(mix: MixtureEos, state: PrimitiveState) -> np.ndarray:
    """-a_1^2/alpha_1 for fields 1+-, a_2^2/alpha_2 for 2+- and C."""
    _, _, a1, a2 = _local(mix, state)
    k1 = -a1 / state.alpha
    k2 = a2 / (1.0 - state.alpha)
    return np.array([k1, k2, k2, k2, k1])


def sk_check(mix: MixtureEos, relax: RelaxationParams, state: PrimitiveState,
             tol: Tolerances = Tolerances(), eig: Optional[EigenStructure] = None) -> SkResult:
    eig = eigen_structure(mix, state, tol) if eig is None else eig
    grad = grad_xi_alpha(mix, relax, state)
    W = to_conserved_array(state)
    only_alpha = RelaxationParams(tau_alpha=relax.tau_alpha, tau_c=relax.tau_c, zeta=relax.zeta,
                                  enable_alpha=True, enable_c=False, enable_w=False)
    grad_fd = fd.gradient(lambda V: source_vector(mix, only_alpha, V)[0], W,
                          scale=_w_scale(W, mix), admissible=_is_admissible)
    products = -relax.tau_alpha * (grad @ eig.rvecs)
    products_fd = -relax.tau_alpha * (grad_fd @ eig.rvecs)
    closed = sk_closed_forms(mix, state)

    _, _, a1, a2 = _local(mix, state)
    a_sq = state.c * a1 + (1.0 - state.c) * a2
    scale = a_sq / min(state.alpha, 1.0 - state.alpha)
    sk_pass = bool(np.all(np.abs(products) > tol.sk_rtol * scale))

    acoustic = [0, 1, 3, 4]
    closed_ok = np.all(np.abs(products[acoustic] - closed[acoustic]) <= tol.sk_closed_rtol * np.abs(closed[acoustic]))
    fd_ok = np.all(np.abs(products - products_fd) <= tol.sk_fd_rtol * scale)
    nonzero = np.all(np.abs(products[acoustic]) > tol.sk_rtol * scale)
    return SkResult(grad_xi_alpha=grad, grad_xi_alpha_fd=grad_fd, products=products, products_fd=products_fd,
                    closed_forms=closed, scale=float(scale), sk_pass=sk_pass,
                    acoustic_ok=bool(closed_ok and fd_ok and nonzero))


def source_jacobian_products(mix: MixtureEos, relax: RelaxationParams, state: PrimitiveState,
                             eig: Optional[EigenStructure] = None) -> np.ndarray:
    """|dXi/dW . R_k|_inf per field for the complete source (FD linearisation)."""
    eig = eigen_structure(mix, state) if eig is None else eig
    W = to_conserved_array(state)
    J = fd.jacobian(lambda V: source_vector(mix, relax, V), W, scale=_w_scale(W, mix), admissible=_is_admissible)
    return np.max(np.abs(J @ eig.rvecs), axis=0)


# ---------------------------------------------------------------------
# Derivative layer against FD
# ---------------------------------------------------------------------

def derivative_errors(mix: MixtureEos, state: PrimitiveState) -> Dict[str, float]:
    """Max relative error of MixDerivs1 and the Phi Hessian against fourth-order FD."""
    alpha, c, rho, w = state.alpha, state.c, state.rho, state.w
    rho1, rho2, a1, a2 = _local(mix, state)
    a = np.sqrt(state.c * a1 + (1.0 - state.c) * a2)
    x = np.array([alpha, c, rho, w])
    d1 = mixture_first_derivs(mix, alpha, c, rho, w).as_array()

    def chart_ok(y):
        return bool(0.0 < y[0] < 1.0 and 0.0 < y[1] < 1.0 and y[2] > 0.0)

    oracle1 = fd.gradient(lambda y: mixture_potential(mix, y[0], y[1], y[2], y[3]), x,
                          scale=[_fraction_scale(alpha), _fraction_scale(c), rho, max(abs(w), a)], admissible=chart_ok)
    p1 = float(phase_pressure(mix.phase1, rho1))
    p2 = float(phase_pressure(mix.phase2, rho2))
    psi = abs(float(phase_psi(mix.phase1, rho1))) + abs(float(phase_psi(mix.phase2, rho2)))
    scales1 = np.array([
        (abs(p1) + abs(p2) + rho * a * a) / rho,
        psi + a * a + w * w,
        (abs(p1) + abs(p2) + rho * a * a) / rho ** 2,
        c * (1.0 - c) * max(abs(w), a),
    ])
    err1 = float(np.max(np.abs(d1 - oracle1) / scales1))

    v = 1.0 / rho
    q = v * w
    H = mixture_second_derivs(mix, alpha, c, v, q).gen_hessian()
    oracle2 = fd_hessian_Phi(mix, alpha, c, v, q, q_scale=v * a)
    # entries near zero are judged against the largest entry
    err2 = float(np.max(np.abs(H - oracle2) / (np.abs(oracle2) + np.max(np.abs(oracle2)))))
    return {"first": err1, "second": err2}


# ---------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------

def structure_report(mix: MixtureEos, relax: RelaxationParams, state: PrimitiveState,
                     tol: Tolerances = Tolerances(), off_state: Optional[PrimitiveState] = None,
                     require_sk_pass: bool = False) -> StructureReport:
    """All structure checks for one equilibrium state; off_state (if given) drives the
    dissipativity and derivative checks."""
    failures: List[str] = []
    discrepancies: List[Dict[str, object]] = []
    degenerate = is_degenerate(mix, state)

    eig = eigen_structure(mix, state, tol)
    spec_err, _ = spectrum_error(mix, state)
    if spec_err > tol.eigen_rtol:
        failures.append(f"spectrum mismatch {spec_err:.3e}")
    if np.max(eig.residuals) > tol.residual_rtol:
        failures.append(f"eigenpair residual {np.max(eig.residuals):.3e}")
    if eig.character[2] != LINEARLY_DEGENERATE:
        failures.append("contact field not linearly degenerate")

    v = 1.0 / state.rho
    hphi = hessian_phi(mix, state.alpha, state.c, v)
    h4 = hessian_Phi_equilibrium(mix, state.alpha, state.c, v, tol)
    h5 = hessian_total_energy_equilibrium(mix, state.alpha, state.c, v, tol)
    h2_floor = 1e-13 * abs(hphi.matrix[0, 0] * hphi.matrix[1, 1])
    if abs(hphi.H2 - hphi.H2_closed) > tol.h2_rtol * abs(hphi.H2_closed) + h2_floor:
        failures.append(f"H2 {hphi.H2:.12g} differs from closed form {hphi.H2_closed:.12g}")
    if not hphi.H1 > 0:
        failures.append(f"H1 = {hphi.H1:.3e} not positive")
    if hphi.H3_normalized > tol.h3_tol:
        failures.append(f"|H3| normalized {hphi.H3_normalized:.3e}")
    psd_gap = min(h4.psd_gap, h5.psd_gap)
    if psd_gap < -tol.psd_tol * float(np.max(np.abs(h5.matrix))):
        failures.append(f"equilibrium Hessian not PSD (gap {psd_gap:.3e})")
    if not degenerate:
        if not hphi.H2 > 0:
            failures.append(f"H2 = {hphi.H2:.3e} not positive")
        if h5.null_modes != 1:
            failures.append(f"{h5.null_modes} near-zero modes in the total-energy Hessian")
    printed = h4.printed_entry_13
    if not np.isclose(printed, h4.matrix[0, 2], rtol=1e-10, atol=0.0):
        discrepancies.append({"check": "Phi Hessian entry (1,3)", "printed": printed, "used": float(h4.matrix[0, 2])})

    sk = sk_check(mix, relax, state, tol, eig)
    if not sk.acoustic_ok:
        failures.append("acoustic SK products disagree with closed forms or oracle")
    if require_sk_pass and not sk.sk_pass:
        failures.append("SK condition fails")
    for k, name in enumerate(FIELDS):
        if not np.isclose(sk.products_fd[k], sk.closed_forms[k], rtol=tol.sk_closed_rtol, atol=tol.sk_fd_rtol * sk.scale):
            discrepancies.append({"check": f"SK product {name}", "closed_form": float(sk.closed_forms[k]),
                                  "oracle": float(sk.products_fd[k])})
    source_products = source_jacobian_products(mix, relax, state, eig)

    source_state = state if off_state is None else off_state
    W = to_conserved_array(source_state)
    dis = dissipativity_check(mix, relax, W)
    if dis.margin < -tol.dissip * max(1.0, abs(dis.quadratic)):
        failures.append(f"dissipativity margin {dis.margin:.3e}")
    if dis.identity_error > tol.dissip:
        failures.append(f"dissipation identity error {dis.identity_error:.3e}")
    for row in energy_gradient_discrepancy(mix, W):
        if row["analytic_rel_error"] > tol.deriv_rtol:
            failures.append(f"energy gradient component {row['component']} error {row['analytic_rel_error']:.3e}")
        if row["printed_rel_error"] > tol.deriv_rtol:
            discrepancies.append({"check": f"energy gradient component {row['component']}",
                                  "printed": row["printed"], "oracle": row["fd"]})
    derivs = derivative_errors(mix, source_state)
    for name, err in derivs.items():
        if err > tol.deriv_rtol:
            failures.append(f"{name} derivatives differ from FD by {err:.3e}")

    for d in discrepancies:
        log_debug("structure", f"discrepancy at {state.to_dict()}: {d}")

    return StructureReport(
        state=state.to_dict(),
        lambdas=[float(x) for x in eig.lambdas],
        eigen_residuals=[float(x) for x in eig.residuals],
        minors={"H1": hphi.H1, "H2": hphi.H2, "H3": hphi.H3, "H2_closed": hphi.H2_closed,
                "H3_normalized": hphi.H3_normalized},
        psd_gap=psd_gap,
        dissipativity_margin=dis.margin,
        sk_products=[float(x) for x in sk.products],
        sk_pass=sk.sk_pass,
        spectrum_error=spec_err,
        character=list(eig.character),
        sk_closed_forms=[float(x) for x in sk.closed_forms],
        sk_products_fd=[float(x) for x in sk.products_fd],
        source_products=[float(x) for x in source_products],
        dissipativity_identity_error=dis.identity_error,
        derivative_errors=derivs,
        null_modes=h5.null_modes,
        degenerate=degenerate,
        discrepancies=discrepancies,
        failures=failures,
    )
