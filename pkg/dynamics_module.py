"""
dynamics_module.py
Conservative flux, relaxation sources and the 1D Rusanov finite-volume solver
with Strang-split stiff sources and a discrete total-energy monitor.

Conserved arrays have shape (5,) or (5, n_cells): (alpha rho, c rho, rho, rho u, w).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from config_module import (
    get_float,
    get_int,
    get_range,
    load_yaml,
    log_debug,
    log_info,
    log_warning,
    parse_mixture,
    parse_relax,
    section,
)
from eos_module import (
    MixtureEos,
    PhaseEosSpec,
    calibrate_offsets,
    mixture_first_derivs,
    mixture_potential,
    phase_potential,
    phase_pressure,
    phase_psi,
    phase_sound_speed_sq,
)
from errors_module import ConfigError, DomainError, StepFailure
from state_module import (
    FIELD_NAMES,
    PrimitiveState,
    RelaxationParams,
    admissible,
    make_mechanical_equilibrium,
    phase_fields_array,
    to_conserved_array,
)

# --- Constants ---
SUBSTEP_TARGET = 0.005          # dt * sigma per implicit-midpoint sub-step
MAX_SUBSTEPS = 1024
MAX_HALVINGS = 64
MAX_NEWTON_ITERATIONS = 20
NEWTON_RTOL = 1e-13
DEFAULT_MAX_STEPS = 1_000_000
ENERGY_INCREASE_RTOL = 1e-12

SNAPSHOT_HEADER = ("t", "x", "alpha", "c", "rho", "u", "w", "p1", "p2", "E")
DIAGNOSTICS_HEADER = ("t", "mass", "momentum", "energy", "max_dp", "max_w")


class BoundaryCondition(str, enum.Enum):
    PERIODIC = "periodic"
    TRANSMISSIVE = "transmissive"


@dataclass(frozen=True)
class RiemannData:
    left: PrimitiveState
    right: PrimitiveState
    x0: float


@dataclass(frozen=True)
class SmoothData:
    """base + amplitude * sin(2 pi k (x - xL) / L) added to one primitive field."""

    base: PrimitiveState
    field: str = "u"
    amplitude: float = 0.01
    wavenumber: int = 1


@dataclass(frozen=True)
class UniformData:
    state: PrimitiveState


InitialData = Union[RiemannData, SmoothData, UniformData]


@dataclass(frozen=True)
class SimConfig:
    n_cells: int
    domain: Tuple[float, float]
    cfl: float
    t_end: float
    bc: BoundaryCondition
    relax: RelaxationParams
    initial: InitialData
    output_every: Optional[float] = None
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.n_cells < 2:
            raise ConfigError(f"grid.n_cells must be >= 2, got {self.n_cells}")
        if not self.domain[1] > self.domain[0]:
            raise ConfigError(f"grid.domain must satisfy xR > xL, got {self.domain}")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError(f"time.cfl must lie in (0, 1], got {self.cfl}")
        if not (self.t_end >= 0.0 and math.isfinite(self.t_end)):
            raise ConfigError(f"time.t_end must be >= 0, got {self.t_end}")
        if self.output_every is not None and not self.output_every > 0:
            raise ConfigError(f"time.output_every must be > 0, got {self.output_every}")
        object.__setattr__(self, "bc", BoundaryCondition(self.bc))

    @property
    def dx(self) -> float:
        return (self.domain[1] - self.domain[0]) / self.n_cells

    def cell_centers(self) -> np.ndarray:
        return self.domain[0] + (np.arange(self.n_cells) + 0.5) * self.dx

    def output_times(self) -> List[float]:
        if self.t_end == 0.0:
            return [0.0]
        times = [0.0]
        if self.output_every is not None:
            k = 1
            while k * self.output_every < self.t_end * (1.0 - 1e-12):
                times.append(k * self.output_every)
                k += 1
        times.append(self.t_end)
        return times


@dataclass(frozen=True)
class Diagnostics:
    mass: float
    momentum: float
    energy: float
    max_dp: float
    max_w: float


@dataclass(frozen=True)
class FieldSnapshot:
    t: float
    x: np.ndarray
    dx: float
    cells: np.ndarray               # (5, n_cells) conserved
    diagnostics: Diagnostics


@dataclass(frozen=True)
class EnergyBudget:
    """Cell-summed energy in both bookkeepings plus per-phase energy flux on interior faces."""

    energy: float
    energy_mixture: float
    face_flux: np.ndarray           # (2, n_cells - 1)


# ---------------------------------------------------------------------
# Pointwise physics
# ---------------------------------------------------------------------

def _unpack(W):
    W = np.asarray(W, dtype=float)
    w1, w2, w3, w4, w5 = W
    alpha, c, u = w1 / w3, w2 / w3, w4 / w3
    rho1, rho2, u1, u2 = phase_fields_array(alpha, c, w3, u, w5)
    return alpha, c, w3, u, w5, rho1, rho2, u1, u2


def conservative_flux(mix: MixtureEos, W) -> np.ndarray:
    alpha, c, rho, u, w, rho1, rho2, u1, u2 = _unpack(W)
    w1, w2, w3, w4, _ = np.asarray(W, dtype=float)
    p1 = np.asarray(phase_pressure(mix.phase1, rho1))
    p2 = np.asarray(phase_pressure(mix.phase2, rho2))
    psi1 = np.asarray(phase_psi(mix.phase1, rho1))
    psi2 = np.asarray(phase_psi(mix.phase2, rho2))
    p = alpha * p1 + (1.0 - alpha) * p2
    return np.array([
        w1 * u,
        w2 * u1,
        w3 * u,
        w4 * u + c * (1.0 - c) * w3 * w * w + p,
        w * u + 0.5 * (1.0 - 2.0 * c) * w * w + psi1 - psi2,
    ])


def source_vector(mix: MixtureEos, relax: RelaxationParams, W) -> np.ndarray:
    """(xi_alpha, xi_c, 0, 0, xi_w); disabled sources are zero."""
    alpha, c, rho, _, w, *_ = _unpack(W)
    d1 = mixture_first_derivs(mix, alpha, c, rho, w)
    zero = np.zeros_like(np.asarray(rho, dtype=float))
    xi_alpha = -(rho / relax.tau_alpha) * d1.dphi_dalpha if relax.enable_alpha else zero
    xi_c = -(rho / relax.tau_c) * d1.dphi_dc if relax.enable_c else zero
    xi_w = -(relax.zeta / rho) * d1.dphi_dw if relax.enable_w else zero
    return np.array([xi_alpha + zero, xi_c + zero, zero, zero, xi_w + zero])


def max_wave_speed(mix: MixtureEos, W) -> np.ndarray:
    """Per-cell bound max(|u_1| + a_1, |u_2| + a_2) on the characteristic speeds."""
    *_, rho1, rho2, u1, u2 = _unpack(W)
    a1 = np.sqrt(np.asarray(phase_sound_speed_sq(mix.phase1, rho1)))
    a2 = np.sqrt(np.asarray(phase_sound_speed_sq(mix.phase2, rho2)))
    return np.maximum(np.abs(u1) + a1, np.abs(u2) + a2)


def rusanov_flux(mix: MixtureEos, WL, WR) -> np.ndarray:
    WL = np.asarray(WL, dtype=float)
    WR = np.asarray(WR, dtype=float)
    s = np.maximum(max_wave_speed(mix, WL), max_wave_speed(mix, WR))
    return 0.5 * (conservative_flux(mix, WL) + conservative_flux(mix, WR)) - 0.5 * s * (WR - WL)


def energy_density(mix: MixtureEos, W) -> np.ndarray:
    """E = rho Phi + rho u^2 / 2."""
    alpha, c, rho, u, w, *_ = _unpack(W)
    return rho * np.asarray(mixture_potential(mix, alpha, c, rho, w)) + 0.5 * rho * u * u


def phase_energy_density(mix: MixtureEos, W) -> np.ndarray:
    """sum_i alpha_i rho_i (phi_i + u_i^2 / 2)."""
    alpha, c, rho, u, w, rho1, rho2, u1, u2 = _unpack(W)
    e1 = alpha * rho1 * (np.asarray(phase_potential(mix.phase1, rho1)) + 0.5 * u1 * u1)
    e2 = (1.0 - alpha) * rho2 * (np.asarray(phase_potential(mix.phase2, rho2)) + 0.5 * u2 * u2)
    return e1 + e2


def energy_flux(mix: MixtureEos, W) -> np.ndarray:
    """Per-phase flux alpha_i rho_i u_i (psi_i + u_i^2 / 2), shape (2, ...)."""
    alpha, c, rho, u, w, rho1, rho2, u1, u2 = _unpack(W)
    f1 = alpha * rho1 * u1 * (np.asarray(phase_psi(mix.phase1, rho1)) + 0.5 * u1 * u1)
    f2 = (1.0 - alpha) * rho2 * u2 * (np.asarray(phase_psi(mix.phase2, rho2)) + 0.5 * u2 * u2)
    return np.array([f1, f2])


# ---------------------------------------------------------------------
# Stiff source integration (implicit midpoint on w1, w2, w5)
# ---------------------------------------------------------------------

_ACTIVE = (0, 1, 4)


def _rhs(mix, relax, y, w3, w4) -> np.ndarray:
    W = np.array([y[0], y[1], w3, w4, y[2]])
    return source_vector(mix, relax, W)[list(_ACTIVE)]


def _sound_speed_sq(mix: MixtureEos, y, w3):
    alpha, c = y[0] / w3, y[1] / w3
    rho1, rho2 = c * w3 / alpha, (1.0 - c) * w3 / (1.0 - alpha)
    return c * np.asarray(phase_sound_speed_sq(mix.phase1, rho1)) + (1.0 - c) * np.asarray(
        phase_sound_speed_sq(mix.phase2, rho2))


def source_jacobian(mix: MixtureEos, relax: RelaxationParams, y, w3) -> np.ndarray:
    """d(xi_alpha, xi_c, xi_w)/d(w1, w2, w5) per cell, shape (n_cells, 3, 3)."""
    w1, w2, w = (np.asarray(r, dtype=float) for r in y)
    w3 = np.asarray(w3, dtype=float)
    rho1 = w2 * w3 / w1
    rho2 = (w3 - w2) * w3 / (w3 - w1)
    a1 = np.asarray(phase_sound_speed_sq(mix.phase1, rho1))
    a2 = np.asarray(phase_sound_speed_sq(mix.phase2, rho2))
    J = np.zeros((w1.size, 3, 3))
    if relax.enable_alpha:
        # xi_alpha = (p_1 - p_2) / tau_alpha
        J[:, 0, 0] = (-a1 * rho1 / w1 - a2 * rho2 / (w3 - w1)) / relax.tau_alpha
        J[:, 0, 1] = (a1 * rho1 / w2 + a2 * rho2 / (w3 - w2)) / relax.tau_alpha
    if relax.enable_c:
        # xi_c = -(rho / tau_c) (psi_1 - psi_2 + (1 - 2c) w^2 / 2)
        k = -w3 / relax.tau_c
        J[:, 1, 0] = k * (-a1 / w1 - a2 / (w3 - w1))
        J[:, 1, 1] = k * (a1 / w2 + a2 / (w3 - w2) - w * w / w3)
        J[:, 1, 2] = k * (1.0 - 2.0 * w2 / w3) * w
    if relax.enable_w:
        # xi_w = -zeta w2 (w3 - w2) w / w3^3
        J[:, 2, 1] = -relax.zeta * (w3 - 2.0 * w2) * w / w3 ** 3
        J[:, 2, 2] = -relax.zeta * w2 * (w3 - w2) / w3 ** 3
    return J


def _newton_scale(mix, y, w3) -> np.ndarray:
    sound = np.sqrt(np.asarray(_sound_speed_sq(mix, y, w3)))
    return np.array([w3, w3, np.maximum(np.abs(y[2]), sound)])


def _chord_matrix(J: np.ndarray, h: float, t: Optional[float]) -> np.ndarray:
    try:
        return np.linalg.inv(np.eye(3)[None, :, :] - 0.5 * h * J)
    except np.linalg.LinAlgError as e:
        raise StepFailure(f"singular implicit-midpoint matrix: {e}", time=t) from e


def _midpoint_substep(mix, relax, y, w3, w4, h, M_inv) -> Tuple[Optional[np.ndarray], Optional[int]]:
    """One implicit-midpoint sub-step by chord Newton with a fixed iteration matrix; (None, cell) on failure."""
    try:
        scale = _newton_scale(mix, y, w3)
        z = y.copy()
        for _ in range(MAX_NEWTON_ITERATIONS):
            G = z - y - 0.5 * h * _rhs(mix, relax, z, w3, w4)
            dz = -np.einsum("nij,jn->in", M_inv, G)
            z = z + dz
            if np.all(np.abs(dz) <= NEWTON_RTOL * scale):
                break
        else:
            worst = int(np.argmax(np.max(np.abs(dz) / scale, axis=0)))
            return None, worst
    except (DomainError, FloatingPointError):
        return None, None
    y_new = 2.0 * z - y
    ok = admissible(np.array([y_new[0], y_new[1], w3, w4, y_new[2]]))
    if not np.all(ok):
        return None, int(np.argmin(ok))
    return y_new, None


def integrate_sources(mix: MixtureEos, relax: RelaxationParams, W, dt: float, t: Optional[float] = None) -> np.ndarray:
    """Advance dW/dt = Xi(W) over dt with w3, w4 frozen.

    The chord matrix is reused across sub-steps. A failed sub-step first
    rebuilds it at the current state, and is halved only if that fails too.
    """
    W = np.array(W, dtype=float)
    if not relax.any_enabled or dt <= 0.0:
        return W
    squeeze = W.ndim == 1
    if squeeze:
        W = W[:, None]
    w3, w4 = W[2], W[3]
    y = W[list(_ACTIVE)]

    J = source_jacobian(mix, relax, y, w3)
    sigma = float(np.max(np.abs(np.linalg.eigvals(J))))
    n_sub = int(min(max(math.ceil(dt * sigma / SUBSTEP_TARGET), 1), MAX_SUBSTEPS))
    h = dt / n_sub
    M_inv = _chord_matrix(J, h, t)
    fresh = True

    remaining = dt
    halvings = 0
    while remaining > 0.0:
        if h > remaining:
            h = remaining
            M_inv = _chord_matrix(J, h, t)
        y_new, bad_cell = _midpoint_substep(mix, relax, y, w3, w4, h, M_inv)
        if y_new is None:
            if fresh:
                halvings += 1
                if halvings > MAX_HALVINGS:
                    raise StepFailure("source integration did not converge", time=t, cell=bad_cell)
                h *= 0.5
                log_debug("sources", f"halving sub-step to {h:.3e}")
            J = source_jacobian(mix, relax, y, w3)
            M_inv = _chord_matrix(J, h, t)
            fresh = True
            continue
        y = y_new
        fresh = False
        remaining = 0.0 if h == remaining else remaining - h

    W[list(_ACTIVE)] = y
    return W[:, 0] if squeeze else W


# ---------------------------------------------------------------------
# Finite-volume update
# ---------------------------------------------------------------------

def _padded(W: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    if bc is BoundaryCondition.PERIODIC:
        return np.concatenate([W[:, -1:], W, W[:, :1]], axis=1)
    return np.concatenate([W[:, :1], W, W[:, -1:]], axis=1)


def _face_fluxes(flux, speed, W: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Rusanov fluxes on the n_cells + 1 faces."""
    Wp = _padded(W, bc)
    F = flux(Wp)
    s = speed(Wp)
    s_face = np.maximum(s[:-1], s[1:])
    return 0.5 * (F[:, :-1] + F[:, 1:]) - 0.5 * s_face * (Wp[:, 1:] - Wp[:, :-1])


def _first_bad_cell(W: np.ndarray) -> Optional[int]:
    ok = admissible(W)
    if np.all(ok):
        return None
    return int(np.argmin(ok))


def diagnostics(mix: MixtureEos, W: np.ndarray, dx: float) -> Diagnostics:
    *_, rho1, rho2, _, _ = _unpack(W)
    dp = np.asarray(phase_pressure(mix.phase1, rho1)) - np.asarray(phase_pressure(mix.phase2, rho2))
    return Diagnostics(
        mass=float(dx * np.sum(W[2])),
        momentum=float(dx * np.sum(W[3])),
        energy=float(dx * np.sum(energy_density(mix, W))),
        max_dp=float(np.max(np.abs(dp))),
        max_w=float(np.max(np.abs(W[4]))),
    )


def make_snapshot(mix: MixtureEos, config: SimConfig, W: np.ndarray, t: float) -> FieldSnapshot:
    return FieldSnapshot(t=t, x=config.cell_centers(), dx=config.dx, cells=W, diagnostics=diagnostics(mix, W, config.dx))


def step(mix: MixtureEos, config: SimConfig, snapshot: FieldSnapshot, t_target: Optional[float] = None) -> FieldSnapshot:
    """One Strang-split step: half source, full Rusanov update, half source."""
    W = snapshot.cells
    dx = config.dx
    s_max = float(np.max(max_wave_speed(mix, W)))
    if not (s_max > 0 and math.isfinite(s_max)):
        raise StepFailure(f"invalid wave speed bound {s_max}", time=snapshot.t)
    dt = config.cfl * dx / s_max
    t_new = snapshot.t + dt
    if t_target is not None and t_new >= t_target:
        dt = t_target - snapshot.t
        t_new = t_target

    W = integrate_sources(mix, config.relax, W, 0.5 * dt, t=snapshot.t)
    faces = _face_fluxes(lambda V: conservative_flux(mix, V), lambda V: max_wave_speed(mix, V), W, config.bc)
    W = W - (dt / dx) * (faces[:, 1:] - faces[:, :-1])
    bad = _first_bad_cell(W)
    if bad is not None:
        raise StepFailure("inadmissible state after hyperbolic update", time=t_new, cell=bad)
    W = integrate_sources(mix, config.relax, W, 0.5 * dt, t=t_new)
    return make_snapshot(mix, config, W, t_new)


def total_energy(mix: MixtureEos, snapshot: FieldSnapshot) -> EnergyBudget:
    W = snapshot.cells
    flux = energy_flux(mix, W)
    return EnergyBudget(
        energy=float(snapshot.dx * np.sum(phase_energy_density(mix, W))),
        energy_mixture=float(snapshot.dx * np.sum(energy_density(mix, W))),
        face_flux=0.5 * (flux[:, :-1] + flux[:, 1:]),
    )


# ---------------------------------------------------------------------
# Initial data and drivers
# ---------------------------------------------------------------------

def initial_cells(mix: MixtureEos, config: SimConfig) -> np.ndarray:
    x = config.cell_centers()
    init = config.initial
    if isinstance(init, RiemannData):
        left = to_conserved_array(init.left)[:, None]
        right = to_conserved_array(init.right)[:, None]
        W = np.where(x[None, :] < init.x0, left, right)
    elif isinstance(init, SmoothData):
        prim = np.repeat(init.base.as_array()[:, None], config.n_cells, axis=1)
        length = config.domain[1] - config.domain[0]
        k = FIELD_NAMES.index(init.field)
        prim[k] = prim[k] + init.amplitude * np.sin(2.0 * np.pi * init.wavenumber * (x - config.domain[0]) / length)
        W = to_conserved_array(prim)
    else:
        W = np.repeat(to_conserved_array(init.state)[:, None], config.n_cells, axis=1)
    bad = _first_bad_cell(W)
    if bad is not None:
        raise ConfigError(f"initial data is inadmissible in cell {bad}")
    return np.array(W, dtype=float)


def iterate_snapshots(mix: MixtureEos, config: SimConfig, W0: Optional[np.ndarray] = None) -> Iterator[FieldSnapshot]:
    W = initial_cells(mix, config) if W0 is None else np.array(W0, dtype=float)
    snap = make_snapshot(mix, config, W, 0.0)
    yield snap
    n_steps = 0
    for t_out in config.output_times()[1:]:
        while snap.t < t_out:
            snap = step(mix, config, snap, t_target=t_out)
            n_steps += 1
            if n_steps > config.max_steps:
                raise StepFailure(f"exceeded {config.max_steps} steps", time=snap.t)
        log_debug("simulate", f"t={snap.t:.6g} after {n_steps} steps")
        yield snap


def run_simulation(
    mix: MixtureEos,
    config: SimConfig,
    on_output: Optional[Callable[[FieldSnapshot], None]] = None,
) -> List[FieldSnapshot]:
    snapshots: List[FieldSnapshot] = []
    for snap in iterate_snapshots(mix, config):
        if snapshots:
            previous = snapshots[-1].diagnostics.energy
            if snap.diagnostics.energy > previous + ENERGY_INCREASE_RTOL * abs(previous):
                log_warning("simulate", f"total energy increased at t={snap.t:.6g}: {previous:.15g} -> {snap.diagnostics.energy:.15g}")
        snapshots.append(snap)
        if on_output is not None:
            on_output(snap)
    log_info("simulate", f"reached t={snapshots[-1].t:.6g} with {len(snapshots)} outputs")
    return snapshots


def _euler_flux(spec: PhaseEosSpec, U: np.ndarray) -> np.ndarray:
    rho, m = U
    u = m / rho
    return np.array([rho * u, m * u + np.asarray(phase_pressure(spec, rho))])


def _euler_speed(spec: PhaseEosSpec, U: np.ndarray) -> np.ndarray:
    rho, m = U
    return np.abs(m / rho) + np.sqrt(np.asarray(phase_sound_speed_sq(spec, rho)))


def run_single_phase_reference(
    spec: PhaseEosSpec,
    config: SimConfig,
    U0: Optional[np.ndarray] = None,
) -> List[Tuple[float, np.ndarray]]:
    """Barotropic Euler (rho, rho u) with the same Rusanov update and output times."""
    if U0 is None:
        U0 = initial_cells(MixtureEos(spec, spec), config)[[2, 3]]
    U = np.array(U0, dtype=float)
    dx = config.dx
    t = 0.0
    out = [(t, U.copy())]
    for t_out in config.output_times()[1:]:
        while t < t_out:
            s_max = float(np.max(_euler_speed(spec, U)))
            dt = config.cfl * dx / s_max
            t_new = t + dt
            if t_new >= t_out:
                dt = t_out - t
                t_new = t_out
            faces = _face_fluxes(lambda V: _euler_flux(spec, V), lambda V: _euler_speed(spec, V), U, config.bc)
            U = U - (dt / dx) * (faces[:, 1:] - faces[:, :-1])
            if not np.all(U[0] > 0):
                raise StepFailure("negative density in single-phase reference", time=t_new, cell=int(np.argmin(U[0])))
            t = t_new
        out.append((t, U.copy()))
    return out


# ---------------------------------------------------------------------
# Config loading
# ---------------------------------------------------------------------

def parse_state_spec(mix: MixtureEos, data: Mapping, where: str) -> PrimitiveState:
    """Primitive mapping {alpha, c, rho, u, w} or mechanical equilibrium {p, alpha, u, w}."""
    if not isinstance(data, dict):
        raise ConfigError(f"'{where}' must be a mapping")
    try:
        if "p" in data:
            eq = make_mechanical_equilibrium(
                mix,
                get_float(data, "p", where=f"{where}."),
                get_float(data, "alpha", where=f"{where}."),
                get_float(data, "u", 0.0, f"{where}."),
            )
            return replace(eq, w=get_float(data, "w", 0.0, f"{where}."))
        return PrimitiveState(
            alpha=get_float(data, "alpha", where=f"{where}."),
            c=get_float(data, "c", where=f"{where}."),
            rho=get_float(data, "rho", where=f"{where}."),
            u=get_float(data, "u", 0.0, f"{where}."),
            w=get_float(data, "w", 0.0, f"{where}."),
        )
    except ValueError as e:
        raise ConfigError(f"'{where}': {e}") from e


def parse_initial(mix: MixtureEos, data: Mapping) -> InitialData:
    init = section(data, "initial")
    kind = init.get("kind")
    if kind == "riemann":
        return RiemannData(
            left=parse_state_spec(mix, init.get("left"), "initial.left"),
            right=parse_state_spec(mix, init.get("right"), "initial.right"),
            x0=get_float(init, "x0", where="initial."),
        )
    if kind == "smooth":
        field = init.get("field", "u")
        if field not in FIELD_NAMES:
            raise ConfigError(f"'initial.field' must be one of {FIELD_NAMES}, got {field!r}")
        return SmoothData(
            base=parse_state_spec(mix, init.get("base"), "initial.base"),
            field=field,
            amplitude=get_float(init, "amplitude", 0.01, "initial."),
            wavenumber=get_int(init, "wavenumber", 1, "initial."),
        )
    if kind == "uniform":
        return UniformData(state=parse_state_spec(mix, init.get("state"), "initial.state"))
    raise ConfigError(f"'initial.kind' must be riemann, smooth or uniform, got {kind!r}")


def calibrated_mixture(data: Mapping) -> MixtureEos:
    """eos.phase1/phase2, shifted by calibrate_offsets when eos.calibrate_pressure is set."""
    mix = parse_mixture(data)
    eos = section(data, "eos")
    if eos.get("calibrate_pressure") is not None:
        try:
            mix = calibrate_offsets(mix, get_float(eos, "calibrate_pressure", where="eos."))
        except DomainError as e:
            raise ConfigError(f"eos.calibrate_pressure: {e}") from e
    return mix


def sim_config_from_mapping(mix: MixtureEos, data: Mapping) -> SimConfig:
    grid = section(data, "grid")
    time = section(data, "time")
    bc = data.get("bc", BoundaryCondition.PERIODIC.value)
    try:
        bc = BoundaryCondition(bc)
    except ValueError as e:
        raise ConfigError(f"'bc' must be periodic or transmissive, got {bc!r}") from e
    output_every = time.get("output_every")
    return SimConfig(
        n_cells=get_int(grid, "n_cells", where="grid."),
        domain=get_range(grid, "domain", (0.0, 1.0), "grid."),
        cfl=get_float(time, "cfl", 0.9, "time."),
        t_end=get_float(time, "t_end", where="time."),
        bc=bc,
        relax=parse_relax(data),
        initial=parse_initial(mix, data),
        output_every=None if output_every is None else get_float(time, "output_every", where="time."),
        max_steps=get_int(time, "max_steps", DEFAULT_MAX_STEPS, "time."),
    )


def load_sim_config(path) -> Tuple[MixtureEos, SimConfig]:
    data = load_yaml(path)
    mix = calibrated_mixture(data)
    return mix, sim_config_from_mapping(mix, data)


# ---------------------------------------------------------------------
# CSV rows
# ---------------------------------------------------------------------

def snapshot_rows(mix: MixtureEos, snapshot: FieldSnapshot) -> List[dict]:
    W = snapshot.cells
    alpha, c, rho, u, w, rho1, rho2, _, _ = _unpack(W)
    p1 = np.asarray(phase_pressure(mix.phase1, rho1))
    p2 = np.asarray(phase_pressure(mix.phase2, rho2))
    E = energy_density(mix, W)
    columns = (alpha, c, rho, u, w, p1, p2, E)
    rows = []
    for j, xj in enumerate(snapshot.x):
        row = {"t": snapshot.t, "x": float(xj)}
        row.update({name: float(col[j]) for name, col in zip(SNAPSHOT_HEADER[2:], columns)})
        rows.append(row)
    return rows


def diagnostics_row(snapshot: FieldSnapshot) -> dict:
    d = snapshot.diagnostics
    return {"t": snapshot.t, "mass": d.mass, "momentum": d.momentum, "energy": d.energy,
            "max_dp": d.max_dp, "max_w": d.max_w}
