"""
fd_module.py
Finite-difference oracles: derivatives, gradients, Jacobians, directional
derivatives and Hessians of plain numpy functions.

The fourth-order stencils shrink their step by 10x until every stencil point
is admissible (at most MAX_SHRINKS times), otherwise DomainError.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from errors_module import DomainError

# --- Constants ---
EOS_REL_STEP = 1e-6
EOS_MIN_STEP = 1e-8
REL_STEP = 1e-3
HESSIAN_REL_STEP = 2e-3
MAX_SHRINKS = 8

_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FIRST = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_SECOND = np.array([-1.0, 16.0, 16.0, -1.0]) / 12.0
_SECOND_CENTER = -30.0 / 12.0

Admissible = Optional[Callable[[np.ndarray], bool]]


def eos_step(x: float) -> float:
    return max(EOS_REL_STEP * abs(x), EOS_MIN_STEP)


def central_derivative(f: Callable[[float], float], x: float, h: Optional[float] = None) -> float:
    """Second-order central difference, h = max(1e-6 |x|, 1e-8) by default."""
    h = eos_step(x) if h is None else h
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _scales(x: np.ndarray, scale) -> np.ndarray:
    if scale is not None:
        return np.broadcast_to(np.asarray(scale, dtype=float), x.shape).copy()
    return np.where(np.abs(x) > 0, np.abs(x), 1.0)


def _try(f, points: Sequence[np.ndarray], admissible: Admissible):
    values = []
    for p in points:
        if admissible is not None and not admissible(p):
            return None
        try:
            values.append(np.asarray(f(p), dtype=float))
        except DomainError:
            return None
    return values


def _with_shrinking(build, f, admissible: Admissible, what: str):
    """build(factor) → (points, combine); factor = 10^-k on the k-th shrink."""
    for k in range(MAX_SHRINKS + 1):
        points, combine = build(10.0 ** (-k))
        values = _try(f, points, admissible)
        if values is not None:
            return combine(values)
    raise DomainError(f"{what}: no admissible finite-difference stencil after {MAX_SHRINKS} shrinks")


def directional_derivative(f, x, d, rel_step: float = REL_STEP, admissible: Admissible = None,
                           h: Optional[float] = None):
    """Fourth-order derivative of f at x along d; h overrides the step along d."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    d_norm = np.max(np.abs(d))
    if d_norm == 0:
        return np.zeros_like(np.asarray(f(x), dtype=float))
    base = rel_step * max(np.max(np.abs(x)), 1.0) / d_norm if h is None else h

    def build(factor):
        h = base * factor
        points = [x + o * h * d for o in _OFFSETS]
        return points, lambda vals: sum(w * v for w, v in zip(_FIRST, vals)) / h

    return _with_shrinking(build, f, admissible, "directional derivative")


def gradient(f, x, rel_step: float = REL_STEP, scale=None, admissible: Admissible = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return jacobian(lambda y: np.atleast_1d(f(y)), x, rel_step, scale, admissible)[0]


def jacobian(F, x, rel_step: float = REL_STEP, scale=None, admissible: Admissible = None) -> np.ndarray:
    """Column-by-column fourth-order Jacobian of a vector map."""
    x = np.asarray(x, dtype=float)
    steps = rel_step * _scales(x, scale)
    columns = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = 1.0

        def build(factor, j=j, e=e):
            h = steps[j] * factor
            points = [x + o * h * e for o in _OFFSETS]
            return points, lambda vals: sum(w * v for w, v in zip(_FIRST, vals)) / h

        columns.append(np.atleast_1d(_with_shrinking(build, F, admissible, f"jacobian column {j}")))
    return np.column_stack(columns)


def hessian(f, x, rel_step: float = HESSIAN_REL_STEP, scale=None, admissible: Admissible = None) -> np.ndarray:
    """Fourth-order Hessian: 5-point diagonal, tensor-product 4x4 mixed stencils."""
    x = np.asarray(x, dtype=float)
    n = x.size
    steps = rel_step * _scales(x, scale)
    H = np.zeros((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = 1.0

        def build_diag(factor, ei=ei, i=i):
            h = steps[i] * factor
            points = [x] + [x + o * h * ei for o in _OFFSETS]

            def combine(vals):
                return (_SECOND_CENTER * vals[0] + sum(w * v for w, v in zip(_SECOND, vals[1:]))) / (h * h)

            return points, combine

        H[i, i] = float(_with_shrinking(build_diag, f, admissible, f"hessian entry ({i},{i})"))
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = 1.0

            def build_mixed(factor, ei=ei, ej=ej, i=i, j=j):
                hi = steps[i] * factor
                hj = steps[j] * factor
                points = [x + a * hi * ei + b * hj * ej for a in _OFFSETS for b in _OFFSETS]
                weights = np.outer(_FIRST, _FIRST).ravel()

                def combine(vals):
                    return sum(w * v for w, v in zip(weights, vals)) / (hi * hj)

                return points, combine

            H[i, j] = H[j, i] = float(_with_shrinking(build_mixed, f, admissible, f"hessian entry ({i},{j})"))
    return H
