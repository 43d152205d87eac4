"""Vectorized adaptive Gauss-Kronrod (7/15) quadrature on panels.

The bath integrands are cheap numpy expressions but oscillate with
frequency ``t`` in omega, so the integrator works on many panels at once:
every sweep evaluates the 15-point Kronrod rule and the embedded 7-point
Gauss rule on all live panels in a single vectorized call, then bisects
the panels that carry too much of the error budget.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import QuadratureError

_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 from each end).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]


def _rule(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    kron = half * (y @ KRONROD_WEIGHTS)
    gauss = half * (y @ GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-15,
    panels: int = 1,
    max_panels: int = 200_000,
) -> tuple[float, float]:
    """Integrate a vectorized real function over ``[a, b]``.

    ``f`` receives a 1-D array of abscissae and must return values of the
    same shape. ``panels`` sets the initial uniform split, which should
    resolve the oscillation period of the integrand.

    Returns ``(value, error_estimate)``; the estimate is the sum of the
    per-panel Gauss/Kronrod differences, which is very conservative for
    smooth integrands. Raises QuadratureError when the panel budget runs
    out before ``error <= max(atol, rtol * |value|)``.
    """
    if b < a:
        raise ValueError("integration limits must satisfy a <= b")
    if b == a:
        return 0.0, 0.0
    edges = np.linspace(a, b, max(int(panels), 1) + 1)
    lo, hi = edges[:-1], edges[1:]
    done_value = 0.0
    done_error = 0.0
    length = b - a
    while True:
        values, errors = _rule(f, lo, hi)
        total = done_value + values.sum()
        total_err = done_error + errors.sum()
        tol = max(atol, rtol * abs(total))
        if total_err <= tol:
            return float(total), float(total_err)
        # Each panel may keep its share of the budget, proportional to width.
        share = tol * (hi - lo) / length
        bad = errors > share
        if not bad.any():
            bad = errors >= errors.max()
        n_live = lo.size + bad.sum()
        if n_live > max_panels or np.any((hi - lo)[bad] <= 4 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)):
            raise QuadratureError(
                f"quadrature did not converge on [{a}, {b}]: "
                f"error estimate {total_err:.3e} > tolerance {tol:.3e}",
                achieved=total_err,
            )
        done_value += values[~bad].sum()
        done_error += errors[~bad].sum()
        mid = 0.5 * (lo[bad] + hi[bad])
        lo = np.concatenate([lo[bad], mid])
        hi = np.concatenate([mid, hi[bad]])


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, order: int = 8) -> float:
    """Fixed-order Gauss-Legendre rule; used on tiny intervals with smooth integrands."""
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return float(half * np.dot(w, f(0.5 * (a + b) + half * x)))
