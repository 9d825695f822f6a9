"""Split quadrature for integrals against the jump weight |h|^(-1-beta).

Every non-local operator here reduces to one-sided integrals

    I = int_0^inf F(h) h^(-1-beta) dh,       0 < beta < 2,

where F vanishes at least quadratically at h = 0. The integral is split into
an inner disc handled by Gauss-Jacobi quadrature on the desingularized
integrand F(h)/h^2, a middle zone of cell-wise Gauss panels, and an analytic
far tail evaluated under the integrand's declared model via a power
substitution. Each piece carries an error estimate from order halving.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import roots_jacobi


class QuadResult(NamedTuple):
    """Value with an error estimate; diverged flags non-finite integrands."""

    value: float
    error: float
    diverged: bool = False

    def __add__(self, other):
        if isinstance(other, QuadResult):
            return QuadResult(self.value + other.value, self.error + other.error,
                              self.diverged or other.diverged)
        return NotImplemented

    def scaled(self, a: float) -> "QuadResult":
        return QuadResult(a * self.value, abs(a) * self.error, self.diverged)


@lru_cache(maxsize=64)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


@lru_cache(maxsize=64)
def _jacobi(order: int, one_minus_beta: float):
    # weight (1+x)^(1-beta) on [-1, 1]; valid for beta < 2
    return roots_jacobi(order, 0.0, one_minus_beta)


def _inner_jacobi(F2: Callable, beta: float, delta: float, order: int) -> float:
    x, w = _jacobi(order, 1.0 - beta)
    h = delta * (x + 1.0) / 2.0
    return (delta / 2.0) ** (2.0 - beta) * float(np.dot(w, F2(h)))


def _cells(F: Callable, beta: float, lo: np.ndarray, hi: np.ndarray,
           order: int) -> float:
    if len(lo) == 0:
        return 0.0
    x, w = _leggauss(order)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    H = mid[:, None] + half[:, None] * x[None, :]
    vals = F(H.ravel()).reshape(H.shape)
    integ = vals * H ** (-1.0 - beta)
    return float(np.dot(integ @ w, half))


def _mid_panels(F: Callable, beta: float, edges: np.ndarray,
                order_near: int, order_far: int, near_cells: int) -> float:
    lo, hi = edges[:-1], edges[1:]
    k = min(near_cells, len(lo))
    return (_cells(F, beta, lo[:k], hi[:k], order_near)
            + _cells(F, beta, lo[k:], hi[k:], order_far))


def tail_weighted(F: Callable, R: float, beta: float,
                  panels: int = 48, order: int = 8) -> tuple[float, float]:
    """int_R^inf F(h) h^(-1-beta) dh for F following its far-field model.

    Substituting v = (R/h)^beta maps the tail to (R^-beta/beta) int_0^1
    F(R v^(-1/beta)) dv, integrated on geometrically refined panels toward
    v = 0 so logarithmically growing F converges cleanly.
    """
    x, w = _leggauss(order)
    v_hi = 2.0 ** -np.arange(panels)
    v_lo = v_hi / 2.0
    mid = 0.5 * (v_lo + v_hi)
    half = 0.5 * (v_hi - v_lo)
    V = mid[:, None] + half[:, None] * x[None, :]
    H = R * V ** (-1.0 / beta)
    vals = F(H.ravel()).reshape(H.shape)
    body = float(np.dot(vals @ w, half))
    # remainder below the last panel: F grows at most logarithmically there
    v_min = v_lo[-1]
    f_last = float(np.mean(vals[-1]))
    rem = abs(f_last) * v_min
    return (R ** -beta / beta) * body, (R ** -beta / beta) * rem


def weighted_singular(F: Callable, F2: Callable, beta: float, delta: float,
                      edges: Sequence[float], *, prefactor: float = 1.0,
                      tail: Callable | None = None,
                      inner_order: int = 12, gauss_order: int = 8,
                      far_order: int = 4, near_cells: int = 32,
                      tail_panels: int = 48) -> QuadResult:
    """Assemble int_0^inf F(h) h^(-1-beta) dh times prefactor.

    F     integrand numerator on [delta, infinity), vectorized
    F2    F(h)/h^2, stable as h -> 0 (used on the inner disc)
    tail  model integrand beyond edges[-1]; defaults to F itself, which is
          correct whenever F already applies the declared far-field rule
    """
    edges = np.asarray(edges, dtype=float)
    if edges[0] != delta:
        raise ValueError("edges must start at delta")
    tail_fn = tail if tail is not None else F

    inner = _inner_jacobi(F2, beta, delta, inner_order)
    inner_lo = _inner_jacobi(F2, beta, delta, max(4, inner_order - 4))
    mid = _mid_panels(F, beta, edges, gauss_order, far_order, near_cells)
    mid_lo = _mid_panels(F, beta, edges, max(4, gauss_order // 2),
                         max(2, far_order // 2), near_cells)
    tl, tl_rem = tail_weighted(tail_fn, float(edges[-1]), beta,
                               panels=tail_panels, order=8)
    tl_lo, _ = tail_weighted(tail_fn, float(edges[-1]), beta,
                             panels=tail_panels, order=4)

    pieces = np.array([inner, mid, tl])
    diverged = not np.all(np.isfinite(pieces))
    value = float(np.nansum(np.where(np.isfinite(pieces), pieces, 0.0)))
    err = (abs(inner - inner_lo) + abs(mid - mid_lo) + abs(tl - tl_lo) + tl_rem
           + 1e-15 * abs(value))
    if diverged:
        err = float("inf")
    return QuadResult(prefactor * value, abs(prefactor) * err, diverged)


def grid_cell_edges(delta: float, spacing: float, cutoff: float,
                    exact_cells: int = 128, growth: float = 1.06,
                    max_width: float | None = None) -> np.ndarray:
    """Panel edges from delta to cutoff.

    One panel per grid cell near the singularity (where the weight varies
    fastest), then geometrically widening panels so that wide grids do not
    cost one Gauss rule per cell; widths are capped at cutoff/16 unless the
    caller passes a tighter max_width (oscillatory fields need panels that
    resolve the oscillation period out to the cutoff).
    """
    if cutoff <= delta:
        return np.array([delta, max(cutoff, delta * (1 + 1e-12))])
    edges = [delta]
    w = spacing
    k = 0
    w_cap = max(cutoff / 16.0, spacing)
    if max_width is not None:
        w_cap = max(min(w_cap, max_width), spacing)
    while edges[-1] < cutoff:
        if k >= exact_cells:
            w = min(w * growth, w_cap)
        edges.append(min(edges[-1] + w, cutoff))
        k += 1
    return np.asarray(edges)


def log_panel_edges(delta: float, R: float, per_decade: int = 24,
                    refine_center: float | None = None,
                    refine_halfwidth: float = 3.0,
                    refine_step: float = 0.125) -> np.ndarray:
    """Log-spaced panel edges on [delta, R], linearly refined near a feature.

    Used for smooth radial integrands whose only structure away from the
    origin sits near |h| = refine_center (an argument sign change).
    """
    n = max(2, int(np.ceil(per_decade * np.log10(R / delta))))
    edges = np.geomspace(delta, R, n + 1)
    if refine_center is not None and refine_center > 0:
        lo = max(delta, refine_center - refine_halfwidth)
        hi = min(R, refine_center + refine_halfwidth)
        if hi > lo:
            k = int(np.ceil((hi - lo) / refine_step))
            extra = np.linspace(lo, hi, k + 1)
            edges = np.unique(np.concatenate([edges, extra]))
    return edges


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       tol: float = 1e-3, max_iter: int = 200) -> tuple[float, float]:
    """Locate the maximum of a unimodal f on [a, b].

    Returns (x_star, f(x_star)). Iteration count follows from the bracket
    contraction rate log(tol/(b-a)) / log(invphi).
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    invphi2 = (3.0 - np.sqrt(5.0)) / 2.0
    h = b - a
    if h <= tol:
        xm = 0.5 * (a + b)
        return xm, f(xm)
    c, d = a + invphi2 * h, a + invphi * h
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if h <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = f(d)
    return (c, fc) if fc > fd else (d, fd)
