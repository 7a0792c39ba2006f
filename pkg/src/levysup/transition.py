"""Free transition densities ``p_t(x)`` and the symmetrised density at zero."""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi, sqrt
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .numerics import panel_rule, trapezoid
from .processes import BROWNIAN, SMD, STABLE, ProcessSpec, UnsupportedClassification

CLOSED_FORM = "closed_form"
FOURIER = "fourier_inversion"
MONTE_CARLO = "monte_carlo"


class AccuracyError(RuntimeError):
    """Raised when a numerical error estimate exceeds the requested tolerance."""


@dataclass
class DensityCurve:
    """A density tabulated on an ascending grid.

    Attributes
    ----------
    grid : ndarray
        Abscissae.
    values : ndarray
        Density values.
    method : str
        ``closed_form``, ``fourier_inversion`` or ``monte_carlo``.
    stderr : ndarray, optional
        Per-point statistical standard error (Monte Carlo curves).
    abs_err : ndarray, optional
        Per-point numerical error estimate.
    """

    grid: np.ndarray
    values: np.ndarray
    method: str
    stderr: Optional[np.ndarray] = None
    abs_err: Optional[np.ndarray] = None

    def mass(self) -> float:
        return trapezoid(self.values, self.grid)

    def error(self) -> np.ndarray:
        """Combined one-sigma error (statistical and numerical)."""
        e = np.zeros_like(np.asarray(self.values, dtype=float))
        if self.stderr is not None:
            e = e + np.asarray(self.stderr) ** 2
        if self.abs_err is not None:
            e = e + np.asarray(self.abs_err) ** 2
        return np.sqrt(e)


def _gauss(x, m, v):
    return np.exp(-0.5 * (x - m) ** 2 / v) / np.sqrt(2 * pi * v)


def _levy_density(y, a):
    """Density of the one-sided stable(1/2) law with ``E e^{-lam S} = e^{-a sqrt(2 lam)}``."""
    y = np.asarray(y, dtype=float)
    out = np.zeros(y.shape)
    pos = y > 0
    yp = y[pos]
    out[pos] = a / sqrt(2 * pi) * yp ** -1.5 * np.exp(-a * a / (2 * yp))
    return out


def _has_closed_form(spec: ProcessSpec) -> bool:
    return spec.kind == BROWNIAN or spec.is_cauchy or (spec.kind == SMD and spec.alpha == 0.5)


def _closed_form(spec: ProcessSpec, t: float, x: np.ndarray) -> np.ndarray:
    if spec.kind == BROWNIAN:
        return _gauss(x, spec.mu * t, spec.sigma ** 2 * t)
    if spec.is_cauchy:
        ct = spec.scale * t
        return ct / (pi * (ct * ct + x * x))
    # one-sided 1/2-stable: k = c^{1/2} sqrt(2) so a = sqrt(c) t
    a = sqrt(spec.scale) * t
    bt = spec.drift_b * t
    if spec.negated:
        return _levy_density(bt - x, a)
    return _levy_density(x + bt, a)


def _re_coef(spec: ProcessSpec) -> float:
    """``A`` with ``Re Psi(xi) = A |xi|^alpha`` for the stable-type families."""
    return spec.scale ** spec.alpha


def _phase_coef(spec: ProcessSpec) -> float:
    """Bound on ``|Im Psi(xi)| / |xi|^alpha`` excluding linear drift."""
    a = spec.alpha
    if spec.kind == STABLE:
        if a == 1.0:
            return 0.0 if spec.beta == 0.0 else np.inf
        return spec.scale ** a * abs(spec.beta * np.tan(pi * a / 2))
    return spec.scale ** a * np.tan(pi * a / 2)


def _fourier(spec: ProcessSpec, t: float, x: np.ndarray, order: int):
    """Inversion ``p_t(x) = pi^{-1} int_0^Xi Re exp(-i xi x - t Psi(xi)) dxi``."""
    if spec.kind == STABLE and spec.alpha == 1.0 and spec.beta != 0.0:
        raise UnsupportedClassification("asymmetric alpha = 1 densities are not supported")
    a = spec.alpha
    A = _re_coef(spec)
    tA = t * A
    xi_s = tA ** (-1.0 / a)
    big = 28.0
    xi_max = (big / tA) ** (1.0 / a)
    # geometric panels up to xi_s resolve the |xi|^a cusp at 0
    lo = 1e-9 * xi_s
    geo = np.geomspace(lo, xi_s, 28)
    drift = spec.drift_b * t if spec.kind == SMD else 0.0
    xm = float(np.max(np.abs(x))) if x.size else 0.0
    pc = _phase_coef(spec) * t

    def level(xi):
        return 2.0 * xi / xi_s + ((xm + drift) * xi + pc * xi ** a) / pi

    dense = np.linspace(xi_s, xi_max, 4096)
    g = level(dense)
    n_pan = int(np.ceil(g[-1] - g[0])) + 2
    edges_hi = np.interp(np.linspace(g[0], g[-1], n_pan + 1), g, dense)
    # below xi_s the panels must also resolve the oscillation of exp(-i xi x)
    n_osc = int(np.ceil(((xm + drift) * xi_s + pc * xi_s ** a) / pi))
    low = np.union1d(geo, np.linspace(0.0, xi_s, n_osc + 1)[1:]) if n_osc > 1 else geo
    edges = np.concatenate([[0.0], low, edges_hi[1:]])
    nodes, weights = panel_rule(edges, order)
    psi = char_exponent_array(spec, nodes)
    damp = np.exp(-t * psi)
    vals = np.empty(x.shape)
    rows = max(1, (1 << 21) // nodes.size)
    for i in range(0, x.size, rows):
        phase = np.exp(-1j * np.outer(x[i:i + rows], nodes))
        vals[i:i + rows] = np.real(phase * damp[None, :]) @ weights / pi
    trunc = special.gammaincc(1.0 / a, big) * gamma(1.0 / a) / (a * pi) * tA ** (-1.0 / a)
    return vals, trunc


def char_exponent_array(spec: ProcessSpec, xi: np.ndarray) -> np.ndarray:
    from .processes import char_exponent
    return np.asarray(char_exponent(spec, xi), dtype=complex)


def pdf_with_error(spec: ProcessSpec, t: float, x, method: Optional[str] = None):
    """Transition density with an absolute-error estimate.

    Parameters
    ----------
    spec : ProcessSpec
    t : float
        Time, ``t > 0``.
    x : float or array_like
    method : {None, "closed_form", "fourier_inversion"}
        Force a method; by default closed forms are used when available.

    Returns
    -------
    values, abs_err : ndarray
    method : str
    """
    if t <= 0:
        raise ValueError("t must be positive")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if method is None:
        method = CLOSED_FORM if _has_closed_form(spec) else FOURIER
    if method == CLOSED_FORM:
        if not _has_closed_form(spec):
            raise ValueError(f"no closed form for {spec.label()}")
        v = _closed_form(spec, t, xa)
        return v, np.full(v.shape, 1e-15 * max(1.0, float(np.max(v, initial=0.0)))), CLOSED_FORM
    if spec.kind == BROWNIAN:
        raise ValueError("Brownian densities use the closed form")
    fine = np.empty(xa.shape)
    err = np.empty(xa.shape)
    order = np.argsort(np.abs(xa))
    for i in range(0, xa.size, 128):
        idx = order[i:i + 128]
        c, _ = _fourier(spec, t, xa[idx], 12)
        f, trunc = _fourier(spec, t, xa[idx], 24)
        fine[idx] = f
        err[idx] = np.abs(f - c) + trunc + 1e-15
    return np.maximum(fine, 0.0), err, FOURIER


def pdf(spec: ProcessSpec, t: float, x, tol: Optional[float] = None):
    """Transition density ``p_t(x)``.

    Raises
    ------
    AccuracyError
        If ``tol`` is given and the error estimate exceeds it.
    """
    v, e, _ = pdf_with_error(spec, t, x)
    if tol is not None and np.any(e > tol):
        raise AccuracyError(f"accuracy not reached: error {float(np.max(e)):.2e} > tol {tol:.2e}")
    if np.ndim(x) == 0:
        return float(v[0])
    return v


def density_curve(spec: ProcessSpec, t: float, grid: Sequence[float]) -> DensityCurve:
    g = np.asarray(grid, dtype=float)
    v, e, m = pdf_with_error(spec, t, g)
    return DensityCurve(g, v, m, abs_err=e)


def sym_pdf_at_zero(spec: ProcessSpec, t):
    """``p_t^S(0)``: density at 0 of ``X_t - X'_t`` for an independent copy."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    if spec.kind == BROWNIAN:
        out = 1.0 / np.sqrt(4 * pi * spec.sigma ** 2 * t)
    else:
        a = spec.alpha
        out = gamma(1 + 1 / a) / (pi * (2 * t * _re_coef(spec)) ** (1 / a))
    return float(out) if out.ndim == 0 else out


def abs_cf_integral(spec: ProcessSpec, t):
    """``(2 pi)^{-1} int |exp(-t Psi)| dxi``, the uniform bound on ``p_t``."""
    return sym_pdf_at_zero(spec, np.asarray(t, dtype=float) / 2.0)


def pdf_at_zero_curve(spec: ProcessSpec, ts: Sequence[float]) -> DensityCurve:
    """``p_t(0)`` along a time grid."""
    ts = np.asarray(ts, dtype=float)
    vals = np.empty(ts.shape)
    errs = np.empty(ts.shape)
    method = CLOSED_FORM
    for i, t in enumerate(ts):
        v, e, method = pdf_with_error(spec, float(t), 0.0)
        vals[i], errs[i] = v[0], e[0]
    return DensityCurve(ts, vals, method, abs_err=errs)
