"""Law of the running supremum ``Xbar_t = sup_{s <= t} X_s``.

The law is

    P(Xbar_t in dx) = d* n(t < zeta) delta_0(dx) + f_t(x) dx,
    f_t(x) = int_0^t n(t - s < zeta) q*_s(x) ds + d q*_t(x),

with the normalisation of :mod:`levysup.ladder` and the entrance laws of
:mod:`levysup.entrance`.  The time integral is split at ``t/2``: on
``(0, t/2]`` the variable is ``v = log(t / 2s)`` (the integrand vanishes
fast as ``s -> 0``), on ``[t/2, t)`` it is ``w`` with ``t - s = (t/2) w^p``,
which removes the ``(t - s)^{-rho}`` endpoint singularity of the excursion
tail.  Both parts use composite Gauss-Legendre rules; the quadrature error is
the change under doubling of the order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import log, sqrt
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import special

from .entrance import (DEFAULT_CONFIG, DensityEstimate, EntranceConfig, EntranceLaw, kde4,
                       entrance_law, subordinator_entrance)
from .ladder import ladder_functions
from .numerics import gauss_legendre, silverman_bandwidth, trapezoid
from .processes import BROWNIAN, SMD, STABLE, ProcessSpec
from .sampling import (batch_generators, batch_mean_stderr, increments, map_batches,
                       resolve_seed, split_counts, subordinator_increments)
from .transition import CLOSED_FORM, MONTE_CARLO, DensityCurve


class ErrorBudgetExceeded(RuntimeError):
    """Raised when the combined error of a supremum density exceeds the tolerance."""


@dataclass
class SupLawResult:
    """Supremum law at one time.

    Attributes
    ----------
    t : float
    density : DensityCurve
        ``f_t`` on the requested grid, with ``stderr`` (entrance-law Monte
        Carlo) and ``abs_err`` (quadrature) when applicable.
    atom_mass : float
        ``P(Xbar_t = 0) = d* n(t < zeta)``.
    total_mass_check : float
        ``int f_t + atom``, integrated in ``x`` exactly through the masses of
        the entrance law (so it does not depend on the grid).
    mass_stderr : float
    grid_mass : float
        Trapezoid mass of ``density`` on its grid plus the atom.
    drift_term : ndarray
        The ``d q*_t(x)`` contribution (zero unless ``d > 0``).
    include_drift_term : bool
    """

    t: float
    density: DensityCurve
    atom_mass: float
    total_mass_check: float
    mass_stderr: float = 0.0
    grid_mass: float = float("nan")
    drift_term: Optional[np.ndarray] = None
    include_drift_term: bool = True
    notes: Dict[str, float] = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.density.values


# ----------------------------------------------------------------------
def _grading_power(spec: ProcessSpec) -> float:
    """Power ``p`` in ``t - s = (t/2) w^p`` matched to ``n(u) ~ u^{-r}``."""
    lf = ladder_functions(spec)
    if spec.kind == STABLE:
        return 1.0 / (1.0 - lf.rho)
    if spec.kind == SMD and spec.negated:
        return 1.0 / (1.0 - spec.alpha)
    return 2.0


def time_rule(t: float, p: float, order: int = 8, v_max: float = 36.0,
              n_hi: int = 8, gaps: bool = False):
    """Nodes and weights for ``int_0^t g(s) ds`` as described in the module doc.

    Returns
    -------
    s, w : ndarray
        Nodes in ``(0, t]`` and weights.
    s_min : float
        Lower cut ``(t/2) exp(-v_max)``.
    u : ndarray
        Only with ``gaps``: ``t - s`` computed without cancellation.  For
        large ``p`` the nodes nearest ``t`` round to ``t`` in floating point
        while their gaps stay resolved, so integrands singular at ``s = t``
        must be evaluated on ``u``.
    """
    x, wx = gauss_legendre(order)
    v_edges = np.arange(0.0, v_max + 0.5)
    v = (v_edges[:-1, None] + x[None, :]).ravel()
    wv = np.tile(wx, v_edges.size - 1)
    s_lo = 0.5 * t * np.exp(-v)
    w_lo = s_lo * wv
    w_edges = np.linspace(0.0, 1.0, n_hi + 1)
    a, b = w_edges[:-1, None], w_edges[1:, None]
    ww = (a + (b - a) * x[None, :]).ravel()
    www = ((b - a) * wx[None, :]).ravel()
    s_hi = t - 0.5 * t * ww ** p
    w_hi = 0.5 * t * p * ww ** (p - 1) * www
    s = np.concatenate([s_lo[::-1], s_hi[::-1]])
    w = np.concatenate([w_lo[::-1], w_hi[::-1]])
    s_min = 0.5 * t * np.exp(-v_max)
    if gaps:
        u = np.concatenate([(t - s_lo)[::-1], (0.5 * t * ww ** p)[::-1]])
        return s, w, s_min, u
    return s, w, s_min


def _law_for(spec: ProcessSpec, nodes, config, seed, workers, entrance):
    if entrance is not None:
        return entrance
    if spec.kind == SMD and not spec.negated:
        cfg = config or DEFAULT_CONFIG
        return subordinator_entrance(spec, nodes, cfg.smd_paths, cfg.n_batches, seed, workers)
    return entrance_law(spec, config, seed, workers)


def sup_density(spec: ProcessSpec, t: float, xs, *, config: Optional[EntranceConfig] = None,
                seed: Optional[int] = None, workers: int = 1,
                entrance: Optional[EntranceLaw] = None, order: int = 8,
                include_drift_term: bool = True, tol: Optional[float] = None) -> SupLawResult:
    """Density ``f_t`` of the supremum on a positive grid, with atom and mass check.

    Parameters
    ----------
    spec : ProcessSpec
    t : float
    xs : array_like
        Positive evaluation points.
    config, seed, workers
        Entrance-law Monte Carlo settings (ignored for closed forms).
    entrance : EntranceLaw, optional
        Precomputed provider of ``q*_s``.
    order : int
        Gauss-Legendre order per panel; the error estimate uses ``2 * order``.
    include_drift_term : bool
        Add ``d q*_t(x)``.  Turning it off is an ablation: for ``d > 0`` the
        mass check then falls short by ``d n*(t < zeta)``.
    tol : float, optional
        Raise :class:`ErrorBudgetExceeded` if the combined error exceeds it.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if t <= 0:
        raise ValueError("t must be positive")
    if np.any(xs <= 0):
        raise ValueError("sup_density needs positive x")
    lf = ladder_functions(spec)
    p = _grading_power(spec)
    rules = [time_rule(t, p, order, gaps=True), time_rule(t, p, 2 * order, gaps=True)]
    all_nodes = np.concatenate([rules[0][0], rules[1][0], [t, rules[0][2]]])
    law = _law_for(spec, all_nodes, config, seed, workers, entrance)

    results = []
    for s, w, s_min, u in rules:
        nw = w * np.asarray(lf.n_tail(u))
        reps = law.q_star_batches(s[:, None], xs[None, :])
        if reps is None:
            vals = np.asarray(law.q_star(s[:, None], xs[None, :]))[None]
        else:
            vals = reps
        f_b = np.einsum("s,bsx->bx", nw, vals)
        # remainder below the cut: integrand at s_min times s_min
        g_min = np.asarray(law.q_star(np.full(xs.shape, s_min), xs)) * lf.n_tail(t - s_min)
        results.append((f_b, s_min * np.abs(g_min)))
    f_coarse = results[0][0].mean(axis=0)
    f_b, remainder = results[1]
    drift = np.zeros(xs.shape)
    drift_b = None
    if lf.d > 0:
        drift = lf.d * np.asarray(law.q_star(np.full(xs.shape, t), xs))
        reps = law.q_star_batches(np.full(xs.shape, t), xs)
        drift_b = None if reps is None else lf.d * reps
    if include_drift_term and lf.d > 0:
        f_b = f_b + (drift[None, :] if drift_b is None else drift_b)
        f_coarse = f_coarse + drift
    f = f_b.mean(axis=0)
    stderr = batch_mean_stderr(f_b)[1] if f_b.shape[0] > 1 else np.zeros(xs.shape)
    quad_err = np.abs(f - f_coarse) + remainder + 1e-15
    method = law.method

    atom = atom_mass(spec, t)
    mass, mass_se = _mass_check(lf, law, t, rules[1][0], rules[1][1], rules[1][3],
                                include_drift_term, atom)
    curve = DensityCurve(xs, np.maximum(f, 0.0), method,
                         stderr=stderr if method == MONTE_CARLO else None, abs_err=quad_err)
    if tol is not None:
        se = np.nan_to_num(stderr)
        tot = np.sqrt(se ** 2 + quad_err ** 2)
        if np.any(tot > tol):
            i = int(np.argmax(tot))
            dom = "entrance-law stderr" if se[i] >= quad_err[i] else "quadrature"
            raise ErrorBudgetExceeded(
                f"error budget exceeded at x={xs[i]:g}: {tot[i]:.2e} > {tol:.2e} "
                f"(dominated by {dom})")
    grid_mass = trapezoid(curve.values, xs) + atom if xs.size > 1 else float("nan")
    return SupLawResult(float(t), curve, atom, mass, mass_se, grid_mass, drift,
                        include_drift_term,
                        {"quadrature_nodes": float(rules[1][0].size),
                         "s_min": float(rules[1][2])})


def _mass_check(lf, law: EntranceLaw, t, s, w, u, include_drift_term, atom):
    nw = w * np.asarray(lf.n_tail(u))
    mb = law.mass_batches(s)
    if mb is None:
        m = float(nw @ np.asarray(law.mass(s)))
        if include_drift_term and lf.d > 0:
            m += lf.d * float(law.mass(t))
        return m + atom, 0.0
    tot = mb @ nw
    if include_drift_term and lf.d > 0:
        tot = tot + lf.d * law.mass_batches(np.array([t]))[:, 0]
    m, se = batch_mean_stderr(tot)
    return float(m) + atom, float(se)


def atom_mass(spec: ProcessSpec, t: float) -> float:
    """``P(Xbar_t = 0) = d* n(t < zeta)``; zero when ``(0, inf)`` is regular."""
    lf = ladder_functions(spec)
    if lf.d_star == 0:
        return 0.0
    return float(lf.d_star * lf.n_tail(t))


def lower_bound_integral(spec: ProcessSpec, t: float, xs, entrance: Optional[EntranceLaw] = None,
                         order: int = 16, **kw):
    """``n(t < zeta) int_0^t q*_s(x) ds``, a lower bound for ``f_t(x)``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    lf = ladder_functions(spec)
    s, w, _ = time_rule(t, _grading_power(spec), order)
    law = _law_for(spec, np.concatenate([s, [t]]), kw.get("config"), kw.get("seed"),
                   kw.get("workers", 1), entrance)
    vals = np.asarray(law.q_star(s[:, None], xs[None, :]))
    return float(lf.n_tail(t)) * (w @ vals)


def sup_cdf(spec: ProcessSpec, t: float, x, *, order: int = 8, n_x: int = 48,
            **kw) -> np.ndarray:
    """``P(Xbar_t <= x)``: the atom plus ``int_0^x f_t``.

    The ``x``-integral uses ``y = x w^2`` with Gauss-Legendre nodes, which is
    exact enough for densities behaving like ``y^{a}`` with ``a > -1`` at 0.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xa.shape)
    g, gw = gauss_legendre(n_x)
    pts = np.concatenate([xi * g ** 2 for xi in xa])
    res = sup_density(spec, t, pts, order=order, **kw)
    vals = res.density.values.reshape(xa.size, n_x)
    for i, xi in enumerate(xa):
        out[i] = res.atom_mass + float(np.sum(vals[i] * 2 * xi * g * gw))
    return out if np.ndim(x) else float(out[0])


def kmr_bound(spec: ProcessSpec, t: float, x) -> np.ndarray:
    """``(e / (e - 1)) kappa(1/t, 0) h(x)``, an upper bound for ``P(Xbar_t <= x)``."""
    lf = ladder_functions(spec)
    e = np.e
    return e / (e - 1.0) * lf.kappa_time(1.0 / t) * np.asarray(lf.h(x))


# -- closed forms ---------------------------------------------------------
def brownian_sup_density(spec: ProcessSpec, t: float, x) -> np.ndarray:
    """Closed form of ``f_t`` for ``sigma B + mu t``."""
    x = np.asarray(x, dtype=float)
    sg, mu = spec.sigma, spec.mu
    st = sg * sqrt(t)
    a = (x - mu * t) / st
    b = (-x - mu * t) / st
    phi = np.exp(-0.5 * a * a) / np.sqrt(2 * np.pi)
    k = 2 * mu / sg ** 2
    return (2.0 / st) * phi - k * np.exp(k * x) * special.ndtr(b)


def brownian_sup_cdf(spec: ProcessSpec, t: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    sg, mu = spec.sigma, spec.mu
    st = sg * sqrt(t)
    return special.ndtr((x - mu * t) / st) - np.exp(2 * mu * x / sg ** 2) \
        * special.ndtr((-x - mu * t) / st)


# -- Monte Carlo oracle ---------------------------------------------------
def _richardson(fine, coarse, rate):
    r = 2.0 ** rate
    return (r * fine - coarse) / (r - 1.0)


def mc_sup_oracle(spec: ProcessSpec, t: float, N: int = 1_000_000, n_steps: int = 512,
                  seed: Optional[int] = None, xs=None, n_batches: int = 16,
                  workers: int = 1, bins: Optional[np.ndarray] = None) -> DensityEstimate:
    """Independent simulation of ``Xbar_t``.

    Brownian motion uses the exact joint law of ``(X_t, Xbar_t)``:
    ``Xbar_t = (X_t + sqrt(X_t^2 - 2 sigma^2 t log U)) / 2`` given ``X_t``.
    Stable specs take skeleton maxima on meshes ``n_steps`` and
    ``n_steps / 2`` of the same paths and extrapolate at rate ``1/alpha``
    (the order of the gap between true and skeleton maxima).  The
    subordinator family samples the atom event exactly: given ``S_t``, the
    ballot theorem gives ``P(Xbar_t = 0 | S_t) = (1 - S_t / (b t))^+``;
    only the atom is simulated and the density entries are NaN.

    Densities are log-kernel estimates on ``xs``; histogram counts on
    ``bins`` are kept for reproducibility checks.  ``extra`` carries the
    atom frequency and its standard error.
    """
    seed = resolve_seed(seed)
    if N < 1 or n_steps < 1:
        raise ValueError("N and n_steps must be >= 1")
    xs = np.asarray(xs if xs is not None else np.linspace(0.1, 3.0, 30), dtype=float)
    if bins is None:
        bins = np.linspace(0.0, 4.0 * spec.length_scale * max(t, 1.0) ** 0.5, 81)
    gens = batch_generators(seed, f"sup-oracle-{t!r}-{n_steps}", n_batches)
    counts = split_counts(N, n_batches)

    if spec.kind == BROWNIAN:
        def job(j):
            rng = gens[j]
            n = counts[j]
            x = spec.mu * t + spec.sigma * sqrt(t) * rng.standard_normal(n)
            u = rng.random(n)
            m = 0.5 * (x + np.sqrt(x * x - 2 * spec.sigma ** 2 * t * np.log(u)))
            return m, None

        rate = None
    elif spec.kind == SMD and not spec.negated:
        def job(j):
            rng = gens[j]
            n = counts[j]
            s = subordinator_increments(spec, np.full(n, t), rng)
            bt = spec.drift_b * t
            atom = rng.random(n) < np.maximum(1.0 - s / bt, 0.0)
            return np.where(atom, 0.0, np.nan), atom

        rate = None
    else:
        def skeleton(rng, n):
            dt = t / n_steps
            fine = np.zeros(n)
            coarse = np.zeros(n)
            pos = np.zeros(n)
            for k in range(n_steps):
                pos += increments(spec, np.full(n, dt), rng)
                np.maximum(fine, pos, out=fine)
                if k % 2 == 1:
                    np.maximum(coarse, pos, out=coarse)
            return fine, coarse

        def job(j):
            # chunks bound the memory of one batch
            parts = [skeleton(gens[j], c) for c in split_counts(counts[j], -(-counts[j] // 65536))]
            return tuple(np.concatenate([q[i] for q in parts]) for i in range(2))

        rate = 1.0 / spec.alpha if spec.kind == STABLE else 0.5

    out = map_batches(job, n_batches, workers)
    extra: Dict[str, float] = {}
    if spec.kind == SMD and not spec.negated:
        freqs = [o[1].mean() for o in out]
        m, se = batch_mean_stderr(freqs)
        extra.update(atom=float(m), atom_stderr=float(se))
        curve = DensityCurve(xs, np.full(xs.shape, np.nan), MONTE_CARLO,
                             stderr=np.full(xs.shape, np.nan))
        return DensityEstimate(curve, int(N), None, None, None, extra)

    pooled = np.concatenate([o[0] for o in out])
    pos = pooled[pooled > 0]
    bw = silverman_bandwidth(np.log(pos[:200_000]))
    fine_b = np.stack([kde4(o[0], xs, bw, np.full(o[0].size, 1.0 / o[0].size)) for o in out])
    hist = np.histogram(pooled, bins=bins)[0]
    if rate is None:
        dens_b = fine_b
    else:
        coarse_b = np.stack([kde4(o[1], xs, bw, np.full(o[1].size, 1.0 / o[1].size))
                             for o in out])
        dens_b = _richardson(fine_b, coarse_b, rate)
        extra["coarse_mid"] = float(np.mean(coarse_b[:, xs.size // 2]))
        extra["fine_mid"] = float(np.mean(fine_b[:, xs.size // 2]))
    m, se = batch_mean_stderr(dens_b)
    zero = np.array([np.mean(o[0] <= 0) for o in out])
    extra.update(atom=float(zero.mean()), atom_stderr=float(zero.std(ddof=1) / sqrt(zero.size)),
                 mass_positive=float(1.0 - zero.mean()))
    curve = DensityCurve(xs, m, MONTE_CARLO, stderr=se)
    est = DensityEstimate(curve, int(N), float(bw), None, t / n_steps, extra)
    est.counts = hist
    est.bins = np.asarray(bins)
    return est


def skeleton_atom_frequency(spec: ProcessSpec, t: float, N: int, n_steps: int,
                            seed: Optional[int] = None, n_batches: int = 16,
                            workers: int = 1):
    """Fraction of skeleton paths that never exceed 0 on ``[0, t]``.

    Biased upward by the mesh (excursions between grid points are missed);
    reported alongside the exact ballot sampler.
    """
    seed = resolve_seed(seed)
    gens = batch_generators(seed, f"skeleton-atom-{n_steps}", n_batches)
    counts = split_counts(N, n_batches)

    def job(j):
        rng = gens[j]
        n = counts[j]
        pos = np.zeros(n)
        ok = np.ones(n, dtype=bool)
        dt = t / n_steps
        for _ in range(n_steps):
            pos += increments(spec, np.full(n, dt), rng)
            ok &= pos <= 0
        return ok.mean()

    m, se = batch_mean_stderr(map_batches(job, n_batches, workers))
    return float(m), float(se)
