"""Time of the supremum of a bridge and the convolution identity of entrance laws.

For the bridge from 0 to ``y`` of length ``t`` the law of the argmax time
``g_t`` has density

    s -> p_t(y)^{-1} int_{x > y^+} q*_s(x) q_{t-s}(x - y) dx ,

obtained from the joint law of ``(g_t, Xbar_t, Xbar_t - X_t)``, whose density
is ``q*_s(x) q_{t-s}(z)``.  At ``y = 0`` the integral equals ``p_t(0)/t`` for
every ``s``, so the argmax of a bridge to 0 is uniform.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from math import sqrt
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .entrance import EntranceLaw, dual_entrance_law, entrance_law
from .numerics import gauss_legendre
from .processes import BROWNIAN, ProcessSpec
from .report import EQ, FLAG, Row, VerificationReport, flag_row
from .sampling import batch_generators, map_batches, resolve_seed, split_counts
from .transition import pdf


@dataclass
class ArgmaxSample:
    """Argmax times of simulated bridges.

    Attributes
    ----------
    t, y : float
    samples : ndarray
        Argmax times on the mesh ``n_steps``.
    refined : ndarray or None
        Argmax times of the same bridges after one midpoint refinement.
    ks_stat, ks_p : float
        Kolmogorov-Smirnov test of ``samples / t`` against Uniform[0, 1].
    ks_stat_refined, ks_p_refined : float
    """

    t: float
    y: float
    n_steps: int
    samples: np.ndarray
    refined: Optional[np.ndarray] = None
    ks_stat: float = float("nan")
    ks_p: float = float("nan")
    ks_stat_refined: float = float("nan")
    ks_p_refined: float = float("nan")


def _x_rule(scale: float, order: int):
    """Log-graded rule on ``(0, inf)``: decades from ``1e-7 scale`` to ``1e4 scale``."""
    edges = scale * np.logspace(-7, 4, 45)
    g, w = gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (a + (b - a) * g[None, :]).ravel()
    weights = ((b - a) * w[None, :]).ravel()
    return nodes, weights


def _laws(spec: ProcessSpec, entrance, dual, **kw):
    law = entrance if entrance is not None else entrance_law(spec, **kw)
    dlaw = dual if dual is not None else dual_entrance_law(spec, **kw)
    return law, dlaw


def _product_integral(law: EntranceLaw, dlaw: EntranceLaw, s1: float, s2: float, y: float,
                      scale: float, order: int):
    """``int q*_{s1}(x) q_{s2}(x - y) dx`` with a batch standard error."""
    u, w = _x_rule(scale, order)
    x = max(y, 0.0) + u
    a = np.asarray(law.q_star(np.full(x.shape, s1), x))
    b = np.asarray(dlaw.q_star(np.full(x.shape, s2), x - y))
    val = float(w @ (a * b))
    ra = law.q_star_batches(np.full(x.shape, s1), x)
    rb = dlaw.q_star_batches(np.full(x.shape, s2), x - y)
    if ra is None and rb is None:
        return val, 0.0
    ra = a[None] if ra is None else ra
    rb = b[None] if rb is None else rb
    # delta method: errors of the two factors propagated separately
    ea = (ra * b[None]) @ w
    eb = (a[None] * rb) @ w
    var = 0.0
    for e in (ea, eb):
        if e.size > 1:
            var += np.var(e, ddof=1) / e.size
    return val, float(sqrt(var))


def _scale_at(spec: ProcessSpec, t: float) -> float:
    a = 2.0 if spec.kind == BROWNIAN else spec.alpha
    return spec.length_scale * t ** (1.0 / a)


def bridge_argmax_density(spec: ProcessSpec, t: float, y: float, s, *, entrance=None,
                          dual=None, order: int = 12, with_error: bool = False, **kw):
    """Density of the argmax time of the bridge from 0 to ``y`` over ``[0, t]``.

    Parameters
    ----------
    spec : ProcessSpec
    t : float
    y : float
        Bridge endpoint.
    s : float or array_like
        Times in ``(0, t)``.
    entrance, dual : EntranceLaw, optional
        Providers of ``q*`` and ``q``; by default those of ``spec``.
    with_error : bool
        Also return the combined (statistical and quadrature) error.
    """
    sa = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(sa <= 0) or np.any(sa >= t):
        raise ValueError("s must lie in (0, t)")
    law, dlaw = _laws(spec, entrance, dual, **kw)
    pt = float(pdf(spec, t, y))
    scale = _scale_at(spec, t)
    vals = np.empty(sa.shape)
    errs = np.empty(sa.shape)
    for i, si in enumerate(sa):
        v, e = _product_integral(law, dlaw, si, t - si, y, scale, order)
        v2, _ = _product_integral(law, dlaw, si, t - si, y, scale, order // 2)
        vals[i] = v / pt
        errs[i] = sqrt(e ** 2 + (v - v2) ** 2) / pt
    out = (vals, errs) if with_error else vals
    if np.ndim(s) == 0:
        return (float(vals[0]), float(errs[0])) if with_error else float(vals[0])
    return out


def convolution_integral(spec: ProcessSpec, t: float, s: float, *, entrance=None, dual=None,
                         order: int = 12, **kw):
    """``int q*_{t-s}(x) q_s(x) dx`` and its error."""
    law, dlaw = _laws(spec, entrance, dual, **kw)
    scale = _scale_at(spec, t)
    v, e = _product_integral(law, dlaw, t - s, s, 0.0, scale, order)
    v2, _ = _product_integral(law, dlaw, t - s, s, 0.0, scale, order // 2)
    return v, sqrt(e ** 2 + (v - v2) ** 2)


def convolution_identity_check(spec: ProcessSpec, t: float, s_grid: Sequence[float], *,
                               abs_tol: float = 1e-3, entrance=None, dual=None,
                               seed: Optional[int] = None, workers: int = 1,
                               **kw) -> VerificationReport:
    """Rows ``int q*_{t-s} q_s dx`` against ``p_t(0)/t`` plus a flatness row.

    The flatness row compares the largest pairwise difference across ``s``
    with three times the combined error of that pair; it does not use the
    value of ``p_t(0)``.
    """
    t0 = time.perf_counter()
    s_grid = [float(s) for s in s_grid]
    if any(s <= 0 or s >= t for s in s_grid):
        raise ValueError("s_grid must lie in (0, t)")
    kw.setdefault("seed", seed)
    kw.setdefault("workers", workers)
    law, dlaw = _laws(spec, entrance, dual, **kw)
    target = float(pdf(spec, t, 0.0)) / t
    rows, vals, errs = [], [], []
    for s in s_grid:
        v, e = convolution_integral(spec, t, s, entrance=law, dual=dlaw)
        vals.append(v)
        errs.append(e)
        rows.append(Row({"t": t, "s": s}, v, target, e, abs_tol, EQ))
    flat = True
    worst = 0.0
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            d = abs(vals[i] - vals[j])
            lim = max(3.0 * sqrt(errs[i] ** 2 + errs[j] ** 2), 1e-12)
            worst = max(worst, d / lim)
            flat &= d <= lim
    if len(vals) > 1:
        rows.append(flag_row({"t": t, "check": "flat in s"}, flat,
                             f"max |diff| / (3 err) = {worst:.3f}"))
    rep = VerificationReport("convolution_identity", spec, rows,
                             time.perf_counter() - t0, resolve_seed(seed), workers)
    return rep


# ----------------------------------------------------------------------
def bridge_argmax_sample(spec: ProcessSpec, t: float = 1.0, y: float = 0.0, N: int = 100_000,
                         n_steps: int = 4096, seed: Optional[int] = None, refine: bool = True,
                         n_batches: int = 16, workers: int = 1,
                         chunk: int = 2048) -> ArgmaxSample:
    """Argmax times of Brownian bridges sampled exactly on a mesh.

    Each bridge is a random walk with Gaussian steps pinned at ``y`` by
    ``B_k - (k/n)(B_n - y)``.  With ``refine`` the same bridges are refined
    once by inserting exact bridge midpoints, so the two argmax samples share
    their randomness and the mesh effect can be read off directly.
    """
    if spec.kind != BROWNIAN:
        raise ValueError("bridge_argmax_sample supports Brownian motion only")
    if N < 1 or n_steps < 1:
        raise ValueError("N and n_steps must be >= 1")
    seed = resolve_seed(seed)
    gens = batch_generators(seed, f"bridge-{t!r}-{y!r}-{n_steps}", n_batches)
    counts = split_counts(N, n_batches)
    dt = t / n_steps
    sd = spec.sigma * sqrt(dt)
    ramp = np.arange(n_steps + 1) / n_steps

    def job(j):
        rng = gens[j]
        coarse, fine = [], []
        for c in split_counts(counts[j], max(1, -(-counts[j] // chunk))):
            walk = np.zeros((c, n_steps + 1))
            np.cumsum(sd * rng.standard_normal((c, n_steps)), axis=1, out=walk[:, 1:])
            # drift does not change the bridge law
            br = walk - ramp[None, :] * (walk[:, -1:] - y)
            coarse.append(np.argmax(br, axis=1) * dt)
            if refine:
                mid = 0.5 * (br[:, 1:] + br[:, :-1]) + 0.5 * sd * rng.standard_normal((c, n_steps))
                full = np.empty((c, 2 * n_steps + 1))
                full[:, 0::2] = br
                full[:, 1::2] = mid
                fine.append(np.argmax(full, axis=1) * (dt / 2))
        return np.concatenate(coarse), (np.concatenate(fine) if refine else None)

    out = map_batches(job, n_batches, workers)
    samples = np.concatenate([o[0] for o in out])
    res = ArgmaxSample(float(t), float(y), int(n_steps), samples)
    if y == 0.0:
        k = stats.kstest(samples / t, "uniform")
        res.ks_stat, res.ks_p = float(k.statistic), float(k.pvalue)
    if refine:
        res.refined = np.concatenate([o[1] for o in out])
        if y == 0.0:
            k = stats.kstest(res.refined / t, "uniform")
            res.ks_stat_refined, res.ks_p_refined = float(k.statistic), float(k.pvalue)
    return res


def bridge_report(spec: ProcessSpec, t: float = 1.0, y: float = 0.0, N: int = 100_000,
                  n_steps: int = 4096, s_grid: Sequence[float] = (0.1, 0.25, 0.5, 0.75, 0.9),
                  seed: Optional[int] = None, workers: int = 1, **kw) -> dict:
    """JSON-ready summary: KS statistics and a table of the argmax density."""
    table = []
    dens, err = bridge_argmax_density(spec, t, y, np.asarray(s_grid, dtype=float) * t,
                                      with_error=True, seed=seed, workers=workers, **kw)
    for s, d, e in zip(s_grid, dens, err):
        table.append({"s": float(s) * t, "density": float(d), "err": float(e)})
    out = {"t": t, "y": y, "density_table": table}
    if spec.kind == BROWNIAN:
        smp = bridge_argmax_sample(spec, t, y, N, n_steps, seed, workers=workers)
        out.update(ks_stat=smp.ks_stat, ks_p=smp.ks_p, ks_stat_refined=smp.ks_stat_refined,
                   ks_p_refined=smp.ks_p_refined, n_steps=n_steps, N=N,
                   mean=float(np.mean(smp.samples)))
    else:
        out.update(ks_stat=None, ks_p=None)
    return out
