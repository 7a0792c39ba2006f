"""Entrance laws of the excursion measures and killed transition densities.

``q*_s(x)`` is the density at time ``s`` of the excursion measure ``n*`` of
``X - inf X``; ``q_s(x)`` is the same object for the dual process.  Killed
densities ``q*_t(x, y)`` are those of ``X`` started at ``x`` and killed on
entering ``(-inf, 0)``.

Closed forms
    Brownian motion with drift: ``q*_s(x) = Phi(1) (x/s) p_s(x)`` and the
    reflection formula for the killed density.  The dual of the subordinator
    family: by the ballot theorem, ``q*_s(x) = x p^S_s(b s - x) / (b s d)``.
Monte Carlo
    Strictly stable: killed paths started at a small ``x0`` with adaptive
    steps.  The endpoint law of the survivors estimates the meander law
    ``m_1``; the entrance law is ``n*(1 < zeta) m_1`` and all other times
    follow from self-similarity.  The ``1/h*(x0)``-weighted survival mass
    is kept as a separate check of the renewal limit.
    Subordinator minus drift: excursions above the infimum start with a jump,
    ``n* = d* int nu(dy) Q*_y``; paths are simulated exactly between record
    times because the drift cannot cross 0 within a step of length ``z/b``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from math import gamma, pi, sqrt
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.interpolate import CubicSpline

from .ladder import ladder_functions, smd_constants
from .numerics import log_kde, silverman_bandwidth
from .processes import BROWNIAN, SMD, STABLE, ProcessSpec, UnsupportedClassification
from .sampling import (batch_generators, batch_mean_stderr, increments, map_batches,
                       resolve_seed, split_counts, subordinator_increments)
from .transition import CLOSED_FORM, MONTE_CARLO, DensityCurve, pdf

# ----------------------------------------------------------------------


class BiasBudgetExceeded(RuntimeError):
    """Raised when two start points give entrance laws that disagree."""


@dataclass(frozen=True)
class EntranceConfig:
    """Monte Carlo settings of the entrance-law estimators.

    Attributes
    ----------
    n_paths : int
        Killed paths per start point (stable) or excursions (subordinator).
    n_batches : int
        Independent batches; standard errors are taken across batches.
    eps : float
        Relative step: a path at height ``z`` moves with steps whose
        increment scale is ``eps * z``.
    richardson : bool
        Combine the meander estimate with a run at ``2 * eps`` as
        ``2 m(eps) - m(2 eps)`` to remove the first-order killing bias.
    x0 : tuple of float
        Start points in units of the process length scale; the last one is
        used for the estimate, the others only for the agreement check.
    grid_lo, grid_hi, per_decade : float, float, int
        Log grid (units of the length scale) on which ``m_1`` is tabulated.
    bw_factor : float
        Multiplier on Silverman's bandwidth for the log-scale kernel.
    bias_sigmas : float
        Maximal z-score between start points before raising.
    killed_eps : tuple of float
        Two relative steps (2:1) for Richardson extrapolation of killed
        densities and survival masses.
    killed_paths : int
        Paths per start point for killed densities.
    tail_count : int
        Survivors beyond each tail cut; outside the cuts ``m_1`` is a fitted
        power law.
    max_iter : int
        Cap on adaptive steps per killed path.
    smd_paths : int
        Jump-started excursions for the subordinator family.
    """

    n_paths: int = 4_000_000
    n_batches: int = 16
    eps: float = 0.02
    richardson: bool = True
    x0: Tuple[float, ...] = (0.01, 0.005)
    grid_lo: float = 1e-3
    grid_hi: float = 1e3
    per_decade: int = 40
    bw_factor: float = 1.5
    bias_sigmas: float = 4.0
    killed_eps: Tuple[float, float] = (0.04, 0.02)
    killed_paths: int = 200_000
    tail_count: int = 2000
    max_iter: int = 200_000
    smd_paths: int = 400_000


DEFAULT_CONFIG = EntranceConfig()


@dataclass
class KilledPathSample:
    """Killed paths of one start point, stored column-wise.

    Attributes
    ----------
    start : float
        Start point ``x``.
    t : float
        Horizon.
    skeleton_step : float
        Relative step parameter ``eps`` (absolute steps adapt to the height).
    survived : ndarray of bool
        Never below 0 on the (bridge-corrected for Brownian) skeleton.
    endpoint : ndarray
        Position at ``t``; ``nan`` for killed paths.
    first_passage_index : ndarray of int
        Step index at which the path was killed, ``-1`` for survivors.
    n_steps : int
        Total number of simulated steps.
    """

    start: float
    t: float
    skeleton_step: float
    survived: np.ndarray
    endpoint: np.ndarray
    first_passage_index: np.ndarray
    n_steps: int = 0

    @property
    def n_paths(self) -> int:
        return int(self.survived.size)

    def survivors(self) -> np.ndarray:
        return self.endpoint[self.survived]


@dataclass
class DensityEstimate:
    """A density curve with Monte Carlo metadata."""

    curve: DensityCurve
    n_paths: int = 0
    bandwidth: Optional[float] = None
    start_x0: Optional[float] = None
    step: Optional[float] = None
    extra: Dict[str, float] = field(default_factory=dict)


# ----------------------------------------------------------------------
def _step_scale(spec: ProcessSpec) -> Tuple[float, float]:
    if spec.kind == BROWNIAN:
        return spec.sigma, 2.0
    return spec.scale, spec.alpha


def simulate_killed(spec: ProcessSpec, x0, t: float, n_paths: int,
                    rng: np.random.Generator, eps: float = 0.05,
                    max_iter: int = 200_000) -> KilledPathSample:
    """Simulate paths from ``x0`` killed on entering ``(-inf, 0)``.

    Steps adapt to the current height ``z``: the increment scale over a step
    is ``eps * z``.  For Brownian motion each step is additionally killed
    with the exact bridge crossing probability ``exp(-2 z z' / (sigma^2 dt))``
    so the result is exact; for jump processes killing is checked on the
    skeleton only and the bias is first order in ``eps``.

    Parameters
    ----------
    spec : ProcessSpec
        Brownian or stable spec.
    x0 : float or ndarray
        Start point(s) ``> 0``.
    t : float
        Horizon.
    n_paths : int
    rng : numpy Generator
    eps : float
        Relative step size.
    """
    if spec.kind == SMD:
        raise UnsupportedClassification("use the jump-start sampler for the subordinator family")
    scale, a = _step_scale(spec)
    z = np.empty(n_paths)
    z[:] = x0
    start = float(np.min(z))
    clock = np.zeros(n_paths)
    alive = np.ones(n_paths, dtype=bool)
    fpi = np.full(n_paths, -1, dtype=np.int64)
    nsteps = np.zeros(n_paths, dtype=np.int64)
    idx = np.arange(n_paths)
    dmin = 1e-13 * t
    total = 0
    it = 0
    while idx.size and it < max_iter:
        it += 1
        zz = z[idx]
        tt = clock[idx]
        rem = t - tt
        dt = np.minimum(np.maximum((eps * zz / scale) ** a, dmin), rem)
        zn = zz + increments(spec, dt, rng)
        dead = zn < 0
        if spec.kind == BROWNIAN:
            ok = ~dead
            cross = np.exp(-2.0 * zz[ok] * zn[ok] / (spec.sigma ** 2 * dt[ok]))
            hit = rng.random(cross.size) < cross
            tmp = np.zeros(zz.size, dtype=bool)
            tmp[np.flatnonzero(ok)[hit]] = True
            dead |= tmp
        total += idx.size
        nsteps[idx] += 1
        z[idx] = zn
        clock[idx] = tt + dt
        alive[idx[dead]] = False
        fpi[idx[dead]] = nsteps[idx[dead]]
        done = dead | (dt >= rem)
        idx = idx[~done]
    endpoint = np.where(alive, z, np.nan)
    return KilledPathSample(start, float(t), float(eps), alive, endpoint, fpi, int(total))


# ----------------------------------------------------------------------
class EntranceLaw:
    """Interface of ``q*_s(x)`` providers used by the supremum pipeline."""

    method: str = CLOSED_FORM
    n_batches: int = 0
    n_paths: int = 0
    x0: Optional[float] = None
    step: Optional[float] = None
    bandwidth: Optional[float] = None
    fixed_nodes: Optional[np.ndarray] = None

    def q_star(self, s, x) -> np.ndarray:
        raise NotImplementedError

    def q_star_batches(self, s, x) -> Optional[np.ndarray]:
        """Per-batch replicates with a leading batch axis, ``None`` if exact."""
        return None

    def mass(self, s) -> np.ndarray:
        """``int q*_s(x) dx`` as represented by the estimator."""
        raise NotImplementedError

    def mass_batches(self, s) -> Optional[np.ndarray]:
        return None


class BrownianEntrance(EntranceLaw):
    """``q*_s(x) = Phi(1) (x / s) p_s(x)`` for ``sigma B + mu t``."""

    def __init__(self, spec: ProcessSpec):
        self.spec = spec
        self._lf = ladder_functions(spec)
        self._c = self._lf.constants["phi1"]

    def q_star(self, s, x):
        s, x = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
        sg, mu = self.spec.sigma, self.spec.mu
        p = np.exp(-0.5 * (x - mu * s) ** 2 / (sg * sg * s)) / np.sqrt(2 * pi * sg * sg * s)
        return np.where(x > 0, self._c * x / s * p, 0.0)

    def mass(self, s):
        return self._lf.n_star_tail(s)


class DualSubordinatorEntrance(EntranceLaw):
    """Closed form for ``b t - S_t`` via the ballot theorem."""

    def __init__(self, spec: ProcessSpec):
        if not (spec.kind == SMD and spec.negated):
            raise ValueError("needs the negated subordinator spec")
        self.spec = spec
        self._lf = ladder_functions(spec)
        self._base = spec.dual()

    def q_star(self, s, x):
        s, x = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
        out = np.zeros(s.shape)
        b = self.spec.drift_b
        d = self._lf.d
        for val in np.unique(s):
            m = s == val
            xs = x[m]
            ok = (xs > 0) & (xs < b * val)
            v = np.zeros(xs.shape)
            if np.any(ok):
                # X_s = b s - S_s, so p_s^X(x) is the density of S at b s - x
                v[ok] = xs[ok] / (b * val * d) * np.asarray(pdf(self.spec, float(val), xs[ok]))
            out[m] = v
        return out

    def mass(self, s):
        return self._lf.n_star_tail(s)


# ----------------------------------------------------------------------
def _log_grid(cfg: EntranceConfig, scale: float) -> np.ndarray:
    n = int(round(np.log10(cfg.grid_hi / cfg.grid_lo) * cfg.per_decade)) + 1
    return scale * np.geomspace(cfg.grid_lo, cfg.grid_hi, n)


def kde4(samples, grid, bw, weights=None):
    """Fourth-order Gaussian kernel in ``log y`` (bias ``O(bw^4)``)."""
    samples = np.asarray(samples, dtype=float)
    if weights is None:
        weights = np.full(samples.shape, 1.0 / max(samples.size, 1))
    z = np.log(samples[samples > 0])
    w = np.asarray(weights, dtype=float)[samples > 0]
    lg = np.log(np.asarray(grid, dtype=float))
    out = np.zeros(lg.shape)
    for i in range(0, z.size, 4096):
        d = (lg[:, None] - z[None, i:i + 4096]) / bw
        out += (np.exp(-0.5 * d * d) * (3.0 - d * d)) @ w[i:i + 4096]
    return out * 0.5 / (bw * sqrt(2 * pi)) / np.asarray(grid, dtype=float)


class StableEntrance(EntranceLaw):
    """Entrance law of a strictly stable spec from the estimated meander law."""

    method = MONTE_CARLO

    def __init__(self, spec, grid, shapes, tails, n_paths, x0, step, bandwidth, diagnostics):
        self.spec = spec
        self._lf = ladder_functions(spec)
        self.grid = np.asarray(grid)
        self.shapes = np.asarray(shapes)          # (B, G): batch estimates of m_1
        self.n_batches = self.shapes.shape[0]
        self.n_paths = n_paths
        self.x0 = x0
        self.step = step
        self.bandwidth = bandwidth
        self.diagnostics = diagnostics
        self._alpha = spec.alpha
        self._rho = self._lf.rho
        self._lg = np.log(self.grid)
        self._lo_exp = spec.alpha * self._rho         # m_1(y) ~ y^{alpha rho} at 0
        self._hi_exp = -1.0 - spec.alpha              # jump tail
        # tails: (y_lo, y_hi, A_lo[B], A_hi[B]) from exceedance counts
        self.y_lo, self.y_hi, a_lo, a_hi = tails
        self._tables = [(np.log(np.maximum(m, 1e-300)), al, ah)
                        for m, al, ah in zip(self.shapes, a_lo, a_hi)]
        self._mean_table = (np.log(np.maximum(self.shapes.mean(axis=0), 1e-300)),
                            float(np.mean(a_lo)), float(np.mean(a_hi)))

    def _shape_eval(self, table, y):
        logm, a_lo, a_hi = table
        y = np.asarray(y, dtype=float)
        yp = np.where(y > 0, y, 1.0)
        core = np.exp(np.interp(np.log(yp), self._lg, logm))
        lo = a_lo * yp ** self._lo_exp
        hi = a_hi * yp ** self._hi_exp
        out = np.where(y < self.y_lo, lo, np.where(y > self.y_hi, hi, core))
        return np.where(y > 0, out, 0.0)

    def meander(self, s, x, table=None):
        s, x = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
        sc = s ** (1.0 / self._alpha)
        tab = self._mean_table if table is None else table
        return self._shape_eval(tab, x / sc) / sc

    def q_star(self, s, x):
        s = np.asarray(s, dtype=float)
        return self._lf.n_star_tail(s) * self.meander(s, x)

    def q_star_batches(self, s, x):
        s = np.asarray(s, dtype=float)
        n = self._lf.n_star_tail(s)
        return np.stack([n * self.meander(s, x, tab) for tab in self._tables])

    def mass(self, s):
        return self._lf.n_star_tail(s)


def _run_killed_batches(spec, x0, t, n_paths, eps, cfg, seed, workers, purpose):
    gens = batch_generators(seed, purpose, cfg.n_batches)
    counts = split_counts(n_paths, cfg.n_batches)

    def job(j):
        return simulate_killed(spec, x0, t, counts[j], gens[j], eps, cfg.max_iter)

    return map_batches(job, cfg.n_batches, workers)


_CACHE: Dict[tuple, EntranceLaw] = {}
_LOCK = threading.Lock()


def _stable_entrance(spec: ProcessSpec, cfg: EntranceConfig, seed: int,
                     workers: int, check_bias: bool = True) -> StableEntrance:
    scale = spec.scale
    grid = _log_grid(cfg, scale)
    lf = ladder_functions(spec)
    # fine-step runs for every start point, plus a coarse run (2 eps) for the last
    runs = [_run_killed_batches(spec, x0 * scale, 1.0, cfg.n_paths, cfg.eps, cfg,
                                seed, workers, f"entrance-{i}")
            for i, x0 in enumerate(cfg.x0)]
    coarse = None
    if cfg.richardson:
        coarse = _run_killed_batches(spec, cfg.x0[-1] * scale, 1.0, cfg.n_paths, 2 * cfg.eps,
                                     cfg, seed, workers, "entrance-coarse")
    pooled = np.concatenate([b.survivors() for b in runs[-1]])
    bw = cfg.bw_factor * silverman_bandwidth(np.log(pooled))
    diag: Dict[str, float] = {"bandwidth": bw}
    shapes_by_x0 = []
    for i, batches in enumerate(runs):
        shapes_by_x0.append(np.stack([kde4(b.survivors(), grid, bw) for b in batches]))
        x0 = cfg.x0[i] * scale
        r, e = batch_mean_stderr([b.survived.mean() / lf.h_star(x0) for b in batches])
        diag[f"survival_ratio_x0_{cfg.x0[i]:g}"] = float(r)
        diag[f"survival_ratio_x0_{cfg.x0[i]:g}_stderr"] = float(e)
        diag[f"survivors_x0_{cfg.x0[i]:g}"] = float(sum(b.survived.sum() for b in batches))
    if len(shapes_by_x0) > 1:
        ref = np.searchsorted(grid, scale * np.array([0.1, 0.3, 1.0, 3.0]))
        zmax = 0.0
        for other in shapes_by_x0[:-1]:
            m1, e1 = batch_mean_stderr(other[:, ref])
            m2, e2 = batch_mean_stderr(shapes_by_x0[-1][:, ref])
            z = np.abs(m1 - m2) / np.sqrt(e1 ** 2 + e2 ** 2)
            zmax = max(zmax, float(np.max(z)))
        diag["x0_agreement_zmax"] = zmax
        if check_bias and zmax > cfg.bias_sigmas:
            raise BiasBudgetExceeded(
                f"bias budget exceeded: start points {cfg.x0} disagree (z = {zmax:.2f})")
    shapes = shapes_by_x0[-1]
    tails = _power_tails(spec, runs[-1], lf.rho, cfg.tail_count)
    if coarse is not None:
        # first-order Richardson in the step: 2 m(eps) - m(2 eps), batch by batch
        c_shapes = np.stack([kde4(b.survivors(), grid, bw) for b in coarse])
        shapes = 2.0 * shapes - c_shapes
        c_tails = _power_tails(spec, coarse, lf.rho, cfg.tail_count, tails[:2])
        tails = (tails[0], tails[1], 2.0 * tails[2] - c_tails[2], 2.0 * tails[3] - c_tails[3])
        x0 = cfg.x0[-1] * scale
        fine_r = np.array([b.survived.mean() for b in runs[-1]])
        coarse_r = np.array([b.survived.mean() for b in coarse])
        r, e = batch_mean_stderr((2 * fine_r - coarse_r) / lf.h_star(x0))
        diag["survival_ratio_extrapolated"] = float(r)
        diag["survival_ratio_extrapolated_stderr"] = float(e)
    diag["tail_lo"], diag["tail_hi"] = tails[0], tails[1]
    n_total = sum(b.n_paths for b in runs[-1])
    return StableEntrance(spec, grid, shapes, tails, n_total, cfg.x0[-1] * scale,
                          cfg.eps, bw, diag)


def _power_tails(spec, batches, rho, count, cuts=None):
    """Power-law tails of ``m_1`` fitted to exceedance counts.

    Below ``y_lo`` the meander density is ``A y^{alpha rho}``, above ``y_hi``
    it is ``A' y^{-1-alpha}``; the ``A`` are matched to the fraction of
    survivors beyond the cut, which is far less noisy than the kernel
    estimate where data are sparse.
    """
    a = spec.alpha
    pooled = np.sort(np.concatenate([b.survivors() for b in batches]))
    n = pooled.size
    k = min(count, max(n // 20, 1))
    if cuts is None:
        y_lo, y_hi = float(pooled[k]), float(pooled[n - 1 - k])
    else:
        y_lo, y_hi = cuts
    e_lo = a * rho + 1.0
    a_lo, a_hi = [], []
    for b in batches:
        z = b.survivors()
        a_lo.append(e_lo * np.mean(z < y_lo) / y_lo ** e_lo)
        a_hi.append(a * np.mean(z > y_hi) * y_hi ** a)
    return y_lo, y_hi, np.array(a_lo), np.array(a_hi)


# -- subordinator minus drift ------------------------------------------
class SubordinatorEntrance(EntranceLaw):
    """Jump-start Monte Carlo entrance law of ``S - b t`` at fixed times.

    Each batch keeps, per record time, the weighted survivor mass and the
    log-kernel density tabulated on a log grid; values between grid points
    come from a cubic spline in ``log x``.
    """

    method = MONTE_CARLO

    def __init__(self, spec, nodes, grid, tables, masses, n_paths, n_batches, bw):
        self.spec = spec
        self.fixed_nodes = np.asarray(nodes)
        self.grid = grid                  # (n_grid,)
        self._tables = tables             # (n_batches, n_nodes, n_grid)
        self._masses = masses             # (n_batches, n_nodes)
        self.n_paths = n_paths
        self.n_batches = n_batches
        self.bandwidth = bw

    def _node_index(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        idx = np.searchsorted(self.fixed_nodes, s)
        idx = np.clip(idx, 0, self.fixed_nodes.size - 1)
        if not np.allclose(self.fixed_nodes[idx], s, rtol=1e-12, atol=0):
            raise ValueError("subordinator entrance law is only available at its record times")
        return idx

    def q_star_batches(self, s, x):
        s_arr, x_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
        out = np.zeros((self.n_batches,) + s_arr.shape)
        lg = np.log(self.grid)
        for val in np.unique(s_arr):
            k = int(self._node_index(val)[0])
            m = s_arr == val
            # below the grid the density is held at its first value
            u = np.log(np.clip(x_arr[m], self.grid[0], None))
            spl = CubicSpline(lg, self._tables[:, k, :], axis=1)
            v = spl(u)
            v[:, x_arr[m] > self.grid[-1]] = 0.0
            v[:, x_arr[m] <= 0] = 0.0
            out[(slice(None),) + (m,)] = v
        return out

    def q_star(self, s, x):
        return self.q_star_batches(s, x).mean(axis=0)

    def mass_batches(self, s):
        return self._masses[:, self._node_index(s)]

    def mass(self, s):
        return self.mass_batches(s).mean(axis=0)


def _kernel4(bw: float, delta: float) -> np.ndarray:
    """``(3 - u^2) phi(u) / 2`` sampled at spacing ``delta / bw``, times ``delta / bw``."""
    n = int(np.ceil(6.0 * bw / delta))
    u = np.arange(-n, n + 1) * delta / bw
    return 0.5 * (3.0 - u * u) * np.exp(-0.5 * u * u) / sqrt(2 * pi) * delta / bw


class _LogBins:
    """Linear binning of log positions onto a uniform fine grid."""

    def __init__(self, grid: np.ndarray, refine: int, pad: float):
        lg = np.log(grid)
        self.delta = (lg[1] - lg[0]) / refine
        n_pad = int(np.ceil(pad / self.delta))
        self.lo = lg[0] - n_pad * self.delta
        self.n = (grid.size - 1) * refine + 1 + 2 * n_pad
        self.take = n_pad + refine * np.arange(grid.size)

    def add(self, hist: np.ndarray, pos: np.ndarray, w: np.ndarray) -> None:
        """Accumulate ``pos`` (n_nodes, n) with weights ``w`` (n,) into ``hist``."""
        n_nodes = pos.shape[0]
        alive = pos > 0
        k, j = np.nonzero(alive)
        f = (np.log(pos[k, j]) - self.lo) / self.delta
        i0 = np.floor(f).astype(np.int64)
        fr = f - i0
        ok = (i0 >= 0) & (i0 < self.n - 1)
        k, i0, fr, ww = k[ok], i0[ok], fr[ok], w[j[ok]]
        flat = hist.reshape(-1)
        size = n_nodes * self.n
        flat += np.bincount(k * self.n + i0, weights=ww * (1 - fr), minlength=size)
        flat += np.bincount(k * self.n + i0 + 1, weights=ww * fr, minlength=size)


def simulate_jump_start(spec: ProcessSpec, record_times: np.ndarray, n_paths: int,
                        rng: np.random.Generator, y_min_rel: float = 1e-4):
    """Excursions of ``S - b t`` above its infimum, recorded at fixed times.

    Starting heights follow the Lévy measure ``nu(dy) = C y^{-1-alpha} dy`` of
    the subordinator, importance sampled as log-uniform on ``[y_min, b T]``
    and Pareto above.  Jumps below ``y_min`` are not simulated: from a small
    height ``P_y(tau > s) = Phi(1) y n*(s) (1 + O(y))``, so they contribute
    the fraction ``theta = C y_min^{1-alpha} / (b (1 - alpha))`` of the total
    and the weights carry the factor ``1 / (1 - theta)``.

    Returns
    -------
    positions : ndarray, shape (n_times, n_paths)
        ``0`` once killed.
    weights : ndarray
        ``d* nu(dy) / proposal(dy) / (1 - theta)``.
    """
    k = smd_constants(spec)
    a, b = spec.alpha, spec.drift_b
    dstar = 1.0 / (b * k.phi1)
    c_nu = a * k.k / gamma(1.0 - a)
    y1 = b * float(record_times[-1])
    y_min = y_min_rel * y1
    theta = c_nu * y_min ** (1.0 - a) / (b * (1.0 - a))
    p_lo = 0.6
    span = np.log(y1 / y_min)
    lower = rng.random(n_paths) < p_lo
    u = rng.random(n_paths)
    y = np.where(lower, y_min * np.exp(span * u), y1 * u ** (-1.0 / a))
    w = np.where(lower, c_nu * span * y ** (-a) / p_lo,
                 c_nu / (a * y1 ** a) / (1.0 - p_lo))
    w *= dstar / (1.0 - theta)
    pos = np.zeros((record_times.size, n_paths))
    z = y.copy()
    clock = np.zeros(n_paths)
    nxt = np.zeros(n_paths, dtype=np.int64)
    idx = np.arange(n_paths)
    tiny = 1e-12 * spec.scale
    while idx.size:
        zz = z[idx]
        target = record_times[nxt[idx]]
        dt = np.minimum(zz / b, target - clock[idx])
        zn = zz - b * dt + subordinator_increments(spec, dt, rng)
        clock[idx] += dt
        z[idx] = zn
        arrived = clock[idx] >= target * (1 - 1e-14)
        hit = idx[arrived]
        pos[nxt[hit], hit] = z[hit]
        clock[hit] = record_times[nxt[hit]]
        nxt[hit] += 1
        dead = z[idx] <= tiny
        finished = nxt[idx] >= record_times.size
        idx = idx[~(dead | finished)]
    return pos, w


def subordinator_entrance(spec: ProcessSpec, nodes: Sequence[float], n_paths: int = 400_000,
                          n_batches: int = 16, seed: Optional[int] = None,
                          workers: int = 1, chunk: int = 8192) -> SubordinatorEntrance:
    """Jump-start estimator of ``q*_s`` for ``S - b t`` at the given times.

    A pilot run fixes the bandwidth (1.5 times Silverman's rule on log
    positions at the last time); each batch then accumulates linearly binned
    log positions in chunks, so memory does not grow with ``n_paths``.
    """
    seed = resolve_seed(seed)
    nodes = np.unique(np.asarray(nodes, dtype=float))
    key = ("smd", spec, tuple(np.round(nodes, 15)), n_paths, n_batches, seed)
    with _LOCK:
        if key in _CACHE:
            return _CACHE[key]  # type: ignore[return-value]
    pilot_rng = batch_generators(seed, "smd-entrance-pilot", 1)[0]
    pos, _ = simulate_jump_start(spec, nodes[-1:], min(20_000, n_paths), pilot_rng)
    last = pos[0][pos[0] > 0]
    bw = 1.5 * silverman_bandwidth(np.log(last)) if last.size > 10 else 0.2
    y1 = spec.drift_b * float(nodes[-1])
    grid = y1 * np.geomspace(1e-6, 1e2, 8 * 60 + 1)
    bins = _LogBins(grid, 4, 7.0 * bw)
    kern = _kernel4(bw, bins.delta)
    gens = batch_generators(seed, "smd-entrance", n_batches)
    counts = split_counts(n_paths, n_batches)

    def job(j):
        hist = np.zeros((nodes.size, bins.n))
        mass = np.zeros(nodes.size)
        for c in split_counts(counts[j], max(1, -(-counts[j] // chunk))):
            p, w = simulate_jump_start(spec, nodes, c, gens[j])
            mass += ((p > 0) * w[None, :]).sum(axis=1)
            bins.add(hist, p, w)
        dens = ndimage.convolve1d(hist, kern, axis=1, mode="constant")[:, bins.take]
        return dens / (bins.delta * counts[j]) / grid[None, :], mass / counts[j]

    res = map_batches(job, n_batches, workers)
    tables = np.stack([r[0] for r in res])
    masses = np.stack([r[1] for r in res])
    law = SubordinatorEntrance(spec, nodes, grid, tables, masses, n_paths, n_batches, bw)
    with _LOCK:
        _CACHE[key] = law
    return law


# ----------------------------------------------------------------------
def entrance_law(spec: ProcessSpec, config: Optional[EntranceConfig] = None,
                 seed: Optional[int] = None, workers: int = 1,
                 check_bias: bool = True) -> EntranceLaw:
    """Provider of ``q*_s(x)`` for any ``s > 0`` (cached).

    The subordinator family needs fixed record times; use
    :func:`subordinator_entrance` for it.
    """
    if spec.kind == BROWNIAN:
        return BrownianEntrance(spec)
    if spec.kind == SMD:
        if spec.negated:
            return DualSubordinatorEntrance(spec)
        raise ValueError("the subordinator entrance law needs record times; "
                         "use subordinator_entrance")
    if not spec.is_strictly_stable:
        raise UnsupportedClassification("entrance laws need a strictly stable spec")
    cfg = config or DEFAULT_CONFIG
    seed = resolve_seed(seed)
    key = ("stable", spec, cfg, seed)
    with _LOCK:
        if key in _CACHE:
            return _CACHE[key]
    law = _stable_entrance(spec, cfg, seed, workers, check_bias)
    with _LOCK:
        _CACHE[key] = law
    return law


def dual_entrance_law(spec: ProcessSpec, **kw) -> EntranceLaw:
    """Provider of ``q_s(x)``: the same machinery run on the dual spec."""
    return entrance_law(spec.dual(), **kw)


def clear_cache() -> None:
    with _LOCK:
        _CACHE.clear()


def _curve_from(law: EntranceLaw, t: float, xs: np.ndarray, scale=None) -> DensityCurve:
    vals = np.asarray(law.q_star(t, xs), dtype=float)
    reps = law.q_star_batches(t, xs)
    se = None
    if reps is not None:
        _, se = batch_mean_stderr(reps)
    if scale is not None:
        vals = vals * scale
        se = None if se is None else se * np.abs(scale)
    return DensityCurve(xs, np.maximum(vals, 0.0), law.method, stderr=se)


def entrance_density_qstar(spec: ProcessSpec, t: float, xs, config=None, seed=None,
                           workers: int = 1) -> DensityEstimate:
    """Entrance density ``q*_t`` on a grid of positive points."""
    xs = np.asarray(xs, dtype=float)
    if t <= 0 or np.any(xs <= 0):
        raise ValueError("need t > 0 and positive grid points")
    if spec.kind == SMD and not spec.negated:
        cfg = config or DEFAULT_CONFIG
        law = subordinator_entrance(spec, [t], cfg.smd_paths, cfg.n_batches, seed, workers)
    else:
        law = entrance_law(spec, config, seed, workers)
    return DensityEstimate(_curve_from(law, t, xs), law.n_paths, law.bandwidth, law.x0, law.step)


def meander_density(spec: ProcessSpec, t: float, xs, **kw) -> DensityEstimate:
    """Endpoint density ``m_t = q*_t / n*(t < zeta)`` of the meander of length ``t``."""
    est = entrance_density_qstar(spec, t, xs, **kw)
    n = ladder_functions(spec).n_star_tail(t)
    c = est.curve
    curve = DensityCurve(c.grid, c.values / n, c.method,
                         None if c.stderr is None else c.stderr / n)
    return replace(est, curve=curve)


def conditioned_entrance(spec: ProcessSpec, t: float, xs, **kw) -> DensityEstimate:
    """``p^up_t(x) = h*(x) q*_t(x)``, the law at ``t`` of ``X`` conditioned to stay positive."""
    est = entrance_density_qstar(spec, t, xs, **kw)
    hs = np.asarray(ladder_functions(spec).h_star(est.curve.grid))
    c = est.curve
    curve = DensityCurve(c.grid, c.values * hs, c.method,
                         None if c.stderr is None else c.stderr * hs)
    return replace(est, curve=curve)


# -- killed densities ---------------------------------------------------
def _brownian_killed(spec: ProcessSpec, t, x, y):
    sg, mu = spec.sigma, spec.mu
    v = sg * sg * t

    def p(z):
        return np.exp(-0.5 * (z - mu * t) ** 2 / v) / np.sqrt(2 * pi * v)

    y = np.asarray(y, dtype=float)
    out = p(y - x) - np.exp(-2 * mu * x / sg ** 2) * p(y + x)
    return np.where(y > 0, out, 0.0)


def killed_density(spec: ProcessSpec, t: float, x: float, y_grid, config=None,
                   seed=None, workers: int = 1) -> DensityEstimate:
    """Killed transition density ``q*_t(x, .)`` on ``y_grid``.

    Brownian motion uses the reflection formula.  Stable specs use killed
    paths at two relative steps ``eps`` and ``eps/2`` and the first-order
    Richardson combination ``2 q(eps/2) - q(eps)``.
    """
    y = np.asarray(y_grid, dtype=float)
    if t <= 0 or x <= 0:
        raise ValueError("need t > 0 and x > 0")
    if spec.kind == BROWNIAN:
        v = _brownian_killed(spec, t, x, y)
        return DensityEstimate(DensityCurve(y, v, CLOSED_FORM), start_x0=x)
    if not spec.is_strictly_stable:
        raise UnsupportedClassification("killed densities are simulated for stable specs only")
    cfg = config or DEFAULT_CONFIG
    seed = resolve_seed(seed)
    coarse_eps, fine_eps = cfg.killed_eps
    reps = []
    bw = None
    for i, eps in enumerate((coarse_eps, fine_eps)):
        batches = _run_killed_batches(spec, x, t, cfg.killed_paths, eps, cfg, seed, workers,
                                      f"killed-{x!r}-{t!r}-{i}")
        if bw is None:
            pooled = np.concatenate([b.survivors() for b in batches])
            bw = silverman_bandwidth(np.log(pooled))
        reps.append(np.stack([kde4(b.survivors(), y, bw,
                                   np.full(int(b.survived.sum()), 1.0 / b.n_paths))
                              for b in batches]))
    rich = 2.0 * reps[1] - reps[0]
    m, se = batch_mean_stderr(rich)
    curve = DensityCurve(y, np.maximum(m, 0.0), MONTE_CARLO, stderr=se)
    return DensityEstimate(curve, cfg.killed_paths, bw, x, fine_eps,
                           {"coarse_mean": float(np.mean(reps[0])),
                            "fine_mean": float(np.mean(reps[1])),
                            "replicates": rich})


def killed_functional(spec: ProcessSpec, t: float, x: float, fn, config=None, seed=None,
                      workers: int = 1, purpose: str = "killed-functional"):
    """Richardson-extrapolated ``E_x[fn(X_t); t < tau_0^-]`` with batch stderr."""
    cfg = config or DEFAULT_CONFIG
    seed = resolve_seed(seed)
    reps = []
    for i, eps in enumerate(cfg.killed_eps):
        batches = _run_killed_batches(spec, x, t, cfg.killed_paths, eps, cfg, seed, workers,
                                      f"{purpose}-{x!r}-{t!r}-{i}")
        reps.append(np.array([np.sum(fn(b.survivors())) / b.n_paths for b in batches]))
    rich = 2.0 * reps[1] - reps[0]
    m, se = batch_mean_stderr(rich)
    return float(m), float(se)


def survival_ratio_check(spec: ProcessSpec, t: float = 1.0, x0: float = 0.01,
                         config=None, seed=None, workers: int = 1):
    """Renewal limit ``P_x0(tau_0^- > t) / h*(x0)`` against ``n*(t < zeta)``.

    Returns ``(estimate, stderr, target)``; the estimate is extrapolated in
    the step size.
    """
    lf = ladder_functions(spec)
    x = x0 * spec.length_scale
    if spec.kind == BROWNIAN:
        cfg = config or DEFAULT_CONFIG
        seed = resolve_seed(seed)
        batches = _run_killed_batches(spec, x, t, cfg.killed_paths, cfg.eps, cfg, seed,
                                      workers, "survival-ratio")
        r, e = batch_mean_stderr([b.survived.mean() / lf.h_star(x) for b in batches])
        return float(r), float(e), float(lf.n_star_tail(t))
    m, se = killed_functional(spec, t, x, lambda z: np.ones_like(z), config, seed, workers,
                              "survival-ratio")
    hs = lf.h_star(x)
    return m / hs, se / hs, float(lf.n_star_tail(t))
