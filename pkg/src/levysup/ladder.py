"""Ladder exponents, renewal functions and excursion lifetime tails.

Local times at the supremum and infimum are normalised so that
``kappa(1, 0) = kappa*(1, 0) = 1``; with this choice the Wiener-Hopf
factorisation reads ``kappa(q, 0) kappa*(q, 0) = q``.

Family-specific forms
---------------------
Brownian motion ``sigma B + mu t``
    With ``Phi`` the upward first-passage exponent and ``Phi_hat`` the
    downward one, ``kappa(q,0) = Phi(q)/Phi(1)``; the ladder height is the
    drift ``H_l = l / Phi(1)``, so ``h(x) = Phi(1) x`` (with exponential
    damping when the ladder process is killed).
Strictly stable
    ``kappa(q,0) = q^rho`` and ``kappa(0,lam) = Lambda^rho lam^{alpha rho}``
    where ``Psi(xi) = Lambda |xi|^alpha exp(-i pi alpha (rho - 1/2) sgn xi)``.
    Hence ``h(x) = x^{alpha rho} / (Lambda^rho Gamma(1 + alpha rho))``.
Subordinator minus drift ``S - b t``
    ``Y = -X`` is spectrally negative with Laplace exponent
    ``psi(th) = b th - k th^alpha`` and right inverse ``Phi_Y``.  The
    downward ladder height is a killed drift; the upward ladder time has
    zero drift and the downward one has drift ``d* = 1 / (b Phi_Y(1))``.
    Tails ``n``, ``n*`` and ``h`` are obtained by Laplace inversion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi, sqrt
from typing import Dict, Optional

import numpy as np
from scipy import special

from .numerics import talbot_invert
from .processes import (BROWNIAN, SMD, STABLE, ProcessSpec, UnsupportedClassification,
                        stable_lambda, zolotarev_rho)

CLOSED_FORM = "closed_form"
DERIVED = "derived_constant"
INVERSION = "numerical_inversion"
MC = "mc_estimated"


class UnavailableError(ValueError):
    """Raised when a ladder quantity is not defined for a spec."""


# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SMDConstants:
    """Constants of ``S - b t``: ``psi_Y(th) = b th - k th^alpha``."""

    alpha: float
    k: float
    b: float
    phi0: float
    phi1: float

    def phi(self, q):
        """Right inverse ``Phi_Y(q)`` of ``psi_Y``; accepts complex ``q``."""
        q = np.asarray(q)
        cplx = np.iscomplexobj(q)
        qq = q.astype(complex)
        th = qq / self.b + self.phi0
        a, k, b = self.alpha, self.k, self.b
        for _ in range(80):
            f = b * th - k * th ** a - qq
            fp = b - a * k * th ** (a - 1)
            step = f / fp
            th = th - step
            if np.all(np.abs(step) <= 1e-15 * np.abs(th) + 1e-300):
                break
        return th if cplx else th.real

    def psi(self, th):
        th = np.asarray(th)
        return self.b * th - self.k * th ** self.alpha


@lru_cache(maxsize=32)
def _smd_constants(alpha: float, scale: float, b: float) -> SMDConstants:
    k = scale ** alpha / np.cos(pi * alpha / 2)
    phi0 = (k / b) ** (1.0 / (1.0 - alpha))
    tmp = SMDConstants(alpha, k, b, phi0, 1.0)
    phi1 = float(tmp.phi(1.0))
    return SMDConstants(alpha, k, b, phi0, phi1)


def smd_constants(spec: ProcessSpec) -> SMDConstants:
    if spec.kind != SMD:
        raise ValueError("not a subordinator-minus-drift spec")
    return _smd_constants(spec.alpha, spec.scale, spec.drift_b)


# ----------------------------------------------------------------------
def _brownian_tail(t, sigma, mu):
    """Inverse Laplace transform of ``Phi(q)/q`` for ``sigma B + mu t``."""
    t = np.asarray(t, dtype=float)
    b = mu * mu / (2 * sigma * sigma)
    return (sqrt(2.0) / sigma) * np.exp(-b * t) / np.sqrt(pi * t) \
        + (abs(mu) * special.erf(np.sqrt(b * t)) - mu) / sigma ** 2


def _phi_brownian(q, sigma, mu):
    return (-mu + np.sqrt(mu * mu + 2 * sigma * sigma * np.asarray(q, dtype=float))) / sigma ** 2


def _killed_linear(x, slope, rate):
    """``slope (1 - e^{-rate x}) / rate`` with the ``rate = 0`` limit."""
    x = np.asarray(x, dtype=float)
    if rate == 0.0:
        return slope * x
    return slope * -np.expm1(-rate * x) / rate


def _as_out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


class LadderFunctions:
    """Ladder and excursion quantities of one spec.

    Attributes
    ----------
    spec : ProcessSpec
    rho : float or None
        Spitzer index where it lies in (0, 1].
    d, d_star : float
        Drifts of the ladder time processes ``tau`` and ``tau*``.
    provenance : dict
        ``closed_form``, ``derived_constant`` or ``numerical_inversion`` per field.
    """

    def __init__(self, spec: ProcessSpec):
        self.spec = spec
        self._dual = False
        if spec.kind == SMD and spec.negated:
            base = spec.dual()
            self._dual = True
            self._kind_spec = base
        else:
            self._kind_spec = spec
        ks = self._kind_spec
        self.provenance: Dict[str, str] = {}
        self.constants: Dict[str, float] = {}
        if ks.kind == BROWNIAN:
            self._init_brownian(ks)
        elif ks.kind == STABLE:
            self._init_stable(ks)
        else:
            self._init_smd(ks)
        if self._dual:
            self.d, self.d_star = self.d_star, self.d
            self.rho = None
            self.provenance = {_swap_name(k): v for k, v in self.provenance.items()}

    # -- construction -------------------------------------------------
    def _init_brownian(self, s: ProcessSpec):
        sg, mu = s.sigma, s.mu
        self._phi1 = float(_phi_brownian(1.0, sg, mu))
        self._phihat1 = float(_phi_brownian(1.0, sg, -mu))
        self._phi0 = float(_phi_brownian(0.0, sg, mu))
        self._phihat0 = float(_phi_brownian(0.0, sg, -mu))
        self.d = self.d_star = 0.0
        self.rho = 0.5 if mu == 0 else (1.0 if mu > 0 else None)
        self.constants.update(phi1=self._phi1, phihat1=self._phihat1,
                              h_slope=self._phi1, h_star_slope=self._phihat1)
        for f in ("kappa", "kappa_star", "h", "h_star", "h_prime", "h_star_prime",
                  "n_tail", "n_star_tail", "d", "d_star"):
            self.provenance[f] = CLOSED_FORM

    def _init_stable(self, s: ProcessSpec):
        a = s.alpha
        rho = zolotarev_rho(a, s.beta)
        lam = stable_lambda(a, s.beta, s.scale)
        self.rho = rho
        self.d = self.d_star = 0.0
        self._a = a
        self._ch = 1.0 / (lam ** rho * gamma(1 + a * rho))
        self._chs = 1.0 / (lam ** (1 - rho) * gamma(1 + a * (1 - rho)))
        self.constants.update(rho=rho, Lambda=lam, C_h=self._ch, C_h_star=self._chs)
        for f in ("kappa", "kappa_star", "n_tail", "n_star_tail", "d", "d_star"):
            self.provenance[f] = CLOSED_FORM
        for f in ("h", "h_star", "h_prime", "h_star_prime"):
            self.provenance[f] = DERIVED

    def _init_smd(self, s: ProcessSpec):
        k = smd_constants(s)
        self._smd = k
        self.rho = None
        self.d = 0.0
        self.d_star = 1.0 / (k.b * k.phi1)
        self.constants.update(k=k.k, Phi_Y0=k.phi0, Phi_Y1=k.phi1, d_star=self.d_star)
        self.provenance.update(kappa=DERIVED, kappa_star=DERIVED, d=CLOSED_FORM,
                               d_star=DERIVED, h_star=CLOSED_FORM, h_star_prime=CLOSED_FORM,
                               h=INVERSION, h_prime=INVERSION, n_tail=INVERSION,
                               n_star_tail=INVERSION)

    # -- exponents ----------------------------------------------------
    def _kappa_base(self, q, star: bool):
        s = self._kind_spec
        q = np.asarray(q, dtype=float)
        if np.any(q < 0):
            raise ValueError("kappa needs q >= 0")
        if s.kind == BROWNIAN:
            if star:
                return _phi_brownian(q, s.sigma, -s.mu) / self._phihat1
            return _phi_brownian(q, s.sigma, s.mu) / self._phi1
        if s.kind == STABLE:
            return q ** ((1 - self.rho) if star else self.rho)
        k = self._smd
        if star:
            return k.phi(q) / k.phi1
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(q > 0, q * k.phi1 / k.phi(np.where(q > 0, q, 1.0)), 0.0)
        return out

    def kappa_time(self, q):
        """``kappa(q, 0)``, Laplace exponent of the upward ladder time."""
        return _as_out(self._kappa_base(q, self._dual))

    def kappa_star_time(self, q):
        """``kappa*(q, 0)``, Laplace exponent of the downward ladder time."""
        return _as_out(self._kappa_base(q, not self._dual))

    # -- renewal functions --------------------------------------------
    def _h_base(self, x, star: bool, deriv: bool):
        s = self._kind_spec
        x = np.asarray(x, dtype=float)
        if s.kind == BROWNIAN:
            slope, rate = ((self._phihat1, self._phihat0) if star else (self._phi1, self._phi0))
            if deriv:
                return slope * np.exp(-rate * x)
            return _killed_linear(x, slope, rate)
        if s.kind == STABLE:
            a = self._a
            e = a * (1 - self.rho) if star else a * self.rho
            c = self._chs if star else self._ch
            if deriv:
                with np.errstate(divide="ignore"):
                    return e * c * x ** (e - 1)
            return c * x ** e
        k = self._smd
        if star:
            if deriv:
                return k.phi1 * np.exp(-k.phi0 * x)
            return _killed_linear(x, k.phi1, k.phi0)
        return _smd_h(k, x, deriv)

    def h(self, x):
        """Renewal function of the upward ladder height, ``int P(H_l <= x) dl``."""
        return _as_out(self._h_base(x, self._dual, False))

    def h_prime(self, x):
        return _as_out(self._h_base(x, self._dual, True))

    def h_star(self, x):
        """Renewal function of the downward ladder height."""
        return _as_out(self._h_base(x, not self._dual, False))

    def h_star_prime(self, x):
        return _as_out(self._h_base(x, not self._dual, True))

    # -- excursion tails ----------------------------------------------
    def _tail_base(self, t, star: bool):
        s = self._kind_spec
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("excursion tails need t > 0")
        if s.kind == BROWNIAN:
            if star:
                return _brownian_tail(t, s.sigma, -s.mu) / self._phihat1
            return _brownian_tail(t, s.sigma, s.mu) / self._phi1
        if s.kind == STABLE:
            if star:
                return t ** (self.rho - 1) / gamma(self.rho)
            return t ** (-self.rho) / gamma(1 - self.rho)
        return _smd_tail(self._smd, t, star)

    def n_tail(self, t):
        """``n(t < zeta)`` for excursions below the supremum."""
        return _as_out(self._tail_base(t, self._dual))

    def n_star_tail(self, t):
        """``n*(t < zeta)`` for excursions above the infimum."""
        return _as_out(self._tail_base(t, not self._dual))

    def h_zero(self) -> float:
        """``h(0)``: zero when ``(0, inf)`` is regular, ``d*`` otherwise."""
        return float(self.h(0.0))

    def table(self):
        """Rows ``(quantity, argument, value, provenance)`` for reports."""
        rows = [("d", "", self.d, self.provenance["d"]),
                ("d_star", "", self.d_star, self.provenance["d_star"]),
                ("rho", "", self.rho if self.rho is not None else float("nan"), CLOSED_FORM)]
        for name, val in sorted(self.constants.items()):
            rows.append((name, "", float(val), DERIVED))
        for q in (0.5, 1.0, 2.0):
            rows.append(("kappa", q, self.kappa_time(q), self.provenance["kappa"]))
            rows.append(("kappa_star", q, self.kappa_star_time(q), self.provenance["kappa_star"]))
        for t in (0.5, 1.0, 2.0, 4.0):
            rows.append(("n_tail", t, self.n_tail(t), self.provenance["n_tail"]))
            rows.append(("n_star_tail", t, self.n_star_tail(t), self.provenance["n_star_tail"]))
        for x in (0.1, 0.5, 1.0, 2.0):
            rows.append(("h", x, self.h(x), self.provenance["h"]))
            rows.append(("h_prime", x, self.h_prime(x), self.provenance["h_prime"]))
            rows.append(("h_star", x, self.h_star(x), self.provenance["h_star"]))
            rows.append(("h_star_prime", x, self.h_star_prime(x), self.provenance["h_star_prime"]))
        return rows


def _swap_name(name: str) -> str:
    pairs = {"kappa": "kappa_star", "h": "h_star", "h_prime": "h_star_prime",
             "n_tail": "n_star_tail", "d": "d_star"}
    inv = {v: k for k, v in pairs.items()}
    return pairs.get(name, inv.get(name, name))


# ----------------------------------------------------------------------
def _smd_tail(k: SMDConstants, t: np.ndarray, star: bool) -> np.ndarray:
    flat = np.atleast_1d(t).ravel()
    if star:
        dstar = 1.0 / (k.b * k.phi1)

        def F(q):
            return k.phi(q) / (q * k.phi1) - dstar
    else:
        def F(q):
            return k.phi1 / k.phi(q)
    out = talbot_invert(F, flat)
    return out.reshape(np.shape(t))


def _smd_h(k: SMDConstants, x: np.ndarray, deriv: bool) -> np.ndarray:
    """Upward renewal function of ``S - b t`` by Laplace inversion.

    ``int e^{-lam x} dh(x) = 1 / kappa(0, lam)`` with
    ``kappa(0, lam) = Phi_Y(1) (k lam^a - b lam) / (Phi_Y(0) - lam)``; the atom
    of ``dh`` at 0 is ``h(0) = d* = 1/(b Phi_Y(1))``.
    """
    dstar = 1.0 / (k.b * k.phi1)
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).ravel()
    out = np.full(flat.shape, dstar if not deriv else np.inf)
    pos = flat > 0

    # Taylor coefficients of g(lam) = k lam^a - b lam around its root phi0
    a, p0 = k.alpha, k.phi0
    coef = []
    fall = a
    for n in range(1, 9):
        c = k.k * fall * p0 ** (a - n)
        if n == 1:
            c -= k.b
        coef.append(c / special.factorial(n))
        fall *= (a - n)

    def inv_kappa(lam):
        lam = np.asarray(lam, dtype=complex)
        u = lam - p0
        near = np.abs(u) < 0.05 * p0
        quot = np.zeros(lam.shape, dtype=complex)
        for n in range(len(coef) - 1, -1, -1):
            quot = quot * u + coef[n]
        far = (k.k * lam ** a - k.b * lam) / np.where(near, 1.0, u)
        return -1.0 / (k.phi1 * np.where(near, quot, far))

    if np.any(pos):
        if deriv:
            out[pos] = talbot_invert(lambda lam: inv_kappa(lam) - dstar, flat[pos])
        else:
            out[pos] = talbot_invert(lambda lam: inv_kappa(lam) / lam, flat[pos])
    return out.reshape(x.shape)


@lru_cache(maxsize=64)
def ladder_functions(spec: ProcessSpec) -> LadderFunctions:
    """Ladder quantities of a catalog spec (cached per spec)."""
    if spec.kind == STABLE and spec.alpha == 1.0 and spec.beta != 0.0:
        raise UnsupportedClassification("alpha = 1 with beta != 0 is not strictly stable")
    return LadderFunctions(spec)


def excursion_tail(spec: ProcessSpec, t, side: str = "upper_n"):
    """``n(t < zeta)`` (``side="upper_n"``) or ``n*(t < zeta)`` (``"lower_n_star"``)."""
    lf = ladder_functions(spec)
    if side in ("upper_n", "n", "upper"):
        return lf.n_tail(t)
    if side in ("lower_n_star", "n_star", "n*", "lower"):
        return lf.n_star_tail(t)
    raise ValueError(f"unknown side {side!r}")


def kappa_time(spec: ProcessSpec, q, side: str = "upper"):
    """``kappa(q, 0)`` (``side="upper"``) or ``kappa*(q, 0)`` (``"lower"``)."""
    lf = ladder_functions(spec)
    if side in ("upper", "kappa"):
        return lf.kappa_time(q)
    if side in ("lower", "kappa_star", "star"):
        return lf.kappa_star_time(q)
    raise ValueError(f"unknown side {side!r}")
