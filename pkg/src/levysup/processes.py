"""Catalog of supported Lévy processes.

Three families are supported: Brownian motion with drift, strictly stable
processes and a stable subordinator minus a linear drift.  Each spec knows
its characteristic exponent ``Psi`` (with ``E exp(i xi X_t) = exp(-t Psi)``)
and how its half-lines are classified.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import atan, isfinite, pi, sqrt, tan
from typing import Mapping, Optional

import numpy as np

BROWNIAN = "brownian"
STABLE = "stable"
SMD = "subordinator_minus_drift"

_KIND_ALIASES = {
    "brownian": BROWNIAN,
    "bm": BROWNIAN,
    "stable": STABLE,
    "cauchy": STABLE,
    "subordinator_minus_drift": SMD,
    "subordinatorminusdrift": SMD,
    "smd": SMD,
}


class UnsupportedClassification(ValueError):
    """Raised when the catalog cannot certify the classification of a spec."""


@dataclass(frozen=True)
class ProcessSpec:
    """A Lévy process from the supported catalog.

    Use the constructors :func:`Brownian`, :func:`Stable` and
    :func:`SubordinatorMinusDrift` rather than instantiating directly.

    Attributes
    ----------
    kind : str
        One of ``"brownian"``, ``"stable"``, ``"subordinator_minus_drift"``.
    sigma, mu : float
        Volatility and drift of the Brownian family.
    alpha, beta, scale : float
        Index, skewness and scale of the stable part.
    drift_b : float
        Drift rate subtracted from the subordinator.
    negated : bool
        Only for the subordinator family: the process is ``b t - S_t``,
        the dual of ``S_t - b t``.
    """

    kind: str
    sigma: float = 1.0
    mu: float = 0.0
    alpha: float = 2.0
    beta: float = 0.0
    scale: float = 1.0
    drift_b: float = 0.0
    negated: bool = False

    # ------------------------------------------------------------------
    def char_exponent(self, xi):
        """Characteristic exponent ``Psi(xi)``, vectorised over ``xi``."""
        return char_exponent(self, xi)

    def dual(self) -> "ProcessSpec":
        """Spec of the dual process ``-X``."""
        if self.kind == BROWNIAN:
            return Brownian(self.sigma, -self.mu)
        if self.kind == STABLE:
            return Stable(self.alpha, -self.beta, self.scale)
        return ProcessSpec(SMD, alpha=self.alpha, beta=1.0, scale=self.scale,
                           drift_b=self.drift_b, negated=not self.negated)

    @property
    def is_symmetric(self) -> bool:
        if self.kind == BROWNIAN:
            return self.mu == 0.0
        if self.kind == STABLE:
            return self.beta == 0.0
        return False

    @property
    def is_cauchy(self) -> bool:
        return self.kind == STABLE and self.alpha == 1.0 and self.beta == 0.0

    @property
    def is_strictly_stable(self) -> bool:
        """True for processes with exact self-similarity ``X_t = t^{1/a} X_1``."""
        if self.kind == BROWNIAN:
            return self.mu == 0.0
        if self.kind == STABLE:
            return self.alpha != 1.0 or self.beta == 0.0
        return False

    @property
    def index(self) -> float:
        """Self-similarity index ``alpha`` (2 for Brownian)."""
        return 2.0 if self.kind == BROWNIAN else self.alpha

    @property
    def length_scale(self) -> float:
        """Typical size of ``X_1``; used to express MC start points."""
        if self.kind == BROWNIAN:
            return self.sigma
        return self.scale

    def label(self) -> str:
        if self.kind == BROWNIAN:
            return f"Brownian(sigma={self.sigma:g}, mu={self.mu:g})"
        if self.kind == STABLE:
            return f"Stable(alpha={self.alpha:g}, beta={self.beta:g}, scale={self.scale:g})"
        name = "DriftMinusSubordinator" if self.negated else "SubordinatorMinusDrift"
        return f"{name}(alpha={self.alpha:g}, scale={self.scale:g}, drift_b={self.drift_b:g})"

    def to_dict(self) -> dict:
        """Flat key-value form used by config files and JSON reports."""
        if self.kind == BROWNIAN:
            return {"kind": BROWNIAN, "sigma": self.sigma, "mu": self.mu}
        if self.kind == STABLE:
            return {"kind": STABLE, "alpha": self.alpha, "beta": self.beta,
                    "scale": self.scale}
        d = {"kind": SMD, "alpha": self.alpha, "scale": self.scale,
             "drift_b": self.drift_b}
        if self.negated:
            d["negated"] = True
        return d


def Brownian(sigma: float = 1.0, mu: float = 0.0) -> ProcessSpec:
    """Brownian motion ``sigma B_t + mu t``."""
    sigma, mu = float(sigma), float(mu)
    if not (sigma > 0 and isfinite(sigma)) or not isfinite(mu):
        raise ValueError("Brownian requires sigma > 0 and finite mu")
    return ProcessSpec(BROWNIAN, sigma=sigma, mu=mu)


def Stable(alpha: float, beta: float = 0.0, scale: float = 1.0) -> ProcessSpec:
    """Stable process with ``Psi(xi) = c^a |xi|^a (1 - i beta sgn(xi) tan(pi a/2))``.

    ``alpha = 2`` returns the equivalent Brownian spec with ``sigma = c sqrt(2)``.
    One-sided specs with ``alpha < 1`` and ``|beta| = 1`` are subordinators and
    are rejected.
    """
    alpha, beta, scale = float(alpha), float(beta) + 0.0, float(scale)
    if not (0.0 < alpha <= 2.0):
        raise ValueError("alpha must lie in (0, 2]")
    if not (-1.0 <= beta <= 1.0):
        raise ValueError("beta must lie in [-1, 1]")
    if not (scale > 0 and isfinite(scale)):
        raise ValueError("scale must be positive")
    if alpha == 2.0:
        return Brownian(sigma=scale * sqrt(2.0), mu=0.0)
    if alpha < 1.0 and abs(beta) == 1.0:
        raise ValueError("alpha < 1 with |beta| = 1 is a subordinator (monotone paths)")
    return ProcessSpec(STABLE, alpha=alpha, beta=beta, scale=scale)


def Cauchy(scale: float = 1.0) -> ProcessSpec:
    """Symmetric Cauchy process, ``Psi(xi) = c |xi|``."""
    return Stable(1.0, 0.0, scale)


def SubordinatorMinusDrift(alpha: float, scale: float = 1.0,
                           drift_b: float = 1.0) -> ProcessSpec:
    """``S_t - b t`` with ``S`` a positive ``alpha``-stable subordinator.

    The subordinator has Laplace exponent ``k lam^alpha`` with
    ``k = c^alpha / cos(pi alpha / 2)``.
    """
    alpha, scale, drift_b = float(alpha), float(scale), float(drift_b)
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if not (scale > 0 and isfinite(scale)):
        raise ValueError("scale must be positive")
    if not (drift_b > 0 and isfinite(drift_b)):
        raise ValueError("drift_b must be strictly positive")
    return ProcessSpec(SMD, alpha=alpha, beta=1.0, scale=scale, drift_b=drift_b)


def spec_from_dict(d: Mapping[str, object]) -> ProcessSpec:
    """Inverse of :meth:`ProcessSpec.to_dict`; accepts string values."""
    if "kind" not in d:
        raise ValueError("spec needs a 'kind' entry")
    raw = str(d["kind"]).strip().lower()
    if raw not in _KIND_ALIASES:
        raise ValueError(f"unknown spec kind {d['kind']!r}")
    kind = _KIND_ALIASES[raw]

    def num(key, default):
        v = d.get(key, None)
        return float(default if v is None or v == "" else v)

    if kind == BROWNIAN:
        return Brownian(num("sigma", 1.0), num("mu", 0.0))
    if kind == STABLE:
        if raw == "cauchy":
            return Stable(num("alpha", 1.0), num("beta", 0.0), num("scale", 1.0))
        if d.get("alpha") in (None, ""):
            raise ValueError("stable spec needs 'alpha'")
        return Stable(num("alpha", 1.0), num("beta", 0.0), num("scale", 1.0))
    spec = SubordinatorMinusDrift(num("alpha", 0.5), num("scale", 1.0), num("drift_b", 1.0))
    neg = str(d.get("negated", "false")).strip().lower() in ("1", "true", "yes")
    return spec.dual() if neg else spec


# ----------------------------------------------------------------------
def char_exponent(spec: ProcessSpec, xi):
    """Characteristic exponent ``Psi(xi)`` of ``spec``.

    Parameters
    ----------
    spec : ProcessSpec
    xi : float or array_like

    Returns
    -------
    complex or ndarray of complex
    """
    xi = np.asarray(xi, dtype=float)
    if spec.kind == BROWNIAN:
        out = 0.5 * spec.sigma ** 2 * xi ** 2 - 1j * spec.mu * xi
    elif spec.kind == STABLE:
        a, b, c = spec.alpha, spec.beta, spec.scale
        ax = np.abs(xi)
        if a == 1.0:
            cx = np.where(ax > 0, c * ax, 1.0)
            out = c * ax * (1 + 1j * b * (2 / pi) * np.sign(xi) * np.log(cx))
        else:
            out = (c * ax) ** a * (1 - 1j * b * np.sign(xi) * tan(pi * a / 2))
    else:
        a, c, bd = spec.alpha, spec.scale, spec.drift_b
        ax = np.abs(xi)
        out = (c * ax) ** a * (1 - 1j * np.sign(xi) * tan(pi * a / 2)) + 1j * bd * xi
        if spec.negated:
            out = np.conj(out)
    if out.ndim == 0:
        return complex(out)
    return out


@dataclass(frozen=True)
class RegularityProfile:
    """Regularity of half-lines and ladder-time drifts.

    ``d`` is the drift of the upward ladder time ``tau`` (positive exactly when
    ``(-inf, 0)`` is irregular), ``d_star`` the drift of ``tau*``.  ``gamma``
    is the rate of the exponential local time used in the irregular case,
    ``gamma = 1/d`` or ``1/d_star`` whichever is positive.
    """

    upward_regular: bool
    downward_regular: bool
    d: float
    d_star: float
    gamma: Optional[float]
    rho: Optional[float]
    provenance: Mapping[str, str] = field(default_factory=dict)


def zolotarev_rho(alpha: float, beta: float) -> float:
    """Positivity parameter ``P(X_1 > 0)`` of a strictly stable law."""
    if alpha == 1.0:
        if beta != 0.0:
            raise UnsupportedClassification("alpha = 1 with beta != 0 is not strictly stable")
        return 0.5
    return 0.5 + atan(beta * tan(pi * alpha / 2)) / (pi * alpha)


def spitzer_rho(spec: ProcessSpec) -> Optional[float]:
    """Spitzer index ``lim P(X_t >= 0)`` when it lies in ``(0, 1]``.

    Returns ``None`` for the subordinator family and for Brownian motion with
    negative drift (limit 0).
    """
    if spec.kind == BROWNIAN:
        if spec.mu == 0.0:
            return 0.5
        return 1.0 if spec.mu > 0 else None
    if spec.kind == STABLE:
        return zolotarev_rho(spec.alpha, spec.beta)
    return None


def classify_regularity(spec: ProcessSpec) -> RegularityProfile:
    """Regularity profile of a catalog spec.

    Raises
    ------
    UnsupportedClassification
        For ``alpha = 1`` with ``beta != 0`` (not strictly stable).
    """
    if spec.kind == BROWNIAN:
        return RegularityProfile(True, True, 0.0, 0.0, None, spitzer_rho(spec),
                                 {"d": "closed_form", "d_star": "closed_form"})
    if spec.kind == STABLE:
        rho = zolotarev_rho(spec.alpha, spec.beta)
        return RegularityProfile(True, True, 0.0, 0.0, None, rho,
                                 {"d": "closed_form", "d_star": "closed_form"})
    from .ladder import smd_constants

    k = smd_constants(spec)
    atom = 1.0 / (spec.drift_b * k.phi1)
    prov = {"d": "closed_form", "d_star": "derived_constant"}
    if spec.negated:
        return RegularityProfile(True, False, atom, 0.0, 1.0 / atom, None,
                                 {"d": "derived_constant", "d_star": "closed_form"})
    return RegularityProfile(False, True, 0.0, atom, 1.0 / atom, None, prov)


def stable_lambda(alpha: float, beta: float, scale: float) -> float:
    """Modulus ``lam`` with ``Psi(xi) = lam |xi|^a exp(-i pi a (rho - 1/2) sgn xi)``."""
    if alpha == 1.0:
        return scale
    return scale ** alpha * sqrt(1.0 + (beta * tan(pi * alpha / 2)) ** 2)

