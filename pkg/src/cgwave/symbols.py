"""Closed-form Fourier symbols and scalar spectral quantities.

Everything here is a plain function of wavenumbers, vectorized over numpy
arrays.  The transcendental building block x/tanh(x) is evaluated through
a Laurent series below a small-argument threshold to avoid cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError
from .params import PhysParams

#: below this argument x*coth(x) and the residual r use their series forms
_SERIES_CUT = 0.25


def x_coth_x(x):
    """x/tanh(x), stable near 0 (series 1 + x^2/3 - x^4/45 + ...)."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 0.0, x)
    with np.errstate(over="ignore"):
        direct = np.where(small, 1.0, xs / np.tanh(np.where(small, 1.0, xs)))
    series = 1.0 + x**2 / 3.0
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def dno_flat_symbol(k1, k2, h: float):
    """|k| tanh(h|k|), the flat-surface Dirichlet-Neumann symbol (0 at k=0)."""
    if h <= 0:
        raise DomainError(f"depth h must be positive, got {h}")
    kk = np.sqrt(np.asarray(k1, dtype=float) ** 2 + np.asarray(k2, dtype=float) ** 2)
    out = kk * np.tanh(h * kk)
    return out if out.ndim else float(out)


def nd_flat_symbol(k1, k2, h: float):
    """coth(h|k|)/|k|, the flat Neumann-Dirichlet symbol; k = 0 is excluded."""
    if h <= 0:
        raise DomainError(f"depth h must be positive, got {h}")
    kk2 = np.asarray(k1, dtype=float) ** 2 + np.asarray(k2, dtype=float) ** 2
    if np.any(kk2 == 0.0):
        raise DomainError("nd_flat_symbol is undefined at k = 0 (zero-mean data only)")
    kk = np.sqrt(kk2)
    out = x_coth_x(h * kk) / (h * kk2)
    return out if np.ndim(out) else float(out)


def a_flat_symbol(k1, k2, params: PhysParams):
    """Symbol of the flat-state linearized operator,

        a(k) = g + sigma|k|^2 - c^2 k1^2 / (|k| tanh(h|k|)).

    The transport factor k1^2/(|k| tanh(h|k|)) is 0-homogeneous near k = 0;
    at the lattice origin the convention a(0) = g is used (min-searches
    start from the first nonzero lattice point).
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    kk2 = k1**2 + k2**2
    kk = np.sqrt(kk2)
    origin = kk2 == 0.0
    safe2 = np.where(origin, 1.0, kk2)
    # k1^2/(|k| tanh(h|k|)) = (k1^2/|k|^2) * x_coth_x(h|k|)/h
    transport = (k1**2 / safe2) * x_coth_x(params.h * kk) / params.h
    out = params.g + params.sigma * kk2 - params.c**2 * np.where(origin, 0.0, transport)
    return out if out.ndim else float(out)


def transport_curve(k1, params: PhysParams):
    """m(k1) = sigma k1^2 - c^2 k1/tanh(h k1), the k2 = 0 section driving
    the continuum edge."""
    k1 = np.asarray(k1, dtype=float)
    out = params.sigma * k1**2 - (params.c**2 / params.h) * x_coth_x(params.h * k1)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class EdgeResult:
    """Continuum edge sigma_star = inf a(k) and where the infimum sits."""

    sigma_star: float
    regime: str  # "deep_bond" (b >= 1/3) or "shallow_bond" (b < 1/3)
    minimizer_k1: float


def _golden_min(f, a: float, b: float, tol: float) -> float:
    """Golden-section minimizer of a unimodal scalar function on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def spectral_edge(params: PhysParams, k1_tol: float = 1e-12) -> EdgeResult:
    """Infimum of a(k): g - g/lam in the deep-Bond regime (b >= 1/3), else
    g + min m(k1) by bracketed golden-section minimization."""
    if params.bond >= 1.0 / 3.0:
        return EdgeResult(sigma_star=params.g - params.g / params.lam,
                          regime="deep_bond", minimizer_k1=0.0)
    # m decreases below -c^2/h for small k1 and grows like sigma k1^2 - c^2 k1;
    # a bracket upper end safely past the quadratic turnaround:
    hi = 4.0 * params.c**2 / (params.sigma * params.h) + 10.0
    ks = np.linspace(0.0, hi, 8193)
    ms = transport_curve(ks, params)
    i = int(np.argmin(ms))
    if i == 0 or i == len(ks) - 1:
        raise NumericError(
            "shallow-bond minimization failed to bracket the interior minimum",
            diagnostics={"scan_hi": hi, "argmin_index": i, "m_min": float(ms[i])})
    kstar = _golden_min(lambda t: transport_curve(t, params), ks[i - 1], ks[i + 1], k1_tol)
    return EdgeResult(sigma_star=params.g + float(transport_curve(kstar, params)),
                      regime="shallow_bond", minimizer_k1=float(kstar))


def r_residual(s):
    """r(s) = 1 + s^2/3 - s/tanh(s); nonnegative, r(0) = 0, ~ s^4/45 near 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("r_residual is defined for s >= 0")
    small = s < _SERIES_CUT
    s2 = s * s
    series = s2 * s2 * (1.0 / 45.0 - s2 * (2.0 / 945.0 - s2 * (1.0 / 4725.0 - s2 * 2.0 / 93555.0)))
    direct = 1.0 + s2 / 3.0 - x_coth_x(np.where(small, 1.0, s))
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def c_eps_symbol(k1, k2, eps: float, sigma: float):
    """Rescaled flat symbol in the strong-tension regime (g = h = 1):

        C_eps(k) = sigma(k1^2 + eps^2 k2^2) + 1/eps^2
                   - (1+eps^2)^{-1} k1^2 / (|k_eps| tanh|k_eps|),

    with |k_eps| = eps*sqrt(k1^2 + eps^2 k2^2).  Evaluated through the
    cancellation-free decomposition

        (sigma - 1/(3(1+eps^2))) k1^2 + sigma eps^2 k2^2
        + (k1^2 + (1+eps^2)k2^2) / ((1+eps^2)(k1^2 + eps^2 k2^2))
        + (1+eps^2)^{-1} (k1^2/|k_eps|^2) r(|k_eps|),

    which makes the pointwise lower bound 1/(1+eps^2) manifest.  At the
    lattice origin the k2 = 0 directional limit 1/(1+eps^2) is returned.
    """
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    ep2 = eps * eps
    one = 1.0 + ep2
    kap2 = k1**2 + ep2 * k2**2
    origin = kap2 == 0.0
    safe = np.where(origin, 1.0, kap2)
    t1 = (sigma - 1.0 / (3.0 * one)) * k1**2
    t2 = sigma * ep2 * k2**2
    t3 = np.where(origin, 1.0 / one, (k1**2 + one * k2**2) / (one * safe))
    keps = eps * np.sqrt(kap2)
    t4 = (k1**2 / (ep2 * safe)) * r_residual(keps) / one
    out = t1 + t2 + t3 + np.where(origin, 0.0, t4)
    return out if out.ndim else float(out)


def c0_symbol(k1, k2, sigma: float):
    """Limit symbol (sigma - 1/3) k1^2 + 1 + k2^2/k1^2; requires k1 != 0."""
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    if np.any(k1 == 0.0):
        raise DomainError("c0_symbol requires k1 != 0")
    out = (sigma - 1.0 / 3.0) * k1**2 + 1.0 + (k2 / k1) ** 2
    return out if out.ndim else float(out)


def resolvent_kernel_symbol(k1, k2, sigma: float, lam: float):
    """k1^2 / ((sigma - 1/3) k1^4 + (1 - lam) k1^2 + k2^2), for lam < 1.

    Vanishes on k1 = 0 (including the origin) and is bounded for lam < 1,
    sigma > 1/3.
    """
    if lam >= 1.0:
        raise DomainError(f"resolvent kernel needs lam < 1, got {lam}")
    if sigma <= 1.0 / 3.0:
        raise DomainError(f"resolvent kernel needs sigma > 1/3, got {sigma}")
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    num = k1**2
    den = (sigma - 1.0 / 3.0) * k1**4 + (1.0 - lam) * k1**2 + k2**2
    zero = num == 0.0
    out = np.where(zero, 0.0, num / np.where(den == 0.0, 1.0, den))
    return out if out.ndim else float(out)
