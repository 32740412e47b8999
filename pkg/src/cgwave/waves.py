"""Closed-form lump profiles, leading-order solitary states, steady
residuals, and the convexity quantity d''(c) at leading order."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, NumericError
from .params import PhysParams
from .spectral import GridSpec, RealField, WaveState, dealias, dx, dy, inner, sobolev_norm
from . import dno as _dno

#: relative boundary contamination above which approx_solitary_state warns
BOUNDARY_WARN = 1e-6
#: and above which it refuses the grid (overridable per call)
BOUNDARY_ERROR = 1e-4


@dataclass(frozen=True)
class LumpProfile:
    """Algebraically decaying lump profiles in rescaled coordinates.

    q is the surface-potential profile, Q = dq/dx the elevation profile;
    q0, Q0 are their zero-eps limits.  With B = sigma(1+eps^2) - 1/3 > 0:

        q(x, y)  = -8 sqrt(1+eps^2) B x / (y^2 + (1+eps^2)(x^2 + 3B))
        Q(x, y)  = -8 sqrt(1+eps^2) B (y^2 + (1+eps^2)(3B - x^2)) / (...)^2
        q0(x, y) = -8 (sigma-1/3) x / (x^2 + y^2 + 3 sigma - 1)
        Q0(x, y) = -8 (sigma-1/3) (y^2 - x^2 + 3 sigma - 1) / (...)^2
    """

    sigma: float
    eps: float = 0.0

    def __post_init__(self):
        if self.eps < 0:
            raise ConfigurationError("eps must be nonnegative")
        if self.sigma * (1.0 + self.eps**2) <= 1.0 / 3.0:
            raise ConfigurationError(
                f"need sigma(1+eps^2) > 1/3 for a positive B, got sigma={self.sigma}")

    @property
    def B(self) -> float:
        return self.sigma * (1.0 + self.eps**2) - 1.0 / 3.0

    def q(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        one = 1.0 + self.eps**2
        den = y**2 + one * (x**2 + 3.0 * self.B)
        out = -8.0 * np.sqrt(one) * self.B * x / den
        return out if out.ndim else float(out)

    def Q(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        one = 1.0 + self.eps**2
        den = y**2 + one * (x**2 + 3.0 * self.B)
        out = -8.0 * np.sqrt(one) * self.B * (y**2 + one * (3.0 * self.B - x**2)) / den**2
        return out if out.ndim else float(out)

    def q0(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        beta = self.sigma - 1.0 / 3.0
        out = -8.0 * beta * x / (x**2 + y**2 + 3.0 * self.sigma - 1.0)
        return out if out.ndim else float(out)

    def Q0(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        beta = self.sigma - 1.0 / 3.0
        den = x**2 + y**2 + 3.0 * self.sigma - 1.0
        out = -8.0 * beta * (y**2 - x**2 + 3.0 * self.sigma - 1.0) / den**2
        return out if out.ndim else float(out)


def lump_eval(profile: LumpProfile, x, y, which: str):
    """Evaluate one of the closed-form profiles at (x, y)."""
    try:
        fn = {"q": profile.q, "Q": profile.Q, "q0": profile.q0, "Q0": profile.Q0}[which]
    except KeyError:
        raise ConfigurationError(f"unknown profile {which!r}; expected q, Q, q0 or Q0")
    return fn(x, y)


def default_half_length(sigma: float) -> float:
    """Default torus half-length 20*sqrt(3 sigma - 1) in lump coordinates;
    the r^{-2} tails of Q0 dominate the truncation error budget."""
    return 20.0 * np.sqrt(3.0 * sigma - 1.0)


def q0_field(sigma: float, grid: GridSpec) -> RealField:
    return RealField.from_function(grid, LumpProfile(sigma).q0)


def Q0_field(sigma: float, grid: GridSpec) -> RealField:
    return RealField.from_function(grid, LumpProfile(sigma).Q0)


def Q0_field_periodized(sigma: float, grid: GridSpec) -> RealField:
    """Torus periodization sum_j Q0(x + 2Lj) through the exact transform

        Q0hat(k) = -16 pi beta sqrt(a) k1^2 K1(sqrt(a)|k|)/|k|,  a = 3 sigma - 1,

    with the circular-mean value -8 pi beta at k = 0.  Multipliers with
    1/k1 factors (the antiderivative in the lump Hessian) amplify the
    small-k1 error of raw sampling; the periodized field is exact there.
    """
    from scipy.special import k1 as bessel_k1
    beta = sigma - 1.0 / 3.0
    a = 3.0 * sigma - 1.0
    root_a = np.sqrt(a)
    kap = np.sqrt(grid.Kabs2)
    origin = kap == 0.0
    safe = np.where(origin, 1.0, kap)
    qhat = -16.0 * np.pi * beta * root_a * grid.K1**2 * bessel_k1(root_a * safe) / safe
    qhat[origin] = -8.0 * np.pi * beta
    m = np.fft.fftfreq(grid.nx, 1.0 / grid.nx)
    n = np.fft.fftfreq(grid.ny, 1.0 / grid.ny)
    M, N = np.meshgrid(m, n)
    phase = (-1.0) ** (np.abs(M) + np.abs(N))
    c = qhat * phase / grid.area
    return RealField(grid, np.real(np.fft.ifft2(c * grid.nx * grid.ny)))


def _lump_state_periodized(params: PhysParams, grid: GridSpec) -> WaveState:
    """Exact torus periodization of the leading-order state.

    The surface potential decays only like 1/r and is odd in x1, so raw
    sampling leaves an O(q(L)) discontinuity at the torus seam that
    pollutes every spectral derivative.  Instead the sum of translates
    sum_j u(x + 2Lj) is synthesized through the closed-form continuum
    transforms (Poisson summation):

        qhat(k) = 16 pi i B sqrt(3B) k1 K1(sqrt(3B) kap_s)/kap_s,
        Qhat(k) = i k1 qhat(k),     kap_s = sqrt(k1^2 + (1+eps^2) k2^2),

    with K1 the modified Bessel function.  The k = 0 coefficient of the
    elevation uses the circular improper integral -16 pi B/(1 + sqrt(1+eps^2)).
    """
    from scipy.special import k1 as bessel_k1
    eps = params.eps
    B = params.B
    s = np.sqrt(1.0 + eps**2)
    root_a = np.sqrt(3.0 * B)
    # lattice in the rescaled (lump) variables: k1 -> k1/eps, k2 -> k2/eps^2
    K1l = grid.K1 / eps
    K2l = grid.K2 / eps**2
    kap = np.sqrt(K1l**2 + (s * K2l) ** 2)
    origin = kap == 0.0
    safe = np.where(origin, 1.0, kap)
    bess = bessel_k1(root_a * safe)
    qhat = 16j * np.pi * B * root_a * K1l * bess / safe
    qhat[origin] = 0.0
    Qhat = 1j * K1l * qhat
    Qhat[origin] = -16.0 * np.pi * B / (1.0 + s)
    # torus coefficients: continuum FT / physical area, with the checkerboard
    # phase translating the FFT index origin to x = (-Lx, -Ly)
    m = np.fft.fftfreq(grid.nx, 1.0 / grid.nx)
    n = np.fft.fftfreq(grid.ny, 1.0 / grid.ny)
    M, N = np.meshgrid(m, n)
    phase = (-1.0) ** (np.abs(M) + np.abs(N))
    # xi = eps q(scaled): FT = eps * (1/eps^3) qhat(k/eps-scaled)
    cxi = (1.0 / eps**2) * qhat * phase / grid.area
    ceta = (1.0 / eps) * Qhat * phase / grid.area
    nxy = grid.nx * grid.ny
    eta = RealField(grid, np.real(np.fft.ifft2(ceta * nxy)))
    xi = RealField(grid, np.real(np.fft.ifft2(cxi * nxy)))
    return WaveState(eta, xi)


def approx_solitary_state(params: PhysParams, grid: GridSpec,
                          boundary_tol: float = BOUNDARY_ERROR,
                          method: str = "periodized") -> WaveState:
    """Leading-order solitary state at t = 0:

        eta = eps^2 Q(eps x1, eps^2 x2),   xi = eps q(eps x1, eps^2 x2),

    realized on the torus either as the exact periodized translate sum
    (method="periodized", default) or by raw pointwise sampling
    (method="sampled"; leaves a seam discontinuity in xi).

    The grid must be large enough that the boundary values of eta are below
    BOUNDARY_WARN of its maximum (warning) and below boundary_tol (error).
    The O(eps^3) correction fields are not constructible in closed form;
    steady_residual quantifies the resulting defect instead.
    """
    eps = params.eps
    if not (0.0 < eps <= 0.3):
        raise DomainError(f"approx_solitary_state needs eps in (0, 0.3], got {eps}")
    if method == "periodized":
        state = _lump_state_periodized(params, grid)
        eta, xi = state.eta, state.xi
    elif method == "sampled":
        prof = LumpProfile(params.sigma, eps)
        X, Y = grid.meshgrid()
        eta = RealField(grid, eps**2 * prof.Q(eps * X, eps**2 * Y))
        xi = RealField(grid, eps * prof.q(eps * X, eps**2 * Y))
    else:
        raise ConfigurationError(f"unknown method {method!r}")

    emax = float(np.max(np.abs(eta.values))) + 1e-300
    edge = max(np.max(np.abs(eta.values[0, :])), np.max(np.abs(eta.values[:, 0])))
    contamination = float(edge / emax)
    if contamination > boundary_tol:
        raise DomainError(
            f"domain too small: boundary |eta| is {contamination:.2e} of max, "
            f"above the threshold {boundary_tol:.1e}")
    if contamination > BOUNDARY_WARN:
        warnings.warn(
            f"lump tails reach the boundary at {contamination:.2e} of max|eta|; "
            "truncation error may dominate", stacklevel=2)
    return WaveState(eta, xi)


def steady_residual(state: WaveState, params: PhysParams, nz: int = _dno.NZ_DEFAULT,
                    c: float = None) -> tuple:
    """L2 norms of the two traveling-wave equation residuals,

        -c d1 eta - G(eta) xi   and   -c d1 xi - (Bernoulli rhs),

    for the supplied state (zero for an exact steady wave)."""
    cval = params.c if c is None else c
    eta, xi = state.eta, state.xi
    gxi = _dno.dno_apply(eta, xi, h=params.h, nz=nz)
    r1 = RealField(eta.grid, -cval * dx(eta).values - gxi.values)

    r2 = RealField(eta.grid, -cval * dx(xi).values - _bernoulli_rhs(state, params, gxi).values)
    return sobolev_norm(r1, "L2"), sobolev_norm(r2, "L2")


def _bernoulli_rhs(state: WaveState, params: PhysParams, gxi: RealField) -> RealField:
    """Right-hand side of the xi equation (shared with the evolution)."""
    eta, xi = state.eta, state.xi
    grid = eta.grid
    ex, ey = dx(eta).values, dy(eta).values
    xx, xy = dx(xi).values, dy(xi).values
    gradeta2 = ex**2 + ey**2
    gradxi2 = xx**2 + xy**2
    num = (gxi.values + ex * xx + ey * xy) ** 2 - gradxi2 * gradeta2 - gradxi2
    quad = dealias(RealField(grid, num / (2.0 * (1.0 + gradeta2))))

    root = np.sqrt(1.0 + gradeta2)
    capx = dealias(RealField(grid, ex / root))
    capy = dealias(RealField(grid, ey / root))
    from .spectral import divergence
    capillary = divergence(capx, capy)
    return RealField(grid, quad.values - params.g * dealias(eta).values
                     + params.sigma * capillary.values)


def d_prime(state: WaveState, params: PhysParams) -> float:
    """Momentum P = integral of (d1 eta) xi; equals d'(c) on the wave family."""
    return inner(dx(state.eta), state.xi)


def _radial_rule(sigma: float, R: float, n_panel: int):
    """Composite Gauss-Legendre nodes on [0, R]: geometric panels from the
    lump core scale outward, so algebraic tails are resolved uniformly."""
    core = np.sqrt(3.0 * sigma - 1.0)
    edges = [0.0]
    e = 4.0 * core
    while e < R:
        edges.append(e)
        e *= 3.0
    edges.append(R)
    nodes, wts = np.polynomial.legendre.leggauss(n_panel)
    rs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        rs.append(0.5 * (b - a) * (nodes + 1.0) + a)
        ws.append(0.5 * (b - a) * wts)
    return np.concatenate(rs), np.concatenate(ws)


def lump_l2sq_quadrature(sigma: float, R: float = 400.0, n_r: int = 48,
                         n_theta: int = 64, max_refine: int = 5,
                         rtol: float = 1e-9) -> float:
    """integral of Q0^2 over the plane: panelled Gauss-Legendre in radius
    to R (n_r nodes per geometric panel), trapezoid in angle (exact: the
    integrand is a low trigonometric polynomial), plus an r^{-4} tail model
    fitted on [R/2, R].  R and the node counts grow per refinement level
    until two levels agree to rtol."""
    prof = LumpProfile(sigma)
    prev = None
    for level in range(max_refine):
        Rl = R * 2**level
        nth = n_theta * 2**level
        r, wr = _radial_rule(sigma, Rl, n_r + 16 * level)
        th = np.arange(nth) * (2.0 * np.pi / nth)
        Rm, Tm = np.meshgrid(r, th)
        q2 = prof.Q0(Rm * np.cos(Tm), Rm * np.sin(Tm)) ** 2
        ang = q2.sum(axis=0) * (2.0 * np.pi / nth)  # A(r)
        bulk = float(np.sum(ang * r * wr))
        sel = r >= Rl / 2.0
        coef = float(np.sum(ang[sel] * r[sel] ** 4 * wr[sel]) / np.sum(wr[sel]))
        tail = coef / (2.0 * Rl**2)
        total = bulk + tail
        if prev is not None and abs(total - prev) <= rtol * abs(total):
            return total
        prev = total
    raise NumericError("lump quadrature tail estimate did not stabilize",
                       diagnostics={"last": prev})


def d_second_leading(params: PhysParams, rtol: float = 1e-9) -> float:
    """Leading term of d''(c): eps^{-1} (1+eps^2)^{3/2} * integral(Q0^2)."""
    if params.eps <= 0:
        raise DomainError("d_second_leading needs the scaling regime (eps > 0)")
    i0 = lump_l2sq_quadrature(params.sigma, rtol=rtol)
    return (1.0 + params.eps**2) ** 1.5 / params.eps * i0
