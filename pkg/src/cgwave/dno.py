"""Dirichlet-Neumann operator machinery on the flattened strip.

The fluid column is mapped to the fixed strip Sigma = grid x [-1, 0] by
x3 = eta + (1 + eta) z (depth-1 normalization; general depth h is handled
by the exact rescaling G_h(eta) xi = (1/h) G_1(eta/h) xi(h .)).  In the
flattened coordinates the Laplace problem becomes div(M grad u) = 0 with

    M = [[E, 0, -a1], [0, E, -a2], [-a1, -a2, (1+|a|^2)/E]],

E = 1 + eta, a_i = (d_i eta)(1 + z).  The bottom condition reduces to
u_z = 0 exactly, and the surface conormal (M grad u)_3 at z = 0 is the
Dirichlet-Neumann value itself.

Discretization: Fourier in the horizontal, polynomial collocation on
Chebyshev extrema in the vertical, preconditioned residual-correction
sweeps against the flat (constant-coefficient) inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as _sfft

from .errors import ConfigurationError, ConvergenceError, DomainError, NumericError
from .spectral import GridSpec, RealField, make_grid, dealias, dx, dy, inner, mean

#: default vertical collocation count (intervals; nodes = nz + 1)
NZ_DEFAULT = 32
#: W^{1,inf} radius inside which the elliptic sweeps are trusted
W1INF_RADIUS = 0.5
#: default W^{1,inf} radius for the expansion of N(eta) in powers of eta
SERIES_RADIUS = 0.1


def _cheb(nz: int):
    """Chebyshev extrema nodes on [-1, 0] (z[0] = 0 top, z[nz] = -1 bottom)
    and the collocation differentiation matrix in z."""
    if nz < 2:
        raise ConfigurationError(f"nz must be at least 2, got {nz}")
    j = np.arange(nz + 1)
    t = np.cos(np.pi * j / nz)
    c = np.ones(nz + 1)
    c[0] = c[nz] = 2.0
    c *= (-1.0) ** j
    T = np.tile(t, (nz + 1, 1)).T
    dT = T - T.T + np.eye(nz + 1)
    D = np.outer(c, 1.0 / c) / dT
    D -= np.diag(D.sum(axis=1))
    z = (t - 1.0) / 2.0
    return z, 2.0 * D  # d/dz = 2 d/dt


def _cc_weights(nz: int) -> np.ndarray:
    """Clenshaw-Curtis weights on the z-nodes of [-1, 0] (for mean pinning)."""
    # weights on [-1,1] via the standard cosine-sum formula, halved for [-1,0]
    N = nz
    w = np.zeros(N + 1)
    for j in range(N + 1):
        theta = np.pi * j / N
        s = 0.0
        for m in range(1, N // 2 + 1):
            b = 2.0 if 2 * m < N else 1.0
            s += b * np.cos(2 * m * theta) / (4 * m * m - 1)
        w[j] = (2.0 / N) * (1.0 - s)
    w[0] /= 2.0
    w[N] /= 2.0
    return w / 2.0


class _StripOps:
    """Per-(grid, nz) precomputed transforms and batched vertical inverses."""

    def __init__(self, grid: GridSpec, nz: int):
        self.grid = grid
        self.nz = nz
        self.z, self.D = _cheb(nz)
        self.D2 = self.D @ self.D
        nxr = grid.nx // 2 + 1
        self.nxr = nxr
        self.K1r = grid.K1[:, :nxr].copy()
        self.K2r = grid.K2[:, :nxr].copy()
        self.mask_r = grid.dealias_mask[:, :nxr].copy()
        kk2 = (self.K1r**2 + self.K2r**2).ravel()
        self.kk2 = kk2
        self.kk = np.sqrt(kk2)
        nzp = nz + 1
        eye = np.eye(nzp)
        A = self.D2[None, :, :] - kk2[:, None, None] * eye[None, :, :]
        A[:, 0, :] = 0.0
        A[:, 0, 0] = 1.0          # Dirichlet row at z = 0
        A[:, nz, :] = self.D[nz]  # Neumann row at z = -1
        self.inv_dirichlet = np.linalg.inv(A)
        self._inv_neumann = None
        self.wz = _cc_weights(nz)

    @property
    def inv_neumann(self) -> np.ndarray:
        """Vertical inverses with Neumann data at z = 0; the k = 0 block
        pins the vertical mean instead of the (torus-incompatible) bottom
        Neumann condition."""
        if self._inv_neumann is None:
            nz, nzp = self.nz, self.nz + 1
            eye = np.eye(nzp)
            A = self.D2[None, :, :] - self.kk2[:, None, None] * eye[None, :, :]
            A[:, 0, :] = self.D[0]
            A[:, nz, :] = self.D[nz]
            zero = self.kk2 == 0.0
            A[zero, nz, :] = self.wz
            self._inv_neumann = np.linalg.inv(A)
        return self._inv_neumann


_strip_cache: dict = {}


def strip_ops(grid: GridSpec, nz: int) -> _StripOps:
    key = (grid.key, nz)
    ops = _strip_cache.get(key)
    if ops is None:
        ops = _StripOps(grid, nz)
        if len(_strip_cache) > 8:
            _strip_cache.clear()
        _strip_cache[key] = ops
    return ops


def _bsolve(inv: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Apply batched real inverses (M, n, n) to complex rhs (M, n)."""
    re = np.matmul(inv, rhs.real[..., None])[..., 0]
    im = np.matmul(inv, rhs.imag[..., None])[..., 0]
    return re + 1j * im


#: worker count for the batched strip transforms; results are reproducible
#: across worker counts (the batch is split across transforms)
FFT_WORKERS = 2


def _rfft2(a: np.ndarray) -> np.ndarray:
    return _sfft.rfft2(a, axes=(-2, -1), workers=FFT_WORKERS)


def _irfft2(a: np.ndarray, nx: int) -> np.ndarray:
    return _sfft.irfftn(a, s=(a.shape[-2], nx), axes=(-2, -1), workers=FFT_WORKERS)


@dataclass(frozen=True, eq=False)
class StripSolution:
    """Potential on the flattened strip: horizontal-Fourier (rfft layout)
    by vertical-collocation coefficients, plus solver diagnostics."""

    grid: GridSpec
    nz: int
    potential_hat: np.ndarray  # (nz+1, ny, nx//2+1) complex
    residual_history: tuple

    def potential_values(self) -> np.ndarray:
        """Physical samples on the strip, shape (nz+1, ny, nx)."""
        return _irfft2(self.potential_hat, self.grid.nx)

    def surface_values(self) -> np.ndarray:
        return np.fft.irfft2(self.potential_hat[0], s=self.grid.shape)


class _StripCoeffs:
    """Variable-coefficient fields of the flattened operator for one eta."""

    def __init__(self, grid: GridSpec, nz: int, eta: np.ndarray):
        ops = strip_ops(grid, nz)
        etax = np.real(np.fft.ifft2(np.fft.fft2(eta) * (1j * grid.K1)))
        etay = np.real(np.fft.ifft2(np.fft.fft2(eta) * (1j * grid.K2)))
        self.eta, self.etax, self.etay = eta, etax, etay
        one_pz = (1.0 + ops.z)[:, None, None]
        gmag2 = etax**2 + etay**2
        self.N13 = -one_pz * etax[None, :, :]
        self.N23 = -one_pz * etay[None, :, :]
        self.N33 = (one_pz**2 * gmag2[None, :, :] - eta[None, :, :]) / (1.0 + eta)[None, :, :]
        self.ops = ops


def _strip_residual(ops: _StripOps, co: _StripCoeffs, uhat: np.ndarray):
    """Residual of div(M grad u) with dealiased nonlinear fluxes; returns
    (rhat with boundary rows zeroed, relative size)."""
    nz, nxr = ops.nz, ops.nxr
    ny, nx = ops.grid.shape
    nzp = nz + 1
    Dm = ops.D

    u_z_hat = np.tensordot(Dm, uhat, axes=(1, 0))
    stack = np.concatenate([
        1j * ops.K1r[None] * uhat, 1j * ops.K2r[None] * uhat, u_z_hat], axis=0)
    phys = _irfft2(stack, nx)
    u_x1, u_x2, u_z = phys[:nzp], phys[nzp:2 * nzp], phys[2 * nzp:]

    F1 = co.eta[None] * u_x1 + co.N13 * u_z
    F2 = co.eta[None] * u_x2 + co.N23 * u_z
    F3 = co.N13 * u_x1 + co.N23 * u_x2 + co.N33 * u_z
    Fhat = _rfft2(np.concatenate([F1, F2, F3], axis=0))
    Fhat *= ops.mask_r[None]
    F1h, F2h, F3h = Fhat[:nzp], Fhat[nzp:2 * nzp], Fhat[2 * nzp:]

    d2u = np.tensordot(ops.D2, uhat, axes=(1, 0))
    ku = ops.kk2.reshape(1, ny, nxr) * uhat
    rhat = (d2u - ku) + 1j * ops.K1r[None] * F1h + 1j * ops.K2r[None] * F2h \
        + np.tensordot(Dm, F3h, axes=(1, 0))
    rhat[0] = 0.0
    # the bottom Neumann condition is a full-stencil row (it touches the top
    # node), so re-imposing Dirichlet data on a warm start violates it; track
    # the defect here and let the correction repair it
    rhat[nz] = np.tensordot(Dm[nz], uhat, axes=(0, 0))
    rnorm = np.sqrt(np.linalg.norm(rhat[1:nz]) ** 2 + np.linalg.norm(rhat[nz]) ** 2)
    denom = np.linalg.norm(d2u[1:nz]) + np.linalg.norm(ku[1:nz])
    # roundoff floor: near-constant potentials have both the residual and
    # the operator terms at rounding level
    floor = 1e-13 * np.linalg.norm(uhat) * max(1.0, float(np.max(ops.kk2)))
    if rnorm <= floor:
        return rhat, 0.0
    rel = float(rnorm / (denom + 1e-300))
    return rhat, rel


def solve_laplace_flattened(eta: RealField, dirichlet: RealField, nz: int = NZ_DEFAULT,
                            tol: float = 1e-10, max_sweeps: int = 60,
                            initial: Optional[StripSolution] = None) -> StripSolution:
    """Solve the flattened Laplace problem (depth-1 strip) with surface
    Dirichlet data and bottom Neumann condition.

    Iterative refinement against the flat vertical inverses; each sweep
    contracts the residual by roughly the W^{1,inf} size of eta.
    """
    grid = eta.grid
    ev = eta.values
    if np.min(ev) <= -1.0 * (1.0 - 1e-6):
        raise DomainError(f"surface touches the bottom: min(eta) = {np.min(ev):.6g} <= -1")
    from .spectral import w1inf_norm
    size = w1inf_norm(eta)
    if size > W1INF_RADIUS:
        raise DomainError(
            f"eta has W^(1,inf) size {size:.3g} > solver radius {W1INF_RADIUS}")

    ops = strip_ops(grid, nz)
    co = _StripCoeffs(grid, nz, ev)
    nz_, nxr = ops.nz, ops.nxr
    ny, nx = grid.shape
    nzp = nz_ + 1
    xih = np.fft.rfft2(dirichlet.values)

    if initial is not None and initial.potential_hat.shape == (nzp, ny, nxr):
        uhat = initial.potential_hat.copy()
        # re-impose the (possibly new) Dirichlet data exactly
        uhat[0] = xih
    else:
        rhs = np.zeros((ny * nxr, nzp), dtype=complex)
        rhs[:, 0] = xih.ravel()
        uhat = _bsolve(ops.inv_dirichlet, rhs).T.reshape(nzp, ny, nxr)

    history = []
    prev = np.inf
    for sweep in range(max_sweeps):
        rhat, rel = _strip_residual(ops, co, uhat)
        history.append(rel)
        if rel <= tol:
            return StripSolution(grid, nz, uhat, tuple(history))
        if rel > 0.9 * prev and sweep > 1:
            raise NumericError(
                "flattened-strip refinement stalled", diagnostics={"history": history})
        prev = rel
        # rhs rows: interior equation residual, zero at the (exact) Dirichlet
        # row, bottom-Neumann defect at the last row
        rhs = -rhat.reshape(nzp, ny * nxr).T.copy()
        rhs[:, 0] = 0.0
        delta = _bsolve(ops.inv_dirichlet, rhs).T.reshape(nzp, ny, nxr)
        uhat = uhat + delta
    raise NumericError("flattened-strip refinement did not reach tolerance "
                       f"{tol} in {max_sweeps} sweeps", diagnostics={"history": history})


# ---------------------------------------------------------------------------
# Depth rescaling
# ---------------------------------------------------------------------------

_scaled_grid_cache: dict = {}


def _unit_depth(grid: GridSpec, h: float) -> GridSpec:
    if h == 1.0:
        return grid
    key = (grid.key, h)
    g = _scaled_grid_cache.get(key)
    if g is None:
        g = make_grid(grid.nx, grid.ny, grid.Lx / h, grid.Ly / h, grid.dealias_fraction)
        _scaled_grid_cache[key] = g
    return g


def dno_apply(eta: RealField, xi: RealField, h: float = 1.0, nz: int = NZ_DEFAULT,
              tol: float = 1e-10, initial: Optional[StripSolution] = None,
              return_strip: bool = False):
    """G(eta) xi: the normal fluid velocity at the free surface.

    The trace formula (1+|grad eta|^2) u_z / (1+eta) - grad eta . grad xi
    is evaluated from the strip solution; the result is dealiased and has
    zero mean up to the solver tolerance.
    """
    grid = eta.grid
    g1 = _unit_depth(grid, h)
    eta1 = RealField(g1, eta.values / h) if h != 1.0 else eta
    # constants are in the kernel of G: fix the gauge exactly by removing
    # the mean of the Dirichlet data before solving
    xi1 = RealField(g1, xi.values - np.mean(xi.values))
    strip = solve_laplace_flattened(eta1, xi1, nz=nz, tol=tol, initial=initial)
    ops = strip_ops(g1, nz)

    uz_top = np.fft.irfft2(np.tensordot(ops.D[0], strip.potential_hat, axes=(0, 0)),
                           s=g1.shape)
    ev = eta1.values
    etax, etay = dx(eta1).values, dy(eta1).values
    xis = np.fft.fft2(xi1.values)
    xix = np.real(np.fft.ifft2(xis * (1j * g1.K1)))
    xiy = np.real(np.fft.ifft2(xis * (1j * g1.K2)))
    gvals = (1.0 + etax**2 + etay**2) * uz_top / (1.0 + ev) - (etax * xix + etay * xiy)
    out = dealias(RealField(grid, gvals / h))
    if return_strip:
        return out, strip
    return out


def dno_flat_apply(xi: RealField, h: float = 1.0) -> RealField:
    """G(0) xi through the closed-form symbol |k| tanh(h|k|)."""
    g = xi.grid
    kk = np.sqrt(g.Kabs2)
    sym = kk * np.tanh(h * kk)
    return RealField(g, np.real(np.fft.ifft2(np.fft.fft2(xi.values) * sym)))


def nd_flat_apply(w: RealField, h: float = 1.0) -> RealField:
    """N(0) w = G(0)^{-1} w on zero-mean data (coth(h|k|)/|k| symbol)."""
    from .symbols import x_coth_x
    g = w.grid
    kk2 = g.Kabs2
    safe = np.where(kk2 > 0.0, kk2, 1.0)
    sym = np.where(kk2 > 0.0, h * x_coth_x(h * np.sqrt(kk2)) / (h * h * safe), 0.0)
    c = np.fft.fft2(w.values) * sym
    return RealField(g, np.real(np.fft.ifft2(c)))


# ---------------------------------------------------------------------------
# Power-series Neumann-Dirichlet operator (strip recursion)
# ---------------------------------------------------------------------------

def _stable_cosh_profile(kk: np.ndarray, z: np.ndarray) -> np.ndarray:
    """cosh(kk (z+1)) / (kk sinh(kk)) for kk > 0, overflow-free:
    (e^{kk z} + e^{-kk (z+2)}) / (kk (1 - e^{-2 kk}))."""
    K = kk[None, :]
    Z = z[:, None]
    num = np.exp(K * Z) + np.exp(-K * (Z + 2.0))
    den = K * (1.0 - np.exp(-2.0 * K))
    return num / den


def nd_series_apply(eta: RealField, neumann_data: RealField, order: int,
                    h: float = 1.0, nz: int = NZ_DEFAULT,
                    radius: float = SERIES_RADIUS, return_diagnostics: bool = False):
    """N(eta) data by the strip power series sum_{n<=order} u^n|_{z=0}.

    u^0 is the flat solve with symbol coth|k|/|k|; u^n solves
    Delta u^n = d1 F1^n + d2 F2^n + dz F3^n with Neumann data F3^n at the
    surface, where the forcing fields are

        F1^n = -eta u^{n-1}_x1 + (1+z) eta_x1 u^{n-1}_z,
        F2^n = -eta u^{n-1}_x2 + (1+z) eta_x2 u^{n-1}_z,
        F3^n = eta sum_l (-eta)^l u^{n-1-l}_z
               + (1+z)(eta_x1 u^{n-1}_x1 + eta_x2 u^{n-1}_x2)
               - (1+z)^2 |grad eta|^2 sum_l (-eta)^l u^{n-2-l}_z,

    the order-n homogeneous pieces of the flattened flux -N grad u.
    """
    from .spectral import w1inf_norm, x1_zero_fraction, zero_mean
    grid = eta.grid
    g1 = _unit_depth(grid, h)
    eta1 = RealField(g1, eta.values / h) if h != 1.0 else eta
    data1 = RealField(g1, neumann_data.values * h) if h != 1.0 else neumann_data

    if abs(mean(data1)) > 1e-10 * (np.max(np.abs(data1.values)) + 1e-300):
        raise DomainError("nd_series_apply requires zero-mean Neumann data")
    size = w1inf_norm(eta1)
    if size > radius:
        raise DomainError(
            f"eta has W^(1,inf) size {size:.3g} beyond the series radius {radius}")

    ops = strip_ops(g1, nz)
    nz_, nxr, nzp = ops.nz, ops.nxr, ops.nz + 1
    ny, nx = g1.shape
    z = ops.z
    ev = eta1.values
    etax, etay = dx(eta1).values, dy(eta1).values
    gmag2 = etax**2 + etay**2
    one_pz = (1.0 + z)[:, None, None]

    # u^0: flat Neumann solve, zero constant mode
    xih = np.fft.rfft2(data1.values)
    kk = ops.kk.reshape(ny, nxr)
    prof = _stable_cosh_profile(np.where(ops.kk > 0, ops.kk, 1.0), z)  # (nzp, M)
    uhat = prof.reshape(nzp, ny, nxr) * xih[None]
    uhat[:, kk == 0.0] = 0.0

    surface_hat = uhat[0].copy()
    uz_list = [_irfft2(np.tensordot(ops.D, uhat, axes=(1, 0)), nx)]
    u_prev_hat = uhat
    term_norms = [float(np.sqrt(np.sum(np.abs(uhat[0])**2)))]
    neg_eta_pows = [np.ones_like(ev)]  # (-eta)^l

    for n in range(1, order + 1):
        while len(neg_eta_pows) < n:
            neg_eta_pows.append(neg_eta_pows[-1] * (-ev))
        stack = _irfft2(np.concatenate([
            1j * ops.K1r[None] * u_prev_hat, 1j * ops.K2r[None] * u_prev_hat], axis=0), nx)
        ux1, ux2 = stack[:nzp], stack[nzp:]
        uz_prev = uz_list[n - 1]

        s1 = np.zeros((nzp, ny, nx))
        for el in range(n):
            s1 += neg_eta_pows[el][None] * uz_list[n - 1 - el]
        F3 = ev[None] * s1 + one_pz * (etax[None] * ux1 + etay[None] * ux2)
        if n >= 2:
            s2 = np.zeros((nzp, ny, nx))
            for el in range(n - 1):
                s2 += neg_eta_pows[el][None] * uz_list[n - 2 - el]
            F3 -= one_pz**2 * gmag2[None] * s2
        F1 = -ev[None] * ux1 + one_pz * etax[None] * uz_prev
        F2 = -ev[None] * ux2 + one_pz * etay[None] * uz_prev

        Fhat = _rfft2(np.concatenate([F1, F2, F3], axis=0))
        Fhat *= ops.mask_r[None]
        F1h, F2h, F3h = Fhat[:nzp], Fhat[nzp:2 * nzp], Fhat[2 * nzp:]
        ghat = 1j * ops.K1r[None] * F1h + 1j * ops.K2r[None] * F2h \
            + np.tensordot(ops.D, F3h, axes=(1, 0))

        rhs = ghat.reshape(nzp, ny * nxr).T.copy()
        rhs[:, 0] = F3h[0].ravel()   # Neumann value at z = 0
        rhs[:, nz_] = 0.0            # bottom Neumann (mean pin for k = 0)
        un_hat = _bsolve(ops.inv_neumann, rhs).T.reshape(nzp, ny, nxr)

        tn = float(np.sqrt(np.sum(np.abs(un_hat[0])**2)))
        if term_norms and tn > term_norms[-1] and tn > 1e-13 * (term_norms[0] + 1e-300):
            raise ConvergenceError(
                f"series term norms grow at order {n} ({term_norms[-1]:.3e} -> {tn:.3e}); "
                "eta is outside the expansion radius",
                diagnostics={"term_norms": term_norms + [tn]})
        term_norms.append(tn)
        surface_hat += un_hat[0]
        uz_list.append(_irfft2(np.tensordot(ops.D, un_hat, axes=(1, 0)), nx))
        u_prev_hat = un_hat

    # N_h(eta) w = N_1(eta/h)[h w] with relabeled coordinates: the surface
    # values carry no further depth factor
    vals = np.fft.irfft2(surface_hat, s=g1.shape)
    out = zero_mean(RealField(grid, vals))
    if return_diagnostics:
        return out, {"term_norms": term_norms}
    return out


# ---------------------------------------------------------------------------
# Inverse DNO by preconditioned conjugate gradients
# ---------------------------------------------------------------------------

def dno_inverse_apply(eta: RealField, w: RealField, h: float = 1.0,
                      nz: int = NZ_DEFAULT, tol: float = 1e-10,
                      maxiter: int = 500, strip_tol: float = 1e-11) -> RealField:
    """Solve G(eta) u = w for zero-mean w, preconditioned by the flat
    Neumann-Dirichlet symbol; the zero-mean representative is returned."""
    wv = w.values
    scale = float(np.max(np.abs(wv)) + 1e-300)
    if abs(mean(w)) > 1e-10 * scale:
        raise DomainError("dno_inverse_apply: right-hand side must have zero mean")

    grid = eta.grid

    def op(u: RealField) -> RealField:
        return dno_apply(eta, u, h=h, nz=nz, tol=strip_tol)

    def precond(r: RealField) -> RealField:
        return nd_flat_apply(r, h=h)

    x = RealField.zeros(grid)
    r = w
    znorm = np.sqrt(inner(w, w)) + 1e-300
    zfld = precond(r)
    p = zfld
    rz = inner(r, zfld)
    for it in range(maxiter):
        if np.sqrt(inner(r, r)) / znorm <= tol:
            from .spectral import zero_mean
            return zero_mean(x)
        Ap = op(p)
        denom = inner(p, Ap)
        if denom <= 0:
            raise NumericError("conjugate-direction breakdown: <p, G p> <= 0",
                               diagnostics={"iteration": it, "curvature": denom})
        alpha = rz / denom
        x = x + alpha * p
        r = r - alpha * Ap
        r = RealField(grid, r.values - np.mean(r.values))
        zfld = precond(r)
        rz_new = inner(r, zfld)
        p = zfld + (rz_new / rz) * p
        rz = rz_new
    raise NumericError(f"G(eta) inverse did not converge in {maxiter} iterations",
                       diagnostics={"relative_residual": float(np.sqrt(inner(r, r)) / znorm)})


# ---------------------------------------------------------------------------
# Variations of the DNO
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VariationCoeffs:
    """Coefficient fields of the first variation of G, and their steady
    (rho) variants when a wave speed is supplied."""

    a1x: RealField
    a1y: RealField
    a2: RealField
    rho1x: Optional[RealField] = None
    rho1y: Optional[RealField] = None
    rho2: Optional[RealField] = None


def variation_coeffs(eta: RealField, phi: RealField, c: Optional[float] = None,
                     h: float = 1.0, nz: int = NZ_DEFAULT, tol: float = 1e-10,
                     gphi: Optional[RealField] = None) -> VariationCoeffs:
    """a1 = grad phi - s grad eta and a2 = -s with
    s = (G(eta)phi + grad eta . grad phi)/(1 + |grad eta|^2).

    With c given, the rho fields substitute -c d1 eta for G(eta)phi (the
    steady relation), giving rho2 = (c d1 eta - grad eta . grad phi)/(1+..)
    and rho1 = grad phi - (-rho2) grad eta.  The coefficient fields are
    assembled pointwise (so rho2 (1+|grad eta|^2) = c d1 eta - grad eta .
    grad phi holds exactly); products formed with them downstream are
    dealiased at the point of use.
    """
    grid = eta.grid
    etax, etay = dx(eta), dy(eta)
    phix, phiy = dx(phi), dy(phi)
    denom = 1.0 + etax.values**2 + etay.values**2
    if gphi is None:
        gphi = dno_apply(eta, phi, h=h, nz=nz, tol=tol)
    s = (gphi.values + etax.values * phix.values + etay.values * phiy.values) / denom
    a1x = RealField(grid, phix.values - s * etax.values)
    a1y = RealField(grid, phiy.values - s * etay.values)
    a2 = RealField(grid, -s)
    if c is None:
        return VariationCoeffs(a1x, a1y, a2)
    srho = (-c * etax.values + etax.values * phix.values + etay.values * phiy.values) / denom
    rho1x = RealField(grid, phix.values - srho * etax.values)
    rho1y = RealField(grid, phiy.values - srho * etay.values)
    rho2 = RealField(grid, -srho)
    return VariationCoeffs(a1x, a1y, a2, rho1x, rho1y, rho2)


def dg_apply(eta: RealField, v: RealField, phi: RealField, h: float = 1.0,
             nz: int = NZ_DEFAULT, tol: float = 1e-10,
             coeffs: Optional[VariationCoeffs] = None) -> RealField:
    """DG(eta)[v] phi = -div(v a1) + G(eta)(a2 v)."""
    from .spectral import divergence
    if coeffs is None:
        coeffs = variation_coeffs(eta, phi, h=h, nz=nz, tol=tol)
    va1x = dealias(v * coeffs.a1x)
    va1y = dealias(v * coeffs.a1y)
    ga2v = dno_apply(eta, dealias(v * coeffs.a2), h=h, nz=nz, tol=tol)
    return RealField(eta.grid, -divergence(va1x, va1y).values + ga2v.values)


def d2g_quadform(eta: RealField, v: RealField, phi: RealField, h: float = 1.0,
                 nz: int = NZ_DEFAULT, tol: float = 1e-10) -> float:
    """<phi, D^2G(eta)[v,v] phi> = <v, a3 v> + 2 <a2 v, G(eta)(a2 v)>
    with a3 = -2 a2 div(a1)."""
    from .spectral import divergence
    co = variation_coeffs(eta, phi, h=h, nz=nz, tol=tol)
    diva1 = divergence(co.a1x, co.a1y)
    a3 = RealField(eta.grid, -2.0 * co.a2.values * diva1.values)
    a2v = dealias(v * co.a2)
    return inner(v, dealias(a3 * v)) + 2.0 * inner(a2v, dno_apply(eta, a2v, h=h, nz=nz, tol=tol))


def k_apply(eta: RealField, w: RealField, h: float = 1.0, nz: int = NZ_DEFAULT,
            tol: float = 1e-10) -> RealField:
    """K(eta) w = -d1 (G(eta)^{-1} d1 w); symmetric positive on zero-mean w."""
    s = dno_inverse_apply(eta, dx(w), h=h, nz=nz, tol=tol)
    return -dx(s)


def l_apply(eta: RealField, w: RealField, h: float = 1.0, nz: int = NZ_DEFAULT,
            tol: float = 1e-10) -> RealField:
    """L(eta) w = -d2 (G(eta)^{-1} d1 w)."""
    s = dno_inverse_apply(eta, dx(w), h=h, nz=nz, tol=tol)
    return -dy(s)
