"""Energy/momentum functionals, the augmented potential, and the
linearized operators around flat and solitary states.

Operator handles freeze their coefficient fields at construction, so each
apply is a pure function; re-linearization means building a new handle.
To keep every handle exactly symmetric on the grid, pointwise products are
projected onto the dealias band on both sides (inputs once on entry,
product outputs once on exit).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .params import PhysParams
from .spectral import (GridSpec, RealField, WaveState, X_SUBSPACE_TOL, dealias,
                       divergence, dx, dy, inner, integrate, make_grid,
                       project_x_subspace, x1_zero_fraction)
from .symbols import a_flat_symbol, c0_symbol, c_eps_symbol
from .waves import Q0_field_periodized
from . import dno as _dno


# ---------------------------------------------------------------------------
# Functionals
# ---------------------------------------------------------------------------

def functionals(state: WaveState, params: PhysParams, nz: int = _dno.NZ_DEFAULT,
                tol: float = 1e-10, gxi: Optional[RealField] = None) -> dict:
    """Kinetic, potential, total, momentum and augmented functionals.

    kinetic = 1/2 <xi, G(eta) xi>, potential = int[g eta^2/2
    + sigma(sqrt(1+|grad eta|^2) - 1)], momentum = int (d1 eta) xi,
    augmented = hamiltonian + c * momentum.
    """
    eta, xi = state.eta, state.xi
    if gxi is None:
        gxi = _dno.dno_apply(eta, xi, h=params.h, nz=nz, tol=tol)
    kinetic = 0.5 * inner(xi, gxi)
    ex, ey = dx(eta), dy(eta)
    pot_density = 0.5 * params.g * eta.values**2 + params.sigma * (
        np.sqrt(1.0 + ex.values**2 + ey.values**2) - 1.0)
    potential = float(np.sum(pot_density) * eta.grid.cell_area)
    momentum = inner(ex, xi)
    ham = kinetic + potential
    return {"kinetic": kinetic, "potential": potential, "hamiltonian": ham,
            "momentum": momentum, "augmented": ham + params.c * momentum}


def v_aug(eta: RealField, params: PhysParams, nz: int = _dno.NZ_DEFAULT) -> float:
    """Augmented potential V(eta) - (c^2/2) <d1 eta, G(eta)^{-1} d1 eta>
    (the minimum of H_c(eta, .) over the surface potential)."""
    ex, ey = dx(eta), dy(eta)
    pot = float(np.sum(0.5 * params.g * eta.values**2 + params.sigma * (
        np.sqrt(1.0 + ex.values**2 + ey.values**2) - 1.0)) * eta.grid.cell_area)
    if np.max(np.abs(ex.values)) == 0.0 and np.max(np.abs(ey.values)) == 0.0:
        return pot
    ginv = _dno.dno_inverse_apply(eta, ex, h=params.h, nz=nz)
    return pot - 0.5 * params.c**2 * inner(ex, ginv)


def dv_first(eta: RealField, v: RealField, params: PhysParams) -> float:
    """First variation of the potential energy along v."""
    ex, ey = dx(eta), dy(eta)
    vx, vy = dx(v), dy(v)
    root = np.sqrt(1.0 + ex.values**2 + ey.values**2)
    dens = params.g * eta.values * v.values + params.sigma * (
        ex.values * vx.values + ey.values * vy.values) / root
    return float(np.sum(dens) * eta.grid.cell_area)


def d2v_quadform(eta: RealField, v: RealField, params: PhysParams) -> float:
    """Second variation of the potential energy along v."""
    ex, ey = dx(eta), dy(eta)
    vx, vy = dx(v), dy(v)
    gg = ex.values**2 + ey.values**2
    dot = ex.values * vx.values + ey.values * vy.values
    dens = params.g * v.values**2 + params.sigma * (
        (vx.values**2 + vy.values**2) / np.sqrt(1.0 + gg)
        - dot**2 / (1.0 + gg) ** 1.5)
    return float(np.sum(dens) * eta.grid.cell_area)


# ---------------------------------------------------------------------------
# Transport and inertia operators at a state
# ---------------------------------------------------------------------------

def steady_xi(eta: RealField, params: PhysParams, nz: int = _dno.NZ_DEFAULT) -> RealField:
    """The minimizing surface potential xi = -c G(eta)^{-1} d1 eta."""
    return RealField(eta.grid, -params.c * _dno.dno_inverse_apply(
        eta, dx(eta), h=params.h, nz=nz).values)


def transport_apply(eta: RealField, xi: RealField, params: PhysParams,
                    v: RealField, nz: int = _dno.NZ_DEFAULT,
                    coeffs: Optional[_dno.VariationCoeffs] = None) -> RealField:
    """L_u v = c d1 v + DG(eta)[v] xi."""
    dg = _dno.dg_apply(eta, v, xi, h=params.h, nz=nz, coeffs=coeffs)
    return RealField(eta.grid, params.c * dx(v).values + dg.values)


def transport_adjoint_apply(eta: RealField, xi: RealField, params: PhysParams,
                            w: RealField, nz: int = _dno.NZ_DEFAULT,
                            coeffs: Optional[_dno.VariationCoeffs] = None) -> RealField:
    """Adjoint of the transport operator: -c d1 w + a1 . grad w + a2 G w."""
    if coeffs is None:
        coeffs = _dno.variation_coeffs(eta, xi, h=params.h, nz=nz)
    wx, wy = dx(dealias(w)), dy(dealias(w))
    gw = _dno.dno_apply(eta, dealias(w), h=params.h, nz=nz)
    vals = (-params.c * dx(w).values
            + coeffs.a1x.values * wx.values + coeffs.a1y.values * wy.values
            + coeffs.a2.values * gw.values)
    return dealias(RealField(eta.grid, vals))


def m_eta_apply(eta: RealField, xi: RealField, params: PhysParams, v: RealField,
                nz: int = _dno.NZ_DEFAULT,
                coeffs: Optional[_dno.VariationCoeffs] = None,
                inv_tol: float = 1e-10) -> RealField:
    """M_eta v = -(c d1 - rho1 . grad)[G(eta)^{-1}(c d1 v - div(v rho1))].

    Symmetric positive semidefinite: <v, M_eta v> = <U, G^{-1} U> with
    U = c d1 v - div(v rho1).
    """
    if coeffs is None:
        coeffs = _dno.variation_coeffs(eta, xi, c=params.c, h=params.h, nz=nz)
    vd = dealias(v)
    U = RealField(eta.grid, params.c * dx(vd).values
                  - divergence(dealias(vd * coeffs.rho1x), dealias(vd * coeffs.rho1y)).values)
    w = _dno.dno_inverse_apply(eta, U, h=params.h, nz=nz, tol=inv_tol)
    wd = dealias(w)
    wx, wy = dx(wd), dy(wd)
    vals = -params.c * dx(w).values + dealias(RealField(
        eta.grid, coeffs.rho1x.values * wx.values + coeffs.rho1y.values * wy.values)).values
    return RealField(eta.grid, vals)


def alpha_tensor(eta: RealField, sigma: float) -> tuple:
    """Capillary coefficient tensor sigma (1+|g|^2)^{-3/2}[(1+|g|^2) I - g g^T]."""
    ex, ey = dx(eta), dy(eta)
    gg = ex.values**2 + ey.values**2
    fac = sigma / (1.0 + gg) ** 1.5
    a11 = fac * (1.0 + gg - ex.values**2)
    a12 = -fac * ex.values * ey.values
    a22 = fac * (1.0 + gg - ey.values**2)
    return a11, a12, a22


def beta_coefficient(eta: RealField, params: PhysParams,
                     coeffs: _dno.VariationCoeffs) -> RealField:
    """beta = g - rho1 . grad rho2 + c d1 rho2 (rho2 differentiated
    spectrally after dealiasing)."""
    rho2d = dealias(coeffs.rho2)
    r2x, r2y = dx(rho2d), dy(rho2d)
    vals = (params.g
            - dealias(RealField(eta.grid, coeffs.rho1x.values * r2x.values
                                + coeffs.rho1y.values * r2y.values)).values
            + params.c * r2x.values)
    return RealField(eta.grid, vals)


def a_eta_apply(eta: RealField, xi: RealField, params: PhysParams, v: RealField,
                nz: int = _dno.NZ_DEFAULT,
                coeffs: Optional[_dno.VariationCoeffs] = None,
                inv_tol: float = 1e-10) -> RealField:
    """A(eta) v = -div(alpha grad v) + beta v - M_eta v."""
    if coeffs is None:
        coeffs = _dno.variation_coeffs(eta, xi, c=params.c, h=params.h, nz=nz)
    grid = eta.grid
    a11, a12, a22 = alpha_tensor(eta, params.sigma)
    vd = dealias(v)
    vx, vy = dx(vd), dy(vd)
    f1 = dealias(RealField(grid, a11 * vx.values + a12 * vy.values))
    f2 = dealias(RealField(grid, a12 * vx.values + a22 * vy.values))
    beta = beta_coefficient(eta, params, coeffs)
    local = -divergence(f1, f2).values + dealias(RealField(grid, beta.values * vd.values)).values
    m = m_eta_apply(eta, xi, params, vd, nz=nz, coeffs=coeffs, inv_tol=inv_tol)
    return RealField(grid, local - m.values)


def d2vaug_quadform(eta: RealField, params: PhysParams, v: RealField,
                    nz: int = _dno.NZ_DEFAULT) -> float:
    """Second variation of the augmented potential along v, assembled from
    the variational route (independent of the pointwise A(eta) form):

        D^2V[v,v] + 1/2 <D^2G(eta)[v,v] xi, xi> - <L_u v, G^{-1} L_u v>

    with xi the minimizing potential for eta."""
    xi = steady_xi(eta, params, nz=nz)
    lv = transport_apply(eta, xi, params, v, nz=nz)
    from .spectral import zero_mean
    lv0 = zero_mean(lv)
    ginv_lv = _dno.dno_inverse_apply(eta, lv0, h=params.h, nz=nz)
    return (d2v_quadform(eta, v, params)
            + 0.5 * _dno.d2g_quadform(eta, v, xi, h=params.h, nz=nz)
            - inner(lv0, ginv_lv))


def hessian_quadform(eta: RealField, xi: RealField, params: PhysParams,
                     v: RealField, w: RealField, nz: int = _dno.NZ_DEFAULT,
                     method: str = "raw") -> float:
    """Quadratic form of the augmented-Hamiltonian Hessian at (eta, xi).

    method="raw" assembles D^2V + 1/2<D^2G xi,xi> + <Gw,w> + 2<L v, w>;
    method="completed" uses the square-completed identity
    <C v,v> + <G(w + Bv), w + Bv> with Bv = G^{-1} L v.  The two agree
    identically for any state; gauge shifts of w change nothing.
    """
    if method not in ("raw", "completed"):
        raise ConfigurationError(f"unknown hessian assembly {method!r}")
    lv = transport_apply(eta, xi, params, v, nz=nz)
    base = d2v_quadform(eta, v, params) + 0.5 * _dno.d2g_quadform(eta, v, xi, h=params.h, nz=nz)
    gw = _dno.dno_apply(eta, w, h=params.h, nz=nz)
    if method == "raw":
        return base + inner(gw, w) + 2.0 * inner(lv, w)
    from .spectral import zero_mean
    lv0 = zero_mean(lv)
    bv = _dno.dno_inverse_apply(eta, lv0, h=params.h, nz=nz)
    wpb = RealField(eta.grid, w.values + bv.values)
    gwpb = _dno.dno_apply(eta, wpb, h=params.h, nz=nz)
    cpart = base - inner(lv0, bv)
    return cpart + inner(gwpb, wpb)


def hessian_block_apply(state: WaveState, params: PhysParams, v: RealField,
                        w: RealField, nz: int = _dno.NZ_DEFAULT) -> tuple:
    """The Hessian as a two-component operator,

        (v, w) -> (S v + L* w,  L v + G w),

    where S = g - div(alpha grad .) + a3/2 + a2 G(a2 .) collects the
    v-block of the raw quadratic form.  Used for constrained Rayleigh
    quotient reports."""
    eta, xi = state.eta, state.xi
    grid = eta.grid
    co = _dno.variation_coeffs(eta, xi, c=params.c, h=params.h, nz=nz)
    a11, a12, a22 = alpha_tensor(eta, params.sigma)
    vd = dealias(v)
    vx, vy = dx(vd), dy(vd)
    f1 = dealias(RealField(grid, a11 * vx.values + a12 * vy.values))
    f2 = dealias(RealField(grid, a12 * vx.values + a22 * vy.values))
    diva1 = divergence(co.a1x, co.a1y)
    a3half = dealias(RealField(grid, -co.a2.values * diva1.values))
    a2v = dealias(RealField(grid, co.a2.values * vd.values))
    ga2v = _dno.dno_apply(eta, a2v, h=params.h, nz=nz)
    sv = (params.g * vd.values - divergence(f1, f2).values
          + dealias(RealField(grid, a3half.values * vd.values)).values
          + dealias(RealField(grid, co.a2.values * ga2v.values)).values)
    lstar_w = transport_adjoint_apply(eta, xi, params, w, nz=nz, coeffs=co)
    first = RealField(grid, sv + lstar_w.values)
    lv = transport_apply(eta, xi, params, vd, nz=nz, coeffs=co)
    gw = _dno.dno_apply(eta, w, h=params.h, nz=nz)
    second = RealField(grid, lv.values + gw.values)
    return first, second


# ---------------------------------------------------------------------------
# Operator handles
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LinearOperatorHandle:
    """Matrix-free symmetric operator over RealField with frozen coefficients.

    apply is linear and symmetric; handles built on the admissible
    subspace X carry domain_note = "X" and compress through the k1 != 0
    projection.  refine (when present) rebuilds the same operator on a
    finer or enlarged grid for refinement studies.
    """

    kind: str
    grid: GridSpec
    _apply: Callable
    domain_note: str = ""
    continuum_edge: Optional[float] = None
    refine: Optional[Callable] = None
    meta: dict = dc_field(default_factory=dict)

    def apply(self, v: RealField) -> RealField:
        return self._apply(v)

    def __call__(self, v: RealField) -> RealField:
        return self._apply(v)

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        """Flat-array convenience wrapper used by the eigensolver."""
        arr_fn = getattr(self._apply, "apply_arr", None)
        if arr_fn is not None:
            return arr_fn(vec.reshape(self.grid.shape)).ravel()
        fld = RealField(self.grid, vec.reshape(self.grid.shape))
        return self._apply(fld).values.ravel()

    def project(self, vec: np.ndarray) -> np.ndarray:
        """Projection onto the handle's admissible subspace."""
        if self.domain_note != "X":
            return vec
        c = np.fft.rfft2(vec.reshape(self.grid.shape))
        c[:, 0] = 0.0
        return np.fft.irfft2(c, s=self.grid.shape).ravel()


def _x_compressed_multiplier(grid: GridSpec, symbol_vals: np.ndarray,
                             potential: Optional[np.ndarray]) -> Callable:
    """Compression v -> P_X [symbol + potential] P_X v to the admissible
    subspace X (k1 != 0 modes zeroed on entry and exit).

    The potential product is applied pointwise without a dealias mask: for
    a frozen linear operator the plain product is exactly symmetric, and
    chopping it while keeping the (k1^2 + k2^2/k1^2)-growing symbol
    unmasked would leave an uncancelled symbol tail on near-kernel fields.
    Internally runs on the real-transform half plane.
    """
    nxr = grid.nx // 2 + 1
    vals_r = np.ascontiguousarray(symbol_vals[:, :nxr])
    shape = grid.shape

    def apply_arr(vals2d: np.ndarray) -> np.ndarray:
        c = np.fft.rfft2(vals2d)
        c[:, 0] = 0.0
        out = c * vals_r
        if potential is not None:
            vd = np.fft.irfft2(c, s=shape)
            pc = np.fft.rfft2(potential * vd)
            pc[:, 0] = 0.0
            out += pc
        return np.fft.irfft2(out, s=shape)

    def apply(v: RealField) -> RealField:
        frac = x1_zero_fraction(v)
        if frac > 1e-6:
            raise DomainError(
                f"input has k1 = 0 content fraction {frac:.2e}; project onto X first")
        return RealField(grid, apply_arr(v.values))

    apply.apply_arr = apply_arr
    return apply


def _spectral_floor(grid: GridSpec, vals: np.ndarray, potential) -> float:
    """Guaranteed lower bound for symbol + potential on the X subspace."""
    sym = np.where(grid.K1 != 0.0, vals, np.inf)
    lo = float(np.min(sym))
    if potential is not None:
        lo -= float(np.max(np.abs(potential)))
    return lo


def _p_symbol_vals(grid: GridSpec, sigma: float) -> np.ndarray:
    k1, k2 = grid.K1, grid.K2
    safe = np.where(k1 != 0.0, k1, 1.0)
    return np.where(k1 != 0.0,
                    (sigma - 1.0 / 3.0) * k1**2 + 1.0 + (k2 / safe) ** 2, 0.0)


def l0_handle(sigma: float, grid: GridSpec) -> LinearOperatorHandle:
    """Free KP-I Hessian: multiplier (sigma-1/3)k1^2 + 1 + k2^2/k1^2 on X."""
    vals = _p_symbol_vals(grid, sigma)
    return LinearOperatorHandle(
        kind="L0", grid=grid, _apply=_x_compressed_multiplier(grid, vals, None),
        domain_note="X", continuum_edge=1.0,
        refine=lambda double_domain=False: l0_handle(sigma, _refined_grid(grid, double_domain)),
        meta={"sigma": sigma, "symbol_vals": vals, "pure_multiplier": True,
              "lower_bound": _spectral_floor(grid, vals, None)})


def _refined_grid(grid: GridSpec, double_domain: bool) -> GridSpec:
    if double_domain:
        return make_grid(2 * grid.nx, 2 * grid.ny, 2 * grid.Lx, 2 * grid.Ly,
                         grid.dealias_fraction)
    return make_grid(2 * grid.nx, 2 * grid.ny, grid.Lx, grid.Ly, grid.dealias_fraction)


def a0_handle(sigma: float, grid: GridSpec) -> LinearOperatorHandle:
    """KP-I lump linearization -(sigma-1/3) dxx + dx^{-2} dyy + 1 + 3 Q0,
    compressed to the discrete X subspace."""
    vals = _p_symbol_vals(grid, sigma)
    pot = 3.0 * Q0_field_periodized(sigma, grid).values
    return LinearOperatorHandle(
        kind="A0", grid=grid, _apply=_x_compressed_multiplier(grid, vals, pot),
        domain_note="X", continuum_edge=1.0,
        refine=lambda double_domain=False: a0_handle(sigma, _refined_grid(grid, double_domain)),
        meta={"sigma": sigma, "symbol_vals": vals, "pure_multiplier": False,
              "lower_bound": _spectral_floor(grid, vals, pot)})


def c_eps_handle(eps: float, sigma: float, grid: GridSpec) -> LinearOperatorHandle:
    """Rescaled flat-state multiplier C_eps on X."""
    vals = c_eps_symbol(grid.K1, grid.K2, eps, sigma)
    return LinearOperatorHandle(
        kind="C_eps", grid=grid, _apply=_x_compressed_multiplier(grid, vals, None),
        domain_note="X", continuum_edge=1.0 / (1.0 + eps**2),
        refine=lambda double_domain=False: c_eps_handle(eps, sigma, _refined_grid(grid, double_domain)),
        meta={"sigma": sigma, "eps": eps, "symbol_vals": vals, "pure_multiplier": True,
              "lower_bound": _spectral_floor(grid, vals, None)})


def b_eps_handle(eps: float, sigma: float, grid: GridSpec) -> LinearOperatorHandle:
    """B_eps = C_eps + 3 Q0 on X; converges to A0 as eps -> 0."""
    vals = c_eps_symbol(grid.K1, grid.K2, eps, sigma)
    pot = 3.0 * Q0_field_periodized(sigma, grid).values
    return LinearOperatorHandle(
        kind="B_eps", grid=grid, _apply=_x_compressed_multiplier(grid, vals, pot),
        domain_note="X", continuum_edge=1.0 / (1.0 + eps**2),
        refine=lambda double_domain=False: b_eps_handle(eps, sigma, _refined_grid(grid, double_domain)),
        meta={"sigma": sigma, "eps": eps, "symbol_vals": vals, "pure_multiplier": False,
              "lower_bound": _spectral_floor(grid, vals, pot)})


def a_flat_handle(params: PhysParams, grid: GridSpec) -> LinearOperatorHandle:
    """A(0): diagonal with symbol a(k) = g + sigma|k|^2 - c^2 k1^2/(|k|tanh(h|k|))."""
    vals = a_flat_symbol(grid.K1, grid.K2, params)

    def apply(v: RealField) -> RealField:
        return RealField(grid, np.real(np.fft.ifft2(np.fft.fft2(v.values) * vals)))

    from .symbols import spectral_edge
    return LinearOperatorHandle(
        kind="A_eta", grid=grid, _apply=apply,
        continuum_edge=spectral_edge(params).sigma_star,
        refine=lambda double_domain=False: a_flat_handle(params, _refined_grid(grid, double_domain)),
        meta={"params": params, "flat": True, "symbol_vals": vals,
              "pure_multiplier": True,
              "lower_bound": float(np.min(vals))})


def a_eta_handle(state: WaveState, params: PhysParams,
                 nz: int = _dno.NZ_DEFAULT, inv_tol: float = 1e-10) -> LinearOperatorHandle:
    """A(eta) at a frozen state; each apply performs one G^{-1} solve."""
    eta, xi = state.eta, state.xi
    co = _dno.variation_coeffs(eta, xi, c=params.c, h=params.h, nz=nz)
    from .symbols import spectral_edge

    def apply(v: RealField) -> RealField:
        return a_eta_apply(eta, xi, params, v, nz=nz, coeffs=co, inv_tol=inv_tol)

    return LinearOperatorHandle(
        kind="A_eta", grid=eta.grid, _apply=apply,
        continuum_edge=spectral_edge(params).sigma_star,
        meta={"params": params,
              "symbol_vals": a_flat_symbol(eta.grid.K1, eta.grid.K2, params),
              "pure_multiplier": False})


def m_eta_handle(state: WaveState, params: PhysParams,
                 nz: int = _dno.NZ_DEFAULT, inv_tol: float = 1e-10) -> LinearOperatorHandle:
    eta, xi = state.eta, state.xi
    co = _dno.variation_coeffs(eta, xi, c=params.c, h=params.h, nz=nz)

    def apply(v: RealField) -> RealField:
        return m_eta_apply(eta, xi, params, v, nz=nz, coeffs=co, inv_tol=inv_tol)

    return LinearOperatorHandle(kind="M_eta", grid=eta.grid, _apply=apply,
                                meta={"params": params})


def a0_apply(sigma: float, phi: RealField) -> RealField:
    """A0 phi with the X-subspace precondition enforced."""
    frac = x1_zero_fraction(phi)
    if frac > X_SUBSPACE_TOL:
        raise DomainError(
            f"phi has k1 = 0 content fraction {frac:.2e} above {X_SUBSPACE_TOL:.0e}; "
            "not in the admissible subspace X")
    return a0_handle(sigma, phi.grid).apply(phi)


def b_eps_apply(eps: float, sigma: float, phi: RealField) -> RealField:
    """B_eps phi with the X-subspace precondition enforced."""
    frac = x1_zero_fraction(phi)
    if frac > X_SUBSPACE_TOL:
        raise DomainError(
            f"phi has k1 = 0 content fraction {frac:.2e} above {X_SUBSPACE_TOL:.0e}; "
            "not in the admissible subspace X")
    return b_eps_handle(eps, sigma, phi.grid).apply(phi)
