"""Matrix-free symmetric eigensolver for operator handles.

lowest_eigenpairs runs shift-invert Lanczos with full reorthogonalization.
The shift is placed strictly below the lowest Ritz estimate so that
(Op - shift) stays positive definite and the inner solves are plain
conjugate gradients preconditioned by the handle's diagonal symbol (they
collapse to a closed-form multiplier inverse when the handle has no
potential part).  dense_oracle materializes small grids column by column
and calls the LAPACK symmetric eigendecomposition as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DomainError, InconclusiveError, NumericError
from .linops import LinearOperatorHandle
from .spectral import RealField

#: hard cap on the number of requested pairs
M_MAX = 12
#: eigenvalues closer than this are treated as one multiplet when counting
MULTIPLET_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    """Computed eigenpairs with residuals and solver provenance."""

    eigenvalues: tuple
    residuals: tuple
    eigenvectors: np.ndarray  # columns, flat grid layout
    continuum_edge: Optional[float]
    grid_meta: dict
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def discrete_candidates(self) -> tuple:
        """Eigenvalues strictly below the continuum edge."""
        if self.continuum_edge is None:
            return tuple(True for _ in self.eigenvalues)
        return tuple(ev < self.continuum_edge for ev in self.eigenvalues)


def _symmetry_check(op: LinearOperatorHandle, rng: np.random.Generator) -> None:
    n = op.grid.nx * op.grid.ny
    u = op.project(rng.standard_normal(n))
    v = op.project(rng.standard_normal(n))
    au = op.matvec(u)
    av = op.matvec(v)
    lhs, rhs = float(u @ av), float(au @ v)
    scale = np.linalg.norm(au) * np.linalg.norm(v) + 1e-300
    if abs(lhs - rhs) > 1e-7 * scale:
        raise DomainError(
            f"operator is not symmetric: <u,Av> - <Au,v> = {lhs - rhs:.3e} "
            f"against scale {scale:.3e}")


class _ShiftedSolver:
    """Inner solves of (Op - tau) x = b by symbol inverse or PCG."""

    def __init__(self, op: LinearOperatorHandle, tau: float, tol: float = 1e-11,
                 maxiter: int = 600):
        self.op, self.tau, self.tol, self.maxiter = op, tau, tol, maxiter
        vals = op.meta.get("symbol_vals")
        self.pure_multiplier = bool(op.meta.get("pure_multiplier", False))
        self.in_x = op.domain_note == "X"
        if vals is not None:
            den = vals - tau
            safe = np.where(den != 0.0, den, 1.0)
            inv = np.where(den != 0.0, 1.0 / safe, 0.0)
            nxr = op.grid.nx // 2 + 1
            self.pre_inv = np.ascontiguousarray(inv[:, :nxr])
        else:
            self.pre_inv = None
        self.applies = 0

    def _precond(self, r: np.ndarray) -> np.ndarray:
        """Apply the shifted-symbol inverse fused with the X projection."""
        g = self.op.grid
        if self.pre_inv is None:
            if not self.in_x:
                return r.copy()
            return self.op.project(r)
        c = np.fft.rfft2(r.reshape(g.shape))
        c *= self.pre_inv
        if self.in_x:
            c[:, 0] = 0.0
        return np.fft.irfft2(c, s=g.shape).ravel()

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.pure_multiplier and self.pre_inv is not None:
            return self._precond(b)
        x = np.zeros_like(b)
        r = b.copy()
        z = self._precond(r)
        p = z.copy()
        rz = float(r @ z)
        bnorm = np.linalg.norm(b) + 1e-300
        for _ in range(self.maxiter):
            if np.linalg.norm(r) / bnorm <= self.tol:
                return x
            ap = self.op.matvec(p) - self.tau * p
            self.applies += 1
            pap = float(p @ ap)
            if pap <= 0.0:
                raise NumericError("shifted operator lost positive definiteness",
                                   diagnostics={"tau": self.tau, "curvature": pap})
            alpha = rz / pap
            x += alpha * p
            r -= alpha * ap
            z = self._precond(r)
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        raise NumericError("inner conjugate-gradient solve stalled",
                           diagnostics={"tau": self.tau,
                                        "relative_residual": float(np.linalg.norm(r) / bnorm)})


def _ritz_estimate(op: LinearOperatorHandle, rng: np.random.Generator,
                   steps: int = 25) -> float:
    """Shift-inverted pre-pass at the guaranteed-safe shift for a sharp
    lowest-eigenvalue estimate (plain Lanczos converges poorly at the low
    end when the symbol spans many decades)."""
    floor = op.meta.get("lower_bound")
    tau = (floor - 0.5) if floor is not None else None
    if tau is None:
        # no potential bound available: crude power-style probe on -Op
        n = op.grid.nx * op.grid.ny
        q = op.project(rng.standard_normal(n))
        q /= np.linalg.norm(q)
        est = float(q @ op.matvec(q))
        for _ in range(steps):
            y = op.matvec(q)
            est = min(est, float(q @ y))
            q = op.project(y - est * q)
            nq = np.linalg.norm(q)
            if nq < 1e-12:
                break
            q /= nq
        return est
    solver = _ShiftedSolver(op, tau, tol=1e-6, maxiter=200)
    n = op.grid.nx * op.grid.ny
    q = op.project(rng.standard_normal(n))
    q /= np.linalg.norm(q)
    Q = [q]
    alphas, betas = [], []
    for j in range(steps):
        y = solver.solve(Q[j])
        a = float(Q[j] @ y)
        y -= a * Q[j]
        if j > 0:
            y -= betas[-1] * Q[j - 1]
        for qq in Q:
            y -= (qq @ y) * qq
        b = np.linalg.norm(y)
        alphas.append(a)
        if b < 1e-12 or j == steps - 1:
            break
        betas.append(b)
        Q.append(op.project(y / b))
    T = np.diag(alphas)
    if betas:
        T += np.diag(betas[:len(alphas) - 1], 1) + np.diag(betas[:len(alphas) - 1], -1)
    theta_max = float(np.max(np.linalg.eigvalsh(T)))
    return tau + 1.0 / theta_max


def lowest_eigenpairs(op: LinearOperatorHandle, m: int, tol: float = 1e-8,
                      seed: int = 0, max_steps: int = 320,
                      shift: Optional[float] = None) -> SpectrumReport:
    """The m smallest eigenvalues of a symmetric handle with residuals
    ||Op v - lambda v||/||v|| <= tol; deterministic for a fixed seed."""
    if m < 1 or m > M_MAX:
        raise ConfigurationError(f"m must lie in [1, {M_MAX}], got {m}")
    rng = np.random.default_rng(seed)
    _symmetry_check(op, rng)

    lo_est = _ritz_estimate(op, rng)
    floor = op.meta.get("lower_bound")
    if shift is None:
        # strictly below the lowest eigenvalue so the shifted operator stays
        # positive definite; the pre-pass estimate approaches from above
        tau = lo_est - max(0.5, 0.1 * abs(lo_est))
    else:
        tau = shift
    solver = _ShiftedSolver(op, tau)

    n = op.grid.nx * op.grid.ny
    q0 = op.project(rng.standard_normal(n))
    q0 /= np.linalg.norm(q0)
    Q = [q0]
    alphas: list = []
    betas: list = []
    history = []

    def _current_pairs():
        k = len(alphas)
        T = np.diag(alphas)
        if k > 1:
            T += np.diag(betas[:k - 1], 1) + np.diag(betas[:k - 1], -1)
        theta, S = np.linalg.eigh(T)
        order = np.argsort(theta)[::-1]  # largest theta = closest to tau from above
        return theta[order], S[:, order]

    j = -1
    while j < max_steps - 1:
        j += 1
        try:
            y = solver.solve(Q[j])
        except NumericError as exc:
            if "positive definiteness" not in str(exc) or shift is not None:
                raise
            # shift was not below the true minimum: restart from the
            # guaranteed bound
            tau = (floor - 0.5) if floor is not None else tau - 4.0 * abs(tau)
            solver = _ShiftedSolver(op, tau)
            Q = [q0]
            alphas, betas, history = [], [], []
            j = -1
            continue
        a = float(Q[j] @ y)
        y -= a * Q[j]
        if j > 0:
            y -= betas[j - 1] * Q[j - 1]
        for qq in Q:          # full reorthogonalization, twice
            y -= (qq @ y) * qq
        for qq in Q:
            y -= (qq @ y) * qq
        b = float(np.linalg.norm(y))
        alphas.append(a)

        invariant_breakdown = b < 1e-13
        check_now = invariant_breakdown or (j + 1 >= max(2 * m, 8) and (j + 1) % 4 == 0) \
            or j == max_steps - 1
        if check_now:
            theta, S = _current_pairs()
            kk = min(m, len(theta))
            lam = tau + 1.0 / theta[:kk]
            Qm = np.stack(Q, axis=1)
            vecs = Qm @ S[:, :kk]
            resid = []
            for i in range(kk):
                v = vecs[:, i]
                nv = np.linalg.norm(v)
                r = np.linalg.norm(op.matvec(v) - lam[i] * v) / nv
                resid.append(float(r))
            history.append({"step": j + 1, "ritz": [float(x) for x in lam],
                            "residuals": resid})
            if kk == m and max(resid) <= tol:
                order = np.argsort(lam)
                lam = lam[order]
                vecs = vecs[:, order] / np.linalg.norm(vecs[:, order], axis=0)
                resid = [resid[i] for i in order]
                return SpectrumReport(
                    eigenvalues=tuple(float(x) for x in lam),
                    residuals=tuple(resid),
                    eigenvectors=vecs,
                    continuum_edge=op.continuum_edge,
                    grid_meta={"nx": op.grid.nx, "ny": op.grid.ny,
                               "Lx": op.grid.Lx, "Ly": op.grid.Ly, "kind": op.kind},
                    diagnostics={"lanczos_steps": j + 1, "shift": tau,
                                 "inner_applies": solver.applies, "tol": tol,
                                 "seed": seed})
            if invariant_breakdown:
                raise NumericError("Krylov space exhausted before convergence",
                                   diagnostics={"history": history})
        if b < 1e-13:
            continue
        betas.append(b)
        Q.append(op.project(y / b))
    raise NumericError("Krylov iteration stagnated", diagnostics={"history": history})


#: dense-oracle guard: largest grid that may be materialized
DENSE_MAX = 48 * 48
#: stiff penalty placed on the excluded subspace of compressed handles
DENSE_EXCLUDED_PENALTY = 1e4


def dense_oracle(op: LinearOperatorHandle) -> tuple:
    """Full spectrum of the materialized operator (small grids only).

    For X-compressed handles the excluded k1 = 0 subspace is penalized to
    DENSE_EXCLUDED_PENALTY so the low end of the returned spectrum is the
    spectrum of the compression.  Returns (eigenvalues, eigenvectors).
    """
    g = op.grid
    n = g.nx * g.ny
    if n > DENSE_MAX:
        raise ConfigurationError(
            f"dense_oracle memory guard: {g.nx}x{g.ny} exceeds {DENSE_MAX} unknowns")
    A = np.empty((n, n))
    e = np.zeros(n)
    for i in range(n):
        e[i] = 1.0
        pe = op.project(e)
        A[:, i] = op.matvec(pe) + DENSE_EXCLUDED_PENALTY * (e - pe)
        e[i] = 0.0
    A = 0.5 * (A + A.T)
    vals, vecs = np.linalg.eigh(A)
    return vals, vecs


def count_below(op: LinearOperatorHandle, threshold: float,
                probe_budget: int = M_MAX, tol: float = 1e-8, seed: int = 0,
                refinements: int = 1) -> int:
    """Number of eigenvalues below threshold, counting multiplicity,
    stable across `refinements` successive grid refinements.

    Escalates the requested pair count until the next eigenvalue clears the
    threshold (values within MULTIPLET_TOL of each other are kept in the
    same multiplet, so the cut never splits one).
    """
    if op.continuum_edge is not None and threshold >= op.continuum_edge:
        raise ConfigurationError(
            f"threshold {threshold} is not below the continuum edge {op.continuum_edge}")

    def _count_on(handle: LinearOperatorHandle) -> int:
        m = 4
        while True:
            rep = lowest_eigenpairs(handle, m=m, tol=tol, seed=seed)
            lam = np.asarray(rep.eigenvalues)
            cnt = int(np.sum(lam < threshold))
            if cnt < m:
                boundary_gap = abs(lam[min(cnt, m - 1)] - threshold)
                if cnt > 0 and abs(lam[cnt] - lam[cnt - 1]) < MULTIPLET_TOL and boundary_gap < MULTIPLET_TOL:
                    raise InconclusiveError(
                        "threshold splits a near-degenerate multiplet",
                        diagnostics={"eigenvalues": rep.eigenvalues})
                return cnt
            if m >= probe_budget:
                raise InconclusiveError(
                    f"all {m} computed eigenvalues sit below the threshold; "
                    "raise probe_budget", diagnostics={"eigenvalues": rep.eigenvalues})
            m = min(probe_budget, m + 4)

    counts = [_count_on(op)]
    handle = op
    for _ in range(refinements):
        if handle.refine is None:
            raise ConfigurationError("handle does not support refinement")
        handle = handle.refine()
        counts.append(_count_on(handle))
    if len(set(counts)) != 1:
        raise InconclusiveError(
            f"count is not refinement-stable: {counts}",
            diagnostics={"counts": counts})
    return counts[0]


def report_to_rows(report: SpectrumReport) -> list:
    """CSV rows (index, eigenvalue, residual) for the report writer."""
    return [(i, ev, res) for i, (ev, res) in
            enumerate(zip(report.eigenvalues, report.residuals))]
