"""Acceptance suite: one test per primary criterion, each at its stated
tolerance, printing one pass line per criterion.

Run with `pytest tests/test_acceptance.py -v -s`.  The conservation and
stability smoke test integrates to T = 200 and dominates the runtime.
"""

import numpy as np
import pytest

from cgwave.params import PhysParams
from cgwave.spectral import (RealField, WaveState, dealias, dx, dy, inner,
                             make_grid, project_x_subspace, sobolev_norms,
                             translate, zero_mean)
from cgwave.symbols import a_flat_symbol, spectral_edge, transport_curve
from cgwave.waves import (Q0_field_periodized, approx_solitary_state,
                          lump_l2sq_quadrature, d_second_leading)
from cgwave import dno, linops
from cgwave.eigensolve import count_below, dense_oracle, lowest_eigenpairs
from cgwave.evolve import f_norm_pair, run_evolution, step_midpoint
from cgwave.cli import even_bump_perturbation
from conftest import band_limited

L_LUMP = 20.0 * np.sqrt(2.0)  # default half-length for sigma = 1


def ok(name, detail=""):
    print(f"\nPASS {name}: {detail}")


class TestAcceptance:
    def test_spectral_edge_closed_form(self):
        """[PRIMARY] closed-form continuum edge and lattice consistency."""
        for eps in (0.05, 0.1, 0.2):
            for sigma in (0.5, 1.0, 2.0):
                p = PhysParams.kp_regime(sigma=sigma, eps=eps)
                res = spectral_edge(p)
                exact = eps**2 / (1.0 + eps**2)
                assert res.sigma_star == pytest.approx(exact, abs=1e-12)
        # lattice minimum of a(k) approaches the edge within lattice resolution
        p = PhysParams.kp_regime(sigma=1.0, eps=0.1)
        dk = np.pi / 200.0
        k1 = dk * np.arange(1, 4000)
        k2 = dk * np.arange(0, 60)
        K1, K2 = np.meshgrid(k1, k2)
        lattice_min = float(np.min(a_flat_symbol(K1, K2, p)))
        star = spectral_edge(p).sigma_star
        assert lattice_min >= star - 1e-12
        assert lattice_min <= star + 2.0 * p.sigma * dk**2
        ok("spectral-edge", f"sigma_star = eps^2/(1+eps^2) to 1e-12; "
           f"lattice min within {2.0 * p.sigma * dk**2:.1e}")

    def test_tanh_bound(self):
        """[PRIMARY] continued-fraction tanh bound and deep-Bond transport bound."""
        x = np.linspace(1e-12, 50.0, 10_000)
        assert np.all(np.tanh(x) >= 3.0 * x / (x**2 + 3.0) - 1e-15)
        p = PhysParams.kp_regime(sigma=1.0, eps=0.1)
        assert p.bond >= 1.0 / 3.0
        k1 = np.linspace(1e-12, 100.0, 10_000)
        assert np.all(transport_curve(k1, p) >= -p.c**2 / p.h - 1e-12)
        ok("tanh-bound", "10^4 samples each, both inequalities hold")

    def test_dno_triple_agreement(self, rng):
        """[PRIMARY] flat symbol vs elliptic solve vs series composition."""
        g = make_grid(64, 64, np.pi, np.pi)
        X, Y = g.meshgrid()
        # flat agreement: elliptic solve against the closed-form symbol
        xi = RealField(g, np.cos(X) + 0.4 * np.cos(2 * X + Y))
        flat_err = np.max(np.abs(
            dno.dno_apply(RealField.zeros(g), xi, nz=20, tol=1e-12).values
            - dno.dno_flat_apply(xi).values)) / np.max(np.abs(xi.values))
        assert flat_err <= 1e-6
        # curved surface: series composition G(eta) N(eta) w -> w through order 4
        eta = band_limited(g, rng, frac=0.12, amp=0.014)
        from cgwave.spectral import w1inf_norm
        assert w1inf_norm(eta) <= 0.05
        w = band_limited(g, rng, frac=0.2, zero_mean=True)
        errs = []
        for order in range(5):
            nd_w = dno.nd_series_apply(eta, w, order=order, nz=20)
            back = dno.dno_apply(eta, nd_w, nz=20, tol=1e-12)
            errs.append(np.max(np.abs(zero_mean(back).values - zero_mean(w).values))
                        / np.max(np.abs(w.values)))
        assert all(b < a for a, b in zip(errs[:-1], errs[1:]))
        assert errs[4] <= 1e-6
        ok("dno-triple-agreement",
           f"flat {flat_err:.1e}; composition errors {['%.1e' % e for e in errs]}")

    def test_variation_identities(self, rng):
        """[PRIMARY] DG/D2G finite-difference oracles and DG symmetry."""
        g = make_grid(64, 64, np.pi, np.pi)
        worst_dg, worst_d2g, worst_sym = 0.0, 0.0, 0.0
        for case in range(10):
            eta = band_limited(g, rng, frac=0.12, amp=0.015)
            phi = band_limited(g, rng, frac=0.12)
            v = band_limited(g, rng, frac=0.12)
            got = dno.dg_apply(eta, v, phi, nz=16, tol=1e-12)

            def first(t):
                gp = dno.dno_apply(RealField(g, eta.values + t * v.values), phi,
                                   nz=16, tol=1e-12)
                gm = dno.dno_apply(RealField(g, eta.values - t * v.values), phi,
                                   nz=16, tol=1e-12)
                return (gp.values - gm.values) / (2 * t)

            fd = (4.0 * first(1e-3) - first(2e-3)) / 3.0
            rel = np.max(np.abs(fd - got.values)) / (np.max(np.abs(got.values)) + 1e-30)
            worst_dg = max(worst_dg, rel)

            q = dno.d2g_quadform(eta, v, phi, nz=16, tol=1e-12)

            def second(t):
                qp = inner(phi, dno.dno_apply(RealField(g, eta.values + t * v.values),
                                              phi, nz=16, tol=1e-12))
                qm = inner(phi, dno.dno_apply(RealField(g, eta.values - t * v.values),
                                              phi, nz=16, tol=1e-12))
                q0 = inner(phi, dno.dno_apply(eta, phi, nz=16, tol=1e-12))
                return (qp - 2 * q0 + qm) / t**2

            fd2 = (4.0 * second(1e-3) - second(2e-3)) / 3.0
            worst_d2g = max(worst_d2g, abs(fd2 - q) / (abs(q) + 1e-30))

            psi = band_limited(g, rng, frac=0.12)
            a = inner(psi, dno.dg_apply(eta, v, phi, nz=16, tol=1e-12))
            b = inner(phi, dno.dg_apply(eta, v, psi, nz=16, tol=1e-12))
            worst_sym = max(worst_sym, abs(a - b) / (abs(a) + abs(b) + 1e-30))
        assert worst_dg <= 1e-5
        assert worst_d2g <= 1e-5
        assert worst_sym <= 1e-10
        ok("variation-identities",
           f"DG fd {worst_dg:.1e}, D2G fd {worst_d2g:.1e}, symmetry {worst_sym:.1e}")

    def test_coercivity(self, rng):
        """[PRIMARY] fitted c1 > 0 in the DNO quadratic-form bound."""
        g = make_grid(32, 32, np.pi, np.pi)
        ratios = []
        for case in range(100):
            eta = band_limited(g, rng, frac=0.15, amp=0.02)
            phi = band_limited(g, rng, frac=0.25, zero_mean=True)
            num = inner(phi, dno.dno_apply(eta, phi, nz=10))
            den = sobolev_norms(phi, "Hhalf_star")
            ratios.append(num / den)
        c1, c2 = min(ratios), max(ratios)
        assert c1 > 0
        ok("coercivity", f"fitted c1 = {c1:.4f}, c2 = {c2:.4f} over 100 samples")

    def test_kp_kernel(self):
        """[PRIMARY] A0 annihilates the lump translation modes under refinement."""
        results = {}
        for direction, d in (("dx", dx), ("dy", dy)):
            g = make_grid(512, 512, L_LUMP, L_LUMP)
            q0 = Q0_field_periodized(1.0, g)
            phi = project_x_subspace(d(q0))
            out = linops.a0_handle(1.0, g).apply(phi)
            r0 = np.sqrt(inner(out, out) / inner(phi, phi))
            g2 = make_grid(1024, 1024, 2 * L_LUMP, 2 * L_LUMP)
            q02 = Q0_field_periodized(1.0, g2)
            phi2 = project_x_subspace(d(q02))
            out2 = linops.a0_handle(1.0, g2).apply(phi2)
            r2 = np.sqrt(inner(out2, out2) / inner(phi2, phi2))
            assert r0 <= 5e-3
            assert r2 <= r0 / 2.0
            results[direction] = (r0, r2)
        ok("kp-kernel", f"dxQ0 {results['dx'][0]:.1e} -> {results['dx'][1]:.1e}; "
           f"dyQ0 {results['dy'][0]:.1e} -> {results['dy'][1]:.1e}")

    def test_eigenvalue_counts(self):
        """[PRIMARY] exactly three eigenvalues below mu = 0.5; even ground mode."""
        g = make_grid(128, 128, L_LUMP, L_LUMP)
        n_a0 = count_below(linops.a0_handle(1.0, g), 0.5, refinements=1)
        assert n_a0 == 3
        counts_b = {}
        for eps in (0.1, 0.05):
            counts_b[eps] = count_below(linops.b_eps_handle(eps, 1.0, g), 0.5,
                                        refinements=1)
            assert counts_b[eps] == 3
        rep = lowest_eigenpairs(linops.a0_handle(1.0, g), m=1, tol=1e-8, seed=1)
        v = rep.eigenvectors[:, 0].reshape(g.shape)
        flipx = np.roll(v[:, ::-1], 1, axis=1)
        flipy = np.roll(v[::-1, :], 1, axis=0)
        asym = max(np.max(np.abs(v - flipx)), np.max(np.abs(v - flipy)))
        assert asym <= 1e-6 * np.max(np.abs(v))
        ok("eigenvalue-counts", f"A0: 3 (two grids); B_eps: {counts_b}; "
           f"ground-mode evenness {asym / np.max(np.abs(v)):.1e}")

    def test_eps_scaling(self):
        """[PRIMARY] lowest eigenvalue of B_eps converges to lambda_1 of A0."""
        g = make_grid(128, 128, L_LUMP, L_LUMP)
        lam1 = lowest_eigenpairs(linops.a0_handle(1.0, g), m=1, tol=1e-8,
                                 seed=0).eigenvalues[0]
        diffs = []
        for eps in (0.2, 0.1, 0.05):
            val = lowest_eigenpairs(linops.b_eps_handle(eps, 1.0, g), m=1,
                                    tol=1e-8, seed=0).eigenvalues[0]
            diffs.append(abs(val - lam1))
        assert diffs[0] / diffs[1] >= 1.5
        assert diffs[1] / diffs[2] >= 1.5
        ok("eps-scaling", f"lambda1 = {lam1:.6f}; |sigma1(eps)-lambda1| = "
           f"{['%.2e' % d for d in diffs]} (ratios "
           f"{diffs[0] / diffs[1]:.1f}, {diffs[1] / diffs[2]:.1f})")

    def test_convexity(self):
        """[PRIMARY] d''(c) leading term positive and quadrature-stable."""
        for sigma in (0.5, 1.0, 2.0):
            a = lump_l2sq_quadrature(sigma, R=400.0)
            b = lump_l2sq_quadrature(sigma, R=800.0, n_theta=128)
            assert a == pytest.approx(b, rel=1e-6)
            for eps in (0.05, 0.1):
                p = PhysParams.kp_regime(sigma=sigma, eps=eps)
                assert d_second_leading(p) > 0
        ok("convexity", "d'' leading term > 0 for sigma in {0.5,1,2}, "
           "eps in {0.05,0.1}; quadrature stable to 1e-6")

    def test_dense_oracle_equivalence(self):
        """[PRIMARY] Krylov eigenpairs match the dense oracle at 32x32."""
        g = make_grid(32, 32, L_LUMP, L_LUMP)
        p = PhysParams.kp_regime(sigma=1.0, eps=0.1)
        worst = 0.0
        for op in (linops.a_flat_handle(p, g), linops.a0_handle(1.0, g)):
            dense_vals, _ = dense_oracle(op)
            rep = lowest_eigenpairs(op, m=6, tol=1e-9, seed=0)
            worst = max(worst, float(np.max(np.abs(
                np.asarray(rep.eigenvalues) - dense_vals[:6]))))
        assert worst <= 1e-8
        ok("dense-oracle", f"worst |lanczos - dense| = {worst:.1e}")

    @pytest.mark.slow
    def test_conservation_and_stability_smoke(self):
        """[PRIMARY] perturbed-lump run: drift <= 1e-7, orbit <= 5x initial,
        reversibility at 1e-10.  Integrates to T = 200 (the long pole)."""
        eps = 0.1
        p = PhysParams.kp_regime(sigma=1.0, eps=eps)
        Xe = 8.0 * np.sqrt(2.0)
        g = make_grid(64, 64, Xe / eps, Xe / eps**2)
        base = approx_solitary_state(p, g, boundary_tol=8e-2)
        reference = WaveState(dealias(base.eta), dealias(base.xi))
        initial = even_bump_perturbation(reference, p, 0.01)

        # reversibility of the integrator on this state
        fwd, _ = step_midpoint(initial, 0.01, p, nz=8, fp_tol=1e-13, dno_tol=1e-12)
        back, _ = step_midpoint(fwd, -0.01, p, nz=8, fp_tol=1e-13, dno_tol=1e-12)
        scale = np.max(np.abs(initial.xi.values))
        rev = max(np.max(np.abs(back.eta.values - initial.eta.values)),
                  np.max(np.abs(back.xi.values - initial.xi.values))) / scale
        assert rev <= 1e-10

        log = run_evolution(initial, T=200.0, dt=0.01, params=p, nz=6,
                            reference=reference, out_stride=200, dno_tol=1e-9)
        hmax = float(np.max(log.h_drift_rel))
        pmax = float(np.max(log.p_drift_rel))
        orb0 = float(log.orbital[0])
        orbmax = float(np.max(log.orbital))
        assert hmax <= 1e-7
        assert pmax <= 1e-7
        assert orbmax <= 5.0 * orb0
        ok("conservation-stability",
           f"H drift {hmax:.1e}, P drift {pmax:.1e}, orbit {orbmax:.3f} <= "
           f"5 x {orb0:.3f}, reversibility {rev:.1e}")
