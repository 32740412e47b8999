"""Shared fixtures: seeded band-limited random fields.

Random test fields are synthesized from low-wavenumber coefficients so
that quadratic products stay inside the dealias band and discrete adjoint
identities hold to solver tolerance rather than aliasing level.
"""

import numpy as np
import pytest

from cgwave.spectral import GridSpec, RealField, make_grid


def band_limited(grid: GridSpec, rng: np.random.Generator, frac: float = 0.25,
                 amp: float = 1.0, zero_mean: bool = False) -> RealField:
    """Random real field with modes only below frac of the Nyquist range."""
    raw = rng.standard_normal(grid.shape)
    c = np.fft.fft2(raw)
    m = np.fft.fftfreq(grid.nx, 1.0 / grid.nx)
    n = np.fft.fftfreq(grid.ny, 1.0 / grid.ny)
    M, N = np.meshgrid(m, n)
    keep = (np.abs(M) <= frac * grid.nx / 2) & (np.abs(N) <= frac * grid.ny / 2)
    c *= keep
    if zero_mean:
        c[0, 0] = 0.0
    vals = np.real(np.fft.ifft2(c))
    peak = np.max(np.abs(vals)) + 1e-300
    return RealField(grid, amp * vals / peak)


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)


@pytest.fixture
def grid_pi():
    """Unit-wavenumber grid: Lx = Ly = pi gives an integer lattice."""
    return make_grid(64, 64, np.pi, np.pi)


@pytest.fixture
def grid_small():
    return make_grid(32, 32, np.pi, np.pi)
