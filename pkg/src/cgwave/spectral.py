"""Doubly periodic anisotropic spectral grid and Fourier toolbox.

The domain is [-Lx, Lx) x [-Ly, Ly) sampled on nx*ny points (x1 inner /
fastest, x2 outer), so the wavenumber lattice is k = (pi*m/Lx, pi*n/Ly).
Fourier coefficients use the convention vhat = FFT(v)/(nx*ny), under which
Parseval holds with the physical quadrature weight (2Lx/nx)(2Ly/ny):

    integral(v*w) = area * sum_k vhat_k * conj(what_k).

Functionals computed from coefficients therefore approximate plane
integrals directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.fft as _sfft

from .errors import ConfigurationError, DomainError

#: k1 = 0 energy fraction above which a field is rejected from the discrete
#: analogue of the space X (domain of the antiderivative d_x^{-2}).
X_SUBSPACE_TOL = 1e-10


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Doubly periodic grid with precomputed lattice and dealiasing mask.

    Parameters
    ----------
    nx, ny : int
        Mode counts per direction; powers of two, at least 8.
    Lx, Ly : float
        Half-period lengths; the domain is [-Lx, Lx) x [-Ly, Ly).
    dealias_fraction : float
        Fraction of the symmetric mode range kept by the dealiasing mask
        (2/3 rule by default).
    """

    nx: int
    ny: int
    Lx: float
    Ly: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if not (_is_power_of_two(self.nx) and self.nx >= 8):
            raise ConfigurationError(f"nx must be a power of two >= 8, got {self.nx}")
        if not (_is_power_of_two(self.ny) and self.ny >= 8):
            raise ConfigurationError(f"ny must be a power of two >= 8, got {self.ny}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ConfigurationError(f"domain half-lengths must be positive, got {self.Lx}, {self.Ly}")
        if not (0.0 < self.dealias_fraction <= 1.0):
            raise ConfigurationError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")

        m = np.fft.fftfreq(self.nx, d=1.0 / self.nx)  # integer mode numbers
        n = np.fft.fftfreq(self.ny, d=1.0 / self.ny)
        k1 = (np.pi / self.Lx) * m
        k2 = (np.pi / self.Ly) * n
        K1, K2 = np.meshgrid(k1, k2)  # shape (ny, nx)

        mcut = np.floor(self.dealias_fraction * self.nx / 2)
        ncut = np.floor(self.dealias_fraction * self.ny / 2)
        M, N = np.meshgrid(m, n)
        mask = (np.abs(M) <= mcut) & (np.abs(N) <= ncut)

        x = -self.Lx + (2.0 * self.Lx / self.nx) * np.arange(self.nx)
        y = -self.Ly + (2.0 * self.Ly / self.ny) * np.arange(self.ny)

        for name, arr in (("x", x), ("y", y), ("k1", k1), ("k2", k2),
                          ("K1", K1), ("K2", K2), ("Kabs2", K1**2 + K2**2),
                          ("dealias_mask", mask)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # Precomputed arrays bound in __post_init__ (declared for type checkers).
    x: np.ndarray = field(init=False, repr=False, default=None)
    y: np.ndarray = field(init=False, repr=False, default=None)
    k1: np.ndarray = field(init=False, repr=False, default=None)
    k2: np.ndarray = field(init=False, repr=False, default=None)
    K1: np.ndarray = field(init=False, repr=False, default=None)
    K2: np.ndarray = field(init=False, repr=False, default=None)
    Kabs2: np.ndarray = field(init=False, repr=False, default=None)
    dealias_mask: np.ndarray = field(init=False, repr=False, default=None)

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return (2.0 * self.Lx / self.nx) * (2.0 * self.Ly / self.ny)

    @property
    def area(self) -> float:
        return 4.0 * self.Lx * self.Ly

    @property
    def key(self) -> tuple:
        """Value-identity tuple usable as a cache key."""
        return (self.nx, self.ny, self.Lx, self.Ly, self.dealias_fraction)

    def meshgrid(self) -> tuple:
        return np.meshgrid(self.x, self.y)


def make_grid(nx: int, ny: int, Lx: float, Ly: float,
              dealias_fraction: float = 2.0 / 3.0) -> GridSpec:
    """Construct a GridSpec, validating sizes and lengths."""
    return GridSpec(nx=int(nx), ny=int(ny), Lx=float(Lx), Ly=float(Ly),
                    dealias_fraction=float(dealias_fraction))


@dataclass(frozen=True, eq=False)
class RealField:
    """Scalar field sampled on a GridSpec, row-major with x2 outer."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ConfigurationError(f"field shape {vals.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "RealField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: GridSpec, f: Callable) -> "RealField":
        X, Y = grid.meshgrid()
        return cls(grid, np.asarray(f(X, Y), dtype=float))

    def _check_same_grid(self, other: "RealField"):
        if other.grid is not self.grid and other.grid.key != self.grid.key:
            raise ConfigurationError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, RealField):
            self._check_same_grid(other)
            return RealField(self.grid, self.values + other.values)
        return RealField(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RealField):
            self._check_same_grid(other)
            return RealField(self.grid, self.values - other.values)
        return RealField(self.grid, self.values - other)

    def __mul__(self, other):
        if isinstance(other, RealField):
            self._check_same_grid(other)
            return RealField(self.grid, self.values * other.values)
        return RealField(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return RealField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real field (conjugate-symmetric)."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise ConfigurationError(f"coeff shape {c.shape} != grid shape {self.grid.shape}")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True, eq=False)
class WaveState:
    """Surface elevation / surface potential pair (eta, xi).

    The mean of xi is gauge: every functional and operator in the package
    is invariant under xi -> xi + const.
    """

    eta: RealField
    xi: RealField

    def __post_init__(self):
        if self.eta.grid.key != self.xi.grid.key:
            raise ConfigurationError("eta and xi must share a grid")

    @property
    def grid(self) -> GridSpec:
        return self.eta.grid


# ---------------------------------------------------------------------------
# Transforms and multipliers
# ---------------------------------------------------------------------------

def transform(fld: RealField) -> SpectralField:
    """Forward transform; coefficient of the constant field 1 is 1 at k=0."""
    c = np.fft.fft2(fld.values) / (fld.grid.nx * fld.grid.ny)
    return SpectralField(fld.grid, c)


def inverse_transform(sf: SpectralField) -> RealField:
    """Inverse transform; rejects coefficient arrays that are not
    conjugate-symmetric (they do not represent a real field)."""
    vals = np.fft.ifft2(sf.coeffs * (sf.grid.nx * sf.grid.ny))
    re, im = np.real(vals), np.imag(vals)
    scale = np.max(np.abs(re)) + 1e-300
    if np.max(np.abs(im)) > 1e-8 * max(scale, 1.0):
        raise DomainError("coefficients violate conjugate symmetry; field is not real")
    return RealField(sf.grid, re.copy())


Symbol = Union[Callable, np.ndarray]


def _symbol_values(grid: GridSpec, symbol: Symbol) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = symbol(grid.K1, grid.K2) if callable(symbol) else np.asarray(symbol)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), grid.shape)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        k = (grid.K1[tuple(bad)], grid.K2[tuple(bad)])
        raise NumericSymbolError(f"symbol is not finite at lattice point k = {k}")
    return vals


class NumericSymbolError(DomainError):
    """A Fourier symbol evaluated to a non-finite value on the lattice."""


def apply_multiplier(symbol: Symbol, fld: RealField) -> RealField:
    """Apply a real Fourier multiplier symbol(k1, k2) to a field.

    The symbol may be a vectorized callable of the lattice arrays or a
    precomputed array; the caller supplies the k = 0 value explicitly.
    """
    vals = _symbol_values(fld.grid, symbol)
    c = np.fft.fft2(fld.values) * vals
    return RealField(fld.grid, np.real(np.fft.ifft2(c)))


def _half(grid: GridSpec, arr2d: np.ndarray) -> np.ndarray:
    return arr2d[:, :grid.nx // 2 + 1]


def dx(fld: RealField) -> RealField:
    """Spectral d/dx1."""
    g = fld.grid
    c = _sfft.rfft2(fld.values, workers=1) * (1j * _half(g, g.K1))
    return RealField(g, _sfft.irfft2(c, s=g.shape, workers=1))


def dy(fld: RealField) -> RealField:
    """Spectral d/dx2."""
    g = fld.grid
    c = _sfft.rfft2(fld.values, workers=1) * (1j * _half(g, g.K2))
    return RealField(g, _sfft.irfft2(c, s=g.shape, workers=1))


def gradient(fld: RealField) -> tuple:
    return dx(fld), dy(fld)


def divergence(fx: RealField, fy: RealField) -> RealField:
    fx._check_same_grid(fy)
    g = fx.grid
    c = _sfft.rfft2(fx.values, workers=1) * (1j * _half(g, g.K1)) \
        + _sfft.rfft2(fy.values, workers=1) * (1j * _half(g, g.K2))
    return RealField(g, _sfft.irfft2(c, s=g.shape, workers=1))


def dealias(fld: RealField) -> RealField:
    """Project onto the retained (2/3-rule) mode band."""
    g = fld.grid
    c = _sfft.rfft2(fld.values, workers=1)
    c *= _half(g, g.dealias_mask)
    return RealField(g, _sfft.irfft2(c, s=g.shape, workers=1))


def x1_zero_fraction(fld: RealField) -> float:
    """Fraction of the field's L2 norm carried by k1 = 0 modes."""
    c = np.fft.fft2(fld.values)
    total = np.linalg.norm(c)
    if total == 0.0:
        return 0.0
    return float(np.linalg.norm(c[:, 0]) / total)


def project_x_subspace(fld: RealField) -> RealField:
    """Zero all k1 = 0 modes (projection onto the discrete space X)."""
    c = np.fft.fft2(fld.values)
    c[:, 0] = 0.0
    return RealField(fld.grid, np.real(np.fft.ifft2(c)))


def antiderivative_x2(fld: RealField) -> RealField:
    """Second x1-antiderivative d_x^{-2}: multiplier -1/k1^2 on k1 != 0.

    The input must lie in the discrete analogue of X: its k1 = 0 Fourier
    content must be below X_SUBSPACE_TOL of its norm.
    """
    frac = x1_zero_fraction(fld)
    if frac > X_SUBSPACE_TOL:
        raise DomainError(
            f"k1 = 0 content fraction {frac:.3e} exceeds {X_SUBSPACE_TOL:.0e}; "
            "input is not in the admissible subspace X")
    g = fld.grid
    c = np.fft.fft2(fld.values)
    with np.errstate(divide="ignore", invalid="ignore"):
        mult = np.where(g.K1 != 0.0, -1.0 / np.where(g.K1 != 0.0, g.K1, 1.0) ** 2, 0.0)
    c *= mult
    return RealField(g, np.real(np.fft.ifft2(c)))


def translate(fld: RealField, a: float, b: float) -> RealField:
    """Spectrally exact translate: (T f)(x1, x2) = f(x1 - a, x2 - b)."""
    g = fld.grid
    phase = np.exp(-1j * (g.K1 * a + g.K2 * b))
    c = np.fft.fft2(fld.values) * phase
    return RealField(g, np.real(np.fft.ifft2(c)))


# ---------------------------------------------------------------------------
# Quadrature and norms
# ---------------------------------------------------------------------------

def integrate(fld: RealField) -> float:
    """Plane integral by the trapezoid-on-torus rule (spectrally exact)."""
    return float(np.sum(fld.values) * fld.grid.cell_area)


def inner(f: RealField, g: RealField) -> float:
    """L2 inner product with physical quadrature weights."""
    f._check_same_grid(g)
    return float(np.sum(f.values * g.values) * f.grid.cell_area)


def mean(fld: RealField) -> float:
    return float(np.mean(fld.values))


def zero_mean(fld: RealField) -> RealField:
    return RealField(fld.grid, fld.values - np.mean(fld.values))


SOBOLEV_KINDS = ("L2", "H1", "Hhalf_star", "Hminushalf_star")


def sobolev_norms(fld: RealField, kind: str) -> float:
    """Discrete quadrature of the defining norm integral (the squared norm).

    Kinds: L2 and H1 are the usual integrals; Hhalf_star uses the weight
    (1+|k|^2)^{-1/2}|k|^2 and Hminushalf_star uses (1+|k|^2)^{1/2}|k|^{-2},
    both ignoring the k = 0 coefficient (quotient by constants).
    """
    g = fld.grid
    c = np.fft.fft2(fld.values) / (g.nx * g.ny)
    p = np.abs(c) ** 2
    k2 = g.Kabs2
    if kind == "L2":
        w = np.ones_like(k2)
    elif kind == "H1":
        w = 1.0 + k2
    elif kind == "Hhalf_star":
        w = (1.0 + k2) ** (-0.5) * k2
    elif kind == "Hminushalf_star":
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(k2 > 0.0, (1.0 + k2) ** 0.5 / np.where(k2 > 0.0, k2, 1.0), 0.0)
    else:
        raise ConfigurationError(f"unknown norm kind {kind!r}; expected one of {SOBOLEV_KINDS}")
    return float(g.area * np.sum(w * p))


def sobolev_norm(fld: RealField, kind: str) -> float:
    """Square root of sobolev_norms (the norm itself)."""
    return float(np.sqrt(max(sobolev_norms(fld, kind), 0.0)))


def w1inf_norm(fld: RealField) -> float:
    """max(|f|) + max(|grad f|), the discrete W^{1,inf} size used in guards."""
    gx, gy = gradient(fld)
    grad_mag = np.sqrt(gx.values**2 + gy.values**2)
    return float(np.max(np.abs(fld.values)) + np.max(grad_mag))


# ---------------------------------------------------------------------------
# WSF1 field file format
# ---------------------------------------------------------------------------

def write_wsf1(fld: RealField, path) -> None:
    """Write `WSF1 nx ny Lx Ly` header then nx*ny little-endian float64,
    row-major (x2 outer, x1 inner)."""
    g = fld.grid
    header = f"WSF1 {g.nx} {g.ny} {g.Lx!r} {g.Ly!r}\n".encode("ascii")
    data = fld.values.astype("<f8").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(data)


def read_wsf1(path, dealias_fraction: float = 2.0 / 3.0) -> RealField:
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ConfigurationError(f"{path}: missing WSF1 header line")
    parts = raw[:nl].decode("ascii", errors="replace").split()
    if len(parts) != 5 or parts[0] != "WSF1":
        raise ConfigurationError(f"{path}: malformed WSF1 header {parts!r}")
    nx, ny = int(parts[1]), int(parts[2])
    Lx, Ly = float(parts[3]), float(parts[4])
    body = raw[nl + 1:]
    expected = nx * ny * 8
    if len(body) != expected:
        raise ConfigurationError(
            f"{path}: payload has {len(body)} bytes at offset {nl + 1}, expected {expected}")
    vals = np.frombuffer(body, dtype="<f8").reshape(ny, nx)
    grid = make_grid(nx, ny, Lx, Ly, dealias_fraction)
    return RealField(grid, vals.copy())
