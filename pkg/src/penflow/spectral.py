"""Fourier machinery on the periodic box [0, 2*pi)^dim.

Convention: f(x) = sum_k c_k exp(i k.x) with integer wavevectors k, so the
coefficients are fftn(samples) / n**dim and Parseval reads

    integral |f|^2 dx = (2*pi)**dim * sum_k |c_k|^2.

All quadrature is the equispaced sum times h**dim, which is spectrally
accurate for smooth periodic fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ArityError, ConfigError, CorruptionError, GaugeError, SymmetryError

TWO_PI = 2.0 * np.pi

# tolerances of the spectral layer
ROUNDTRIP_TOL = 1e-12
HERMITIAN_TOL = 1e-10
MEAN_MODE_TOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: n points per axis on [0, 2*pi)^dim."""

    dim: int
    n: int
    length: float = TWO_PI

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ConfigError(f"n must be a power of two >= 8, got {self.n}")
        if abs(self.length - TWO_PI) > 1e-14:
            raise ConfigError("box side is fixed at 2*pi")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def coordinates(self):
        """Meshgrid arrays x_j = j*h per axis ('ij' indexing)."""
        x = np.arange(self.n) * self.h
        return np.meshgrid(*([x] * self.dim), indexing="ij")


@lru_cache(maxsize=None)
def _wavenumber_cache(dim: int, n: int):
    k1 = np.fft.fftfreq(n, d=1.0 / n)
    axes = np.meshgrid(*([k1] * dim), indexing="ij")
    k = np.stack(axes)  # shape (dim, n, ..., n)
    ksq = np.sum(k * k, axis=0)
    inv_ksq = np.zeros_like(ksq)
    nonzero = ksq > 0
    inv_ksq[nonzero] = 1.0 / ksq[nonzero]
    cutoff = n / 3.0
    mask = np.all(np.abs(k) <= cutoff, axis=0)
    # First derivatives multiply by i*k; the self-paired Nyquist mode k = -n/2
    # would break Hermitian symmetry, so it is dropped there (standard practice).
    k1d = k1.copy()
    k1d[n // 2] = 0.0
    kd = np.stack(np.meshgrid(*([k1d] * dim), indexing="ij"))
    for a in (k, ksq, inv_ksq, mask, kd):
        a.setflags(write=False)
    return k, ksq, inv_ksq, mask, kd


def wavevectors(grid: GridSpec) -> np.ndarray:
    """Integer wavevector components, shape (dim, n, ..., n)."""
    return _wavenumber_cache(grid.dim, grid.n)[0]


def ksq(grid: GridSpec) -> np.ndarray:
    """|k|^2 on the spectral grid."""
    return _wavenumber_cache(grid.dim, grid.n)[1]


def inv_ksq(grid: GridSpec) -> np.ndarray:
    """1/|k|^2 with the zero mode set to 0."""
    return _wavenumber_cache(grid.dim, grid.n)[2]


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Boolean 2/3-rule mask: True where all |k_j| <= n/3."""
    return _wavenumber_cache(grid.dim, grid.n)[3]


def derivative_wavevectors(grid: GridSpec) -> np.ndarray:
    """Wavevectors for first derivatives: like wavevectors(), Nyquist zeroed."""
    return _wavenumber_cache(grid.dim, grid.n)[4]


class _Field:
    __slots__ = ("grid", "_data")

    def __init__(self, grid, data, dtype):
        data = np.asarray(data, dtype=dtype)
        if data.ndim == grid.dim:
            data = data[np.newaxis]
        if data.ndim != grid.dim + 1 or data.shape[1:] != grid.shape:
            raise ArityError(
                f"field shape {data.shape} incompatible with grid {grid.shape}"
            )
        self.grid = grid
        self._data = data

    @property
    def components(self) -> int:
        return self._data.shape[0]

    @property
    def is_scalar(self) -> bool:
        return self.components == 1


class RealField(_Field):
    """Scalar or vector field sampled on the physical grid.

    ``data`` has shape (components, n, ..., n); a scalar input of shape
    (n, ..., n) is promoted to one component.
    """

    def __init__(self, grid: GridSpec, data):
        super().__init__(grid, data, np.float64)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @classmethod
    def zeros(cls, grid: GridSpec, components: int = 1) -> "RealField":
        return cls(grid, np.zeros((components,) + grid.shape))

    def scalar_values(self) -> np.ndarray:
        if not self.is_scalar:
            raise ArityError(f"expected scalar field, got {self.components} components")
        return self._data[0]


class SpectralField(_Field):
    """Fourier coefficients c_k, numpy fftn layout, shape (components, n, ..., n)."""

    def __init__(self, grid: GridSpec, coeffs):
        super().__init__(grid, coeffs, np.complex128)

    @property
    def coeffs(self) -> np.ndarray:
        return self._data

    @classmethod
    def zeros(cls, grid: GridSpec, components: int = 1) -> "SpectralField":
        return cls(grid, np.zeros((components,) + grid.shape, dtype=np.complex128))


def _spatial_axes(grid: GridSpec) -> tuple[int, ...]:
    return tuple(range(1, grid.dim + 1))


def forward(f: RealField) -> SpectralField:
    """Physical samples -> Fourier coefficients."""
    if not np.all(np.isfinite(f.data)):
        raise CorruptionError("non-finite values in physical field")
    coeffs = np.fft.fftn(f.data, axes=_spatial_axes(f.grid)) / f.grid.n**f.grid.dim
    return SpectralField(f.grid, coeffs)


def hermitian_asymmetry(F: SpectralField) -> float:
    """Max |c_k - conj(c_{-k})| over all modes and components."""
    c = F.coeffs
    flipped = c
    for ax in _spatial_axes(F.grid):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    return float(np.max(np.abs(c - np.conj(flipped))))


def backward(F: SpectralField) -> RealField:
    """Fourier coefficients -> physical samples (imaginary residue discarded)."""
    scale = max(1.0, float(np.max(np.abs(F.coeffs)))) if F.coeffs.size else 1.0
    if hermitian_asymmetry(F) > HERMITIAN_TOL * scale:
        raise SymmetryError("coefficients are not Hermitian-symmetric")
    data = np.fft.ifftn(F.coeffs * F.grid.n**F.grid.dim, axes=_spatial_axes(F.grid))
    return RealField(F.grid, data.real)


def gradient(F: SpectralField) -> SpectralField:
    """Spectral gradient of a scalar: component j is i*k_j*c_k."""
    if not F.is_scalar:
        raise ArityError("gradient expects a scalar field")
    k = derivative_wavevectors(F.grid)
    return SpectralField(F.grid, 1j * k * F.coeffs[0])


def laplacian(F: SpectralField) -> SpectralField:
    """-|k|^2 c_k per component."""
    return SpectralField(F.grid, -ksq(F.grid) * F.coeffs)


def divergence(F: SpectralField) -> SpectralField:
    """sum_j i*k_j*c_k^(j) of a dim-component vector field."""
    if F.components != F.grid.dim:
        raise ArityError(
            f"divergence expects {F.grid.dim} components, got {F.components}"
        )
    k = derivative_wavevectors(F.grid)
    return SpectralField(F.grid, np.sum(1j * k * F.coeffs, axis=0))


def poisson_solve(F: SpectralField) -> SpectralField:
    """Solve -|k|^2 f_k = rhs_k with the zero-mean gauge f_0 = 0."""
    if not F.is_scalar:
        raise ArityError("poisson_solve expects a scalar field")
    c = F.coeffs[0]
    if abs(c[(0,) * F.grid.dim]) > MEAN_MODE_TOL:
        raise GaugeError("Poisson right-hand side must have zero mean")
    return SpectralField(F.grid, -inv_ksq(F.grid) * c)


def dealias(F: SpectralField) -> SpectralField:
    """2/3 rule: zero every mode with any |k_j| > n/3.  Idempotent."""
    return SpectralField(F.grid, F.coeffs * dealias_mask(F.grid))


def integrate(f: RealField) -> float:
    """Integral over the box, summed over components."""
    return float(np.sum(f.data)) * f.grid.cell_volume


def l2_norm_sq(f: RealField) -> float:
    """integral sum_c f_c^2 dx."""
    return float(np.sum(f.data * f.data)) * f.grid.cell_volume


def sobolev_norm(f: RealField, order: float) -> float:
    """H^order norm via sqrt(sum_k (1+|k|^2)^order |c_k|^2 (2*pi)^dim).

    Supported orders: -1, 0, 1, 2 (scalar fields only).
    """
    if order not in (-1, 0, 1, 2):
        raise ConfigError(f"unsupported Sobolev order {order}")
    if not f.is_scalar:
        raise ArityError("sobolev_norm expects a scalar field")
    c = forward(f).coeffs[0]
    weight = (1.0 + ksq(f.grid)) ** order
    total = np.sum(weight * np.abs(c) ** 2) * TWO_PI**f.grid.dim
    return float(np.sqrt(total))
