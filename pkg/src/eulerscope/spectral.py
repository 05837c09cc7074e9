"""Fields on the periodic cube [0, 2*pi)^3 and their Fourier-space operators.

Conventions, fixed once for the whole package:

* the box side is 2*pi, so wavenumbers are plain integers;
* transforms use the mean-value normalization (the k = 0 coefficient is
  the field average) and ``inverse(forward(f)) == f`` to rounding;
* real fields carry a leading component axis (1 scalar, 3 vector, 6
  symmetric tensor stored as xx, xy, xz, yy, yz, zz) over samples
  indexed ``[ix, iy, iz]``;
* spectral duals store the conjugate-symmetric half spectrum of a real
  field over the last axis (kz >= 0, ``scipy.fft.rfftn`` layout);
* every derivative multiplier zeroes the Nyquist plane of its axis, so
  differentiation never produces the asymmetric ik*(n/2) artifact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft

from .errors import ConfigurationError, NonSolvableSourceError, NumericalInstabilityError

TWO_PI = 2.0 * np.pi

SCALAR = 1
VECTOR = 3
TENSOR6 = 6

#: index of the (i, j) entry of a symmetric tensor in 6-component storage
TENSOR6_INDEX = {
    (0, 0): 0, (0, 1): 1, (0, 2): 2,
    (1, 0): 1, (1, 1): 3, (1, 2): 4,
    (2, 0): 2, (2, 1): 4, (2, 2): 5,
}


@dataclass(frozen=True)
class GridSpec:
    """Uniform n^3 sampling of the cube [0, 2*pi)^3.

    ``n`` must be even and at least 8.  All spectral multipliers are
    precomputed once and shared by every field on the grid.
    """

    n: int

    def __post_init__(self):
        n = self.n
        if n % 2 != 0 or n < 8:
            raise ConfigurationError(f"grid size must be even and >= 8, got {n}")
        kfull = np.fft.fftfreq(n, 1.0 / n)      # 0, 1, ..., n/2-1, -n/2, ..., -1
        khalf = np.fft.rfftfreq(n, 1.0 / n)     # 0, 1, ..., n/2
        kx = kfull.reshape(n, 1, 1)
        ky = kfull.reshape(1, n, 1)
        kz = khalf.reshape(1, 1, n // 2 + 1)
        k2 = kx * kx + ky * ky + kz * kz
        inv_k2 = np.zeros_like(k2)
        np.divide(1.0, k2, out=inv_k2, where=k2 > 0)
        nyq = n // 2
        # derivative multipliers: i*k with the Nyquist plane removed
        ik = tuple(1j * np.where(np.abs(k) == nyq, 0.0, k) for k in (kx, ky, kz))
        cutoff = n // 3
        mask = ((np.abs(kx) <= cutoff) & (np.abs(ky) <= cutoff)
                & (np.abs(kz) <= cutoff)).astype(np.float64)
        # conjugate-pair weights for half-spectrum sums (kz interior counts twice)
        wz = np.ones(n // 2 + 1)
        wz[1:-1] = 2.0
        object.__setattr__(self, "k", (kx, ky, kz))
        object.__setattr__(self, "k2", k2)
        object.__setattr__(self, "inv_k2", inv_k2)
        object.__setattr__(self, "ik", ik)
        object.__setattr__(self, "dealias_cutoff", cutoff)
        object.__setattr__(self, "dealias_mask", mask)
        object.__setattr__(self, "hermitian_weights", wz.reshape(1, 1, -1))

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    @property
    def real_shape(self):
        return (self.n, self.n, self.n)

    @property
    def spectral_shape(self):
        return (self.n, self.n, self.n // 2 + 1)

    def axis_coords(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return np.arange(self.n) * self.h

    def mesh(self):
        """Full coordinate arrays X, Y, Z, each of shape (n, n, n)."""
        x = self.axis_coords()
        return np.meshgrid(x, x, x, indexing="ij")


def _check_components(ncomp: int):
    if ncomp not in (SCALAR, VECTOR, TENSOR6):
        raise ConfigurationError(f"unsupported component count {ncomp}")


@dataclass
class RealField:
    """Sampled real field; ``data`` has shape (ncomp, n, n, n)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 4 or self.data.shape[1:] != self.grid.real_shape:
            raise ConfigurationError(
                f"real field shape {self.data.shape} does not match grid n={self.grid.n}")
        _check_components(self.data.shape[0])
        if not np.isfinite(self.data).all():
            raise NumericalInstabilityError("real field contains non-finite samples")

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @classmethod
    def scalar(cls, grid: GridSpec, samples: np.ndarray) -> "RealField":
        return cls(grid, np.asarray(samples)[None])

    def component(self, i: int) -> np.ndarray:
        return self.data[i]

    def copy(self) -> "RealField":
        return RealField(self.grid, self.data.copy())


@dataclass
class SpectralField:
    """Half-spectrum Fourier dual; ``data`` has shape (ncomp, n, n, n//2+1)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.complex128)
        if self.data.ndim != 4 or self.data.shape[1:] != self.grid.spectral_shape:
            raise ConfigurationError(
                f"spectral field shape {self.data.shape} does not match grid n={self.grid.n}")
        _check_components(self.data.shape[0])
        if not np.isfinite(self.data).all():
            raise NumericalInstabilityError("spectral field contains non-finite coefficients")

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    def component(self, i: int) -> np.ndarray:
        return self.data[i]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.data.copy())


def require_same_grid(*fields):
    grids = {f.grid.n for f in fields}
    if len(grids) > 1:
        raise ConfigurationError(f"mixed grid sizes {sorted(grids)}")


def forward(f: RealField) -> SpectralField:
    """Forward transform with mean-value normalization."""
    return SpectralField(f.grid, _fft.rfftn(f.data, axes=(1, 2, 3), norm="forward"))


def inverse(F: SpectralField) -> RealField:
    """Inverse transform back to nodal samples."""
    data = _fft.irfftn(F.data, s=F.grid.real_shape, axes=(1, 2, 3), norm="forward")
    return RealField(F.grid, data)


def derivative(F: SpectralField, axis: int) -> SpectralField:
    """Spectral partial derivative along ``axis`` (0 = x, 1 = y, 2 = z)."""
    if axis not in (0, 1, 2):
        raise ConfigurationError(f"axis must be 0, 1 or 2, got {axis}")
    return SpectralField(F.grid, F.data * F.grid.ik[axis])


def gradient(F: SpectralField) -> SpectralField:
    """Gradient of a scalar field as a 3-component spectral field."""
    if F.ncomp != SCALAR:
        raise ConfigurationError("gradient expects a scalar field")
    data = np.concatenate([F.data * F.grid.ik[a] for a in range(3)], axis=0)
    return SpectralField(F.grid, data)


def divergence(F: SpectralField) -> SpectralField:
    """Divergence of a vector field (derivative convention, Nyquist-free)."""
    if F.ncomp != VECTOR:
        raise ConfigurationError("divergence expects a vector field")
    ik = F.grid.ik
    data = F.data[0] * ik[0] + F.data[1] * ik[1] + F.data[2] * ik[2]
    return SpectralField(F.grid, data[None])


def curl(F: SpectralField) -> SpectralField:
    """Curl of a vector field."""
    if F.ncomp != VECTOR:
        raise ConfigurationError("curl expects a vector field")
    ikx, iky, ikz = F.grid.ik
    u, v, w = F.data
    data = np.stack([
        iky * w - ikz * v,
        ikz * u - ikx * w,
        ikx * v - iky * u,
    ])
    return SpectralField(F.grid, data)


def dealias(F: SpectralField) -> SpectralField:
    """Two-thirds rule: zero every mode with |k_axis| > floor(n/3)."""
    return SpectralField(F.grid, F.data * F.grid.dealias_mask)


def leray_project(F: SpectralField) -> SpectralField:
    """Project a vector field onto its divergence-free part.

    Diagonal in k: u(k) <- u(k) - k (k . u(k)) / |k|^2, with the k = 0
    (mean-flow) coefficient left unchanged.
    """
    if F.ncomp != VECTOR:
        raise ConfigurationError("leray_project expects a vector field")
    kx, ky, kz = F.grid.k
    kdotu = kx * F.data[0] + ky * F.data[1] + kz * F.data[2]
    kdotu *= F.grid.inv_k2
    data = np.stack([
        F.data[0] - kx * kdotu,
        F.data[1] - ky * kdotu,
        F.data[2] - kz * kdotu,
    ])
    return SpectralField(F.grid, data)


def inverse_laplacian(F: SpectralField) -> SpectralField:
    """Solve -lap(g) = f for a mean-zero scalar source, mean-zero gauge."""
    if F.ncomp != SCALAR:
        raise ConfigurationError("inverse_laplacian expects a scalar field")
    mean = abs(F.data[0, 0, 0, 0])
    scale = np.sqrt(mean_square(F)[0])
    if mean > 1e-10 * max(scale, 1e-300):
        raise NonSolvableSourceError(
            f"source mean {mean:.3e} exceeds 1e-10 of the field scale {scale:.3e}")
    data = F.data * F.grid.inv_k2
    data[:, 0, 0, 0] = 0.0
    return SpectralField(F.grid, data)


def mean_square(F: SpectralField) -> np.ndarray:
    """Per-component grid average of f^2, evaluated spectrally (Parseval)."""
    w = F.grid.hermitian_weights
    return np.sum(w * (F.data.real ** 2 + F.data.imag ** 2), axis=(1, 2, 3))


def spectral_inner(F: SpectralField, G: SpectralField) -> float:
    """Discrete inner product <f, g> (grid average of the pointwise dot)."""
    require_same_grid(F, G)
    w = F.grid.hermitian_weights
    return float(np.sum(w * (F.data * np.conj(G.data)).real))


def divergence_defect(F: SpectralField) -> float:
    """max_k |k . u(k)| relative to the largest coefficient magnitude."""
    kx, ky, kz = F.grid.k
    kdotu = kx * F.data[0] + ky * F.data[1] + kz * F.data[2]
    scale = np.abs(F.data).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(kdotu).max() / scale)


def max_abs(f: RealField) -> float:
    """Pointwise sup of |f| (scalar) or the Euclidean magnitude (vector)."""
    if f.ncomp == SCALAR:
        return float(np.abs(f.data[0]).max())
    if f.ncomp == VECTOR:
        return float(np.sqrt((f.data ** 2).sum(axis=0).max()))
    raise ConfigurationError("max_abs handles scalar and vector fields only")
