"""Strip geometry, Dirichlet sine eigenbasis, and spectral transforms.

The channel strip is periodic in x on [-Lx, Lx) and carries homogeneous
Dirichlet conditions at y = 0 and y = B.  In y we use the orthonormal
eigenbasis of -d2/dy2,

    w_j(y) = sqrt(2/B) * sin(j*pi*y/B),   lambda_j = (j*pi/B)**2,

realized numerically through the type-I discrete sine transform on the
uniform interior grid y_m = m*B/(Ny+1), m = 1..Ny, where the modes are
discretely orthogonal and the Dirichlet conditions hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct, dst


@dataclass(frozen=True)
class StripGeometry:
    """Discretized channel strip.

    B  : strip width, y in (0, B)
    Lx : x-truncation half-length, x in [-Lx, Lx) periodic
    Nx : number of x grid points (even)
    Ny : number of interior y grid points / sine modes
    b  : rate of the exponential weight exp(2*b*x) used by the
         weighted diagnostics (b >= 0; b = 0 disables the weighting)
    """

    B: float
    Lx: float
    Nx: int
    Ny: int
    b: float = 0.0

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError(f"strip width B must be positive, got {self.B}")
        if not self.Lx > 0:
            raise ValueError(f"half-length Lx must be positive, got {self.Lx}")
        if self.Nx < 4 or self.Nx % 2 != 0:
            raise ValueError(f"Nx must be even and >= 4, got {self.Nx}")
        if self.Ny < 1:
            raise ValueError(f"Ny must be >= 1, got {self.Ny}")
        if self.b < 0:
            raise ValueError(f"weight rate b must be >= 0, got {self.b}")

    @property
    def dx(self) -> float:
        return 2.0 * self.Lx / self.Nx

    @property
    def dy(self) -> float:
        """Quadrature weight of the interior y grid."""
        return self.B / (self.Ny + 1)

    def x_grid(self) -> np.ndarray:
        return -self.Lx + self.dx * np.arange(self.Nx)

    def y_grid(self) -> np.ndarray:
        return self.dy * np.arange(1, self.Ny + 1)

    def wavenumbers(self) -> np.ndarray:
        """Physical x-wavenumbers k_n = n*pi/Lx carried by the rfft slots."""
        return (np.pi / self.Lx) * np.arange(self.Nx // 2 + 1)

    def eigenvalues(self) -> np.ndarray:
        return eigenvalue(np.arange(1, self.Ny + 1), self.B)


def eigenvalue(j, B: float):
    """Eigenvalue lambda_j = (j*pi/B)**2 of the Dirichlet sine mode j."""
    j = np.asarray(j)
    if np.any(j < 1):
        raise ValueError(f"mode index must be >= 1, got {j}")
    if not B > 0:
        raise ValueError(f"strip width B must be positive, got {B}")
    lam = (j * np.pi / B) ** 2
    return float(lam) if lam.ndim == 0 else lam


def evaluate_mode(j: int, y, B: float):
    """Evaluate the orthonormal mode w_j(y) = sqrt(2/B)*sin(j*pi*y/B)."""
    if j < 1:
        raise ValueError(f"mode index must be >= 1, got {j}")
    if not B > 0:
        raise ValueError(f"strip width B must be positive, got {B}")
    y = np.asarray(y, dtype=float)
    if np.any(y < 0) or np.any(y > B):
        raise ValueError(f"y must lie in [0, {B}]")
    vals = np.sqrt(2.0 / B) * np.sin(j * np.pi * y / B)
    return float(vals) if vals.ndim == 0 else vals


@dataclass(frozen=True)
class DirichletBasis:
    """First Ny modes of the Dirichlet eigenproblem on (0, B)."""

    B: float
    Ny: int

    @property
    def modes(self) -> list[tuple[int, float, float]]:
        """Ordered (j, lambda_j, normalization) triples."""
        norm = np.sqrt(2.0 / self.B)
        return [(j, eigenvalue(j, self.B), norm) for j in range(1, self.Ny + 1)]

    def sample(self, y: np.ndarray) -> np.ndarray:
        """Matrix of mode values, shape (len(y), Ny)."""
        return np.column_stack(
            [evaluate_mode(j, y, self.B) for j in range(1, self.Ny + 1)]
        )


# ---------------------------------------------------------------------------
# Sine / cosine transforms on the interior grid
# ---------------------------------------------------------------------------

_MATMUL_LIMIT = 64  # below this mode count a dense DST beats the FFT path


@lru_cache(maxsize=32)
def _sine_matrix(n: int) -> np.ndarray:
    m = np.arange(1, n + 1)
    return np.sin(np.pi * np.outer(m, m) / (n + 1))


def _apply_dst1(arr: np.ndarray, axis: int) -> np.ndarray:
    """Unnormalized type-I DST, dense for small mode counts."""
    n = arr.shape[axis]
    if n > _MATMUL_LIMIT:
        return dst(arr, type=1, axis=axis)
    moved = np.moveaxis(arr, axis, -1)
    return np.moveaxis(2.0 * (moved @ _sine_matrix(n)), -1, axis)


def sine_transform(values: np.ndarray, B: float, axis: int = -1) -> np.ndarray:
    """Samples on the interior grid -> coefficients of the orthonormal modes.

    Inverse of :func:`inverse_sine_transform`; satisfies the Parseval
    identity sum(a_j**2) = (B/(Ny+1)) * sum(values**2).
    """
    n = values.shape[axis]
    return _apply_dst1(values, axis) * (np.sqrt(B / 2.0) / (n + 1))


def inverse_sine_transform(coeffs: np.ndarray, B: float, axis: int = -1) -> np.ndarray:
    """Coefficients of the orthonormal sine modes -> interior grid samples."""
    return _apply_dst1(coeffs, axis) * (np.sqrt(2.0 / B) / 2.0)


def cosine_series_on_grid(coeffs: np.ndarray, axis: int = -1) -> np.ndarray:
    """Evaluate sum_j c_j*cos(j*pi*y/B) on the interior grid y_m = m*B/(Ny+1).

    ``coeffs`` holds c_1..c_Ny along ``axis`` (the same mode count as the
    sine transforms); used to evaluate y-derivatives of sine series.
    """
    coeffs = np.moveaxis(coeffs, axis, -1)
    ny = coeffs.shape[-1]
    padded = np.zeros(coeffs.shape[:-1] + (ny + 2,), dtype=coeffs.dtype)
    padded[..., 1:-1] = coeffs / 2.0
    vals = dct(padded, type=1, axis=-1)[..., 1:-1]
    return np.moveaxis(vals, -1, axis)


# ---------------------------------------------------------------------------
# Triple-product coupling oracle
# ---------------------------------------------------------------------------

def _cos_sin_integral(m: int, k: int) -> float:
    # int_0^pi cos(m t) sin(k t) dt, closed form
    m = abs(m)
    if k == m:
        return 0.0
    return k * (1 - (-1) ** (k + m)) / (k * k - m * m)


@lru_cache(maxsize=None)
def _sin_triple(i: int, j: int, k: int) -> float:
    # int_0^pi sin(i t) sin(j t) sin(k t) dt via product-to-sum
    return 0.5 * (_cos_sin_integral(i - j, k) - _cos_sin_integral(i + j, k))


def coupling_coefficient(i: int, j: int, k: int, B: float) -> float:
    """Exact triple-product integral of orthonormal modes over (0, B).

    Symmetric in (i, j, k) and zero whenever i + j + k is even.  This is
    the oracle the pseudospectral nonlinearity is tested against; the
    solver itself never builds the O(N**3) tensor.
    """
    for idx in (i, j, k):
        if idx < 1:
            raise ValueError(f"mode index must be >= 1, got {idx}")
    if not B > 0:
        raise ValueError(f"strip width B must be positive, got {B}")
    if (i + j + k) % 2 == 0:
        return 0.0
    i, j, k = sorted((i, j, k))  # bitwise-identical under permutations
    return (2.0 / B) ** 1.5 * (B / np.pi) * _sin_triple(i, j, k)
