"""Fields on the strip: grid/spectral views, derivatives, initial data.

A :class:`Field` stores the complex coefficient tensor c[n, j] of

    u(x, y) = sum_{n,j} c[n, j] * exp(i*k_n*x) * w_j(y),

with k_n = n*pi/Lx kept in rfft layout (n = 0..Nx/2, negative frequencies
implied by conjugate symmetry) and w_j the orthonormal Dirichlet sine
modes.  Real-valuedness and the Dirichlet trace are enforced by the
representation itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.fft import irfft, rfft

from .geometry import (
    StripGeometry,
    cosine_series_on_grid,
    evaluate_mode,
    inverse_sine_transform,
    sine_transform,
)

TAIL_REJECT_THRESHOLD = 1e-8


def to_spectral(values: np.ndarray, geom: StripGeometry) -> np.ndarray:
    """Grid samples (Nx, Ny) -> coefficient tensor (Nx//2+1, Ny)."""
    modal = sine_transform(values, geom.B, axis=1)
    return rfft(modal, axis=0) / geom.Nx


def to_grid(coeffs: np.ndarray, geom: StripGeometry) -> np.ndarray:
    """Coefficient tensor -> real grid samples (Nx, Ny)."""
    modal = irfft(coeffs * geom.Nx, n=geom.Nx, axis=0)
    return inverse_sine_transform(modal, geom.B, axis=1)


def parseval_weights(nx: int) -> np.ndarray:
    """Multiplicity of each rfft slot in the full spectrum."""
    w = np.full(nx // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


class Field:
    """Immutable real field on the strip with a spectral view.

    Construct from coefficients or via :meth:`from_values`; the grid view
    is computed lazily and cached.
    """

    __slots__ = ("geometry", "coeffs", "_values")

    def __init__(self, geometry: StripGeometry, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        expected = (geometry.Nx // 2 + 1, geometry.Ny)
        if coeffs.shape != expected:
            raise ValueError(f"coefficient shape {coeffs.shape} != {expected}")
        if not np.all(np.isfinite(coeffs.view(np.float64))):
            raise ValueError("field coefficients contain non-finite entries")
        object.__setattr__(self, "geometry", geometry)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_values", None)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    # -- construction -------------------------------------------------

    @classmethod
    def from_values(cls, geometry: StripGeometry, values: np.ndarray) -> "Field":
        values = np.asarray(values, dtype=float)
        if values.shape != (geometry.Nx, geometry.Ny):
            raise ValueError(
                f"value shape {values.shape} != {(geometry.Nx, geometry.Ny)}"
            )
        return cls(geometry, to_spectral(values, geometry))

    @classmethod
    def zeros(cls, geometry: StripGeometry) -> "Field":
        return cls(geometry, np.zeros((geometry.Nx // 2 + 1, geometry.Ny), complex))

    # -- views ---------------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            object.__setattr__(self, "_values", to_grid(self.coeffs, self.geometry))
        return self._values

    # -- calculus ------------------------------------------------------

    def dx(self, order: int = 1) -> "Field":
        """Spectral x-derivative; the Nyquist slot is zeroed (odd orders
        have no consistent real representative there)."""
        k = self.geometry.wavenumbers()
        mult = (1j * k) ** order
        if order % 2 == 1:
            mult = mult.copy()
            mult[-1] = 0.0
        return Field(self.geometry, self.coeffs * mult[:, None])

    def dyy(self) -> "Field":
        lam = self.geometry.eigenvalues()
        return Field(self.geometry, self.coeffs * (-lam)[None, :])

    def dy_values(self) -> np.ndarray:
        """Grid samples of du/dy (a cosine series, not a Field)."""
        geom = self.geometry
        jpi = np.arange(1, geom.Ny + 1) * np.pi / geom.B
        cos_coeffs = np.sqrt(2.0 / geom.B) * jpi[None, :] * self.coeffs
        modal = irfft(cos_coeffs * geom.Nx, n=geom.Nx, axis=0)
        return cosine_series_on_grid(modal, axis=1)

    # -- norms -----------------------------------------------------------

    def l2sq(self) -> float:
        """Squared L2 norm over the strip, by Parseval."""
        w = parseval_weights(self.geometry.Nx)
        return 2.0 * self.geometry.Lx * float(
            np.sum(w[:, None] * (self.coeffs.real**2 + self.coeffs.imag**2))
        )

    def gradsq(self) -> float:
        """Squared L2 norm of the gradient, by Parseval."""
        w = parseval_weights(self.geometry.Nx)
        k2 = self.geometry.wavenumbers() ** 2
        lam = self.geometry.eigenvalues()
        c2 = self.coeffs.real**2 + self.coeffs.imag**2
        return 2.0 * self.geometry.Lx * float(
            np.sum(w[:, None] * (k2[:, None] + lam[None, :]) * c2)
        )

    # -- arithmetic ------------------------------------------------------

    def _check_same_grid(self, other: "Field"):
        if self.geometry != other.geometry:
            raise ValueError("fields live on different grids")

    def __add__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.geometry, self.coeffs + other.coeffs)

    def __sub__(self, other: "Field") -> "Field":
        self._check_same_grid(other)
        return Field(self.geometry, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.geometry, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def values_padded(self, mx: int = 2, my: int = 2) -> tuple[np.ndarray, StripGeometry]:
        """Field sampled on an (mx*Nx, my*Ny) refinement of the grid.

        Used for alias-free quadrature of quartic quantities.  Returns the
        sample array and the refined geometry (for quadrature weights).
        """
        geom = self.geometry
        fine = StripGeometry(geom.B, geom.Lx, mx * geom.Nx, my * geom.Ny, geom.b)
        pad = np.zeros((fine.Nx // 2 + 1, fine.Ny), dtype=complex)
        pad[: geom.Nx // 2 + 1, : geom.Ny] = self.coeffs
        if mx > 1:
            pad[geom.Nx // 2, :] /= 2.0  # Nyquist splits into +/- pair
        return to_grid(pad, fine), fine


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Specification of the initial field.

    kinds:
      gaussian_mode  : amplitude * exp(-(x-x0)**2/s**2) * w_j(y)
      single_mode    : amplitude * sin(k*(x-x0)) * w_j(y), k an integer
                       multiple of pi/Lx
      custom_samples : explicit (Nx, Ny) grid samples in ``values``

    ``target_l2_norm``, when set, rescales the amplitude so the sampled
    field has exactly that L2 norm.
    """

    kind: str
    amplitude: float = 1.0
    x0: float = 0.0
    s: float = 1.0
    j: int = 1
    k: float = 1.0
    values: np.ndarray | None = None
    target_l2_norm: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian_mode", "single_mode", "custom_samples"):
            raise ValueError(f"unknown initial-data kind: {self.kind!r}")
        if self.kind == "gaussian_mode" and not self.s > 0:
            raise ValueError(f"gaussian width s must be positive, got {self.s}")
        if self.kind == "custom_samples" and self.values is None:
            raise ValueError("custom_samples requires explicit values")


class InitialField(NamedTuple):
    field: Field
    l2_norm: float
    tail_mass: float


class SupportTooWideError(ValueError):
    """Initial data carries weighted mass too close to the x-boundaries."""


def make_initial_field(init: InitialData, geom: StripGeometry) -> InitialField:
    """Sample initial data on the grid and report its norm and tail mass.

    Localized kinds (gaussian_mode, custom_samples) are rejected when the
    weighted tail mass exceeds 1e-8: such data cannot be represented
    faithfully on the truncated domain.  single_mode data is exempt; it
    is periodic by construction and used for linear exactness tests, not
    for decay experiments.
    """
    from .diagnostics import tail_mass as _tail_mass

    if init.j < 1 or init.j > geom.Ny:
        raise ValueError(f"y-mode j={init.j} outside 1..{geom.Ny}")

    x = geom.x_grid()
    wj = evaluate_mode(init.j, geom.y_grid(), geom.B)

    if init.kind == "gaussian_mode":
        profile = init.amplitude * np.exp(-((x - init.x0) ** 2) / init.s**2)
        vals = profile[:, None] * wj[None, :]
    elif init.kind == "single_mode":
        n = init.k * geom.Lx / np.pi
        if abs(n - round(n)) > 1e-9:
            raise ValueError(
                f"wavenumber k={init.k} is not an integer multiple of pi/Lx"
            )
        if round(n) > geom.Nx // 2:
            raise ValueError(f"wavenumber k={init.k} not representable on the grid")
        vals = init.amplitude * np.sin(init.k * (x - init.x0))[:, None] * wj[None, :]
    else:
        vals = np.asarray(init.values, dtype=float) * init.amplitude

    field = Field.from_values(geom, vals)
    if init.target_l2_norm is not None:
        current = np.sqrt(field.l2sq())
        if current == 0.0:
            raise ValueError("cannot rescale a zero field to a target norm")
        field = field * (init.target_l2_norm / current)

    norm = float(np.sqrt(field.l2sq()))
    tail = _tail_mass(field, geom.b)
    if init.kind != "single_mode" and tail > TAIL_REJECT_THRESHOLD:
        raise SupportTooWideError(
            f"support too wide for truncation: initial tail mass {tail:.3e} > "
            f"{TAIL_REJECT_THRESHOLD:.0e}"
        )
    return InitialField(field, norm, tail)


def make_random_field(
    geom: StripGeometry,
    seed: int,
    nx_max: int | None = None,
    j_max: int | None = None,
) -> Field:
    """Band-limited random field with unit L2 norm.

    Coefficients are drawn from a seeded normal distribution on the block
    n <= nx_max, j <= j_max (defaults: half the dealiasing band in each
    direction), making the corpus reproducible across runs.
    """
    if nx_max is None:
        nx_max = max(1, geom.Nx // 6)
    if j_max is None:
        j_max = max(1, geom.Ny // 3)
    nx_max = min(nx_max, geom.Nx // 2)
    j_max = min(j_max, geom.Ny)

    rng = np.random.default_rng(seed)
    coeffs = np.zeros((geom.Nx // 2 + 1, geom.Ny), dtype=complex)
    block = rng.standard_normal((nx_max + 1, j_max)) + 1j * rng.standard_normal(
        (nx_max + 1, j_max)
    )
    block[0, :] = block[0, :].real  # mean mode of a real field is real
    coeffs[: nx_max + 1, :j_max] = block
    f = Field(geom, coeffs)
    return f * (1.0 / np.sqrt(f.l2sq()))
