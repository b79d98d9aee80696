"""Norms, functionals, and decay-rate fits for fields and run histories.

All weighted pairings carry an explicit weight rate ``b`` and integrate
exp(2*b*x)*f*g over the strip.  x uses the uniform trapezoid rule on
[-Lx, Lx] (the periodic grid value at -Lx serves both endpoints); y uses
the interior rectangle rule matched to the sine basis, which is exact
for sine-content integrands, while y-derivative (cosine-content)
energies are summed in mode space where their orthogonality is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.fft import irfft

from .geometry import StripGeometry

if TYPE_CHECKING:
    from .fields import Field

CONTAMINATION_THRESHOLD = 1e-6
TAIL_BAND_FRACTION = 0.1

NORM_COLUMNS = ("l2", "diss_cum", "w_l2", "w_h1", "sup_w", "tail")


def _x_weights(geom: StripGeometry, b: float) -> np.ndarray:
    """Trapezoid weights for int_{-Lx}^{Lx} exp(2bx) * (periodic fn) dx."""
    w = geom.dx * np.exp(2.0 * b * geom.x_grid())
    w[0] = geom.dx * math.cosh(2.0 * b * geom.Lx)
    return w


def _weighted_quad(
    geom: StripGeometry, b: float, fvals: np.ndarray, gvals: np.ndarray
) -> float:
    wx = _x_weights(geom, b)
    return geom.dy * float(np.sum(wx[:, None] * fvals * gvals))


def weighted_inner(b: float, f: "Field", g: "Field") -> float:
    """Weighted pairing (exp(2bx) f, g) over the strip."""
    if f.geometry != g.geometry:
        raise ValueError("fields live on different grids")
    return _weighted_quad(f.geometry, b, f.values, g.values)


def weighted_dy_sq(u: "Field", b: float) -> float:
    """(exp(2bx), u_y^2), with the y-integral done in mode space.

    u_y is a cosine series, which the interior rectangle rule does not
    integrate exactly (cosines carry mass at the walls); the per-mode
    identity int u_y^2 dy = sum_j lambda_j a_j(x)^2 is exact instead.
    """
    geom = u.geometry
    modal_x = irfft(u.coeffs * geom.Nx, n=geom.Nx, axis=0)
    lam = geom.eigenvalues()
    wx = _x_weights(geom, b)
    return float(np.sum(wx[:, None] * lam[None, :] * modal_x**2))


def tail_mass(u: "Field", b: float) -> float:
    """Fraction of (exp(2bx), u^2) carried by the outer 10% x-bands.

    The grid point at -Lx doubles as the periodic +Lx endpoint; its
    trapezoid half-cells are assigned to the left and right band
    respectively.  Returns 0 for a zero field.
    """
    geom = u.geometry
    x = geom.x_grid()
    usq = np.sum(u.values**2, axis=1)
    density = np.exp(2.0 * b * x) * usq
    endpoint_left = 0.5 * math.exp(-2.0 * b * geom.Lx) * usq[0]
    endpoint_right = 0.5 * math.exp(2.0 * b * geom.Lx) * usq[0]
    total = float(np.sum(density[1:])) + endpoint_left + endpoint_right
    if total == 0.0:
        return 0.0
    edge = (1.0 - 2.0 * TAIL_BAND_FRACTION) * geom.Lx
    band = (x >= edge) | (x <= -edge)
    band[0] = False
    in_band = float(np.sum(density[band])) + endpoint_left + endpoint_right
    return in_band / total


@dataclass(frozen=True)
class NormSample:
    """Diagnostics of one snapshot.

    l2       : squared L2 norm of u
    diss_cum : accumulated dissipation 2*int_0^t ||u_x||^2 ds
    w_l2     : (exp(2bx), u^2)
    w_h1     : (exp(2bx), u^2 + |grad u|^2)
    sup_w    : grid maximum of |exp(bx) u|
    tail     : weighted tail-mass fraction
    """

    t: float
    l2: float
    diss_cum: float
    w_l2: float
    w_h1: float
    sup_w: float
    tail: float


def sample_field(u: "Field", b: float, t: float, l2: float | None = None,
                 diss_cum: float = 0.0) -> NormSample:
    """Compute the full diagnostic record for one field."""
    geom = u.geometry
    vals = u.values
    ux = u.dx().values
    wx = _x_weights(geom, b)
    w_l2 = geom.dy * float(np.sum(wx[:, None] * vals**2))
    w_h1 = w_l2 + geom.dy * float(np.sum(wx[:, None] * ux**2)) \
        + weighted_dy_sq(u, b)
    sup_w = float(np.max(np.abs(np.exp(b * geom.x_grid())[:, None] * vals)))
    if l2 is None:
        l2 = u.l2sq()
    return NormSample(
        t=t, l2=float(l2), diss_cum=float(diss_cum), w_l2=w_l2, w_h1=w_h1,
        sup_w=sup_w, tail=tail_mass(u, b),
    )


@dataclass
class TimeSeries:
    """Diagnostics history of one run, with provenance."""

    geometry: StripGeometry
    samples: list[NormSample]
    solver_config: object | None = None
    status: str = "clean"
    contaminated_at: float | None = None
    snapshots: list | None = None
    blow_up_time: float | None = None
    provenance: dict = field(default_factory=dict)

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        if name not in NORM_COLUMNS:
            raise ValueError(f"unknown norm column: {name!r}")
        return np.array([getattr(s, name) for s in self.samples])

    def clean_end(self) -> float:
        """Time of the last sample before contamination (run end if clean)."""
        last = None
        for s in self.samples:
            if s.tail > CONTAMINATION_THRESHOLD:
                break
            last = s.t
        if last is None:
            raise ValueError("run is contaminated from the first sample")
        return last

    def flag_contamination(self):
        """Set status from the recorded per-sample tail masses."""
        for s in self.samples:
            if s.tail > CONTAMINATION_THRESHOLD:
                self.status = "contaminated"
                self.contaminated_at = s.t
                return
        self.status = "clean"
        self.contaminated_at = None


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential-decay fit over a time window."""

    t0: float
    t1: float
    rate: float
    residual: float
    norm: str


def fit_decay_rate(series: TimeSeries, norm: str, t0: float, t1: float) -> DecayFit:
    """Slope of -log(norm) versus t on [t0, t1], by least squares.

    Requires at least 10 samples in the window and positive norm values.
    """
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    t = series.times()
    v = series.column(norm)
    mask = (t >= t0) & (t <= t1)
    if int(np.sum(mask)) < 10:
        raise ValueError(
            f"need >= 10 samples in [{t0}, {t1}], found {int(np.sum(mask))}"
        )
    tw, vw = t[mask], v[mask]
    if np.any(vw <= 0):
        raise ValueError(f"nonpositive {norm} values in fit window")
    y = -np.log(vw)
    design = np.column_stack([tw, np.ones_like(tw)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ [slope, intercept] - y) ** 2)))
    return DecayFit(t0=float(tw[0]), t1=float(tw[-1]), rate=float(slope),
                    residual=resid, norm=norm)


def default_fit_window(series: TimeSeries) -> tuple[float, float]:
    """Last half of the clean prefix of the series.

    Truncation-contaminated samples carry boundary wrap-around artifacts
    the decay theorems say nothing about, so fits skip them; for a clean
    run this is simply the last half of the series.
    """
    t_end = series.clean_end()
    t_first = series.samples[0].t
    return (t_first + 0.5 * (t_end - t_first), t_end)


def energy_residual(series: TimeSeries) -> float:
    """Max relative defect of ||u||^2(t) + 2 int ||u_x||^2 - ||u_0||^2."""
    if not series.samples:
        raise ValueError("empty series")
    l2 = series.column("l2")
    diss = series.column("diss_cum")
    if l2[0] == 0.0:
        return 0.0 if float(np.max(l2 + diss)) == 0.0 else math.inf
    return float(np.max(np.abs(l2 + diss - l2[0]))) / l2[0]


def compute_J0(u0: "Field", b: float) -> float:
    """Weighted regularity functional of the initial data.

    Quadrature of u^2 + exp(2bx)*[u^2 + |grad u|^2 + |grad u_x|^2
    + u^2 u_x^2 + |Delta u_x|^2], all derivatives spectral; the
    y-derivative energies are summed in mode space.
    """
    geom = u0.geometry
    vals = u0.values
    ux = u0.dx()
    uxv = ux.values
    uxxv = u0.dx(2).values
    lap_ux = (u0.dx(3) + ux.dyy()).values

    total = u0.l2sq()
    weighted = vals**2 + uxv**2 + uxxv**2 + vals**2 * uxv**2 + lap_ux**2
    wx = _x_weights(geom, b)
    total += geom.dy * float(np.sum(wx[:, None] * weighted))
    total += weighted_dy_sq(u0, b) + weighted_dy_sq(ux, b)
    if not math.isfinite(total):
        raise FloatingPointError("non-finite intermediate in J0 quadrature")
    return total
