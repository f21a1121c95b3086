"""Periodic pseudospectral core: grids, fields, the fractional Laplacian as a
Fourier multiplier, quadrature, and the Helmholtz (Sobolev) inverse.

Conventions: the box is [-R, R)^d with periodic identification, n points per
axis (even), spacing h = 2R/n, wavenumbers xi_k = pi*k/R for k in
[-n/2, n/2). The multiplier of the fractional Laplacian of order alpha is
|xi|^(2*alpha) with the zero mode annihilated exactly, so constants are in
its kernel and quadratic forms pair consistently with the rectangle rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatch, InvalidGrid, InvalidInput, NonFinite, NonpositiveShift


@dataclass(frozen=True)
class Grid:
    """Uniform periodic tensor grid on [-R, R)^d."""

    d: int
    R: float
    n: int

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.n

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def weight(self) -> float:
        """Quadrature weight h^d of the rectangle rule."""
        return self.h**self.d

    @cached_property
    def axis(self) -> np.ndarray:
        """1-D coordinates along one axis; x = 0 sits at index n//2."""
        return -self.R + self.h * np.arange(self.n)

    @cached_property
    def coords(self):
        """List of d shaped coordinate arrays (meshgrid, 'ij' indexing)."""
        return list(np.meshgrid(*([self.axis] * self.d), indexing="ij"))

    @cached_property
    def _xi_sq(self) -> np.ndarray:
        """|xi|^2 on the real-transform layout (last axis halved)."""
        full = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)
        half = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.h)
        axes = [full] * (self.d - 1) + [half]
        parts = np.meshgrid(*axes, indexing="ij")
        out = np.zeros_like(parts[0])
        for p in parts:
            out += p * p
        return out

    def index_of(self, point) -> tuple:
        """Grid index of a point that must lie on the grid (within 1e-9*h)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = (point + self.R) / self.h
        rounded = np.rint(idx)
        if np.max(np.abs(idx - rounded)) > 1e-9:
            raise InvalidInput(f"point {point} is not a grid point")
        return tuple(int(i) % self.n for i in rounded)

    def point_of(self, index) -> np.ndarray:
        return np.array([self.axis[i] for i in np.atleast_1d(index)])


@dataclass
class Field:
    """Real samples on a grid, stored flat in row-major axis order."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.size:
            raise InvalidGrid(
                f"field length {self.values.size} != grid size {self.grid.size}"
            )

    @property
    def shaped(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def make_grid(d: int, R: float, n: int) -> Grid:
    if d not in (1, 2, 3):
        raise InvalidGrid(f"dimension must be 1, 2 or 3, got {d}")
    if R <= 0:
        raise InvalidGrid(f"half-width must be positive, got {R}")
    if n < 8 or n % 2 != 0:
        raise InvalidGrid(f"points per axis must be even and >= 8, got {n}")
    return Grid(d=int(d), R=float(R), n=int(n))


def _check_finite(u: Field, what: str = "field"):
    if not np.all(np.isfinite(u.values)):
        raise NonFinite(f"{what} contains NaN or Inf")


def _check_same_grid(u: Field, v: Field):
    if u.grid != v.grid:
        raise GridMismatch(f"grids differ: {u.grid} vs {v.grid}")


def _check_alpha(alpha: float):
    if not (0.0 < alpha <= 1.0):
        raise InvalidInput(f"order alpha must lie in (0, 1], got {alpha}")


def apply_frac_laplacian(u: Field, alpha: float) -> Field:
    """Apply (-Lap)^alpha through the multiplier |xi|^(2*alpha)."""
    _check_finite(u)
    _check_alpha(alpha)
    g = u.grid
    uhat = np.fft.rfftn(u.shaped)
    mult = g._xi_sq**alpha
    mult.flat[0] = 0.0
    out = np.fft.irfftn(uhat * mult, s=g.shape, axes=range(g.d))
    return Field(g, out)


def inner_l2(u: Field, v: Field) -> float:
    """Rectangle-rule L2 pairing with weight h^d."""
    _check_same_grid(u, v)
    _check_finite(u)
    _check_finite(v)
    return u.grid.weight * float(np.dot(u.values, v.values))


def gagliardo_sq(u: Field, alpha: float) -> float:
    """Squared H^alpha energy seminorm <u, (-Lap)^alpha u>."""
    return inner_l2(u, apply_frac_laplacian(u, alpha))


def norm_lp(u: Field, p: float) -> float:
    if p < 1:
        raise InvalidInput(f"exponent p must be >= 1, got {p}")
    _check_finite(u)
    return float(u.grid.weight * np.sum(np.abs(u.values) ** p)) ** (1.0 / p)


def norm_l2(u: Field) -> float:
    _check_finite(u)
    return float(np.sqrt(u.grid.weight * np.dot(u.values, u.values)))


def helmholtz_inverse(v: Field, alpha: float, c: float) -> Field:
    """Solve ((-Lap)^alpha + c) w = v exactly in Fourier space."""
    if c <= 0:
        raise NonpositiveShift(f"shift must be positive, got {c}")
    _check_finite(v)
    _check_alpha(alpha)
    g = v.grid
    vhat = np.fft.rfftn(v.shaped)
    mult = g._xi_sq**alpha
    mult.flat[0] = 0.0
    out = np.fft.irfftn(vhat / (mult + c), s=g.shape, axes=range(g.d))
    return Field(g, out)


def resample_field(u: Field, target: Grid) -> Field:
    """Move a field between same-spacing grids by centered crop/zero-pad.

    Both grids put x = 0 at index n//2, so the index offset is the integer
    (n_t - n_s)/2 per axis. Incommensurate spacings are rejected.
    """
    src = u.grid
    if src == target:
        return u.copy()
    if src.d != target.d:
        raise GridMismatch(f"dimension mismatch: {src.d} vs {target.d}")
    if abs(src.h - target.h) > 1e-12 * max(src.h, target.h):
        raise GridMismatch(
            f"incommensurate spacings: h={src.h} vs h={target.h}"
        )
    ns, nt = src.n, target.n
    out = np.zeros(target.shape)
    if nt >= ns:
        off = (nt - ns) // 2
        sl = tuple(slice(off, off + ns) for _ in range(src.d))
        out[sl] = u.shaped
    else:
        off = (ns - nt) // 2
        sl = tuple(slice(off, off + nt) for _ in range(src.d))
        out[...] = u.shaped[sl]
    return Field(target, out)
