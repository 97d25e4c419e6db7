"""Periodic grid on the torus [-pi, pi), nodal fields and the Fourier bridge.

The discrete Fourier convention used throughout the package is

    uhat(k) = (1/n) * sum_i f(x_i) exp(-i k x_i),   k = -n/2, ..., n/2 - 1,

so that ``uhat(k)`` approximates the k-th Fourier coefficient of the
2*pi-periodic function. Parseval then reads ``mean(f**2) == sum |uhat|**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform periodic mesh with ``n`` nodes ``x_i = -pi + i * delta``."""

    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    mesh: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 4:
            raise ValueError(f"grid needs at least 4 nodes, got {self.n}")
        if self.n % 2:
            raise ValueError(f"grid size must be even, got {self.n}")
        delta = 2.0 * np.pi / self.n
        nodes = -np.pi + delta * np.arange(self.n)
        nodes.flags.writeable = False
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "mesh", delta)
        object.__setattr__(self, "nodes", nodes)

    @property
    def delta(self) -> float:
        return self.mesh

    def wavenumbers(self) -> np.ndarray:
        """Wavenumbers in FFT storage order (0, 1, ..., n/2-1, -n/2, ..., -1)."""
        return np.fft.fftfreq(self.n, 1.0 / self.n)

    def field(self, values) -> "Field":
        return Field(self, values)

    def sample(self, func) -> "Field":
        return Field(self, func(self.nodes))


def make_grid(n: int) -> Grid:
    return Grid(n)


class Field:
    """Real nodal values on a :class:`Grid`. Immutable."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        vals = np.array(values, dtype=float)
        if vals.shape != (grid.n,):
            raise ValueError(
                f"field needs {grid.n} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __repr__(self):
        return f"Field(n={self.grid.n}, min={self.values.min():.6g}, max={self.values.max():.6g})"

    def __len__(self):
        return self.grid.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __add__(self, other):
        return Field(self.grid, self.values + _values_of(other, self.grid))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - _values_of(other, self.grid))

    def __mul__(self, other):
        return Field(self.grid, self.values * _values_of(other, self.grid))

    __rmul__ = __mul__

    def shift(self, s: int) -> "Field":
        """Grid-aligned translation: ``out(x_i) = f(x_{i-s})``."""
        return Field(self.grid, np.roll(self.values, s))

    def mean(self) -> float:
        return float(np.mean(self.values))


def _values_of(other, grid):
    if isinstance(other, Field):
        if other.grid != grid:
            raise ValueError("fields live on different grids")
        return other.values
    return other


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients ``uhat(k)`` for ``k = -n/2 .. n/2-1`` (ascending)."""

    grid: Grid
    coeffs: np.ndarray

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.grid.n // 2, self.grid.n // 2)

    def __getitem__(self, k: int) -> complex:
        n = self.grid.n
        if not -n // 2 <= k < n // 2:
            raise IndexError(f"wavenumber {k} outside [{-n // 2}, {n // 2})")
        return complex(self.coeffs[k + n // 2])


def _phase(n: int) -> np.ndarray:
    # x_0 = -pi turns exp(-i k x_i) into (-1)^k times the FFT kernel
    return np.where(np.arange(-n // 2, n // 2) % 2 == 0, 1.0, -1.0)


def dft(f: Field) -> Spectrum:
    n = f.grid.n
    raw = np.fft.fftshift(np.fft.fft(f.values)) / n
    return Spectrum(f.grid, raw * _phase(n))


def idft(s: Spectrum) -> Field:
    n = s.grid.n
    raw = np.fft.ifftshift(s.coeffs * _phase(n)) * n
    return Field(s.grid, np.fft.ifft(raw).real)


def lp_norm(f: Field, p: float) -> float:
    """Rectangle-rule L^p(T) norm; ``p = inf`` gives the nodal max."""
    p = float(p)
    if not p >= 1.0:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    if p == 2.0:
        return float(np.sqrt(f.grid.mesh * np.dot(a, a)))
    return float((f.grid.mesh * np.sum(a ** p)) ** (1.0 / p))


def extrema(f: Field) -> tuple[float, float, float]:
    """Nodal ``(min, max, max - min)``."""
    m = float(f.values.min())
    M = float(f.values.max())
    return m, M, M - m
