"""Right-hand sides of the non-local Burgers equation in its several forms.

All forms integrate ``u_t = u |d/dx| u - |d/dx|(u^2)``:

* ``u_quadrature`` -- the singular integral ``p.v. int K_per(y-x)(u(y)-u(x))u(y) dy``
  by diagonal-excluded quadrature;
* ``u_spectral`` -- Fourier multipliers with 3/2-rule de-aliasing;
* ``w_symmetrized`` -- the evolution of ``w = u^2`` with the harmonic-mean kernel;
* ``v_fluctuation`` -- zero-mean part ``v`` plus the running mean ``mu``;
* ``frozen`` -- the twin model with the mean feedback removed;
* ``fem`` -- P1 finite elements ``A U' = J(U, U)`` with a circulant mass matrix.

Spectral paths are multiplied by ``spec.symbol_scale`` so that, in either
kernel mode, every form evolves the same equation as the quadrature path.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _backend
from .grid import Field, Grid
from .kernels import SPECTRAL, KernelSpec, _weights
from .operators import dealiased_product, dealiased_product_hat, halflap, h_half_sq


class EquationForm(str, enum.Enum):
    U_QUADRATURE = "u_quadrature"
    U_SPECTRAL = "u_spectral"
    W_SYMMETRIZED = "w_symmetrized"
    V_FLUCTUATION = "v_fluctuation"
    FROZEN = "frozen"
    FEM = "fem"

    @classmethod
    def parse(cls, value) -> "EquationForm":
        if isinstance(value, cls):
            return value
        aliases = {"w": cls.W_SYMMETRIZED, "v": cls.V_FLUCTUATION,
                   "quadrature": cls.U_QUADRATURE, "spectral": cls.U_SPECTRAL}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(
                f"unknown equation form {value!r}; expected one of "
                f"{[f.value for f in cls] + sorted(aliases)}") from None


# -- array kernels ---------------------------------------------------------

def _quad(u, spec):
    return _backend.pv_sum(u, u, _weights(u.shape[0], spec.c1))


def _spectral_bracket(v):
    """De-aliased ``v |d/dx| v - |d/dx|(v^2)``."""
    n = v.shape[0]
    k = np.arange(n // 2 + 1, dtype=float)
    hat = dealiased_product_hat(v, halflap(v)) - k * dealiased_product_hat(v, v)
    return np.fft.irfft(hat, n)


def _spectral(u, spec):
    return spec.symbol_scale * _spectral_bracket(u)


def _w(wv, spec):
    if np.any(wv <= 0):
        raise ValueError("w-form needs a strictly positive state")
    return _backend.w_sum(wv, np.sqrt(wv), _weights(wv.shape[0], spec.c1))


def _mean_tol(v):
    return 1e-10 * max(1.0, float(np.max(np.abs(v))))


def _fluctuation(v, mu, spec):
    s = spec.symbol_scale
    out = -s * mu * halflap(v) + s * _spectral_bracket(v)
    return out - out.mean(), s * h_half_sq(v) / (2.0 * np.pi)


def _frozen(v, spec):
    out = spec.symbol_scale * _spectral_bracket(v)
    return out - out.mean()


# -- public, Field-level --------------------------------------------------

def rhs_u_quadrature(u: Field, spec: KernelSpec = SPECTRAL) -> Field:
    """``delta * sum_{j != i} K_per(x_j - x_i) (u_j - u_i) u_j``."""
    return Field(u.grid, _quad(u.values, spec))


def rhs_u_spectral(u: Field, spec: KernelSpec = SPECTRAL) -> Field:
    return Field(u.grid, _spectral(u.values, spec))


def rhs_w(w: Field, spec: KernelSpec = SPECTRAL) -> Field:
    """``delta * sum_{j != i} (w_j - w_i) k(x_i, x_j)`` with ``u = sqrt(w)``."""
    return Field(w.grid, _w(w.values, spec))


def rhs_v_fluctuation(v: Field, mu: float, spec: KernelSpec = SPECTRAL):
    """Returns ``(dv/dt, dmu/dt)`` for the split ``u = mu + v``."""
    if abs(v.mean()) > _mean_tol(v.values):
        raise ValueError(f"fluctuation must have zero mean, got {v.mean():.3e}")
    dv, dmu = _fluctuation(v.values, float(mu), spec)
    return Field(v.grid, dv), dmu


def rhs_frozen(v: Field, spec: KernelSpec = SPECTRAL) -> Field:
    return Field(v.grid, _frozen(v.values, spec))


@dataclass(frozen=True)
class FemSystem:
    """P1 elements on the periodic grid; ``A`` is the circulant mass matrix."""

    grid: Grid
    mass_stencil: tuple
    mass_eigs: np.ndarray

    def mass_matvec(self, U: np.ndarray) -> np.ndarray:
        a, b, _ = self.mass_stencil
        return b * U + a * (np.roll(U, 1) + np.roll(U, -1))

    def mass_solve(self, J: np.ndarray) -> np.ndarray:
        n = self.grid.n
        return np.fft.irfft(np.fft.rfft(J) / self.mass_eigs[: n // 2 + 1], n)

    def energy(self, U) -> float:
        """Discrete energy ``U^T A U``."""
        U = np.asarray(U, dtype=float)
        return float(np.dot(U, self.mass_matvec(U)))


def fem_assemble(grid: Grid) -> FemSystem:
    d = grid.mesh
    stencil = (d / 6.0, 4.0 * d / 6.0, d / 6.0)
    k = np.arange(grid.n)
    eigs = (d / 6.0) * (4.0 + 2.0 * np.cos(2.0 * np.pi * k / grid.n))
    eigs.flags.writeable = False
    return FemSystem(grid, stencil, eigs)


def _fem(sys, U, spec):
    # load vector: nodal collocation of the non-local form against hat functions
    J = sys.grid.mesh * _quad(U, spec)
    return sys.mass_solve(J)


def fem_rhs(sys: FemSystem, U: Field, spec: KernelSpec = SPECTRAL) -> Field:
    """``A^{-1} J(U, U)``, the inverse applied mode by mode."""
    return Field(U.grid, _fem(sys, U.values, spec))


# -- state-vector view used by the integrators ------------------------------

class Formulation:
    """Maps a nodal ``u`` to the evolved state vector and back.

    ``norm_factor`` multiplies the quadrature weight in the CFL rule; the FEM
    mass inverse amplifies the highest mode by 3.
    """

    positive_state = False
    norm_factor = 1.0

    def __init__(self, form: EquationForm, grid: Grid, spec: KernelSpec):
        self.form = form
        self.grid = grid
        self.spec = spec

    def encode(self, u: np.ndarray) -> np.ndarray:
        return np.array(u, dtype=float)

    def decode(self, y: np.ndarray) -> np.ndarray:
        return y

    def rhs(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def filter(self, y: np.ndarray, level: float) -> np.ndarray:
        """Drop Fourier modes of the grid part of ``y`` below ``level``."""
        n = self.grid.n
        c = np.fft.rfft(y[:n])
        c[np.abs(c) < level * n] = 0.0
        out = np.array(y, dtype=float)
        out[:n] = np.fft.irfft(c, n)
        return out


class _Quadrature(Formulation):
    def rhs(self, y):
        return _quad(y, self.spec)


class _Spectral(Formulation):
    def rhs(self, y):
        return _spectral(y, self.spec)


class _Symmetrized(Formulation):
    positive_state = True

    def encode(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0):
            raise ValueError("w-form needs strictly positive initial data")
        return u * u

    def decode(self, y):
        return np.sqrt(y)

    def rhs(self, y):
        return _w(y, self.spec)


class _Fluctuation(Formulation):
    def encode(self, u):
        u = np.asarray(u, dtype=float)
        mu = u.mean()
        return np.append(u - mu, mu)

    def decode(self, y):
        return y[:-1] + y[-1]

    def rhs(self, y):
        v = y[:-1]
        if abs(v.mean()) > _mean_tol(v):
            raise ValueError(f"fluctuation lost its zero mean ({v.mean():.3e})")
        dv, dmu = _fluctuation(v, y[-1], self.spec)
        return np.append(dv, dmu)


class _Frozen(Formulation):
    def rhs(self, y):
        return _frozen(y, self.spec)


class _Fem(Formulation):
    norm_factor = 3.0

    def __init__(self, form, grid, spec):
        super().__init__(form, grid, spec)
        self.system = fem_assemble(grid)

    def rhs(self, y):
        return _fem(self.system, y, self.spec)


_FORMS = {
    EquationForm.U_QUADRATURE: _Quadrature,
    EquationForm.U_SPECTRAL: _Spectral,
    EquationForm.W_SYMMETRIZED: _Symmetrized,
    EquationForm.V_FLUCTUATION: _Fluctuation,
    EquationForm.FROZEN: _Frozen,
    EquationForm.FEM: _Fem,
}


def formulation(form, grid: Grid, spec: KernelSpec = SPECTRAL) -> Formulation:
    form = EquationForm.parse(form)
    return _FORMS[form](form, grid, spec)


def rhs(u: Field, form, spec: KernelSpec = SPECTRAL) -> Field:
    """Time derivative of the nodal ``u`` implied by ``form``."""
    sys = formulation(form, u.grid, spec)
    y = sys.encode(u.values)
    dy = sys.rhs(y)
    if sys.form is EquationForm.W_SYMMETRIZED:
        return Field(u.grid, dy / (2.0 * u.values))
    if sys.form is EquationForm.V_FLUCTUATION:
        return Field(u.grid, dy[:-1] + dy[-1])
    return Field(u.grid, dy)


__all__ = [
    "EquationForm", "FemSystem", "Formulation", "dealiased_product",
    "fem_assemble", "fem_rhs", "formulation", "rhs", "rhs_frozen",
    "rhs_u_quadrature", "rhs_u_spectral", "rhs_v_fluctuation", "rhs_w",
]
