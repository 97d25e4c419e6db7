"""Discrete half-Laplacians, derivatives and the seminorms built on them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .grid import Field
from .kernels import SPECTRAL, KernelSpec, quadrature_weights


def _rk(n):
    return np.arange(n // 2 + 1, dtype=float)


def apply_symbol(values: np.ndarray, symbol) -> np.ndarray:
    """Multiply the rfft of ``values`` by ``symbol(k)`` for k = 0..n/2."""
    n = values.shape[0]
    return np.fft.irfft(symbol(_rk(n)) * np.fft.rfft(values), n)


def halflap(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    return np.fft.irfft(_rk(n) * np.fft.rfft(values), n)


def grad(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    c = 1j * _rk(n) * np.fft.rfft(values)
    c[-1] = c[-1].real  # Nyquist: drop imaginary part
    return np.fft.irfft(c, n)


def dealiased_product_hat(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """rfft coefficients of ``a * b`` computed on a 3/2 padded grid.

    Inputs and output have their Nyquist mode removed, so the result is the
    exact truncated convolution of the retained modes.
    """
    n = a.shape[0]
    M = 3 * n // 2
    h = n // 2
    A = np.zeros(M // 2 + 1, dtype=complex)
    B = np.zeros(M // 2 + 1, dtype=complex)
    A[:h] = np.fft.rfft(a)[:h]
    B[:h] = np.fft.rfft(b)[:h]
    prod = np.fft.irfft(A, M) * np.fft.irfft(B, M)
    out = np.zeros(h + 1, dtype=complex)
    # unscaled padding: inputs each need M/n, output needs n/M
    out[:h] = np.fft.rfft(prod)[:h] * (M / n)
    return out


def dealiased_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.fft.irfft(dealiased_product_hat(a, b), a.shape[0])


def halflap_spectral(f: Field) -> Field:
    """``|d/dx| f`` through the symbol ``|k|``."""
    return Field(f.grid, halflap(f.values))


def halflap_delta(f: Field, delta: float) -> Field:
    """Regularised half-Laplacian with symbol ``(1 - exp(-delta |k|)) / delta``."""
    if not delta > 0:
        raise ValueError(f"regularisation parameter must be positive, got {delta}")
    return Field(f.grid, apply_symbol(f.values, lambda k: -np.expm1(-delta * k) / delta))


def grad_spectral(f: Field) -> Field:
    return Field(f.grid, grad(f.values))


def pv_apply(f: Field, g: Field, spec: KernelSpec = SPECTRAL) -> Field:
    """Principal-value quadrature with the diagonal excluded::

        out_i = delta * sum_{j != i} K_per(x_j - x_i) (f_j - f_i) g_j
    """
    if f.grid != g.grid:
        raise ValueError("pv_apply: fields live on different grids")
    w = quadrature_weights(f.grid, spec)
    return Field(f.grid, _backend.pv_sum(f.values, g.values, w))


def _coeff_moduli(values: np.ndarray):
    """(k >= 0, |uhat(k)|, multiplicity) covering the full range -n/2..n/2-1."""
    n = values.shape[0]
    a = np.abs(np.fft.rfft(values)) / n
    mult = np.full(n // 2 + 1, 2.0)
    mult[0] = 1.0
    mult[-1] = 1.0
    return _rk(n), a, mult


def h_half_sq(values: np.ndarray) -> float:
    k, a, mult = _coeff_moduli(values)
    return float(2.0 * np.pi * np.sum(mult * k * a * a))


def h_half_seminorm_sq(f: Field) -> float:
    """``2 pi sum_k |k| |uhat(k)|^2``."""
    return h_half_sq(f.values)


UNRESOLVED = 1e-13


def analytic_norm(f: Field, rho: float) -> float:
    """``sum_k exp(|k| rho) |uhat(k)|``.

    Coefficients below ``UNRESOLVED`` times the largest one are round-off and
    are left out; ``exp(|k| rho)`` would otherwise amplify them (by about
    1e14 at k = 32, rho = 1).
    """
    if not rho >= 0:
        raise ValueError(f"analytic radius must be nonnegative, got {rho}")
    k, a, mult = _coeff_moduli(f.values)
    a = np.where(a > UNRESOLVED * a.max(), a, 0.0)
    return float(np.sum(mult * np.exp(k * rho) * a))


@dataclass(frozen=True)
class SeminormReport:
    h_half_sq: float
    analytic: dict = field(default_factory=dict)


def seminorm_report(f: Field, radii=(0.0, 0.1)) -> SeminormReport:
    return SeminormReport(h_half_seminorm_sq(f),
                          {float(r): analytic_norm(f, r) for r in radii})
