r"""Normalized Bessel functions, Pochhammer symbols and integer partitions.

The normalized Bessel functions are

.. math::

    \mathcal{I}_\nu(x) = \Gamma(\nu+1)(2/x)^\nu I_\nu(x)
        = \sum_{k\ge 0} \frac{(x^2/4)^k}{k!\,(\nu+1)_k},
    \qquad \mathcal{J}_\nu(x) = \mathcal{I}_\nu(ix).

Both are entire functions of ``z = x**2``.  The ``*_sq`` variants take ``z``
directly, which avoids square roots of slightly negative numbers near
repeated eigenvalues.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special as sp

MAX_TERMS = 200
MAX_PARTITION_WEIGHT = 40


def _check_nu(nu: float) -> None:
    if nu <= -1:
        raise ValueError(f"nu must exceed -1, got {nu}")


def bessel_I_sq(nu: float, z):
    """``I_nu(sqrt(z))`` (normalized) as a power series in ``z``.

    Accepts scalars or arrays, real or complex.  Terms are added until the
    last one is below ``1e-16`` times the running sum, with at most 200 terms.
    """
    _check_nu(nu)
    z = np.asarray(z)
    dtype = np.result_type(z.dtype, float)
    q = z.astype(dtype) / 4.0
    term = np.ones_like(q)
    total = np.ones_like(q)
    for k in range(1, MAX_TERMS):
        term = term * q / (k * (nu + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-16 * np.abs(total)):
            break
    return total[()] if total.ndim == 0 else total


def bessel_J_sq(nu: float, z):
    """``J_nu(sqrt(z))`` (normalized), i.e. ``bessel_I_sq(nu, -z)``."""
    return bessel_I_sq(nu, -np.asarray(z))


def bessel_I_norm(nu: float, x):
    """Normalized modified Bessel function of the first kind."""
    x = np.asarray(x)
    return bessel_I_sq(nu, x * x)


def bessel_J_norm(nu: float, x):
    """Normalized Bessel function of the first kind."""
    x = np.asarray(x)
    return bessel_J_sq(nu, x * x)


def bessel_I_sq_deriv(nu: float, z):
    """``d/dz I_nu(sqrt(z)) = I_{nu+1}(sqrt(z)) / (4 (nu+1))``.

    With the normalization used here the factor ``1/(nu+1)`` appears because
    ``(nu+1)_{k+1} = (nu+1)(nu+2)_k``.
    """
    return bessel_I_sq(nu + 1, z) / (4.0 * (nu + 1))


def beta_nu(beta: int) -> float:
    """Bessel order ``(beta - 1) / 2`` attached to a Peirce constant."""
    return (beta - 1) / 2.0


@functools.lru_cache(maxsize=None)
def bessel_zeros(nu: float, count: int = 50) -> tuple:
    """First ``count`` positive zeros of ``J_nu`` (and of its normalized form).

    Sign changes of ``scipy.special.jv`` are bracketed on a grid of step 0.5
    and refined with Brent's method.
    """
    _check_nu(nu)
    zeros = []
    lo = 1e-6
    f_lo = sp.jv(nu, lo)
    step = 0.5
    while len(zeros) < count:
        hi = lo + step
        f_hi = sp.jv(nu, hi)
        if f_lo == 0.0:
            zeros.append(lo)
        elif f_lo * f_hi < 0:
            zeros.append(optimize.brentq(lambda t: sp.jv(nu, t), lo, hi, xtol=1e-14))
        lo, f_lo = hi, f_hi
    return tuple(zeros[:count])


@functools.lru_cache(maxsize=None)
def bessel_first_zero(beta: int) -> float:
    """``ell_beta``, the first positive zero of the normalized ``J_{(beta-1)/2}``.

    The bracket from :func:`bessel_zeros` is refined on the series
    evaluation itself so the zero is consistent with :func:`bessel_J_norm`.
    """
    if beta not in (1, 2, 4):
        raise ValueError(f"beta must be 1, 2 or 4, got {beta!r}")
    nu = beta_nu(beta)
    guess = bessel_zeros(nu, 1)[0]
    return float(optimize.brentq(lambda t: float(bessel_J_norm(nu, t)), guess - 0.1, guess + 0.1, xtol=1e-15))


def bessel_J_product(nu: float, x, count: int = 50):
    """Truncated product ``prod_{k <= count} (1 - x^2 / j_k^2)`` over the zeros of ``J_nu``.

    The omitted factors change the value by a relative amount of about
    ``x^2 sum_{k > count} j_k^{-2}``; see :func:`bessel_product_tail`.
    """
    zeros = np.asarray(bessel_zeros(nu, count))
    x = np.asarray(x, dtype=float)
    return np.prod(1.0 - (x[..., None] / zeros) ** 2, axis=-1)


def bessel_product_tail(nu: float, count: int = 50) -> float:
    """``sum_{k > count} j_k^{-2}`` from the identity ``sum_k j_k^{-2} = 1 / (4 (nu + 1))``."""
    zeros = np.asarray(bessel_zeros(nu, count))
    return 1.0 / (4.0 * (nu + 1.0)) - float(np.sum(zeros**-2.0))


def pochhammer(b: float, k: int) -> float:
    """Rising factorial ``b (b+1) ... (b+k-1)``."""
    if k < 0 or int(k) != k:
        raise ValueError("k must be a nonnegative integer")
    out = 1.0
    for i in range(int(k)):
        out *= b + i
    return out


def log_gamma(x: float) -> float:
    return math.lgamma(x)


@dataclass(frozen=True)
class Partition:
    """A weakly decreasing tuple of positive integers."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts if p != 0)
        if any(p < 0 for p in parts):
            raise ValueError("parts must be positive")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError("parts must be weakly decreasing")
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def multiplicities(self) -> tuple:
        """``(nu_1, ..., nu_k)`` with ``nu_j`` the number of parts equal to ``j``."""
        k = self.weight
        nu = [0] * k
        for p in self.parts:
            nu[p - 1] += 1
        return tuple(nu)

    @classmethod
    def from_multiplicities(cls, nu) -> Partition:
        parts = []
        for j in range(len(nu), 0, -1):
            parts.extend([j] * nu[j - 1])
        return cls(tuple(parts))


def beta_pochhammer(b: float, lam: Partition, beta: float) -> float:
    """Generalized Pochhammer ``prod_j (b - (beta/2)(j-1))_{lam_j}``."""
    out = 1.0
    for j, part in enumerate(lam.parts):
        out *= pochhammer(b - 0.5 * beta * j, part)
    return out


@functools.lru_cache(maxsize=None)
def _partitions(k: int, largest: int) -> tuple:
    if k == 0:
        return ((),)
    out = []
    for first in range(min(k, largest), 0, -1):
        for rest in _partitions(k - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions(k: int) -> list:
    """All partitions of ``k`` in reverse lexicographic order, ``(k)`` first."""
    if k < 0 or int(k) != k:
        raise ValueError("k must be a nonnegative integer")
    if k > MAX_PARTITION_WEIGHT:
        raise ValueError(f"k={k} exceeds the supported maximum {MAX_PARTITION_WEIGHT}")
    return [Partition(p) for p in _partitions(int(k), int(k))]
