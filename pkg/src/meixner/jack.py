r"""One-part Jack polynomials and the Laplace transform of a random rank-one projection.

For a one-part partition ``(k)`` the Jack polynomial is

.. math::

    \mathbb{J}_{(k)}(\theta;\beta) = \frac{(-1)^k k!}{(\beta/2)_k}
    \sum_{\nu_1 + 2\nu_2 + \dots = k}
    \frac{(-1)^{|\nu|} (\beta/2)_{|\nu|}}{\nu_1!\nu_2!\cdots}
    \sigma_1^{\nu_1}\sigma_2^{\nu_2}\cdots ,

and averaging ``exp <theta|P>`` over a uniform rank-one projection gives

.. math::

    L_n(\theta) = \sum_k \frac{(-1)^k}{(n\beta/2)_k}
    \sum_{\nu} \frac{(-1)^{|\nu|} (\beta/2)_{|\nu|}}{\prod \nu_j!}
    \prod_j \sigma_j^{\nu_j}.

Only ``nu_j`` with ``j <= n`` contribute because ``sigma_j`` vanishes for
``j > n``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .algebra import MatrixH, SigmaPoint, eigenvalues, elementary_symmetric, sigma
from .special import MAX_PARTITION_WEIGHT, partitions, pochhammer

CLOSED_FORM_MIN_GAP = 1e-4


@dataclass(frozen=True)
class JackSeriesConfig:
    """Truncation order ``max_k`` (at most 40) and the space ``(n, beta)``."""

    n: int
    beta: int
    max_k: int = 30

    def __post_init__(self):
        if not 0 <= self.max_k <= MAX_PARTITION_WEIGHT:
            raise ValueError(f"max_k must lie in [0, {MAX_PARTITION_WEIGHT}], got {self.max_k}")


@dataclass(frozen=True)
class SeriesResult:
    value: float
    last_term: float
    converged: bool


@functools.lru_cache(maxsize=None)
def _inner_table(k: int, n: int, beta: float) -> tuple:
    """``(exponents, coefficients)`` of ``sum_nu (-1)^|nu| (beta/2)_|nu| / prod nu! sigma^nu``.

    ``exponents`` has shape ``(terms, n)``; partitions with a part larger
    than ``n`` are dropped.
    """
    exps, coefs = [], []
    for lam in partitions(k):
        if lam.parts and lam.parts[0] > n:
            continue
        nu = lam.multiplicities()
        length = len(lam)
        c = (-1) ** length * pochhammer(beta / 2.0, length)
        for m in nu:
            c /= math.factorial(m)
        row = np.zeros(n, dtype=int)
        row[: min(n, len(nu))] = nu[:n]
        exps.append(row)
        coefs.append(c)
    if not exps:
        return np.zeros((0, n), dtype=int), np.zeros(0)
    return np.array(exps), np.array(coefs)


def _monomials(sig: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """``prod_j sig_j ** exps[t, j]`` for every term ``t``; shape ``(..., terms)``."""
    return np.prod(sig[..., None, :] ** exps, axis=-1)


def _as_sigma(theta, n: int | None = None) -> np.ndarray:
    if isinstance(theta, MatrixH):
        return sigma(theta).sigma
    if isinstance(theta, SigmaPoint):
        return np.asarray(theta.sigma)
    return np.asarray(theta, dtype=float)


def jack_one_part(k: int, theta, beta: int) -> float:
    """Value of the one-part Jack polynomial ``J_(k)`` at ``theta``.

    ``theta`` may be a :class:`MatrixH`, a :class:`SigmaPoint` or an array of
    elementary symmetric values (last axis).
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > MAX_PARTITION_WEIGHT:
        raise OverflowError(f"k={k} exceeds the supported maximum {MAX_PARTITION_WEIGHT}")
    sig = _as_sigma(theta)
    n = sig.shape[-1]
    exps, coefs = _inner_table(k, n, float(beta))
    pref = (-1) ** k * math.factorial(k) / pochhammer(beta / 2.0, k)
    return pref * (_monomials(sig, exps) @ coefs)


@functools.lru_cache(maxsize=None)
def _series_table(n: int, beta: float, max_k: int) -> tuple:
    """Flattened exponents, coefficients and degree of every term up to ``max_k``."""
    all_exps, all_coefs, degree = [], [], []
    for k in range(max_k + 1):
        exps, coefs = _inner_table(k, n, beta)
        scale = (-1) ** k / pochhammer(n * beta / 2.0, k)
        all_exps.append(exps)
        all_coefs.append(coefs * scale)
        degree.append(np.full(len(coefs), k))
    return np.concatenate(all_exps), np.concatenate(all_coefs), np.concatenate(degree)


def lt_rank1_series_sigma(sig, n: int, beta: int, max_k: int = 30) -> tuple:
    """Vectorised series: ``(values, last_term_magnitude)`` for sigma arrays of shape ``(..., n)``."""
    sig = np.asarray(sig, dtype=float)
    exps, coefs, degree = _series_table(n, float(beta), max_k)
    terms = _monomials(sig, exps) * coefs
    total = terms.sum(axis=-1)
    last = np.abs(terms[..., degree == max_k].sum(axis=-1))
    return total, last


def lt_rank1_series(theta, config: JackSeriesConfig) -> SeriesResult:
    """Truncated series for ``E exp <theta|P>`` with ``P`` a uniform rank-one projection.

    ``converged`` is false when the degree-``max_k`` contribution exceeds
    ``1e-12`` times the partial sum.
    """
    sig = _as_sigma(theta)
    if sig.shape[-1] != config.n:
        raise ValueError("theta does not match the configured n")
    value, last = lt_rank1_series_sigma(sig, config.n, config.beta, config.max_k)
    value, last = float(value), float(last)
    return SeriesResult(value, last, bool(last <= 1e-12 * abs(value)))


def rank1_closed_n3_beta2(eigs) -> float:
    """Twice the second divided difference of ``exp`` at three eigenvalues.

    Raises ``ValueError`` when two eigenvalues are closer than ``1e-4``, where
    cancellation makes the formula unreliable.
    """
    t1, t2, t3 = (float(x) for x in eigs)
    gaps = (abs(t1 - t2), abs(t1 - t3), abs(t2 - t3))
    if min(gaps) <= CLOSED_FORM_MIN_GAP:
        raise ValueError("eigenvalues too close for the closed form; use the series")
    e1, e2, e3 = math.exp(t1), math.exp(t2), math.exp(t3)
    return 2 * (e1 - e2) / ((t1 - t2) * (t2 - t3)) + 2 * (e1 - e3) / ((t1 - t3) * (t3 - t2))


def lt_rank1(theta: MatrixH, max_k: int = 40) -> float:
    """Rank-one projection Laplace transform, using the closed form when it is safe."""
    if theta.n == 3 and theta.beta == 2:
        ev = eigenvalues(theta)
        if np.min(np.diff(ev)) > CLOSED_FORM_MIN_GAP:
            return rank1_closed_n3_beta2(ev)
    return lt_rank1_series(theta, JackSeriesConfig(theta.n, theta.beta, max_k)).value


def lt_bernoulli_n3(theta, q1: float, q2: float, q3: float, beta: int = 2, max_k: int = 40) -> float:
    """Bernoulli ensemble on 3x3 matrices: ``q0 + q1 L3(theta) + q2 e^{s1} L3(-theta) + q3 e^{s1}``."""
    qs = (q1, q2, q3)
    if any(q < 0 for q in qs) or sum(qs) > 1 + 1e-12:
        raise ValueError("weights must be nonnegative with sum at most 1")
    if isinstance(theta, MatrixH):
        sig = sigma(theta).sigma
        beta = theta.beta
    else:
        sig = np.asarray(_as_sigma(theta), dtype=float)
    if sig.shape[-1] != 3:
        raise ValueError("theta must be 3x3")
    flip = sig * np.array([-1.0, 1.0, -1.0])
    l_plus, _ = lt_rank1_series_sigma(sig, 3, beta, max_k)
    l_minus, _ = lt_rank1_series_sigma(flip, 3, beta, max_k)
    e1 = np.exp(sig[..., 0])
    q0 = 1.0 - sum(qs)
    return q0 + q1 * l_plus + q2 * e1 * l_minus + q3 * e1


def sigma_from_eigs(eigs) -> np.ndarray:
    return elementary_symmetric(np.asarray(eigs, dtype=float))
