r"""Closed-form Laplace transforms, their domains, and Monte Carlo estimates.

Every closed form is a function of the elementary symmetric values
``sigma = (sigma_1, ..., sigma_n)`` of ``theta``; the functions ending in
``_sigma`` accept arrays of shape ``(..., n)`` and return arrays.

Bessel terms are evaluated as power series in the squared argument, so
``sigma_1**2 - 4 sigma_2`` may be slightly negative from rounding without
any branch issue.

The n=2 solution families take the argument ``kappa sqrt(sigma_1^2 - 4 sigma_2)``
(equivalently ``2 kappa sqrt(t)`` with ``t = sigma_1^2/4 - sigma_2``), which is
the bounded solution of ``2 t y'' + (1 + beta) y' - 2 kappa^2 y = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import MatrixH, SigmaPoint, sigma, sigma_batch
from .ensembles import (
    Bernoulli,
    Binomial,
    EnsembleSpec,
    Gamma2,
    GammaN,
    Gaussian,
    Hyperbolic2,
    NegBinomial,
    Poisson,
)
from .jack import lt_rank1_series_sigma
from .special import beta_nu, bessel_first_zero, bessel_I_sq, bessel_J_sq

SERIES_MAX_K = 40


@dataclass(frozen=True)
class LaplaceEval:
    """``value = exp(k)`` inside the domain; ``value = inf`` and ``k = None`` outside."""

    value: float
    in_domain: bool
    k: float | None

    @classmethod
    def from_log(cls, k: float, in_domain: bool) -> LaplaceEval:
        if not in_domain or not np.isfinite(k):
            return cls(math.inf, False, None)
        return cls(math.exp(k), True, float(k))

    def to_json(self) -> dict:
        return {"value": self.value, "in_domain": self.in_domain, "k": self.k}


class UnsupportedLaplace(ValueError):
    """No closed form is implemented for this (family, n) combination."""


# ---------------------------------------------------------------------------
# projections


def _flip(sig: np.ndarray) -> np.ndarray:
    """Sigma values of ``-theta``."""
    n = sig.shape[-1]
    return sig * (-1.0) ** np.arange(1, n + 1)


def rank1_sigma(sig: np.ndarray, beta: int) -> np.ndarray:
    """Laplace transform of a uniform rank-one projection."""
    n = sig.shape[-1]
    if n == 1:
        return np.exp(sig[..., 0])
    if n == 2:
        s1, s2 = sig[..., 0], sig[..., 1]
        return np.exp(s1 / 2) * bessel_I_sq(beta_nu(beta), s1**2 / 4 - s2)
    value, _ = lt_rank1_series_sigma(sig, n, beta, SERIES_MAX_K)
    return value


def projection_lt_sigma(m: int, sig: np.ndarray, beta: int) -> np.ndarray:
    """Laplace transform of a uniform rank-``m`` projection.

    Ranks ``0, 1, n-1, n`` are available for every ``n`` through
    ``P_{n-1} = I - P_1``; other ranks raise :class:`UnsupportedLaplace`.
    """
    n = sig.shape[-1]
    if m == 0:
        return np.ones(sig.shape[:-1])
    if m == n:
        return np.exp(sig[..., 0])
    if m == 1:
        return rank1_sigma(sig, beta)
    if m == n - 1:
        return np.exp(sig[..., 0]) * rank1_sigma(_flip(sig), beta)
    raise UnsupportedLaplace(f"rank-{m} projections at n={n} have no implemented closed form")


def bernoulli_mix_sigma(q, sig: np.ndarray, beta: int) -> np.ndarray:
    """``sum_{j>=1} q_j L_{P_j}(theta)`` (the ``q_0`` term excluded)."""
    out = np.zeros(sig.shape[:-1])
    for j, qj in enumerate(q, start=1):
        if qj != 0:
            out = out + qj * projection_lt_sigma(j, sig, beta)
    return out


# ---------------------------------------------------------------------------
# closed forms


def _ray_positive(c0: float, lin: np.ndarray, quad: np.ndarray) -> np.ndarray:
    """Whether ``c0 - lin s + quad s^2 > 0`` for every ``s`` in ``[0, 1]``."""
    at1 = c0 - lin + quad
    ok = at1 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        s_star = np.where(quad > 0, lin / (2 * quad), -1.0)
        vertex = c0 - lin**2 / (4 * np.where(quad > 0, quad, 1.0))
    interior = (s_star > 0) & (s_star < 1)
    return ok & np.where(interior, vertex > 0, True)


def log_laplace_sigma(spec: EnsembleSpec, sig) -> tuple:
    """``(k, in_domain)`` arrays for a batch of sigma points."""
    sig = np.asarray(sig, dtype=float)
    if sig.shape[-1] != spec.n:
        raise ValueError(f"sigma has {sig.shape[-1]} entries, spec has n={spec.n}")
    beta, n = spec.beta, spec.n
    s1 = sig[..., 0]
    s2 = sig[..., 1] if n > 1 else np.zeros_like(s1)
    ones = np.ones(s1.shape, dtype=bool)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if isinstance(spec, Bernoulli):
            return np.log(spec.q0 + bernoulli_mix_sigma(spec.q, sig, beta)), ones
        if isinstance(spec, Binomial):
            q0 = max(0.0, 1.0 - sum(spec.q))
            return spec.N * np.log(q0 + bernoulli_mix_sigma(spec.q, sig, beta)), ones
        if isinstance(spec, Poisson):
            k = bernoulli_mix_sigma(spec.lam, sig, beta) - spec.total
            return k, ones
        if isinstance(spec, NegBinomial):
            inner = bernoulli_mix_sigma(spec.q, sig, beta)
            dom = inner < 1
            k = spec.r * (math.log(spec.p) - np.log(np.where(dom, 1 - inner, 1.0)))
            return np.where(dom, k, np.inf), dom
        if isinstance(spec, Gaussian):
            tr_sq = s1**2 - 2 * s2
            return spec.c1 * s1 + spec.c2 * s1**2 / 2 + spec.c3 * tr_sq / 2, ones
        if isinstance(spec, (Gamma2, GammaN)):
            lin, quad = gamma_form_coeffs(spec, sig)
            dom = _ray_positive(1.0, lin, quad)
            form = 1 - lin + quad
            k = -spec.p * np.log(np.where(dom, form, 1.0))
            return np.where(dom, k, np.inf), dom
        if isinstance(spec, Hyperbolic2):
            disc = s1**2 - 4 * s2
            ell = bessel_first_zero(beta)
            dom = (np.abs(s1 + spec.phi) < math.pi / 2) & (disc < ell**2)
            base = (
                (1 - spec.lam) * np.cos(s1)
                - spec.rho * np.sin(s1)
                + spec.lam * bessel_J_sq(beta_nu(beta), disc)
            )
            dom = dom & (base > 0)
            k = -spec.alpha * np.log(np.where(dom, base, 1.0))
            return np.where(dom, k, np.inf), dom
    raise UnsupportedLaplace(f"no closed form for {spec!r}")


def gamma_form_coeffs(spec, sig: np.ndarray) -> tuple:
    """Linear and quadratic parts of the gamma base ``1 - lin + quad``.

    For the 2x2 family ``lin = 2 c sqrt(1+beta) sigma_1`` and
    ``quad = beta sigma_1^2 + 4 sigma_2``; for the general-n family
    ``lin = c sigma_1`` and ``quad = (beta (n-1) + 2) sigma_1^2 - 2 tr(theta^2)``.
    """
    beta, n = spec.beta, spec.n
    s1 = sig[..., 0]
    s2 = sig[..., 1] if n > 1 else np.zeros_like(s1)
    if isinstance(spec, Gamma2):
        return 2 * spec.c * math.sqrt(1 + beta) * s1, beta * s1**2 + 4 * s2
    tr_sq = s1**2 - 2 * s2
    return spec.c * s1, (beta * (n - 1) + 2) * s1**2 - 2 * tr_sq


def lt_closed(spec: EnsembleSpec, theta: MatrixH) -> LaplaceEval:
    """Closed-form ``E exp <theta|X>`` with a domain flag."""
    if (theta.n, theta.beta) != (spec.n, spec.beta):
        raise ValueError("theta and spec must share n and beta")
    k, dom = log_laplace_sigma(spec, sigma(theta).sigma)
    return LaplaceEval.from_log(float(k), bool(dom))


def log_laplace_coords(spec: EnsembleSpec, coords) -> tuple:
    """Batch version of :func:`lt_closed` on coordinate arrays; returns ``(k, in_domain)``."""
    return log_laplace_sigma(spec, sigma_batch(np.asarray(coords, dtype=float), spec.n, spec.beta))


def lt_empirical(samples, theta: MatrixH) -> tuple:
    """Sample mean and standard error of ``exp <theta|X_i>``."""
    if isinstance(samples, np.ndarray):
        coords = np.atleast_2d(samples)
    else:
        samples = list(samples)
        if samples and any((s.n, s.beta) != (theta.n, theta.beta) for s in samples):
            raise ValueError("samples and theta must share n and beta")
        coords = np.array([s.coords for s in samples]).reshape(len(samples), -1)
    if coords.shape[0] == 0:
        raise ValueError("empty sample batch")
    if coords.shape[1] != theta.dim:
        raise ValueError("samples and theta must share n and beta")
    w = np.exp(coords @ theta.coords)
    mean = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(len(w))) if len(w) > 1 else 0.0
    return mean, se


# ---------------------------------------------------------------------------
# n = 2 solution families


SOLUTION_CASES = ("parabolic", "elliptic", "hyperbolic", "poisson", "gaussian")


def _elliptic_constants(c: dict) -> tuple:
    a, b = float(c["a"]), float(c["b"])
    if a == 0 or not b * b > 4 * a:
        raise ValueError("elliptic case needs a != 0 and b^2 > 4a")
    kappa = math.sqrt(b * b - 4 * a)
    if "lam" in c:
        lam = float(c["lam"])
        c1, c2, c3 = ((1 - lam) - b / kappa) / 2, ((1 - lam) + b / kappa) / 2, lam
    else:
        c1, c2, c3 = float(c["C1"]), float(c["C2"]), float(c["C3"])
        tol = 1e-9 * (1 + abs(c1) + abs(c2) + abs(c3))
        if abs(c1 + c2 + c3 - 1) > tol or abs(c2 - c1 - b / kappa) > tol:
            raise ValueError("elliptic constants need C1 + C2 + C3 = 1 and C2 - C1 = b / kappa")
    return a, b, kappa, c1, c2, c3


def solution_g_sigma(case: str, constants: dict, s1, s2, beta: int, printed_scaling: bool = False):
    """The function ``g(sigma_1, sigma_2)`` of each n=2 solution family.

    With ``printed_scaling=True`` the elliptic, hyperbolic and Poisson
    families use the Bessel argument ``kappa sqrt(sigma_1^2/4 - sigma_2)``
    instead, which does not solve the system; it is kept for comparison.
    """
    s1 = np.asarray(s1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    disc = s1**2 - 4 * s2
    if printed_scaling:
        disc = disc / 4
    nu = beta_nu(beta)
    if case == "parabolic":
        b, C = float(constants["b"]), float(constants["C"])
        return 1 - b * s1 + C * (beta * s1**2 + 4 * s2)
    if case == "elliptic":
        _, _, kappa, c1, c2, c3 = _elliptic_constants(constants)
        return c1 * np.exp(kappa * s1) + c2 * np.exp(-kappa * s1) + c3 * bessel_I_sq(nu, kappa**2 * disc)
    if case == "hyperbolic":
        a, b = float(constants["a"]), float(constants["b"])
        if not 4 * a > b * b:
            raise ValueError("hyperbolic case needs b^2 < 4a")
        lam = float(constants["lam"])
        kappa = math.sqrt(4 * a - b * b)
        return (
            (1 - lam) * np.cos(kappa * s1)
            - (b / kappa) * np.sin(kappa * s1)
            + lam * bessel_J_sq(nu, kappa**2 * disc)
        )
    if case == "poisson":
        b, C = float(constants["b"]), float(constants["C"])
        if b == 0:
            raise ValueError("poisson case needs b != 0")
        return (
            (1 - C) * np.exp(2 * b * s1)
            + (2 * C - 1) * np.exp(b * s1) * bessel_I_sq(nu, b * b * disc)
            - C
        ) / (2 * b * b)
    if case == "gaussian":
        C = float(constants["C"])
        return C * s1**2 / 2 - (1 - C) * (2.0 / beta) * s2
    raise ValueError(f"unknown solution case {case!r}; expected one of {SOLUTION_CASES}")


def solution_log_L_sigma(case: str, constants: dict, s1, s2, beta: int) -> tuple:
    """``(log L, in_domain)`` of a solution family from its ``g``."""
    s1 = np.asarray(s1, dtype=float)
    g = solution_g_sigma(case, constants, s1, s2, beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        if case in ("parabolic", "elliptic", "hyperbolic"):
            if case == "parabolic":
                b = float(constants["b"])
                if b == 0:
                    raise ValueError("parabolic case needs b != 0")
                a = b * b / 4
            else:
                a, b = float(constants["a"]), float(constants["b"])
            dom = g > 0
            k = -b * s1 / (4 * a) - np.log(np.where(dom, g, 1.0)) / (4 * a)
            return np.where(dom, k, np.inf), dom
        if case == "poisson":
            b = float(constants["b"])
            return g - s1 / (2 * b), np.isfinite(g)
        return g, np.isfinite(g)


def lt_solution_family(case: str, constants: dict, theta, beta: int | None = None) -> LaplaceEval:
    """Evaluate a candidate n=2 Laplace transform at a matrix or a sigma point."""
    if isinstance(theta, MatrixH):
        if theta.n != 2:
            raise ValueError("solution families are defined for n = 2")
        beta = theta.beta
        sig = sigma(theta).sigma
    else:
        sig = theta.sigma if isinstance(theta, SigmaPoint) else np.asarray(theta, dtype=float)
        if beta is None:
            raise ValueError("beta is required when theta is given as a sigma point")
        if sig.shape[-1] != 2:
            raise ValueError("solution families are defined for n = 2")
    k, dom = solution_log_L_sigma(case, constants, sig[0], sig[1], beta)
    return LaplaceEval.from_log(float(k), bool(dom))


def standardized_solution(spec: EnsembleSpec) -> tuple:
    """``(case, constants)`` reproducing a standardized n=2 family as a solution family.

    Binomial, negative binomial, Poisson, gamma and hyperbolic laws are
    mapped onto the elliptic, Poisson, parabolic and hyperbolic formulas.
    """
    from .ensembles import mean_rank, printed_ab, theoretical_moments

    if spec.n != 2:
        raise ValueError("solution families are defined for n = 2")
    a, b = printed_ab(spec)
    _, var = theoretical_moments(spec)
    if isinstance(spec, (Binomial, Bernoulli)):
        q = spec.q
        q0 = 1 - sum(q)
        return "elliptic", {"a": a, "b": b, "C1": q[1], "C2": q0, "C3": q[0]}
    if isinstance(spec, NegBinomial):
        p = spec.p
        return "elliptic", {"a": a, "b": b, "C1": -spec.q[1] / p, "C2": 1 / p, "C3": -spec.q[0] / p}
    if isinstance(spec, Poisson):
        lb = mean_rank(spec.lam)
        return "poisson", {"b": b, "C": 1 - spec.lam[1] / (2 * lb)}
    if isinstance(spec, (Gamma2, GammaN)):
        return "parabolic", {"b": b, "C": 1 / var}
    if isinstance(spec, Hyperbolic2):
        return "hyperbolic", {"a": a, "b": b, "lam": spec.lam}
    if isinstance(spec, Gaussian):
        return "gaussian", {"C": (spec.c2 + spec.c3) / var}
    raise UnsupportedLaplace(f"no solution family for {spec.family}")
