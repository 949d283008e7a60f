r"""The second-order system satisfied by Laplace transforms of Meixner ensembles.

Writing a rotation-invariant function through ``g(sigma_1, ..., sigma_n)``,
row ``j`` of the operator is

.. math::

    \mathbb{D}(g)_j = \sum_{r,s \le j} \sigma_{r+s-1-j} g_{rs}
        - \sum_{r,s \ge j+1} \sigma_{r+s-1-j} g_{rs}
        - (n-j)\frac{\beta}{2} g_{j+1},

with ``sigma_0 = 1`` and ``sigma_i = 0`` outside ``0..n``.  The right-hand
side depends on the standardized constants ``(a, b)``:

* case I (``a != 0``): ``((b^2 - 4a) g, 0, ..., 0)`` for ``g = exp(-4ak - b tr)``;
* case II (``a = 0, b != 0``): ``2b grad g`` for ``g = k + tr / (2b)``;
* case III (``a = b = 0``): ``(1, 0, ..., 0)`` for ``g = k``.

Residual checkers for the matrix forms ``Psi(k'')(I) = I + 2b k' + 4a k'^2``
and ``2(1-A) Psi(L'')(I) L = 2(1+A) L'^2 + 2B L L' + C L^2 I`` are included.
Derivatives come from central differences evaluated as one vectorised batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    MatrixH,
    SigmaPoint,
    SymEndo,
    eigenvalues,
    expansion_coefficients,
    psi_apply,
)
from .ensembles import EnsembleSpec, printed_ab, theoretical_moments
from .laplace import log_laplace_coords, solution_g_sigma

GRAD_STEP = 1e-5
HESS_STEP = 1e-4

__all__ = [
    "PdeCase",
    "GDerivs",
    "d_operator",
    "d_operator_rows",
    "d_operator_pj",
    "expansion_coefficients",
    "pde_rhs",
    "pde_residual",
    "residual_from_derivs",
    "fd_derivatives",
    "solution_g",
    "solution_case",
    "f_to_g_transform",
    "k_equation_residual",
    "pre_L_residual",
    "standardized_log_laplace",
]


@dataclass(frozen=True)
class PdeCase:
    """Case tag ``I`` (a != 0), ``II`` (a = 0, b != 0) or ``III`` (a = b = 0)."""

    tag: str
    a: float
    b: float

    def __post_init__(self):
        expected = "I" if self.a != 0 else ("II" if self.b != 0 else "III")
        if self.tag != expected:
            raise ValueError(f"case {self.tag!r} is inconsistent with a={self.a}, b={self.b}")

    @classmethod
    def from_ab(cls, a: float, b: float) -> PdeCase:
        tag = "I" if a != 0 else ("II" if b != 0 else "III")
        return cls(tag, float(a), float(b))

    def to_json(self) -> dict:
        return {"tag": self.tag, "a": self.a, "b": self.b}


@dataclass(frozen=True, eq=False)
class GDerivs:
    """Value, gradient and Hessian of ``g`` at a sigma point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    at: SigmaPoint

    def __post_init__(self):
        grad = np.asarray(self.grad, dtype=float).reshape(-1)
        hess = np.asarray(self.hess, dtype=float)
        n = self.at.n
        if grad.shape != (n,) or hess.shape != (n, n):
            raise ValueError("gradient and Hessian must match the sigma point dimension")
        if np.max(np.abs(hess - hess.T), initial=0.0) > 1e-9 * (1 + np.max(np.abs(hess), initial=0.0)):
            raise ValueError("Hessian is not symmetric")
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", hess)

    def g1(self, i: int) -> float:
        """``g_i`` with 1-based index, zero beyond ``n``."""
        return float(self.grad[i - 1]) if 1 <= i <= self.at.n else 0.0

    def g2(self, r: int, s: int) -> float:
        return float(self.hess[r - 1, s - 1])


def d_operator_rows(d: GDerivs, beta: int) -> np.ndarray:
    """Operator assembled from the explicit row formula."""
    n = d.at.n
    out = np.zeros(n)
    for j in range(1, n + 1):
        acc = 0.0
        for r in range(1, j + 1):
            for s in range(1, j + 1):
                acc += d.at.get(r + s - 1 - j) * d.g2(r, s)
        for r in range(j + 1, n + 1):
            for s in range(j + 1, n + 1):
                acc -= d.at.get(r + s - 1 - j) * d.g2(r, s)
        acc -= (n - j) * (beta / 2) * d.g1(j + 1)
        out[j - 1] = acc
    return out


def d_operator_pj(d: GDerivs, beta: int) -> np.ndarray:
    """Operator assembled from the product-expansion coefficients ``P_j(r, s)``."""
    n = d.at.n
    out = np.zeros(n)
    for r in range(1, n + 1):
        for s in range(1, n + 1):
            out += d.g2(r, s) * expansion_coefficients(d.at, r, s)
    for j in range(1, n + 1):
        out[j - 1] += (beta / 2) * (j - n) * d.g1(j + 1)
    return out


def d_operator(d: GDerivs, beta: int) -> np.ndarray:
    """The n-vector ``D(g)`` at ``d.at``."""
    return d_operator_pj(d, beta)


def pde_rhs(case: PdeCase, d: GDerivs) -> np.ndarray:
    n = d.at.n
    rhs = np.zeros(n)
    if case.tag == "I":
        rhs[0] = (case.b**2 - 4 * case.a) * d.value
    elif case.tag == "II":
        rhs = 2 * case.b * d.grad
    else:
        rhs[0] = 1.0
    return rhs


def residual_from_derivs(case: PdeCase, d: GDerivs, beta: int) -> np.ndarray:
    """``D(g) - RHS`` from supplied (for example exact) derivatives."""
    return d_operator(d, beta) - pde_rhs(case, d)


# ---------------------------------------------------------------------------
# finite differences on vectors


def _stencil(x: np.ndarray, hg: np.ndarray, hh: np.ndarray) -> tuple:
    """Stencil points for a central gradient (steps ``hg``) and Hessian (steps ``hh``)."""
    d = x.shape[0]
    pts = [x]
    for a in range(d):
        e = np.zeros(d)
        e[a] = hg[a]
        pts += [x + e, x - e]
    for a in range(d):
        e = np.zeros(d)
        e[a] = hh[a]
        pts += [x + e, x - e]
    for a in range(d):
        for b in range(a + 1, d):
            ea = np.zeros(d)
            eb = np.zeros(d)
            ea[a], eb[b] = hh[a], hh[b]
            pts += [x + ea + eb, x + ea - eb, x - ea + eb, x - ea - eb]
    return np.array(pts)


def _assemble(vals: np.ndarray, d: int, hg: np.ndarray, hh: np.ndarray) -> tuple:
    f0 = vals[0]
    grad = np.empty(d)
    for a in range(d):
        grad[a] = (vals[1 + 2 * a] - vals[2 + 2 * a]) / (2 * hg[a])
    hess = np.empty((d, d))
    base = 1 + 2 * d
    for a in range(d):
        fp, fm = vals[base + 2 * a], vals[base + 2 * a + 1]
        hess[a, a] = (fp - 2 * f0 + fm) / hh[a] ** 2
    idx = base + 2 * d
    for a in range(d):
        for b in range(a + 1, d):
            pp, pm, mp, mm = vals[idx : idx + 4]
            hess[a, b] = hess[b, a] = (pp - pm - mp + mm) / (4 * hh[a] * hh[b])
            idx += 4
    return f0, grad, hess


def fd_derivatives(
    fbatch: Callable[[np.ndarray], np.ndarray],
    x,
    grad_step: float = GRAD_STEP,
    hess_step: float = HESS_STEP,
    per_component: bool = True,
) -> tuple:
    """Value, central gradient and central Hessian of a vectorised function.

    Steps are relative: ``step * (1 + |x_a|)`` per component when
    ``per_component`` is true, otherwise ``step * (1 + ||x||)``.  Raises
    ``ValueError`` when any stencil value is not finite (stencil leaves the
    domain).
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    scale = 1 + np.abs(x) if per_component else np.full(d, 1 + np.linalg.norm(x))
    hg, hh = grad_step * scale, hess_step * scale
    vals = np.asarray(fbatch(_stencil(x, hg, hh)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("finite-difference stencil leaves the domain")
    return _assemble(vals, d, hg, hh)


# ---------------------------------------------------------------------------
# residuals in sigma coordinates


def pde_residual(
    case: PdeCase,
    g: Callable[[np.ndarray], np.ndarray],
    point: SigmaPoint,
    beta: int,
    n: int | None = None,
    check_domain: bool = True,
) -> np.ndarray:
    """``D(g) - RHS`` at ``point`` with finite-difference derivatives.

    ``g`` takes an array of sigma vectors (last axis ``n``) and returns the
    values.  Points outside the distinct-root region are rejected.
    """
    n = point.n if n is None else n
    if point.n != n:
        raise ValueError("point dimension does not match n")
    if check_domain and not point.in_domain():
        raise ValueError("sigma point lies outside the distinct-root region")
    value, grad, hess = fd_derivatives(lambda pts: np.asarray(g(pts), dtype=float), point.sigma)
    return residual_from_derivs(case, GDerivs(value, grad, hess, point), beta)


def solution_case(case: str, constants: dict) -> PdeCase:
    """PDE case of an n=2 solution family."""
    if case == "parabolic":
        b = float(constants["b"])
        return PdeCase.from_ab(b * b / 4, b)
    if case in ("elliptic", "hyperbolic"):
        return PdeCase.from_ab(float(constants["a"]), float(constants["b"]))
    if case == "poisson":
        return PdeCase.from_ab(0.0, float(constants["b"]))
    if case == "gaussian":
        return PdeCase.from_ab(0.0, 0.0)
    raise ValueError(f"unknown solution case {case!r}")


def solution_g(case: str, constants: dict, beta: int, printed_scaling: bool = False) -> Callable:
    """Vectorised ``g`` of an n=2 solution family, for use with :func:`pde_residual`."""

    def g(pts):
        pts = np.asarray(pts, dtype=float)
        return solution_g_sigma(case, constants, pts[..., 0], pts[..., 1], beta, printed_scaling)

    return g


# ---------------------------------------------------------------------------
# matrix-form residuals


def _min_gap(theta: MatrixH) -> float:
    ev = eigenvalues(theta)
    return float(np.min(np.diff(ev))) if ev.size > 1 else math.inf


def f_to_g_transform(case: PdeCase, k: Callable[[MatrixH], float], theta: MatrixH) -> float:
    """The case-dependent ``g`` value at ``sigma(theta)`` built from a cumulant ``k``."""
    ev = eigenvalues(theta)
    if _min_gap(theta) <= 1e-9 * (1 + np.max(np.abs(ev))):
        raise ValueError("theta has repeated eigenvalues; the sigma chart is singular there")
    kv = float(k(theta))
    tr = theta.trace()
    if case.tag == "I":
        return math.exp(-4 * case.a * kv - case.b * tr)
    if case.tag == "II":
        return kv + tr / (2 * case.b)
    return kv


def standardized_log_laplace(spec: EnsembleSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised ``k~(theta) = k(theta / sd) - (mean / sd) tr(theta)`` on coordinate arrays."""
    mean, var = theoretical_moments(spec)
    sd = math.sqrt(var)
    n = spec.n

    def kb(coords):
        coords = np.asarray(coords, dtype=float)
        k, dom = log_laplace_coords(spec, coords / sd)
        k = np.where(dom, k, np.nan)
        return k - (mean / sd) * coords[..., :n].sum(axis=-1)

    return kb


def _matrix_derivs(fbatch, theta: MatrixH, grad_step, hess_step) -> tuple:
    value, grad, hess = fd_derivatives(fbatch, theta.coords, grad_step, hess_step, per_component=False)
    n, beta = theta.n, theta.beta
    return value, MatrixH(n, beta, grad), SymEndo(n, beta, hess)


def k_equation_residual(
    spec_or_k,
    a: float | None = None,
    b: float | None = None,
    theta: MatrixH | None = None,
    grad_step: float = GRAD_STEP,
    hess_step: float = HESS_STEP,
) -> MatrixH:
    """``Psi(k'')(I) - (I + 2b k' + 4a k'^2)`` for a standardized cumulant.

    ``spec_or_k`` is either an :class:`EnsembleSpec` (standardized internally
    from its exact moments, with ``(a, b)`` defaulting to the family's values)
    or a vectorised cumulant acting on coordinate arrays.
    """
    if theta is None:
        raise ValueError("theta is required")
    if isinstance(spec_or_k, EnsembleSpec):
        if a is None or b is None:
            pa, pb = printed_ab(spec_or_k)
            a = pa if a is None else a
            b = pb if b is None else b
        kb = standardized_log_laplace(spec_or_k)
    else:
        if a is None or b is None:
            raise ValueError("a and b are required for a bare cumulant")
        kb = spec_or_k
    _, kp, kpp = _matrix_derivs(kb, theta, grad_step, hess_step)
    lhs = psi_apply(kpp)
    eye = MatrixH.identity(theta.n, theta.beta)
    return lhs - (eye + 2 * b * kp + 4 * a * kp.square())


def pre_L_residual(
    L,
    A: float,
    B: float,
    C: float,
    theta: MatrixH,
    grad_step: float = GRAD_STEP,
    hess_step: float = HESS_STEP,
) -> MatrixH:
    """``2(1-A) Psi(L'')(I) L - 2(1+A) L'^2 - 2B L L' - C L^2 I`` (unstandardized)."""
    if isinstance(L, EnsembleSpec):
        spec = L

        def lb(coords):
            k, dom = log_laplace_coords(spec, coords)
            return np.where(dom, np.exp(k), np.nan)

    else:
        lb = L
    val, lp, lpp = _matrix_derivs(lb, theta, grad_step, hess_step)
    eye = MatrixH.identity(theta.n, theta.beta)
    return (
        2 * (1 - A) * val * psi_apply(lpp)
        - 2 * (1 + A) * lp.square()
        - 2 * B * val * lp
        - C * val**2 * eye
    )

