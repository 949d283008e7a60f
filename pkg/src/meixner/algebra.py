r"""Hermitian matrices over the reals, complexes and quaternions.

An element of :math:`\mathbb{H}_{n,\beta}` is stored by its real coordinates in
a fixed orthonormal basis for :math:`\langle x|y\rangle = \Re\operatorname{tr}(xy)`:

* the diagonal units ``E_ii`` for ``i = 0..n-1``, then
* for every pair ``i < j`` in lexicographic order, the units
  ``(u E_ij + conj(u) E_ji) / sqrt(2)`` with ``u`` running over ``1``
  (beta=1), ``1, i`` (beta=2) or ``1, i, j, k`` (beta=4).

Products, powers and spectra are computed on a dense array: a real
``n x n`` matrix for beta=1, a complex ``n x n`` matrix for beta=2, and the
complex ``2n x 2n`` image of the quaternion matrix under
``a + bi + cj + dk -> [[a+bi, c+di], [-c+di, a-bi]]`` for beta=4.  That map
is an injective algebra homomorphism, so Hermitian quaternion matrices land
on Hermitian complex matrices whose eigenvalues are those of the quaternion
matrix, each repeated twice.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

BETAS = (1, 2, 4)
SQRT2 = np.sqrt(2.0)


def check_beta(beta: int) -> int:
    if beta not in BETAS:
        raise ValueError(f"beta must be one of {BETAS}, got {beta!r}")
    return int(beta)


def check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def dimension(n: int, beta: int) -> int:
    """Real dimension ``n + beta n (n-1) / 2`` of the space."""
    return n + beta * n * (n - 1) // 2


def dense_size(n: int, beta: int) -> int:
    return 2 * n if beta == 4 else n


# ---------------------------------------------------------------------------
# division-algebra scalars


@dataclass(frozen=True)
class DivisionScalar:
    """A real, complex or quaternion number ``c0 + c1 i + c2 j + c3 k``."""

    beta: int
    components: tuple

    def __post_init__(self):
        check_beta(self.beta)
        comps = tuple(float(c) for c in self.components)
        if len(comps) != self.beta:
            raise ValueError(
                f"beta={self.beta} scalar needs {self.beta} components, got {len(comps)}"
            )
        object.__setattr__(self, "components", comps)

    def _padded(self):
        return self.components + (0.0,) * (4 - self.beta)

    def __add__(self, other: DivisionScalar) -> DivisionScalar:
        self._same(other)
        return DivisionScalar(self.beta, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: DivisionScalar) -> DivisionScalar:
        self._same(other)
        return DivisionScalar(self.beta, tuple(a - b for a, b in zip(self.components, other.components)))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return DivisionScalar(self.beta, tuple(other * c for c in self.components))
        self._same(other)
        a1, b1, c1, d1 = self._padded()
        a2, b2, c2, d2 = other._padded()
        prod = (
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
        return DivisionScalar(self.beta, prod[: self.beta])

    __rmul__ = __mul__

    def conj(self) -> DivisionScalar:
        c = self.components
        return DivisionScalar(self.beta, (c[0],) + tuple(-x for x in c[1:]))

    def norm2(self) -> float:
        """``u * conj(u)``, which is real and nonnegative."""
        return float(sum(c * c for c in self.components))

    @property
    def real(self) -> float:
        return self.components[0]

    def _same(self, other):
        if not isinstance(other, DivisionScalar) or other.beta != self.beta:
            raise ValueError("scalars must share the same beta")


# ---------------------------------------------------------------------------
# coordinate <-> dense maps (vectorised over leading axes)


@functools.lru_cache(maxsize=None)
def _layout(n: int, beta: int):
    """Index tables ``(i, j, u)`` for every coordinate slot."""
    rows, cols, units = [], [], []
    for i in range(n):
        rows.append(i)
        cols.append(i)
        units.append(0)
    for i in range(n):
        for j in range(i + 1, n):
            for u in range(beta):
                rows.append(i)
                cols.append(j)
                units.append(u)
    return np.array(rows), np.array(cols), np.array(units)


def coords_to_components(coords: np.ndarray, n: int, beta: int) -> np.ndarray:
    """Real components ``comp[..., i, j, u]`` of the matrix entries."""
    coords = np.asarray(coords, dtype=float)
    rows, cols, units = _layout(n, beta)
    comp = np.zeros(coords.shape[:-1] + (n, n, beta))
    comp[..., rows[:n], cols[:n], 0] = coords[..., :n]
    if coords.shape[-1] > n:
        off = coords[..., n:] / SQRT2
        r, c, u = rows[n:], cols[n:], units[n:]
        sign = np.where(u == 0, 1.0, -1.0)
        comp[..., r, c, u] = off
        comp[..., c, r, u] = off * sign
    return comp


def components_to_dense(comp: np.ndarray, beta: int) -> np.ndarray:
    if beta == 1:
        return comp[..., 0].copy()
    if beta == 2:
        return comp[..., 0] + 1j * comp[..., 1]
    a = comp[..., 0] + 1j * comp[..., 1]
    b = comp[..., 2] + 1j * comp[..., 3]
    n = comp.shape[-2]
    dense = np.zeros(comp.shape[:-3] + (2 * n, 2 * n), dtype=complex)
    dense[..., 0::2, 0::2] = a
    dense[..., 0::2, 1::2] = b
    dense[..., 1::2, 0::2] = -np.conj(b)
    dense[..., 1::2, 1::2] = np.conj(a)
    return dense


def dense_to_components(dense: np.ndarray, beta: int) -> np.ndarray:
    dense = np.asarray(dense)
    if beta == 1:
        return np.real(dense)[..., None]
    if beta == 2:
        return np.stack([dense.real, dense.imag], axis=-1)
    a = dense[..., 0::2, 0::2]
    b = dense[..., 0::2, 1::2]
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


def coords_to_dense(coords: np.ndarray, n: int, beta: int) -> np.ndarray:
    return components_to_dense(coords_to_components(coords, n, beta), beta)


def dense_to_coords(dense: np.ndarray, n: int, beta: int) -> np.ndarray:
    """Coordinates ``<e_a | M>`` of (the Hermitian part of) a dense matrix."""
    comp = dense_to_components(dense, beta)
    rows, cols, units = _layout(n, beta)
    diag = comp[..., rows[:n], cols[:n], 0]
    if len(rows) == n:
        return np.ascontiguousarray(diag)
    r, c, u = rows[n:], cols[n:], units[n:]
    sign = np.where(u == 0, 1.0, -1.0)
    off = (comp[..., r, c, u] + sign * comp[..., c, r, u]) / SQRT2
    return np.concatenate([diag, off], axis=-1)


def identity_coords(n: int, beta: int) -> np.ndarray:
    out = np.zeros(dimension(n, beta))
    out[:n] = 1.0
    return out


def trace_coords(coords: np.ndarray, n: int) -> np.ndarray:
    return np.sum(np.asarray(coords)[..., :n], axis=-1)


def dense_trace(dense: np.ndarray, beta: int) -> np.ndarray:
    """``Re tr`` of a dense matrix (halved for the quaternion embedding)."""
    tr = np.real(np.trace(dense, axis1=-2, axis2=-1))
    return tr / 2.0 if beta == 4 else tr


def hermitian_part(dense: np.ndarray) -> np.ndarray:
    return 0.5 * (dense + np.conj(np.swapaxes(dense, -1, -2)))


# ---------------------------------------------------------------------------
# MatrixH


@dataclass(frozen=True, eq=False)
class MatrixH:
    """An element of the Euclidean space of ``n x n`` beta-Hermitian matrices."""

    n: int
    beta: int
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_n(self.n)
        check_beta(self.beta)
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.shape[0] != dimension(self.n, self.beta):
            raise ValueError(
                f"expected {dimension(self.n, self.beta)} coordinates for "
                f"n={self.n}, beta={self.beta}, got {coords.shape[0]}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    # constructors
    @classmethod
    def zeros(cls, n: int, beta: int) -> MatrixH:
        return cls(n, beta, np.zeros(dimension(n, beta)))

    @classmethod
    def identity(cls, n: int, beta: int) -> MatrixH:
        return cls(n, beta, identity_coords(n, beta))

    @classmethod
    def diag(cls, values: Sequence[float], beta: int) -> MatrixH:
        n = len(values)
        coords = np.zeros(dimension(n, beta))
        coords[:n] = values
        return cls(n, beta, coords)

    @classmethod
    def from_dense(cls, dense: np.ndarray, n: int, beta: int) -> MatrixH:
        return cls(n, beta, dense_to_coords(dense, n, beta))

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[DivisionScalar]]) -> MatrixH:
        """Build from a square array of scalars; the array must be Hermitian."""
        n = len(entries)
        beta = entries[0][0].beta
        comp = np.array([[e.components for e in row] for row in entries], dtype=float)
        conj = comp.copy()
        conj[..., 1:] *= -1
        if not np.allclose(comp, np.swapaxes(conj, 0, 1), atol=1e-12, rtol=0):
            raise ValueError("entries are not Hermitian")
        return cls.from_dense(components_to_dense(comp, beta), n, beta)

    @classmethod
    def from_json(cls, obj: dict) -> MatrixH:
        return cls(int(obj["n"]), int(obj["beta"]), np.array(obj["coords"], dtype=float))

    def to_json(self) -> dict:
        return {"n": self.n, "beta": self.beta, "coords": [float(c) for c in self.coords]}

    # views
    @property
    def dim(self) -> int:
        return self.coords.shape[0]

    def dense(self) -> np.ndarray:
        return coords_to_dense(self.coords, self.n, self.beta)

    def components(self) -> np.ndarray:
        return coords_to_components(self.coords, self.n, self.beta)

    def entry(self, i: int, j: int) -> DivisionScalar:
        return DivisionScalar(self.beta, tuple(self.components()[i, j]))

    def entries(self) -> list:
        comp = self.components()
        return [[DivisionScalar(self.beta, tuple(comp[i, j])) for j in range(self.n)] for i in range(self.n)]

    # arithmetic
    def _check(self, other: MatrixH):
        if not isinstance(other, MatrixH) or (other.n, other.beta) != (self.n, self.beta):
            raise ValueError("matrices must have the same n and beta")

    def __add__(self, other: MatrixH) -> MatrixH:
        self._check(other)
        return MatrixH(self.n, self.beta, self.coords + other.coords)

    def __sub__(self, other: MatrixH) -> MatrixH:
        self._check(other)
        return MatrixH(self.n, self.beta, self.coords - other.coords)

    def __neg__(self) -> MatrixH:
        return MatrixH(self.n, self.beta, -self.coords)

    def __mul__(self, scalar: float) -> MatrixH:
        return MatrixH(self.n, self.beta, float(scalar) * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> MatrixH:
        return MatrixH(self.n, self.beta, self.coords / float(scalar))

    def jordan(self, other: MatrixH) -> MatrixH:
        """Symmetrised product ``(xy + yx) / 2``."""
        self._check(other)
        prod = self.dense() @ other.dense()
        return MatrixH.from_dense(prod, self.n, self.beta)

    def power(self, k: int) -> MatrixH:
        if k < 0:
            raise ValueError("negative powers are not supported")
        d = np.linalg.matrix_power(self.dense(), k)
        return MatrixH.from_dense(d, self.n, self.beta)

    def square(self) -> MatrixH:
        return self.power(2)

    def trace(self) -> float:
        return float(np.sum(self.coords[: self.n]))

    def inner(self, other: MatrixH) -> float:
        return inner(self, other)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def allclose(self, other: MatrixH, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.coords - other.coords), initial=0.0) <= atol)

    def __repr__(self):
        return f"MatrixH(n={self.n}, beta={self.beta}, coords={np.array2string(self.coords, precision=6)})"


def inner(x: MatrixH, y: MatrixH) -> float:
    r"""``Re tr(xy)``; equals the coordinate dot product in the orthonormal basis."""
    x._check(y)
    return float(np.dot(x.coords, y.coords))


@functools.lru_cache(maxsize=None)
def _basis_dense(n: int, beta: int) -> np.ndarray:
    dim = dimension(n, beta)
    return coords_to_dense(np.eye(dim), n, beta)


def canonical_basis(n: int, beta: int) -> list:
    """The ordered orthonormal basis ``e_0, ..., e_{dim-1}``."""
    check_n(n)
    check_beta(beta)
    dim = dimension(n, beta)
    return [MatrixH(n, beta, row) for row in np.eye(dim)]


# ---------------------------------------------------------------------------
# spectra and elementary symmetric functions


def eigenvalues_batch(coords: np.ndarray, n: int, beta: int) -> np.ndarray:
    """Ascending spectra for a stack of coordinate vectors, shape ``(..., n)``."""
    dense = coords_to_dense(coords, n, beta)
    try:
        ev = np.linalg.eigvalsh(dense)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigenvalue solver did not converge: {exc}") from exc
    if beta == 4:
        ev = 0.5 * (ev[..., 0::2] + ev[..., 1::2])
    return ev


def eigenvalues(x: MatrixH) -> np.ndarray:
    return eigenvalues_batch(x.coords, x.n, x.beta)


def elementary_symmetric(values: np.ndarray) -> np.ndarray:
    """``(e_1, ..., e_n)`` of the last axis of ``values``."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    e = np.zeros(values.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for m in range(n):
        lam = values[..., m]
        for j in range(m + 1, 0, -1):
            e[..., j] = e[..., j] + lam * e[..., j - 1]
    return e[..., 1:]


def sigma_batch(coords: np.ndarray, n: int, beta: int) -> np.ndarray:
    return elementary_symmetric(eigenvalues_batch(coords, n, beta))


@dataclass(frozen=True, eq=False)
class SigmaPoint:
    """A point ``(sigma_1, ..., sigma_n)`` in elementary-symmetric coordinates."""

    n: int
    sigma: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma, dtype=float).reshape(-1)
        if s.shape[0] != self.n:
            raise ValueError(f"need {self.n} coordinates, got {s.shape[0]}")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def from_roots(cls, roots: Sequence[float]) -> SigmaPoint:
        return cls(len(roots), elementary_symmetric(np.asarray(roots, dtype=float)))

    def get(self, j: int) -> float:
        """``sigma_j`` with ``sigma_0 = 1`` and zero outside ``0..n``."""
        if j == 0:
            return 1.0
        if j < 0 or j > self.n:
            return 0.0
        return float(self.sigma[j - 1])

    def full(self) -> np.ndarray:
        """``(sigma_0, ..., sigma_n)``."""
        return np.concatenate([[1.0], self.sigma])

    def roots(self) -> np.ndarray:
        # x^n - s1 x^{n-1} + s2 x^{n-2} - ...
        coeffs = [(-1) ** i * self.get(i) for i in range(self.n + 1)]
        return np.roots(coeffs)

    def in_domain(self, floor: float = 1e-9) -> bool:
        """Whether the associated polynomial has ``n`` distinct real roots."""
        if self.n == 1:
            return True
        r = self.roots()
        scale = floor * (1.0 + np.max(np.abs(r)))
        if np.max(np.abs(r.imag)) > scale:
            return False
        re = np.sort(r.real)
        return bool(np.min(np.diff(re)) > scale)


def sigma(theta: MatrixH) -> SigmaPoint:
    """Elementary symmetric functions of the spectrum, ``det(I + z theta) = sum sigma_j z^j``."""
    return SigmaPoint(theta.n, elementary_symmetric(eigenvalues(theta)))


def sigma_grad(theta: MatrixH, m: int) -> MatrixH:
    r"""Gradient of ``sigma_m`` at ``theta``.

    ``sigma_m'(theta) = sum_{i<m} (-1)^{m-1-i} sigma_i(theta) theta^{m-1-i}``;
    for ``m > n`` this is the Cayley-Hamilton polynomial times a power of
    ``theta`` and vanishes up to rounding.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    s = sigma(theta)
    d = theta.dense()
    size = d.shape[0]
    acc = np.zeros_like(d)
    power = np.eye(size, dtype=d.dtype)
    # accumulate in ascending powers: theta^p carries sigma_{m-1-p}
    for p in range(m):
        i = m - 1 - p
        acc = acc + ((-1) ** p) * s.get(i) * power
        power = power @ d
    return MatrixH.from_dense(acc, theta.n, theta.beta)


def expansion_coefficients(s: SigmaPoint, r: int, t: int) -> np.ndarray:
    r"""Coefficients ``P_j(r, t)``, ``j = 1..n``, of ``sigma_r' sigma_t'`` in the basis ``sigma_j'``.

    ``P_j = sigma_{r+t-1-j}`` for ``max(r,t) <= j <= r+t-1`` and
    ``P_j = -sigma_{r+t-1-j}`` for ``j < min(r,t)``; indices outside ``0..n``
    contribute zero.
    """
    n = s.n
    out = np.zeros(n)
    top = r + t - 1
    for j in range(1, n + 1):
        if max(r, t) <= j <= top:
            out[j - 1] = s.get(top - j)
        elif j < min(r, t):
            out[j - 1] = -s.get(top - j)
    return out


# ---------------------------------------------------------------------------
# symmetric endomorphisms and the Psi map


@dataclass(frozen=True, eq=False)
class SymEndo:
    """Symmetric endomorphism ``phi`` with ``coeff[a, b] = <e_a | phi(e_b)>``."""

    n: int
    beta: int
    coeff: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeff, dtype=float)
        dim = dimension(self.n, self.beta)
        if c.shape != (dim, dim):
            raise ValueError(f"coefficient matrix must be {dim}x{dim}, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)

    @classmethod
    def outer(cls, y: MatrixH) -> SymEndo:
        """``y (x) y : h -> y <y|h>``."""
        return cls(y.n, y.beta, np.outer(y.coords, y.coords))

    @classmethod
    def quadratic(cls, y: MatrixH) -> SymEndo:
        """``P_y : h -> y h y``."""
        basis = _basis_dense(y.n, y.beta)
        yd = y.dense()
        images = dense_to_coords(yd @ basis @ yd, y.n, y.beta)  # row b = coords of y e_b y
        return cls(y.n, y.beta, images.T)

    @classmethod
    def identity(cls, n: int, beta: int) -> SymEndo:
        return cls(n, beta, np.eye(dimension(n, beta)))

    def __add__(self, other: SymEndo) -> SymEndo:
        return SymEndo(self.n, self.beta, self.coeff + other.coeff)

    def __mul__(self, scalar: float) -> SymEndo:
        return SymEndo(self.n, self.beta, float(scalar) * self.coeff)

    __rmul__ = __mul__

    def apply(self, h: MatrixH) -> MatrixH:
        return MatrixH(self.n, self.beta, self.coeff @ h.coords)


def psi_apply(phi: SymEndo, tol: float = 1e-12) -> MatrixH:
    r"""``Psi(phi)(I_n)`` for a symmetric endomorphism ``phi``.

    Psi is linear and sends ``y (x) y`` to ``P_y``; polarising over the
    orthonormal basis gives ``Psi(phi)(I) = 1/2 sum_ab H_ab (e_a e_b + e_b e_a)``.
    """
    h = phi.coeff
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    if np.max(np.abs(h - h.T), initial=0.0) > tol * scale:
        raise ValueError("coefficient matrix is not symmetric")
    basis = _basis_dense(phi.n, phi.beta)
    m = np.einsum("ab,aij,bjk->ik", h, basis, basis)
    return MatrixH.from_dense(m, phi.n, phi.beta)


def psi_identity_scalar(n: int, beta: int) -> float:
    """``Psi(id)(I) = (1 + beta (n-1) / 2) I``, the scalar factor."""
    return 1.0 + beta * (n - 1) / 2.0


def random_hermitian(n: int, beta: int, rng: np.random.Generator, scale: float = 1.0) -> MatrixH:
    """Coordinates uniform on ``[-scale, scale]``."""
    return MatrixH(n, beta, rng.uniform(-scale, scale, size=dimension(n, beta)))


def as_matrices(coords: Iterable, n: int, beta: int) -> list:
    return [MatrixH(n, beta, c) for c in np.atleast_2d(np.asarray(coords, dtype=float))]


# ---------------------------------------------------------------------------
# finite differences in the canonical basis


def fd_step(theta: MatrixH, rel: float) -> float:
    """Step ``rel * (1 + ||theta||)`` used by the stencils below."""
    return rel * (1.0 + theta.norm())


def fd_gradient(f, theta: MatrixH, rel: float = 1e-5) -> MatrixH:
    """Central-difference gradient of a scalar function on the space, as a MatrixH."""
    h = fd_step(theta, rel)
    dim = theta.dim
    eye = np.eye(dim)
    grad = np.empty(dim)
    for a in range(dim):
        e = MatrixH(theta.n, theta.beta, h * eye[a])
        grad[a] = (f(theta + e) - f(theta - e)) / (2.0 * h)
    return MatrixH(theta.n, theta.beta, grad)


def fd_hessian(f, theta: MatrixH, rel: float = 1e-4, richardson: bool = False) -> SymEndo:
    """Central-difference Hessian as a symmetric endomorphism.

    With ``richardson=True`` the steps ``h`` and ``h/2`` are combined to
    cancel the leading ``O(h^2)`` error term.
    """
    if richardson:
        coarse = fd_hessian(f, theta, rel, richardson=False).coeff
        fine = fd_hessian(f, theta, rel / 2.0, richardson=False).coeff
        return SymEndo(theta.n, theta.beta, (4.0 * fine - coarse) / 3.0)
    h = fd_step(theta, rel)
    dim = theta.dim
    n, beta = theta.n, theta.beta
    eye = np.eye(dim) * h
    f0 = f(theta)
    out = np.empty((dim, dim))
    for a in range(dim):
        ea = MatrixH(n, beta, eye[a])
        fp, fm = f(theta + ea), f(theta - ea)
        out[a, a] = (fp - 2.0 * f0 + fm) / h**2
        for b in range(a + 1, dim):
            eb = MatrixH(n, beta, eye[b])
            val = (
                f(theta + ea + eb) - f(theta + ea - eb) - f(theta - ea + eb) + f(theta - ea - eb)
            ) / (4.0 * h**2)
            out[a, b] = out[b, a] = val
    return SymEndo(n, beta, out)
