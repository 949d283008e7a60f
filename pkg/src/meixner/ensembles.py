"""Parameter records, samplers and regression constants for Meixner ensembles.

Samplable families (Bernoulli, binomial, Poisson, negative binomial and
Gaussian) are built from uniformly distributed projections and Gaussian
coordinates.  Gamma and hyperbolic ensembles are described only through their
Laplace transforms and are rejected by the samplers.

Random numbers come from ``numpy.random.Philox`` keyed by
``SeedSequence(seed, spawn_key=(stream, chunk))``.  Batches are generated in
fixed-size chunks, each with its own key, so the output depends only on
``(seed, stream, count)`` and never on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import ClassVar

import numpy as np

from .algebra import (
    MatrixH,
    check_beta,
    check_n,
    dense_to_coords,
    dimension,
    identity_coords,
)

CHUNK_SIZE = 4096
RNG_NAME = "numpy.random.Philox"


class UnsupportedSampler(ValueError):
    """Raised when a family has no exact sampler."""


# ---------------------------------------------------------------------------
# specs


def _as_float_tuple(values) -> tuple:
    if isinstance(values, str):
        values = [v for v in values.split(",") if v.strip()]
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


def _check_weights(q: tuple, n: int, strict: bool) -> None:
    if len(q) != n:
        raise ValueError(f"expected {n} weights q_1..q_n, got {len(q)}")
    if any(x < 0 or not math.isfinite(x) for x in q):
        raise ValueError("weights must be finite and nonnegative")
    total = sum(q)
    if strict and not total < 1.0:
        raise ValueError(f"weights must sum to less than 1, got {total}")
    if not strict and total > 1.0 + 1e-12:
        raise ValueError(f"weights must sum to at most 1, got {total}")


def mean_rank(q) -> float:
    """``(q_1 + 2 q_2 + ... + n q_n) / n``."""
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    return float(np.dot(np.arange(1, n + 1), q) / n)


@dataclass(frozen=True)
class EnsembleSpec:
    """Base record: every family carries ``n`` and ``beta``."""

    n: int
    beta: int

    family: ClassVar[str] = ""
    samplable: ClassVar[bool] = False
    fixed_n: ClassVar[int | None] = None

    def __post_init__(self):
        check_n(self.n)
        check_beta(self.beta)
        if self.fixed_n is not None and self.n != self.fixed_n:
            raise ValueError(f"family {self.family!r} is defined only for n={self.fixed_n}")
        self.validate()

    def validate(self) -> None:  # pragma: no cover - overridden
        pass

    def params(self) -> dict:
        d = asdict(self)
        d.pop("n")
        d.pop("beta")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "beta": self.beta, "params": self.params()}

    @staticmethod
    def from_json(obj: dict) -> EnsembleSpec:
        family = FAMILY_ALIASES.get(obj["family"], obj["family"])
        if family not in FAMILIES:
            raise ValueError(f"unknown family {obj['family']!r}")
        return FAMILIES[family](n=int(obj["n"]), beta=int(obj["beta"]), **obj.get("params", {}))


@dataclass(frozen=True)
class Bernoulli(EnsembleSpec):
    """Mixture of uniform rank-``j`` projections with weights ``q_j``."""

    q: tuple = ()
    family: ClassVar[str] = "bernoulli"
    samplable: ClassVar[bool] = True

    def validate(self):
        object.__setattr__(self, "q", _as_float_tuple(self.q))
        _check_weights(self.q, self.n, strict=False)

    @property
    def q0(self) -> float:
        return max(0.0, 1.0 - sum(self.q))

    @property
    def weights(self) -> np.ndarray:
        """``(q_0, q_1, ..., q_n)``."""
        w = np.array((self.q0,) + self.q)
        return w / w.sum()


@dataclass(frozen=True)
class Binomial(EnsembleSpec):
    """Sum of ``N`` independent Bernoulli ensembles."""

    N: int = 1
    q: tuple = ()
    family: ClassVar[str] = "binomial"
    samplable: ClassVar[bool] = True

    def validate(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "q", _as_float_tuple(self.q))
        _check_weights(self.q, self.n, strict=False)


@dataclass(frozen=True)
class Poisson(EnsembleSpec):
    """Poisson number of independent Bernoulli ensembles with weights ``lam_j / sum(lam)``."""

    lam: tuple = ()
    family: ClassVar[str] = "poisson"
    samplable: ClassVar[bool] = True

    def validate(self):
        lam = _as_float_tuple(self.lam)
        object.__setattr__(self, "lam", lam)
        if len(lam) != self.n:
            raise ValueError(f"expected {self.n} rates, got {len(lam)}")
        if any(x < 0 or not math.isfinite(x) for x in lam) or not sum(lam) > 0:
            raise ValueError("rates must be nonnegative with a positive sum")

    @property
    def total(self) -> float:
        return float(sum(self.lam))


@dataclass(frozen=True)
class NegBinomial(EnsembleSpec):
    """Negative-binomial number of independent Bernoulli ensembles."""

    r: float = 1.0
    q: tuple = ()
    family: ClassVar[str] = "negative_binomial"
    samplable: ClassVar[bool] = True

    def validate(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "q", _as_float_tuple(self.q))
        _check_weights(self.q, self.n, strict=True)
        if sum(self.q) <= 0:
            raise ValueError("weights must have a positive sum")

    @property
    def p(self) -> float:
        return 1.0 - sum(self.q)


@dataclass(frozen=True)
class Gaussian(EnsembleSpec):
    """Rotation-invariant Gaussian law with cumulant ``c1 tr + c2 tr^2/2 + c3 tr(.^2)/2``."""

    c1: float = 0.0
    c2: float = 0.0
    c3: float = 1.0
    family: ClassVar[str] = "gaussian"
    samplable: ClassVar[bool] = True

    def validate(self):
        for name in ("c1", "c2", "c3"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.c3 < 0 or self.n * self.c2 + self.c3 < 0:
            raise ValueError("need c3 >= 0 and n c2 + c3 >= 0")


@dataclass(frozen=True)
class Gamma2(EnsembleSpec):
    """Gamma ensemble on 2x2 matrices, parameters ``p > beta/2`` and ``c > 1``."""

    p: float = 2.0
    c: float = 2.0
    family: ClassVar[str] = "gamma2"
    fixed_n: ClassVar[int] = 2

    def validate(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "c", float(self.c))
        if not self.p > self.beta / 2 or not self.c > 1:
            raise ValueError(f"need p > beta/2 = {self.beta / 2} and c > 1")


@dataclass(frozen=True)
class GammaN(EnsembleSpec):
    """Gamma-type ensemble at general ``n``; ``p > 0`` and ``c != 0``."""

    p: float = 2.0
    c: float = 1.0
    family: ClassVar[str] = "gamma_n"

    def validate(self):
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "c", float(self.c))
        if not self.p > 0 or self.c == 0:
            raise ValueError("need p > 0 and c != 0")


@dataclass(frozen=True)
class Hyperbolic2(EnsembleSpec):
    """Hyperbolic ensemble on 2x2 matrices.

    Requires ``alpha > 0`` and ``0 <= lam < 1``; the exceptional point
    ``lam = 1, rho = 0`` is also accepted.
    """

    alpha: float = 1.0
    lam: float = 0.0
    rho: float = 0.0
    family: ClassVar[str] = "hyperbolic2"
    fixed_n: ClassVar[int] = 2

    def validate(self):
        for name in ("alpha", "lam", "rho"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not (0 <= self.lam < 1 or (self.lam == 1 and self.rho == 0)):
            raise ValueError("need 0 <= lam < 1, or lam = 1 with rho = 0")

    @property
    def phi(self) -> float:
        """Phase with ``sin(phi) = rho / sqrt((1-lam)^2 + rho^2)``; zero at the exceptional point."""
        denom = math.hypot(1.0 - self.lam, self.rho)
        return 0.0 if denom == 0 else math.asin(self.rho / denom)


FAMILIES = {
    cls.family: cls
    for cls in (Bernoulli, Binomial, Poisson, NegBinomial, Gaussian, Gamma2, GammaN, Hyperbolic2)
}
FAMILY_ALIASES = {"nb": "negative_binomial", "nb2": "negative_binomial", "negbinomial": "negative_binomial"}


def make_spec(family: str, n: int, beta: int, **params) -> EnsembleSpec:
    return EnsembleSpec.from_json({"family": family, "n": n, "beta": beta, "params": params})


# ---------------------------------------------------------------------------
# random streams


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by ``(seed, index)``."""

    seed: int
    index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def generator(self, *sub: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.index),) + tuple(int(s) for s in sub))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> RngStream:
        """A stream with a different index under the same seed."""
        return RngStream(self.seed, index)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("MEIXNER_THREADS", "")
        threads = int(env) if env.strip() else 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return int(threads)


# ---------------------------------------------------------------------------
# Haar rotations and projections


def _block(beta: int) -> int:
    return 2 if beta == 4 else 1


def _ginibre(n: int, beta: int, size: int, blocks: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Ginibre matrices with ``blocks`` (quaternionic) columns, in dense form."""
    if beta == 1:
        return rng.standard_normal((size, n, blocks))
    if beta == 2:
        g = rng.standard_normal((size, n, blocks, 2))
        return g[..., 0] + 1j * g[..., 1]
    g = rng.standard_normal((size, n, blocks, 4))
    a = g[..., 0] + 1j * g[..., 1]
    b = g[..., 2] + 1j * g[..., 3]
    out = np.empty((size, 2 * n, 2 * blocks), dtype=complex)
    out[:, 0::2, 0::2] = a
    out[:, 0::2, 1::2] = b
    out[:, 1::2, 0::2] = -np.conj(b)
    out[:, 1::2, 1::2] = np.conj(a)
    return out


def _orthonormalize(g: np.ndarray, bs: int) -> np.ndarray:
    """Block Gram-Schmidt with one reorthogonalization pass.

    Columns are grouped in blocks of ``bs`` (2 for quaternions, where a block
    is the image of one quaternion column).  Normalizing by the real norm
    keeps each block a quaternion vector, and the positive "diagonal" of the
    implicit triangular factor makes the result Haar distributed.
    """
    q = g.copy()
    blocks = q.shape[-1] // bs
    for j in range(blocks):
        v = q[:, :, j * bs : (j + 1) * bs]
        if j:
            prev = q[:, :, : j * bs]
            for _ in range(2):
                v = v - prev @ (np.conj(np.swapaxes(prev, -1, -2)) @ v)
        norm = np.sqrt(np.real(np.einsum("sij,sij->s", np.conj(v[:, :, :1]), v[:, :, :1])))
        q[:, :, j * bs : (j + 1) * bs] = v / norm[:, None, None]
    return q


def haar_rotation_batch(n: int, beta: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-distributed elements of O(n), U(n) or Sp(n), in dense form."""
    check_n(n)
    check_beta(beta)
    return _orthonormalize(_ginibre(n, beta, size, n, rng), _block(beta))


def haar_rotation(n: int, beta: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar rotation as a dense array (``2n x 2n`` complex for beta=4)."""
    return haar_rotation_batch(n, beta, rng, 1)[0]


def projection_batch(m: int, n: int, beta: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Coordinates of ``size`` uniformly distributed rank-``m`` projections."""
    check_n(n)
    check_beta(beta)
    if not 0 <= m <= n:
        raise ValueError(f"rank m must lie in [0, {n}], got {m}")
    dim = dimension(n, beta)
    if m == 0 or size == 0:
        return np.zeros((size, dim))
    if m == n:
        return np.tile(identity_coords(n, beta), (size, 1))
    bs = _block(beta)
    q = _orthonormalize(_ginibre(n, beta, size, m, rng), bs)
    dense = q @ np.conj(np.swapaxes(q, -1, -2))
    return dense_to_coords(dense, n, beta)


def sample_projection(m: int, n: int, beta: int, rng: np.random.Generator) -> MatrixH:
    return MatrixH(n, beta, projection_batch(m, n, beta, rng, 1)[0])


# ---------------------------------------------------------------------------
# family samplers


def _bernoulli_draws(weights: np.ndarray, n: int, beta: int, rng, size: int) -> np.ndarray:
    ranks = rng.choice(n + 1, size=size, p=weights)
    out = np.zeros((size, dimension(n, beta)))
    for m in range(1, n + 1):
        idx = np.flatnonzero(ranks == m)
        if idx.size:
            out[idx] = projection_batch(m, n, beta, rng, idx.size)
    return out


def _random_sums(counts: np.ndarray, weights, n, beta, rng) -> np.ndarray:
    size = counts.shape[0]
    out = np.zeros((size, dimension(n, beta)))
    total = int(counts.sum())
    if total == 0:
        return out
    draws = _bernoulli_draws(weights, n, beta, rng, total)
    nz = np.flatnonzero(counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])[nz]
    out[nz] = np.add.reduceat(draws, starts, axis=0)
    return out


def _sample_chunk(spec: EnsembleSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    n, beta = spec.n, spec.beta
    if isinstance(spec, Bernoulli):
        return _bernoulli_draws(spec.weights, n, beta, rng, size)
    if isinstance(spec, Binomial):
        w = Bernoulli(n, beta, spec.q).weights
        return _random_sums(np.full(size, spec.N), w, n, beta, rng)
    if isinstance(spec, Poisson):
        lam = np.array(spec.lam)
        w = np.concatenate([[0.0], lam / lam.sum()])
        counts = rng.poisson(spec.total, size=size)
        return _random_sums(counts, w, n, beta, rng)
    if isinstance(spec, NegBinomial):
        qsum = sum(spec.q)
        w = np.concatenate([[0.0], np.array(spec.q) / qsum])
        counts = rng.poisson(rng.gamma(spec.r, qsum / spec.p, size=size))
        return _random_sums(counts, w, n, beta, rng)
    if isinstance(spec, Gaussian):
        dim = dimension(n, beta)
        z = rng.standard_normal((size, dim))
        zeta = rng.standard_normal(size)
        eye = identity_coords(n, beta)
        trz = z[:, :n].sum(axis=1)
        scalar = math.sqrt(spec.c2 + spec.c3 / n) * zeta + spec.c1
        return math.sqrt(spec.c3) * (z - np.outer(trz / n, eye)) + np.outer(scalar, eye)
    raise UnsupportedSampler(
        f"family {spec.family!r} is analytic-only: no exact sampler is available"
    )


def check_samplable(spec: EnsembleSpec) -> None:
    if not spec.samplable:
        raise UnsupportedSampler(
            f"family {spec.family!r} is analytic-only: no exact sampler is available"
        )


def sample_ensemble(spec: EnsembleSpec, rng: np.random.Generator) -> MatrixH:
    """One draw from a samplable family."""
    check_samplable(spec)
    return MatrixH(spec.n, spec.beta, _sample_chunk(spec, rng, 1)[0])


def sample_batch(
    spec: EnsembleSpec,
    count: int,
    seed: int,
    stream: int = 0,
    threads: int | None = None,
    chunk_size: int = CHUNK_SIZE,
) -> np.ndarray:
    """``count`` draws as a ``(count, dim)`` coordinate array.

    Chunk ``c`` uses the generator keyed by ``(seed, stream, c)`` so the
    result is the same for every thread count.
    """
    check_samplable(spec)
    if count < 0:
        raise ValueError("count must be nonnegative")
    base = RngStream(seed, stream)
    sizes = [min(chunk_size, count - s) for s in range(0, count, chunk_size)]

    def work(c: int) -> np.ndarray:
        return _sample_chunk(spec, base.generator(c), sizes[c])

    workers = resolve_threads(threads)
    if workers == 1 or len(sizes) <= 1:
        parts = [work(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, range(len(sizes))))
    if not parts:
        return np.zeros((0, dimension(spec.n, spec.beta)))
    return np.concatenate(parts, axis=0)


def projection_sample_batch(
    m: int, n: int, beta: int, count: int, seed: int, stream: int = 0, chunk_size: int = CHUNK_SIZE
) -> np.ndarray:
    """Deterministic chunked batch of rank-``m`` projections."""
    base = RngStream(seed, stream)
    parts = [
        projection_batch(m, n, beta, base.generator(c), min(chunk_size, count - s))
        for c, s in enumerate(range(0, count, chunk_size))
    ]
    return np.concatenate(parts, axis=0) if parts else np.zeros((0, dimension(n, beta)))


# ---------------------------------------------------------------------------
# moments and regression constants


def theoretical_moments(spec: EnsembleSpec) -> tuple:
    """``(m, v)`` with ``E X = m I`` and ``E X^2 - (E X)^2 = v I``."""
    n, beta = spec.n, spec.beta
    if isinstance(spec, Bernoulli):
        qb = mean_rank(spec.q)
        return qb, qb * (1 - qb)
    if isinstance(spec, Binomial):
        qb = mean_rank(spec.q)
        return spec.N * qb, spec.N * qb * (1 - qb)
    if isinstance(spec, Poisson):
        lb = mean_rank(spec.lam)
        return lb, lb
    if isinstance(spec, NegBinomial):
        qb = mean_rank(spec.q)
        p = spec.p
        return spec.r * qb / p, spec.r * qb * (p + qb) / p**2
    if isinstance(spec, Gaussian):
        return spec.c1, spec.c2 + spec.c3 * (1 + beta * (n - 1) / 2)
    if isinstance(spec, Gamma2):
        s = math.sqrt(1 + beta)
        return 2 * spec.p * spec.c * s, 4 * spec.p * spec.c**2 * (1 + beta)
    if isinstance(spec, GammaN):
        return spec.p * spec.c, spec.p * spec.c**2
    if isinstance(spec, Hyperbolic2):
        return spec.rho * spec.alpha, spec.alpha * (1 + spec.rho**2)
    raise TypeError(f"unknown spec {spec!r}")


@dataclass(frozen=True)
class MeixnerParams:
    """Regression constants ``(A, B, C)`` and, when defined, the standardized pair ``(a, b)``."""

    A: float
    B: float
    C: float
    a: float | None = None
    b: float | None = None
    mean: float | None = field(default=None, compare=False)
    var: float | None = field(default=None, compare=False)

    def triple(self) -> tuple:
        return (self.A, self.B, self.C)

    @classmethod
    def from_moments(cls, A: float, B: float, mean: float, var: float) -> MeixnerParams:
        """Fill in ``C`` from the expected value of the regression identity and ``(a, b)``."""
        C = 2 * var * (1 - A) - 4 * A * mean**2 - 2 * B * mean
        a, b = standardized_ab(A, B, mean, var)
        return cls(A, B, C, a, b, mean, var)

    @classmethod
    def from_standardized(cls, a: float, b: float) -> MeixnerParams:
        """Triple ``(2a, 2b, 2) / (1 + 2a)`` of a law with mean 0 and variance 1."""
        d = 1 + 2 * a
        if d == 0:
            raise ValueError("1 + 2a must be nonzero")
        return cls(2 * a / d, 2 * b / d, 2 / d, a, b, 0.0, 1.0)

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items()}


def standardized_ab(A: float, B: float, mean: float, var: float) -> tuple:
    """``a = A / (2(1-A))`` and ``b = (B + 4 A mean) / (2 sigma (1-A))``."""
    if A == 1:
        raise ValueError("A = 1 corresponds to a degenerate law")
    if not var > 0:
        raise ValueError("variance must be positive")
    sigma = math.sqrt(var)
    return A / (2 * (1 - A)), (B + 4 * A * mean) / (2 * sigma * (1 - A))


def _family_AB(spec: EnsembleSpec) -> tuple:
    if isinstance(spec, Bernoulli):
        return -1.0, 2.0
    if isinstance(spec, Binomial):
        d = 2 * spec.N - 1
        return -1.0 / d, 2.0 * spec.N / d
    if isinstance(spec, Poisson):
        return 0.0, 1.0
    if isinstance(spec, NegBinomial):
        d = 2 * spec.r + 1
        return 1.0 / d, 2 * spec.r / d
    if isinstance(spec, Gaussian):
        return 0.0, 0.0
    if isinstance(spec, (Gamma2, GammaN)):
        return 1.0 / (1 + 2 * spec.p), 0.0
    if isinstance(spec, Hyperbolic2):
        return 1.0 / (1 + 2 * spec.alpha), 0.0
    raise TypeError(f"unknown spec {spec!r}")


def meixner_params(spec: EnsembleSpec) -> MeixnerParams:
    """Regression constants of a family, with ``C`` fixed by the first two moments."""
    mean, var = theoretical_moments(spec)
    if not var > 0:
        raise ValueError(f"degenerate {spec.family} law: variance is zero")
    A, B = _family_AB(spec)
    return MeixnerParams.from_moments(A, B, mean, var)


def jorgensen_power(params: MeixnerParams, alpha: float) -> MeixnerParams:
    """Constants of the ``alpha``-th convolution power."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if params.A == 1:
        raise ValueError("A = 1 is degenerate")
    d = params.A + alpha * (1 - params.A)
    if d == 0:
        raise ValueError("A + alpha (1 - A) vanishes")
    mean = None if params.mean is None else alpha * params.mean
    var = None if params.var is None else alpha * params.var
    A, B, C = params.A / d, alpha * params.B / d, alpha**2 * params.C / d
    a = b = None
    if mean is not None and var and var > 0:
        a, b = standardized_ab(A, B, mean, var)
    return MeixnerParams(A, B, C, a, b, mean, var)


def affine_params(params: MeixnerParams, alpha_scale: float, t_shift: float) -> MeixnerParams:
    """Constants of ``alpha X + t I`` given those of ``X``."""
    A, B, C = params.A, params.B, params.C
    al, t = alpha_scale, t_shift
    mean = None if params.mean is None else al * params.mean + t
    var = None if params.var is None else al**2 * params.var
    newA, newB, newC = A, al * B - 4 * A * t, al**2 * C + 4 * A * t**2 - 2 * B * al * t
    a = b = None
    if mean is not None and var and var > 0 and A != 1:
        a, b = standardized_ab(newA, newB, mean, var)
    return MeixnerParams(newA, newB, newC, a, b, mean, var)


def printed_ab(spec: EnsembleSpec) -> tuple:
    """Closed-form standardized ``(a, b)`` for each family, written out directly."""
    if isinstance(spec, Bernoulli):
        qb = mean_rank(spec.q)
        return -0.25, (0.5 - qb) / math.sqrt(qb * (1 - qb))
    if isinstance(spec, Binomial):
        qb = mean_rank(spec.q)
        return -1 / (4 * spec.N), (0.5 - qb) / math.sqrt(spec.N * qb * (1 - qb))
    if isinstance(spec, Poisson):
        return 0.0, 1 / (2 * math.sqrt(mean_rank(spec.lam)))
    if isinstance(spec, NegBinomial):
        qb, p = mean_rank(spec.q), spec.p
        return 1 / (4 * spec.r), (p + 2 * qb) / (2 * math.sqrt(spec.r * qb * (p + qb)))
    if isinstance(spec, Gaussian):
        return 0.0, 0.0
    if isinstance(spec, Gamma2):
        return 1 / (4 * spec.p), 1 / math.sqrt(spec.p)
    if isinstance(spec, GammaN):
        return 1 / (4 * spec.p), math.copysign(1 / math.sqrt(spec.p), spec.c)
    if isinstance(spec, Hyperbolic2):
        return 1 / (4 * spec.alpha), spec.rho / math.sqrt(spec.alpha * (1 + spec.rho**2))
    raise TypeError(f"unknown spec {spec!r}")
