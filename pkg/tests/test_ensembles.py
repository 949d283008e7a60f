import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meixner.algebra import coords_to_dense, eigenvalues_batch
from meixner.ensembles import (
    Bernoulli,
    Binomial,
    EnsembleSpec,
    Gamma2,
    GammaN,
    Gaussian,
    Hyperbolic2,
    MeixnerParams,
    NegBinomial,
    Poisson,
    RngStream,
    UnsupportedSampler,
    affine_params,
    haar_rotation_batch,
    jorgensen_power,
    make_spec,
    meixner_params,
    printed_ab,
    projection_batch,
    resolve_threads,
    sample_batch,
    sample_ensemble,
    theoretical_moments,
)

BETAS = (1, 2, 4)

ALL_SPECS = [
    Bernoulli(2, 1, (0.3, 0.2)),
    Bernoulli(3, 2, (0.1, 0.2, 0.3)),
    Binomial(2, 4, 3, (0.25, 0.25)),
    Poisson(2, 2, (0.7, 0.4)),
    NegBinomial(3, 1, 1.5, (0.1, 0.1, 0.1)),
    Gaussian(3, 4, 0.2, 0.1, 0.5),
    Gamma2(2, 2, 3.0, 1.5),
    GammaN(3, 1, 2.5, -0.7),
    Hyperbolic2(2, 1, 1.3, 0.4, 0.3),
    Hyperbolic2(2, 4, 0.8, 1.0, 0.0),
]


def test_validation_errors():
    with pytest.raises(ValueError):
        Bernoulli(2, 1, (0.8, 0.5))
    with pytest.raises(ValueError):
        Gamma2(2, 4, 1.5, 2.0)  # p must exceed beta/2
    with pytest.raises(ValueError):
        Gamma2(3, 1, 3.0, 2.0)
    with pytest.raises(ValueError):
        Hyperbolic2(2, 1, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        NegBinomial(2, 1, 1.0, (0.6, 0.4))
    with pytest.raises(ValueError):
        Poisson(2, 1, (0.0, 0.0))


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.family)
def test_json_roundtrip(spec):
    assert EnsembleSpec.from_json(spec.to_json()) == spec


def test_aliases():
    assert make_spec("nb2", 2, 1, r=2.0, q=(0.1, 0.2)).family == "negative_binomial"


def test_analytic_families_do_not_sample():
    with pytest.raises(UnsupportedSampler, match="analytic-only"):
        sample_batch(Gamma2(2, 1, 3.0, 2.0), 10, 0)
    with pytest.raises(UnsupportedSampler):
        sample_ensemble(Hyperbolic2(2, 1), np.random.default_rng(0))


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("n", [1, 2, 4])
def test_haar_rotations_are_unitary(n, beta):
    u = haar_rotation_batch(n, beta, RngStream(3).generator(), 50)
    eye = np.eye(u.shape[-1])
    uh = np.conj(np.swapaxes(u, -1, -2))
    np.testing.assert_allclose(u @ uh, np.broadcast_to(eye, u.shape), atol=1e-12)


def test_quaternion_rotations_keep_block_structure():
    u = haar_rotation_batch(3, 4, RngStream(1).generator(), 10)
    a, b = u[:, 0::2, 0::2], u[:, 0::2, 1::2]
    np.testing.assert_allclose(u[:, 1::2, 1::2], np.conj(a), atol=1e-14)
    np.testing.assert_allclose(u[:, 1::2, 0::2], -np.conj(b), atol=1e-14)


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("m,n", [(1, 2), (1, 3), (2, 3), (2, 4)])
def test_projections_are_idempotent_with_rank_m(m, n, beta):
    x = projection_batch(m, n, beta, RngStream(5).generator(), 40)
    d = coords_to_dense(x, n, beta)
    np.testing.assert_allclose(d @ d, d, atol=1e-12)
    ev = eigenvalues_batch(x, n, beta)
    np.testing.assert_allclose(np.sort(ev, axis=1), np.tile([0.0] * (n - m) + [1.0] * m, (40, 1)), atol=1e-12)


def test_sampling_is_deterministic_and_thread_invariant():
    spec = Poisson(2, 4, (0.5, 0.8))
    a = sample_batch(spec, 10000, 17, threads=1, chunk_size=1000)
    b = sample_batch(spec, 10000, 17, threads=4, chunk_size=1000)
    assert np.array_equal(a, b)
    c = sample_batch(spec, 10000, 18, threads=1, chunk_size=1000)
    assert not np.array_equal(a, c)
    d = sample_batch(spec, 10000, 17, stream=1, threads=1, chunk_size=1000)
    assert not np.array_equal(a, d)


def test_resolve_threads(monkeypatch):
    monkeypatch.setenv("MEIXNER_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.delenv("MEIXNER_THREADS")
    assert resolve_threads(None) == 1
    with pytest.raises(ValueError):
        resolve_threads(0)


@pytest.mark.parametrize(
    "spec",
    [
        Bernoulli(2, 1, (0.3, 0.2)),
        Binomial(3, 2, 3, (0.1, 0.2, 0.1)),
        Poisson(2, 4, (0.7, 0.4)),
        NegBinomial(2, 1, 3.0, (0.1, 0.2)),
        Gaussian(2, 2, 0.3, 0.2, 0.5),
    ],
    ids=lambda s: s.family,
)
def test_sample_moments(spec):
    n, beta = spec.n, spec.beta
    m, v = theoretical_moments(spec)
    N = 40000
    x = sample_batch(spec, N, 99)
    mean = x.mean(axis=0)
    se = x.std(axis=0, ddof=1) / math.sqrt(N)
    target = np.concatenate([[m] * n, np.zeros(x.shape[1] - n)])
    assert np.all(np.abs(mean - target) <= 5 * se + 1e-12)
    d = coords_to_dense(x, n, beta)
    sq = np.real(np.trace(d @ d, axis1=-2, axis2=-1)) / (2 if beta == 4 else 1) / n
    se2 = sq.std(ddof=1) / math.sqrt(N)
    assert abs(sq.mean() - (v + m * m)) <= 5 * se2


def test_binomial_mean_is_N_qbar():
    spec = Binomial(2, 1, 3, (0.3, 0.2))
    m, v = theoretical_moments(spec)
    assert m == pytest.approx(3 * (0.3 + 2 * 0.2) / 2)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.family)
def test_eq5_matches_printed_ab(spec):
    p = meixner_params(spec)
    a, b = printed_ab(spec)
    assert abs(p.a - a) <= 1e-12 and abs(p.b - b) <= 1e-12


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.family)
def test_standardized_triple(spec):
    p = meixner_params(spec)
    std = affine_params(p, 1 / math.sqrt(p.var), -p.mean / math.sqrt(p.var))
    ref = MeixnerParams.from_standardized(p.a, p.b)
    np.testing.assert_allclose(std.triple(), ref.triple(), atol=1e-12)


def test_family_triples():
    assert meixner_params(Bernoulli(2, 1, (0.3, 0.2))).triple() == (-1.0, 2.0, 0.0)
    A, B, C = meixner_params(Poisson(2, 2, (1.0, 2.0))).triple()
    assert (A, B) == (0.0, 1.0) and abs(C) < 1e-15
    A, B, C = meixner_params(NegBinomial(2, 1, 2.0, (0.1, 0.2))).triple()
    assert (A, B) == (0.2, 0.8) and abs(C) < 1e-14


@pytest.mark.parametrize("N", [1, 2, 3, 7])
def test_jorgensen_bernoulli_to_binomial(N):
    bern = MeixnerParams(-1.0, 2.0, 0.0)
    assert jorgensen_power(bern, N).triple() == (-1 / (2 * N - 1), 2 * N / (2 * N - 1), 0.0)
    derived = meixner_params(Binomial(2, 1, N, (0.3, 0.2))).triple()
    np.testing.assert_allclose(derived, jorgensen_power(bern, N).triple(), atol=1e-15)


@given(
    st.floats(-0.9, 0.9),
    st.floats(-3, 3),
    st.floats(0.1, 3),
    st.floats(-2, 2),
    st.floats(0.2, 5),
    st.floats(-3, 3),
)
def test_affine_roundtrip(A, B, C, mean, scale, shift):
    p = MeixnerParams(A, B, C, mean=mean, var=1.0)
    back = affine_params(affine_params(p, scale, shift), 1 / scale, -shift / scale)
    np.testing.assert_allclose(back.triple(), p.triple(), atol=1e-12 * (1 + abs(B) + abs(C) + abs(shift)) ** 2)


@given(st.floats(0.05, 3), st.floats(0.05, 3))
def test_jorgensen_composes(a1, a2):
    p = meixner_params(NegBinomial(2, 1, 1.5, (0.1, 0.2)))
    one = jorgensen_power(jorgensen_power(p, a1), a2)
    two = jorgensen_power(p, a1 * a2)
    np.testing.assert_allclose(one.triple(), two.triple(), rtol=1e-12, atol=1e-14)


def test_rng_stream_rejects_bad_seed():
    with pytest.raises(ValueError):
        RngStream(-1)
