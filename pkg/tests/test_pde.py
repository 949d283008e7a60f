import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from meixner.algebra import MatrixH, SigmaPoint, SymEndo, psi_apply, random_hermitian, sigma, sigma_batch, sigma_grad
from meixner.ensembles import (
    Bernoulli,
    Binomial,
    Gamma2,
    GammaN,
    Gaussian,
    Hyperbolic2,
    MeixnerParams,
    NegBinomial,
    Poisson,
    meixner_params,
    printed_ab,
    theoretical_moments,
)
from meixner.laplace import log_laplace_coords
from meixner.pde import (
    GDerivs,
    PdeCase,
    d_operator_pj,
    d_operator_rows,
    f_to_g_transform,
    fd_derivatives,
    k_equation_residual,
    pde_residual,
    pre_L_residual,
    residual_from_derivs,
    solution_case,
    solution_g,
    standardized_log_laplace,
)

SOLUTIONS = [
    ("parabolic", {"b": 0.7, "C": 0.3}),
    ("elliptic", {"a": 0.1, "b": 0.8, "lam": 0.4}),
    ("elliptic", {"a": -0.125, "b": 0.3, "lam": 0.2}),
    ("hyperbolic", {"a": 0.5, "b": 0.3, "lam": 0.4}),
    ("poisson", {"b": 0.6, "C": 0.3}),
    ("gaussian", {"C": 0.5}),
]


def _sigma_grid():
    return [SigmaPoint(2, [s1, (s1 * s1 - d) / 4]) for s1 in np.linspace(-0.5, 0.5, 10) for d in np.linspace(0.02, 0.5, 10)]


def _random_derivs(n, rng, integer=False):
    draw = (lambda *s: rng.integers(-5, 6, size=s).astype(float)) if integer else (lambda *s: rng.normal(size=s))
    h = draw(n, n)
    return GDerivs(float(draw(1)[0]), draw(n), h + h.T, SigmaPoint(n, draw(n)))


def test_case_tags():
    assert PdeCase.from_ab(0.1, 0.0).tag == "I"
    assert PdeCase.from_ab(0.0, 0.3).tag == "II"
    assert PdeCase.from_ab(0.0, 0.0).tag == "III"
    with pytest.raises(ValueError):
        PdeCase("II", 0.1, 0.2)


def test_gderivs_requires_symmetric_hessian():
    with pytest.raises(ValueError):
        GDerivs(0.0, [0, 0], [[0, 1], [0, 0]], SigmaPoint(2, [0, 0]))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("beta", [1, 2, 4])
def test_two_operator_assemblies_agree(n, beta, rng):
    for _ in range(10):
        d = _random_derivs(n, rng, integer=True)
        assert np.array_equal(d_operator_rows(d, beta), d_operator_pj(d, beta))
        d = _random_derivs(n, rng)
        np.testing.assert_allclose(d_operator_rows(d, beta), d_operator_pj(d, beta), atol=1e-12)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_two_by_two_rows(beta, rng):
    d = _random_derivs(2, rng)
    s1, s2 = d.at.sigma
    row1 = d.hess[0, 0] - s2 * d.hess[1, 1] - (beta / 2) * d.grad[1]
    row2 = 2 * d.hess[0, 1] + s1 * d.hess[1, 1]
    np.testing.assert_allclose(d_operator_pj(d, beta), [row1, row2], atol=1e-13)


def test_constant_function_is_annihilated():
    d = GDerivs(3.0, np.zeros(3), np.zeros((3, 3)), SigmaPoint(3, [0.1, 0.2, 0.3]))
    assert np.all(d_operator_pj(d, 2) == 0)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_gaussian_solution_with_exact_derivatives(beta):
    C = 0.37
    case = PdeCase.from_ab(0.0, 0.0)
    for pt in _sigma_grid():
        s1, s2 = pt.sigma
        g = C * s1**2 / 2 - (1 - C) * (2 / beta) * s2
        d = GDerivs(g, [C * s1, -(1 - C) * 2 / beta], [[C, 0], [0, 0]], pt)
        assert np.max(np.abs(residual_from_derivs(case, d, beta))) < 1e-14


@pytest.mark.parametrize("case,constants", SOLUTIONS, ids=lambda v: v if isinstance(v, str) else "")
@pytest.mark.parametrize("beta", [1, 2, 4])
def test_solution_families_solve_the_system(case, constants, beta):
    pc = solution_case(case, constants)
    g = solution_g(case, constants, beta)
    worst = max(np.max(np.abs(pde_residual(pc, g, pt, beta))) for pt in _sigma_grid())
    assert worst < 1e-6


@pytest.mark.parametrize("case", ["elliptic", "hyperbolic", "poisson"])
def test_printed_argument_scaling_fails_the_system(case):
    constants = dict(SOLUTIONS[[c for c, _ in SOLUTIONS].index(case)][1])
    pc = solution_case(case, constants)
    g = solution_g(case, constants, 1, printed_scaling=True)
    worst = max(np.max(np.abs(pde_residual(pc, g, pt, 1))) for pt in _sigma_grid())
    assert worst > 1e-3


def test_pde_residual_rejects_points_outside_region():
    pc = PdeCase.from_ab(0.0, 0.0)
    g = solution_g("gaussian", {"C": 0.5}, 1)
    with pytest.raises(ValueError):
        pde_residual(pc, g, SigmaPoint(2, [0.0, 1.0]), 1)


def test_fd_derivatives_of_quadratic():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    f = lambda x: 0.5 * np.einsum("...i,ij,...j->...", x, a, x) + x[..., 0]
    v, g, h = fd_derivatives(f, np.array([0.3, -0.2]))
    np.testing.assert_allclose(g, a @ [0.3, -0.2] + [1, 0], atol=1e-9)
    np.testing.assert_allclose(h, a, atol=1e-7)
    with pytest.raises(ValueError):
        fd_derivatives(lambda x: np.where(x[..., 0] > 0, np.nan, 0.0), np.zeros(2))


@pytest.mark.parametrize("n,beta", [(2, 1), (3, 2), (4, 4)])
def test_psi_of_sigma_hessian(n, beta, rng):
    for _ in range(3):
        theta = random_hermitian(n, beta, rng)
        for m in range(2, n + 1):
            f = lambda c, m=m: sigma_batch(c, n, beta)[..., m - 1]
            _, _, hess = fd_derivatives(f, theta.coords, per_component=False)
            lhs = psi_apply(SymEndo(n, beta, hess))
            rhs = (beta / 2) * (m - 1 - n) * sigma_grad(theta, m - 1)
            assert lhs.allclose(rhs, atol=1e-5)


@pytest.mark.parametrize("n,beta", [(2, 1), (3, 4)])
def test_expansion_coefficients_by_least_squares(n, beta, rng):
    from meixner.algebra import expansion_coefficients

    theta = random_hermitian(n, beta, rng)
    s = sigma(theta)
    basis = np.array([sigma_grad(theta, j).coords for j in range(1, n + 1)]).T
    for r in range(1, n + 1):
        for t in range(1, n + 1):
            prod = sigma_grad(theta, r).jordan(sigma_grad(theta, t)).coords
            coef, *_ = np.linalg.lstsq(basis, prod, rcond=None)
            np.testing.assert_allclose(coef, expansion_coefficients(s, r, t), atol=1e-9)


def test_f_to_g_gaussian_case(rng):
    spec = Gaussian(3, 2, 0.0, 0.3, 0.5)
    kb = lambda t: log_laplace_coords(spec, t.coords)[0]
    theta = random_hermitian(3, 2, rng, 0.4)
    s1, s2 = sigma(theta).sigma[:2]
    g = f_to_g_transform(PdeCase.from_ab(0, 0), kb, theta)
    assert abs(g - (0.3 * s1**2 / 2 + 0.5 * (s1**2 - 2 * s2) / 2)) < 1e-12


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_f_to_g_gamma_case(beta, rng):
    spec = Gamma2(2, beta, 3.0, 1.5)
    a, b = printed_ab(spec)
    _, var = theoretical_moments(spec)
    kb = standardized_log_laplace(spec)
    case = PdeCase.from_ab(a, b)
    for _ in range(5):
        theta = random_hermitian(2, beta, rng, 0.3)
        s1, s2 = sigma(theta).sigma
        g = f_to_g_transform(case, lambda t: kb(t.coords), theta)
        assert abs(g - (1 - b * s1 + (beta * s1**2 + 4 * s2) / var)) < 1e-12


def test_f_to_g_rejects_repeated_eigenvalues():
    with pytest.raises(ValueError):
        f_to_g_transform(PdeCase.from_ab(0, 0), lambda t: 0.0, MatrixH.identity(2, 1))


@pytest.mark.parametrize(
    "spec",
    [Binomial(2, 1, 2, (0.3, 0.2)), NegBinomial(2, 2, 1.5, (0.1, 0.2)), Gamma2(2, 4, 3.0, 1.5), Hyperbolic2(2, 1, 1.3, 0.4, 0.3)],
    ids=lambda s: s.family,
)
def test_case_one_boundary_limits(spec, rng):
    a, b = printed_ab(spec)
    case = PdeCase.from_ab(a, b)
    kb = standardized_log_laplace(spec)
    direction = random_hermitian(2, spec.beta, rng)
    slopes = []
    for t in (1e-3, 1e-4):
        theta = direction * t
        s1 = sigma(theta).sigma[0]
        g = f_to_g_transform(case, lambda x: kb(x.coords), theta)
        assert abs(g - 1) < 1e-4 + 2 * abs(b * s1) + 1e-2 * abs(s1)
        slopes.append((g - 1) / s1)
    # g - 1 behaves like -b sigma_1 along the ray, with an O(sigma_1) correction
    assert abs(slopes[-1] + b) < 1e-2 * max(1.0, abs(b))
    assert abs(slopes[-1] + b) < abs(slopes[0] + b) + 1e-6


K_SPECS = [
    Binomial(2, 1, 3, (0.3, 0.2)),
    Poisson(2, 2, (0.7, 0.4)),
    NegBinomial(2, 4, 2.0, (0.1, 0.2)),
    Gaussian(2, 1, 0.3, 0.2, 0.7),
    Gamma2(2, 2, 3.0, 1.5),
    Hyperbolic2(2, 4, 1.3, 0.4, 0.3),
    Hyperbolic2(2, 1, 0.8, 1.0, 0.0),
    Gaussian(3, 4, 0.0, 0.1, 1.0),
    GammaN(3, 1, 3.0, 1.0),
    Bernoulli(3, 2, (0.2, 0.3, 0.1)),
]


@pytest.mark.parametrize("spec", K_SPECS, ids=lambda s: f"{s.family}-n{s.n}-b{s.beta}")
def test_k_equation(spec, rng):
    for _ in range(3):
        theta = random_hermitian(spec.n, spec.beta, rng, 0.3)
        assert np.max(np.abs(k_equation_residual(spec, theta=theta).coords)) < 1e-5


def test_k_equation_detects_wrong_constants(rng):
    spec = Binomial(2, 1, 3, (0.3, 0.2))
    a, b = printed_ab(spec)
    theta = random_hermitian(2, 1, rng, 0.3)
    assert np.max(np.abs(k_equation_residual(spec, a + 0.05, b, theta).coords)) > 1e-3


def test_standardized_gaussian_k_equation():
    spec = Gaussian(2, 2, 0.0, 0.0, 1.0)
    _, v = theoretical_moments(spec)
    kb = lambda c: np.einsum("...i,...i->...", c, c) / 2
    res = k_equation_residual(kb, 0.0, 0.0, MatrixH.diag([0.3, -0.2], 2))
    # Psi(id)(I) = 2 I for n = 2, beta = 2, so the cumulant tr(theta^2)/2 is not standardized
    assert res.allclose(MatrixH.identity(2, 2), atol=1e-6)
    std = standardized_log_laplace(spec)
    assert np.max(np.abs(k_equation_residual(std, 0.0, 0.0, MatrixH.diag([0.3, -0.2], 2)).coords)) < 1e-6


def test_k_equation_requires_theta():
    with pytest.raises(ValueError):
        k_equation_residual(Poisson(2, 1, (1.0, 1.0)))


@pytest.mark.parametrize(
    "spec",
    [Bernoulli(2, 1, (0.3, 0.2)), Poisson(2, 2, (0.7, 0.4)), NegBinomial(2, 4, 2.0, (0.1, 0.2)), Hyperbolic2(2, 2, 1.0, 0.3, 0.2)],
    ids=lambda s: s.family,
)
def test_pre_L_equation(spec, rng):
    A, B, C = meixner_params(spec).triple()
    for _ in range(3):
        theta = random_hermitian(spec.n, spec.beta, rng, 0.2)
        res = pre_L_residual(spec, A, B, C, theta)
        assert np.max(np.abs(res.coords)) < 1e-5


def test_pre_L_bernoulli_triple():
    spec = Bernoulli(2, 2, (0.3, 0.2))
    res = pre_L_residual(spec, -1.0, 2.0, 0.0, MatrixH.diag([0.2, -0.1], 2))
    assert np.max(np.abs(res.coords)) < 1e-5


def test_pre_L_at_zero_for_standardized_law():
    spec = Poisson(2, 1, (1.0, 2.0))
    p = meixner_params(spec)
    std = MeixnerParams.from_standardized(p.a, p.b)
    kb = standardized_log_laplace(spec)
    lb = lambda c: np.exp(kb(c))
    res = pre_L_residual(lb, *std.triple(), MatrixH.zeros(2, 1))
    assert np.max(np.abs(res.coords)) < 1e-6


def test_hyperbolic_regression_constant():
    # C = 4 alpha^2 / (2 alpha + 1) for every rho; the alternative 2 alpha^2 (rho^2 + 2) / (2 alpha + 1) fails
    spec = Hyperbolic2(2, 1, 1.0, 0.3, 0.8)
    alpha, rho = spec.alpha, spec.rho
    A, B, C = meixner_params(spec).triple()
    assert C == pytest.approx(4 * alpha**2 / (2 * alpha + 1))
    theta = MatrixH.diag([0.1, -0.05], 1)
    good = pre_L_residual(spec, A, B, C, theta)
    bad = pre_L_residual(spec, A, B, 2 * alpha**2 * (rho**2 + 2) / (2 * alpha + 1), theta)
    assert np.max(np.abs(good.coords)) < 1e-6
    assert np.max(np.abs(bad.coords)) > 1e-2


@given(st.floats(0.05, 0.45), st.floats(0.05, 0.4), st.floats(-0.3, 0.3))
def test_pre_L_and_k_equation_vanish_together(q1, q2, shift):
    spec = Bernoulli(2, 1, (q1, min(q2, 0.95 - q1)))
    p = meixner_params(spec)
    theta = MatrixH.diag([shift, -shift / 2], 1)
    pre = pre_L_residual(spec, *p.triple(), theta)
    kres = k_equation_residual(spec, theta=theta * math.sqrt(p.var))
    assert np.max(np.abs(pre.coords)) < 1e-5 and np.max(np.abs(kres.coords)) < 1e-5
