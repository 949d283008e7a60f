"""Monte Carlo and finite-difference checks with machine-readable reports.

Every check produces :class:`TestReport` records.  A report passes when
``|z| <= z_max`` or when ``|statistic| <= floor``; the floor absorbs
statistics that vanish identically up to rounding.  A check that fails is
repeated once with a seed derived deterministically from the original, and
the second attempt is final.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    MatrixH,
    SymEndo,
    canonical_basis,
    coords_to_dense,
    dense_to_coords,
    identity_coords,
    psi_apply,
)
from .ensembles import (
    EnsembleSpec,
    check_samplable,
    meixner_params,
    sample_batch,
    theoretical_moments,
)
from .laplace import lt_closed, lt_empirical, log_laplace_coords
from .pde import fd_derivatives

SCHEMA = "meixner.report/1"
Z_MAX = 4.0
FLOOR = 1e-12
FD_FLOOR = 1e-6


def derived_seed(seed: int) -> int:
    """Deterministic replacement seed used for the single retry."""
    return (int(seed) * 6364136223846793005 + 1442695040888963407) % 2**64


@dataclass
class TestReport:
    """Outcome of one scalar check."""

    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    standard_error: float
    z: float
    passed: bool
    z_max: float = Z_MAX
    floor: float = FLOOR
    config: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, statistic, se, z_max=Z_MAX, floor=FLOOR, config=None) -> TestReport:
        statistic, se = float(statistic), float(se)
        if se > 0:
            z = statistic / se
        else:
            z = 0.0 if statistic == 0 else math.copysign(math.inf, statistic)
        passed = abs(z) <= z_max or abs(statistic) <= floor
        return cls(name, statistic, se, z, bool(passed), z_max, floor, dict(config or {}))

    def to_json(self) -> dict:
        d = asdict(self)
        d["schema"] = SCHEMA
        return d


def all_passed(reports: Sequence[TestReport]) -> bool:
    return all(r.passed for r in reports)


def with_reseed(run: Callable[[int, int], list], seed: int) -> list:
    """Run ``run(seed, attempt)``; on any failure rerun once with :func:`derived_seed`."""
    reports = run(seed, 0)
    if all_passed(reports):
        return reports
    return run(derived_seed(seed), 1)


def default_theta_grid(n: int, beta: int, scale: float = 0.3) -> list:
    """Five test points: zero, three diagonal directions and one off-diagonal direction."""
    zero = MatrixH.zeros(n, beta)
    d1 = np.zeros(n)
    d1[0] = scale
    d2 = np.zeros(n)
    d2[0], d2[-1] = -2 * scale / 3, 2 * scale / 3
    grid = [zero, MatrixH.diag(d1, beta), MatrixH.diag(d2, beta), MatrixH.identity(n, beta) * (scale / 3)]
    if n > 1:
        grid.append(canonical_basis(n, beta)[n] * scale)
    else:
        grid.append(MatrixH.diag([-scale], beta))
    return grid



# ---------------------------------------------------------------------------
# regression


def _weak_reports(spec, thetas, N, seed, attempt, params, inject_C, z_max, floor, threads, stream):
    n, beta = spec.n, spec.beta
    A, B, C = params.A, params.B, params.C + inject_C
    x = sample_batch(spec, N, seed, stream=stream, threads=threads)
    y = sample_batch(spec, N, seed, stream=stream + 1, threads=threads)
    s = x + y
    dx = coords_to_dense(x - y, n, beta)
    ds = coords_to_dense(s, n, beta)
    diff_sq = dense_to_coords(dx @ dx, n, beta)
    s_sq = dense_to_coords(ds @ ds, n, beta)
    resid = diff_sq - A * s_sq - B * s - C * identity_coords(n, beta)
    reports = []
    for ti, theta in enumerate(thetas):
        w = np.exp(s @ theta.coords)
        vals = resid * w[:, None]
        mean = vals.mean(axis=0)
        se = vals.std(axis=0, ddof=1) / math.sqrt(N)
        for a in range(theta.dim):
            cfg = {
                "family": spec.family,
                "seed": int(seed),
                "attempt": attempt,
                "N": int(N),
                "theta_index": ti,
                "theta": [float(c) for c in theta.coords],
                "coordinate": a,
                "A": A,
                "B": B,
                "C": C,
                "inject_C": inject_C,
            }
            reports.append(
                TestReport.build(f"regression[{spec.family}]", mean[a], se[a], z_max, floor, cfg)
            )
    return reports


def regression_weak_test(
    spec: EnsembleSpec,
    thetas: Sequence[MatrixH] | None,
    N: int,
    seed: int,
    params=None,
    inject_C: float = 0.0,
    z_max: float = Z_MAX,
    floor: float = FLOOR,
    threads: int | None = None,
    reseed: bool = True,
    stream: int = 0,
) -> list:
    """Weak-form test of ``E[((X-Y)^2 - A S^2 - B S - C I) exp<theta|S>] = 0``.

    Independent pairs ``(X_i, Y_i)`` come from streams ``stream`` and
    ``stream + 1``.  ``inject_C`` perturbs ``C`` to check that the test has
    power.  Returns one report per ``theta`` and per coordinate.
    """
    check_samplable(spec)
    if N < 2:
        raise ValueError("N must be at least 2")
    thetas = default_theta_grid(spec.n, spec.beta) if thetas is None else list(thetas)
    params = meixner_params(spec) if params is None else params

    def run(sd, attempt):
        return _weak_reports(spec, thetas, N, sd, attempt, params, inject_C, z_max, floor, threads, stream)

    return with_reseed(run, seed) if reseed else run(seed, 0)


# ---------------------------------------------------------------------------
# moments


def _moment_reports_sampled(spec, N, seed, attempt, z_max, threads, stream):
    n, beta = spec.n, spec.beta
    m, v = theoretical_moments(spec)
    x = sample_batch(spec, N, seed, stream=stream, threads=threads)
    tr = x[:, :n].sum(axis=1) / n
    dx = coords_to_dense(x, n, beta)
    sq = dense_to_coords(dx @ dx, n, beta)[:, :n].sum(axis=1) / n
    cfg = {"family": spec.family, "seed": int(seed), "attempt": attempt, "N": int(N)}
    se_m = tr.std(ddof=1) / math.sqrt(N)
    se_s = sq.std(ddof=1) / math.sqrt(N)
    return [
        TestReport.build(
            f"mean[{spec.family}]", tr.mean() - m, se_m, z_max, FLOOR, {**cfg, "expected": m}
        ),
        TestReport.build(
            f"second_moment[{spec.family}]",
            sq.mean() - (v + m * m),
            se_s,
            z_max,
            FLOOR,
            {**cfg, "expected": v + m * m},
        ),
    ]


def fd_moments(spec: EnsembleSpec) -> tuple:
    """Mean and variance scalars from central differences of ``log L`` at zero."""
    n, beta = spec.n, spec.beta

    def kb(coords):
        k, dom = log_laplace_coords(spec, coords)
        return np.where(dom, k, np.nan)

    dim = len(identity_coords(n, beta))
    _, grad, hess = fd_derivatives(kb, np.zeros(dim), grad_step=1e-5, hess_step=1e-4)
    mean = float(np.mean(grad[:n]))
    var_matrix = psi_apply(SymEndo(n, beta, hess))
    var = float(np.mean(var_matrix.coords[:n]))
    return mean, var


def moment_test(
    spec: EnsembleSpec,
    N: int,
    seed: int,
    z_max: float = Z_MAX,
    threads: int | None = None,
    reseed: bool = True,
    stream: int = 0,
    fd_tolerance: float = FD_FLOOR,
) -> list:
    """Empirical (or finite-difference, for analytic-only families) moments against theory.

    Samplable families report ``mean - m`` and ``E tr(X^2)/n - (v + m^2)``
    with standard errors.  Analytic families report relative errors of the
    finite-difference mean and variance, passing when below ``fd_tolerance``.
    """
    if not spec.samplable:
        m, v = theoretical_moments(spec)
        fm, fv = fd_moments(spec)
        cfg = {"family": spec.family, "method": "finite-difference", "expected_mean": m, "expected_var": v}
        rel_m = (fm - m) / max(abs(m), 1.0)
        rel_v = (fv - v) / max(abs(v), 1.0)
        return [
            TestReport.build(f"mean[{spec.family}]", rel_m, 0.0, z_max, fd_tolerance, cfg),
            TestReport.build(f"variance[{spec.family}]", rel_v, 0.0, z_max, fd_tolerance, cfg),
        ]
    if N < 2:
        raise ValueError("N must be at least 2")

    def run(sd, attempt):
        return _moment_reports_sampled(spec, N, sd, attempt, z_max, threads, stream)

    return with_reseed(run, seed) if reseed else run(seed, 0)


# ---------------------------------------------------------------------------
# Laplace transforms


def lt_match_test(
    spec: EnsembleSpec,
    thetas: Sequence[MatrixH] | None,
    N: int,
    seed: int,
    z_max: float = Z_MAX,
    floor: float = FLOOR,
    threads: int | None = None,
    reseed: bool = True,
    stream: int = 0,
) -> list:
    """Per-``theta`` z-scores of the empirical Laplace transform against the closed form."""
    check_samplable(spec)
    if N < 2:
        raise ValueError("N must be at least 2")
    thetas = default_theta_grid(spec.n, spec.beta) if thetas is None else list(thetas)

    def run(sd, attempt):
        x = sample_batch(spec, N, sd, stream=stream, threads=threads)
        out = []
        for ti, theta in enumerate(thetas):
            est, se = lt_empirical(x, theta)
            closed = lt_closed(spec, theta)
            cfg = {
                "family": spec.family,
                "seed": int(sd),
                "attempt": attempt,
                "N": int(N),
                "theta_index": ti,
                "theta": [float(c) for c in theta.coords],
                "closed": closed.value,
                "estimate": est,
            }
            out.append(TestReport.build(f"laplace[{spec.family}]", est - closed.value, se, z_max, floor, cfg))
        return out

    return with_reseed(run, seed) if reseed else run(seed, 0)


def projection_mean_test(
    m: int, n: int, beta: int, N: int, seed: int, z_max: float = Z_MAX, reseed: bool = True, stream: int = 0
) -> list:
    """Per-coordinate z-scores of the empirical mean of rank-``m`` projections against ``(m/n) I``."""
    from .ensembles import projection_sample_batch

    def run(sd, attempt):
        x = projection_sample_batch(m, n, beta, N, sd, stream)
        target = (m / n) * identity_coords(n, beta)
        mean = x.mean(axis=0)
        se = x.std(axis=0, ddof=1) / math.sqrt(N)
        cfg = {"m": m, "n": n, "beta": beta, "seed": int(sd), "attempt": attempt, "N": int(N)}
        return [
            TestReport.build(f"projection_mean[m={m},n={n},beta={beta}]", mean[a] - target[a], se[a], z_max, FLOOR, {**cfg, "coordinate": a})
            for a in range(x.shape[1])
        ]

    return with_reseed(run, seed) if reseed else run(seed, 0)


def summarize(reports: Sequence[TestReport]) -> dict:
    """Counts and the worst ``|z|`` of a report list."""
    finite = [abs(r.z) for r in reports if math.isfinite(r.z)]
    return {
        "count": len(reports),
        "failed": sum(not r.passed for r in reports),
        "max_abs_z": max(finite) if finite else 0.0,
        "passed": all_passed(reports),
    }


def exit_code(reports: Sequence[TestReport]) -> int:
    return 0 if all_passed(reports) else 1
