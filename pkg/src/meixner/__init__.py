"""Meixner matrix ensembles: sampling, Laplace transforms and numerical verification."""

from .algebra import MatrixH, SigmaPoint, SymEndo, eigenvalues, psi_apply, sigma
from .ensembles import (
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
    make_spec,
    meixner_params,
    sample_batch,
    theoretical_moments,
)
from .laplace import LaplaceEval, lt_closed, lt_empirical
from .verify import TestReport, lt_match_test, moment_test, regression_weak_test

__version__ = "0.1.0"

__all__ = [
    "Bernoulli",
    "Binomial",
    "EnsembleSpec",
    "Gamma2",
    "GammaN",
    "Gaussian",
    "Hyperbolic2",
    "LaplaceEval",
    "MatrixH",
    "MeixnerParams",
    "NegBinomial",
    "Poisson",
    "RngStream",
    "SigmaPoint",
    "SymEndo",
    "TestReport",
    "eigenvalues",
    "lt_closed",
    "lt_empirical",
    "lt_match_test",
    "make_spec",
    "meixner_params",
    "moment_test",
    "psi_apply",
    "regression_weak_test",
    "sample_batch",
    "sigma",
    "theoretical_moments",
]
