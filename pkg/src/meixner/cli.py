"""Command-line interface: ``meixner {sample,verify,pde,laplace,jack}``.

Every run writes a header record that carries the full run configuration
and the package version, followed by one record per row.  Floats are
printed with 17 significant digits so that reruns with the same
configuration are byte-identical.  Exit status is 0 on success, 1 when a
verification fails and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .algebra import MatrixH, SigmaPoint, eigenvalues, random_hermitian, sigma
from .ensembles import (
    FAMILIES,
    FAMILY_ALIASES,
    EnsembleSpec,
    RngStream,
    UnsupportedSampler,
    make_spec,
    printed_ab,
    resolve_threads,
    sample_batch,
)
from .jack import CLOSED_FORM_MIN_GAP, JackSeriesConfig, lt_rank1_series, rank1_closed_n3_beta2
from .laplace import SOLUTION_CASES, lt_closed, rank1_sigma
from .pde import k_equation_residual, pde_residual, solution_case, solution_g
from .verify import (
    Z_MAX,
    default_theta_grid,
    exit_code,
    lt_match_test,
    moment_test,
    regression_weak_test,
    summarize,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Invalid command-line configuration."""


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    """JSON text with every float written as ``%.17g``."""
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return "%.17g" % v
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in record.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple, np.ndarray)):
            for i, item in enumerate(v):
                if isinstance(item, dict):
                    out.update(_flatten(item, f"{key}.{i}."))
                else:
                    out[f"{key}.{i}"] = item
        else:
            out[key] = v
    return out


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)) and not isinstance(v, bool):
        return _fmt(v)
    return "" if v is None else str(v)


def render(header: dict, records: list, fmt: str) -> str:
    if fmt == "json":
        lines = [_fmt({"type": "header", **header})]
        lines.extend(_fmt(r) for r in records)
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    buf.write("# " + _fmt(header) + "\n")
    flat = [_flatten(r) for r in records]
    columns = []
    for row in flat:
        for key in row:
            if key not in columns:
                columns.append(key)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in flat:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(header: dict, records: list, config: RunConfig) -> None:
    text = render(header, records, config.format)
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    """Validated configuration of one run; echoed into every output.

    The output path and the worker count do not change results, so they are
    left out of the echo; reruns writing to different files stay identical.
    """

    command: str
    spec: dict | None = None
    seed: int = 0
    N: int | None = None
    grid: str | None = None
    output: str | None = None
    format: str = "json"
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("output")
        d["options"] = {k: v for k, v in d["options"].items() if k != "threads"}
        return d


def parse_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_theta_grid(text: str, n: int, beta: int) -> list:
    """Parse the theta DSL into a list of matrices.

    ``0`` is the zero matrix, ``diag:a,b,...`` a diagonal matrix,
    ``rand:N:scale:seed`` draws ``N`` matrices with coordinates uniform on
    ``[-scale, scale]`` and ``default`` is the five-point test grid.
    Several specifications may be joined with ``;``.
    """
    out = []
    for part in text.split(";"):
        part = part.strip()
        if part in ("0", "zero"):
            out.append(MatrixH.zeros(n, beta))
        elif part == "default":
            out.extend(default_theta_grid(n, beta))
        elif part.startswith("diag:"):
            vals = parse_floats(part[5:])
            if len(vals) != n:
                raise ConfigError(f"diag grid needs {n} entries, got {len(vals)}")
            out.append(MatrixH.diag(vals, beta))
        elif part.startswith("rand:"):
            fields = part.split(":")
            if len(fields) != 4:
                raise ConfigError("random grid syntax is rand:N:scale:seed")
            try:
                count, scale, seed = int(fields[1]), float(fields[2]), int(fields[3])
            except ValueError as exc:
                raise ConfigError(f"bad random grid {part!r}") from exc
            if count < 1 or not scale > 0:
                raise ConfigError("random grid needs N >= 1 and scale > 0")
            rng = RngStream(seed).generator()
            out.extend(random_hermitian(n, beta, rng, scale) for _ in range(count))
        else:
            raise ConfigError(f"unrecognised theta grid {part!r}")
    return out


def sigma_grid(text: str, n: int, beta: int) -> list:
    """Sigma points for the PDE scans; ``default`` is a 10 x 10 grid inside the distinct-root region."""
    if text == "default":
        if n != 2:
            raise ConfigError("the default sigma grid is defined for n = 2")
        pts = []
        for s1 in np.linspace(-0.5, 0.5, 10):
            for d in np.linspace(0.02, 0.5, 10):
                pts.append(SigmaPoint(2, np.array([s1, (s1 * s1 - d) / 4])))
        return pts
    return [sigma(t) for t in parse_theta_grid(text, n, beta)]


def _spec_params(args) -> dict:
    family = FAMILY_ALIASES.get(args.family, args.family)
    n = args.n
    q = parse_floats(args.q) if args.q else tuple([0.5 / n] * n)
    if family == "bernoulli":
        return {"q": q}
    if family == "binomial":
        return {"N": args.N if args.N is not None else 2, "q": q}
    if family == "poisson":
        return {"lam": parse_floats(args.lam) if args.lam else tuple([1.0] * n)}
    if family == "negative_binomial":
        q = parse_floats(args.q) if args.q else tuple([0.3 / n] * n)
        return {"r": args.r if args.r is not None else 2.0, "q": q}
    if family == "gaussian":
        return {"c1": args.c1, "c2": args.c2, "c3": args.c3}
    if family == "gamma2":
        return {"p": args.p if args.p is not None else 2.0, "c": args.c if args.c is not None else 2.0}
    if family == "gamma_n":
        return {"p": args.p if args.p is not None else 2.0, "c": args.c if args.c is not None else 1.0}
    if family == "hyperbolic2":
        lam = parse_floats(args.lam) if args.lam else (0.0,)
        if len(lam) != 1:
            raise ConfigError("hyperbolic2 takes a single --lambda value")
        return {"alpha": args.alpha, "lam": lam[0], "rho": args.rho}
    raise ConfigError(f"unknown family {args.family!r}; choose from {sorted(FAMILIES)}")


def build_spec(args) -> EnsembleSpec:
    try:
        return make_spec(args.family, args.n, args.beta, **_spec_params(args))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _threads(args) -> int:
    try:
        return resolve_threads(args.threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _header(config: RunConfig) -> dict:
    return {"version": __version__, "config": config.to_json()}


def _theta_record(theta: MatrixH) -> list:
    return [float(c) for c in theta.coords]


# ---------------------------------------------------------------------------
# commands


def cmd_sample(args) -> int:
    spec = build_spec(args)
    if not spec.samplable:
        raise ConfigError(f"{spec.family} is an analytic-only family; it has no sampler")
    if args.count < 1:
        raise ConfigError("--count must be positive")
    threads = _threads(args)
    config = RunConfig(
        "sample", spec.to_json(), args.seed, args.count, None, args.output, args.format, {"threads": threads}
    )
    try:
        x = sample_batch(spec, args.count, args.seed, threads=threads)
    except UnsupportedSampler as exc:
        raise ConfigError(str(exc)) from exc
    records = [{"index": i, "coords": row} for i, row in enumerate(x)]
    emit(_header(config), records, config)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = build_spec(args)
    if args.count < 2:
        raise ConfigError("--count must be at least 2")
    threads = _threads(args)
    grid_text = args.theta or "default"
    thetas = parse_theta_grid(grid_text, spec.n, spec.beta)
    config = RunConfig(
        "verify",
        spec.to_json(),
        args.seed,
        args.count,
        grid_text,
        args.output,
        args.format,
        {"threads": threads, "inject_wrong_C": args.inject_wrong_C, "z_max": args.z_max},
    )
    reports = []
    if spec.samplable:
        reports += regression_weak_test(
            spec, thetas, args.count, args.seed, inject_C=args.inject_wrong_C, z_max=args.z_max, threads=threads
        )
        reports += moment_test(spec, args.count, args.seed, z_max=args.z_max, threads=threads, stream=2)
        reports += lt_match_test(spec, thetas, args.count, args.seed, z_max=args.z_max, threads=threads, stream=3)
    else:
        reports += moment_test(spec, args.count, args.seed, z_max=args.z_max)
    records = [{"type": "report", **r.to_json()} for r in reports]
    summary = summarize(reports)
    records.append({"type": "summary", **summary})
    emit(_header(config), records, config)
    if args.output:
        sys.stdout.write(_fmt(summary) + "\n")
    return exit_code(reports)


def cmd_pde(args) -> int:
    if (args.case is None) == (args.family is None):
        raise ConfigError("give exactly one of --case or --family")
    records = []
    if args.case is not None:
        constants = {}
        for key in ("a", "b", "C", "C1", "C2", "C3"):
            val = getattr(args, "const_" + key)
            if val is not None:
                constants[key] = val
        if args.lam is not None:
            constants["lam"] = parse_floats(args.lam)[0]
        grid_text = args.grid or "default"
        try:
            case = solution_case(args.case, constants)
            g = solution_g(args.case, constants, args.beta)
            g(np.zeros((1, 2)))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad constants for case {args.case!r}: {exc}") from exc
        points = sigma_grid(grid_text, 2, args.beta)
        config = RunConfig(
            "pde", None, 0, len(points), grid_text, args.output, args.format,
            {"case": args.case, "constants": constants, "beta": args.beta},
        )
        for pt in points:
            row = {"sigma": [float(s) for s in pt.sigma], "case": case.to_json(), "params": constants}
            try:
                res = pde_residual(case, g, pt, args.beta)
                row.update(residual_max_abs=float(np.max(np.abs(res))), in_domain=True)
            except ValueError as exc:
                row.update(residual_max_abs=None, in_domain=False, note=str(exc))
            records.append(row)
    else:
        spec = build_spec(args)
        grid_text = args.grid or "rand:20:0.3:1"
        thetas = parse_theta_grid(grid_text, spec.n, spec.beta)
        a, b = printed_ab(spec)
        config = RunConfig(
            "pde", spec.to_json(), 0, len(thetas), grid_text, args.output, args.format, {"a": a, "b": b}
        )
        for theta in thetas:
            row = {"theta": _theta_record(theta), "case": {"a": a, "b": b}, "params": spec.params()}
            try:
                res = k_equation_residual(spec, a, b, theta)
                row.update(residual_max_abs=float(np.max(np.abs(res.coords))), in_domain=True)
            except ValueError as exc:
                row.update(residual_max_abs=None, in_domain=False, note=str(exc))
            records.append(row)
    finite = [r["residual_max_abs"] for r in records if r["residual_max_abs"] is not None]
    summary = {"type": "summary", "points": len(records), "flagged": len(records) - len(finite),
               "max_residual": max(finite) if finite else None}
    records.append(summary)
    emit(_header(config), records, config)
    if args.output:
        sys.stdout.write(_fmt(summary) + "\n")
    return EXIT_OK


def cmd_laplace(args) -> int:
    spec = build_spec(args)
    grid_text = args.theta or "0"
    thetas = parse_theta_grid(grid_text, spec.n, spec.beta)
    config = RunConfig("laplace", spec.to_json(), 0, len(thetas), grid_text, args.output, args.format)
    records = []
    for theta in thetas:
        ev = lt_closed(spec, theta)
        records.append({"theta": _theta_record(theta), "value": ev.value, "in_domain": ev.in_domain})
    emit(_header(config), records, config)
    return EXIT_OK


def _jack_closed(theta: MatrixH):
    if theta.n == 2:
        return float(rank1_sigma(sigma(theta).sigma, theta.beta))
    if theta.n == 3 and theta.beta == 2:
        ev = eigenvalues(theta)
        if np.min(np.diff(ev)) > CLOSED_FORM_MIN_GAP:
            return rank1_closed_n3_beta2(ev)
    return None


def cmd_jack(args) -> int:
    try:
        jc = JackSeriesConfig(args.n, args.beta, args.max_k)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    grid_text = args.theta or "0"
    thetas = parse_theta_grid(grid_text, args.n, args.beta)
    config = RunConfig(
        "jack", None, 0, len(thetas), grid_text, args.output, args.format,
        {"n": args.n, "beta": args.beta, "max_k": args.max_k},
    )
    records = []
    for theta in thetas:
        res = lt_rank1_series(theta, jc)
        closed = _jack_closed(theta)
        records.append(
            {
                "theta": _theta_record(theta),
                "value": res.value,
                "last_term": res.last_term,
                "converged": res.converged,
                "closed_form": closed,
                "abs_diff": None if closed is None else abs(res.value - closed),
            }
        )
    emit(_header(config), records, config)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p) -> None:
    p.add_argument("--n", type=int, default=2, help="matrix size")
    p.add_argument("--beta", type=int, default=1, choices=(1, 2, 4), help="Peirce constant")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=None, help="worker cap (fallback: MEIXNER_THREADS)")


def _add_family(p, required: bool = True) -> None:
    p.add_argument("--family", required=required, help="ensemble family, e.g. bernoulli, poisson, nb2")
    p.add_argument("--q", default=None, help="comma-separated weights q_1..q_n")
    p.add_argument("--N", type=int, default=None, help="binomial number of trials")
    p.add_argument("--lambda", dest="lam", default=None, help="Poisson rates, or the hyperbolic lambda")
    p.add_argument("--r", type=float, default=None, help="negative-binomial shape")
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--c3", type=float, default=1.0)
    p.add_argument("--p", type=float, default=None, help="gamma shape")
    p.add_argument("--c", type=float, default=None, help="gamma scale")
    p.add_argument("--alpha", type=float, default=1.0, help="hyperbolic alpha")
    p.add_argument("--rho", type=float, default=0.0, help="hyperbolic rho")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meixner", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"meixner {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw samples from a samplable family")
    _add_common(p)
    _add_family(p)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="regression, moment and Laplace checks")
    _add_common(p)
    _add_family(p)
    p.add_argument("--count", type=int, default=200000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", default=None, help="theta grid (default: five-point grid)")
    p.add_argument("--inject-wrong-C", dest="inject_wrong_C", type=float, default=0.0)
    p.add_argument("--z-max", dest="z_max", type=float, default=Z_MAX)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pde", help="PDE residual scans")
    _add_common(p)
    _add_family(p, required=False)
    p.add_argument("--case", choices=SOLUTION_CASES, default=None)
    for key in ("a", "b", "C", "C1", "C2", "C3"):
        p.add_argument(f"--{key}", dest="const_" + key, type=float, default=None)
    p.add_argument("--grid", default=None, help="sigma grid ('default') or theta grid DSL")
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("laplace", help="tabulate closed-form Laplace transforms")
    _add_common(p)
    _add_family(p)
    p.add_argument("--theta", default=None)
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("jack", help="rank-one projection Laplace transform by Jack series")
    _add_common(p)
    p.add_argument("--theta", default=None)
    p.add_argument("--max-k", dest="max_k", type=int, default=30)
    p.set_defaults(func=cmd_jack)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "n") and args.n < 1:
            raise ConfigError("--n must be positive")
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"meixner: error: {exc}\n")
        return EXIT_CONFIG
    except (UnsupportedSampler, ValueError) as exc:
        sys.stderr.write(f"meixner: error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
