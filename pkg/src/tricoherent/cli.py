"""Command-line front end.

Each subcommand reads an optional JSON config, runs one verification suite
and writes a JSON report (or CSV with ``--format csv``). Reports are
byte-identical for equal config and seed; wall time is included only with
``--timing``.

Exit codes: 0 pass, 1 tolerance failure, 2 config error, 3 numerical
convergence error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from tricoherent.config import Tolerances
from tricoherent.exceptions import (
    BranchAmbiguityError,
    ConvergenceError,
    DivergentIntegralError,
    IllConditionedError,
    LeakageError,
    TricoherentError,
)

SCHEMA_VERSION = 1

EXIT_PASS, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3

ComplexPair = tuple[float, float]


class ToleranceConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    expm_rel: float = Tolerances.expm_rel
    expm_max_terms: int = Tolerances.expm_max_terms
    unitary: float = Tolerances.unitary
    symmetric: float = Tolerances.symmetric
    branch: float = Tolerances.branch
    squeeze_guard: float = Tolerances.squeeze_guard
    leakage: float = Tolerances.leakage
    headroom: int = Tolerances.headroom

    def build(self) -> Tolerances:
        return Tolerances(**self.model_dump())


class GridConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x_range: tuple[float, float] = (-3.0, 3.0)
    p_range: tuple[float, float] = (-3.0, 3.0)
    resolution: int = Field(41, ge=2, le=1001)


class RunConfig(BaseModel):
    """Every setting a run uses. Unset per-subcommand values are filled before echoing."""

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    beta: ComplexPair = (0.3, -0.2)
    gamma: ComplexPair = (-0.4, 0.1)
    x: float = 0.5
    sigma: ComplexPair = (0.2, 0.5)
    kappa: ComplexPair = (-0.1, -0.3)
    p: float = -0.4
    s: float | None = Field(None, gt=0.0, le=1.0)
    zeta: float = Field(0.3, ge=0.0)
    cutoff: int | None = Field(None, ge=1, le=40)
    n_samples: int = Field(1_000_000, ge=2)
    n_pairs: int = Field(20, ge=1)
    fock_pairs: int = Field(20, ge=0)
    fock_max_norm: float = Field(0.8, gt=0.0, lt=1.0)
    seed: int = Field(0, ge=0, lt=2**64)
    wigner_state: Literal["vacuum", "ces"] = "vacuum"
    grid: GridConfig = GridConfig()
    tolerances: ToleranceConfig = ToleranceConfig()
    output: str | None = None

    @field_validator("weights")
    @classmethod
    def _nonzero(cls, v):
        if any(w == 0.0 or not math.isfinite(w) for w in v):
            raise ValueError("weights must be finite and nonzero")
        return v


#: per-subcommand defaults for ``s`` and ``cutoff``
DEFAULTS: dict[str, dict[str, Any]] = {
    "eigencheck": {"s": 1.0, "cutoff": 1},
    "overlap": {"s": 1.0, "cutoff": 20},
    "complete": {"s": 0.99, "cutoff": 3},
    "generate": {"s": 0.5, "cutoff": 12},
    "wigner": {"s": 0.99, "cutoff": 14},
    "squeeze": {"s": 1.0, "cutoff": 20},
}


def effective_config(cfg: RunConfig, command: str) -> RunConfig:
    fill = {k: v for k, v in DEFAULTS[command].items() if getattr(cfg, k) is None}
    return cfg.model_copy(update=fill)


class Suite:
    """Accumulates metrics, threshold checks and triggered typo flags for one run."""

    def __init__(self) -> None:
        self.metrics: dict[str, Any] = {}
        self.checks: dict[str, dict[str, Any]] = {}
        self.typo_flags: dict[str, dict[str, Any]] = {}

    def check(self, name: str, value: float, limit: float, *, at_least: bool = False) -> None:
        ok = value >= limit if at_least else value <= limit
        self.checks[name] = {"value": value, "limit": limit, "kind": "min" if at_least else "max", "passed": bool(ok)}

    def flag(self, name: str, note: str, deviation: float | None = None) -> None:
        entry: dict[str, Any] = {"note": note}
        if deviation is not None:
            entry["deviation"] = deviation
        self.typo_flags[name] = entry

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())


def _c(pair: ComplexPair) -> complex:
    return complex(pair[0], pair[1])


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _weights(cfg: RunConfig):
    from tricoherent.states import ModeWeights

    return ModeWeights(*cfg.weights)


def run_eigencheck(cfg: RunConfig, suite: Suite) -> None:
    from tricoherent.states import (
        CESParams,
        ConjugateParams,
        coherent_ces_overlap,
        coherent_ces_overlap_printed,
        conjugate_ces,
        eigen_residual,
        momentum_eigenvalues,
        momentum_operators,
        position_eigenvalues,
        position_operators,
        tripartite_ces,
        x_combination_defect,
    )

    w = _weights(cfg)
    s = cfg.s
    pos = CESParams(w, _c(cfg.beta), _c(cfg.gamma), cfg.x, s)
    mom = ConjugateParams(w, _c(cfg.sigma), _c(cfg.kappa), cfg.p, s)
    expected_defect = x_combination_defect(w, s)
    table = {}
    for family, state, ops, eigs in (
        ("position", tripartite_ces(pos), position_operators(w), position_eigenvalues(pos)),
        ("momentum", conjugate_ces(mom), momentum_operators(w), momentum_eigenvalues(mom)),
    ):
        for name, op in ops.items():
            scalar, vec = eigen_residual(state, op, eigs[name])
            key = f"{family}.{name}"
            table[key] = {"scalar": abs(scalar), "vector": vec}
            suite.check(f"{key}.scalar", abs(scalar), 1e-12)
            if name.endswith("combination"):
                table[key]["expected_vector"] = expected_defect
                suite.check(f"{key}.vector_vs_expected", abs(vec - expected_defect), 1e-12)
            else:
                suite.check(f"{key}.vector", vec, 1e-12)
    ops = position_operators(w)
    comm = max(abs(a.commutator(b)) for a in ops.values() for b in ops.values())
    suite.check("position_family_commutators", comm, 1e-12)
    suite.metrics["residuals"] = table
    suite.metrics["s"] = s

    z = np.array([0.2 + 0.1j, -0.3j, 0.4])
    dev = abs(coherent_ces_overlap_printed(z, pos) - coherent_ces_overlap(z, pos))
    suite.flag(
        "beta_coefficient_nu2_plus_tau2",
        "first linear coefficient uses beta (nu^2 + tau^2); the mu^2 + tau^2 variant does not close the eigenequation",
        dev,
    )


def _random_params(rng: np.random.Generator, w, n: int, same_x: bool):
    from tricoherent.states import CESParams

    out = []
    for _ in range(n):
        b = rng.uniform(-1, 1, 4)
        x = float(rng.uniform(-2, 2))
        a = CESParams(w, complex(b[0], b[1]), complex(b[2], b[3]), x)
        c = rng.uniform(-1, 1, 4)
        out.append((a, CESParams(w, complex(c[0], c[1]), complex(c[2], c[3]), x if same_x else float(rng.uniform(-2, 2)))))
    return out


def random_eqstate(rng: np.random.Generator, n_modes: int, max_norm: float):
    """Random EQState with ``||F||_2`` uniform in ``[0, max_norm]`` and modest linear part."""
    from tricoherent.gaussian import EQState

    A = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    F = A + A.T
    F *= rng.uniform(0, max_norm) / np.linalg.norm(F, 2)
    w = (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)) * 0.5
    return EQState(0.0, w, F)


def overlap_fock_errors(rng: np.random.Generator, n_pairs: int, cutoff: int, max_norm: float) -> np.ndarray:
    """Relative errors of truncated-Fock overlaps against the analytic overlap."""
    from tricoherent.fock import inner
    from tricoherent.gaussian import fock_project, overlap

    errs = []
    for _ in range(n_pairs):
        a = random_eqstate(rng, 3, max_norm)
        b = random_eqstate(rng, 3, max_norm)
        exact = overlap(a, b)
        approx = inner(fock_project(a, cutoff), fock_project(b, cutoff))
        errs.append(abs(approx - exact) / abs(exact))
    return np.array(errs)


RATIO_SCHEDULE = (0.9, 0.99, 0.999)


def run_overlap(cfg: RunConfig, suite: Suite) -> None:
    from tricoherent.states import overlap_prefactor, overlap_prefactor_printed, prefactor_ratio_estimate

    w = _weights(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    errors = np.zeros((cfg.n_pairs, len(RATIO_SCHEDULE)))
    printed_dev = 0.0
    for i, (a, b) in enumerate(_random_params(rng, w, cfg.n_pairs, same_x=True)):
        exact = overlap_prefactor(a, b)
        for j, s in enumerate(RATIO_SCHEDULE):
            errors[i, j] = abs(prefactor_ratio_estimate(a, b, s) / exact - 1)
        printed_dev = max(printed_dev, abs(overlap_prefactor_printed(a, b) / exact - 1))
    monotone = bool(np.all(np.diff(errors, axis=1) <= 0))
    suite.metrics["ratio_schedule"] = list(RATIO_SCHEDULE)
    suite.metrics["ratio_max_rel_error"] = errors.max(axis=0)
    suite.metrics["ratio_monotone"] = monotone
    suite.check("ratio_monotone", float(monotone), 1.0, at_least=True)
    suite.check("ratio_final_rel_error", float(errors[:, -1].max()), 1e-2)
    suite.flag(
        "overlap_mu_tau_swap",
        "printed overlap exponent swaps mu and tau in two coefficients and drops the sqrt(2 pi/3) delta weight",
        printed_dev,
    )
    if cfg.fock_pairs:
        errs = overlap_fock_errors(rng, cfg.fock_pairs, cfg.cutoff, cfg.fock_max_norm)
        suite.metrics["fock_max_rel_error"] = float(errs.max())
        suite.metrics["fock_pairs_over_limit"] = int(np.sum(errs > 1e-8))
        suite.check("fock_overlap_rel_error", float(errs.max()), 1e-8)


def completeness_checks(est, exact: np.ndarray) -> dict[str, float]:
    """Summary statistics of a completeness estimate (all relative to the constant)."""
    c = est.constant
    target = c * np.eye(est.matrix.shape[0])
    dev = np.abs(est.matrix - target)
    bound = dev + 3 * est.stderr
    off = ~np.eye(est.matrix.shape[0], dtype=bool)
    diag = np.real(np.diag(est.matrix))
    z_exact = np.abs(est.matrix - exact) / np.where(est.stderr > 0, est.stderr, np.inf)
    z_zero = dev[off] / np.where(est.stderr[off] > 0, est.stderr[off], np.inf)
    fitted, fitted_err = est.fitted_constant
    return {
        "diag_max_rel_dev": float(np.max(np.abs(diag - c)) / c),
        "diag_max_rel_bound": float(np.max(np.diag(bound)) / c),
        "offdiag_max_rel": float(np.max(dev[off]) / c),
        "offdiag_max_rel_bound": float(np.max(bound[off]) / c),
        "offdiag_fraction_beyond_3sigma_of_zero": float(np.mean(z_zero > 3)),
        "fraction_beyond_3sigma_of_regularized": float(np.mean(z_exact > 3)),
        "fitted_constant": fitted,
        "fitted_constant_stderr": fitted_err,
        "constant": c,
    }


def run_complete(cfg: RunConfig, suite: Suite) -> None:
    from tricoherent.states import completeness_mc, regularized_completeness_operator

    w = _weights(cfg)
    est = completeness_mc(w, cfg.s, cfg.cutoff, cfg.n_samples, cfg.seed)
    exact = regularized_completeness_operator(w, cfg.s, cfg.cutoff)
    stats = completeness_checks(est, exact)
    suite.metrics.update(stats)
    suite.metrics["warnings"] = list(est.warnings)
    suite.check("diagonal_within_5pct_3sigma", stats["diag_max_rel_bound"], 0.05)
    suite.check("offdiagonal_within_5pct_3sigma", stats["offdiag_max_rel_bound"], 0.05)


def run_generate(cfg: RunConfig, suite: Suite) -> None:
    from tricoherent.protocol import cascade_identity_check, displacement_values, run_protocol
    from tricoherent.states import CESParams

    w = _weights(cfg)
    params = CESParams(w, _c(cfg.beta), _c(cfg.gamma), cfg.x, cfg.s)
    tol = cfg.tolerances.build()
    casc = cascade_identity_check(w, cfg.s, "analytic", tolerances=tol)
    _, analytic = run_protocol(params, "analytic", tolerances=tol)
    suite.metrics["displacements"] = displacement_values(params)
    suite.metrics["cascade_param_error"] = casc.max_param_error
    suite.metrics["analytic_fidelity"] = analytic.fidelity
    suite.check("cascade_param_error", casc.max_param_error, 1e-12)
    suite.check("analytic_infidelity", abs(1 - analytic.fidelity), 1e-10)
    suite.flag("squeezed_input_square", "input squeezer is exp(-(s/2) a1_dag^2); the square is required")
    try:
        _, fock = run_protocol(params, "fock", cutoff=cfg.cutoff, tolerances=tol)
    except LeakageError as exc:
        suite.metrics["fock_error"] = str(exc)
        suite.check("fock_leakage", math.inf, tol.leakage)
        return
    suite.metrics["fock_fidelity"] = fock.fidelity
    suite.metrics["fock_boundary_mass"] = fock.leakage.boundary_mass
    suite.metrics["fock_norm_defect"] = fock.leakage.norm_defect
    suite.check("fock_fidelity", fock.fidelity, 1 - 1e-4, at_least=True)
    suite.check("fock_leakage", fock.leakage.boundary_mass, tol.leakage)


def run_wigner(cfg: RunConfig, suite: Suite):
    from tricoherent.gaussian import EQState
    from tricoherent.phasespace import (
        MARGINAL_PROJECTOR_FACTOR,
        MARGINAL_PROJECTOR_FACTOR_PRINTED,
        PhasePoint,
        marginal_mc,
        marginal_x,
        wigner_grid,
        wigner_value,
    )
    from tricoherent.states import CESParams, tripartite_ces

    w = _weights(cfg)
    c = w.completeness_constant
    if cfg.wigner_state == "vacuum":
        state = EQState.vacuum(3)
    elif cfg.s < 1.0:
        state = tripartite_ces(CESParams(w, _c(cfg.beta), _c(cfg.gamma), cfg.x, cfg.s))
    else:
        raise ValueError("a tripartite Wigner state needs s < 1 to be normalizable")
    g = cfg.grid
    grid = wigner_grid(state, g.x_range, g.p_range, g.resolution, w)
    origin = wigner_value(state, PhasePoint(0.0, 0.0), w)
    peak = grid.argmax()
    suite.metrics["origin_value"] = origin
    suite.metrics["argmax"] = [peak.x, peak.p]
    suite.metrics["grid_max"] = float(grid.values.max())
    suite.metrics["grid_integral"] = grid.integral()
    suite.metrics["integral_expected"] = 2 * c / 3
    if cfg.wigner_state == "vacuum":
        suite.check("vacuum_origin_value", abs(origin - c / math.pi), 1e-10)
    mc = marginal_mc(state, cfg.x, w, cfg.s, cfg.n_samples, cfg.seed)
    closed = marginal_x(state, cfg.x, w, cfg.s)
    suite.metrics["marginal_x_closed"] = closed
    suite.metrics["marginal_x_unregularized"] = marginal_x(state, cfg.x, w)
    suite.metrics["marginal_x_mc"] = mc.value
    suite.metrics["marginal_x_mc_stderr"] = mc.stderr
    suite.check("marginal_x_z", abs(mc.value - closed) / mc.stderr if mc.stderr > 0 else math.inf, 3.0)
    suite.flag(
        "marginal_factor_three_halves",
        "projector factor is sqrt(6/pi)/9; the printed sqrt(1/(6 pi)) is larger by 3/2",
        MARGINAL_PROJECTOR_FACTOR_PRINTED / MARGINAL_PROJECTOR_FACTOR - 1,
    )
    return grid


def run_squeeze(cfg: RunConfig, suite: Suite) -> None:
    from tricoherent.squeezing import (
        SqueezeParams,
        closed_form_variances,
        compare_forms,
        squeeze_ces,
        squeezed_vacuum_variances,
        squeezing_inequalities,
        su11_check,
        vacuum_convention_report,
    )
    from tricoherent.states import CESParams, ModeWeights

    w = _weights(cfg)
    tol = cfg.tolerances.build()
    zeta = cfg.zeta
    sp = SqueezeParams.from_zeta(zeta, w)
    var = squeezed_vacuum_variances(w, zeta, cutoff=cfg.cutoff, tolerances=tol)
    suite.metrics["var_x"] = var.var_x
    suite.metrics["var_p"] = var.var_p
    suite.metrics["variance_product"] = var.product
    suite.metrics["closed_var_x"] = var.closed_x
    suite.metrics["closed_var_p"] = var.closed_p
    suite.check("variance_error", var.max_error, 1e-6)
    bx, bp, bprod = closed_form_variances(ModeWeights(1, 1, 1), zeta)
    special = max(abs(bx - 1.5 * math.exp(2 * zeta)), abs(bp - 1.5 * math.exp(-2 * zeta)), abs(bprod - 2.25))
    suite.check("balanced_special_case", special, 1e-8)
    ineq = squeezing_inequalities(w, zeta)
    suite.metrics["inequalities"] = {
        "x_holds": ineq.x_holds, "p_holds": ineq.p_holds, "x_equal": ineq.x_equal,
        "p_equal": ineq.p_equal, "balanced_weights": ineq.balanced_weights,
    }
    suite.check("inequality_consistent", float(ineq.consistent), 1.0, at_least=True)
    forms = compare_forms(sp, cutoff=cfg.cutoff)
    suite.metrics["factored_vs_exponential"] = forms.max_abs_error
    suite.check("factored_vs_exponential", forms.max_abs_error, 1e-8)
    su = su11_check(w, 8)
    suite.metrics["su11"] = su
    suite.check("su11_interior", max(su["R_Rdag_interior"], su["su11_interior"]), 1e-12)
    _, _, ces_err = squeeze_ces(CESParams(w, _c(cfg.beta), _c(cfg.gamma), cfg.x, 1.0), sp.eta)
    suite.metrics["ces_relabel_error"] = ces_err
    suite.check("ces_relabel_error", ces_err, 1e-10)
    suite.metrics["vacuum_convention"] = vacuum_convention_report(w, zeta)
    suite.flag("tanh_of_zeta", "normalization uses tanh(zeta) and sech(zeta), not functions of lambda")


SUITES: dict[str, Callable[[RunConfig, Suite], Any]] = {
    "eigencheck": run_eigencheck,
    "overlap": run_overlap,
    "complete": run_complete,
    "generate": run_generate,
    "wigner": run_wigner,
    "squeeze": run_squeeze,
}


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    return RunConfig.model_validate(raw)


def build_report(command: str, cfg: RunConfig, suite: Suite, error: str | None = None) -> dict[str, Any]:
    report = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": command,
        "config": cfg.model_dump(mode="json"),
        "metrics": suite.metrics,
        "checks": suite.checks,
        "typo_flags": suite.typo_flags,
        "passed": suite.passed and error is None,
    }
    if error is not None:
        report["error"] = error
    return _jsonable(report)


def render_json(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _flatten(prefix: str, obj: Any, rows: list[tuple[str, str]]) -> None:
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, list):
        rows.append((prefix, json.dumps(obj)))
    else:
        rows.append((prefix, repr(obj) if isinstance(obj, float) else str(obj)))


def render_csv(report: dict[str, Any]) -> str:
    rows: list[tuple[str, str]] = []
    _flatten("", {k: v for k, v in report.items() if k != "config"}, rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tricoherent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUITES:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = RunConfig.model_validate({**cfg.model_dump(), "seed": args.seed})
    except (OSError, ValueError, ValidationError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    cfg = effective_config(cfg, args.command)
    out = args.out or cfg.output
    suite = Suite()
    start = time.perf_counter()
    code = EXIT_PASS
    error = None
    result = None
    try:
        result = SUITES[args.command](cfg, suite)
    except (ConvergenceError, DivergentIntegralError, BranchAmbiguityError, IllConditionedError) as exc:
        error, code = f"{type(exc).__name__}: {exc}", EXIT_CONVERGENCE
    except (TricoherentError, ValueError) as exc:
        error, code = f"{type(exc).__name__}: {exc}", EXIT_CONFIG
    report = build_report(args.command, cfg, suite, error)
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - start
    if code == EXIT_PASS and not report["passed"]:
        code = EXIT_TOLERANCE
    if args.format == "csv":
        text = result.to_csv() if result is not None and hasattr(result, "to_csv") else render_csv(report)
        if result is not None and hasattr(result, "to_csv"):
            sys.stderr.write(render_json(report))
    else:
        text = render_json(report)
    _emit(text, out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
