"""Command-line front end.

Every command reads one JSON input document (``--input PATH`` or
``--builtin NAME``) holding either a matrix problem ``{"A": matrix, "f": vector}``
or a sequence-space problem ``{"model": {...}, "f": sequence}``. Diagonal and
parity models are truncated to a finite support for the matrix commands.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
"""

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, builtins, serialize
from .ergodic import (
    cesaro_report,
    default_time_grid,
    kernel_limit_check,
    report_to_csv,
    verify_rate_reducible,
)
from .errors import (
    EigensolverError,
    ErgolibError,
    IllConditionedDecompositionError,
    InputError,
    UnboundedTrajectoryError,
)
from .evolution import classify_boundedness, empirical_boundedness
from .operator_models import (
    SPECTRAL_BOUND,
    Diagonal,
    FiniteSupportVector,
    ParityProjection,
    RightShift,
    cesaro_limit_scalar,
    cesaro_mean_scalar,
    classify_scalar_bounded,
    decomposition_status,
    negative_part_decay,
    semigroup_generation_check,
    spectral_projection,
    weak_solution_general,
)
from .spectral_core import ToleranceConfig, reducible_invertibility, spectral_decompose, verify_resolution

SCHEMA_VERSION = "1.0"
COMMANDS = ("decompose", "classify", "cesaro", "rate", "model", "report")
EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2
DECAY_EPS = 1e-6

log = logging.getLogger("ergolib")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="ergolib", description="Cesaro limits and spectral structure of y' = Ay.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="input JSON document")
    src.add_argument("--builtin", metavar="NAME", help="named fixture: " + ", ".join(builtins.builtin_names()))
    p.add_argument("--t-max", type=float, default=1e4, help="end of the time grid (> 1, default 1e4)")
    p.add_argument("--grid-density", type=int, default=16, help="points per decade (>= 2, default 16)")
    p.add_argument("--tol-eig", type=float, help="eigenvalue clustering tolerance")
    p.add_argument("--tol-rank", type=float, help="numerical rank tolerance")
    p.add_argument("--tol-residual", type=float, help="decomposition residual tolerance")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.add_argument("--version", action="version", version=f"ergolib {__version__}")
    return p


def _configure_logging():
    level = os.environ.get("ERGOLIB_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise UsageError(f"ERGOLIB_LOG must be one of {', '.join(levels)}")
    if not log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("ergolib %(levelname)s: %(message)s"))
        log.addHandler(handler)
    log.setLevel(levels[level])


def _load_document(args):
    if args.builtin is not None:
        return builtins.load_builtin(args.builtin)
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {args.input}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


class Problem:
    """Decoded input: a matrix problem, a sequence model, or both (via truncation)."""

    def __init__(self, doc):
        if not isinstance(doc, dict):
            raise InputError("input document must be a JSON object")
        if "f" not in doc:
            raise InputError('input document needs "f"')
        self.model = None
        self.sequence = None
        self.support = None
        if "A" in doc:
            self.A = serialize.decode_matrix(doc["A"])
            self.f = serialize.decode_vector(doc["f"])
            if self.f.shape[0] != self.A.shape[0]:
                raise InputError(f"f has length {self.f.shape[0]} but A is {self.A.shape[0]}x{self.A.shape[0]}")
        elif "model" in doc:
            self.model = serialize.decode_model(doc["model"])
            self.sequence = serialize.decode_sequence(doc["f"])
            self.A, self.f = self._truncate()
        else:
            raise InputError('input document needs "A" or "model"')

    def _truncate(self):
        op, f = self.model, self.sequence
        if isinstance(op, RightShift):
            return None, None
        if isinstance(op, ParityProjection):
            top = max(f.support, default=1)
            self.support = list(range(1, top + top % 2 + 1))
            diag = op.as_diagonal(self.support)
        else:
            self.support = sorted(set(f.support) | set(op.atoms)) or [1]
            diag = op
        return diag.truncate(self.support), np.array([f[n] for n in self.support], dtype=complex)

    def require_matrix(self, command):
        if self.A is None:
            raise InputError(f"{command} needs a finite matrix; the {self.model.kind} model has no exact truncation")


def _tolerances(args):
    for name in ("tol_eig", "tol_rank", "tol_residual"):
        value = getattr(args, name)
        if value is not None and not (math.isfinite(value) and value > 0):
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    return ToleranceConfig(eig_cluster_tol=args.tol_eig, rank_tol=args.tol_rank, residual_tol=args.tol_residual)


def _witnesses(verdict):
    return [
        {
            "lam": w.lam,
            "regime": w.regime.value,
            "violated": w.violated,
            "violating_term": None if w.violating_term is None else list(w.violating_term),
            "margin": w.margin,
        }
        for w in verdict.witnesses
    ]


class Run:
    def __init__(self, args, problem):
        self.args = args
        self.problem = problem
        self.tol = _tolerances(args)
        self.warnings = []
        self.failed = False
        self._d = None

    @property
    def d(self):
        if self._d is None:
            self.problem.require_matrix(self.args.command)
            self._d = spectral_decompose(self.problem.A, self.tol)
            if self._d.ill_conditioned:
                self.warnings.append(f"similarity condition {self._d.similarity_condition:.3e} exceeds 1e12")
            log.info("decomposed %d-dimensional operator into %d eigenvalues", self._d.dim, len(self._d.items))
        return self._d

    def times(self):
        return default_time_grid(1.0, self.args.t_max, self.args.grid_density)

    def decompose(self):
        d = self.d
        res = verify_resolution(d)
        ri = reducible_invertibility(d)
        return {
            "dim": d.dim,
            "eigenvalues": [
                {
                    "lam": item.lam,
                    "alg_mult": item.alg_mult,
                    "geo_mult": item.geo_mult,
                    "index": item.index,
                    "P": serialize.encode_matrix(item.P),
                    "Q": serialize.encode_matrix(item.Q),
                }
                for item in d.items
            ],
            "similarity_condition": d.similarity_condition,
            "ill_conditioned": d.ill_conditioned,
            "residuals": res.as_dict(),
            "reducibly_invertible": ri.holds,
            "tolerances": {
                "eig_cluster_tol": d.tolerances.eig_cluster_tol,
                "rank_tol": d.tolerances.rank_tol,
                "imag_axis_tol": d.tolerances.imag_axis_tol,
                "residual_tol": d.tolerances.residual_tol,
            },
        }

    def classify(self):
        verdict = classify_boundedness(self.d, self.problem.f)
        emp = empirical_boundedness(self.d, self.problem.f, self.args.t_max)
        if emp.growing == verdict.bounded:
            self.warnings.append("sampled growth disagrees with the spectral verdict")
        return {
            "verdict": verdict.verdict,
            "witnesses": _witnesses(verdict),
            "empirical": {"sup_norm": emp.sup_norm, "growing": emp.growing, "overflow": emp.overflow},
        }

    def _require_bounded(self):
        verdict = classify_boundedness(self.d, self.problem.f)
        if not verdict.bounded:
            raise UnboundedTrajectoryError("the trajectory is unbounded", verdict)

    def cesaro(self):
        self._require_bounded()
        rep = cesaro_report(self.d, self.problem.f, self.args.t_max, self.args.grid_density)
        self.cesaro_payload = rep
        self.warnings.extend(rep.warnings)
        if not rep.passed:
            self.failed = True
        rate = rep.rate_bound
        return {
            "analytic_limit": rep.analytic_limit,
            "strong": rep.strong,
            "passed": rep.passed,
            "grid": [{"t": t, "mean": m, "error_norm": e} for t, m, e in rep.grid],
            "rate_bound": None if rate is None else _rate_payload(rate),
            "kernel_residuals": [{"t": t, "norm_A_mean": r, "bound": b} for t, r, b in rep.kernel_residuals],
        }

    def rate(self):
        self._require_bounded()
        ri = reducible_invertibility(self.d)
        if not ri.holds:
            self.failed = True
            return {"reducibly_invertible": False, "reason": "0 is an eigenvalue of index > 1"}
        rb = verify_rate_reducible(self.d, self.problem.f, self.times())
        exponents = range(0, int(math.floor(math.log10(self.args.t_max) + 1e-12)) + 1)
        kl = kernel_limit_check(self.d, self.problem.f, [10.0**n for n in exponents])
        if not (rb.passed and kl.passed):
            self.failed = True
        self.warnings.append("sup ||y|| is estimated on the sampling grid")
        return {
            "reducibly_invertible": True,
            "invertible": not bool(np.any(ri.P)),
            "rate_bound": _rate_payload(rb),
            "kernel_limit": {
                "points": [{"t": t, "norm_A_mean": v} for t, v in kl.points],
                "sup_norm": kl.sup_norm,
                "bound_satisfied": kl.bound_satisfied,
                "accumulation": [{"t": t, "mean": m, "norm_A_mean": r} for t, m, r in kl.accumulation],
                "kernel_satisfied": kl.kernel_satisfied,
            },
            "passed": rb.passed and kl.passed,
        }

    def model(self):
        op, f = self.problem.model, self.problem.sequence
        if op is None:
            raise InputError('model needs a {"model": ..., "f": sequence} document')
        status = decomposition_status(op)
        Af = op.apply(f)
        out = {
            "kind": op.kind,
            "f": serialize.encode_sequence(f),
            "Af": serialize.encode_sequence(Af),
            "invertible_on_range": status.invertible_on_range,
            "reducibly_invertible": status.reducibly_invertible,
            "kernel": status.kernel,
            "kernel_basis": list(status.kernel_basis),
            "kernel_includes_default": status.kernel_includes_default,
            "range": status.range_description,
            "witness": status.witness,
        }
        checks = {}
        if isinstance(op, RightShift):
            checks["left_inverse_recovers_f"] = op.left_inverse(Af) == f
            checks["e1_in_range"] = any(op.apply(g)[1] != 0 for g in (f, FiniteSupportVector.basis(1)))
            checks["first_coordinate_of_Af"] = Af[1]
            ok = checks["left_inverse_recovers_f"] and not checks["e1_in_range"]
        elif isinstance(op, ParityProjection):
            kernel_part = op.kernel_part(f)
            checks["split_recovers_f"] = Af + kernel_part == f
            checks["kernel_part_annihilated"] = len(op.apply(kernel_part)) == 0
            checks["range_part_fixed"] = op.apply(Af) == Af
            ok = all(checks.values())
        else:
            ok = self._diagonal(op, f, out)
        out["checks"] = checks
        if not ok:
            self.failed = True
        return out

    def _diagonal(self, op, f, out):
        gen = semigroup_generation_check(op)
        out["generates"] = gen.generates
        out["omega"] = gen.omega
        out["bounded_semigroup"] = gen.bounded_semigroup
        out["spectral_bound_M"] = SPECTRAL_BOUND
        zero = spectral_projection(op, lambda lam: lam == 0)
        out["E0_f"] = serialize.encode_sequence(zero.apply(f))
        scalar = classify_scalar_bounded(op, f)
        out["bounded"] = scalar.bounded
        out["violating_indices"] = list(scalar.violating_indices)
        times = np.concatenate([[0.0], self.times()])
        decay = negative_part_decay(op, f, times, eps=DECAY_EPS)
        out["negative_part_decay"] = {
            "points": [{"t": t, "norm": v} for t, v in decay.points],
            "monotone": decay.monotone,
            "eps": decay.eps,
            "slowest_rate": decay.slowest_rate,
            "bound_time": decay.bound_time,
            "crossing_time": decay.crossing_time,
            "final_below_eps": decay.final_below_eps,
        }
        ok = decay.monotone
        if decay.crossing_time is not None and decay.crossing_time <= self.args.t_max:
            ok = ok and decay.final_below_eps
        if scalar.bounded:
            lim = cesaro_limit_scalar(op, f)
            t = self.args.t_max
            mean = cesaro_mean_scalar(op, f, t)
            y = weak_solution_general(op, f, t)
            out["cesaro_limit"] = serialize.encode_sequence(lim.limit)
            out["strong"] = lim.strong
            out["mean_error_at_t_max"] = (mean - lim.limit).norm()
            out["solution_error_at_t_max"] = (y - lim.limit).norm()
            ok = ok and lim.limit == zero.apply(f)
        else:
            self.warnings.append(f"f has components on Re lam > 0 at indices {list(scalar.violating_indices)}")
        return ok

    def report(self):
        out = {}
        if self.problem.model is not None:
            out["model"] = self.model()
        if self.problem.A is None:
            return out
        out["decompose"] = self.decompose()
        out["classify"] = self.classify()
        if out["classify"]["verdict"] == "Bounded":
            out["cesaro"] = self.cesaro()
            out["rate"] = self.rate()
        else:
            self.warnings.append("unbounded trajectory: Cesaro and rate sections skipped")
        return out


def _rate_payload(rb):
    return {
        "constant": rb.constant,
        "satisfied": rb.satisfied,
        "max_violation": rb.max_violation,
        "worst_t": rb.worst_t,
        "sup_norm": rb.sup_norm,
        "inverse_norm": rb.inverse_norm,
        "identity_residual": rb.identity_residual,
        "identity_satisfied": rb.identity_satisfied,
        "passed": rb.passed,
    }


def _render_text(value, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key in sorted(value):
            v = value[key]
            if isinstance(v, (dict, list)) and not _is_scalar_list(v):
                lines.append(f"{pad}{key}:")
                lines.extend(_render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{key}: {json.dumps(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)) and not _is_scalar_list(v):
                lines.append(f"{pad}-")
                lines.extend(_render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v)}")
    return lines


def _is_scalar_list(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _emit(text, args):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    """Run one command; returns ``(exit_code, report_dict_or_None)``."""
    try:
        args = build_parser().parse_args(argv)
        _configure_logging()
        if not (math.isfinite(args.t_max) and args.t_max > 1):
            raise UsageError("--t-max must be a finite number > 1")
        if args.grid_density < 2:
            raise UsageError("--grid-density must be at least 2")
        if args.format == "csv" and args.command != "cesaro":
            raise UsageError("--format csv is only available for the cesaro grid")
        doc = _load_document(args)
        problem = Problem(doc)
    except (UsageError, InputError) as exc:
        print(f"ergolib: error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "inputs_digest": serialize.digest(doc),
        "config": {
            "t_max": args.t_max,
            "grid_density": args.grid_density,
            "tol_eig": args.tol_eig,
            "tol_rank": args.tol_rank,
            "tol_residual": args.tol_residual,
        },
    }
    runner = Run(args, problem)
    code = EXIT_OK
    try:
        report["results"] = getattr(runner, args.command)()
        if runner.failed:
            code = EXIT_VERIFY
    except InputError as exc:
        print(f"ergolib: error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    except UnboundedTrajectoryError as exc:
        report["results"] = {"verdict": "Unbounded", "error": str(exc), "witnesses": _witnesses(exc.witness)}
        code = EXIT_VERIFY
    except (IllConditionedDecompositionError, EigensolverError) as exc:
        report["results"] = {"error": str(exc)}
        code = EXIT_VERIFY
    except ErgolibError as exc:
        report["results"] = {"error": f"{type(exc).__name__}: {exc}"}
        code = EXIT_VERIFY
    report["warnings"] = runner.warnings
    report["status"] = "ok" if code == EXIT_OK else "verification_failed"
    report = serialize.to_jsonable(report)

    if args.format == "csv":
        if code != EXIT_OK and not hasattr(runner, "cesaro_payload"):
            text = serialize.canonical_json(report, indent=2) + "\n"
        else:
            text = report_to_csv(runner.cesaro_payload)
    elif args.format == "text":
        text = "\n".join(_render_text(report)) + "\n"
    else:
        text = serialize.canonical_json(report, indent=2) + "\n"
    try:
        _emit(text, args)
    except OSError as exc:
        print(f"ergolib: error: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT, None
    log.info("%s finished with exit code %d", args.command, code)
    return code, report


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
