"""Command-line front end.

Exit codes
----------
analyze
    0 entropy structure found, 2 normal ellipticity fails at some sample,
    3 neither established, 1 unreadable or invalid input.
factorize
    0 success, 2 the matrix does not admit the requested factorization, 1 bad input.
simulate
    0 completed with nonincreasing entropy, 4 entropy increased at some step,
    5 stalled or diverged, 1 bad input or no entropy available.

Diagnostics go to stderr; on success stdout carries only the output path
(factorize without ``--out`` prints its JSON instead).
"""

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import models as _models
from .ellipticity import (
    fluid_2x2_iff,
    generalized_skt_condition,
    is_normally_elliptic,
    routh_hurwitz_3,
    skt3_admissible_triples,
    skt_ne_certificate,
    volume_filling_certificate,
)
from .entropy import (
    ENTROPY_KINDS,
    Selection,
    boltzmann_entropy,
    detailed_balance,
    select_entropy,
    verify_entropy_structure,
)
from .errors import (
    ContractViolation,
    CrossDiffError,
    EigenvalueError,
    NonPositiveSpectrum,
    NotDiagonalizable,
    NotNormallyElliptic,
    SimulationError,
    SpecError,
)
from .factorize import FACTORIZERS, POSITIVE_DEFINITE
from .linalg import is_positive_definite
from .simulate import SimConfig, run, write_csv
from .verdict import Verdict

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ABSENT = 2
EXIT_INDETERMINATE = 3
EXIT_NOT_MONOTONE = 4
EXIT_SIM_FAILED = 5


def _err(msg):
    print(f"crossdiff: {msg}", file=sys.stderr)


def _dump(doc, path):
    text = json.dumps(doc, indent=2, allow_nan=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _default_out(spec_path, suffix):
    return str(Path(Path(spec_path).stem + suffix))


def _parse_pi(text):
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise SpecError(f"--pi expects comma-separated numbers, got {text!r}") from exc


def _samples(model, args):
    margin = args.margin if args.margin is not None else model.margin
    return _models.sample_domain(model, args.samples, margin=margin, seed=args.seed)


def _select(model, samples, args):
    if args.pi is None:
        return select_entropy(model, samples, kind=args.entropy, tol=args.tol)
    pi = _parse_pi(args.pi)
    if len(pi) != model.n:
        raise SpecError(f"--pi needs {model.n} weights")
    h = boltzmann_entropy(pi)
    report = verify_entropy_structure(model, h, samples, args.tol)
    info = {"kind": "boltzmann", "notes": ["Boltzmann weights supplied on the command line"]}
    attempt = {"kind": "boltzmann", "constructed": True, "entropy_structure": report.entropy_structure.value}
    return Selection(h, report, info, [attempt])


def _certificates(model, samples):
    """Family-specific sufficient conditions, reported alongside the spectral test."""
    out = {}
    P = model.params
    if model.family == "SktLinear":
        out["skt_diagonal_positive"] = skt_ne_certificate(P["a0"], P["a"])
        if model.n == 3:
            out["skt3_admissible_triples"] = [list(t) for t in skt3_admissible_triples(P["a0"], P["a"])]
    if model.family in ("SktLinear", "SktPower", "FluidPoly"):
        out["generalized_skt_condition"] = generalized_skt_condition(model, samples)
    if model.family == "FluidLinear" and model.n == 2 and np.all(P["a"] >= 0):
        ne, pd = fluid_2x2_iff(P["a"])
        out["fluid_2x2"] = {"ne": ne, "pd": pd}
    if model.family == "VolumeFillingSeparable":
        ok, records = volume_filling_certificate(model, samples)
        out["volume_filling_factorization"] = {
            "certified": ok,
            "max_minor_rel_err": max(r["minor_rel_err"] for r in records),
            "max_factor_residual": max(r["factor_residual"] for r in records),
        }
    if model.n == 3:
        A = _models.diffusion_matrix_batch(model, samples)
        out["routh_hurwitz_all_samples"] = all(routh_hurwitz_3(Ak).verdict for Ak in A)
    return out


def cmd_analyze(args):
    model, _ = _models.load_spec(args.spec)
    samples = _samples(model, args)
    A = _models.diffusion_matrix_batch(model, samples)
    ne = [is_normally_elliptic(Ak, args.tol) for Ak in A]
    ne_verdict = Verdict.conjunction(v for v, _ in ne)

    db = None
    if model.family in _models.PRESSURE_FAMILIES:
        db = detailed_balance(model, samples)
    sel = _select(model, samples, args)

    if any(v is Verdict.FAIL for v, _ in ne):
        code, outcome = EXIT_ABSENT, "no entropy structure: normal ellipticity fails"
    elif sel.found:
        code, outcome = EXIT_OK, "entropy structure found"
    else:
        code, outcome = EXIT_INDETERMINATE, "undecided"

    notes = _models.model_notes(model) + sel.info.get("notes", [])
    flags = {
        "ne": ne_verdict.value,
        "detailed_balance": None if db is None else ("feasible" if db.feasible else "infeasible"),
    }
    if sel.report is not None:
        flags.update(sel.report.flags)
    doc = {
        "tool": {"name": "crossdiff", "version": __version__},
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": args.seed,
        "samples": len(samples),
        "margin": args.margin if args.margin is not None else model.margin,
        "tol": args.tol,
        "model": model.to_dict(),
        "model_id": model.model_id,
        "outcome": outcome,
        "exit_code": code,
        "ellipticity": {
            "verdict": ne_verdict.value,
            "min_margin": float(min(m for _, m in ne)),
            "certificates": _certificates(model, samples),
        },
        "detailed_balance": None if db is None else db.to_dict(),
        "entropy": {
            "found": sel.found,
            "selected": sel.info.get("kind") if sel.entropy is not None else None,
            "provenance": None if sel.entropy is None else sel.entropy.describe(),
            "attempts": sel.attempts,
        },
        "structure": None if sel.report is None else sel.report.to_dict(),
        "flags": flags,
        "notes": notes,
    }
    out = args.out or _default_out(args.spec, ".report.json")
    _dump(doc, out)
    if code != EXIT_OK:
        _err(f"{model.model_id}: {outcome}")
    print(out)
    return code


def _load_matrix(path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if isinstance(doc, dict):
        if "matrix" not in doc:
            raise SpecError("expected a nested array or an object with key 'matrix'", field="matrix")
        doc = doc["matrix"]
    try:
        A = np.array(doc, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError("matrix entries must be numbers", field="matrix") from exc
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise SpecError(f"matrix must be square, got shape {A.shape}", field="matrix")
    if not np.all(np.isfinite(A)):
        raise SpecError("matrix entries must be finite", field="matrix")
    return A


def cmd_factorize(args):
    A = _load_matrix(args.matrix)
    try:
        f = FACTORIZERS[args.kind](A)
    except (NotNormallyElliptic, NotDiagonalizable, NonPositiveSpectrum, EigenvalueError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_ABSENT
    doc = {"tool": {"name": "crossdiff", "version": __version__}, "matrix": A.tolist()}
    doc.update(f.to_dict())
    _, m1 = is_positive_definite(f.a1, tol=0.0)
    checks = {"a1_min_eigenvalue": m1}
    if f.kind == POSITIVE_DEFINITE:
        checks["a2_sym_part_min_eigenvalue"] = is_positive_definite(f.a2, tol=0.0)[1]
        checks["a2_plus_transpose_minus_identity"] = float(np.max(np.abs(f.a2 + f.a2.T - np.eye(len(A)))))
    else:
        checks["a2_eigenvalues"] = np.linalg.eigvalsh(f.a2).tolist()
    doc["checks"] = checks
    if args.out:
        _dump(doc, args.out)
        print(args.out)
    else:
        print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_simulate(args):
    model, doc = _models.load_spec(args.spec)
    samples = _samples(model, args)
    sel = _select(model, samples, args)
    if sel.entropy is None:
        reasons = "; ".join(a.get("reason", "") for a in sel.attempts)
        _err(f"no entropy could be constructed for {model.model_id}: {reasons}")
        return EXIT_INPUT
    if not sel.found:
        _err(f"warning: the {sel.info.get('kind')} entropy did not pass the structure check")
    sim = doc.get("simulation", {})
    try:
        config = SimConfig(
            model, sel.entropy, cells=args.grid, t_final=args.tfinal, safety=args.safety,
            stride=args.stride, length=sim.get("length", 1.0), mode=sim.get("mode", 1),
            base=sim.get("base"), amplitude=sim.get("amplitude"),
        )
        config.validate()
        config.initial_state()
    except ContractViolation as exc:
        raise SpecError(str(exc), field="simulation") from exc
    out = args.out or _default_out(args.spec, ".csv")
    try:
        result = run(config)
    except SimulationError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        if exc.result is not None:
            write_csv(exc.result, out, args.stride)
        return EXIT_SIM_FAILED
    write_csv(result, out, args.stride)
    bad = result.monotonicity_violations()
    if len(bad):
        k = int(bad[0])
        H = result.entropy
        _err(f"entropy increased at step {k} (t={result.times[k]:.6g}): "
             f"H={H[k]:.17g} -> {H[k + 1]:.17g}; {len(bad)} violating steps")
        return EXIT_NOT_MONOTONE
    print(out)
    return EXIT_OK


def _add_sampling(p):
    p.add_argument("--samples", type=int, default=200, help="number of domain samples (default 200)")
    p.add_argument("--margin", type=float, default=None, help="distance of samples from the boundary")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--tol", type=float, default=None, help="absolute tolerance band for all margins")
    p.add_argument("--entropy", choices=ENTROPY_KINDS, default=None, help="force one entropy construction")
    p.add_argument("--pi", default=None, help="Boltzmann weights, comma separated (skips detailed balance)")


def build_parser():
    parser = argparse.ArgumentParser(prog="crossdiff", description="Entropy structure of cross-diffusion systems.")
    parser.add_argument("--version", action="version", version=f"crossdiff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide entropy structure and normal ellipticity")
    p.add_argument("spec")
    _add_sampling(p)
    p.add_argument("--out", default=None, help="report path (default <spec>.report.json)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("factorize", help="factor a matrix as A1 A2")
    p.add_argument("matrix")
    p.add_argument("--kind", choices=sorted(FACTORIZERS), default="pd")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("simulate", help="1D run tracking entropy and dissipation")
    p.add_argument("spec")
    _add_sampling(p)
    p.add_argument("--grid", type=int, default=64, help="number of cells (default 64)")
    p.add_argument("--tfinal", type=float, default=0.01)
    p.add_argument("--safety", type=float, default=0.4, help="CFL safety factor in (0, 1)")
    p.add_argument("--stride", type=int, default=1, help="CSV row stride")
    p.add_argument("--out", default=None, help="CSV path (default <spec>.csv)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors, which is taken by the verdict codes
        return EXIT_OK if not exc.code else EXIT_INPUT
    try:
        return args.func(args)
    except SpecError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except CrossDiffError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
