"""Command-line interface.

Machine-readable output (JSON, CSV) goes to a file or standard output;
human-readable summaries go to standard error.

Exit codes: 0 success, 2 validation error, 3 numerical-consistency error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys

from . import io
from .coefficients import coeffs_from_dense
from .concurrence import kme_concurrence_pure
from .exceptions import NumericalError, ValidationError
from .measurement import (
    RNG_ALGORITHM,
    design_settings,
    measure_all,
    reconstruct_coefficients,
)
from .separability import (
    evaluate_criterion,
    maximize_over_bases,
    report_in_basis,
    w_noise_abc,
    w_noise_keff,
    report_from_abc,
)
from .states import (
    LocalBasisChange,
    MAX_DENSE_QUBITS,
    as_density,
    check_n_qubits,
    make_bell_phase,
    make_ghz,
    make_product,
    make_w,
    mix_white_noise,
    noisy_w,
    random_mixed,
    random_pure,
)
from .symmetry import pi_distance, pi_project

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
SCAN_TOL = 1e-10
GRID_TOL = 1e-12
SIGMA_LEVEL = 5.0
# slack for zero-variance estimators (e.g. eigenstates of the measured observable)
ROUNDOFF = 1e-12


def _log(msg):
    print(msg, file=sys.stderr)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_grid(spec):
    """``start:end:step`` (endpoints inclusive within 1e-12) or a comma list."""
    if ":" in spec:
        try:
            start, end, step = (float(v) for v in spec.split(":"))
        except ValueError as exc:
            raise ValidationError(f"bad grid {spec!r}; expected start:end:step") from exc
        if step <= 0 or end < start:
            raise ValidationError(f"bad grid {spec!r}")
        count = int(math.floor((end - start) / step + GRID_TOL)) + 1
        values = [start + i * step for i in range(count)]
        if abs(values[-1] - end) <= GRID_TOL:
            values[-1] = end
    else:
        try:
            values = [float(v) for v in spec.split(",") if v.strip()]
        except ValueError as exc:
            raise ValidationError(f"bad value list {spec!r}") from exc
    if not values:
        raise ValidationError("empty grid")
    return values


def parse_int_list(spec):
    try:
        return [int(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad integer list {spec!r}") from exc


# ------------------------------------------------------------- commands


def cmd_gen(args):
    n = check_n_qubits(args.n_qubits)
    kind = args.kind
    if kind == "ghz":
        state = make_ghz(n)
    elif kind == "w":
        state = make_w(n)
    elif kind == "product":
        state = make_product(n)
    elif kind == "random-pure":
        state = random_pure(n, seed=args.seed)
    elif kind == "random-mixed":
        state = random_mixed(n, seed=args.seed)
    elif kind == "noisy-w":
        state = noisy_w(n, args.p)
    elif kind == "bell-phase":
        if n != 2:
            raise ValidationError("bell-phase is a 2-qubit state")
        state = make_bell_phase()
    else:  # pragma: no cover - argparse restricts choices
        raise ValidationError(f"unknown kind {kind}")
    _emit(io.dumps(io.state_to_json(state)), args.out)
    _log(f"generated {kind} state on {n} qubits")


def cmd_project(args):
    state = io.load_state(args.state)
    projected = pi_project(as_density(state))
    _emit(io.dumps(io.state_to_json(projected)), args.out)
    _log(f"distance to PI part (Frobenius): {pi_distance(state):.6g}")


def cmd_coeffs(args):
    state = io.load_state(args.state)
    _emit(io.dumps(coeffs_from_dense(state).to_json()), args.out)


def _certify_report(state, via):
    if via == "dense":
        return evaluate_criterion(state)
    if via == "coeffs":
        return evaluate_criterion(coeffs_from_dense(state))
    n = as_density(state).n_qubits
    data = measure_all(state, design_settings(n))
    return reconstruct_coefficients(data, n).criterion_report()


def cmd_certify(args):
    state = io.load_state(args.state)
    report = _certify_report(state, args.via)
    if args.basis_search is None:
        doc = report.to_json()
    else:
        restarts, seed = args.basis_search
        n = as_density(state).n_qubits
        identity = report_in_basis(state, LocalBasisChange.identity(n))
        best, basis = maximize_over_bases(state, restarts=restarts, seed=seed)
        doc = {
            "report": report.to_json(),
            "identity_basis": identity.to_json(),
            "best_basis": best.to_json(),
            "basis": [io._complex_pairs(u) for u in basis.unitaries],
            "restarts": restarts,
            "seed": seed,
        }
        _log(f"PI part, computational basis: k_eff {identity.k_eff}")
        _log(f"PI part, best basis found:    k_eff {best.k_eff}")
    _emit(io.dumps(doc), args.out)
    _log(f"k_eff: {report.k_eff}; detected levels: {report.detected_levels or 'none'}")


SCAN_COLUMNS = ["N", "p", "A", "B", "C", "k_eff", "detected_k2"]


def scan_rows(n_list, p_grid, closed_form_only=False):
    """Rows of the noisy-W scan; dense rows are cross-checked against the closed form."""
    rows = []
    for n in n_list:
        if n < 2:
            raise ValidationError("scan needs N >= 2")
        dense = not closed_form_only and n <= MAX_DENSE_QUBITS
        w = make_w(n).to_density() if dense else None
        for p in p_grid:
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"p={p} outside [0, 1]")
            closed = report_from_abc(n, *w_noise_abc(n, p))
            if dense:
                report = evaluate_criterion(mix_white_noise(w, p))
                for got, want in zip(
                    (report.A, report.B, report.C, report.k_eff),
                    (closed.A, closed.B, closed.C, w_noise_keff(n, p)),
                ):
                    if abs(got - want) > SCAN_TOL:
                        raise NumericalError(
                            f"dense and closed-form values disagree at N={n}, p={p}: {got} vs {want}"
                        )
            else:
                report = closed
            rows.append(
                {
                    "N": n,
                    "p": p,
                    "A": report.A,
                    "B": report.B,
                    "C": report.C,
                    "k_eff": report.k_eff,
                    "detected_k2": report.genuinely_multipartite,
                }
            )
    return rows


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def cmd_scan_noise(args):
    rows = scan_rows(parse_int_list(args.n_list), parse_grid(args.p_grid), args.closed_form_only)
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in SCAN_COLUMNS])
    _emit(buf.getvalue(), args.out)
    _log(f"wrote {len(rows)} rows")


def cmd_reconstruct(args):
    state = io.load_state(args.state)
    rho = as_density(state)
    n = rho.n_qubits
    settings = design_settings(n, preset=args.preset)
    data = measure_all(rho, settings, shots=args.shots, seed=args.seed)
    result = reconstruct_coefficients(data, n)
    truth = coeffs_from_dense(rho)
    doc = result.to_json()
    doc["settings"] = [
        {"direction": list(s.setting.direction), "family": s.setting.family.value} for s in data
    ]
    doc["shots"] = "exact" if args.shots is None else args.shots
    doc["seed"] = args.seed
    doc["rng"] = RNG_ALGORITHM if args.shots is not None else None
    errors = {f"{k}{l}{m}{nn}": result.coefficients[(k, l, m, nn)] - truth[(k, l, m, nn)]
              for (k, l, m, nn) in result.coefficients}
    check = {"max_abs_error": max(abs(v) for v in errors.values()), "errors": errors}
    if result.standard_errors is not None:
        worst = max(
            abs(errors[key]) / (SIGMA_LEVEL * se + ROUNDOFF)
            for key, se in (
                (f"{k}{l}{m}{nn}", result.standard_errors[(k, l, m, nn)])
                for (k, l, m, nn) in result.coefficients
            )
        )
        check["worst_error_over_5_sigma"] = worst
        check["all_within_5_sigma"] = worst <= 1.0
    doc["check"] = check
    doc["report"] = result.criterion_report().to_json()
    _emit(io.dumps(doc), args.out)
    for s in settings:
        _log(f"setting {s.family.value:9s} {s.label()}")
    _log(f"max |coefficient error| = {check['max_abs_error']:.3g}")


def cmd_concurrence(args):
    state = io.load_state(args.state)
    value, partition = kme_concurrence_pure(state, args.k)
    doc = {"k": args.k, "value": value, "partition": partition.to_json()}
    _emit(io.dumps(doc), args.out)
    _log(f"C_{args.k}-ME = {value:.6f} at {partition}")


# ---------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pisep",
        description="PI parts of N-qubit states and k-separability certification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a state file")
    p.add_argument(
        "kind",
        choices=["ghz", "w", "product", "random-pure", "random-mixed", "noisy-w", "bell-phase"],
    )
    p.add_argument("n_qubits", type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--p", type=float, default=0.0, help="noise weight for noisy-w")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("project", help="write the PI part of a state")
    p.add_argument("state")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("coeffs", help="write the PI coefficient table of a state")
    p.add_argument("state")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("certify", help="evaluate the k-separability criteria")
    p.add_argument("state")
    p.add_argument("--via", choices=["dense", "coeffs", "reconstruct"], default="dense")
    p.add_argument(
        "--basis-search", nargs=2, type=int, metavar=("RESTARTS", "SEED"), default=None
    )
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scan-noise", help="k_eff of noisy W states over a grid")
    p.add_argument("n_list", help="comma-separated qubit counts, e.g. 3,8,11,16")
    p.add_argument("p_grid", help="start:end:step or comma list")
    p.add_argument("out", nargs="?", help="CSV path (default: standard output)")
    p.add_argument("--closed-form-only", action="store_true")
    p.set_defaults(func=cmd_scan_noise)

    p = sub.add_parser("reconstruct", help="simulate the 2N+1-setting experiment")
    p.add_argument("state")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--preset", choices=["default", "three-qubit"], default="default")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("concurrence", help="pure-state k-ME concurrence")
    p.add_argument("state")
    p.add_argument("k", type=int)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_concurrence)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        _log(f"error: {exc}")
        return EXIT_VALIDATION
    except NumericalError as exc:
        _log(f"numerical error: {exc}")
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError) as exc:
        _log(f"I/O error: {exc}")
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
