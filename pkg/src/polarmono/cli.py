"""Command-line front end.

Exit codes: 0 success, 2 unreadable input, 3 invalid matrix, 4 dimension,
theory or monotone mismatch, 5 output failure, 6 majorization violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from ._validation import DEFAULT_TOL, PolarizationError
from .channels import (
    MajorizationError,
    MixingChannel,
    apply_random_unitary,
    channel_from_dict,
    output_state,
    random_unitary_channel,
    synthesize_uhlmann,
)
from .io import ParseError, dumps, load_matrix, parse_spectrum, records_to_csv
from .monotones import (
    MONOTONES,
    DistanceKind,
    geometric_measure,
    get_monotone,
    isopolarization_grid,
    p2d_determinant,
)
from .orders import Theory, classify_regions, compare, is_unpolarized
from .polmat import PolarizationState, canonical_state, decompose_extremal, normalize

EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_MISMATCH = 4
EXIT_IO = 5
EXIT_MAJORIZATION = 6


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_state(source, tol, fmt=None):
    """State from a matrix JSON / samples CSV path or a ``"0.5,0.4,0.1"`` literal.

    Returns ``(state, coherency matrix or None)``.
    """
    if fmt == "spectrum" or (fmt is None and not Path(source).exists() and "," in source):
        try:
            return PolarizationState(parse_spectrum(source), tol=tol), None
        except ParseError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from None
        except PolarizationError as exc:
            raise CliError(EXIT_INVALID, f"invalid spectrum {source!r}: {exc}") from None
    try:
        matrix = load_matrix(source, fmt=fmt, tol=tol)
        return canonical_state(normalize(matrix, tol=tol), tol=tol), matrix
    except ParseError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    except PolarizationError as exc:
        raise CliError(EXIT_INVALID, f"{source}: {exc}") from None


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out}: {exc.strerror or exc}") from None


def _dataset_format(args):
    if args.format:
        return args.format
    if args.out and str(args.out).lower().endswith(".json"):
        return "json"
    return "csv"


def _theories_for(dim):
    return [Theory.TWO_D_UNITAL] if dim == 2 else [Theory.THREE_D_UNITAL, Theory.THREE_D_CONVEX]


def _monotone_values(state, theories):
    return {
        name: m(state)
        for name, m in MONOTONES.items()
        if m.theory in theories
    }


def build_report(state, descriptor, intensity=None):
    """The analysis report as a plain dictionary (unrounded)."""
    x = state.spectrum
    theories = _theories_for(state.dim)
    values = _monotone_values(state, theories)
    if state.dim == 2:
        residuals = {
            "p2d_trace": abs(values["p2d"] - geometric_measure(x, DistanceKind.TRACE, Theory.TWO_D_UNITAL)),
            "p2d_det": abs(values["p2d"] - p2d_determinant(x)),
        }
    else:
        unital, convex = Theory.THREE_D_UNITAL, Theory.THREE_D_CONVEX
        residuals = {
            "sskf_hs": abs(values["sskf"] - math.sqrt(1.5) * geometric_measure(x, "hs", unital)),
            "vn_re": abs(values["vn"] - geometric_measure(x, "re", unital) / math.log(3)),
            "lin_lin": abs(values["lin"] - geometric_measure(x, "lin", unital)),
            "edpw_trace": abs(values["edpw"] - geometric_measure(x, "trace", convex)),
            "re_re": abs(values["re"] - geometric_measure(x, "re", convex)),
        }
    report = {"input": descriptor, "dim": state.dim}
    if intensity is not None:
        report["intensity"] = intensity
    report.update(
        {
            "spectrum": list(x),
            "extremal": list(decompose_extremal(state).coefficients),
            "unpolarized": {t.value: is_unpolarized(state, t) for t in theories},
            "monotones": values,
            "geometric_residuals": residuals,
        }
    )
    return report


def cmd_analyze(args):
    state, matrix = _load_state(args.input, args.tol, fmt=args.input_format)
    intensity = None if matrix is None else matrix.intensity
    _emit(dumps(build_report(state, args.input, intensity)) + "\n", None)


def _check_theory_dim(theory, *states):
    for s in states:
        if s.dim != theory.dim:
            raise CliError(
                EXIT_MISMATCH, f"theory {theory.value} needs d={theory.dim}, got d={s.dim}"
            )


def cmd_compare(args):
    theory = Theory.parse(args.theory)
    a, _ = _load_state(args.a, args.tol)
    b, _ = _load_state(args.b, args.tol)
    _check_theory_dim(theory, a, b)
    verdict = compare(a, b, theory, args.tol)
    out = {"theory": theory.value, "a": list(a.spectrum), "b": list(b.spectrum)}
    out.update(verdict.to_dict())
    _emit(dumps(out) + "\n", args.out)


def cmd_regions(args):
    theory = Theory.parse(args.theory)
    ref, _ = _load_state(args.reference, args.tol)
    if theory.dim != 3:
        raise CliError(EXIT_MISMATCH, "regions need a 3D theory")
    _check_theory_dim(theory, ref)
    data = classify_regions(ref, theory, args.resolution, args.tol, domain=args.domain)
    records = data.to_records()
    if _dataset_format(args) == "json":
        doc = {
            "reference": list(ref.spectrum),
            "theory": theory.value,
            "resolution": args.resolution,
            "counts": data.counts(),
            "points": records,
        }
        text = dumps(doc) + "\n"
    else:
        text = records_to_csv(records, ["x", "y", "rho1", "rho2", "rho3", "label"])
    _emit(text, args.out)


def cmd_contours(args):
    m = get_monotone(args.monotone)
    if m.theory.dim != 3:
        raise CliError(EXIT_MISMATCH, f"monotone {m.name!r} is not a 3D monotone")
    data = isopolarization_grid(m, args.resolution, domain=args.domain)
    records = data.to_records()
    if _dataset_format(args) == "json":
        doc = {"monotone": m.name, "resolution": args.resolution, "points": records}
        text = dumps(doc) + "\n"
    else:
        text = records_to_csv(records, ["x", "y", "rho1", "rho2", "rho3", "value"])
    _emit(text, args.out)


def _spectrum_arg(source, tol):
    state, _ = _load_state(source, tol)
    return state


def cmd_channel_synth(args):
    source = _spectrum_arg(args.source, args.tol)
    target = _spectrum_arg(args.target, args.tol)
    if source.dim != target.dim:
        raise CliError(EXIT_MISMATCH, f"dimension mismatch: {source.dim} vs {target.dim}")
    try:
        channel = synthesize_uhlmann(source, target, args.tol)
    except MajorizationError as exc:
        raise CliError(EXIT_MAJORIZATION, str(exc)) from None
    _emit(dumps(channel.to_dict()) + "\n", args.out)


def cmd_channel_random(args):
    channel = random_unitary_channel(args.dim, args.terms, args.seed)
    _emit(dumps(channel.to_dict()) + "\n", args.out)


def cmd_channel_apply(args):
    try:
        doc = json.loads(Path(args.channel).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {args.channel}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{args.channel}: invalid JSON ({exc.msg})") from None
    try:
        channel = channel_from_dict(doc)
    except PolarizationError as exc:
        raise CliError(EXIT_INVALID, f"{args.channel}: {exc}") from None

    state, matrix = _load_state(args.state, args.tol)
    if isinstance(channel, MixingChannel):
        theories = [Theory.THREE_D_CONVEX]
        if state.dim != 3:
            raise CliError(EXIT_MISMATCH, "mixing channels act on 3D states")
        after = output_state(channel, state)
        out_matrix = None
    else:
        theories = [Theory.TWO_D_UNITAL if channel.dim == 2 else Theory.THREE_D_UNITAL]
        if state.dim != channel.dim:
            raise CliError(EXIT_MISMATCH, f"channel d={channel.dim}, state d={state.dim}")
        src = state.as_matrix() if matrix is None else normalize(matrix, tol=args.tol)
        out_matrix = apply_random_unitary(channel, src)
        after = canonical_state(out_matrix, args.tol)

    before_vals = _monotone_values(state, theories)
    after_vals = _monotone_values(after, theories)
    out = {
        "kind": "mixing" if isinstance(channel, MixingChannel) else "random_unitary",
        "input_spectrum": list(state.spectrum),
        "output_spectrum": list(after.spectrum),
    }
    if out_matrix is not None:
        out["output_matrix"] = {
            "dim": channel.dim,
            "entries": [[[z.real, z.imag] for z in row] for row in out_matrix],
        }
    out["monotones_before"] = before_vals
    out["monotones_after"] = after_vals
    out["deltas"] = {k: after_vals[k] - before_vals[k] for k in before_vals}
    _emit(dumps(out) + "\n", args.out)


def _tolerance(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tolerance {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError("tolerance must be nonnegative")
    return value


def _at_least(minimum):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {value}")
        return value

    return parse


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polarmono",
        description="Polarization monotones and order relations for 2D/3D random fields.",
    )
    parser.add_argument("--tol", type=_tolerance, default=DEFAULT_TOL, help="comparison tolerance")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="spectrum, decomposition and every applicable monotone")
    p.add_argument("input", help="matrix JSON, samples CSV, or a spectrum like 0.5,0.4,0.1")
    p.add_argument(
        "--format", dest="input_format", choices=["json", "csv", "spectrum"], default=None,
        help="input format (default: from the file extension)",
    )
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="order relation of state A to state B")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--theory", required=True, choices=[t.value for t in Theory])
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    def dataset_opts(p):
        p.add_argument("--resolution", type=_at_least(2), default=200)
        p.add_argument("--out")
        p.add_argument("--format", choices=["json", "csv"])

    p = sub.add_parser("regions", help="label the simplex lattice against a reference state")
    p.add_argument("reference")
    p.add_argument("--theory", required=True, choices=[t.value for t in Theory])
    p.add_argument("--domain", choices=["sorted", "full"], default="sorted")
    dataset_opts(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("contours", help="monotone values on the simplex lattice")
    p.add_argument("--monotone", required=True)
    p.add_argument("--domain", choices=["sorted", "full"], default="full")
    dataset_opts(p)
    p.set_defaults(func=cmd_contours)

    p = sub.add_parser("channel", help="synthesize, sample or apply nonpolarizing channels")
    csub = p.add_subparsers(dest="action", required=True)
    q = csub.add_parser("synth", help="random-unitary channel taking SOURCE to TARGET")
    q.add_argument("--source", required=True)
    q.add_argument("--target", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_channel_synth)
    q = csub.add_parser("random", help="Haar random-unitary channel")
    q.add_argument("--dim", type=int, choices=[2, 3], default=3)
    q.add_argument("--terms", type=_at_least(1), default=5)
    q.add_argument("--seed", type=_at_least(0), required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_channel_random)
    q = csub.add_parser("apply", help="apply a channel JSON to a state")
    q.add_argument("--channel", required=True)
    q.add_argument("--state", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_channel_apply)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"polarmono: error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"polarmono: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PolarizationError as exc:
        print(f"polarmono: error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    return 0


if __name__ == "__main__":
    sys.exit(main())
