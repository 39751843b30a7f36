"""``lvsemme`` command line.

Exit status: 0 on success, 2 when a check or comparison fails, 1 on error.
The default tolerance can be overridden with the ``LVSEMME_TOL`` environment
variable; the tolerance in effect and its source go to stderr as a
provenance line.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import io
from .assumptions import check_conventional_faithfulness, check_lvsemme_faithfulness
from .equivalence import enumerate_equivalents, models_equal_mixing, same_unlabeled_structure
from .grouping import compute_aog, compute_dog
from .mixing import DEFAULT_TOL, build_w, build_w_star, strip_measurement_columns
from .model import is_minimal, validate_canonical
from .recovery import RecoveryError, dog_filter, enumerate_class, recover_aog
from .simgen import ENFORCE_FLAGS, GenerationError, GeneratorConfig, NoiseSpec, export_dot, generate_model, \
    perturb_matrix, sample_data

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
TOL_ENV = "LVSEMME_TOL"


class _CheckFailed(Exception):
    pass


def _resolve_tol(args) -> tuple[float, str]:
    if getattr(args, "tol", None) is not None:
        return args.tol, "flag"
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            return float(env), f"env {TOL_ENV}"
        except ValueError:
            raise ValueError(f"{TOL_ENV}={env!r} is not a number") from None
    return DEFAULT_TOL, "default"


def _emit(args, doc, text: str) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        print(text)


# -- commands ------------------------------------------------------------


def cmd_generate(args) -> None:
    enforce = frozenset(f for f in args.enforce.split(",") if f) if args.enforce != "none" else frozenset()
    cfg = GeneratorConfig(p_Y=args.p_y, p_ZC=args.p_zc, p_ml=args.p_ml, p_H=args.p_h, edge_density=args.density,
                          coefficient_range=(args.low, args.high), seed=args.seed, enforce=enforce,
                          max_retries=args.max_retries, tol=args.tol)
    model = generate_model(cfg)
    text = io.model_to_json(model)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_mix(args) -> None:
    model = io.read_model(args.model)
    W = build_w(model) if args.full else build_w_star(model)
    side = io.write_matrix(W, args.out, args.observability)
    print(f"wrote {W.shape[0]}x{W.shape[1]} matrix to {args.out} (observability: {side})")


def cmd_strip(args) -> None:
    W = io.read_matrix(args.w, args.observability, args.tol)
    Ws = strip_measurement_columns(W, tol=args.tol)
    side = io.write_matrix(Ws, args.out)
    for note in Ws.notes:
        print(f"note: {note}", file=sys.stderr)
    print(f"wrote {Ws.shape[0]}x{Ws.shape[1]} matrix to {args.out} (observability: {side})")


def cmd_recover(args) -> None:
    W = io.read_matrix(args.wstar, args.observability, args.tol)
    g = recover_aog(W, tol=args.tol)
    doc: dict = {"grouping": io.grouping_to_dict(g)}
    lines = [f"AOG ({g.iterations} iterations): {g}"]
    models = []
    if args.emit in ("class", "dog") or args.dot:
        members = enumerate_class(W, g, tol=args.tol)
        models = dog_filter(members, args.tol) if args.emit == "dog" else list(members)
        if args.emit in ("class", "dog"):
            doc["models"] = [io.recovered_to_dict(m) for m in models]
            doc["rejected"] = [{"center_assignment": [list(p) for p in a], "reason": r} for a, r in members.rejected]
            lines.append(f"{len(models)} model(s) in the {'DOG' if args.emit == 'dog' else 'AOG'} class:")
            lines += [f"  {m!r}" for m in models]
    if args.out:
        io.write_json(doc, args.out)
    if args.dot:
        d = Path(args.dot)
        d.mkdir(parents=True, exist_ok=True)
        for k, m in enumerate(models):
            (d / f"model_{k}.dot").write_text(export_dot(m, f"model_{k}"))
        lines.append(f"wrote {len(models)} DOT file(s) to {d}")
    _emit(args, doc, "\n".join(lines))


def cmd_check(args) -> None:
    model = io.read_model(args.model)
    which = args.checks.split(",")
    cap = None if args.subset_cap in ("none", "0") else int(args.subset_cap)
    docs, lines, failed = [], [], False
    if "canonical" in which:
        vs = validate_canonical(model)
        failed |= bool(vs)
        docs.append({"check": "canonical", "passed": not vs, "violations": [str(v) for v in vs]})
        lines.append(f"canonical: {'PASS' if not vs else 'FAIL'}" + "".join(f"\n  {v}" for v in vs))
    if "minimal" in which:
        ok, wit = is_minimal(model)
        failed |= not ok
        docs.append({"check": "minimal", "passed": ok, "witness": list(wit) if wit else None})
        lines.append(f"minimal: {'PASS' if ok else f'FAIL (witness {wit[0]}, {wit[1]})'}")
    if "conventional" in which:
        rep = check_conventional_faithfulness(model, args.tol)
        failed |= not rep.passed
        docs.append(io.report_to_dict(rep, "conventional"))
        lines.append("conventional faithfulness: " + rep.summary())
    if "lvsemme" in which:
        rep = check_lvsemme_faithfulness(model, args.tol, subset_cap=cap)
        failed |= not rep.passed
        docs.append(io.report_to_dict(rep, "lvsemme"))
        lines.append("LV-SEM-ME faithfulness: " + rep.summary())
    _emit(args, docs, "\n".join(lines))
    if failed:
        raise _CheckFailed


def cmd_compare(args) -> None:
    m1, m2 = io.read_model(args.m1), io.read_model(args.m2)
    same = models_equal_mixing(m1, m2, args.tol) if args.mode == "mixing" else same_unlabeled_structure(m1, m2)
    _emit(args, {"mode": args.mode, "equal": same}, f"{args.mode}: {'equal' if same else 'different'}")
    if not same:
        raise _CheckFailed


def cmd_equivalents(args) -> None:
    model = io.read_model(args.model)
    grouping = compute_aog(model) if args.grouping == "aog" else compute_dog(model)
    models = enumerate_equivalents(model, grouping, tol=args.tol)
    if args.out_dir:
        d = Path(args.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for k, m in enumerate(models):
            io.write_model(m, d / f"equivalent_{k}.json")
    _emit(args, {"grouping": io.grouping_to_dict(grouping), "count": len(models)},
          f"{args.grouping.upper()}: {grouping}\n{len(models)} equivalent model(s)"
          + (f", written to {args.out_dir}" if args.out_dir else ""))


def cmd_sample(args) -> None:
    model = io.read_model(args.model)
    table = sample_data(model, args.n, NoiseSpec(args.noise, args.scale), seed=args.seed)
    io.write_data(table, args.out)
    print(f"wrote {args.n} row(s) over {', '.join(table.columns)} to {args.out}")


def cmd_perturb(args) -> None:
    W = io.read_matrix(args.wstar, args.observability, args.tol)
    io.write_matrix(perturb_matrix(W, args.sigma, args.seed), args.out)
    print(f"wrote perturbed matrix (sigma={args.sigma}) to {args.out}")


def cmd_dot(args) -> None:
    text = export_dot(io.read_model(args.model))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- parser --------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="zero tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    p.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS, help="stdout format")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lvsemme", parents=[common],
                                     description="Structure recovery for linear SEMs with latent confounders "
                                                 "and measurement error.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="draw a random canonical model")
    p.add_argument("--p-y", type=int, default=1)
    p.add_argument("--p-zc", type=int, default=1)
    p.add_argument("--p-ml", type=int, default=1)
    p.add_argument("--p-h", type=int, default=1)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--low", type=float, default=0.5)
    p.add_argument("--high", type=float, default=2.0)
    p.add_argument("--enforce", default="canonical,minimal,conventional",
                   help=f"comma list from {','.join(ENFORCE_FLAGS)}, or 'none'")
    p.add_argument("--max-retries", type=int, default=2000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("mix", parents=[common], help="write W* (or W with --full) of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--full", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--observability", help="sidecar path (default <out>.obs.csv)")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("strip", parents=[common], help="drop measurement-error columns from W")
    p.add_argument("--w", required=True)
    p.add_argument("--observability")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_strip)

    p = sub.add_parser("recover", parents=[common], help="recover the AOG and class members from W*")
    p.add_argument("--wstar", required=True)
    p.add_argument("--observability")
    p.add_argument("--emit", choices=("aog", "class", "dog"), default="aog")
    p.add_argument("--dot", help="directory for one DOT file per recovered model")
    p.add_argument("--out")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("check", parents=[common], help="check canonical form, minimality and faithfulness")
    p.add_argument("--model", required=True)
    p.add_argument("--checks", default="canonical,minimal,conventional,lvsemme")
    p.add_argument("--subset-cap", default="8", help="max |J|+|K| for the LV-SEM-ME check, or 'none'")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", parents=[common], help="compare two models")
    p.add_argument("m1")
    p.add_argument("m2")
    p.add_argument("--mode", choices=("mixing", "structure"), default="mixing")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("equivalents", parents=[common], help="enumerate equivalent models by switching")
    p.add_argument("--model", required=True)
    p.add_argument("--grouping", choices=("aog", "dog"), default="aog")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_equivalents)

    p = sub.add_parser("sample", parents=[common], help="sample observational data")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", choices=NoiseSpec.DISTRIBUTIONS, default="uniform")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("perturb", parents=[common], help="add Gaussian noise to a matrix")
    p.add_argument("--wstar", required=True)
    p.add_argument("--observability")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("dot", parents=[common], help="export a model as Graphviz DOT")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.tol, source = _resolve_tol(args)
        args.seed = getattr(args, "seed", 0)
        args.format = getattr(args, "format", "text")
        print(f"# lvsemme {args.command}: tol={args.tol:g} ({source}), seed={args.seed}", file=sys.stderr)
        args.func(args)
    except _CheckFailed:
        return EXIT_FAIL
    except (RecoveryError, GenerationError, io.FormatError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
