"""``eigenrec`` command-line interface.

Exit codes: 0 success (or face identified), 1 operational error,
2 unknown face, 3 not a face. Machine-readable results go to stdout as
one JSON object per line; human-readable summaries go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import model_store
from .classifier import Outcome, classify, rank_subjects
from .dataset import Layout, SplitSpec, Strategy, load_dataset, split
from .eigenspace import DEFAULT_UM, DEFAULT_USTD, Method, project, reconstruct, prepared, train
from .errors import EigenrecError
from .evaluation import emit, run_matrix, summary_table
from .imageio import FaceVector, load_face, to_8bit, write_pgm

log = logging.getLogger("eigenrec")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2
EXIT_NOT_A_FACE = 3

_OUTCOME_EXIT = {
    Outcome.IDENTIFIED: EXIT_OK,
    Outcome.UNKNOWN_FACE: EXIT_UNKNOWN,
    Outcome.NOT_A_FACE: EXIT_NOT_A_FACE,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the "unknown face" exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    level = os.environ.get("EIGENREC_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def _csv_list(text: str):
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_method_flags(p) -> None:
    p.add_argument("--components", type=int, default=None)
    p.add_argument("--um", type=float, default=DEFAULT_UM)
    p.add_argument("--ustd", type=float, default=DEFAULT_USTD)
    p.add_argument("--literal-eq13", action="store_true",
                   help="use root-mean-square intensity as the N-PCA spread")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eigenrec", description="Eigenface (PCA / N-PCA) face recognition")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write it to an EIGF file")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--layout", choices=[l.value for l in Layout], default="orl")
    p.add_argument("--method", default="pca")
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="firstk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=None)
    _add_method_flags(p)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("recognize", help="classify one probe image")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--image", required=True, type=Path)
    p.add_argument("--topn", type=int, default=5)

    p = sub.add_parser("evaluate", help="run the accuracy matrix and write a report")
    p.add_argument("--dataset", required=True,
                   help="dataset root, or several separated by commas")
    p.add_argument("--layout", choices=[l.value for l in Layout], default="orl")
    p.add_argument("--methods", default="pca,npca")
    p.add_argument("--fractions", default="0.8,0.6,0.4")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default="firstk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--no-timing", action="store_true",
                   help="leave wall_time_s empty so reports are byte-reproducible")
    _add_method_flags(p)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("reconstruct", help="write the face-space reconstruction of an image")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--image", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("inspect", help="print a model file's header as JSON")
    p.add_argument("--model", required=True, type=Path)
    return parser


def _method(name: str, args) -> Method:
    try:
        return Method.from_name(name, um=args.um, ustd=args.ustd,
                                literal_eq13=args.literal_eq13)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _spec(fraction, args) -> SplitSpec:
    try:
        return SplitSpec(fraction, args.seed, Strategy(args.strategy))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_common(args) -> None:
    if getattr(args, "components", None) is not None and args.components < 1:
        raise UsageError("--components must be at least 1")
    if getattr(args, "theta", None) is not None and not args.theta >= 0:
        raise UsageError("--theta must be nonnegative")


def cmd_train(args) -> int:
    _check_common(args)
    method = _method(args.method, args)
    spec = _spec(args.fraction, args)
    ds = load_dataset(args.dataset, Layout(args.layout))
    parts = split(ds, spec)
    model = train(parts.train, method, components=args.components, theta=args.theta)
    size = model_store.save(model, args.out)
    print(f"trained {method.name} on {model.n_train} images: k={model.n_components}, "
          f"theta_c={model.theta_c:.6g}, wrote {size} bytes to {args.out}", file=sys.stderr)
    _emit_json({"M": model.n_train, "k": model.n_components, "theta_c": model.theta_c,
                "theta": model.theta, "method": method.name, "out": str(args.out)})
    return EXIT_OK


def _probe(model, path: Path) -> FaceVector:
    vec = load_face(path)
    if vec.source_dims != model.dims:
        raise EigenrecError(
            f"dimension mismatch: {path} is {vec.source_dims[0]}x{vec.source_dims[1]}, "
            f"model expects {model.dims[0]}x{model.dims[1]}"
        )
    return vec


def cmd_recognize(args) -> int:
    if args.topn < 1:
        raise UsageError("--topn must be at least 1")
    model = model_store.load(args.model)
    vec = _probe(model, args.image)
    decision = classify(model, vec, keep_distances=True)
    out = decision.to_dict()
    out["theta_c"] = model.theta_c
    out["theta"] = model.theta
    out["top"] = [{"label": lab, "distance": dist}
                  for lab, dist in rank_subjects(model.train_labels, decision.distances, args.topn)]
    _emit_json(out)
    return _OUTCOME_EXIT[decision.outcome]


def cmd_evaluate(args) -> int:
    _check_common(args)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    names = _csv_list(args.methods)
    if not names:
        raise UsageError("--methods is empty")
    methods = [_method(n, args) for n in names]
    try:
        fractions = [float(f) for f in _csv_list(args.fractions)]
    except ValueError:
        raise UsageError(f"--fractions must be numbers, got {args.fractions!r}") from None
    if not fractions:
        raise UsageError("--fractions is empty")
    for f in fractions:
        _spec(f, args)
    roots = [Path(r) for r in _csv_list(args.dataset)]
    if not roots:
        raise UsageError("--dataset is empty")

    datasets = [load_dataset(r, Layout(args.layout)) for r in roots]
    for ds in datasets:
        for f in fractions:
            for s in ds.subjects:
                try:
                    _spec(f, args).train_count(len(s.images))
                except ValueError as exc:
                    raise UsageError(f"{ds.name}/{s.id}: {exc}") from None

    report = run_matrix(datasets, methods, fractions, Strategy(args.strategy), args.seed,
                        components=args.components, jobs=args.jobs,
                        timing=not args.no_timing)
    args.out.write_bytes(emit(report, args.format))
    print(summary_table(report), file=sys.stderr)
    _emit_json({"out": str(args.out), "format": args.format, "rows": len(report)})
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    model = model_store.load(args.model)
    vec = _probe(model, args.image)
    v = prepared(model, vec)
    face = reconstruct(model, project(model, vec))
    epsilon = float(((v - face.values) ** 2).sum() ** 0.5)
    write_pgm(args.out, to_8bit(face))
    print(f"reconstruction distance {epsilon:.6g}, wrote {args.out}", file=sys.stderr)
    _emit_json({"epsilon": epsilon, "norm": float((v ** 2).sum() ** 0.5), "out": str(args.out)})
    return EXIT_OK


def cmd_inspect(args) -> int:
    data = args.model.read_bytes()
    header = model_store.read_header(data)
    model_store.loads(data)
    header.pop("reserved")
    header["file_bytes"] = len(data)
    _emit_json(header)
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "recognize": cmd_recognize,
    "evaluate": cmd_evaluate,
    "reconstruct": cmd_reconstruct,
    "inspect": cmd_inspect,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"eigenrec {args.command}: {exc}", file=sys.stderr)
    except (EigenrecError, ValueError, OSError) as exc:
        print(f"eigenrec {args.command}: {exc}", file=sys.stderr)
        log.debug("details", exc_info=True)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
