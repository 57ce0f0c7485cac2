"""Command-line interface: ``learn``, ``synth``, ``bench`` and ``score``.

Exit codes: 0 success, 1 input/config error, 2 empty result.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import statistics
import sys
import time
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import __version__
from .dataset import GroundTruth, SynthSpec, load_csv, synth_dataset, write_csv
from .errors import ColliderDagError, EmptyResultError, SynthSpecError
from .graph import export_dot, score_against_truth, to_dag
from .learner import LearnConfig, learn


EXIT_OK, EXIT_INPUT, EXIT_EMPTY = 0, 1, 2


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def matrix_csv(matrix, names, row_names=None) -> str:
    """Square or row matrix with a header of names and labelled rows."""
    matrix = np.atleast_2d(matrix)
    row_names = row_names if row_names is not None else names
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *names])
    for label, row in zip(row_names, matrix):
        w.writerow([label, *(_fmt(x) for x in row)])
    return buf.getvalue()


def read_matrix_csv(path, dtype=float):
    """Inverse of :func:`matrix_csv`: returns ``(matrix, column names, row names)``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    names = rows[0][1:]
    row_names = [r[0] for r in rows[1:]]
    mat = np.array([[dtype(x) for x in r[1:]] for r in rows[1:]], dtype=dtype)
    return mat, names, row_names


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


def _int_list(text: str) -> list[int]:
    return [int(s) for s in _csv_list(text)]


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    return obj


def cmd_learn(args) -> int:
    src = Path(args.input)
    config = LearnConfig(
        seed=args.seed,
        eps_tie=args.eps_tie,
        min_strength=args.min_strength,
        min_pcnt=args.min_pcnt,
        parallel=args.parallel,
        backend=args.backend,
    )
    t0 = time.perf_counter()
    data = load_csv(src, has_header=not args.no_header, drop_columns=args.drop_columns)
    t_load = time.perf_counter() - t0
    out = learn(data, config)
    t1 = time.perf_counter()
    dag = to_dag(out)
    dot = export_dot(dag)
    t_graph = time.perf_counter() - t1

    files = {
        "strn.csv": matrix_csv(out.strn, out.names),
        "drct.csv": matrix_csv(out.drct, out.names),
        "pcnt.csv": matrix_csv(out.pcnt, out.names),
        "err.csv": matrix_csv(out.err, out.names, row_names=["err"]),
        "graph.dot": dot,
    }
    manifest = {
        "command": "learn",
        "version": __version__,
        "config": {
            "input": str(src),
            "seed": config.seed,
            "eps_tie": config.eps_tie,
            "min_strength": config.min_strength,
            "min_pcnt": config.min_pcnt,
            "parallel": config.parallel,
            "drop_columns": list(args.drop_columns),
            "has_header": not args.no_header,
            "backend": out.backend,
        },
        "input_digest": _digest(src),
        "m": data.m,
        "n": data.n,
        "timings": {"load": t_load, **out.timings, "graph": t_graph},
        "n_triples": out.n_triples,
        "skipped_triples": len(out.skipped),
        "cycle_breaks": len(dag.removed_edges),
        "removed_edges": [
            {"from": dag.nodes[e.source], "to": dag.nodes[e.target], "reason": why}
            for e, why in dag.removed_edges
        ],
        "n_edges": len(dag.edges),
    }
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (outdir / name).write_text(text, encoding="utf-8")
    _write_json(outdir / "manifest.json", manifest)
    print(f"{len(dag.edges)} edges, {len(out.skipped)} skipped triples, "
          f"{len(dag.removed_edges)} cycle breaks -> {outdir}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SynthSpec(m=args.m, n=args.n, seed=args.seed)
    if spec.n < 5:
        raise SynthSpecError(f"n must be >= 5 so that 40% of variables is at least 2, got {spec.n}")
    data, truth = synth_dataset(spec)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    data_path = prefix.parent / f"{prefix.name}_data.csv"
    truth_path = prefix.parent / f"{prefix.name}_truth.json"
    write_csv(data_path, data)
    _write_json(truth_path, truth.to_json())
    print(f"wrote {data_path} ({data.m}x{data.n}) and {truth_path}")
    return EXIT_OK


def bench_table(ms, ns, seed=0, repetitions=3, backend=None) -> dict:
    """Median wall-clock seconds of ``learn`` per ``(n, m)`` cell."""
    table = {}
    for n in ns:
        for m in ms:
            data, _ = synth_dataset(SynthSpec(m=m, n=n, seed=seed))
            config = LearnConfig(seed=seed, backend=backend)
            times = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                learn(data, config)
                times.append(time.perf_counter() - t0)
            table[n, m] = statistics.median(times)
    return table


def cmd_bench(args) -> int:
    table = bench_table(args.m, args.n, args.seed, args.repetitions, args.backend)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n\\m", *args.m])
    for n in args.n:
        w.writerow([n, *(f"{table[n, m]:.6f}" for m in args.m)])
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def load_learned_dag(learned_dir):
    learned_dir = Path(learned_dir)
    strn, names, _ = read_matrix_csv(learned_dir / "strn.csv")
    pcnt, _, _ = read_matrix_csv(learned_dir / "pcnt.csv")
    err, _, _ = read_matrix_csv(learned_dir / "err.csv")
    return to_dag(SimpleNamespace(strn=strn, pcnt=pcnt, err=err[0], names=names))


def cmd_score(args) -> int:
    truth = GroundTruth.from_json(json.loads(Path(args.truth).read_text(encoding="utf-8")))
    dag = load_learned_dag(args.learned)
    if dag.n != truth.n:
        raise ColliderDagError(f"learned graph has {dag.n} nodes, truth has {truth.n}")
    print(json.dumps(_json_safe(score_against_truth(dag, truth)), sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="colliderdag", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("learn", help="learn a DAG from a CSV matrix")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--eps-tie", type=float, default=1e-9)
    s.add_argument("--min-strength", type=float, default=0.0)
    s.add_argument("--min-pcnt", type=float, default=0.0)
    s.add_argument("--drop-columns", type=_csv_list, default=[],
                   help="comma-separated column labels to discard")
    s.add_argument("--no-header", action="store_true")
    s.add_argument("--parallel", action="store_true")
    s.add_argument("--backend", choices=["compiled", "python"], default=None)
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("bench", help="time learn over an (n, m) grid")
    s.add_argument("--m", type=_int_list, default=[500, 1500, 2000, 3000])
    s.add_argument("--n", type=_int_list, default=[10, 25, 35, 45])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--repetitions", type=int, default=3)
    s.add_argument("--output", default=None, help="also write the table here")
    s.add_argument("--backend", choices=["compiled", "python"], default=None)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("score", help="compare a learned graph with ground truth")
    s.add_argument("--learned", required=True, help="directory written by learn")
    s.add_argument("--truth", required=True, help="*_truth.json written by synth")
    s.set_defaults(func=cmd_score)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except EmptyResultError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (ColliderDagError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
