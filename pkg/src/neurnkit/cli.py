"""Command-line entry point: ``neurnkit <neurn|align|patterns|funcsim|bench> ...``."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from . import FIXTURE_VERSION, __version__
from .align import ScoreParams, pairwise_matrix
from .archspec import default_alphabet, load_spec_dir, parse_alphabet
from .harness import ConfigError, ExperimentConfig, run_experiment
from .imageio import (FormatError, IDX_UBYTE_IMAGES, read_idx_images, read_pgm,
                      write_idx_images, write_pgm)
from .neurn import PADDINGS, NeurnConfig, transform, transform_batch
from .patterns import PatternConfig, format_patterns_csv, pattern_matrix, top_common_patterns
from .simmat import (cluster_order, default_perf_table, difference_matrix,
                     format_csv, functional_similarity, mean_offdiagonal, read_perf_table)


class UsageError(Exception):
    pass


def _write_outputs(files: dict) -> None:
    """Write every ``path -> bytes`` atomically; on failure remove what was written."""
    done = []
    try:
        for path, payload in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(payload)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            done.append(path)
    except BaseException:
        for p in done:
            p.unlink(missing_ok=True)
        raise


def _odd_k(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("k must be odd ≥ 3") from None
    if k < 3 or k % 2 == 0:
        raise argparse.ArgumentTypeError("k must be odd ≥ 3")
    return k


def _positive(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if k <= 0:
        raise argparse.ArgumentTypeError(f"k must be a positive integer, got {k}")
    return k


def _alphabet(path: Optional[str]):
    if path is None:
        return default_alphabet()
    return parse_alphabet(Path(path).read_bytes())


def _specs(args):
    specs = load_spec_dir(args.specs, _alphabet(args.alphabet))
    if len(specs) < 2:
        raise UsageError(f"need at least 2 spec files in {args.specs}, found {len(specs)}")
    return specs


# -- subcommands ----------------------------------------------------------------

def cmd_neurn_apply(args) -> None:
    cfg = NeurnConfig(k=args.k, padding=args.padding, scope=args.scope)
    data = Path(args.input).read_bytes()
    if data[:2] in (b"P2", b"P5"):
        img = read_pgm(data)
        out = write_pgm(transform(img, cfg), binary=data[:2] == b"P5")
    elif len(data) >= 4 and int.from_bytes(data[:4], "big") == IDX_UBYTE_IMAGES:
        imgs = read_idx_images(data)
        out = write_idx_images(transform_batch(imgs, cfg))
    else:
        raise FormatError(f"{args.input}: not a PGM (P2/P5) or IDX image file")
    _write_outputs({args.output: out})


def cmd_align_matrix(args) -> None:
    params = ScoreParams(match=args.match, mismatch=args.mismatch, gap=args.gap)
    m = pairwise_matrix(_specs(args), params, raw=args.raw)
    if args.cluster_order:
        if m.kind != "similarity":
            raise UsageError("--cluster-order needs a normalised matrix (drop --raw)")
        m = m.reorder(cluster_order(m))
    _write_outputs({args.out: format_csv(m).encode()})


def cmd_patterns_top(args) -> None:
    specs = _specs(args)
    rows = top_common_patterns(specs, args.k, min_len=args.min_len)
    _write_outputs({args.out: format_patterns_csv(rows, _alphabet(args.alphabet)).encode()})


def cmd_patterns_matrix(args) -> None:
    cfg = PatternConfig(min_len=args.min_len, weighting="uniform" if args.uniform else "length")
    m = pattern_matrix(_specs(args), cfg)
    if args.cluster_order:
        m = m.reorder(cluster_order(m))
    _write_outputs({args.out: format_csv(m).encode()})


def cmd_funcsim(args) -> None:
    table = read_perf_table(args.table) if args.table else default_perf_table()
    include_nas = not args.exclude_nas
    if args.diff:
        base = functional_similarity(table, "baseline", include_nas)
        neurn = functional_similarity(table, "neurn", include_nas)
        diff = difference_matrix(neurn, base)
        _write_outputs({args.out: format_csv(diff).encode()})
        print(f"baseline mean off-diagonal cosine: {mean_offdiagonal(base):.6f}")
        print(f"neurn mean off-diagonal cosine: {mean_offdiagonal(neurn):.6f}")
        print(f"delta (neurn - baseline): {mean_offdiagonal(diff):+.6f}")
    else:
        m = functional_similarity(table, args.variant, include_nas)
        _write_outputs({args.out: format_csv(m).encode()})
        print(f"{args.variant} mean off-diagonal cosine: {mean_offdiagonal(m):.6f}")


def cmd_bench_run(args) -> None:
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"invalid JSON: {exc}") from None
        cfg = ExperimentConfig.from_dict(doc)
    else:
        cfg = ExperimentConfig()
    report = run_experiment(cfg)
    out = Path(args.out)
    _write_outputs({
        out / "report.json": report.to_json().encode(),
        out / "summary.csv": report.summary_csv().encode(),
    })
    sys.stdout.write(report.summary_csv())
    print(f"wall time: {report.wall_time:.2f} s", file=sys.stderr)


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neurnkit", description=__doc__)
    p.add_argument("--version", action="version",
                   version=f"neurnkit {__version__} (fixtures {FIXTURE_VERSION})")
    sub = p.add_subparsers(dest="command", required=True)

    neurn = sub.add_parser("neurn", help="NeuRN transform").add_subparsers(dest="action", required=True)
    ap = neurn.add_parser("apply", help="transform a PGM image or an IDX image file")
    ap.add_argument("--input", required=True, help="PGM (P2/P5) or IDX ubyte image file")
    ap.add_argument("--output", required=True, help="output path; same format as the input")
    ap.add_argument("--k", type=_odd_k, default=3, help="patch size, odd >= 3 (default 3)")
    ap.add_argument("--padding", choices=sorted(PADDINGS), default="replicate")
    ap.add_argument("--scope", choices=("channel", "global"), default="channel",
                    help="normalise by the per-channel or the global max sigma")
    ap.set_defaults(func=cmd_neurn_apply)

    align = sub.add_parser("align", help="Needleman-Wunsch similarity").add_subparsers(dest="action", required=True)
    am = align.add_parser("matrix", help="pairwise similarity matrix over a directory of specs")
    am.add_argument("--specs", required=True, help="directory of *.json architecture specs")
    am.add_argument("--alphabet", help="layer alphabet JSON (default: bundled)")
    am.add_argument("--match", type=int, default=4)
    am.add_argument("--mismatch", type=int, default=-2)
    am.add_argument("--gap", type=int, default=-1)
    am.add_argument("--raw", action="store_true", help="write unnormalised integer scores")
    am.add_argument("--cluster-order", action="store_true", help="order rows by average-linkage clustering")
    am.add_argument("--out", required=True)
    am.set_defaults(func=cmd_align_matrix)

    pat = sub.add_parser("patterns", help="shared layer-combination patterns").add_subparsers(
        dest="action", required=True)
    pt = pat.add_parser("top", help="rank patterns by number of containing models")
    pt.add_argument("--specs", required=True)
    pt.add_argument("--alphabet")
    pt.add_argument("--k", type=_positive, default=100)
    pt.add_argument("--min-len", type=int, default=2)
    pt.add_argument("--out", required=True)
    pt.set_defaults(func=cmd_patterns_top)
    pm = pat.add_parser("matrix", help="pairwise pattern-similarity matrix")
    pm.add_argument("--specs", required=True)
    pm.add_argument("--alphabet")
    pm.add_argument("--min-len", type=int, default=2)
    pm.add_argument("--uniform", action="store_true", help="weight every pattern 1 instead of its length")
    pm.add_argument("--cluster-order", action="store_true")
    pm.add_argument("--out", required=True)
    pm.set_defaults(func=cmd_patterns_matrix)

    fs = sub.add_parser("funcsim", help="cosine functional similarity over an accuracy table")
    fs.add_argument("--table", help="model,variant,<12 tasks> CSV (default: bundled table)")
    fs.add_argument("--variant", choices=("baseline", "neurn"), default="baseline")
    fs.add_argument("--diff", action="store_true", help="write the neurn - baseline difference matrix")
    fs.add_argument("--exclude-nas", action="store_true", help="drop rows whose model name ends in '(NAS)'")
    fs.add_argument("--out", required=True)
    fs.set_defaults(func=cmd_funcsim)

    bench = sub.add_parser("bench", help="synthetic domain-shift experiment").add_subparsers(
        dest="action", required=True)
    br = bench.add_parser("run")
    br.add_argument("--config", help="experiment config JSON (default: built-in defaults)")
    br.add_argument("--out", required=True, help="output directory for report.json and summary.csv")
    br.set_defaults(func=cmd_bench_run)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"neurnkit: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"neurnkit: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
