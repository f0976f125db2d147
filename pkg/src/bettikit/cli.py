"""Command-line surface.

Subcommands cover single-matrix curves, SED/entropy utilities, the two
end-to-end pipelines, and generators for the geometric/random reference
families.  Report paths write canonical JSON plus delimited plot data and
PNG figures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ContractError, FormatError, ToolkitError
from .filters import Histogram, entropy, prune_order, prune_rank
from .formats import read_matrix, read_tensor, write_matrix, write_tensor
from .geometry import geometric_matrix, random_symmetric, sample_point_cloud
from .harness import (
    Dataset,
    RunConfig,
    read_histogram_csv,
    run_assess,
    run_cdmatrix,
    write_assess_outputs,
    write_cdmatrix_outputs,
    write_histogram_csv,
)
from .manifest import load_manifest
from .matrix import ASCENDING, DESCENDING, SymmetricMatrix, symmetrize_add, symmetrize_max
from .topology import DEFAULT_BUDGET, betti_curves_of, max_betti, starting_edge_density
from . import filters as _filters
from . import plots

_ORDER = {"asc": ASCENDING, "ascending": ASCENDING, "desc": DESCENDING, "descending": DESCENDING}


def _add_topology_flags(p, bin_width: bool = False):
    p.add_argument("--k", type=int, default=1, help="homology dimension (default 1)")
    p.add_argument("--order", choices=sorted(_ORDER), default="desc", help="edge ordering (default desc)")
    p.add_argument("--guard", type=int, default=140, help="matrix side guard; 0 disables (default 140)")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="simplex enumeration budget")
    if bin_width:
        p.add_argument("--bin-width", type=int, default=1, help="histogram bin width (default 1)")


def _guard(args) -> int | None:
    return None if args.guard <= 0 else args.guard


def _load_matrix_like(path: str) -> np.ndarray:
    if str(path).endswith(".tfl1"):
        return read_tensor(path)
    return read_matrix(path)


def _write_matrix_like(path: Path, values: np.ndarray) -> None:
    if str(path).endswith(".tfl1"):
        write_tensor(path, values)
    else:
        write_matrix(path, values)


def _symmetric_from_file(path: str, symmetrize: str) -> SymmetricMatrix:
    arr = _load_matrix_like(path)
    if symmetrize == "max":
        return symmetrize_max(arr)
    if symmetrize == "add":
        return symmetrize_add(arr)
    return SymmetricMatrix(arr)


def _cmd_betti(args) -> int:
    sym = _symmetric_from_file(args.matrix, args.symmetrize)
    bc = betti_curves_of(sym, k_max=args.k, ordering=_ORDER[args.order], guard=_guard(args), budget=args.budget)
    summary = {"n": bc.n, "edges": bc.n_edges}
    for k in range(bc.k_max + 1):
        summary[f"beta_{k}"] = {"starting_edge_density": starting_edge_density(bc, k), "max": max_betti(bc, k)}
    print(json.dumps(summary, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        from .harness import write_curve_csv

        write_curve_csv(out / "betti_curves.csv", bc)
        plots.save_betti_curves(bc, out / "betti_curves.png", title=Path(args.matrix).name)
        print(f"wrote {out}/betti_curves.csv and betti_curves.png", file=sys.stderr)
    return 0


def _iter_feature_maps(paths):
    for path in paths:
        arr = _load_matrix_like(path)
        if arr.ndim == 2:
            yield path, 0, arr
        elif arr.ndim == 3:
            for i in range(arr.shape[0]):
                yield path, i, arr[i]
        else:
            raise ContractError(f"{path}: expected a 2-D map or 3-D stack, got shape {arr.shape}")


def _cmd_sed(args) -> int:
    seds = []
    rows = []
    for path, idx, fm in _iter_feature_maps(args.inputs):
        sed = _filters.map_starting_density(fm, k=args.k, guard=_guard(args), budget=args.budget)
        seds.append(sed)
        rows.append((f"{path}[{idx}]", sed))
    hist = Histogram.from_values(seds, bin_width=args.bin_width)
    for name, sed in rows:
        print(f"{name}\t{'NONE' if sed is None else sed}")
    print(f"entropy: {entropy(hist):.6f} bits over {hist.total} maps")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_histogram_csv(out / "sed_hist.csv", hist)
        plots.save_histogram(hist, out / "sed_hist.png", xlabel="starting edge density")
        print(f"wrote {out}/sed_hist.csv and sed_hist.png", file=sys.stderr)
    return 0


def _cmd_entropy(args) -> int:
    path = Path(args.histogram)
    if path.suffix == ".json":
        from .report import histogram_from_json

        try:
            hist = histogram_from_json(json.loads(path.read_text()))
        except (json.JSONDecodeError, KeyError) as exc:
            raise FormatError(f"{path}: not a histogram JSON: {exc}") from exc
    else:
        hist = read_histogram_csv(path)
    print(f"{entropy(hist):.12g}")
    return 0


def _config_from_args(args) -> RunConfig:
    cats = tuple(args.categories.split(",")) if args.categories else None
    return RunConfig(
        k=args.k,
        ordering=_ORDER[args.order],
        bin_width=args.bin_width,
        guard=_guard(args),
        budget=args.budget,
        seed=args.seed,
        categories=cats,
        per_class=args.per_class,
        jobs=args.jobs,
    )


def _cmd_assess(args) -> int:
    manifest = load_manifest(args.manifest)
    dataset = Dataset.load(args.data)
    report = run_assess(manifest, dataset, _config_from_args(args))
    out = write_assess_outputs(report, manifest, dataset, args.out)
    print(f"effectiveness order: {' '.join(report['effectiveness_order'])}")
    print(f"prune order:         {' '.join(report['prune_order'])}")
    for fid in report["effectiveness_order"]:
        print(f"  {fid}: score {report['filters'][fid]['score']:+.6f}  effective for "
              f"{','.join(report['filters'][fid]['effective_set']) or '(none)'}")
    print(f"report written to {out}/report.json", file=sys.stderr)
    return 0


def _cmd_cdmatrix(args) -> int:
    dataset = Dataset.load(args.data)
    report = run_cdmatrix(dataset, _config_from_args(args))
    out = write_cdmatrix_outputs(report, dataset, args.out)
    degrees = report["distinguishable_degrees"]
    order = sorted(degrees, key=degrees.get, reverse=True)
    print("distinguishable degrees (most separable first):")
    for cat in order:
        print(f"  {cat}: {degrees[cat]:.4f}")
    print(f"report written to {out}/report.json", file=sys.stderr)
    return 0


def _cmd_convolve(args) -> int:
    image = _load_matrix_like(args.image)
    kernel = _load_matrix_like(args.kernel)
    fmap = _filters.convolve(image, kernel)
    _write_matrix_like(Path(args.out), fmap)
    print(f"wrote {args.out} with shape {fmap.shape}")
    return 0


def _cmd_prune_rank(args) -> int:
    try:
        doc = json.loads(Path(args.scores).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{args.scores}: not a JSON score file: {exc}") from exc
    if not isinstance(doc, dict) or not doc:
        raise FormatError(f"{args.scores}: expected a non-empty JSON object")
    if all(isinstance(v, dict) for v in doc.values()):
        scores = {fid: _filters.ensemble_performance(deltas) for fid, deltas in doc.items()}
    else:
        scores = {fid: float(v) for fid, v in doc.items()}
    ranking = prune_rank(scores)
    pruning = prune_order(scores)
    result = {"scores": scores, "effectiveness_order": ranking, "prune_order": pruning}
    print(json.dumps(result, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_gen_geometric(args) -> int:
    mat = geometric_matrix(sample_point_cloud(args.n, args.d, args.seed))
    _write_matrix_like(Path(args.out), mat.values)
    print(f"wrote {args.out}: {args.n}x{args.n} distance matrix of {args.n} points in {args.d}-D (seed {args.seed})")
    return 0


def _cmd_gen_random(args) -> int:
    mat = random_symmetric(args.n, args.seed)
    _write_matrix_like(Path(args.out), mat.values)
    print(f"wrote {args.out}: {args.n}x{args.n} random symmetric matrix (seed {args.seed})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bettikit",
        description="Clique-topology Betti curves for filter assessment and category distinguishability.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("betti", help="Betti curves of one symmetric matrix")
    p.add_argument("matrix", help="delimited text matrix or .tfl1 tensor")
    p.add_argument("--symmetrize", choices=["none", "max", "add"], default="none",
                   help="symmetrize the input first (default: require symmetric)")
    _add_topology_flags(p)
    p.add_argument("--out", help="directory for curve CSV and figure")
    p.set_defaults(func=_cmd_betti)

    p = sub.add_parser("sed", help="starting edge densities of feature maps")
    p.add_argument("inputs", nargs="+", help="2-D maps or 3-D stacks (.tfl1 or delimited)")
    _add_topology_flags(p, bin_width=True)
    p.add_argument("--out", help="directory for histogram CSV and figure")
    p.set_defaults(func=_cmd_sed)

    p = sub.add_parser("entropy", help="Shannon entropy (bits) of a histogram file")
    p.add_argument("histogram", help="label,count CSV or histogram JSON")
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("assess", help="score filters across training snapshots")
    p.add_argument("--manifest", required=True, help="snapshot manifest JSON")
    p.add_argument("--data", required=True, help="IDX dataset: directory or 'images,labels'")
    _add_topology_flags(p, bin_width=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--categories", help="comma-separated category ids (default: all)")
    p.add_argument("--per-class", type=int, default=None, help="cap images per category")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_assess)

    p = sub.add_parser("cdmatrix", help="category-distance matrix of a labeled dataset")
    p.add_argument("--data", required=True, help="IDX dataset: directory or 'images,labels'")
    _add_topology_flags(p, bin_width=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--categories", help="comma-separated category ids (default: all)")
    p.add_argument("--per-class", type=int, default=None, help="cap images per category")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_cdmatrix)

    p = sub.add_parser("convolve", help="valid-mode convolution of image with kernel")
    p.add_argument("--image", required=True)
    p.add_argument("--kernel", required=True)
    p.add_argument("--out", required=True, help=".tfl1 or delimited text output")
    p.set_defaults(func=_cmd_convolve)

    p = sub.add_parser("prune-rank", help="rank filters from a JSON score map")
    p.add_argument("scores", help="JSON: {filter: score} or {filter: {category: delta_h}}")
    p.add_argument("--out", help="write the ranking JSON here")
    p.set_defaults(func=_cmd_prune_rank)

    p = sub.add_parser("gen-geometric", help="distance matrix of a sampled point cloud")
    p.add_argument("--n", type=int, required=True, help="number of points")
    p.add_argument("--d", type=int, required=True, help="ambient dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_geometric)

    p = sub.add_parser("gen-random", help="random symmetric matrix (i.i.d. uniform)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_random)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
