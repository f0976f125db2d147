"""End-to-end runs: datasets + snapshots in, reports + plot data out.

The two pipelines mirror the two halves of the toolkit: ``run_assess``
walks filter snapshots over a labeled dataset and scores every filter by
its entropy trajectory; ``run_cdmatrix`` reduces each category to its
Betti-maximum histogram and emits the pairwise distance matrix.  Both are
pure functions of (inputs, config); the ``write_*_outputs`` helpers render
the delimited plot data and matplotlib figures next to the report.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .categories import cd_matrix, image_max_betti
from .errors import ContractError, DimensionError, FormatError
from .filters import (
    EntropySeries,
    FilterAssessment,
    Histogram,
    convolve,
    entropy,
    entropy_variation,
    map_starting_density,
    prune_order,
    prune_rank,
)
from .formats import load_idx, read_tensor, write_matrix
from .manifest import SnapshotManifest
from .matrix import DEFAULT_GUARD, DESCENDING, symmetrize_add, symmetrize_max
from .report import NONE_KEY, histogram_from_json, histogram_to_json, save_report
from .topology import DEFAULT_BUDGET, betti_curves_of

# ---------------------------------------------------------------------------
# configuration and dataset handling


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by every pipeline run.

    ``jobs`` controls worker-pool fan-out only; it never changes results,
    so it is not part of the serialized report config.
    """

    k: int = 1
    ordering: str = DESCENDING
    bin_width: int = 1
    guard: int | None = DEFAULT_GUARD
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    categories: tuple | None = None
    per_class: int | None = None
    jobs: int = 1

    def as_json(self) -> dict:
        return {
            "k": self.k,
            "ordering": self.ordering,
            "bin_width": self.bin_width,
            "guard": self.guard,
            "budget": self.budget,
            "seed": self.seed,
            "categories": list(self.categories) if self.categories is not None else None,
            "per_class": self.per_class,
        }


@dataclass(frozen=True)
class Dataset:
    """Labeled square images, kept in file order."""

    images: np.ndarray  # (count, rows, cols)
    labels: np.ndarray  # (count,)

    def __post_init__(self):
        if self.images.ndim != 3:
            raise ContractError(f"images must be (count, rows, cols), got {self.images.shape}")
        if self.labels.shape != (self.images.shape[0],):
            raise ContractError("labels must align one-to-one with images")

    @classmethod
    def load(cls, spec) -> "Dataset":
        """Load from 'images.idx,labels.idx' or a directory holding one such pair."""
        spec = str(spec)
        if "," in spec:
            img_path, lab_path = (p.strip() for p in spec.split(",", 1))
        else:
            root = Path(spec)
            if not root.is_dir():
                raise FormatError(f"dataset spec must be a directory or 'images,labels' pair: {spec}")
            img_path = _single_match(root, "images", spec)
            lab_path = _single_match(root, "labels", spec)
        images, labels = load_idx(img_path, lab_path)
        return cls(images=images, labels=labels)

    def category_ids(self) -> list:
        return [str(lab) for lab in sorted(set(self.labels.tolist()))]

    def images_for(self, category: str, limit: int | None = None) -> list:
        idx = np.flatnonzero(self.labels.astype(str) == category)
        if limit is not None:
            idx = idx[:limit]
        return [self.images[i] for i in idx]


def _single_match(root: Path, token: str, spec: str) -> Path:
    hits = sorted(p for p in root.iterdir() if p.is_file() and token in p.name)
    if len(hits) != 1:
        raise FormatError(
            f"dataset directory {spec} must contain exactly one *{token}* file, found {len(hits)}"
        )
    return hits[0]


def _category_images(dataset, categories, per_class) -> dict:
    """Resolve per-category image lists from a Dataset or a plain mapping.

    A mapping {category: [2-D arrays]} is accepted alongside Dataset so
    callers can analyze categories whose images differ in size, which an
    IDX tensor cannot represent.
    """
    if isinstance(dataset, Dataset):
        available = dataset.category_ids()
        cats = list(categories) if categories else available
        getter = dataset.images_for
    else:
        by_id = {str(cat): [np.asarray(im, dtype=np.float64) for im in imgs] for cat, imgs in dataset.items()}
        available = sorted(by_id)
        cats = list(categories) if categories else available
        getter = lambda cat, limit: by_id[cat][:limit] if limit else by_id[cat]
    for cat in cats:
        if cat not in available:
            raise ContractError(f"category {cat!r} missing from dataset (has {available})")
    images = {cat: getter(cat, per_class) for cat in cats}
    for cat, imgs in images.items():
        if not imgs:
            raise ContractError(f"category {cat!r} has no images")
    return images


# ---------------------------------------------------------------------------
# worker-pool plumbing; job functions must be module-level for pickling


def _sed_job(args):
    values, k, ordering, guard, budget = args
    return map_starting_density(values, k=k, ordering=ordering, guard=guard, budget=budget)


def _mbc_job(args):
    values, k, ordering, guard, budget = args
    return image_max_betti(values, k=k, ordering=ordering, guard=guard, budget=budget)


def _map_jobs(fn, argses, pool):
    if pool is None:
        return [fn(a) for a in argses]
    chunk = max(1, len(argses) // (pool._max_workers * 4))
    return list(pool.map(fn, argses, chunksize=chunk))


class _maybe_pool:
    def __init__(self, jobs: int):
        self.jobs = jobs
        self.pool = None

    def __enter__(self):
        if self.jobs and self.jobs > 1:
            self.pool = ProcessPoolExecutor(max_workers=self.jobs)
            return self.pool.__enter__()
        return None

    def __exit__(self, *exc):
        if self.pool is not None:
            return self.pool.__exit__(*exc)
        return False


# ---------------------------------------------------------------------------
# filter assessment pipeline


def run_assess(manifest: SnapshotManifest, dataset, config: RunConfig = RunConfig()) -> dict:
    """Score every filter in the manifest over every configured category.

    For each (filter, iteration): feature maps come from the manifest's
    precomputed stacks when present, otherwise by convolving the dataset
    images with the iteration's kernel.  Starting-edge-density histograms
    and entropies per category feed the entropy deltas, effective sets,
    ensemble scores, and the pruning order.
    """
    if len(manifest.iterations) < 2:
        raise ContractError(f"assessment needs >= 2 iterations, manifest has {len(manifest.iterations)}")
    fids = manifest.filter_ids
    for entry in manifest.iterations:
        ids = sorted(set(entry.filters) | set(entry.feature_maps))
        if ids != fids:
            raise ContractError(f"iteration {entry.t} covers filters {ids}, expected {fids}")

    cat_images = _category_images(dataset, config.categories, config.per_class)
    cats = list(cat_images)

    iterations = [entry.t for entry in manifest.iterations]
    filters_doc = {}
    scores = {}
    with _maybe_pool(config.jobs) as pool:
        for fid in fids:
            per_cat = {cat: {"entropies": [], "seds": [], "histograms": []} for cat in cats}
            for entry in manifest.iterations:
                maps_by_cat = _feature_maps_for(entry, fid, cats, cat_images, config)
                for cat in cats:
                    argses = [(m, config.k, config.ordering, config.guard, config.budget) for m in maps_by_cat[cat]]
                    seds = _map_jobs(_sed_job, argses, pool)
                    hist = Histogram.from_values(seds, bin_width=config.bin_width)
                    per_cat[cat]["seds"].append(seds)
                    per_cat[cat]["histograms"].append(histogram_to_json(hist))
                    per_cat[cat]["entropies"].append(entropy(hist))
            deltas = {
                cat: entropy_variation(EntropySeries(tuple(zip(iterations, doc["entropies"]))))
                for cat, doc in per_cat.items()
            }
            assessment = FilterAssessment.from_deltas(deltas)
            scores[fid] = assessment.score
            filters_doc[fid] = {
                "categories": {
                    cat: {
                        "entropies": doc["entropies"],
                        "delta_h": deltas[cat],
                        "seds": doc["seds"],
                        "histograms": doc["histograms"],
                    }
                    for cat, doc in per_cat.items()
                },
                "effective_set": sorted(assessment.effective),
                "score": assessment.score,
            }

    return {
        "kind": "assess",
        "config": config.as_json(),
        "iterations": iterations,
        "filters": filters_doc,
        "effectiveness_order": prune_rank(scores),
        "prune_order": prune_order(scores),
    }


def _feature_maps_for(entry, fid, cats, cat_images, config) -> dict:
    if fid in entry.feature_maps:
        stacks = {}
        for cat in cats:
            if cat not in entry.feature_maps[fid]:
                raise ContractError(
                    f"iteration {entry.t}: precomputed feature maps for filter {fid!r} lack category {cat!r}"
                )
            stack = read_tensor(entry.feature_maps[fid][cat])
            if stack.ndim == 2:
                stack = stack[None, :, :]
            if stack.ndim != 3:
                raise ContractError(f"feature-map stack for {fid!r}/{cat!r} must be 2-D or 3-D")
            maps = [stack[i] for i in range(stack.shape[0])]
            stacks[cat] = maps[: config.per_class] if config.per_class else maps
        return stacks
    kernel = read_tensor(entry.filters[fid])
    if kernel.ndim != 2:
        raise DimensionError(f"kernel tensor for filter {fid!r} must be 2-D, got shape {kernel.shape}")
    return {cat: [convolve(img, kernel) for img in cat_images[cat]] for cat in cats}


# ---------------------------------------------------------------------------
# category distinguishability pipeline


def run_cdmatrix(dataset, config: RunConfig = RunConfig()) -> dict:
    """Betti-maximum histograms per category, their distance matrix, degrees.

    ``dataset`` is a Dataset or a mapping {category: [2-D images]}.
    """
    cat_images = _category_images(dataset, config.categories, config.per_class)
    cats = list(cat_images)
    if len(cats) < 2:
        raise ContractError(f"need >= 2 categories, got {cats}")

    hists = {}
    with _maybe_pool(config.jobs) as pool:
        for cat in cats:
            argses = [(im, config.k, config.ordering, config.guard, config.budget) for im in cat_images[cat]]
            maxima = _map_jobs(_mbc_job, argses, pool)
            hists[cat] = Histogram.from_values(maxima, bin_width=config.bin_width)

    cdm = cd_matrix([(cat, hists[cat]) for cat in cats])
    degrees = cdm.degrees()
    return {
        "kind": "cdmatrix",
        "config": config.as_json(),
        "categories": cats,
        "histograms": {cat: histogram_to_json(h) for cat, h in hists.items()},
        "cd_matrix": [[float(x) for x in row] for row in cdm.values],
        "distinguishable_degrees": {cat: float(d) for cat, d in zip(cats, degrees)},
    }


# ---------------------------------------------------------------------------
# file emission: report + delimited plot data + figures


def write_curve_csv(path, bc) -> None:
    """Betti curves as delimited plot data: v, normalized density, beta_k columns."""
    path = Path(path)
    header = "v,density," + ",".join(f"beta_{k}" for k in range(bc.k_max + 1))
    cols = [np.arange(bc.n_edges + 1), bc.densities] + [bc.curves[k] for k in range(bc.k_max + 1)]
    body = "\n".join(
        ",".join(("%d" % col[v]) if i != 1 else ("%.17g" % col[v]) for i, col in enumerate(cols))
        for v in range(bc.n_edges + 1)
    )
    path.write_text(header + "\n" + body + "\n")


def write_histogram_csv(path, h: Histogram) -> None:
    labels = sorted((label for label in h.counts if label is not None))
    rows = [f"{label},{h.counts[label]}" for label in labels]
    if None in h.counts:
        rows.append(f"{NONE_KEY},{h.counts[None]}")
    Path(path).write_text("label,count\n" + "\n".join(rows) + "\n")


def read_histogram_csv(path) -> Histogram:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"no such histogram file: {path}")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "label,count":
        raise FormatError(f"{path}: expected a 'label,count' CSV header")
    counts = {}
    for ln in lines[1:]:
        try:
            key, cnt = ln.split(",")
            counts[None if key.strip() == NONE_KEY else int(key)] = int(cnt)
        except ValueError as exc:
            raise FormatError(f"{path}: bad histogram row {ln!r}") from exc
    return Histogram(counts=counts)


def write_assess_outputs(report: dict, manifest: SnapshotManifest, dataset: Dataset, out_dir) -> Path:
    """Emit report.json, SED histograms, exemplar Betti curves, and figures."""
    from . import plots

    out = Path(out_dir)
    (out / "hists").mkdir(parents=True, exist_ok=True)
    (out / "curves").mkdir(exist_ok=True)
    (out / "figs").mkdir(exist_ok=True)
    save_report(report, out / "report.json")

    config = _config_from_json(report["config"])
    iterations = report["iterations"]
    edge_entries = [manifest.iterations[0], manifest.iterations[-1]]
    for fid, fdoc in report["filters"].items():
        for entry in edge_entries:
            pos = iterations.index(entry.t)
            for cat, cdoc in fdoc["categories"].items():
                hist = histogram_from_json(cdoc["histograms"][pos])
                write_histogram_csv(out / "hists" / f"{fid}_t{entry.t}_{cat}.csv", hist)
                exemplar = _exemplar_map(entry, fid, cat, dataset, config)
                bc = betti_curves_of(
                    symmetrize_max(exemplar),
                    k_max=config.k,
                    ordering=config.ordering,
                    guard=config.guard,
                    budget=config.budget,
                )
                write_curve_csv(out / "curves" / f"{fid}_t{entry.t}_{cat}.csv", bc)
        series = {
            cat: ([float(t) for t in iterations], cdoc["entropies"])
            for cat, cdoc in fdoc["categories"].items()
        }
        plots.save_entropy_series(series, out / "figs" / f"{fid}_entropy.png", title=f"filter {fid}")
    scores = {fid: fdoc["score"] for fid, fdoc in report["filters"].items()}
    plots.save_score_bars(scores, out / "figs" / "prune_rank.png")
    return out


def _exemplar_map(entry, fid, cat, dataset, config) -> np.ndarray:
    if fid in entry.feature_maps:
        stack = read_tensor(entry.feature_maps[fid][cat])
        return stack[0] if stack.ndim == 3 else stack
    kernel = read_tensor(entry.filters[fid])
    return convolve(dataset.images_for(cat, 1)[0], kernel)


def write_cdmatrix_outputs(report: dict, dataset: Dataset, out_dir) -> Path:
    """Emit report.json, MBC histograms, the CD matrix, degrees, and figures."""
    from . import plots

    out = Path(out_dir)
    (out / "hists").mkdir(parents=True, exist_ok=True)
    (out / "curves").mkdir(exist_ok=True)
    (out / "figs").mkdir(exist_ok=True)
    save_report(report, out / "report.json")

    config = _config_from_json(report["config"])
    cats = report["categories"]
    for cat in cats:
        hist = histogram_from_json(report["histograms"][cat])
        write_histogram_csv(out / "hists" / f"mbc_{cat}.csv", hist)
        plots.save_histogram(hist, out / "figs" / f"mbc_{cat}.png", title=f"category {cat}", xlabel="max of Betti curve")
        exemplar = dataset.images_for(cat, 1)[0]
        bc = betti_curves_of(
            symmetrize_add(exemplar), k_max=config.k, ordering=config.ordering, guard=config.guard, budget=config.budget
        )
        write_curve_csv(out / "curves" / f"{cat}.csv", bc)
    values = np.asarray(report["cd_matrix"])
    write_matrix(out / "cd_matrix.csv", values)
    degrees = [report["distinguishable_degrees"][cat] for cat in cats]
    (out / "degrees.csv").write_text(
        "category,degree\n" + "\n".join(f"{c},{d:.17g}" for c, d in zip(cats, degrees)) + "\n"
    )
    plots.save_cd_heatmap(cats, values, out / "figs" / "cd_matrix.png")
    plots.save_degree_bars(cats, degrees, out / "figs" / "degrees.png")
    return out


def _config_from_json(doc: dict) -> RunConfig:
    return RunConfig(
        k=doc["k"],
        ordering=doc["ordering"],
        bin_width=doc["bin_width"],
        guard=doc["guard"],
        budget=doc["budget"],
        seed=doc["seed"],
        categories=tuple(doc["categories"]) if doc.get("categories") else None,
        per_class=doc.get("per_class"),
    )
