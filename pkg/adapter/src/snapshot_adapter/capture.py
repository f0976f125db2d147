"""Snapshot capture: extract conv filters during training, write TFL1 + manifest.

The manifest JSON follows the analysis toolkit's schema exactly (strictly
increasing iterations, per-filter tensor paths relative to the manifest) so
an `assess` run can consume the output directory as-is.
"""

from __future__ import annotations

import gzip
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .tfl1 import write_tensor


class AdapterError(Exception):
    pass


class DivergenceError(AdapterError):
    """Training produced a non-finite loss; a flagged partial manifest was written."""


@dataclass
class ExtractionConfig:
    out_dir: Path
    layer: str = "conv1"
    activation: str = "pre"  # "pre" or "post": conv output before/after ReLU
    categories: tuple | None = None  # labels whose feature maps get dumped
    dump_feature_maps: bool = False

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if self.activation not in ("pre", "post"):
            raise AdapterError(f"activation must be 'pre' or 'post', got {self.activation!r}")


class ManifestWriter:
    """Accumulates iteration entries and writes the manifest JSON."""

    def __init__(self, out_dir, metadata: dict | None = None):
        self.out_dir = Path(out_dir)
        self.metadata = dict(metadata or {})
        self.entries: list = []

    def add(self, entry: dict) -> None:
        t = entry["t"]
        if self.entries and t <= self.entries[-1]["t"]:
            raise AdapterError(
                f"iteration {t} is not after the last recorded iteration {self.entries[-1]['t']}"
            )
        self.entries.append(entry)

    def write(self, partial: bool = False) -> Path:
        doc = {"metadata": dict(self.metadata), "iterations": self.entries}
        if partial:
            doc["metadata"]["partial"] = True
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path


def _resolve_conv(model: nn.Module, layer: str) -> nn.Conv2d:
    modules = dict(model.named_modules())
    if layer not in modules:
        raise AdapterError(f"unknown layer {layer!r}; model has {sorted(k for k in modules if k)}")
    mod = modules[layer]
    if not isinstance(mod, nn.Conv2d):
        raise AdapterError(f"layer {layer!r} is {type(mod).__name__}, not a 2-D convolution")
    if mod.in_channels != 1:
        raise AdapterError(
            f"layer {layer!r} takes {mod.in_channels} input channels; only single-channel "
            "2-D kernels map to the per-filter analysis"
        )
    return mod


def dump_snapshot(
    model: nn.Module,
    iteration: int,
    config: ExtractionConfig,
    writer: ManifestWriter,
    images_by_category: dict | None = None,
) -> dict:
    """Write one iteration's kernels (and optional feature maps) and record it.

    Returns the manifest entry.  Tensor paths are relative to the manifest
    directory; weights are exported as float64.
    """
    conv = _resolve_conv(model, config.layer)
    snap_dir = config.out_dir / f"iter{iteration:06d}"
    snap_dir.mkdir(parents=True, exist_ok=True)
    weights = conv.weight.detach().cpu().double().numpy()  # (out, 1, h, w)

    entry: dict = {"t": iteration, "filters": {}}
    for idx in range(weights.shape[0]):
        fid = f"f{idx}"
        rel = f"iter{iteration:06d}/{fid}.tfl1"
        write_tensor(config.out_dir / rel, weights[idx, 0])
        entry["filters"][fid] = rel

    if config.dump_feature_maps:
        if not images_by_category:
            raise AdapterError("feature-map dumps need images_by_category")
        entry["feature_maps"] = {}
        with torch.no_grad():
            for idx in range(weights.shape[0]):
                fid = f"f{idx}"
                entry["feature_maps"][fid] = {}
                for cat, images in sorted(images_by_category.items()):
                    batch = torch.as_tensor(np.stack(images), dtype=torch.get_default_dtype())
                    out = conv(batch[:, None, :, :])
                    if config.activation == "post":
                        out = torch.relu(out)
                    stack = out[:, idx].cpu().double().numpy()
                    rel = f"iter{iteration:06d}/{fid}_cat{cat}.tfl1"
                    write_tensor(config.out_dir / rel, stack)
                    entry["feature_maps"][fid][str(cat)] = rel

    writer.add(entry)
    return entry


# ---------------------------------------------------------------------------
# dataset + training loop


def load_idx_pair(images_path, labels_path) -> tuple:
    """Read the classic big-endian u8 IDX image/label pair."""

    def read(path, magic, head):
        data = Path(path).read_bytes()
        if str(path).endswith(".gz"):
            data = gzip.decompress(data)
        words = struct.unpack(f">{head}I", data[: 4 * head])
        if words[0] != magic:
            raise AdapterError(f"{path}: bad IDX magic 0x{words[0]:08x}")
        return words, data[4 * head :]

    (_, count, rows, cols), img_payload = read(images_path, 0x00000803, 4)
    images = np.frombuffer(img_payload, dtype=np.uint8).reshape(count, rows, cols)
    (_, n_labels), lab_payload = read(labels_path, 0x00000801, 2)
    labels = np.frombuffer(lab_payload, dtype=np.uint8)
    if n_labels != count:
        raise AdapterError(f"image/label count mismatch: {count} vs {n_labels}")
    return images.astype(np.float32) / 255.0, labels.astype(np.int64)


def _capture_steps(cadence, n_batches: int) -> set:
    # steps count completed updates: 0 is the scratch state, n_batches the
    # fully trained one; both endpoints are always captured
    if isinstance(cadence, int):
        if cadence < 1:
            raise AdapterError(f"cadence must be >= 1, got {cadence}")
        steps = set(range(0, n_batches + 1, cadence))
    else:
        steps = {n_batches if s == -1 else int(s) for s in cadence}
        bad = {s for s in steps if not 0 <= s <= n_batches}
        if bad:
            raise AdapterError(f"cadence steps {sorted(bad)} outside 0..{n_batches}")
    steps.update({0, n_batches})
    return steps


def run_training_capture(
    images: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    cadence,
    config: ExtractionConfig,
    batch_size: int = 256,
    lr: float = 0.05,
    seed: int = 0,
    max_batches: int | None = None,
) -> Path:
    """Train the reference net, dumping snapshots at the given batch cadence.

    Iterations count completed updates, so t=0 is the scratch network and
    t=N the fully trained one; both are always captured.  ``cadence`` is an
    int (every n updates) or an iterable of update counts (-1 means the
    last).  A non-finite loss aborts training, writes the manifest flagged
    as partial, and raises DivergenceError.  Returns the manifest path.
    """
    if len(images) == 0:
        raise AdapterError("empty dataset")
    from .model import LeNet

    torch.manual_seed(seed)
    model = LeNet(n_classes=int(labels.max()) + 1)
    optimizer = torch.optim.SGD(model.parameters(), lr=lr, momentum=0.9)
    loss_fn = nn.CrossEntropyLoss()

    n = len(images)
    per_epoch = (n + batch_size - 1) // batch_size
    n_batches = per_epoch * epochs
    if max_batches is not None:
        n_batches = min(n_batches, max_batches)
    steps = _capture_steps(cadence, n_batches)

    writer = ManifestWriter(
        config.out_dir,
        metadata={
            "layer": config.layer,
            "activation": config.activation,
            "optimizer": "sgd",
            "lr": lr,
            "momentum": 0.9,
            "batch_size": batch_size,
            "seed": seed,
        },
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)

    images_by_cat = None
    if config.dump_feature_maps:
        cats = config.categories or sorted(set(labels.tolist()))
        images_by_cat = {int(c): images[labels == int(c)] for c in cats}

    rng = np.random.default_rng(seed)
    x_all = torch.as_tensor(images, dtype=torch.get_default_dtype())[:, None, :, :]
    y_all = torch.as_tensor(labels)

    step = 0
    model.train()
    dump_snapshot(model, 0, config, writer, images_by_cat)
    for _ in range(epochs):
        if step >= n_batches:
            break
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            if step >= n_batches:
                break
            idx = order[start : start + batch_size]
            optimizer.zero_grad()
            loss = loss_fn(model(x_all[idx]), y_all[idx])
            if not torch.isfinite(loss):
                writer.write(partial=True)
                raise DivergenceError(f"non-finite loss at update {step}; partial manifest flagged")
            loss.backward()
            optimizer.step()
            step += 1
            if step in steps:
                dump_snapshot(model, step, config, writer, images_by_cat)
    return writer.write()
