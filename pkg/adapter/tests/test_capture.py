import json

import numpy as np
import pytest
import torch

from snapshot_adapter import (
    AdapterError,
    DivergenceError,
    ExtractionConfig,
    LeNet,
    ManifestWriter,
    dump_snapshot,
    run_training_capture,
)
from snapshot_adapter.tfl1 import read_tensor


def synthetic_data(count=64, seed=0):
    rng = np.random.default_rng(seed)
    images = rng.random((count, 28, 28)).astype(np.float32)
    labels = (rng.integers(0, 2, size=count)).astype(np.int64)
    return images, labels


class TestDumpSnapshot:
    def test_lenet_conv1_gives_six_5x5_tensors(self, tmp_path):
        torch.manual_seed(0)
        model = LeNet()
        config = ExtractionConfig(out_dir=tmp_path)
        writer = ManifestWriter(tmp_path)
        entry = dump_snapshot(model, 0, config, writer)
        assert sorted(entry["filters"]) == [f"f{i}" for i in range(6)]
        for rel in entry["filters"].values():
            assert read_tensor(tmp_path / rel).shape == (5, 5)

    def test_duplicate_iteration_rejected(self, tmp_path):
        model = LeNet()
        config = ExtractionConfig(out_dir=tmp_path)
        writer = ManifestWriter(tmp_path)
        dump_snapshot(model, 3, config, writer)
        with pytest.raises(AdapterError, match="not after"):
            dump_snapshot(model, 3, config, writer)

    def test_unknown_layer(self, tmp_path):
        with pytest.raises(AdapterError, match="unknown layer"):
            dump_snapshot(LeNet(), 0, ExtractionConfig(out_dir=tmp_path, layer="conv9"), ManifestWriter(tmp_path))

    def test_non_conv_layer(self, tmp_path):
        with pytest.raises(AdapterError, match="not a 2-D convolution"):
            dump_snapshot(LeNet(), 0, ExtractionConfig(out_dir=tmp_path, layer="fc1"), ManifestWriter(tmp_path))

    def test_multichannel_conv_rejected(self, tmp_path):
        with pytest.raises(AdapterError, match="input channels"):
            dump_snapshot(LeNet(), 0, ExtractionConfig(out_dir=tmp_path, layer="conv2"), ManifestWriter(tmp_path))

    def test_weights_exported_float64_bitexact(self, tmp_path):
        torch.manual_seed(1)
        model = LeNet()
        config = ExtractionConfig(out_dir=tmp_path)
        entry = dump_snapshot(model, 0, config, ManifestWriter(tmp_path))
        want = model.conv1.weight.detach().double().numpy()
        for idx in range(6):
            got = read_tensor(tmp_path / entry["filters"][f"f{idx}"])
            assert got.tobytes() == want[idx, 0].tobytes()

    def test_feature_map_stacks(self, tmp_path):
        torch.manual_seed(2)
        model = LeNet()
        images, labels = synthetic_data(8)
        config = ExtractionConfig(out_dir=tmp_path, dump_feature_maps=True)
        by_cat = {0: images[labels == 0], 1: images[labels == 1]}
        entry = dump_snapshot(model, 0, config, ManifestWriter(tmp_path), by_cat)
        stack = read_tensor(tmp_path / entry["feature_maps"]["f0"]["0"])
        assert stack.shape == (int((labels == 0).sum()), 24, 24)


class TestTrainingCapture:
    def test_first_and_last_cadence(self, tmp_path):
        images, labels = synthetic_data(48)
        config = ExtractionConfig(out_dir=tmp_path / "snaps")
        manifest = run_training_capture(images, labels, epochs=1, cadence=[0, -1], config=config, batch_size=16)
        doc = json.loads(manifest.read_text())
        assert [e["t"] for e in doc["iterations"]] == [0, 3]
        assert doc["metadata"]["layer"] == "conv1"
        assert "partial" not in doc["metadata"]

    def test_every_batch_cadence(self, tmp_path):
        images, labels = synthetic_data(40)
        config = ExtractionConfig(out_dir=tmp_path / "snaps")
        manifest = run_training_capture(images, labels, epochs=1, cadence=1, config=config, batch_size=10)
        doc = json.loads(manifest.read_text())
        assert [e["t"] for e in doc["iterations"]] == [0, 1, 2, 3, 4]

    def test_empty_dataset_rejected(self, tmp_path):
        with pytest.raises(AdapterError, match="empty"):
            run_training_capture(
                np.zeros((0, 28, 28), dtype=np.float32),
                np.zeros(0, dtype=np.int64),
                epochs=1,
                cadence=1,
                config=ExtractionConfig(out_dir=tmp_path),
            )

    def test_divergence_flags_partial_manifest(self, tmp_path):
        images, labels = synthetic_data(48, seed=3)
        images = images * 1e30  # blows the loss up to inf within a few updates
        config = ExtractionConfig(out_dir=tmp_path / "snaps")
        with pytest.raises(DivergenceError):
            run_training_capture(
                images, labels, epochs=2, cadence=1, config=config, batch_size=16, lr=1e6
            )
        doc = json.loads((tmp_path / "snaps" / "manifest.json").read_text())
        assert doc["metadata"]["partial"] is True
