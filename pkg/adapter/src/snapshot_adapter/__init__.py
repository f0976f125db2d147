"""Training-snapshot exporter: filter kernels and feature maps to TFL1 + manifest."""

from .capture import (
    AdapterError,
    DivergenceError,
    ExtractionConfig,
    ManifestWriter,
    dump_snapshot,
    run_training_capture,
)
from .model import LeNet

__version__ = "0.1.0"
