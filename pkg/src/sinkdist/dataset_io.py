"""IDX image/label ingestion and CSV experiment records.

IDX layout: a big-endian header of 4-byte words (magic, then one count/dim
word per dimension) followed by unsigned-byte payload. Images use magic
0x00000803 with dims (count, rows, cols); labels use 0x00000801 with (count).
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .histograms import Histogram, image_to_histogram

__all__ = [
    "IdxFormatError",
    "read_idx_images",
    "read_idx_labels",
    "write_idx_images",
    "write_idx_labels",
    "ExperimentRecord",
    "write_results_csv",
    "read_results_csv",
    "LabeledHistogramSet",
    "center_crop",
    "load_labeled_histograms",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

CSV_HEADER = "experiment,dimension,lambda,method,seed,value,wall_time_ms,iterations"

logger = logging.getLogger(__name__)


class IdxFormatError(ValueError):
    """Raised when an IDX file is malformed or of the wrong kind."""


def _read_words(data: bytes, count: int, path) -> tuple[int, ...]:
    need = 4 * count
    if len(data) < need:
        raise IdxFormatError(f"{path}: truncated header, {len(data)} bytes < {need}")
    return struct.unpack(f">{count}I", data[:need])


def read_idx_images(path) -> list[np.ndarray]:
    """Parse an IDX image file into a list of (rows, cols) uint8 grids."""
    data = Path(path).read_bytes()
    (magic,) = _read_words(data, 1, path)
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x} for images"
        )
    _, count, rows, cols = _read_words(data, 4, path)
    expected = 16 + count * rows * cols
    if len(data) != expected:
        raise IdxFormatError(
            f"{path}: payload size mismatch, expected {expected} bytes, got {len(data)}"
        )
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16)
    return list(pixels.reshape(count, rows, cols))


def read_idx_labels(path) -> list[int]:
    """Parse an IDX label file into a list of small integers."""
    data = Path(path).read_bytes()
    (magic,) = _read_words(data, 1, path)
    if magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"{path}: bad magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x} for labels"
        )
    _, count = _read_words(data, 2, path)
    expected = 8 + count
    if len(data) != expected:
        raise IdxFormatError(
            f"{path}: payload size mismatch, expected {expected} bytes, got {len(data)}"
        )
    return [int(b) for b in data[8:]]


def write_idx_images(path, grids) -> None:
    """Serialize uint8 grids to the IDX image layout (all same shape)."""
    grids = [np.asarray(g, dtype=np.uint8) for g in grids]
    if not grids:
        raise ValueError("need at least one image")
    rows, cols = grids[0].shape
    out = bytearray(struct.pack(">4I", IMAGE_MAGIC, len(grids), rows, cols))
    for g in grids:
        if g.shape != (rows, cols):
            raise ValueError("all images must share one shape")
        out += g.tobytes()
    Path(path).write_bytes(bytes(out))


def write_idx_labels(path, labels) -> None:
    """Serialize integer labels (0..255) to the IDX label layout."""
    payload = bytes(int(v) for v in labels)
    Path(path).write_bytes(struct.pack(">2I", LABEL_MAGIC, len(payload)) + payload)


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of experiment output; empty fields are carried as None."""

    experiment: str
    dimension: int
    lam: float | None
    method: str
    seed: int
    value: float
    wall_time_ms: float
    iterations: int | None

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"record value must be finite, got {self.value!r}")
        if self.wall_time_ms < 0:
            raise ValueError("wall time cannot be negative")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".9g")
    return str(x)


def write_results_csv(records, path) -> None:
    """Write records in input order with a fixed header; 9 significant digits.

    Two calls with equal records produce byte-identical files.
    """
    lines = [CSV_HEADER]
    for rec in records:
        lines.append(
            ",".join(
                [
                    rec.experiment,
                    str(rec.dimension),
                    _fmt(rec.lam),
                    rec.method,
                    str(rec.seed),
                    _fmt(float(rec.value)),
                    _fmt(float(rec.wall_time_ms)),
                    _fmt(rec.iterations),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_results_csv(path) -> list[ExperimentRecord]:
    """Inverse of write_results_csv, for round-trip checks and analysis."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or unexpected header")
    records = []
    for line in lines[1:]:
        if not line:
            continue
        exp, dim, lam, method, seed, value, wall, iters = line.split(",")
        records.append(
            ExperimentRecord(
                experiment=exp,
                dimension=int(dim),
                lam=float(lam) if lam else None,
                method=method,
                seed=int(seed),
                value=float(value),
                wall_time_ms=float(wall),
                iterations=int(iters) if iters else None,
            )
        )
    return records


@dataclass(frozen=True)
class LabeledHistogramSet:
    """Histograms with class labels plus provenance of the ingestion."""

    histograms: list[Histogram]
    labels: list[int]
    source: str
    skipped_indices: tuple[int, ...] = ()
    grid_shape: tuple[int, int] | None = None

    def __post_init__(self):
        if len(self.histograms) != len(self.labels):
            raise ValueError("histogram and label counts differ")

    def __len__(self) -> int:
        return len(self.histograms)


def center_crop(grid: np.ndarray, size: int) -> np.ndarray:
    """Central size x size window of a grid (no-op when already that small)."""
    rows, cols = grid.shape
    if rows <= size and cols <= size:
        return grid
    r0 = max((rows - size) // 2, 0)
    c0 = max((cols - size) // 2, 0)
    return grid[r0 : r0 + min(size, rows), c0 : c0 + min(size, cols)]


def load_labeled_histograms(
    images_path, labels_path, crop_to: int | None = 20
) -> LabeledHistogramSet:
    """Ingest IDX images and labels into normalized histograms.

    Images larger than ``crop_to`` are center-cropped to that square first
    (pass None to keep native dimensions). Blank images cannot be normalized;
    they are skipped, counted in ``skipped_indices`` and logged, never
    silently dropped.
    """
    grids = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(grids) != len(labels):
        raise IdxFormatError(
            f"{images_path} has {len(grids)} images but {labels_path} has {len(labels)} labels"
        )
    histograms: list[Histogram] = []
    kept_labels: list[int] = []
    skipped: list[int] = []
    shape = None
    for idx, (grid, label) in enumerate(zip(grids, labels)):
        if crop_to is not None:
            grid = center_crop(grid, crop_to)
        shape = grid.shape
        if grid.sum() == 0:
            skipped.append(idx)
            continue
        histograms.append(image_to_histogram(grid))
        kept_labels.append(label)
    if skipped:
        logger.warning("skipped %d blank images at indices %s", len(skipped), skipped[:20])
    return LabeledHistogramSet(
        histograms=histograms,
        labels=kept_labels,
        source=f"idx:{images_path}",
        skipped_indices=tuple(skipped),
        grid_shape=shape,
    )
