"""Dataset generation, CSV ingestion, splitting and heterogeneity partitioners."""

import csv
import hashlib
import math
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from app.models.dataset import Dataset, NodeData, PartitionMode
from app.models.simulation import CsvSource, SyntheticSource
from app.utils.errors import DataValidationError, EmptyDatasetError, PartitionError
from app.utils.logging import StructuredLogger
from app.utils.rng import derive_seed, make_rng

logger = StructuredLogger("data_service")

TRAIN_FRACTION = 0.8


def _centroids(num_classes: int, dim: int, separation: float,
               rng: np.random.Generator) -> np.ndarray:
    if num_classes <= dim:
        # scaled orthonormal directions: every pair sits exactly `separation` apart
        basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
        scale = separation / math.sqrt(2.0) * (1.0 + 1e-9)
        return scale * basis[:, :num_classes].T

    spread = separation * num_classes ** (1.0 / dim)
    while True:
        points: List[np.ndarray] = []
        for _ in range(num_classes):
            for _attempt in range(1000):
                candidate = rng.uniform(-spread, spread, size=dim)
                if all(np.linalg.norm(candidate - p) >= separation for p in points):
                    points.append(candidate)
                    break
            else:
                break
        if len(points) == num_classes:
            return np.stack(points)
        spread *= 1.5


def generate_synthetic(num_classes: int, dim: int, per_class: int, separation: float,
                       seed: int) -> Dataset:
    """Gaussian class blobs with unit variance and well-separated centroids."""
    if num_classes < 2:
        raise DataValidationError("num_classes must be at least 2", field_name="num_classes",
                                  field_value=num_classes)
    if per_class < 2:
        raise DataValidationError("per_class must be at least 2", field_name="per_class",
                                  field_value=per_class)
    if dim < 1:
        raise DataValidationError("dim must be positive", field_name="dim", field_value=dim)
    if not separation > 0:
        raise DataValidationError("separation must be positive", field_name="separation",
                                  field_value=separation)

    rng = np.random.default_rng(seed)
    centroids = _centroids(num_classes, dim, separation, rng)
    labels = np.repeat(np.arange(num_classes), per_class)
    features = centroids[labels] + rng.standard_normal((labels.size, dim))
    return Dataset(features, labels, num_classes)


def load_csv(path: Union[str, Path], num_classes: Optional[int] = None) -> Dataset:
    """Read `f0,...,f{d-1},label` rows; errors name the offending line."""
    source = Path(path)
    try:
        handle = source.open("r", encoding="utf-8", newline="")
    except OSError as e:
        raise DataValidationError(f"Cannot open CSV file: {e}", field_name="path",
                                  field_value=str(source)) from e

    rows: List[List[float]] = []
    labels: List[int] = []
    with handle:
        reader = csv.reader(handle, delimiter=",", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            raise DataValidationError("CSV file is empty", line_number=1)
        dim = len(header) - 1
        expected = [f"f{i}" for i in range(dim)] + ["label"]
        if dim < 1 or [h.strip() for h in header] != expected:
            raise DataValidationError(
                "CSV header must be f0,...,f{d-1},label", field_name="header", line_number=1
            )

        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != dim + 1:
                raise DataValidationError(
                    f"Line {line_number}: expected {dim + 1} columns, found {len(row)}",
                    line_number=line_number,
                )
            try:
                values = [float(cell) for cell in row[:dim]]
            except ValueError as e:
                raise DataValidationError(f"Line {line_number}: malformed feature value ({e})",
                                          line_number=line_number) from e
            if not all(math.isfinite(v) for v in values):
                raise DataValidationError(f"Line {line_number}: non-finite feature value",
                                          line_number=line_number)
            try:
                label = int(row[dim].strip(), 10)
            except ValueError as e:
                raise DataValidationError(f"Line {line_number}: label is not an integer",
                                          field_name="label", field_value=row[dim],
                                          line_number=line_number) from e
            if label < 0 or (num_classes is not None and label >= num_classes):
                raise DataValidationError(
                    f"Line {line_number}: label {label} outside [0, {num_classes})",
                    field_name="label", field_value=label, line_number=line_number,
                )
            rows.append(values)
            labels.append(label)

    classes = num_classes if num_classes is not None else max(2, max(labels, default=0) + 1)
    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), dim)
    logger.info("📥 CSV dataset loaded", path=str(source), rows=len(rows), dim=dim,
                num_classes=classes)
    return Dataset(features, np.asarray(labels, dtype=np.int64), classes)


def load_source(source: Union[SyntheticSource, CsvSource], master_seed: int) -> Dataset:
    """Materialize a configured dataset source."""
    if isinstance(source, CsvSource):
        return load_csv(source.path, source.num_classes)
    seed = source.seed if source.seed is not None else derive_seed(master_seed, "dataset")
    return generate_synthetic(source.num_classes, source.dim, source.per_class,
                              source.separation, seed)


def label_histogram(data: Dataset) -> np.ndarray:
    """Class frequencies over num_classes, summing to 1."""
    if data.n == 0:
        raise EmptyDatasetError("Cannot build a histogram of an empty dataset")
    return np.bincount(data.labels, minlength=data.num_classes).astype(np.float64) / data.n


def train_test_split(data: Dataset, train_fraction: float = TRAIN_FRACTION,
                     seed: int = 0) -> NodeData:
    """Stratified split: each class keeps round(train_fraction * n_c) rows for training."""
    rng = np.random.default_rng(seed)
    train_rows: List[np.ndarray] = []
    test_rows: List[np.ndarray] = []
    for cls in range(data.num_classes):
        rows = np.flatnonzero(data.labels == cls)
        if rows.size == 0:
            continue
        rows = rng.permutation(rows)
        n_train = int(math.floor(train_fraction * rows.size + 0.5))
        train_rows.append(rows[:n_train])
        test_rows.append(rows[n_train:])

    def gather(parts: List[np.ndarray]) -> np.ndarray:
        return np.sort(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)

    return NodeData(train=data.subset(gather(train_rows)), test=data.subset(gather(test_rows)))


def _class_shards(data: Dataset, mode: PartitionMode, rng: np.random.Generator) -> List[np.ndarray]:
    c, k = data.num_classes, mode.k
    if c % k != 0:
        raise PartitionError(f"{c} classes cannot be split evenly across {k} participants",
                             mode=mode.mode, k=k)
    per_node = c // k
    order = rng.permutation(c)
    shards = []
    for i in range(k):
        owned = order[i * per_node:(i + 1) * per_node]
        shards.append(np.flatnonzero(np.isin(data.labels, owned)))
    return shards


def _homogeneous_shards(data: Dataset, mode: PartitionMode,
                        rng: np.random.Generator) -> List[np.ndarray]:
    k = mode.k
    parts: List[List[np.ndarray]] = [[] for _ in range(k)]
    for cls in range(data.num_classes):
        rows = rng.permutation(np.flatnonzero(data.labels == cls))
        for j, chunk in enumerate(np.array_split(rows, k)):
            # rotate so the larger chunks do not always land on the same node
            parts[(j + cls) % k].append(chunk)
    return [np.concatenate(p) if p else np.zeros(0, dtype=np.int64) for p in parts]


def _modest_shards(data: Dataset, mode: PartitionMode, rng: np.random.Generator) -> List[np.ndarray]:
    c, k, fraction = data.num_classes, mode.k, mode.majority_fraction
    per_node = max(1, c // k)
    pools: Dict[int, List[int]] = {
        cls: list(rng.permutation(np.flatnonzero(data.labels == cls))) for cls in range(c)
    }
    sizes = [len(chunk) for chunk in np.array_split(np.arange(data.n), k)]

    majority: List[List[int]] = []
    for i in range(k):
        designated = [(i * per_node + j) % c for j in range(per_node)]
        wanted = math.ceil(fraction * sizes[i] - 1e-9)
        taken: List[int] = []
        while len(taken) < wanted:
            progressed = False
            for cls in designated:
                if len(taken) == wanted:
                    break
                if pools[cls]:
                    taken.append(pools[cls].pop())
                    progressed = True
            if not progressed:
                raise PartitionError(
                    f"Not enough rows in classes {designated} for participant {i}",
                    mode=mode.mode, k=k,
                )
        majority.append(taken)

    leftover = rng.permutation(np.asarray(
        [row for cls in range(c) for row in pools[cls]], dtype=np.int64
    ))
    shards = []
    offset = 0
    for i in range(k):
        extra = sizes[i] - len(majority[i])
        shards.append(np.concatenate([np.asarray(majority[i], dtype=np.int64),
                                      leftover[offset:offset + extra]]))
        offset += extra
    return shards


def partition_indices(data: Dataset, mode: PartitionMode, seed: int) -> List[np.ndarray]:
    """Row indices per participant; a set partition of range(n)."""
    if data.n == 0:
        raise EmptyDatasetError("Cannot partition an empty dataset")
    rng = make_rng(seed, "partition")
    if mode.mode in ("extreme", "severe"):
        shards = _class_shards(data, mode, rng)
    elif mode.mode == "homogeneous":
        shards = _homogeneous_shards(data, mode, rng)
    else:
        shards = _modest_shards(data, mode, rng)

    shards = [np.sort(s.astype(np.int64)) for s in shards]
    for i, shard in enumerate(shards):
        if shard.size == 0:
            raise PartitionError(f"Participant {i} received no rows", mode=mode.mode, k=mode.k)
    return shards


def partition(data: Dataset, mode: PartitionMode, seed: int) -> List[NodeData]:
    """Split into k participant shards, each divided 80/20 train/test by class."""
    shards = partition_indices(data, mode, seed)
    nodes = [
        train_test_split(data.subset(rows), TRAIN_FRACTION, derive_seed(seed, "split", i))
        for i, rows in enumerate(shards)
    ]
    logger.info(
        "🧩 Dataset partitioned",
        mode=mode.mode,
        k=mode.k,
        shard_sizes=[int(s.size) for s in shards],
    )
    return nodes


def dataset_fingerprint(data: Dataset) -> str:
    """Content hash used to tell datasets apart when comparing runs."""
    digest = hashlib.sha256()
    digest.update(str((data.n, data.dim, data.num_classes)).encode("utf-8"))
    digest.update(np.ascontiguousarray(data.features).tobytes())
    digest.update(np.ascontiguousarray(data.labels).tobytes())
    return digest.hexdigest()
