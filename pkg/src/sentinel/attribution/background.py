"""Reference distribution for marginalization and perturbation scaling."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyBackground, ParseError


@dataclass(frozen=True)
class BackgroundSet:
    vectors: np.ndarray  # (n, d) float64
    schema_version: int

    def __post_init__(self):
        if self.vectors.ndim != 2 or len(self.vectors) == 0:
            raise EmptyBackground("background set must hold at least one vector")

    @property
    def mean(self) -> np.ndarray:
        return self.vectors.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.vectors.std(axis=0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": self.schema_version,
                "vectors": [[float(v) for v in row] for row in self.vectors],
            },
            sort_keys=True,
            separators=(",", ":"),
        )


def background_from_json(data: str | bytes) -> BackgroundSet:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"background file is not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "vectors" not in doc or "schema_version" not in doc:
        raise ParseError("background file needs 'schema_version' and 'vectors'")
    vectors = np.asarray(doc["vectors"], dtype=np.float64)
    if vectors.ndim != 2 or len(vectors) == 0:
        raise EmptyBackground("background file holds no vectors")
    return BackgroundSet(vectors=vectors, schema_version=int(doc["schema_version"]))


def reservoir_background(
    vectors: np.ndarray, schema_version: int, size: int = 100, seed: int = 0
) -> BackgroundSet:
    """Seeded reservoir sample of up to `size` rows, preserving encounter order."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if len(vectors) == 0:
        raise EmptyBackground("cannot sample a background from no data")
    rng = np.random.default_rng(seed)
    reservoir: list[int] = []
    for i in range(len(vectors)):
        if i < size:
            reservoir.append(i)
        else:
            j = int(rng.integers(0, i + 1))
            if j < size:
                reservoir[j] = i
    return BackgroundSet(vectors=vectors[np.asarray(reservoir)], schema_version=schema_version)
