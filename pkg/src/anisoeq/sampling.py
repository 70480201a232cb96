"""Deterministic low-discrepancy sample sets on an axis-aligned box."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

UNIT_BOX = ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


@dataclass(frozen=True)
class SampleSet:
    """Scrambled Halton points in ``box``, skipping excluded points.

    Regenerating with the same parameters yields bit-identical points.
    """

    box: tuple = UNIT_BOX
    count: int = 10_000
    exclusion: Optional[Callable[[np.ndarray], np.ndarray]] = None
    seed: int = 20020101
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = (tuple(float(v) for v in b) for b in self.box)
        if len(lo) != 3 or len(hi) != 3 or not all(a < b for a, b in zip(lo, hi)):
            raise ValueError(f"invalid box {self.box!r}")
        if int(self.count) <= 0:
            raise ValueError("count must be positive")
        object.__setattr__(self, "box", (lo, hi))
        object.__setattr__(self, "count", int(self.count))

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.box[0])

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.box[1])

    def points(self) -> np.ndarray:
        if "pts" not in self._cache:
            self._cache["pts"] = self._generate()
        return self._cache["pts"].copy()

    def _generate(self) -> np.ndarray:
        engine = qmc.Halton(d=3, scramble=True, seed=self.seed)
        lo, hi = self.lower, self.upper
        kept = []
        have = 0
        for _ in range(10_000):
            if have >= self.count:
                break
            batch = qmc.scale(engine.random(max(self.count - have, 64)), lo, hi)
            if self.exclusion is not None:
                batch = batch[~np.asarray(self.exclusion(batch), dtype=bool)]
            kept.append(batch)
            have += batch.shape[0]
        else:
            raise ValueError("exclusion predicate rejects (almost) the whole box")
        return np.concatenate(kept)[: self.count]

    def with_count(self, count: int) -> "SampleSet":
        return SampleSet(self.box, count, self.exclusion, self.seed)

    def diagonal(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))
