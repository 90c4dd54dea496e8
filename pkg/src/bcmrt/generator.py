"""Sampling of balanced two-community recursive trees.

A tree of size 2n is a deterministic function of 2(n-1) independent record
pairs, one per arriving node: a cross-type coin with success probability q
and a uniform time label for the parent.  Histories store those records
explicitly so that single records can be resampled (the one-coordinate
perturbation used in variance experiments) without touching the rest.

Randomness comes from counter-based Philox streams: ``sample_history`` is a
pure function of (n, q, seed), and ``split_seed`` derives per-replicate
seeds from a master seed and a replicate index, so campaigns produce the
same trees regardless of how replicates are scheduled across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.random import Generator, Philox

from .errors import ParameterError
from .tree import TimeLabelledTree

_MASK64 = (1 << 64) - 1


def split_seed(master_seed: int, index: int) -> int:
    """Seed of the ``index``-th replicate stream of ``master_seed``.

    Counter-based: the pair (master_seed, index) keys a Philox block whose
    first word is returned, so any single replicate can be regenerated in
    isolation."""
    g = Generator(Philox(key=[master_seed & _MASK64, index & _MASK64]))
    return int(g.integers(0, 1 << 64, dtype=np.uint64))


class AttachmentRecord(NamedTuple):
    cross: int  # 1 = attach to the other type
    u: int  # time label of the parent, uniform on 1..t-1


@dataclass(frozen=True)
class GenerationHistory:
    """Full random source of one tree.

    ``cross[i]`` and ``u[i]`` hold the record of arriving node i, in the
    order (2,A), (2,B), (3,A), (3,B), ..., (n,A), (n,B).
    """

    n: int
    q: float
    seed: int
    cross: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("cross", "u"):
            arr = np.ascontiguousarray(getattr(self, name))
            if arr.shape != (2 * (self.n - 1),):
                raise ParameterError(
                    f"{name} must have length {2 * (self.n - 1)}"
                )
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def record_index(t: int, kind: int) -> int:
        return 2 * (t - 2) + kind

    def record(self, t: int, kind: int) -> AttachmentRecord:
        i = self.record_index(t, kind)
        return AttachmentRecord(int(self.cross[i]), int(self.u[i]))


def sample_history(n: int, q: float, seed: int) -> GenerationHistory:
    """Draw the 2(n-1) attachment records of a size-2n tree.

    Cross coins are Bernoulli(q); parent labels are uniform on {1, ..., t-1}
    drawn with unbiased bounded-integer rejection.  Deterministic given the
    seed: the coins are drawn first as one block, then the parent labels.
    """
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"q must lie in [0, 1], got {q}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rng = Generator(Philox(key=seed & _MASK64))
    m = 2 * (n - 1)
    if m == 0:
        cross = np.zeros(0, dtype=np.uint8)
        u = np.zeros(0, dtype=np.int64)
    else:
        cross = (rng.random(m) < q).astype(np.uint8)
        highs = np.repeat(np.arange(2, n + 1, dtype=np.int64), 2)
        u = rng.integers(1, highs)
    return GenerationHistory(n=n, q=q, seed=seed & _MASK64, cross=cross, u=u)


def history_to_tree(h: GenerationHistory) -> TimeLabelledTree:
    """Materialise the tree: node (t, k) attaches to (u, k) if its record has
    cross=0 and to (u, 1-k) otherwise."""
    parent = np.empty(2 * h.n, dtype=np.int64)
    parent[0] = parent[1] = -1
    if h.n > 1:
        slots = np.tile(np.array([0, 1], dtype=np.int64), h.n - 1)
        target_type = slots ^ h.cross
        parent[2:] = 2 * (h.u - 1) + target_type
    return TimeLabelledTree(n=h.n, parent=parent)


def sample_tree(n: int, q: float, seed: int) -> TimeLabelledTree:
    return history_to_tree(sample_history(n, q, seed))


def resample_coordinate(
    h: GenerationHistory, t: int, kind: int, seed2: int
) -> GenerationHistory:
    """Copy of ``h`` with only the (t, kind) record redrawn from fresh
    randomness; every other record is bit-identical."""
    if not 2 <= t <= h.n:
        raise ParameterError(f"t must lie in [2, {h.n}], got {t}")
    if kind not in (0, 1):
        raise ParameterError("kind must be 0 (type A) or 1 (type B)")
    rng = Generator(Philox(key=seed2 & _MASK64))
    i = GenerationHistory.record_index(t, kind)
    cross = h.cross.copy()
    u = h.u.copy()
    cross[i] = 1 if rng.random() < h.q else 0
    u[i] = rng.integers(1, t)
    return GenerationHistory(n=h.n, q=h.q, seed=h.seed, cross=cross, u=u)
