"""Periodic square grids, block partitions, and seeded random streams."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np


class NonDividingBlock(ValueError):
    """Block size does not tile the grid."""


@dataclass(frozen=True)
class GridShape:
    L: int
    d: int = 2

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"grid size must be >= 2, got {self.L}")
        if self.d != 2:
            raise ValueError("only d=2 grids are supported")

    @property
    def n_sites(self) -> int:
        return self.L ** self.d


@dataclass(frozen=True)
class BlockPartition:
    shape: GridShape
    b: int

    @property
    def blocks_per_side(self) -> int:
        return self.shape.L // self.b

    @property
    def num_blocks(self) -> int:
        return self.blocks_per_side ** self.shape.d

    def block_sites(self) -> np.ndarray:
        """Flat site indices of every block, shape ``(num_blocks, b*b)``.

        Blocks are ordered row-major over the block grid, and sites within a
        block row-major as well, which is the order ``block_means`` uses.
        """
        L, b, n = self.shape.L, self.b, self.blocks_per_side
        idx = np.arange(L * L).reshape(n, b, n, b)
        return idx.transpose(0, 2, 1, 3).reshape(n * n, b * b)


def make_partition(shape: GridShape | int, b: int) -> BlockPartition:
    if isinstance(shape, int):
        shape = GridShape(shape)
    if b < 1:
        raise ValueError(f"block size must be >= 1, got {b}")
    if shape.L % b:
        raise NonDividingBlock(f"block size {b} does not divide L={shape.L}")
    return BlockPartition(shape, b)


def _purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


@dataclass(frozen=True)
class SeedTree:
    """A master seed plus a derivation path of ``(purpose, index)`` pairs.

    Streams are built from ``numpy.random.SeedSequence`` spawn keys, so a
    given path always yields the same stream and distinct paths yield
    independent ones, whatever order they are requested in.
    """

    master_seed: int
    path: tuple[tuple[str, int], ...] = field(default=())

    def child(self, purpose: str, index: int) -> SeedTree:
        return SeedTree(self.master_seed, self.path + ((purpose, int(index)),))

    def seed_sequence(self) -> np.random.SeedSequence:
        key = []
        for purpose, index in self.path:
            key.extend((_purpose_key(purpose), index))
        return np.random.SeedSequence(self.master_seed, spawn_key=tuple(key))

    def stream(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def derive_seed(self) -> int:
        """A 63-bit integer seed for this path (used to seed whole configs)."""
        return int(self.seed_sequence().generate_state(1, np.uint64)[0] >> np.uint64(1))


def derive_stream(tree: SeedTree, purpose: str, index: int) -> np.random.Generator:
    return tree.child(purpose, index).stream()
