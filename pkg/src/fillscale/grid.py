"""Row-major token grids, block segmentation, and filling-scheme application.

The grid is the substrate everything else operates on: a width x height
lattice of integer token ids generated left to right, top to bottom. Cells
past the generation frontier hold a sentinel value (vocab_size, one past
the valid id range) so that any code reading them without an explicit
completion step trips a range check instead of silently scoring garbage.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    CapacityError,
    ConfigError,
    SchemeError,
    ShapeMismatchError,
)
from .kernels import fill_blocks

GRID_RECORD_HEADER = "fillscale-grid 1"


@dataclass(frozen=True, eq=False)
class TokenGrid:
    """Immutable token lattice with a row-major generation frontier.

    ``tokens`` is a flat int32 array of length ``width * height``; indices
    below ``frontier`` hold generated ids in ``[0, vocab_size)``, the rest
    hold the sentinel ``vocab_size``. Operations return fresh grids.
    """

    width: int
    height: int
    vocab_size: int
    tokens: np.ndarray
    frontier: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("grid dimensions must be positive")
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be at least 1")
        total = self.width * self.height
        if not 0 <= self.frontier <= total:
            raise CapacityError(
                f"frontier {self.frontier} outside [0, {total}]")
        toks = np.array(self.tokens, dtype=np.int32, copy=True)
        if toks.shape != (total,):
            raise ShapeMismatchError(
                f"tokens shape {toks.shape} != ({total},)")
        gen = toks[: self.frontier]
        if gen.size and (int(gen.min()) < 0 or int(gen.max()) >= self.vocab_size):
            raise ConfigError("generated tokens outside [0, vocab_size)")
        rest = toks[self.frontier:]
        if rest.size and not bool(np.all(rest == self.vocab_size)):
            raise ConfigError("ungenerated cells must hold the sentinel")
        toks.setflags(write=False)
        object.__setattr__(self, "tokens", toks)

    @property
    def total(self) -> int:
        return self.width * self.height

    @property
    def sentinel(self) -> int:
        return self.vocab_size

    @property
    def is_complete(self) -> bool:
        return self.frontier == self.total

    @property
    def generated_rows(self) -> int:
        # full rows only; a partial last row does not count
        return self.frontier // self.width

    def grid2d(self) -> np.ndarray:
        return self.tokens.reshape(self.height, self.width)

    def with_appended(self, values) -> "TokenGrid":
        """New grid with ``values`` written at the frontier."""
        vals = np.asarray(values, dtype=np.int32).ravel()
        if self.frontier + vals.size > self.total:
            raise CapacityError("append overruns the grid end")
        toks = np.array(self.tokens, copy=True)
        toks[self.frontier: self.frontier + vals.size] = vals
        return TokenGrid(self.width, self.height, self.vocab_size,
                         toks, self.frontier + vals.size)


def new_grid(width: int, height: int, vocab_size: int) -> TokenGrid:
    """Empty grid: every cell holds the sentinel, frontier at zero."""
    tokens = np.full(width * height, vocab_size, dtype=np.int32)
    return TokenGrid(width, height, vocab_size, tokens, 0)


def complete_grid(width: int, height: int, vocab_size: int, tokens) -> TokenGrid:
    """Fully generated grid from a flat or 2-d token array."""
    toks = np.asarray(tokens, dtype=np.int32).ravel()
    return TokenGrid(width, height, vocab_size, toks, width * height)


@dataclass(frozen=True)
class BlockPartition:
    """Segmentation of a grid into consecutive blocks of ``block_size`` tokens."""

    block_size: int
    generated_blocks: int
    total_blocks: int


@dataclass(frozen=True, eq=False)
class FillingScheme:
    """Source block index for each ungenerated block slot, in slot order.

    ``assignments[j]`` names the generated block whose tokens are copied
    into the j-th ungenerated block. An empty scheme completes nothing.
    """

    assignments: np.ndarray

    def __post_init__(self):
        arr = np.array(self.assignments, dtype=np.int64, copy=True).ravel()
        if arr.size and int(arr.min()) < 0:
            raise SchemeError("negative source block index")
        arr.setflags(write=False)
        object.__setattr__(self, "assignments", arr)

    def __len__(self) -> int:
        return int(self.assignments.size)

    def digest(self) -> int:
        # order-sensitive: permuting assignments changes the digest
        return zlib.crc32(self.assignments.tobytes())


EMPTY_SCHEME = FillingScheme(np.empty(0, dtype=np.int64))


def segment_blocks(frontier: int, block_size: int, total: int) -> BlockPartition:
    """Split ``total`` tokens into blocks; count how many are generated."""
    if block_size < 1:
        raise ConfigError(f"block_size must be positive, got {block_size}")
    if total < 1 or total % block_size != 0:
        raise AlignmentError(
            f"block_size {block_size} does not divide grid size {total}")
    if not 0 <= frontier <= total:
        raise CapacityError(f"frontier {frontier} outside [0, {total}]")
    if frontier % block_size != 0:
        raise AlignmentError(
            f"frontier {frontier} not aligned to block_size {block_size}")
    return BlockPartition(block_size, frontier // block_size, total // block_size)


def random_scheme(m: int, total_blocks: int, rng: np.random.Generator) -> FillingScheme:
    """Assign each of the ``total_blocks - m`` open slots a uniform random source.

    Draws are independent per slot and deterministic given the generator
    state. With nothing generated there is no legal source.
    """
    if m < 0 or total_blocks < 0 or m > total_blocks:
        raise ConfigError(f"bad block counts m={m}, M={total_blocks}")
    if m == total_blocks:
        return EMPTY_SCHEME
    if m == 0:
        raise SchemeError("no generated blocks to copy from")
    assignments = rng.integers(0, m, size=total_blocks - m, dtype=np.int64)
    return FillingScheme(assignments)


def apply_filling(grid: TokenGrid, scheme: FillingScheme, block_size: int) -> TokenGrid:
    """Complete a grid by copying generated blocks into the open slots.

    Block j past the frontier receives a token-exact copy of generated
    block ``scheme.assignments[j]``. The input grid is unmodified.
    """
    part = segment_blocks(grid.frontier, block_size, grid.total)
    m, total_blocks = part.generated_blocks, part.total_blocks
    if len(scheme) != total_blocks - m:
        raise SchemeError(
            f"scheme covers {len(scheme)} slots, grid has {total_blocks - m}")
    if len(scheme) == 0:
        return grid
    if int(scheme.assignments.max()) >= m:
        raise SchemeError("scheme names an ungenerated source block")
    out = np.array(grid.tokens, copy=True)
    fill_blocks(grid.tokens, out, grid.frontier, block_size, scheme.assignments)
    return TokenGrid(grid.width, grid.height, grid.vocab_size, out, grid.total)


def save_grid(path, grid: TokenGrid) -> None:
    """Write the text record: header, counts line, generated tokens only."""
    lines = [GRID_RECORD_HEADER,
             f"{grid.width} {grid.height} {grid.vocab_size} {grid.frontier}"]
    gen = grid.tokens[: grid.frontier]
    for start in range(0, grid.frontier, grid.width):
        chunk = gen[start: start + grid.width]
        lines.append(" ".join(str(int(t)) for t in chunk))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_grid(path) -> TokenGrid:
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines or lines[0] != GRID_RECORD_HEADER:
        raise ConfigError(f"not a grid record: {path}")
    try:
        width, height, vocab_size, frontier = (int(x) for x in lines[1].split())
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad grid record counts line: {path}") from exc
    flat = " ".join(lines[2:]).split()
    if len(flat) != frontier:
        raise ConfigError(
            f"grid record holds {len(flat)} tokens, counts line says {frontier}")
    tokens = np.full(width * height, vocab_size, dtype=np.int32)
    if frontier:
        tokens[:frontier] = np.array([int(x) for x in flat], dtype=np.int32)
    return TokenGrid(width, height, vocab_size, tokens, frontier)
