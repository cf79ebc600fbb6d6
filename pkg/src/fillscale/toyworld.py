"""Deterministic desk-scale testbed: generator, codec, scorer, and prompts.

Everything here is exact and seeded. The "generator" samples tokens from a
two-term logit (attraction to a per-prompt template plus coherence with
already-generated neighbors), the "codec" maps token ids to gray patches
and back without loss, and the scorer grades a complete grid against the
template. Together they stand in for the heavyweight models so that every
search and scheduling claim can be checked against ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AlignmentError,
    CapacityError,
    ConfigError,
    EmptyRegionError,
    IncompleteGridError,
    ShapeMismatchError,
)
from .grid import TokenGrid, complete_grid, new_grid
from .kernels import reward_terms, sample_tokens
from .rngstream import stream

# fixed library seed: prompt templates must not vary with the run seed
_PROMPT_SEED = 424242


@dataclass(frozen=True)
class Codebook:
    """Token id v paints a constant gray patch at level v / (vocab_size - 1)."""

    vocab_size: int
    patch_size: int

    def __post_init__(self):
        if self.vocab_size < 2:
            raise ConfigError("codebook needs at least 2 gray levels")
        if self.patch_size < 1:
            raise ConfigError("patch_size must be positive")

    def gray_levels(self) -> np.ndarray:
        return np.arange(self.vocab_size, dtype=np.float64) / (self.vocab_size - 1)


@dataclass(frozen=True)
class GeneratorParams:
    """Logit weights for the toy sampler.

    logit(v) = alpha * [v == template] + beta * (fraction of generated
    up/left neighbors equal to v), softmaxed at ``temperature``.
    """

    alpha: float = 2.0
    beta: float = 1.0
    temperature: float = 1.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ConfigError("alpha and beta must be finite")


@dataclass(frozen=True)
class PromptSpec:
    """A prompt is a class id plus the complete template grid it names."""

    class_id: int
    template: TokenGrid

    def __post_init__(self):
        if not self.template.is_complete:
            raise IncompleteGridError("prompt template must be complete")

    @property
    def text(self) -> str:
        return f"class-{self.class_id}"


@dataclass(frozen=True)
class SampleState:
    """One trajectory: its grid plus per-checkpoint reward history."""

    grid: TokenGrid
    history: tuple = ()

    def with_history(self, entry) -> "SampleState":
        return SampleState(self.grid, self.history + (entry,))


def new_sample(width: int, height: int, vocab_size: int) -> SampleState:
    return SampleState(new_grid(width, height, vocab_size))


def generate_tokens(sample: SampleState, prompt: PromptSpec, count: int,
                    params: GeneratorParams, rng: np.random.Generator,
                    greedy: bool = False) -> SampleState:
    """Append ``count`` sampled tokens; returns a new state, input untouched.

    Token t sees only the prompt and tokens before t (its generated up/left
    neighbors), so replaying a prefix with the same stream reproduces the
    continuation exactly. ``greedy`` takes the argmax and draws nothing
    from the stream.
    """
    grid = sample.grid
    if count < 0:
        raise ConfigError("count must be non-negative")
    if grid.frontier + count > grid.total:
        raise CapacityError("generation would overrun the grid end")
    tmpl = prompt.template
    if (tmpl.width, tmpl.height, tmpl.vocab_size) != (grid.width, grid.height, grid.vocab_size):
        raise ShapeMismatchError("prompt template does not match grid shape")
    if count == 0:
        return sample
    tokens = np.array(grid.tokens, copy=True)
    uniforms = np.empty(0, dtype=np.float64) if greedy else rng.random(count)
    sample_tokens(tokens, tmpl.tokens, grid.frontier, count, grid.width,
                  grid.vocab_size, float(params.alpha), float(params.beta),
                  1.0 / float(params.temperature), uniforms, greedy)
    out = TokenGrid(grid.width, grid.height, grid.vocab_size,
                    tokens, grid.frontier + count)
    return SampleState(out, sample.history)


def decode(grid: TokenGrid, codebook: Codebook) -> np.ndarray:
    """Complete grid -> gray image, one constant patch per token."""
    if not grid.is_complete:
        raise IncompleteGridError("decode requires a complete grid")
    return _paint(grid.grid2d(), grid.vocab_size, codebook)


def decode_rows(grid: TokenGrid, codebook: Codebook) -> np.ndarray:
    """Decode only the generated full rows of a partial grid."""
    if grid.frontier % grid.width != 0:
        raise AlignmentError("frontier must sit on a row boundary")
    rows = grid.generated_rows
    if rows < 1:
        raise EmptyRegionError("no generated rows to decode")
    region = grid.tokens[: rows * grid.width].reshape(rows, grid.width)
    return _paint(region, grid.vocab_size, codebook)


def _paint(cells: np.ndarray, vocab_size: int, codebook: Codebook) -> np.ndarray:
    if vocab_size != codebook.vocab_size:
        raise ConfigError("grid vocab does not match codebook")
    gray = codebook.gray_levels()[cells]
    p = codebook.patch_size
    return np.repeat(np.repeat(gray, p, axis=0), p, axis=1)


def encode(image: np.ndarray, codebook: Codebook) -> TokenGrid:
    """Image -> complete grid: each patch becomes its nearest gray token.

    Ties between two levels break toward the smaller token id.
    """
    img = np.asarray(image, dtype=np.float64)
    p = codebook.patch_size
    if img.ndim != 2 or img.shape[0] % p or img.shape[1] % p:
        raise ShapeMismatchError(
            f"image shape {img.shape} not divisible by patch {p}")
    h, w = img.shape[0] // p, img.shape[1] // p
    means = img.reshape(h, p, w, p).mean(axis=(1, 3))
    scaled = means * (codebook.vocab_size - 1)
    # ceil(x - 0.5) rounds to nearest with half-way cases going down
    ids = np.ceil(scaled - 0.5).astype(np.int64)
    ids = np.clip(ids, 0, codebook.vocab_size - 1).astype(np.int32)
    return complete_grid(w, h, codebook.vocab_size, ids)


def nn_resize(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resize; source index = (i * in_size) // out_size."""
    img = np.asarray(image)
    if img.ndim != 2 or img.size == 0:
        raise ShapeMismatchError("resize expects a non-empty 2-d image")
    if out_h < 1 or out_w < 1:
        raise ConfigError("output size must be positive")
    in_h, in_w = img.shape
    rows = (np.arange(out_h) * in_h) // out_h
    cols = (np.arange(out_w) * in_w) // out_w
    return img[rows][:, cols]


def crop_resize_reencode(grid: TokenGrid, codebook: Codebook) -> TokenGrid:
    """Decode the generated rows, stretch to full size, re-encode.

    The round trip through pixel space generally does not reproduce the
    generated prefix, which is exactly the failure mode this models.
    """
    img = decode_rows(grid, codebook)
    p = codebook.patch_size
    full = nn_resize(img, grid.height * p, grid.width * p)
    out = encode(full, codebook)
    if (out.width, out.height) != (grid.width, grid.height):
        raise ShapeMismatchError("re-encoded grid has wrong shape")
    return out


def synthetic_reward(grid: TokenGrid, prompt: PromptSpec,
                     match_weight: float = 0.7, smooth_weight: float = 0.3) -> float:
    """Grade a complete grid: template agreement plus local smoothness.

    score = match_weight * (fraction of cells equal to the template)
          + smooth_weight * (fraction of adjacent cell pairs with equal
            tokens, horizontal and vertical). Bounded in [0, 1] for
    non-negative weights summing to at most 1.
    """
    if not grid.is_complete:
        raise IncompleteGridError("scoring requires a complete grid")
    if match_weight < 0 or smooth_weight < 0 or match_weight + smooth_weight > 1 + 1e-12:
        raise ConfigError("weights must be non-negative and sum to at most 1")
    tmpl = prompt.template
    if (tmpl.width, tmpl.height) != (grid.width, grid.height):
        raise ShapeMismatchError("template shape does not match grid")
    match, pairs = reward_terms(grid.tokens, tmpl.tokens, grid.width, grid.height)
    total_pairs = grid.height * (grid.width - 1) + (grid.height - 1) * grid.width
    smooth = 1.0 if total_pairs == 0 else pairs / total_pairs
    return match_weight * (match / grid.total) + smooth_weight * smooth


def make_prompt(class_id: int, width: int, height: int, vocab_size: int) -> PromptSpec:
    """Procedural template library, deterministic in class_id alone.

    class_id % 3 picks the family (row stripes, gradient, rectangles); the
    remaining bits vary palette, thickness, direction, and layout through
    a fixed-seed stream. Every family varies along the row axis, so a
    scorer that only sees stretched copies of the generated rows faces a
    genuinely misleading view.
    """
    if class_id < 0:
        raise ConfigError("class_id must be non-negative")
    rng = stream(_PROMPT_SEED, "prompt", class_id)
    family = class_id % 3
    if family == 0:
        cells = _stripes(rng, height, vocab_size)[:, None]
        cells = np.broadcast_to(cells, (height, width)).copy()
    elif family == 1:
        cells = _gradient(rng, width, height, vocab_size)
    else:
        cells = _rectangles(rng, width, height, vocab_size)
    _overlay_dark(rng, cells, vocab_size)
    template = complete_grid(width, height, vocab_size, np.ascontiguousarray(cells))
    return PromptSpec(class_id, template)


def _floor_token(vocab_size):
    # token 0 doubles as the darkest gray and the padding value; base patterns
    # keep clear of it so the dark speck below is the only place it appears
    return 1 if vocab_size >= 3 else 0


def _overlay_dark(rng, cells, vocab_size):
    # a third of the classes carry two small darkest-level specks as genuine
    # content, one in the top half and one near the bottom; a scorer that
    # pads with that level, or smears the prefix over the frame, misjudges
    # those classes at every stage of generation
    if vocab_size < 3 or int(rng.integers(3)) != 0:
        return
    h, w = cells.shape
    # first-quarter speck: generated almost immediately, so it only misleads
    # a scorer that rescales the prefix over the frame
    kh = min(int(rng.integers(2, 5)), h)
    kw = min(int(rng.integers(2, 5)), w)
    y0 = int(rng.integers(0, max(1, h // 4 - kh + 1)))
    x0 = int(rng.integers(0, w - kw + 1))
    cells[y0:y0 + kh, x0:x0 + kw] = 0
    # last-quarter speck: stays ahead of the frontier until the very end, so
    # padding keeps counterfeiting it checkpoint after checkpoint
    kh = min(int(rng.integers(2, 4)), h)
    kw = min(int(rng.integers(3, 5)), w)
    y0 = int(rng.integers(min(3 * h // 4, h - kh), h - kh + 1))
    x0 = int(rng.integers(0, w - kw + 1))
    cells[y0:y0 + kh, x0:x0 + kw] = 0


def _stripes(rng, length, vocab_size):
    lo = _floor_token(vocab_size)
    n_colors = int(rng.integers(2, min(5, vocab_size - lo + 1)))
    thickness = int(rng.choice(np.array([1, 2, 4])))
    palette = lo + rng.choice(vocab_size - lo, size=n_colors, replace=False)
    return palette[(np.arange(length) // thickness) % n_colors].astype(np.int32)


def _gradient(rng, width, height, vocab_size):
    # banded ramp down the rows or down the diagonal, never across columns
    # alone; bands a couple of cells thick keep the pattern about as easy to
    # reproduce as the other families
    lo = _floor_token(vocab_size)
    diagonal = bool(rng.integers(2))
    reverse = bool(rng.integers(2))
    r = np.arange(height, dtype=np.int64)[:, None]
    c = np.arange(width, dtype=np.int64)[None, :]
    if diagonal:
        band = (r + c) // 3
    else:
        band = np.broadcast_to(r // 2, (height, width))
    frac = band / max(band.max(), 1)
    if reverse:
        frac = 1.0 - frac
    return (lo + np.rint(frac * (vocab_size - 1 - lo))).astype(np.int32)


def _rectangles(rng, width, height, vocab_size):
    lo = _floor_token(vocab_size)
    span = vocab_size - lo
    cells = np.full((height, width), lo + int(rng.integers(span)), dtype=np.int32)
    for _ in range(int(rng.integers(3, 6))):
        bh = int(rng.integers(1, max(2, height // 2 + 1)))
        bw = int(rng.integers(1, max(2, width // 2 + 1)))
        y0 = int(rng.integers(0, height - bh + 1))
        x0 = int(rng.integers(0, width - bw + 1))
        cells[y0:y0 + bh, x0:x0 + bw] = lo + int(rng.integers(span))
    return cells


@dataclass(frozen=True)
class WorldConfig:
    """Every knob of the synthetic testbed in one place."""

    width: int = 16
    height: int = 16
    vocab_size: int = 16
    patch_size: int = 4
    alpha: float = 2.0
    beta: float = 1.0
    temperature: float = 1.0
    match_weight: float = 0.7
    smooth_weight: float = 0.3

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError("grid dimensions must be positive")
        if self.vocab_size < 2:
            raise ConfigError("vocab_size must be at least 2")

    def codebook(self) -> Codebook:
        return Codebook(self.vocab_size, self.patch_size)

    def generator_params(self) -> GeneratorParams:
        return GeneratorParams(self.alpha, self.beta, self.temperature)

    def prompt(self, class_id: int) -> PromptSpec:
        return make_prompt(class_id, self.width, self.height, self.vocab_size)

    def new_sample(self) -> SampleState:
        return new_sample(self.width, self.height, self.vocab_size)
