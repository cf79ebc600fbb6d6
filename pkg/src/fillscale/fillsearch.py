"""Search over filling schemes for the best completion score of a partial grid.

The score of interest is the maximum oracle score over ways of completing
the grid by block copying. The search is two-phase: a coarse best-of-N
over independent random schemes establishes a base, then a zero-order
refinement repeatedly re-randomizes a few slots and keeps the change only
when the score strictly improves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SchemeError
from .grid import (
    EMPTY_SCHEME,
    FillingScheme,
    TokenGrid,
    apply_filling,
    random_scheme,
    segment_blocks,
)


@dataclass(frozen=True)
class FillSearchConfig:
    """Search budget: coarse trials, refinement iterations, slots per step."""

    coarse_trials: int = 5
    refine_iters: int = 5
    refine_blocks: int = 1
    block_size: int = 8

    def __post_init__(self):
        if self.coarse_trials < 1:
            raise ConfigError("coarse_trials must be at least 1")
        if self.refine_iters < 0:
            raise ConfigError("refine_iters must be non-negative")
        if self.refine_blocks < 1:
            raise ConfigError("refine_blocks must be at least 1")
        if self.block_size < 1:
            raise ConfigError("block_size must be at least 1")


@dataclass(frozen=True)
class TrialRecord:
    phase: str  # "coarse" or "refine"
    digest: int
    score: float
    accepted: bool


@dataclass(frozen=True)
class FillSearchResult:
    """Best scheme found, its score, and the full trial history."""

    best_scheme: FillingScheme
    best_score: float
    trial_log: tuple

    def running_best(self) -> list:
        out, best = [], -np.inf
        for rec in self.trial_log:
            if rec.accepted:
                best = rec.score
            out.append(best)
        return out


def coarse_search(grid: TokenGrid, prompt, oracle, cfg: FillSearchConfig,
                  rng: np.random.Generator) -> FillSearchResult:
    """Best of ``coarse_trials`` independent random schemes.

    Draws are sequential on ``rng``, so a larger budget with the same
    stream state scores a superset of the smaller budget's schemes. Ties
    keep the earliest trial. A complete grid needs no scheme and costs a
    single oracle call.
    """
    part = segment_blocks(grid.frontier, cfg.block_size, grid.total)
    m, total_blocks = part.generated_blocks, part.total_blocks
    if m == 0:
        raise SchemeError("cannot search before any block is generated")
    if m == total_blocks:
        score = float(oracle.score(grid, prompt))
        log = (TrialRecord("coarse", EMPTY_SCHEME.digest(), score, True),)
        return FillSearchResult(EMPTY_SCHEME, score, log)
    best_scheme, best_score, log = None, -np.inf, []
    for _ in range(cfg.coarse_trials):
        scheme = random_scheme(m, total_blocks, rng)
        score = float(oracle.score(apply_filling(grid, scheme, cfg.block_size), prompt))
        accepted = score > best_score
        if accepted:
            best_scheme, best_score = scheme, score
        log.append(TrialRecord("coarse", scheme.digest(), score, accepted))
    return FillSearchResult(best_scheme, best_score, tuple(log))


def zero_order_refine(grid: TokenGrid, prompt, oracle, base: FillSearchResult,
                      cfg: FillSearchConfig, rng: np.random.Generator) -> FillSearchResult:
    """Accept-on-strict-improvement perturbation of the base scheme.

    Each of ``refine_iters`` steps re-randomizes ``refine_blocks`` distinct
    slots of the current scheme; the candidate replaces the base only when
    its score strictly beats the incumbent, so the running best over the
    extended trial log never decreases.
    """
    part = segment_blocks(grid.frontier, cfg.block_size, grid.total)
    m, total_blocks = part.generated_blocks, part.total_blocks
    slots = total_blocks - m
    if cfg.refine_iters == 0 or slots == 0:
        return base
    if cfg.refine_blocks > slots:
        raise ConfigError(
            f"refine_blocks {cfg.refine_blocks} exceeds open slots {slots}")
    if len(base.best_scheme) != slots:
        raise SchemeError("base scheme does not fit this grid")
    current = np.array(base.best_scheme.assignments, copy=True)
    current_score = base.best_score
    log = list(base.trial_log)
    for _ in range(cfg.refine_iters):
        picked = rng.choice(slots, size=cfg.refine_blocks, replace=False)
        candidate = np.array(current, copy=True)
        candidate[picked] = rng.integers(0, m, size=cfg.refine_blocks, dtype=np.int64)
        scheme = FillingScheme(candidate)
        score = float(oracle.score(apply_filling(grid, scheme, cfg.block_size), prompt))
        accepted = score > current_score
        if accepted:
            current, current_score = candidate, score
        log.append(TrialRecord("refine", scheme.digest(), score, accepted))
    return FillSearchResult(FillingScheme(current), current_score, tuple(log))


def filling_search(grid: TokenGrid, prompt, oracle, cfg: FillSearchConfig,
                   rng: np.random.Generator) -> FillSearchResult:
    """Coarse phase then refinement, on independent child streams.

    The two phases split ``rng`` so that changing the coarse budget never
    perturbs the refinement draws and vice versa. On a partial grid the
    total oracle cost is exactly coarse_trials + refine_iters calls.
    """
    coarse_rng, refine_rng = rng.spawn(2)
    base = coarse_search(grid, prompt, oracle, cfg, coarse_rng)
    return zero_order_refine(grid, prompt, oracle, base, cfg, refine_rng)


def filling_reward(grid: TokenGrid, prompt, oracle, cfg: FillSearchConfig,
                   rng: np.random.Generator) -> float:
    """The searched best completion score of a partial grid."""
    return filling_search(grid, prompt, oracle, cfg, rng).best_score
