"""Diagnostics: rank correlation of partial-grid scores against final scores,
and the entropy of row-stochastic attention maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AlignmentError,
    ConfigError,
    DegenerateInputError,
    NumericError,
    ShapeMismatchError,
)
from .fillsearch import FillSearchConfig
from .rngstream import stream
from .strategies import (
    RewardOracle,
    Strategy,
    SyntheticOracle,
    intermediate_reward,
)
from .toyworld import WorldConfig, generate_tokens


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the average of their positions."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    sorted_vals = arr[order]
    while i < arr.size:
        j = i
        while j + 1 < arr.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Rank correlation: the linear correlation of average ranks.

    A constant input has no ranking and is an error, never a silent zero.
    """
    x = np.asarray(xs, dtype=np.float64).ravel()
    y = np.asarray(ys, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ShapeMismatchError("input vectors differ in length")
    if x.size < 2:
        raise DegenerateInputError("correlation needs at least 2 points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NumericError("non-finite correlation input")
    rx = average_ranks(x)
    ry = average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise DegenerateInputError("constant input leaves rank correlation undefined")
    return float(rx @ ry) / denom


def attention_entropy(attention: np.ndarray) -> float:
    """Mean per-row Shannon entropy in bits of a row-stochastic matrix."""
    a = np.asarray(attention, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        raise ShapeMismatchError("attention map must be square and non-empty")
    if np.any(a < 0):
        raise NumericError("attention weights must be non-negative")
    if np.any(np.abs(a.sum(axis=1) - 1.0) > 1e-9):
        raise NumericError("attention rows must each sum to 1")
    positive = a[a > 0]
    return float(-(positive * np.log2(positive)).sum() / a.shape[0])


@dataclass(frozen=True)
class EvalSpec:
    """One labeled scorer to track through the correlation study.

    ``kind`` is a strategy name, or "final" (replay the trajectory's own
    final score, a perfect-rank control) or "noise" (an independent draw,
    a zero-rank control). Scorers sharing a ``stream_tag`` draw from the
    same stream at each (trajectory, checkpoint), so filling variants that
    differ only in budget score nested scheme sets instead of independent
    ones.
    """

    label: str
    kind: str
    fill: Optional[FillSearchConfig] = None
    rollout_greedy: bool = False
    stream_tag: Optional[str] = None

    def __post_init__(self):
        kinds = {"cropping", "zeropad", "rollout", "filling", "final", "noise"}
        if self.kind not in kinds:
            raise ConfigError(f"unknown eval kind {self.kind!r}")
        if self.kind == "filling" and self.fill is None:
            raise ConfigError("filling eval needs a search config")


@dataclass
class CorrelationCell:
    strategy: str
    checkpoint: int
    rho: Optional[float]
    n: int
    note: str = ""


@dataclass
class CorrelationTable:
    cells: list = field(default_factory=list)
    final_scores: list = field(default_factory=list)
    checkpoint_rows: int = 0
    total_rows: int = 0

    def rho_series(self, label: str) -> list:
        return [c.rho for c in sorted(
            (c for c in self.cells if c.strategy == label),
            key=lambda c: c.checkpoint)]

    def to_rows(self) -> list:
        return [(c.strategy, c.checkpoint, "" if c.rho is None else repr(c.rho),
                 c.n, c.note) for c in self.cells]


def correlation_experiment(world: WorldConfig, specs, n_trajectories: int,
                           checkpoint_rows: int, master_seed: int,
                           prompt_ids, oracle: Optional[RewardOracle] = None
                           ) -> CorrelationTable:
    """How well each scorer ranks trajectories before they finish.

    Generates ``n_trajectories`` independent full trajectories (prompts
    assigned round-robin), records every scorer's value at every
    intermediate checkpoint of every trajectory, then correlates those
    values with the final complete-grid scores. The trajectories never
    depend on the scorers, so adding or removing a scorer changes nothing
    else; a run is paired across scorers by construction.
    """
    if n_trajectories < 2:
        raise DegenerateInputError("need at least 2 trajectories to correlate")
    if world.height % checkpoint_rows != 0:
        raise AlignmentError(
            f"checkpoint_rows {checkpoint_rows} does not divide height "
            f"{world.height}")
    prompt_ids = list(prompt_ids)
    if not prompt_ids:
        raise ConfigError("need at least one prompt id")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate eval labels")
    oracle = oracle if oracle is not None else SyntheticOracle.from_world(world)
    codebook = world.codebook()
    params = world.generator_params()
    prompts = {pid: world.prompt(pid) for pid in set(prompt_ids)}
    segments = world.height // checkpoint_rows
    n_checkpoints = segments - 1
    seg_tokens = checkpoint_rows * world.width

    values = {s.label: np.empty((n_checkpoints, n_trajectories)) for s in specs}
    finals = np.empty(n_trajectories)
    for b in range(n_trajectories):
        prompt = prompts[prompt_ids[b % len(prompt_ids)]]
        sample = world.new_sample()
        for seg in range(segments):
            rng = stream(master_seed, "traj", b, seg)
            sample = generate_tokens(sample, prompt, seg_tokens, params, rng)
            if seg == segments - 1:
                break
            c = seg
            for spec in specs:
                rng_eval = stream(master_seed, "eval",
                                  spec.stream_tag or spec.label, b, c)
                if spec.kind == "noise":
                    values[spec.label][c, b] = float(rng_eval.standard_normal())
                elif spec.kind == "final":
                    values[spec.label][c, b] = np.nan  # filled after completion
                else:
                    values[spec.label][c, b] = intermediate_reward(
                        sample, prompt, Strategy(spec.kind), oracle, codebook,
                        params, spec.fill or FillSearchConfig(), rng_eval,
                        spec.rollout_greedy)
        finals[b] = float(oracle.score(sample.grid, prompt))

    for spec in specs:
        if spec.kind == "final":
            values[spec.label][:, :] = finals[None, :]

    table = CorrelationTable(checkpoint_rows=checkpoint_rows,
                             total_rows=world.height,
                             final_scores=[float(v) for v in finals])
    for spec in specs:
        for c in range(n_checkpoints):
            try:
                rho = spearman(values[spec.label][c], finals)
                table.cells.append(CorrelationCell(spec.label, c, rho,
                                                   n_trajectories))
            except DegenerateInputError:
                table.cells.append(CorrelationCell(spec.label, c, None,
                                                   n_trajectories, "degenerate"))
    return table


def middle_half_checkpoints(table: CorrelationTable) -> list:
    """Checkpoint indices whose generated fraction lies in [1/4, 3/4]."""
    out = []
    n_checkpoints = (table.total_rows // table.checkpoint_rows) - 1
    for c in range(n_checkpoints):
        frac = (c + 1) * table.checkpoint_rows / table.total_rows
        if 0.25 <= frac <= 0.75:
            out.append(c)
    return out
