"""Parallel-trajectory scaling loop: checkpoint scoring, fusion, resampling.

Two entry points share one stream layout. ``run_bon`` generates N complete
grids independently and keeps the oracle argmax. ``run_fr_tts`` pauses the
same N trajectories every few rows, scores each partial grid with the
configured strategy, fuses that with a diversity score under the weight
schedule, and redraws the population from the fused scores before
generation continues.

Stream layout: generation for slot i over segment g always comes from the
named stream ("gen", i, g) regardless of ancestry, so the two entry points
are paired draw-for-draw under one master seed, and duplicated parents
diverge as soon as their slots differ.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diversity import diversity_scores
from .errors import AlignmentError, ConfigError, NumericError
from .fillsearch import FillSearchConfig, filling_search
from .rngstream import stream
from .schedule import (
    ScheduleConfig,
    minmax_normalize,
    unified_rewards,
    variance_adjust,
    weight_at,
)
from .strategies import (
    RewardOracle,
    Strategy,
    SyntheticOracle,
    cropping_reward,
    rollout_reward,
    zeropad_reward,
)
from .toyworld import PromptSpec, SampleState, WorldConfig, generate_tokens


@dataclass(frozen=True)
class ScalingConfig:
    """All run parameters that are not part of the synthetic world."""

    num_samples: int = 8
    checkpoint_rows: int = 4
    strategy: Strategy = Strategy.FILLING
    fill: FillSearchConfig = field(default_factory=FillSearchConfig)
    resample_temperature: float = 0.1
    resample_kernel: str = "softmax"
    elitism: bool = True
    master_seed: int = 0
    sched_begin_frac: float = 0.25
    sched_end_frac: float = 0.6
    variance_center: float = 0.00065
    variance_sensitivity: float = 50.0
    variance_on_normalized: bool = False
    rollout_greedy: bool = False

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigError("num_samples must be at least 1")
        if self.checkpoint_rows < 1:
            raise ConfigError("checkpoint_rows must be at least 1")
        if not self.resample_temperature > 0:
            raise ConfigError("resample_temperature must be positive")
        if self.resample_kernel not in ("softmax", "linear"):
            raise ConfigError(
                f"unknown resample_kernel {self.resample_kernel!r}")
        if not 0.0 <= self.sched_begin_frac < self.sched_end_frac <= 1.0:
            raise ConfigError("need 0 <= begin fraction < end fraction <= 1")


@dataclass
class CheckpointRecord:
    """Everything observed and decided at one intermediate checkpoint."""

    index: int
    raw_fill: list
    raw_div: list
    norm_fill: list
    norm_div: list
    weight: float
    weight_adjusted: float
    fill_variance: Optional[float]
    unified: list
    parents: list


@dataclass
class RunResult:
    algorithm: str
    final_scores: list
    best_index: int
    best_score: float
    mean_score: float
    checkpoints: list
    genealogy: list
    oracle_calls: int
    expected_oracle_calls: int
    wall_clock: float
    final_samples: list
    trial_logs: Optional[list] = None
    snapshots: Optional[list] = None


def validate_run(world: WorldConfig, scaling: ScalingConfig) -> None:
    """Reject configurations before any generation happens."""
    if world.height % scaling.checkpoint_rows != 0:
        raise AlignmentError(
            f"checkpoint_rows {scaling.checkpoint_rows} does not divide "
            f"height {world.height}")
    if scaling.strategy == Strategy.FILLING:
        k = scaling.fill.block_size
        seg_tokens = scaling.checkpoint_rows * world.width
        if seg_tokens % k != 0:
            raise AlignmentError(
                f"block_size {k} does not divide the {seg_tokens} tokens "
                f"between checkpoints")
        if (world.width * world.height) % k != 0:
            raise AlignmentError(
                f"block_size {k} does not divide the grid size")


def importance_resample(unified, num_samples: int, temperature: float,
                        elitism: bool, rng: np.random.Generator,
                        kernel: str = "softmax") -> np.ndarray:
    """Draw parent indices with replacement, weighted by the fused reward.

    The softmax kernel weights by exp(reward / temperature); the linear
    kernel weights by the reward itself (uniform when all are zero). With
    elitism the argmax index (smallest on ties) is guaranteed a slot: if
    the draw misses it, it replaces the drawn parent with the lowest
    reward.
    """
    u = np.asarray(unified, dtype=np.float64).ravel()
    if u.size == 0:
        raise ConfigError("cannot resample an empty population")
    if not np.all(np.isfinite(u)):
        raise NumericError("non-finite rewards in resampling")
    if not temperature > 0:
        raise ConfigError("temperature must be positive")
    if kernel == "softmax":
        z = (u - u.max()) / temperature
        probs = np.exp(z)
    elif kernel == "linear":
        probs = u - u.min() if u.min() < 0 else np.array(u, copy=True)
        if probs.sum() == 0.0:
            probs = np.ones_like(u)
    else:
        raise ConfigError(f"unknown resample kernel {kernel!r}")
    probs = probs / probs.sum()
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    parents = np.searchsorted(cdf, rng.random(num_samples), side="right")
    parents = np.minimum(parents, u.size - 1).astype(np.int64)
    if elitism:
        best = int(np.argmax(u))
        if best not in parents:
            worst_slot = int(np.argmin(u[parents]))
            parents[worst_slot] = best
    return parents


def _intermediate_scores(samples, prompt, world, scaling, oracle,
                         checkpoint: int):
    """Strategy scores for every slot, plus fill trial logs when searching."""
    seed = scaling.master_seed
    codebook = world.codebook()
    params = world.generator_params()
    scores, logs = [], []
    for slot, sample in enumerate(samples):
        if scaling.strategy == Strategy.FILLING:
            rng = stream(seed, "fill", slot, checkpoint)
            res = filling_search(sample.grid, prompt, oracle, scaling.fill, rng)
            scores.append(res.best_score)
            logs.append(res.trial_log)
        elif scaling.strategy == Strategy.CROPPING:
            scores.append(cropping_reward(sample, prompt, oracle, codebook))
        elif scaling.strategy == Strategy.ZEROPAD:
            scores.append(zeropad_reward(sample, prompt, oracle))
        elif scaling.strategy == Strategy.ROLLOUT:
            rng = stream(seed, "rollout", slot, checkpoint)
            scores.append(rollout_reward(sample, prompt, params, oracle,
                                         rng, scaling.rollout_greedy))
        else:
            raise ConfigError(f"unknown strategy {scaling.strategy!r}")
    return scores, logs


def _finalize(algorithm, samples, prompt, oracle, calls_before, expected,
              checkpoints, genealogy, trial_logs, snapshots, t0):
    finals = [float(oracle.score(s.grid, prompt)) for s in samples]
    best = int(np.argmax(finals))
    return RunResult(
        algorithm=algorithm,
        final_scores=finals,
        best_index=best,
        best_score=finals[best],
        mean_score=float(np.mean(finals)),
        checkpoints=checkpoints,
        genealogy=genealogy,
        oracle_calls=oracle.calls - calls_before,
        expected_oracle_calls=expected,
        wall_clock=time.perf_counter() - t0,
        final_samples=list(samples),
        trial_logs=trial_logs,
        snapshots=snapshots,
    )


def expected_calls(world: WorldConfig, scaling: ScalingConfig,
                   algorithm: str) -> int:
    """Analytic oracle budget for a run; the engine must match it exactly."""
    n = scaling.num_samples
    if algorithm == "bon":
        return n
    n_checkpoints = world.height // scaling.checkpoint_rows - 1
    if scaling.strategy == Strategy.FILLING:
        per_eval = scaling.fill.coarse_trials + scaling.fill.refine_iters
    else:
        per_eval = 1
    return n_checkpoints * n * per_eval + n


def run_bon(world: WorldConfig, scaling: ScalingConfig, prompt: PromptSpec,
            oracle: Optional[RewardOracle] = None) -> RunResult:
    """Best-of-N baseline: N full generations, one oracle call each."""
    validate_run(world, scaling)
    oracle = oracle if oracle is not None else SyntheticOracle.from_world(world)
    t0 = time.perf_counter()
    calls_before = oracle.calls
    params = world.generator_params()
    seg_tokens = scaling.checkpoint_rows * world.width
    segments = world.height // scaling.checkpoint_rows
    samples = []
    for slot in range(scaling.num_samples):
        sample = world.new_sample()
        for seg in range(segments):
            rng = stream(scaling.master_seed, "gen", slot, seg)
            sample = generate_tokens(sample, prompt, seg_tokens, params, rng)
        samples.append(sample)
    return _finalize("bon", samples, prompt, oracle, calls_before,
                     expected_calls(world, scaling, "bon"),
                     [], [], None, None, t0)


def run_fr_tts(world: WorldConfig, scaling: ScalingConfig, prompt: PromptSpec,
               oracle: Optional[RewardOracle] = None,
               keep_snapshots: bool = False) -> RunResult:
    """The full scaling loop: generate, score, fuse, resample, repeat.

    Per intermediate checkpoint: every slot's partial grid gets a strategy
    score and a diversity score; both are min-max normalized; the ramp
    weight (variance-adjusted when the population allows it) fuses them;
    parents are redrawn from the fused scores and their states cloned into
    the slots. After the last segment the complete grids are scored once
    each and the argmax reported.
    """
    validate_run(world, scaling)
    oracle = oracle if oracle is not None else SyntheticOracle.from_world(world)
    t0 = time.perf_counter()
    calls_before = oracle.calls
    params = world.generator_params()
    codebook = world.codebook()
    seed = scaling.master_seed
    n = scaling.num_samples
    seg_tokens = scaling.checkpoint_rows * world.width
    segments = world.height // scaling.checkpoint_rows
    n_checkpoints = segments - 1
    sched = ScheduleConfig(
        s_begin=scaling.sched_begin_frac * n_checkpoints,
        s_end=scaling.sched_end_frac * n_checkpoints,
        variance_center=scaling.variance_center,
        variance_sensitivity=scaling.variance_sensitivity,
    ) if n_checkpoints > 0 else None

    samples = [world.new_sample() for _ in range(n)]
    checkpoints, genealogy, trial_logs = [], [], []
    snapshots = [] if keep_snapshots else None

    for seg in range(segments):
        for slot in range(n):
            rng = stream(seed, "gen", slot, seg)
            samples[slot] = generate_tokens(samples[slot], prompt,
                                            seg_tokens, params, rng)
        if seg == segments - 1:
            break
        c = seg
        raw_fill, logs = _intermediate_scores(samples, prompt, world,
                                              scaling, oracle, c)
        raw_div = diversity_scores(samples, codebook)
        norm_fill = minmax_normalize(raw_fill)
        norm_div = minmax_normalize(raw_div)
        w = weight_at(c, n_checkpoints, sched)
        if n >= 2:
            var_input = norm_fill if scaling.variance_on_normalized else raw_fill
            w_hat = variance_adjust(w, var_input, sched.variance_center,
                                    sched.variance_sensitivity)
            fill_var = float(np.var(np.asarray(var_input, dtype=np.float64)))
        else:
            # a single trajectory has no spread to measure
            w_hat, fill_var = w, None
        unified = unified_rewards(norm_fill, norm_div, w_hat)
        parents = importance_resample(unified, n, scaling.resample_temperature,
                                      scaling.elitism,
                                      stream(seed, "resample", c),
                                      scaling.resample_kernel)
        entries = [
            {"checkpoint": c, "fill": float(raw_fill[i]),
             "div": float(raw_div[i]), "unified": float(unified[i])}
            for i in range(n)
        ]
        scored = [samples[i].with_history(entries[i]) for i in range(n)]
        if keep_snapshots:
            snapshots.append([s.grid for s in scored])
        samples = [scored[int(p)] for p in parents]
        checkpoints.append(CheckpointRecord(
            index=c,
            raw_fill=[float(v) for v in raw_fill],
            raw_div=[float(v) for v in raw_div],
            norm_fill=[float(v) for v in norm_fill],
            norm_div=[float(v) for v in norm_div],
            weight=float(w),
            weight_adjusted=float(w_hat),
            fill_variance=fill_var,
            unified=[float(v) for v in unified],
            parents=[int(p) for p in parents],
        ))
        genealogy.append([int(p) for p in parents])
        trial_logs.append(logs if logs else None)

    return _finalize("fr-tts", samples, prompt, oracle, calls_before,
                     expected_calls(world, scaling, "fr-tts"),
                     checkpoints, genealogy, trial_logs, snapshots, t0)
