from itertools import product

import numpy as np
import pytest

from fillscale import (
    ConfigError,
    FillSearchConfig,
    FillingScheme,
    SchemeError,
    SyntheticOracle,
    TokenGrid,
    apply_filling,
    coarse_search,
    filling_reward,
    filling_search,
    stream,
    zero_order_refine,
)
from gridgen import make_partial, random_complete


def partial_grid(width, height, vocab, prefix):
    tokens = np.full(width * height, vocab, dtype=np.int32)
    tokens[: len(prefix)] = prefix
    return TokenGrid(width, height, vocab, tokens, len(prefix))


def exhaustive_best(grid, prompt, oracle, block_size):
    """Score every legal scheme; the search can never beat this."""
    m = grid.frontier // block_size
    slots = grid.total // block_size - m
    best = -np.inf
    for combo in product(range(m), repeat=slots):
        scheme = FillingScheme(np.array(combo, dtype=np.int64))
        done = apply_filling(grid, scheme, block_size)
        best = max(best, oracle.score(done, prompt))
    return best


class TestCoarseSearch:
    def test_complete_grid_needs_no_scheme(self, small_world):
        prompt = small_world.prompt(0)
        grid = random_complete(small_world, prompt, 1).grid
        oracle = SyntheticOracle.from_world(small_world)
        res = coarse_search(grid, prompt, oracle,
                            FillSearchConfig(coarse_trials=5, block_size=4),
                            stream(0, "c"))
        assert oracle.calls == 1
        assert res.best_score == oracle.score(grid, prompt)
        assert len(res.best_scheme) == 0

    def test_single_generated_block_gives_one_scheme(self, small_world):
        prompt = small_world.prompt(1)
        grid = make_partial(small_world, prompt, 1, 3).grid  # 8 tokens
        oracle = SyntheticOracle.from_world(small_world)
        cfg = FillSearchConfig(coarse_trials=4, refine_iters=0, block_size=8)
        res = coarse_search(grid, prompt, oracle, cfg, stream(0, "c"))
        scores = [rec.score for rec in res.trial_log]
        assert len(set(scores)) == 1
        assert res.best_score == scores[0]

    def test_reaches_exhaustive_max_on_tiny_instance(self):
        # m=2, M=4, K=1: only 4 legal schemes; a large budget must find
        # the best one (miss probability (3/4)^64 at uniform draws)
        grid = partial_grid(2, 2, 6, [3, 5])
        tmpl = np.array([3, 5, 5, 3], dtype=np.int32)
        from fillscale import PromptSpec, complete_grid

        prompt = PromptSpec(0, complete_grid(2, 2, 6, tmpl))
        oracle = SyntheticOracle()
        best = exhaustive_best(grid, prompt, oracle, 1)
        res = coarse_search(grid, prompt, oracle,
                            FillSearchConfig(coarse_trials=64, block_size=1),
                            stream(5, "c"))
        assert res.best_score == best

    def test_nothing_generated_rejected(self, small_world):
        from fillscale import new_grid

        with pytest.raises(SchemeError):
            coarse_search(new_grid(8, 8, 8), small_world.prompt(0),
                          SyntheticOracle(), FillSearchConfig(block_size=8),
                          stream(0, "c"))

    def test_exactly_coarse_trials_oracle_calls(self, small_world):
        prompt = small_world.prompt(2)
        grid = make_partial(small_world, prompt, 4, 7).grid
        oracle = SyntheticOracle.from_world(small_world)
        coarse_search(grid, prompt, oracle,
                      FillSearchConfig(coarse_trials=9, block_size=4),
                      stream(1, "c"))
        assert oracle.calls == 9

    def test_ties_keep_earliest_trial(self):
        # constant content: every scheme scores identically, so only the
        # first trial is accepted
        grid = partial_grid(4, 4, 3, [1] * 8)
        from fillscale import PromptSpec, complete_grid

        prompt = PromptSpec(0, complete_grid(4, 4, 3,
                                             np.ones(16, dtype=np.int32)))
        res = coarse_search(grid, prompt, SyntheticOracle(),
                            FillSearchConfig(coarse_trials=6, block_size=4),
                            stream(2, "c"))
        assert [rec.accepted for rec in res.trial_log] == [True] + [False] * 5


class TestZeroOrderRefine:
    def _setup(self, small_world, seed, coarse=3, block=4):
        prompt = small_world.prompt(seed % 8)
        grid = make_partial(small_world, prompt, 4, seed).grid
        oracle = SyntheticOracle.from_world(small_world)
        cfg = FillSearchConfig(coarse_trials=coarse, refine_iters=6,
                               block_size=block)
        base = coarse_search(grid, prompt, oracle, cfg, stream(seed, "c"))
        return grid, prompt, oracle, cfg, base

    def test_zero_iters_returns_base(self, small_world):
        grid, prompt, oracle, cfg, base = self._setup(small_world, 4)
        cfg0 = FillSearchConfig(cfg.coarse_trials, 0, cfg.refine_blocks,
                                cfg.block_size)
        assert zero_order_refine(grid, prompt, oracle, base, cfg0,
                                 stream(4, "r")) is base

    def test_never_below_base(self, small_world):
        for seed in range(10):
            grid, prompt, oracle, cfg, base = self._setup(small_world, seed)
            res = zero_order_refine(grid, prompt, oracle, base, cfg,
                                    stream(seed, "r"))
            assert res.best_score >= base.best_score

    def test_running_best_nondecreasing(self, small_world):
        for seed in range(10):
            grid, prompt, oracle, cfg, base = self._setup(small_world, seed)
            res = zero_order_refine(grid, prompt, oracle, base, cfg,
                                    stream(seed, "r"))
            best = res.running_best()
            assert all(a <= b for a, b in zip(best, best[1:]))

    def test_bounded_by_exhaustive_max(self):
        grid = partial_grid(2, 4, 6, [3, 5, 1, 4])
        tmpl = np.array([3, 5, 1, 4, 4, 1, 5, 3], dtype=np.int32)
        from fillscale import PromptSpec, complete_grid

        prompt = PromptSpec(0, complete_grid(2, 4, 6, tmpl))
        oracle = SyntheticOracle()
        cfg = FillSearchConfig(coarse_trials=2, refine_iters=10, block_size=1)
        base = coarse_search(grid, prompt, oracle, cfg, stream(3, "c"))
        res = zero_order_refine(grid, prompt, oracle, base, cfg, stream(3, "r"))
        assert res.best_score <= exhaustive_best(grid, prompt, oracle, 1)

    def test_exactly_refine_iters_calls(self, small_world):
        grid, prompt, oracle, cfg, base = self._setup(small_world, 6)
        before = oracle.calls
        zero_order_refine(grid, prompt, oracle, base, cfg, stream(6, "r"))
        assert oracle.calls - before == cfg.refine_iters

    def test_refine_blocks_larger_than_slots_rejected(self, small_world):
        grid, prompt, oracle, cfg, base = self._setup(small_world, 2, block=8)
        slots = grid.total // 8 - grid.frontier // 8
        bad = FillSearchConfig(cfg.coarse_trials, 3, slots + 1, 8)
        with pytest.raises(ConfigError):
            zero_order_refine(grid, prompt, oracle, base, bad, stream(0, "r"))


class TestFillingSearch:
    def test_budget_is_coarse_plus_refine(self, small_world):
        prompt = small_world.prompt(3)
        grid = make_partial(small_world, prompt, 4, 9).grid
        oracle = SyntheticOracle.from_world(small_world)
        filling_search(grid, prompt, oracle,
                       FillSearchConfig(coarse_trials=7, refine_iters=4,
                                        block_size=4), stream(2, "f"))
        assert oracle.calls == 11

    def test_best_scheme_reproduces_best_score(self, small_world):
        for seed in range(8):
            prompt = small_world.prompt(seed % 6)
            grid = make_partial(small_world, prompt, 4, seed).grid
            oracle = SyntheticOracle.from_world(small_world)
            cfg = FillSearchConfig(coarse_trials=5, refine_iters=5, block_size=4)
            res = filling_search(grid, prompt, oracle, cfg, stream(seed, "f"))
            redone = oracle.score(
                apply_filling(grid, res.best_scheme, cfg.block_size), prompt)
            assert redone == res.best_score

    def test_best_score_is_max_of_trial_log(self, small_world):
        prompt = small_world.prompt(4)
        grid = make_partial(small_world, prompt, 4, 13).grid
        oracle = SyntheticOracle.from_world(small_world)
        res = filling_search(grid, prompt, oracle,
                             FillSearchConfig(5, 5, 1, 4), stream(0, "f"))
        assert res.best_score == max(rec.score for rec in res.trial_log)

    def test_nested_budgets_monotone(self, small_world):
        """A bigger coarse budget on the same stream scores a superset of
        schemes, so the result can only improve."""
        violations = 0
        for seed in range(20):
            prompt = small_world.prompt(seed % 8)
            grid = make_partial(small_world, prompt, 4, seed).grid
            scores = []
            for t_c in (1, 5, 10):
                oracle = SyntheticOracle.from_world(small_world)
                cfg = FillSearchConfig(t_c, 0, 1, 4)
                scores.append(filling_reward(grid, prompt, oracle, cfg,
                                             stream(seed, "nest")))
            if not (scores[0] <= scores[1] <= scores[2]):
                violations += 1
        assert violations == 0

    def test_covers_scheme_space_on_small_instance(self):
        grid = partial_grid(4, 2, 6, [2, 4, 1, 3])
        tmpl = np.array([2, 4, 1, 3, 3, 1, 4, 2], dtype=np.int32)
        from fillscale import PromptSpec, complete_grid

        prompt = PromptSpec(0, complete_grid(4, 2, 6, tmpl))
        oracle = SyntheticOracle()
        best = exhaustive_best(grid, prompt, oracle, 2)
        res = filling_search(grid, prompt, oracle,
                             FillSearchConfig(coarse_trials=40, refine_iters=10,
                                              block_size=2), stream(1, "f"))
        assert res.best_score == best


def test_search_config_validation():
    with pytest.raises(ConfigError):
        FillSearchConfig(coarse_trials=0)
    with pytest.raises(ConfigError):
        FillSearchConfig(refine_iters=-1)
    with pytest.raises(ConfigError):
        FillSearchConfig(refine_blocks=0)
    with pytest.raises(ConfigError):
        FillSearchConfig(block_size=0)
