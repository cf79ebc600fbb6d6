"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time: numba when it is importable and
the ``FILLSCALE_NO_NUMBA`` environment variable is unset/falsy, pure
numpy/Python otherwise. Both paths are exported (``*_nb`` is ``None`` when
numba is off) so ``benchmarks/bench_kernels.py`` can time them against each
other; library code goes through the selected aliases.

Token sampling is written as a scalar loop over ``math.exp`` in both paths,
which keeps the compiled and interpreted versions bit-identical.
"""

from __future__ import annotations

import math
import os

import numpy as np

_env = os.environ.get("FILLSCALE_NO_NUMBA", "").strip().lower()
_DISABLED = _env in ("1", "true", "yes", "on")

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None
else:
    njit = None

BACKEND = "numba" if njit is not None else "numpy"


def _sample_tokens_impl(tokens, template, frontier, count, width, vocab,
                        alpha, beta, inv_temp, uniforms, greedy):
    """Append ``count`` tokens in place, row-major from ``frontier``.

    Logit of value v at cell t: alpha * [v == template[t]] plus beta times
    the fraction of already-generated 4-neighbors (up/left in row-major
    order) equal to v. Sampling inverts the softmax CDF against a
    pre-drawn uniform; greedy takes the argmax (smallest v on ties).
    """
    for i in range(count):
        t = frontier + i
        r = t // width
        c = t - r * width
        up = tokens[t - width] if r > 0 else -1
        left = tokens[t - 1] if c > 0 else -1
        n_gen = (1 if r > 0 else 0) + (1 if c > 0 else 0)

        best_v = 0
        best_logit = -1.0e300
        # First pass for the max logit (softmax stability) and the greedy pick.
        for v in range(vocab):
            logit = 0.0
            if v == template[t]:
                logit += alpha
            if n_gen > 0:
                eq = (1 if up == v else 0) + (1 if left == v else 0)
                logit += beta * (eq / n_gen)
            logit *= inv_temp
            if logit > best_logit:
                best_logit = logit
                best_v = v

        if greedy:
            tokens[t] = best_v
            continue

        total = 0.0
        for v in range(vocab):
            logit = 0.0
            if v == template[t]:
                logit += alpha
            if n_gen > 0:
                eq = (1 if up == v else 0) + (1 if left == v else 0)
                logit += beta * (eq / n_gen)
            total += math.exp(logit * inv_temp - best_logit)

        target = uniforms[i] * total
        acc = 0.0
        pick = vocab - 1
        for v in range(vocab):
            logit = 0.0
            if v == template[t]:
                logit += alpha
            if n_gen > 0:
                eq = (1 if up == v else 0) + (1 if left == v else 0)
                logit += beta * (eq / n_gen)
            acc += math.exp(logit * inv_temp - best_logit)
            if acc >= target:
                pick = v
                break
        tokens[t] = pick


def _reward_terms_nb_impl(tokens, template, width, height):
    """(match_count, equal_pair_count) over a complete row-major grid."""
    match = 0
    pairs = 0
    for r in range(height):
        base = r * width
        for c in range(width):
            t = base + c
            if tokens[t] == template[t]:
                match += 1
            if c + 1 < width and tokens[t] == tokens[t + 1]:
                pairs += 1
            if r + 1 < height and tokens[t] == tokens[t + width]:
                pairs += 1
    return match, pairs


def _reward_terms_np(tokens, template, width, height):
    grid = tokens.reshape(height, width)
    match = int(np.count_nonzero(tokens == template))
    pairs = int(np.count_nonzero(grid[:, 1:] == grid[:, :-1]))
    pairs += int(np.count_nonzero(grid[1:, :] == grid[:-1, :]))
    return match, pairs


def _fill_blocks_nb_impl(tokens, out, frontier, block_size, assignments):
    """Complete ``out`` (a copy of tokens) by block-copying generated blocks."""
    n_fill = assignments.shape[0]
    m = frontier // block_size
    for j in range(n_fill):
        src = assignments[j]
        dst_base = (m + j) * block_size
        src_base = src * block_size
        for k in range(block_size):
            out[dst_base + k] = tokens[src_base + k]


def _fill_blocks_np(tokens, out, frontier, block_size, assignments):
    if assignments.shape[0] == 0:
        return
    generated = tokens[:frontier].reshape(-1, block_size)
    out[frontier:] = generated[assignments].reshape(-1)


if njit is not None:
    sample_tokens_nb = njit(cache=True)(_sample_tokens_impl)
    reward_terms_nb = njit(cache=True)(_reward_terms_nb_impl)
    fill_blocks_nb = njit(cache=True)(_fill_blocks_nb_impl)
else:
    sample_tokens_nb = None
    reward_terms_nb = None
    fill_blocks_nb = None

sample_tokens_py = _sample_tokens_impl
reward_terms_py = _reward_terms_np
fill_blocks_py = _fill_blocks_np

if BACKEND == "numba":
    sample_tokens = sample_tokens_nb
    reward_terms = reward_terms_nb
    fill_blocks = fill_blocks_nb
else:
    sample_tokens = sample_tokens_py
    reward_terms = reward_terms_py
    fill_blocks = fill_blocks_py
