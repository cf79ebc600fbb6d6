"""Reward oracles and the intermediate-reward strategies for partial grids.

An oracle scores complete grids only; turning a partial grid into
something scoreable is each strategy's job. Four strategies exist:
cropping (decode, stretch, re-encode), zero padding, complete rollout,
and filling-based search. On an already complete grid all four collapse
to the plain oracle score.
"""

from __future__ import annotations

import base64
import io
import math
from enum import Enum
from typing import Protocol

import numpy as np

from .errors import ConfigError, ProtocolError, TransportError
from .fillsearch import FillSearchConfig, filling_reward
from .grid import TokenGrid
from .toyworld import (
    Codebook,
    GeneratorParams,
    PromptSpec,
    SampleState,
    WorldConfig,
    crop_resize_reencode,
    decode,
    generate_tokens,
    synthetic_reward,
)


class RewardOracle(Protocol):
    concurrent_ok: bool
    calls: int

    def score(self, grid: TokenGrid, prompt: PromptSpec) -> float: ...


class Strategy(str, Enum):
    CROPPING = "cropping"
    ZEROPAD = "zeropad"
    ROLLOUT = "rollout"
    FILLING = "filling"


class SyntheticOracle:
    """Exact template scorer; counts every call against the run budget."""

    concurrent_ok = True

    def __init__(self, match_weight: float = 0.7, smooth_weight: float = 0.3):
        self.match_weight = match_weight
        self.smooth_weight = smooth_weight
        self.calls = 0

    @classmethod
    def from_world(cls, world: WorldConfig) -> "SyntheticOracle":
        return cls(world.match_weight, world.smooth_weight)

    def score(self, grid: TokenGrid, prompt: PromptSpec) -> float:
        self.calls += 1
        return synthetic_reward(grid, prompt, self.match_weight, self.smooth_weight)


def cropping_reward(sample: SampleState, prompt: PromptSpec,
                    oracle: RewardOracle, codebook: Codebook) -> float:
    """Score the stretch-and-re-encode completion of the generated rows."""
    return oracle.score(crop_resize_reencode(sample.grid, codebook), prompt)


def zeropad_reward(sample: SampleState, prompt: PromptSpec,
                   oracle: RewardOracle) -> float:
    """Score the grid with every ungenerated cell replaced by token 0."""
    grid = sample.grid
    tokens = np.array(grid.tokens, copy=True)
    tokens[grid.frontier:] = 0
    padded = TokenGrid(grid.width, grid.height, grid.vocab_size,
                       tokens, grid.total)
    return oracle.score(padded, prompt)


def rollout_reward(sample: SampleState, prompt: PromptSpec,
                   params: GeneratorParams, oracle: RewardOracle,
                   rng: np.random.Generator, greedy: bool = False) -> float:
    """Clone, generate to completion on a dedicated stream, score that.

    The caller's sample and streams are untouched; repeated calls with the
    same stream state return the same score.
    """
    remaining = sample.grid.total - sample.grid.frontier
    done = generate_tokens(sample, prompt, remaining, params, rng, greedy)
    return oracle.score(done.grid, prompt)


def intermediate_reward(sample: SampleState, prompt: PromptSpec,
                        strategy: Strategy, oracle: RewardOracle,
                        codebook: Codebook, params: GeneratorParams,
                        fill_cfg: FillSearchConfig, rng: np.random.Generator,
                        rollout_greedy: bool = False) -> float:
    """Dispatch one strategy evaluation of a partial sample."""
    if strategy == Strategy.CROPPING:
        return cropping_reward(sample, prompt, oracle, codebook)
    if strategy == Strategy.ZEROPAD:
        return zeropad_reward(sample, prompt, oracle)
    if strategy == Strategy.ROLLOUT:
        return rollout_reward(sample, prompt, params, oracle, rng, rollout_greedy)
    if strategy == Strategy.FILLING:
        return filling_reward(sample.grid, prompt, oracle, fill_cfg, rng)
    raise ConfigError(f"unknown strategy {strategy!r}")


def image_to_png_b64(image: np.ndarray) -> str:
    """Gray image in [0, 1] -> base64-encoded 8-bit PNG."""
    from PIL import Image

    img = np.asarray(image, dtype=np.float64)
    arr = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def remote_score_batch(images, prompt_text: str, endpoint: str,
                       timeout: float = 10.0, retries: int = 2,
                       session=None) -> list:
    """Score a batch of images over the wire; order is preserved.

    Connection failures and 5xx responses are retried up to ``retries``
    times; 4xx responses and malformed bodies fail immediately.
    """
    import requests

    payload = {"prompt": prompt_text,
               "images": [image_to_png_b64(img) for img in images]}
    url = endpoint.rstrip("/") + "/score"
    post = (session or requests).post
    last_err = None
    for _ in range(retries + 1):
        try:
            resp = post(url, json=payload, timeout=timeout)
        except requests.RequestException as exc:
            last_err = exc
            continue
        if 400 <= resp.status_code < 500:
            raise TransportError(
                f"scoring rejected ({resp.status_code}): {resp.text[:200]}")
        if resp.status_code != 200:
            last_err = TransportError(
                f"scoring failed ({resp.status_code}): {resp.text[:200]}")
            continue
        return _parse_scores(resp, len(images))
    raise TransportError(f"no response from {url} after {retries + 1} attempts: {last_err}")


def _parse_scores(resp, expected: int) -> list:
    try:
        body = resp.json()
    except ValueError as exc:
        raise ProtocolError("response body is not JSON") from exc
    scores = body.get("scores") if isinstance(body, dict) else None
    if not isinstance(scores, list) or len(scores) != expected:
        raise ProtocolError(
            f"expected {expected} scores, got {scores!r:.200}")
    out = []
    for s in scores:
        if not isinstance(s, (int, float)) or isinstance(s, bool) or not math.isfinite(s):
            raise ProtocolError(f"non-finite or non-numeric score {s!r}")
        out.append(float(s))
    return out


def remote_score(image: np.ndarray, prompt_text: str, endpoint: str,
                 timeout: float = 10.0, retries: int = 2, session=None) -> float:
    return remote_score_batch([image], prompt_text, endpoint, timeout,
                              retries, session)[0]


def remote_health(endpoint: str, timeout: float = 10.0) -> dict:
    import requests

    url = endpoint.rstrip("/") + "/health"
    try:
        resp = requests.get(url, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"health probe failed: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(f"health probe returned {resp.status_code}")
    try:
        body = resp.json()
    except ValueError as exc:
        raise ProtocolError("health body is not JSON") from exc
    if body.get("status") != "ok":
        raise ProtocolError(f"unexpected health body {body!r}")
    return body


class RemoteOracle:
    """Scores grids by decoding to PNG and asking a reward service."""

    concurrent_ok = True

    def __init__(self, endpoint: str, codebook: Codebook,
                 timeout: float = 10.0, retries: int = 2):
        self.endpoint = endpoint
        self.codebook = codebook
        self.timeout = timeout
        self.retries = retries
        self.calls = 0
        self._session = None

    def _ensure_session(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
        return self._session

    def score(self, grid: TokenGrid, prompt: PromptSpec) -> float:
        self.calls += 1
        img = decode(grid, self.codebook)
        return remote_score(img, prompt.text, self.endpoint, self.timeout,
                            self.retries, self._ensure_session())
