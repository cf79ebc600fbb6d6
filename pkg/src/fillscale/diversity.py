"""Diversity reward: one minus a sample's peak similarity to earlier samples."""

from __future__ import annotations

import numpy as np

from .errors import EmptyRegionError, ShapeMismatchError
from .toyworld import Codebook, decode_rows, encode


def extract_features(image: np.ndarray, codebook: Codebook) -> np.ndarray:
    """Image -> unit vector: token histogram plus a 4x4 map of mean grays.

    The histogram comes from re-encoding the image, so the vector length is
    vocab_size + 16 regardless of image size. Features are non-negative,
    which keeps cosine similarity in [0, 1].
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ShapeMismatchError("features need a non-empty 2-d image")
    if img.shape[0] < 4 or img.shape[1] < 4:
        raise ShapeMismatchError("image too small for a 4x4 mean-gray map")
    tokens = encode(img, codebook).tokens
    hist = np.bincount(tokens, minlength=codebook.vocab_size) / tokens.size
    h, w = img.shape
    cells = np.empty((4, 4), dtype=np.float64)
    for i in range(4):
        for j in range(4):
            cells[i, j] = img[i * h // 4:(i + 1) * h // 4,
                              j * w // 4:(j + 1) * w // 4].mean()
    feat = np.concatenate([hist, cells.ravel()])
    return feat / np.linalg.norm(feat)


def diversity_scores(samples, codebook: Codebook) -> np.ndarray:
    """Per-sample diversity over the decoded generated rows, order-aware.

    Sample i >= 1 scores 1 minus its maximum cosine similarity to samples
    0..i-1; sample 0 inherits the highest of those scores so the batch
    leader is never penalized for going first. A singleton batch gets 1.
    """
    if len(samples) == 0:
        raise ShapeMismatchError("empty sample batch")
    frontiers = {s.grid.frontier for s in samples}
    if len(frontiers) != 1:
        raise ShapeMismatchError("samples must share one frontier")
    if next(iter(frontiers)) < samples[0].grid.width:
        raise EmptyRegionError("diversity needs at least one generated row")
    n = len(samples)
    if n == 1:
        return np.array([1.0])
    feats = np.stack([extract_features(decode_rows(s.grid, codebook), codebook)
                      for s in samples])
    sims = np.clip(feats @ feats.T, -1.0, 1.0)
    scores = np.empty(n, dtype=np.float64)
    for i in range(1, n):
        scores[i] = 1.0 - float(sims[i, :i].max())
    scores[0] = scores[1:].max()
    return np.clip(scores, 0.0, 1.0)
