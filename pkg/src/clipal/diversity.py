"""Temporal-gap geometry and k-center greedy batch construction.

The gap between two same-video clips is their start distance minus the
clip span, floored at 0; a candidate's distance to the annotated set is
the minimum gap to any same-video annotated or already-selected clip,
and +inf when its video has none (so candidates from label-free videos
are picked first). Selection iteratively adds the candidate with the
largest such distance; distance ties break by higher uncertainty
aggregate, then by (video id, start_frame) ascending. A consequence of
the +inf rule: with nothing annotated, the first pick is the
highest-uncertainty candidate.

Candidates whose sampled frames intersect the annotated-or-selected set
are skipped inside the loop (admissibility changes as picks accumulate);
once fewer admissible candidates remain than the budget, the partial
batch is returned with a SelectionShortfall warning.

The same greedy scheme over Euclidean distances between clip feature
embeddings backs the feature-space baseline; there an empty annotated
set seeds with the candidate of lowest (video id, start_frame).
"""

from __future__ import annotations

import math
import warnings
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DifferentVideo,
    DimensionMismatch,
    InvariantViolation,
    MissingEmbeddings,
    SelectionShortfall,
)
from .model import Clip, ClipScore, ClipPredictions, QueryKind
from .pool import admissible_against, used_frames


def temporal_gap(a: Clip, b: Clip) -> int:
    """Start distance minus the clip span, floored at 0."""
    if a.video != b.video:
        raise DifferentVideo(f"{a.video} vs {b.video}")
    if (a.length, a.interval) != (b.length, b.interval):
        raise InvariantViolation("temporal gap needs clips of equal length and interval")
    return max(0, abs(a.start_frame - b.start_frame) - a.span())


def nearest_distance(c: Clip, annotated: Iterable[Clip]) -> float:
    """Min gap to any same-video annotated clip; +inf when there is none."""
    best = math.inf
    for other in annotated:
        if other.video == c.video:
            best = min(best, temporal_gap(c, other))
    return best


def _warn_shortfall(selected: int, b: int) -> None:
    warnings.warn(
        f"only {selected} of {b} budgeted clips admissible",
        SelectionShortfall,
        stacklevel=3,
    )


def k_center_greedy_temporal(
    candidates: Sequence[ClipScore], labeled: Iterable[Clip], b: int
) -> list[Clip]:
    """Select up to b candidates, each maximizing the temporal distance
    to everything annotated or already selected."""
    if b < 1:
        raise InvariantViolation(f"clip budget {b} < 1")
    labeled = list(labeled)
    labeled_set = set(labeled)
    if len({cand.clip for cand in candidates}) != len(candidates):
        raise InvariantViolation("duplicate candidate clips")
    for cand in candidates:
        if cand.clip in labeled_set:
            raise InvariantViolation(f"candidate {cand.clip.key()} is already labeled")
    used = _used_frames(labeled)
    remaining = list(candidates)
    dist = {cand.clip: nearest_distance(cand.clip, labeled) for cand in remaining}
    selected: list[Clip] = []
    while remaining and len(selected) < b:
        best = None
        best_key = None
        for cand in remaining:
            if not _is_admissible(cand.clip, used):
                continue
            key = (
                -dist[cand.clip],
                -cand.aggregate,
                cand.clip.video.id,
                cand.clip.start_frame,
            )
            if best_key is None or key < best_key:
                best = cand
                best_key = key
        if best is None:
            break
        pick = best.clip
        selected.append(pick)
        remaining.remove(best)
        used.setdefault(pick.video, set()).update(pick.frames())
        for cand in remaining:
            if cand.clip.video == pick.video:
                dist[cand.clip] = min(dist[cand.clip], temporal_gap(cand.clip, pick))
    if len(selected) < b:
        _warn_shortfall(len(selected), b)
    return selected


def k_center_greedy_features(
    candidates: Sequence[tuple[Clip, Sequence[float]]],
    labeled: Sequence[tuple[Clip, Sequence[float]]],
    b: int,
) -> list[Clip]:
    """Same greedy scheme with Euclidean distances between clip
    embeddings (feature space is global, not per video)."""
    if b < 1:
        raise InvariantViolation(f"clip budget {b} < 1")

    def to_vec(clip: Clip, emb) -> np.ndarray:
        if emb is None:
            raise MissingEmbeddings(f"clip {clip.key()} has no embedding")
        vec = np.asarray(emb, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise MissingEmbeddings(f"clip {clip.key()} has an empty embedding")
        return vec

    cand_clips = [clip for clip, _ in candidates]
    cand_vecs = [to_vec(clip, emb) for clip, emb in candidates]
    ref_vecs = [to_vec(clip, emb) for clip, emb in labeled]
    dims = {v.size for v in cand_vecs} | {v.size for v in ref_vecs}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed embedding dimensions {sorted(dims)}")

    used = _used_frames(clip for clip, _ in labeled)
    if ref_vecs:
        ref = np.stack(ref_vecs)
        dist = [
            float(np.min(np.linalg.norm(ref - vec, axis=1))) for vec in cand_vecs
        ]
    else:
        dist = [math.inf] * len(cand_vecs)
    alive = [True] * len(cand_clips)
    selected: list[Clip] = []
    while len(selected) < b:
        best_idx = None
        best_key = None
        for idx, clip in enumerate(cand_clips):
            if not alive[idx] or not _is_admissible(clip, used):
                continue
            key = (-dist[idx], clip.video.id, clip.start_frame)
            if best_key is None or key < best_key:
                best_idx = idx
                best_key = key
        if best_idx is None:
            break
        pick = cand_clips[best_idx]
        pick_vec = cand_vecs[best_idx]
        alive[best_idx] = False
        selected.append(pick)
        used.setdefault(pick.video, set()).update(pick.frames())
        for idx in range(len(cand_clips)):
            if alive[idx]:
                d = float(np.linalg.norm(cand_vecs[idx] - pick_vec))
                if d < dist[idx]:
                    dist[idx] = d
    if len(selected) < b:
        _warn_shortfall(len(selected), b)
    return selected


def mean_clip_embedding(preds: ClipPredictions) -> np.ndarray:
    """Mean of all forward track-query embeddings across the clip."""
    vecs = []
    for frame in preds.forward:
        for q in frame.queries:
            if q.kind is QueryKind.TRACK and q.embedding is not None:
                vecs.append(np.asarray(q.embedding, dtype=np.float64))
    if not vecs:
        raise MissingEmbeddings(
            f"clip {preds.clip.key()} has no track-query embeddings"
        )
    if len({v.size for v in vecs}) > 1:
        raise DimensionMismatch(f"clip {preds.clip.key()} mixes embedding dimensions")
    return np.stack(vecs).mean(axis=0)
