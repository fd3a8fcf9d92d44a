"""Raw clip uncertainty components.

Three signals are computed from a clip's multi-frame predictions, all
over the clip-local sampled-frame order u = 0 .. T-1:

* identity-linked entropy variation: mean over frame transitions of the
  largest class-entropy change among track queries matched by predicted
  identity between u and u+1;
* mean entropy: mean over frames of the largest class entropy among the
  frame's valid queries (all active track queries plus object queries at
  or above the confidence threshold);
* bidirectional inconsistency: mean over frames of the largest
  confidence gap between forward- and backward-pass predictions matched
  one-to-one by greedy IoU.

Entropy uses the natural logarithm throughout (the base only rescales
rankings uniformly). Each mean skips frames or transitions with no
eligible pairs/queries; a component with no eligible frames at all is 0
(no evidence of uncertainty). All functions are pure, so clips can be
scored in parallel in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvariantViolation, MissingBackward
from .model import (
    BoundingBox,
    ClipPredictions,
    FramePredictions,
    QueryKind,
    validate_probability_vector,
)


@dataclass(frozen=True)
class UncertaintyConfig:
    """Thresholds for the uncertainty components.

    ``tau_conf`` gates object queries out of the mean-entropy query set;
    ``tau_iou`` gates forward/backward box matches. With
    ``filter_track_queries`` the confidence gate also applies to track
    queries (by default every active track query counts). With
    ``strict_bidir`` a forward-only clip is an error instead of scoring
    a zero bidirectional component.
    """

    tau_conf: float = 0.5
    tau_iou: float = 0.5
    strict_bidir: bool = False
    filter_track_queries: bool = False

    def __post_init__(self) -> None:
        if not (0.0 <= self.tau_conf <= 1.0):
            raise InvariantViolation(f"tau_conf {self.tau_conf} not in [0, 1]")
        if not (0.0 <= self.tau_iou <= 1.0):
            raise InvariantViolation(f"tau_iou {self.tau_iou} not in [0, 1]")


@dataclass(frozen=True)
class MatchedPairSet:
    """One-to-one matches between two query lists.

    ``pairs`` holds (index_a, index_b, iou) with indices into the
    respective ``FramePredictions.queries``; identity matches carry an
    iou of 1.0. Each index appears at most once per side.
    """

    pairs: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(self.pairs))
        left = [i for i, _, _ in self.pairs]
        right = [j for _, j, _ in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise InvariantViolation("matched pair set reuses an index")

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def entropy(p: Sequence[float]) -> float:
    """Shannon entropy (natural log) of a probability vector."""
    validate_probability_vector(p)
    return -math.fsum(v * math.log(v) for v in p if v > 0.0)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union; 0 when the union has zero area."""
    w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, w) * max(0.0, h)
    union = a.area() + b.area() - inter
    return inter / union if union > 0.0 else 0.0


def greedy_iou_match(
    boxes_a: Sequence[BoundingBox], boxes_b: Sequence[BoundingBox], tau_iou: float
) -> MatchedPairSet:
    """Deterministic greedy matching: best remaining IoU >= tau first,
    ties by (lower index_a, lower index_b)."""
    arr_a = np.array([b.as_tuple() for b in boxes_a], dtype=np.float64).reshape(-1, 4)
    arr_b = np.array([b.as_tuple() for b in boxes_b], dtype=np.float64).reshape(-1, 4)
    matrix = kernels.pairwise_iou(arr_a, arr_b)
    pairs, ious = kernels.greedy_match(matrix, tau_iou)
    return MatchedPairSet(
        tuple((int(i), int(j), float(v)) for (i, j), v in zip(pairs, ious))
    )


def id_matched_pairs(
    frame_u: FramePredictions, frame_u1: FramePredictions
) -> MatchedPairSet:
    """Pairs of track queries sharing a predicted identity across two
    consecutive sampled frames; object queries carry no identity and are
    excluded."""
    by_id = {
        q.track_id: i
        for i, q in enumerate(frame_u.queries)
        if q.kind is QueryKind.TRACK
    }
    pairs = []
    for j, q in enumerate(frame_u1.queries):
        if q.kind is QueryKind.TRACK and q.track_id in by_id:
            pairs.append((by_id[q.track_id], j, 1.0))
    return MatchedPairSet(tuple(pairs))


def _frame_entropies(frames: Sequence[FramePredictions]) -> list[np.ndarray]:
    """Per-frame entropy arrays for all queries, one kernel call per clip."""
    flat: list[float] = []
    offsets = [0]
    for frame in frames:
        for q in frame.queries:
            flat.extend(q.class_probs)
            offsets.append(len(flat))
    ents = kernels.entropy_rows(
        np.asarray(flat, dtype=np.float64), np.asarray(offsets, dtype=np.int64)
    )
    out = []
    row = 0
    for frame in frames:
        out.append(ents[row : row + len(frame.queries)])
        row += len(frame.queries)
    return out


def entropy_variation(preds: ClipPredictions) -> float:
    """Mean over transitions of the max entropy change among ID-matched
    track queries; 0 when no transition has a matched pair."""
    frames = preds.forward
    ents = _frame_entropies(frames)
    total = 0.0
    n_valid = 0
    for u in range(len(frames) - 1):
        matched = id_matched_pairs(frames[u], frames[u + 1])
        if not len(matched):
            continue
        best = max(abs(ents[u + 1][j] - ents[u][i]) for i, j, _ in matched)
        total += best
        n_valid += 1
    return total / n_valid if n_valid else 0.0


def mean_entropy(preds: ClipPredictions, cfg: UncertaintyConfig) -> float:
    """Mean over frames of the max entropy among the frame's valid
    queries; 0 when no frame has a valid query."""
    frames = preds.forward
    ents = _frame_entropies(frames)
    total = 0.0
    n_valid = 0
    for frame, frame_ents in zip(frames, ents):
        best = None
        for q, h in zip(frame.queries, frame_ents):
            if q.kind is QueryKind.OBJECT or cfg.filter_track_queries:
                if q.confidence < cfg.tau_conf:
                    continue
            if best is None or h > best:
                best = h
        if best is not None:
            total += best
            n_valid += 1
    return total / n_valid if n_valid else 0.0


def bidirectional_inconsistency(preds: ClipPredictions, cfg: UncertaintyConfig) -> float:
    """Mean over frames of the max confidence gap between IoU-matched
    forward and backward predictions (all query kinds pooled); 0 when the
    backward pass is absent (strict mode raises) or nothing matches."""
    if preds.backward is None:
        if cfg.strict_bidir:
            raise MissingBackward(
                f"clip {preds.clip.key()} has no backward predictions"
            )
        return 0.0
    total = 0.0
    n_valid = 0
    for fwd, bwd in zip(preds.forward, preds.backward):
        boxes_f = np.array([q.box.as_tuple() for q in fwd.queries], dtype=np.float64)
        boxes_b = np.array([q.box.as_tuple() for q in bwd.queries], dtype=np.float64)
        matrix = kernels.pairwise_iou(
            boxes_f.reshape(-1, 4), boxes_b.reshape(-1, 4)
        )
        pairs, _ = kernels.greedy_match(matrix, cfg.tau_iou)
        if len(pairs) == 0:
            continue
        best = max(
            abs(fwd.queries[i].confidence - bwd.queries[j].confidence)
            for i, j in pairs
        )
        total += best
        n_valid += 1
    return total / n_valid if n_valid else 0.0


def score_clip_raw(
    preds: ClipPredictions, cfg: UncertaintyConfig
) -> tuple[float, float, float]:
    """The three raw components as (entropy variation, mean entropy,
    bidirectional inconsistency)."""
    return (
        entropy_variation(preds),
        mean_entropy(preds, cfg),
        bidirectional_inconsistency(preds, cfg),
    )
