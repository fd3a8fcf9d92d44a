"""Domain types shared across the selection engine.

All types here are immutable value objects: constructors validate their
invariants and reject partially valid instances, after which they are
safe to share across threads. Round-state evolution happens only through
``clipal.strategies.advance_round``, which builds a fresh ``RoundState``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import InvariantViolation, MalformedProbabilities

PROB_SUM_TOL = 1e-6
CONF_TOL = 1e-9
AGGREGATE_TOL = 1e-12


def validate_probability_vector(p: Sequence[float]) -> None:
    """Reject vectors that are not a probability distribution.

    Entries must lie in [0, 1] and sum to 1 within an additive tolerance
    of 1e-6 (tracker export files carry float32 rounding).
    """
    if len(p) == 0:
        raise MalformedProbabilities("empty probability vector")
    for i, v in enumerate(p):
        if not (0.0 <= v <= 1.0) or math.isnan(v):
            raise MalformedProbabilities(f"entry {i} = {v} outside [0, 1]")
    total = math.fsum(p)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise MalformedProbabilities(f"probabilities sum to {total}")


@dataclass(frozen=True, order=True)
class VideoId:
    """Opaque identifier of a source video."""

    id: str

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantViolation("video id must be non-empty")

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True, order=True)
class Clip:
    """Acquisition unit: ``length`` frames sampled every ``interval`` frames.

    The sampled frame indices are ``start_frame + k * interval`` for
    ``k = 0 .. length-1``; annotating the clip costs ``length`` frame
    labels. Whether the clip fits inside its source video is checked
    where the video's frame count is known (pool construction).
    """

    video: VideoId
    start_frame: int
    length: int
    interval: int

    def __post_init__(self) -> None:
        if self.start_frame < 0:
            raise InvariantViolation(f"start_frame {self.start_frame} < 0")
        if self.length < 2:
            raise InvariantViolation(f"clip length {self.length} < 2")
        if self.interval < 1:
            raise InvariantViolation(f"clip interval {self.interval} < 1")

    def frames(self) -> tuple[int, ...]:
        """Sampled frame indices in ascending order."""
        return tuple(self.start_frame + k * self.interval for k in range(self.length))

    def frame_set(self) -> frozenset[int]:
        return frozenset(self.frames())

    def span(self) -> int:
        """Distance from first to last sampled frame."""
        return (self.length - 1) * self.interval

    def last_frame(self) -> int:
        return self.start_frame + self.span()

    def annotation_cost(self) -> int:
        return self.length

    def key(self) -> tuple[str, int]:
        return (self.video.id, self.start_frame)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel coordinates, corners inclusive of order."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise InvariantViolation(
                f"degenerate box ({self.x_min}, {self.y_min}, {self.x_max}, {self.y_max})"
            )

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


class QueryKind(str, enum.Enum):
    TRACK = "track"
    OBJECT = "object"


def _normalize(probs: Sequence[float]) -> tuple[float, ...]:
    total = math.fsum(probs)
    return tuple(v / total for v in probs)


@dataclass(frozen=True)
class QueryPrediction:
    """One tracker query at one sampled frame.

    ``class_probs`` is validated within 1e-6 and stored renormalized to
    sum exactly 1, so downstream entropy computations see a clean
    distribution. ``confidence`` is the max class probability; omit it to
    have it derived, or pass a value within 1e-9 of the stored max.
    Track queries carry the tracker-assigned identity (per-video
    namespace); object queries are ID-less.
    """

    kind: QueryKind
    class_probs: tuple[float, ...]
    box: BoundingBox
    track_id: Optional[int] = None
    confidence: Optional[float] = None
    embedding: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        validate_probability_vector(self.class_probs)
        object.__setattr__(self, "class_probs", _normalize(self.class_probs))
        derived = max(self.class_probs)
        if self.confidence is None:
            object.__setattr__(self, "confidence", derived)
        elif abs(self.confidence - derived) > CONF_TOL:
            raise InvariantViolation(
                f"confidence {self.confidence} != max class prob {derived}"
            )
        if (self.kind is QueryKind.TRACK) != (self.track_id is not None):
            raise InvariantViolation("track_id present iff kind is track")
        if self.embedding is not None:
            object.__setattr__(self, "embedding", tuple(float(v) for v in self.embedding))


@dataclass(frozen=True)
class FramePredictions:
    """All query predictions at one sampled frame."""

    frame_index: int
    queries: tuple[QueryPrediction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "queries", tuple(self.queries))
        if self.frame_index < 0:
            raise InvariantViolation(f"frame_index {self.frame_index} < 0")
        seen: set[int] = set()
        for q in self.queries:
            if q.kind is QueryKind.TRACK:
                if q.track_id in seen:
                    raise InvariantViolation(
                        f"duplicate track_id {q.track_id} at frame {self.frame_index}"
                    )
                seen.add(q.track_id)  # type: ignore[arg-type]

    def track_queries(self) -> tuple[QueryPrediction, ...]:
        return tuple(q for q in self.queries if q.kind is QueryKind.TRACK)

    def object_queries(self) -> tuple[QueryPrediction, ...]:
        return tuple(q for q in self.queries if q.kind is QueryKind.OBJECT)


def _check_frame_cover(clip: Clip, frames: Sequence[FramePredictions], label: str) -> None:
    got = [f.frame_index for f in frames]
    want = list(clip.frames())
    if got != want:
        raise InvariantViolation(
            f"{label} predictions cover frames {got}, clip samples {want}"
        )


@dataclass(frozen=True)
class ClipPredictions:
    """Forward (and optionally backward) inference results for one clip.

    Both directions must cover exactly the clip's sampled frames in
    ascending order. The backward pass comes from running the tracker
    over the reversed frame sequence and is absent for forward-only
    exports.
    """

    clip: Clip
    forward: tuple[FramePredictions, ...]
    backward: Optional[tuple[FramePredictions, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "forward", tuple(self.forward))
        _check_frame_cover(self.clip, self.forward, "forward")
        if self.backward is not None:
            object.__setattr__(self, "backward", tuple(self.backward))
            _check_frame_cover(self.clip, self.backward, "backward")


@dataclass(frozen=True)
class ClipScore:
    """Raw, normalized, and aggregated uncertainty of one clip.

    ``aggregate`` must be recomputable from the normalized components
    under ``mode`` ("product" or "sum") within 1e-12. Components
    neutralized by an ablation are stored as the aggregation's neutral
    element so the invariant keeps holding.
    """

    clip: Clip
    h_var: float
    h_e: float
    d_bi: float
    phi_h_var: float
    phi_h_e: float
    phi_d_bi: float
    aggregate: float
    mode: str = "product"

    def __post_init__(self) -> None:
        for name in ("h_var", "h_e", "d_bi", "phi_h_var", "phi_h_e", "phi_d_bi"):
            if getattr(self, name) < 0:
                raise InvariantViolation(f"{name} = {getattr(self, name)} < 0")
        if self.mode == "product":
            expect = self.phi_h_e * self.phi_h_var * self.phi_d_bi
        elif self.mode == "sum":
            expect = self.phi_h_e + self.phi_h_var + self.phi_d_bi
        else:
            raise InvariantViolation(f"unknown aggregation mode {self.mode!r}")
        if abs(self.aggregate - expect) > AGGREGATE_TOL:
            raise InvariantViolation(
                f"aggregate {self.aggregate} inconsistent with {self.mode} of "
                f"normalized components ({expect})"
            )


@dataclass(frozen=True)
class BudgetSchedule:
    """Per-round frame allowance as fractions of total training frames."""

    initial_fraction: float
    increment_fraction: float
    total_frames: int

    def __post_init__(self) -> None:
        if not (0.0 < self.initial_fraction <= 1.0):
            raise InvariantViolation(f"initial_fraction {self.initial_fraction} not in (0, 1]")
        if not (0.0 < self.increment_fraction <= 1.0):
            raise InvariantViolation(f"increment_fraction {self.increment_fraction} not in (0, 1]")
        if self.total_frames < 1:
            raise InvariantViolation(f"total_frames {self.total_frames} < 1")


@dataclass(frozen=True)
class HistoryEntry:
    round_index: int
    selected: tuple[Clip, ...]
    strategy: str


def check_pairwise_disjoint(clips: Sequence[Clip]) -> None:
    """Reject same-video clips whose sampled frame sets intersect."""
    used: dict[VideoId, set[int]] = {}
    for c in clips:
        frames = c.frame_set()
        seen = used.setdefault(c.video, set())
        if seen & frames:
            raise InvariantViolation(
                f"clips of video {c.video} share sampled frames"
            )
        seen.update(frames)


@dataclass(frozen=True)
class RoundState:
    """Labeled set, remaining pool, and selection history of an experiment.

    ``pool`` is the full candidate set, fixed for the experiment; the
    unlabeled pool is ``pool - labeled``. Same-video labeled clips must
    be pairwise frame-disjoint.
    """

    round_index: int
    labeled: frozenset[Clip]
    pool: frozenset[Clip]
    schedule: BudgetSchedule
    history: tuple[HistoryEntry, ...] = ()
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "labeled", frozenset(self.labeled))
        object.__setattr__(self, "pool", frozenset(self.pool))
        object.__setattr__(self, "history", tuple(self.history))
        if self.round_index < 0:
            raise InvariantViolation(f"round_index {self.round_index} < 0")
        if not (0 <= self.rng_seed < 2**64):
            raise InvariantViolation(f"rng_seed {self.rng_seed} not a u64")
        if not self.labeled <= self.pool:
            raise InvariantViolation("labeled clips must come from the pool")
        check_pairwise_disjoint(sorted(self.labeled))

    def unlabeled(self) -> frozenset[Clip]:
        return self.pool - self.labeled
