"""Clip pool enumeration over video timelines.

The pool is enumerated once per experiment from a dataset manifest and
never re-grown; selection only shrinks the unlabeled remainder. Clip
starts are placed every ``start_stride`` frames (default 1, the densest
pool), and a clip is kept iff its last sampled frame fits inside the
video.

Note on admissibility: the labeling constraint is stated on the sampled
frame sets, not on intervals. Two same-video clips whose starts differ
by less than the clip span can still be disjoint when their offset is
not a multiple of the sampling interval (e.g. starts 0 and 1 with
interval 5 share no frame), and such interleaved clips are admissible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import EmptyPool, InvariantViolation
from .model import Clip, VideoId


@dataclass(frozen=True)
class DatasetManifest:
    """Video identifiers and frame counts of the training set."""

    videos: tuple[tuple[VideoId, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "videos", tuple((v, int(n)) for v, n in self.videos))
        seen: set[VideoId] = set()
        for vid, n_frames in self.videos:
            if vid in seen:
                raise InvariantViolation(f"duplicate video id {vid}")
            seen.add(vid)
            if n_frames < 1:
                raise InvariantViolation(f"video {vid} has frame_count {n_frames} < 1")

    def frame_count(self, video: VideoId) -> int:
        for vid, n_frames in self.videos:
            if vid == video:
                return n_frames
        raise KeyError(str(video))

    def total_frames(self) -> int:
        return sum(n for _, n in self.videos)


@dataclass(frozen=True)
class PoolParams:
    length: int
    interval: int
    start_stride: int

    def __post_init__(self) -> None:
        if self.length < 2:
            raise InvariantViolation(f"clip length {self.length} < 2")
        if self.interval < 1:
            raise InvariantViolation(f"interval {self.interval} < 1")
        if self.start_stride < 1:
            raise InvariantViolation(f"start_stride {self.start_stride} < 1")


@dataclass(frozen=True)
class ClipPool:
    """Ordered, duplicate-free candidate set over a manifest."""

    clips: tuple[Clip, ...]
    params: PoolParams
    manifest: DatasetManifest

    def __post_init__(self) -> None:
        object.__setattr__(self, "clips", tuple(self.clips))
        keys = [c.key() for c in self.clips]
        if keys != sorted(keys):
            raise InvariantViolation("pool clips must be sorted by (video, start_frame)")
        if len(set(keys)) != len(keys):
            raise InvariantViolation("pool contains duplicate (video, start_frame)")
        for c in self.clips:
            if c.length != self.params.length or c.interval != self.params.interval:
                raise InvariantViolation(f"clip {c.key()} does not match pool params")
            if c.last_frame() > self.manifest.frame_count(c.video) - 1:
                raise InvariantViolation(f"clip {c.key()} overruns its video")

    def __len__(self) -> int:
        return len(self.clips)


def build_pool(
    manifest: DatasetManifest, length: int, interval: int, start_stride: int = 1
) -> ClipPool:
    """Enumerate every clip that fits, per video, starts on the stride grid."""
    params = PoolParams(length, interval, start_stride)
    span = (length - 1) * interval
    clips = []
    for vid, n_frames in sorted(manifest.videos):
        last_start = n_frames - 1 - span
        for start in range(0, last_start + 1, start_stride):
            clips.append(Clip(vid, start, length, interval))
    if not clips:
        raise EmptyPool(
            f"no video admits a clip of span {span + 1} frames"
        )
    return ClipPool(tuple(clips), params, manifest)


def frames_of(clip: Clip) -> frozenset[int]:
    """Sampled frame indices of the clip."""
    return clip.frame_set()


def overlaps(a: Clip, b: Clip) -> bool:
    """True iff the clips come from the same video and share a sampled frame."""
    if a.video != b.video:
        return False
    return bool(a.frame_set() & b.frame_set())


def used_frames(clips: Iterable[Clip]) -> dict[VideoId, set[int]]:
    """Per-video union of sampled frames, for fast admissibility checks."""
    used: dict[VideoId, set[int]] = {}
    for c in clips:
        used.setdefault(c.video, set()).update(c.frames())
    return used


def admissible_against(clip: Clip, used: dict[VideoId, set[int]]) -> bool:
    taken = used.get(clip.video)
    return taken is None or not (taken & clip.frame_set())


def admissible(candidate: Clip, annotated: Iterable[Clip]) -> bool:
    """True iff the candidate overlaps no already annotated clip."""
    return admissible_against(candidate, used_frames(annotated))
