"""Acquisition strategies, budget schedules, and round evolution.

Four interchangeable strategies produce a per-round batch from the
unlabeled pool:

* ``cutal``: two stages; score every unlabeled clip (uncertainty
  components, pool normalization, aggregation), keep the ``delta * b``
  highest scorers, then pick b of them with temporal k-center greedy.
  Component ablations (no_var / no_ent / no_bidir) neutralize one
  normalized factor; no_temporal replaces stage 2 with a plain top-b by
  aggregate.
* ``random``: uniform draws without replacement, rejecting draws that
  overlap prior picks. Uses the counter-based Philox generator so a
  seed replays identically across platforms.
* ``entropy``: per clip, the mean over frames (with at least one track
  query) of the max track-query entropy; top-b by that score.
* ``coreset``: feature-space k-center greedy over mean track-query
  embeddings, against the labeled clips' embeddings.

Every strategy skips candidates whose sampled frames overlap the
labeled set or earlier picks, returns at most b clips, and is a pure
function of (inputs, seed). If admissible candidates run out the
partial batch is returned under a SelectionShortfall warning.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import diversity, scoring, uncertainty
from .errors import BudgetTooSmall, EmptyPool, InvariantViolation, SchemaError
from .model import (
    BudgetSchedule,
    Clip,
    ClipPredictions,
    ClipScore,
    HistoryEntry,
    QueryKind,
    RoundState,
)
from .pool import ClipPool
from .scoring import AggregationMode
from .uncertainty import UncertaintyConfig

ABLATION_FLAGS = frozenset({"no_var", "no_ent", "no_bidir", "no_temporal"})


class StrategyName(enum.Enum):
    CUTAL = "cutal"
    RANDOM = "random"
    ENTROPY = "entropy"
    CORESET = "coreset"


@dataclass(frozen=True)
class StrategyConfig:
    name: StrategyName = StrategyName.CUTAL
    ablation: frozenset[str] = frozenset()
    aggregation: AggregationMode = AggregationMode.PRODUCT
    delta: int = 4
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "ablation", frozenset(self.ablation))
        unknown = self.ablation - ABLATION_FLAGS
        if unknown:
            raise InvariantViolation(f"unknown ablation flags {sorted(unknown)}")
        if self.ablation and self.name is not StrategyName.CUTAL:
            raise InvariantViolation("ablation flags apply to the cutal strategy only")
        if self.delta < 1:
            raise InvariantViolation(f"delta {self.delta} < 1")
        if not (0 <= self.rng_seed < 2**64):
            raise InvariantViolation(f"rng_seed {self.rng_seed} not a u64")

    def label(self) -> str:
        """Human-readable arm name, e.g. "cutal~no_temporal" or "cutal+sum"."""
        parts = [self.name.value]
        if self.aggregation is AggregationMode.SUM:
            parts.append("+sum")
        for flag in sorted(self.ablation):
            parts.append(f"~{flag}")
        return "".join(parts)


@dataclass(frozen=True)
class RoundBudget:
    """Frame budget of one round and the clip budget it buys."""

    frames: int
    clips: int

    def __post_init__(self) -> None:
        if self.clips < 1:
            raise BudgetTooSmall(
                f"budget of {self.frames} frames buys {self.clips} clips"
            )


def budget_for_round(
    schedule: BudgetSchedule, round_index: int, clip_length: int
) -> RoundBudget:
    """Round 0 gets the initial fraction of total frames, every later
    round the increment fraction; the clip budget is floor(frames / T)."""
    if round_index < 0:
        raise InvariantViolation(f"round_index {round_index} < 0")
    fraction = (
        schedule.initial_fraction if round_index == 0 else schedule.increment_fraction
    )
    frames = int(fraction * schedule.total_frames)
    return RoundBudget(frames=frames, clips=frames // clip_length)


def round_rng(seed: int, round_index: int) -> np.random.Generator:
    """Philox stream for one round, derived from (seed, round index)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(round_index,)))
    )


def _sorted_unlabeled(state: RoundState) -> list[Clip]:
    pool = sorted(state.unlabeled())
    if not pool:
        raise EmptyPool("unlabeled pool is exhausted")
    return pool


def _predictions_for(
    clips: Sequence[Clip], predictions: Mapping[Clip, ClipPredictions]
) -> list[ClipPredictions]:
    out = []
    for clip in clips:
        try:
            out.append(predictions[clip])
        except KeyError:
            raise SchemaError(f"no predictions for clip {clip.key()}") from None
    return out


def _take_admissible(
    ranked: Sequence[Clip], labeled: frozenset[Clip], b: int
) -> list[Clip]:
    """Top-b scan that skips clips overlapping the labeled set or
    earlier picks."""
    used = diversity._used_frames(labeled)
    selected: list[Clip] = []
    for clip in ranked:
        if len(selected) == b:
            break
        if diversity._is_admissible(clip, used):
            selected.append(clip)
            used.setdefault(clip.video, set()).update(clip.frames())
    if len(selected) < b:
        warnings.warn(
            f"only {len(selected)} of {b} budgeted clips admissible",
            diversity.SelectionShortfall,
            stacklevel=2,
        )
    return selected


def score_unlabeled(
    state: RoundState,
    predictions: Mapping[Clip, ClipPredictions],
    cfg: StrategyConfig,
) -> list[ClipScore]:
    """Stage 1: raw components and pool-normalized scores for all of the
    unlabeled pool."""
    pool = _sorted_unlabeled(state)
    preds = _predictions_for(pool, predictions)
    raw = [
        (clip, uncertainty.score_clip_raw(p, cfg.uncertainty))
        for clip, p in zip(pool, preds)
    ]
    component_ablations = cfg.ablation & frozenset(scoring.COMPONENT_ABLATIONS)
    return scoring.score_pool(raw, cfg.aggregation, ablate=component_ablations)


def select_cutal(
    pool: ClipPool,
    predictions: Mapping[Clip, ClipPredictions],
    state: RoundState,
    budget: RoundBudget,
    cfg: StrategyConfig,
) -> list[Clip]:
    scored = score_unlabeled(state, predictions, cfg)
    if "no_temporal" in cfg.ablation:
        ranked = [s.clip for s in sorted(scored, key=scoring.score_sort_key)]
        return _take_admissible(ranked, state.labeled, budget.clips)
    candidates = scoring.top_candidates(scored, budget.clips, cfg.delta)
    return diversity.k_center_greedy_temporal(candidates, state.labeled, budget.clips)


def select_random(state: RoundState, budget: RoundBudget, rng_seed: int) -> list[Clip]:
    pool = _sorted_unlabeled(state)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=rng_seed)))
    used = diversity._used_frames(state.labeled)
    selected: list[Clip] = []
    while pool and len(selected) < budget.clips:
        clip = pool.pop(int(rng.integers(len(pool))))
        if diversity._is_admissible(clip, used):
            selected.append(clip)
            used.setdefault(clip.video, set()).update(clip.frames())
    if len(selected) < budget.clips:
        warnings.warn(
            f"only {len(selected)} of {budget.clips} budgeted clips admissible",
            diversity.SelectionShortfall,
            stacklevel=2,
        )
    return selected


def entropy_baseline_score(preds: ClipPredictions) -> float:
    """Mean over frames (with any track query) of the max track-query
    entropy; 0 for clips with no track queries at all."""
    total = 0.0
    n_valid = 0
    for frame, ents in zip(preds.forward, uncertainty._frame_entropies(preds.forward)):
        track_ents = [
            h for q, h in zip(frame.queries, ents) if q.kind is QueryKind.TRACK
        ]
        if track_ents:
            total += max(track_ents)
            n_valid += 1
    return total / n_valid if n_valid else 0.0


def select_entropy(
    pool: ClipPool,
    predictions: Mapping[Clip, ClipPredictions],
    state: RoundState,
    budget: RoundBudget,
) -> list[Clip]:
    clips = _sorted_unlabeled(state)
    preds = _predictions_for(clips, predictions)
    scores = [entropy_baseline_score(p) for p in preds]
    ranked = [
        clip
        for _, clip in sorted(
            zip(scores, clips),
            key=lambda pair: (-pair[0], pair[1].video.id, pair[1].start_frame),
        )
    ]
    return _take_admissible(ranked, state.labeled, budget.clips)


def select_coreset(
    pool: ClipPool,
    predictions: Mapping[Clip, ClipPredictions],
    state: RoundState,
    budget: RoundBudget,
) -> list[Clip]:
    clips = _sorted_unlabeled(state)
    candidates = [
        (clip, diversity.mean_clip_embedding(p))
        for clip, p in zip(clips, _predictions_for(clips, predictions))
    ]
    labeled = sorted(state.labeled)
    references = [
        (clip, diversity.mean_clip_embedding(p))
        for clip, p in zip(labeled, _predictions_for(labeled, predictions))
    ]
    return diversity.k_center_greedy_features(candidates, references, budget.clips)


def select(
    pool: ClipPool,
    predictions: Mapping[Clip, ClipPredictions],
    state: RoundState,
    budget: RoundBudget,
    cfg: StrategyConfig,
) -> list[Clip]:
    """Dispatch on the configured strategy."""
    if cfg.name is StrategyName.CUTAL:
        return select_cutal(pool, predictions, state, budget, cfg)
    if cfg.name is StrategyName.RANDOM:
        return select_random(state, budget, cfg.rng_seed)
    if cfg.name is StrategyName.ENTROPY:
        return select_entropy(pool, predictions, state, budget)
    return select_coreset(pool, predictions, state, budget)


def advance_round(
    state: RoundState, selection: Sequence[Clip], strategy_name: str
) -> RoundState:
    """Fold a selection into the labeled set and open the next round."""
    selection = list(selection)
    if len(set(selection)) != len(selection):
        raise InvariantViolation("selection contains duplicate clips")
    already = [c for c in selection if c in state.labeled]
    if already:
        raise InvariantViolation(
            f"selection re-labels clips {[c.key() for c in already]}"
        )
    outside = [c for c in selection if c not in state.pool]
    if outside:
        raise InvariantViolation(
            f"selection contains clips outside the pool {[c.key() for c in outside]}"
        )
    return RoundState(
        round_index=state.round_index + 1,
        labeled=state.labeled | set(selection),
        pool=state.pool,
        schedule=state.schedule,
        history=state.history
        + (HistoryEntry(state.round_index, tuple(selection), strategy_name),),
        rng_seed=state.rng_seed,
    )
