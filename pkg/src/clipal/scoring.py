"""Pool-level normalization and aggregation of raw clip components.

Each raw component is rescaled against the unlabeled pool's mean and
population standard deviation: phi(x) = max(0, (x - (mu - 3*sigma)) /
(6*sigma)), which maps mu - 3*sigma to 0, mu to 0.5 and mu + 3*sigma to
1 with no upper clamp. When sigma vanishes every clip ties at the
center value 0.5, which keeps the transform's affine invariance in the
degenerate limit. The aggregate is the product of the three normalized
components, or their sum in the additive variant. Component ablations
replace the normalized factor with the aggregation's neutral element
(1 for product, 0 for sum) so the remaining factors stay comparable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import AbstractSet, Sequence

import numpy as np

from .errors import EmptyPool, InvariantViolation
from .model import Clip, ClipScore

SIGMA_EPS = 1e-12

RawComponents = tuple[float, float, float]  # (h_var, h_e, d_bi)


class AggregationMode(enum.Enum):
    PRODUCT = "product"
    SUM = "sum"

    def neutral(self) -> float:
        return 1.0 if self is AggregationMode.PRODUCT else 0.0


#: ablation flag -> index into the (h_var, h_e, d_bi) component order
COMPONENT_ABLATIONS = {"no_var": 0, "no_ent": 1, "no_bidir": 2}


@dataclass(frozen=True)
class PoolStats:
    """Per-component mean and population standard deviation."""

    mean: tuple[float, float, float]
    std: tuple[float, float, float]
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise InvariantViolation(f"count {self.count} < 1")
        if any(s < 0 for s in self.std):
            raise InvariantViolation(f"negative std {self.std}")


def pool_stats(raw: Sequence[RawComponents]) -> PoolStats:
    """Mean and population std of each component over the unlabeled pool."""
    if not raw:
        raise EmptyPool("no raw components to normalize over")
    arr = np.asarray(raw, dtype=np.float64).reshape(len(raw), 3)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)
    return PoolStats(tuple(float(m) for m in mean), tuple(float(s) for s in std), len(raw))


def phi(x: float, mu: float, sigma: float) -> float:
    """Normalize x against the pool; all clips tie at 0.5 when sigma
    vanishes."""
    if sigma <= SIGMA_EPS:
        return 0.5
    return max(0.0, (x - (mu - 3.0 * sigma)) / (6.0 * sigma))


def aggregate(
    phi_h_e: float, phi_h_var: float, phi_d_bi: float, mode: AggregationMode
) -> float:
    if mode is AggregationMode.PRODUCT:
        return phi_h_e * phi_h_var * phi_d_bi
    return phi_h_e + phi_h_var + phi_d_bi


def score_pool(
    raw_scores: Sequence[tuple[Clip, RawComponents]],
    mode: AggregationMode = AggregationMode.PRODUCT,
    ablate: AbstractSet[str] = frozenset(),
) -> list[ClipScore]:
    """Normalize every unlabeled clip's raw triple and aggregate.

    ``raw_scores`` must cover exactly the unlabeled pool: the stats are
    computed over the given triples. Flags in ``ablate`` (no_var,
    no_ent, no_bidir) neutralize the corresponding normalized factor.
    """
    unknown = set(ablate) - set(COMPONENT_ABLATIONS)
    if unknown:
        raise InvariantViolation(f"unknown component ablations {sorted(unknown)}")
    stats = pool_stats([raw for _, raw in raw_scores])
    neutral = mode.neutral()
    neutralized = [COMPONENT_ABLATIONS[flag] for flag in ablate]
    out = []
    for clip, (h_var, h_e, d_bi) in raw_scores:
        phis = [
            phi(h_var, stats.mean[0], stats.std[0]),
            phi(h_e, stats.mean[1], stats.std[1]),
            phi(d_bi, stats.mean[2], stats.std[2]),
        ]
        for idx in neutralized:
            phis[idx] = neutral
        out.append(
            ClipScore(
                clip=clip,
                h_var=h_var,
                h_e=h_e,
                d_bi=d_bi,
                phi_h_var=phis[0],
                phi_h_e=phis[1],
                phi_d_bi=phis[2],
                aggregate=aggregate(phis[1], phis[0], phis[2], mode),
                mode=mode.value,
            )
        )
    return out


def score_sort_key(score: ClipScore) -> tuple[float, str, int]:
    """Descending aggregate, ties by (video id, start_frame) ascending."""
    return (-score.aggregate, score.clip.video.id, score.clip.start_frame)


def top_candidates(
    scored: Sequence[ClipScore], b: int, delta: int = 4
) -> list[ClipScore]:
    """The min(delta * b, all) highest-aggregate clips, best first."""
    if b < 1:
        raise InvariantViolation(f"clip budget {b} < 1")
    if delta < 1:
        raise InvariantViolation(f"candidate multiplier {delta} < 1")
    ranked = sorted(scored, key=score_sort_key)
    return ranked[: min(delta * b, len(ranked))]
