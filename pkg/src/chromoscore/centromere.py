"""Centromere candidate selection from skeleton widths and the MC/DC decision.

A centromere is a constriction: a skeletal point whose width sum
s(p) = dist(p, q1) + dist(p, q2) is locally minimal.  Only points whose
ruling points are collinear with them (s exceeds the chord dist(q1, q2) by
less than a small slack) are eligible, which restricts candidates to points
lying on a genuine width chord of the body and excludes cap points, where the
two ruling points sit on the same boundary patch.

The primary candidate p1 is the eligible point with minimal s.  A second
candidate p2 must be the next-smallest eligible point farther than tl from
p1, where tl is a fraction of the image's average chromosome length; a
chromosome is called dicentric when s(p2)/s(p1) stays within the ratio
threshold, otherwise p2 is discarded and the call is monocentric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidParams, NoSkeletons
from .segmentation import Contour
from .skeleton import Skeleton, SkeletonPoint

MC = "MC"
DC = "DC"


@dataclass(frozen=True)
class CentromereParams:
    """Slack, separation and ratio knobs of the candidate rules.

    slack_mode "absolute" treats collinearity_slack as pixels; "relative"
    scales it by the point's own width sum.
    """

    collinearity_slack: float = 0.1
    tl_fraction: float = 0.1
    ratio_threshold: float = 1.05
    slack_mode: str = "absolute"

    def __post_init__(self) -> None:
        if self.collinearity_slack <= 0:
            raise InvalidParams(f"collinearity_slack must be > 0, got {self.collinearity_slack}")
        if self.tl_fraction <= 0:
            raise InvalidParams(f"tl_fraction must be > 0, got {self.tl_fraction}")
        if self.ratio_threshold <= 1:
            raise InvalidParams(f"ratio_threshold must be > 1, got {self.ratio_threshold}")
        if self.slack_mode not in ("absolute", "relative"):
            raise InvalidParams(f"slack_mode must be absolute|relative, got {self.slack_mode!r}")


@dataclass(frozen=True)
class CandidateResult:
    """Outcome of the candidate search for one skeleton."""

    p1: SkeletonPoint
    p2: Optional[SkeletonPoint]
    s1: float
    s2: Optional[float]
    fallback: bool


@dataclass(frozen=True)
class ChromosomeCall:
    """Final per-chromosome decision with its diagnostics."""

    contour_id: int
    centromeres: tuple[SkeletonPoint, ...]
    label: str
    s1: float
    s2: Optional[float]
    ratio: Optional[float]
    fallback: bool

    def __post_init__(self) -> None:
        if self.label not in (MC, DC):
            raise ValueError(f"label must be MC|DC, got {self.label!r}")
        if (self.label == DC) != (len(self.centromeres) == 2):
            raise ValueError("DC exactly when two centromeres are kept")
        if len(self.centromeres) not in (1, 2):
            raise ValueError("a call carries one or two centromeres")


def width_sum(sp: SkeletonPoint) -> float:
    """s(p) = dist(p, q1) + dist(p, q2)."""
    return math.dist(sp.p, sp.q1) + math.dist(sp.p, sp.q2)


def average_chromosome_length(skeletons: list[Skeleton]) -> float:
    """Mean skeleton path length over the image's surviving chromosomes."""
    if not skeletons:
        raise NoSkeletons("no skeletons to average")
    return sum(sk.path_length for sk in skeletons) / len(skeletons)


def _is_collinear(sp: SkeletonPoint, params: CentromereParams) -> bool:
    s = width_sum(sp)
    chord = math.dist(sp.q1, sp.q2)
    slack = params.collinearity_slack
    if params.slack_mode == "relative":
        slack = slack * s
    return s - chord < slack


def find_candidates(
    skeleton: Skeleton, contour: Contour, params: CentromereParams, tl: float
) -> CandidateResult:
    """Select up to two constriction candidates from one contour's skeleton.

    Candidates must satisfy the collinearity condition; p1 minimizes the
    width sum, p2 is the next smallest farther than tl from p1.  When no
    point qualifies the global minimum-width point is returned flagged as a
    fallback.
    """
    ranked = sorted(
        (sp for sp in skeleton.points if _is_collinear(sp, params)),
        key=lambda sp: (width_sum(sp), sp.p[1], sp.p[0]),
    )
    if not ranked:
        p1 = min(skeleton.points, key=lambda sp: (sp.width, sp.p[1], sp.p[0]))
        return CandidateResult(p1=p1, p2=None, s1=width_sum(p1), s2=None, fallback=True)
    p1 = ranked[0]
    p2 = next((sp for sp in ranked[1:] if math.dist(p1.p, sp.p) > tl), None)
    return CandidateResult(
        p1=p1,
        p2=p2,
        s1=width_sum(p1),
        s2=None if p2 is None else width_sum(p2),
        fallback=False,
    )


def classify(
    p1: SkeletonPoint, p2: Optional[SkeletonPoint], params: CentromereParams
) -> tuple[str, tuple[SkeletonPoint, ...], Optional[float]]:
    """(label, kept centromeres, ratio): DC only when p2 holds within the ratio band."""
    if p2 is None:
        return MC, (p1,), None
    ratio = width_sum(p2) / width_sum(p1)
    if ratio > params.ratio_threshold:
        return MC, (p1,), ratio
    return DC, (p1, p2), ratio


def call_chromosome(
    skeleton: Skeleton, contour: Contour, params: CentromereParams, tl: float
) -> ChromosomeCall:
    """Candidate search plus classification for one skeleton."""
    cand = find_candidates(skeleton, contour, params, tl)
    label, kept, ratio = classify(cand.p1, cand.p2, params)
    return ChromosomeCall(
        contour_id=skeleton.contour_id,
        centromeres=kept,
        label=label,
        s1=cand.s1,
        s2=cand.s2,
        ratio=ratio,
        fallback=cand.fallback,
    )
