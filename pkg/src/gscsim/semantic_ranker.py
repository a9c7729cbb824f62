"""Ranking of scene semantics for transmission.

Two families: goal-oriented (GO) ranking, which boosts items matching the
question's keywords or question graph, and the data-oriented (DO) and
annotation-order (Original) baselines. BBox items are scored by corpus label
frequency plus keyword membership; scene-graph triplets by a graph-edit
similarity to the question graph weighted by pattern frequency.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .graph_edit import GedCosts, LabelledGraph, ged
from .question_frontend import (
    KeywordSet,
    Opcode,
    ReasoningProgram,
    RELATE_INCOMING,
)
from .scene_source import (
    CorpusStats,
    DetectedObject,
    SceneAnnotation,
    SGTriplet,
    triplet_pattern,
)


class PayloadMode(enum.Enum):
    BBOX = "BBox"
    SG = "SG"


class EmptyStatisticsError(ValueError):
    """Ranking requested against a corpus with no counted items."""


@dataclass(frozen=True)
class ScoredItem:
    item: DetectedObject | SGTriplet
    lf_score: float
    go_score: float
    combined: float
    source_rank: int


@dataclass(frozen=True)
class RankedPayload:
    """Ordered, scored semantic items plus the objects triplets refer to."""

    mode: PayloadMode
    items: tuple[ScoredItem, ...]
    n_top: int
    scene_objects: tuple[DetectedObject, ...] = ()


@dataclass(frozen=True)
class RankerConfig:
    go_weight: float = 1.0
    ged_costs: GedCosts = GedCosts()
    allow_heuristic: bool = False
    literal_sg_score: bool = False  # GED times frequency, no similarity transform

    def __post_init__(self):
        if self.go_weight < 1.0:
            raise ValueError("go_weight must be at least 1")


def lf_score(label_token: int, stats: CorpusStats) -> float:
    """Corpus frequency of a label: n(label) / total object count."""
    total = stats.label_total
    if total == 0:
        raise EmptyStatisticsError("no labels counted in the corpus")
    return stats.label_count(label_token) / total


def go_score(
    item: DetectedObject | SGTriplet,
    keywords: KeywordSet,
    w: float = 1.0,
    scene: SceneAnnotation | None = None,
) -> float:
    """w when the item touches the question keywords, else 0."""
    if w < 1.0:
        raise ValueError("goal weight w must be at least 1")
    if isinstance(item, DetectedObject):
        hit = item.label_token in keywords.object_tokens
    else:
        if scene is None:
            raise ValueError("scoring a triplet requires its scene")
        s_tok, r_tok, o_tok = triplet_pattern(scene, item)
        hit = (
            s_tok in keywords.object_tokens
            or o_tok in keywords.object_tokens
            or r_tok in keywords.relation_tokens
        )
    return w if hit else 0.0


def rank_bbox(
    objects: list[DetectedObject],
    keywords: KeywordSet,
    stats: CorpusStats,
    w: float = 1.0,
    n_top: int | None = None,
) -> RankedPayload:
    """Keyword-boosted frequency ranking of detected objects."""
    scored = []
    for rank, obj in enumerate(objects):
        lf = lf_score(obj.label_token, stats)
        go = go_score(obj, keywords, w)
        scored.append(
            ScoredItem(item=obj, lf_score=lf, go_score=go, combined=lf + go, source_rank=rank)
        )
    return _sorted_payload(PayloadMode.BBOX, scored, n_top, tuple(objects))


def triplet_graph(pattern: tuple[int, int, int]) -> LabelledGraph:
    """Two-node, one-edge graph of a (subject, relation, object) pattern."""
    s_tok, r_tok, o_tok = pattern
    return LabelledGraph(node_labels=(s_tok, o_tok), edges=((0, 1, r_tok),))


def build_question_graph(keywords: KeywordSet, program: ReasoningProgram) -> LabelledGraph:
    """Question graph: keyword objects as nodes, RELATE steps as edges.

    Each RELATE edge connects the label selected before it with the label
    filtered right after it; purely positional questions yield no edges.
    """
    nodes = sorted(keywords.object_tokens)
    node_index = {tok: i for i, tok in enumerate(nodes)}
    edges = []
    last_select: int | None = None
    steps = program.steps
    for i, step in enumerate(steps):
        if step.opcode in (Opcode.SELECT, Opcode.FILTER_LABEL):
            last_select = step.args[0]
        if step.opcode is not Opcode.RELATE:
            continue
        rel_tok, direction = step.args
        anchor = last_select
        partner = None
        if i + 1 < len(steps) and steps[i + 1].opcode is Opcode.FILTER_LABEL:
            partner = steps[i + 1].args[0]
        if anchor is None or partner is None:
            continue
        if anchor not in node_index or partner not in node_index:
            continue
        if direction == RELATE_INCOMING:
            edges.append((node_index[partner], node_index[anchor], rel_tok))
        else:
            edges.append((node_index[anchor], node_index[partner], rel_tok))
    return LabelledGraph(node_labels=tuple(nodes), edges=tuple(edges))


def sg_score(
    t: SGTriplet,
    question_graph: LabelledGraph,
    stats: CorpusStats,
    costs: GedCosts,
    scene: SceneAnnotation,
    scene_pattern_total: int | None = None,
    literal: bool = False,
    allow_heuristic: bool = False,
) -> float:
    """Question relevance of one triplet times its frequency weight.

    Relevance is 1 / (1 + GED(triplet graph, question graph)); the frequency
    weight is the corpus count of the triplet's pattern over the summed
    corpus counts of all patterns in this scene. With ``literal`` the raw
    GED multiplies the weight instead (dissimilar triplets score high).
    """
    pattern = triplet_pattern(scene, t)
    if scene_pattern_total is None:
        scene_pattern_total = _scene_pattern_total(scene, stats)
    if scene_pattern_total <= 0:
        raise EmptyStatisticsError("scene triplet patterns have no corpus counts")
    weight = stats.pattern_count(pattern) / scene_pattern_total
    distance = ged(
        triplet_graph(pattern), question_graph, costs, allow_heuristic=allow_heuristic
    )
    if literal:
        return distance * weight
    return weight / (1.0 + distance)


def _scene_pattern_total(scene: SceneAnnotation, stats: CorpusStats) -> int:
    return sum(stats.pattern_count(triplet_pattern(scene, t)) for t in scene.triplets)


def rank_sg(
    triplets: list[SGTriplet],
    question_graph: LabelledGraph,
    stats: CorpusStats,
    scene: SceneAnnotation,
    n_top: int | None = None,
    costs: GedCosts | None = None,
    literal: bool = False,
    allow_heuristic: bool = False,
) -> RankedPayload:
    """Rank scene-graph triplets by question-graph similarity and frequency."""
    costs = costs or GedCosts()
    scene_total = _scene_pattern_total(scene, stats) if triplets else 0
    scored = []
    for rank, t in enumerate(triplets):
        s = sg_score(
            t,
            question_graph,
            stats,
            costs,
            scene,
            scene_pattern_total=scene_total,
            literal=literal,
            allow_heuristic=allow_heuristic,
        )
        scored.append(
            ScoredItem(item=t, lf_score=0.0, go_score=s, combined=s, source_rank=rank)
        )
    return _sorted_payload(PayloadMode.SG, scored, n_top, scene.objects)


def rank_do(
    items: list[DetectedObject] | list[SGTriplet],
    stats: CorpusStats,
    n_top: int | None = None,
    scene: SceneAnnotation | None = None,
) -> RankedPayload:
    """Frequency-only baseline: corpus label or pattern counts, descending."""
    scored = []
    mode = PayloadMode.BBOX
    for rank, item in enumerate(items):
        if isinstance(item, DetectedObject):
            score = lf_score(item.label_token, stats)
        else:
            if scene is None:
                raise ValueError("ranking triplets requires their scene")
            mode = PayloadMode.SG
            score = float(stats.pattern_count(triplet_pattern(scene, item)))
        scored.append(
            ScoredItem(item=item, lf_score=score, go_score=0.0, combined=score, source_rank=rank)
        )
    scene_objects = scene.objects if scene is not None else tuple(
        i for i in items if isinstance(i, DetectedObject)
    )
    return _sorted_payload(mode, scored, n_top, scene_objects)


def rank_original(
    items: list[DetectedObject] | list[SGTriplet],
    n_top: int | None = None,
    scene: SceneAnnotation | None = None,
) -> RankedPayload:
    """No ranking: annotation order, truncated."""
    mode = PayloadMode.BBOX
    scored = []
    for rank, item in enumerate(items):
        if isinstance(item, SGTriplet):
            mode = PayloadMode.SG
            if scene is None:
                raise ValueError("ranking triplets requires their scene")
        scored.append(
            ScoredItem(item=item, lf_score=0.0, go_score=0.0, combined=0.0, source_rank=rank)
        )
    scene_objects = scene.objects if scene is not None else tuple(
        i for i in items if isinstance(i, DetectedObject)
    )
    return _sorted_payload(mode, scored, n_top, scene_objects)


def _sorted_payload(
    mode: PayloadMode,
    scored: list[ScoredItem],
    n_top: int | None,
    scene_objects: tuple[DetectedObject, ...],
) -> RankedPayload:
    if n_top is None:
        n_top = len(scored)
    if n_top < 0:
        raise ValueError("n_top must be non-negative")
    ordered = sorted(scored, key=lambda s: (-s.combined, s.source_rank))
    return RankedPayload(
        mode=mode,
        items=tuple(ordered[:n_top]),
        n_top=n_top,
        scene_objects=tuple(scene_objects),
    )
