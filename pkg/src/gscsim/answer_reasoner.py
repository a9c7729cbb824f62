"""Program execution over received semantics.

The reasoner rebuilds a small scene model from whatever payload entries
survived the link (objects deduplicated by label and box, plus relation
edges in SG mode) and runs the question's instruction program over it as
set operations. Missing information degrades to the answer "unknown"
rather than a guess, so accuracy stays a clean function of what arrived.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .knowledge_base import KnowledgeBase, UNK
from .phy_link.wire import WireEntry
from .question_frontend import (
    Opcode,
    QuestionType,
    ReasoningProgram,
    RELATE_INCOMING,
)
from .scene_source import SceneAnnotation
from .semantic_ranker import PayloadMode

UNKNOWN_ANSWER = "unknown"


class Confidence(enum.Enum):
    GROUNDED = "Grounded"
    INSUFFICIENT_DATA = "InsufficientData"


@dataclass(frozen=True)
class Answer:
    value: str
    confidence: Confidence

    def __post_init__(self):
        if (self.value == UNKNOWN_ANSWER) != (
            self.confidence is Confidence.INSUFFICIENT_DATA
        ):
            raise ValueError("'unknown' and InsufficientData must coincide")

    @classmethod
    def grounded(cls, value: str) -> "Answer":
        return cls(value=value, confidence=Confidence.GROUNDED)

    @classmethod
    def unknown(cls) -> "Answer":
        return cls(value=UNKNOWN_ANSWER, confidence=Confidence.INSUFFICIENT_DATA)


@dataclass(frozen=True)
class ReceivedObject:
    label_token: int
    box: tuple[int, int, int, int]
    attribute_tokens: frozenset[int]

    @property
    def center(self) -> tuple[float, float]:
        x, y, w, h = self.box
        return (x + w / 2.0, y + h / 2.0)


@dataclass(frozen=True)
class ReceivedScene:
    """Deduplicated objects and relation edges reconstructed from the wire."""

    objects: tuple[ReceivedObject, ...]
    edges: frozenset[tuple[int, int, int]]  # (subject idx, relation, object idx)

    @classmethod
    def from_entries(cls, entries: tuple[WireEntry, ...]) -> "ReceivedScene":
        keys: dict[tuple[int, tuple[int, int, int, int]], int] = {}
        attrs: list[set[int]] = []
        boxes: list[tuple[int, tuple[int, int, int, int]]] = []

        def upsert(token: int, box: tuple[int, int, int, int]) -> int:
            key = (token, box)
            if key not in keys:
                keys[key] = len(boxes)
                boxes.append(key)
                attrs.append(set())
            return keys[key]

        edges = set()
        for e in entries:
            s_idx = upsert(e.subject_token, e.subject_box)
            attrs[s_idx].update(t for t in e.attribute_tokens if t != UNK)
            if not e.is_bbox:
                o_idx = upsert(e.object_token, e.object_box)
                edges.add((s_idx, e.relation_token, o_idx))
        objects = tuple(
            ReceivedObject(
                label_token=token, box=box, attribute_tokens=frozenset(attrs[i])
            )
            for i, (token, box) in enumerate(boxes)
        )
        return cls(objects=objects, edges=frozenset(edges))

    @classmethod
    def from_scene(
        cls, scene: SceneAnnotation, mode: PayloadMode = PayloadMode.SG
    ) -> "ReceivedScene":
        """Complete, loss-free model of a scene (the perfect-link reference)."""
        objects = tuple(
            ReceivedObject(
                label_token=o.label_token,
                box=o.box,
                attribute_tokens=frozenset(t for t in o.attribute_tokens if t != UNK),
            )
            for o in scene.objects
        )
        edges: set[tuple[int, int, int]] = set()
        if mode is PayloadMode.SG:
            for t in scene.triplets:
                edges.add((t.subject_obj, t.relation_token, t.object_obj))
        return cls(objects=objects, edges=frozenset(edges))


def _positioned(obj: ReceivedObject, direction: str, anchor: ReceivedObject) -> bool:
    ox, oy = obj.center
    ax, ay = anchor.center
    if direction == "left":
        return ox < ax
    if direction == "right":
        return ox > ax
    if direction == "above":
        return oy < ay
    if direction == "below":
        return oy > ay
    raise ValueError(f"unknown direction {direction!r}")


def _load_bundled_kinds() -> dict[str, list[str]]:
    with resources.as_file(
        resources.files("gscsim.data").joinpath("attribute_kinds.json")
    ) as p:
        return json.loads(Path(p).read_text())


class Reasoner:
    """Executes reasoning programs against received scenes."""

    def __init__(self, kb: KnowledgeBase, attribute_kinds: dict[str, list[str]] | None = None):
        self.kb = kb
        self.attribute_kinds = (
            attribute_kinds if attribute_kinds is not None else _load_bundled_kinds()
        )

    def execute(
        self,
        program: ReasoningProgram,
        received: ReceivedScene,
        mode: PayloadMode,
    ) -> Answer:
        objs = received.objects
        if not objs:
            return Answer.unknown()
        working: set[int] = set()
        history: list[bool] = []
        result: Answer | None = None

        for step in program.steps:
            op = step.opcode
            if op is Opcode.SELECT:
                tok = step.args[0]
                working = {i for i, o in enumerate(objs) if o.label_token == tok}
            elif op is Opcode.FILTER_LABEL:
                tok = step.args[0]
                working = {i for i in working if objs[i].label_token == tok}
            elif op is Opcode.FILTER_ATTR:
                tok = step.args[0]
                working = {i for i in working if tok in objs[i].attribute_tokens}
            elif op is Opcode.FILTER_POSITION:
                direction, tok = step.args
                anchors = [objs[i] for i in working]
                working = {
                    i
                    for i, o in enumerate(objs)
                    if o.label_token == tok
                    and any(_positioned(o, direction, a) for a in anchors)
                }
            elif op is Opcode.RELATE:
                if mode is PayloadMode.BBOX:
                    return Answer.unknown()
                rel_tok, direction = step.args
                if direction == RELATE_INCOMING:
                    working = {
                        s for (s, r, o) in received.edges if r == rel_tok and o in working
                    }
                else:
                    working = {
                        o for (s, r, o) in received.edges if r == rel_tok and s in working
                    }
            elif op is Opcode.EXISTS:
                hit = bool(working)
                history.append(hit)
                result = Answer.grounded("yes" if hit else "no")
            elif op is Opcode.COUNT:
                result = Answer.grounded(str(len(working)))
            elif op is Opcode.VERIFY_ATTR:
                result = self._verify(working, objs, step.args[0])
            elif op is Opcode.QUERY_ATTR:
                result = self._query(working, objs, step.args[0])
            elif op is Opcode.CHOOSE:
                result = self._choose(working, objs, step.args[0], step.args[1])
            elif op is Opcode.AND:
                result = _combine(history, all)
            elif op is Opcode.OR:
                result = _combine(history, any)
            else:  # pragma: no cover - opcode enum is closed
                raise ValueError(f"unhandled opcode {op}")
        assert result is not None  # grammar guarantees a terminal step
        return result

    def _verify(self, working: set[int], objs, tok: int) -> Answer:
        if not working:
            return Answer.unknown()
        hit = any(tok in objs[i].attribute_tokens for i in working)
        return Answer.grounded("yes" if hit else "no")

    def _query(self, working: set[int], objs, kind: str) -> Answer:
        if not working:
            return Answer.unknown()
        terms = self.attribute_kinds.get(kind, [])
        referent = objs[min(working, key=lambda i: (objs[i].label_token, objs[i].box))]
        for term in terms:
            tok = self.kb.words.token_of(term)
            if tok != UNK and tok in referent.attribute_tokens:
                return Answer.grounded(term)
        return Answer.unknown()

    def _choose(self, working: set[int], objs, tok_a: int, tok_b: int) -> Answer:
        if not working:
            return Answer.unknown()
        for tok in (tok_a, tok_b):
            if any(tok in objs[i].attribute_tokens for i in working):
                return Answer.grounded(self.kb.words.term_of(tok))
        return Answer.unknown()


def _combine(history: list[bool], op) -> Answer:
    if not history:
        return Answer.unknown()
    return Answer.grounded("yes" if op(history) else "no")


@dataclass(frozen=True)
class LatencyBreakdown:
    """Per-question latency components and their parallel composition."""

    question_s: float
    extraction_s: float
    comm_s: float
    answer_s: float
    total_s: float


@dataclass(frozen=True)
class EvalRecord:
    question_id: int
    method: str
    channel: str
    snr_db: float
    n_top: int
    answer: str
    truth: str
    correct: bool
    type_tag: QuestionType
    meta_tags: tuple[str, ...]
    latency: LatencyBreakdown
    payload_bits: int
    blocks_dropped: int
    trial: int = 0


def answers_match(produced: str, truth: str, kb: KnowledgeBase) -> bool:
    """Exact string match after normalizing both sides."""
    return kb.normalize(produced) == kb.normalize(truth)


def score(records: list[EvalRecord]) -> float:
    """Mean correctness over evaluation records."""
    if not records:
        raise ValueError("cannot score an empty record list")
    return sum(1 for r in records if r.correct) / len(records)
