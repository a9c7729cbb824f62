"""Corpus loading and the device-side semantic source.

Scenes carry ground-truth object and scene-graph annotations that stand in
for a learned visual extractor; this module loads them, tokenizes every term
through the shared knowledge base, gathers the corpus statistics used by the
rankers, and models the extractor's compute latency.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

from .knowledge_base import KnowledgeBase, UNK
from .question_frontend import Question, QuestionType, tokenize_text

MAX_COORD = 0xFFFF
MAX_ATTRS = 0xFF


class CorpusError(ValueError):
    """Schema violation or dangling reference in a corpus file."""


@dataclass(frozen=True)
class DetectedObject:
    index: int
    label: str
    label_token: int
    box: tuple[int, int, int, int]  # x, y, w, h in pixels
    attributes: tuple[str, ...] = ()
    attribute_tokens: tuple[int, ...] = ()

    @property
    def center(self) -> tuple[float, float]:
        x, y, w, h = self.box
        return (x + w / 2.0, y + h / 2.0)


@dataclass(frozen=True)
class SGTriplet:
    subject_obj: int
    relation: str
    relation_token: int
    object_obj: int


@dataclass(frozen=True)
class SceneAnnotation:
    image_index: int
    height: int
    width: int
    depth: int
    objects: tuple[DetectedObject, ...]
    triplets: tuple[SGTriplet, ...]


@dataclass(frozen=True)
class DeviceProfile:
    """Compute model of the capture device and the reasoning endpoint."""

    device_tflops: float = 1.33
    bbox_cost_tflops: float = 0.44
    sg_cost_tflops: float = 0.02
    answer_cost_seconds: float = 0.01
    parse_cost_seconds: float = 0.1

    def __post_init__(self):
        for name in (
            "device_tflops",
            "bbox_cost_tflops",
            "sg_cost_tflops",
            "answer_cost_seconds",
            "parse_cost_seconds",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


class ExtractionKind(enum.Enum):
    BBOX_ONLY = "BBoxOnly"
    BBOX_PLUS_SG = "BBoxPlusSG"


@dataclass
class CorpusStats:
    """Corpus-wide label and triplet-pattern occurrence counts."""

    label_counts: dict[int, int] = field(default_factory=dict)
    pattern_counts: dict[tuple[int, int, int], int] = field(default_factory=dict)

    @property
    def label_total(self) -> int:
        return sum(self.label_counts.values())

    @property
    def pattern_total(self) -> int:
        return sum(self.pattern_counts.values())

    def label_count(self, token: int) -> int:
        return self.label_counts.get(token, 0)

    def pattern_count(self, pattern: tuple[int, int, int]) -> int:
        return self.pattern_counts.get(pattern, 0)

    def distinct_labels(self) -> int:
        return len(self.label_counts)


@dataclass
class Corpus:
    scenes: dict[int, SceneAnnotation]
    questions: list[Question]
    stats: CorpusStats
    kb: KnowledgeBase

    def scene_for(self, q: Question) -> SceneAnnotation:
        return self.scenes[q.image_index]


def triplet_pattern(scene: SceneAnnotation, t: SGTriplet) -> tuple[int, int, int]:
    """(subject label, relation, object label) token pattern of a triplet."""
    return (
        scene.objects[t.subject_obj].label_token,
        t.relation_token,
        scene.objects[t.object_obj].label_token,
    )


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise CorpusError(msg)


def _as_int(value, msg: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise CorpusError(msg)
    return value


def _load_scene(raw: dict, kb: KnowledgeBase) -> SceneAnnotation:
    for key in ("image_index", "height", "width", "depth", "objects", "triplets"):
        _require(key in raw, f"scene missing field {key!r}")
    idx = _as_int(raw["image_index"], "image_index must be an integer")
    height = _as_int(raw["height"], "height must be an integer")
    width = _as_int(raw["width"], "width must be an integer")
    depth = _as_int(raw["depth"], "depth must be an integer")
    _require(idx >= 0, f"scene {idx}: negative image_index")
    _require(
        0 < height <= MAX_COORD and 0 < width <= MAX_COORD and depth > 0,
        f"scene {idx}: bad dimensions {height}x{width}x{depth}",
    )

    objects = []
    for i, obj in enumerate(raw["objects"]):
        _require(isinstance(obj, dict), f"scene {idx}: object {i} not a mapping")
        for key in ("label", "box", "attributes"):
            _require(key in obj, f"scene {idx}: object {i} missing {key!r}")
        label = kb.normalize(str(obj["label"]))
        _require(bool(label), f"scene {idx}: object {i} has empty label")
        box = obj["box"]
        _require(
            isinstance(box, list) and len(box) == 4,
            f"scene {idx}: object {i} box must be [x, y, w, h]",
        )
        x, y, w, h = (_as_int(v, f"scene {idx}: object {i} box must be integers") for v in box)
        _require(w > 0 and h > 0, f"scene {idx}: object {i} has empty box")
        _require(
            0 <= x and 0 <= y and x + w <= width and y + h <= height,
            f"scene {idx}: object {i} box outside the image",
        )
        attrs = obj["attributes"]
        _require(
            isinstance(attrs, list) and len(attrs) <= MAX_ATTRS,
            f"scene {idx}: object {i} attributes must be a short list",
        )
        norm_attrs = tuple(kb.normalize(str(a)) for a in attrs)
        objects.append(
            DetectedObject(
                index=i,
                label=label,
                label_token=kb.objects.token_of(label, allow_assign=True),
                box=(x, y, w, h),
                attributes=norm_attrs,
                attribute_tokens=tuple(
                    kb.words.token_of(a, allow_assign=True) for a in norm_attrs
                ),
            )
        )

    triplets = []
    for i, trip in enumerate(raw["triplets"]):
        _require(isinstance(trip, dict), f"scene {idx}: triplet {i} not a mapping")
        for key in ("subject", "relation", "object"):
            _require(key in trip, f"scene {idx}: triplet {i} missing {key!r}")
        subj = _as_int(trip["subject"], f"scene {idx}: triplet {i} subject must be an index")
        objn = _as_int(trip["object"], f"scene {idx}: triplet {i} object must be an index")
        _require(
            0 <= subj < len(objects) and 0 <= objn < len(objects),
            f"scene {idx}: triplet {i} references object "
            f"{max(subj, objn)} of {len(objects)}",
        )
        _require(subj != objn, f"scene {idx}: triplet {i} relates an object to itself")
        relation = kb.normalize(str(trip["relation"]))
        _require(bool(relation), f"scene {idx}: triplet {i} has empty relation")
        triplets.append(
            SGTriplet(
                subject_obj=subj,
                relation=relation,
                relation_token=kb.relations.token_of(relation, allow_assign=True),
                object_obj=objn,
            )
        )

    return SceneAnnotation(
        image_index=idx,
        height=height,
        width=width,
        depth=depth,
        objects=tuple(objects),
        triplets=tuple(triplets),
    )


def _load_question(raw: dict, scenes: dict[int, SceneAnnotation], kb: KnowledgeBase) -> Question:
    for key in ("id", "text", "image_index", "answer", "type_tag", "meta_tags"):
        _require(key in raw, f"question missing field {key!r}")
    qid = _as_int(raw["id"], "question id must be an integer")
    text = str(raw["text"])
    _require(bool(text.strip()), f"question {qid}: empty text")
    image_index = _as_int(raw["image_index"], f"question {qid}: image_index must be an integer")
    _require(
        image_index in scenes,
        f"question {qid}: image_index {image_index} has no scene",
    )
    answer = str(raw["answer"])
    _require(bool(answer.strip()), f"question {qid}: empty answer")
    try:
        type_tag = QuestionType(raw["type_tag"])
    except ValueError as exc:
        raise CorpusError(f"question {qid}: unknown type_tag {raw['type_tag']!r}") from exc
    meta = raw["meta_tags"]
    _require(isinstance(meta, list), f"question {qid}: meta_tags must be a list")
    # Register question vocabulary so keyword extraction and program
    # compilation resolve on the sender side.
    for w in tokenize_text(text, kb):
        kb.words.token_of(w, allow_assign=True)
    kb.words.token_of(kb.normalize(answer), allow_assign=True)
    return Question(
        id=qid,
        text=text,
        image_index=image_index,
        answer=answer,
        type_tag=type_tag,
        meta_tags=tuple(str(m) for m in meta),
    )


def load_corpus(path: str | Path, kb: KnowledgeBase | None = None) -> Corpus:
    """Load and validate a corpus file; assigns tokens for every term."""
    kb = kb or KnowledgeBase()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CorpusError(f"cannot read corpus: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorpusError(f"corpus is not valid JSON: {exc}") from exc
    _require(isinstance(raw, dict), "corpus root must be a mapping")

    scenes: dict[int, SceneAnnotation] = {}
    for entry in raw.get("scenes", []):
        _require(isinstance(entry, dict), "scene entry not a mapping")
        scene = _load_scene(entry, kb)
        _require(
            scene.image_index not in scenes,
            f"duplicate image_index {scene.image_index}",
        )
        scenes[scene.image_index] = scene

    questions: list[Question] = []
    seen_ids: set[int] = set()
    for entry in raw.get("questions", []):
        _require(isinstance(entry, dict), "question entry not a mapping")
        q = _load_question(entry, scenes, kb)
        _require(q.id not in seen_ids, f"duplicate question id {q.id}")
        seen_ids.add(q.id)
        questions.append(q)

    stats = CorpusStats()
    for scene in scenes.values():
        for obj in scene.objects:
            stats.label_counts[obj.label_token] = (
                stats.label_counts.get(obj.label_token, 0) + 1
            )
        for t in scene.triplets:
            pat = triplet_pattern(scene, t)
            stats.pattern_counts[pat] = stats.pattern_counts.get(pat, 0) + 1

    return Corpus(scenes=scenes, questions=questions, stats=stats, kb=kb)


def load_bundled_corpus(kb: KnowledgeBase | None = None) -> Corpus:
    """Load the mini-corpus shipped with the package."""
    from importlib import resources

    with resources.as_file(
        resources.files("gscsim.data").joinpath("corpus.json")
    ) as p:
        return load_corpus(p, kb)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in canonical form (sorted keys, 2-space indent)."""
    doc = {
        "scenes": [
            {
                "image_index": s.image_index,
                "height": s.height,
                "width": s.width,
                "depth": s.depth,
                "objects": [
                    {
                        "label": o.label,
                        "box": list(o.box),
                        "attributes": list(o.attributes),
                    }
                    for o in s.objects
                ],
                "triplets": [
                    {
                        "subject": t.subject_obj,
                        "relation": t.relation,
                        "object": t.object_obj,
                    }
                    for t in s.triplets
                ],
            }
            for s in sorted(corpus.scenes.values(), key=lambda s: s.image_index)
        ],
        "questions": [
            {
                "id": q.id,
                "text": q.text,
                "image_index": q.image_index,
                "answer": q.answer,
                "type_tag": q.type_tag.value,
                "meta_tags": list(q.meta_tags),
            }
            for q in corpus.questions
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def extract_semantics(scene: SceneAnnotation) -> list[DetectedObject]:
    """Ground-truth object detections, in annotation order."""
    return list(scene.objects)


def generate_scene_graph(scene: SceneAnnotation) -> list[SGTriplet]:
    """Ground-truth scene-graph triplets, in annotation order."""
    return list(scene.triplets)


def extraction_latency(kind: ExtractionKind, profile: DeviceProfile) -> float:
    """Seconds the device spends producing the requested semantics."""
    cost = profile.bbox_cost_tflops
    if kind is ExtractionKind.BBOX_PLUS_SG:
        cost += profile.sg_cost_tflops
    return cost / profile.device_tflops


def image_bit_size(scene: SceneAnnotation) -> int:
    """Raw image size in bits at 32 bits per pixel per channel."""
    return 32 * scene.height * scene.width * scene.depth
