#!/usr/bin/env python3
"""Generate and validate the bundled mini-corpus.

The corpus interleaves three scene families that differ in where the
question-relevant objects sit in the annotation order and how common
their labels and triplet patterns are corpus-wide:

  family A (scenes 0-7): relevant objects are annotated last, but their
      labels recur across neighbouring scenes, so they are globally more
      frequent than the scene's one-off fillers.  Frequency ranking and
      question-aware ranking recover them; plain annotation order does not.
  family B (scenes 8-15): relevant objects are annotated last and their
      labels are slightly rarer than the fillers.  Only question-aware
      ranking recovers them.
  family C (scenes 16-23): relevant objects are annotated first and no
      scene exceeds nine objects, so every ranking recovers them.

Ground-truth answers are computed here by direct evaluation over the raw
generated annotations, deliberately independent of the package's reasoner.
The validation pass then loads the written file through the package,
parses every question, replays ranking + serialization + reasoning, and
asserts that the package agrees with the oracle and that each family
delivers (or withholds) its relevant items exactly as designed.

Usage: python3 tools/make_corpus.py [--out PATH] [--skip-validation]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
OUT_DEFAULT = REPO / "src" / "gscsim" / "data" / "corpus.json"

WIDTH, HEIGHT, DEPTH = 480, 320, 3
SEED = 20240823

RELATIONS = ["on", "near", "behind", "under", "beside"]
DIRS = ["left", "right", "above", "below"]
COLORS = ["red", "blue", "green", "yellow", "white", "black", "brown", "grey", "orange"]
MATERIALS = ["wooden", "metal", "plastic", "leather", "brick", "stone"]

C_LABELS = ["tree", "road", "car", "person", "building", "sidewalk", "window", "door"]
C_PLURALS = {
    "tree": "trees", "road": "roads", "car": "cars", "person": "people",
    "building": "buildings", "sidewalk": "sidewalks", "window": "windows",
    "door": "doors",
}

A_FILLER_LABELS = [
    "pole", "fence", "sign", "bench", "grass", "bush", "rock", "path",
    "gate", "wall", "roof", "lamp", "step", "crate", "barrel", "cart",
    "wheel", "pipe", "ladder", "bucket", "rope", "chain", "hose", "tile",
    "drain", "vent", "beam", "plank", "post", "curb", "hedge", "stump",
    "log", "branch", "trunk", "puddle", "booth", "stall", "kiosk", "awning",
    "banner", "ledge", "arch", "column", "pillar", "fountain", "hydrant",
    "planter",
]
A_TARGET_LABELS = [
    "kite", "statue", "clock", "boat", "cone", "flag", "umbrella", "mailbox",
    "bicycle", "drum", "vase", "kettle", "mirror", "candle", "basket", "helmet",
]
B_FILLER_LABELS = ["table", "chair", "shelf", "cup", "plate", "bottle", "bowl", "tray"]
B_TARGET_LABELS = [
    "radio", "globe", "trophy", "puppet", "magnet", "crayon", "ribbon", "marble",
    "feather", "button", "lantern", "goblet", "saddle", "trumpet", "wallet", "whistle",
]


def article(word: str) -> str:
    return "an" if word[0] in "aeiou" else "a"


def pos_phrase(direction: str, anchor: str) -> str:
    if direction in ("left", "right"):
        return f"on the {direction} of the {anchor}"
    return f"{direction} the {anchor}"


# ---------------------------------------------------------------------------
# scene construction helpers


class SceneBuilder:
    def __init__(self, image_index: int, rng: np.random.Generator):
        self.image_index = image_index
        self.rng = rng
        self.objects: list[dict] = []
        self.triplets: list[dict] = []
        self._cx: set[int] = set()
        self._cy: set[int] = set()

    def add_object(self, label: str) -> int:
        while True:
            w = int(self.rng.integers(24, 121))
            h = int(self.rng.integers(24, 101))
            x = int(self.rng.integers(0, WIDTH - w))
            y = int(self.rng.integers(0, HEIGHT - h))
            cx2, cy2 = 2 * x + w, 2 * y + h
            if cx2 not in self._cx and cy2 not in self._cy:
                self._cx.add(cx2)
                self._cy.add(cy2)
                break
        color = COLORS[int(self.rng.integers(len(COLORS)))]
        material = MATERIALS[int(self.rng.integers(len(MATERIALS)))]
        self.objects.append(
            {"label": label, "box": [x, y, w, h], "attributes": [color, material]}
        )
        return len(self.objects) - 1

    def add_triplet(self, s: int, rel: str, o: int, at: int | None = None) -> None:
        t = {"subject": s, "relation": rel, "object": o}
        if at is None:
            self.triplets.append(t)
        else:
            self.triplets.insert(at, t)

    def raw(self) -> dict:
        return {
            "image_index": self.image_index,
            "height": HEIGHT,
            "width": WIDTH,
            "depth": DEPTH,
            "objects": self.objects,
            "triplets": self.triplets,
        }


# ---------------------------------------------------------------------------
# answer oracle: direct evaluation over raw scene dicts


def _center(box: list[int]) -> tuple[float, float]:
    x, y, w, h = box
    return (x + w / 2.0, y + h / 2.0)


def _objs(scene: dict, label: str) -> list[int]:
    return [i for i, o in enumerate(scene["objects"]) if o["label"] == label]


def _only(scene: dict, label: str) -> dict:
    idxs = _objs(scene, label)
    assert len(idxs) == 1, f"label {label!r} not unique in scene {scene['image_index']}"
    return scene["objects"][idxs[0]]


def oracle_color(scene: dict, label: str) -> str:
    return _only(scene, label)["attributes"][0]


def oracle_material(scene: dict, label: str) -> str:
    return _only(scene, label)["attributes"][1]


def oracle_has_edge(scene: dict, sl: str, rel: str, ol: str) -> bool:
    objs = scene["objects"]
    return any(
        objs[t["subject"]]["label"] == sl
        and t["relation"] == rel
        and objs[t["object"]]["label"] == ol
        for t in scene["triplets"]
    )


def oracle_count_rel(scene: dict, sl: str, rel: str, ol: str) -> int:
    objs = scene["objects"]
    subjects = {
        t["subject"]
        for t in scene["triplets"]
        if objs[t["subject"]]["label"] == sl
        and t["relation"] == rel
        and objs[t["object"]]["label"] == ol
    }
    return len(subjects)


def _dir_ok(box: list[int], d: str, anchor_box: list[int]) -> bool:
    ox, oy = _center(box)
    ax, ay = _center(anchor_box)
    if d == "left":
        return ox < ax
    if d == "right":
        return ox > ax
    if d == "above":
        return oy < ay
    return oy > ay


def oracle_count_dir(scene: dict, label: str, d: str, anchor_label: str) -> int:
    anchor = _only(scene, anchor_label)
    return sum(
        1 for i in _objs(scene, label)
        if _dir_ok(scene["objects"][i]["box"], d, anchor["box"])
    )


def oracle_is_dir(scene: dict, label: str, d: str, anchor_label: str) -> bool:
    return oracle_count_dir(scene, label, d, anchor_label) > 0


# ---------------------------------------------------------------------------
# family builders


def yes_no(flag: bool) -> str:
    return "yes" if flag else "no"


def make_question(scene: dict, text: str, answer: str, type_tag: str,
                  intent: dict, relational: bool = False) -> dict:
    meta = ["Binary"] if answer in ("yes", "no") else ["Open"]
    return {
        "text": text,
        "answer": answer,
        "type_tag": type_tag,
        "meta_tags": meta,
        "image_index": scene["image_index"],
        "_intent": intent,
        "_relational": relational,
    }


ALL_HIT = {"GO": True, "DO": True, "Original": True}


def a_target_pair(a: int) -> tuple[str, str]:
    return A_TARGET_LABELS[2 * (a % 8)], A_TARGET_LABELS[2 * (a % 8) + 1]


def a_target_triplets(a: int) -> list[tuple[str, str, str]]:
    tx, ty = a_target_pair(a)
    return [
        (tx, RELATIONS[a % 5], ty),
        (ty, RELATIONS[(a + 2) % 5], tx),
    ]


def build_a_scene(a: int, rng: np.random.Generator) -> tuple[dict, list[dict]]:
    sb = SceneBuilder(a, rng)
    ring = A_FILLER_LABELS[6 * a: 6 * a + 6]
    idx = {lab: sb.add_object(lab) for lab in ring}
    for i in range(10):
        sb.add_triplet(idx[ring[i % 6]], RELATIONS[(a + i) % 5], idx[ring[(i + 2) % 6]])
    # strangers: targets of the two previous scenes, hosted here
    for origin in ((a - 2) % 8, (a - 1) % 8):
        tx, ty = a_target_pair(origin)
        ix, iy = sb.add_object(tx), sb.add_object(ty)
        host = {tx: ix, ty: iy}
        for s, rel, o in a_target_triplets(origin):
            sb.add_triplet(host[s], rel, host[o])
    # this scene's own targets, annotated last
    tx, ty = a_target_pair(a)
    ix, iy = sb.add_object(tx), sb.add_object(ty)
    home = {tx: ix, ty: iy}
    for s, rel, o in a_target_triplets(a):
        sb.add_triplet(home[s], rel, home[o])

    scene = sb.raw()
    go_do = {"GO": True, "DO": True, "Original": False}
    rel1 = RELATIONS[a % 5]
    qs = [
        make_question(
            scene, f"Is the {tx} {rel1} the {ty}?",
            yes_no(oracle_has_edge(scene, tx, rel1, ty)),
            "Relations", go_do, relational=True,
        )
    ]
    if a % 2 == 0:
        qs.append(make_question(
            scene, f"What color is the {tx}?", oracle_color(scene, tx), "Query", go_do))
    else:
        qs.append(make_question(
            scene, f"What is the color of the {tx}?", oracle_color(scene, tx),
            "Query", go_do))
    true_color = oracle_color(scene, ty)
    if a % 2 == 0:
        qs.append(make_question(
            scene, f"Is the {ty} {true_color}?", "yes", "Verify", go_do))
    else:
        wrong = COLORS[(COLORS.index(true_color) + 1) % len(COLORS)]
        qs.append(make_question(
            scene, f"Is the {ty} {wrong}?", "no", "Verify", go_do))
    if a % 2 == 0:
        absent = B_TARGET_LABELS[(2 * a) % 16]
        qs.append(make_question(
            scene, f"Is there {article(absent)} {absent}?", "no", "Objects", ALL_HIT))
    else:
        ab1 = B_TARGET_LABELS[(2 * a) % 16]
        ab2 = B_TARGET_LABELS[(2 * a + 1) % 16]
        qs.append(make_question(
            scene,
            f"Is there {article(ab1)} {ab1} or {article(ab2)} {ab2}?",
            "no", "Logical", ALL_HIT))
    return scene, qs


def b_target_pair(b: int) -> tuple[str, str]:
    return B_TARGET_LABELS[2 * (b % 8)], B_TARGET_LABELS[2 * (b % 8) + 1]


def b_target_triplets(b: int) -> list[tuple[str, str, str]]:
    al, bl = b_target_pair(b)
    xf = B_FILLER_LABELS[(2 * b) % 8]
    return [
        (al, RELATIONS[b % 5], bl),
        (bl, RELATIONS[(b + 3) % 5], xf),
    ]


def build_b_scene(b: int, rng: np.random.Generator) -> tuple[dict, list[dict]]:
    sb = SceneBuilder(8 + b, rng)
    idx: dict[str, int] = {}

    def filler(lab: str) -> int:
        if lab not in idx:
            idx[lab] = sb.add_object(lab)
        return idx[lab]

    pats = [(B_FILLER_LABELS[i % 8], RELATIONS[i % 5], B_FILLER_LABELS[(i + 3) % 8])
            for i in range(16)]
    window = [pats[(2 * b + j) % 16] for j in range(10)]
    for s, rel, o in window:
        filler(s), filler(o)
    for lab in B_FILLER_LABELS:
        filler(lab)
    for s, rel, o in window:
        sb.add_triplet(idx[s], rel, idx[o])
    # strangers: targets of the three previous scenes
    for origin in ((b - 3) % 8, (b - 2) % 8, (b - 1) % 8):
        al, bl = b_target_pair(origin)
        host = {al: sb.add_object(al), bl: sb.add_object(bl)}
        for s, rel, o in b_target_triplets(origin):
            si = host.get(s, idx.get(s))
            oi = host.get(o, idx.get(o))
            sb.add_triplet(si, rel, oi)
    # own targets, annotated last
    al, bl = b_target_pair(b)
    host = {al: sb.add_object(al), bl: sb.add_object(bl)}
    for s, rel, o in b_target_triplets(b):
        sb.add_triplet(host.get(s, idx.get(s)), rel, host.get(o, idx.get(o)))

    scene = sb.raw()
    go_only = {"GO": True, "DO": False, "Original": False}
    rel1 = RELATIONS[b % 5]
    qs = [
        make_question(
            scene, f"Is the {al} {rel1} the {bl}?",
            yes_no(oracle_has_edge(scene, al, rel1, bl)),
            "Relations", go_only, relational=True,
        )
    ]
    if b % 2 == 0:
        qs.append(make_question(
            scene, f"What color is the {al}?", oracle_color(scene, al), "Query", go_only))
    else:
        qs.append(make_question(
            scene, f"What is the color of the {al}?", oracle_color(scene, al),
            "Query", go_only))
    true_color = oracle_color(scene, bl)
    if b % 2 == 0:
        qs.append(make_question(
            scene, f"Is the {bl} {true_color}?", "yes", "Verify", go_only))
    else:
        wrong = COLORS[(COLORS.index(true_color) + 2) % len(COLORS)]
        qs.append(make_question(
            scene, f"Is the {bl} {wrong}?", "no", "Verify", go_only))
    ref = bl if b % 2 == 0 else al
    x = oracle_color(scene, ref)
    y = COLORS[(COLORS.index(x) + 3) % len(COLORS)]
    if b % 2 == 0:
        qs.append(make_question(
            scene, f"What color is the {ref}, {x} or {y}?", x, "Choose", go_only))
    else:
        qs.append(make_question(
            scene, f"Is the {ref} {x} or {y}?", x, "Choose", go_only))
    if b % 2 == 0:
        ab1 = A_TARGET_LABELS[(2 * b) % 16]
        ab2 = A_TARGET_LABELS[(2 * b + 5) % 16]
        qs.append(make_question(
            scene,
            f"Are there both {article(ab1)} {ab1} and {article(ab2)} {ab2}?",
            "no", "Logical", ALL_HIT))
    else:
        g0 = B_FILLER_LABELS[(2 * b) % 8]
        g0_obj = scene["objects"][idx[g0]]
        wrong = next(c for c in COLORS if c != g0_obj["attributes"][0])
        qs.append(make_question(
            scene, f"Is there a {wrong} {g0}?", "no", "Verify", ALL_HIT))
    return scene, qs


def build_c_scene(c: int, rng: np.random.Generator) -> tuple[dict, list[dict]]:
    sb = SceneBuilder(16 + c, rng)
    pats = [(C_LABELS[i % 8], RELATIONS[i % 5], C_LABELS[(i + 3) % 8])
            for i in range(16)]
    idx: dict[str, int] = {}

    def inst(lab: str) -> int:
        if lab not in idx:
            idx[lab] = sb.add_object(lab)
        return idx[lab]

    window = [pats[(2 * c + j) % 16] for j in range(10)]
    extra_idx = None
    for j, (s, rel, o) in enumerate(window):
        sb.add_triplet(inst(s), rel, inst(o))
        if j == 2:
            # duplicate the first pattern with a second subject instance
            s0, rel0, o0 = window[0]
            extra_idx = sb.add_object(s0)
            sb.add_triplet(extra_idx, rel0, idx[o0], at=3)
    scene = sb.raw()
    assert len(scene["objects"]) <= 9

    s0, rel0, o0 = window[0]
    w1s = window[1][0]
    w2s = window[2][0]
    d = DIRS[c % 4]
    absent = B_TARGET_LABELS[(2 * c + 4) % 16]

    def c1() -> dict:
        n = len(_objs(scene, s0))
        return make_question(
            scene, f"How many {C_PLURALS[s0]} are there?", str(n), "Objects", ALL_HIT)

    def c2() -> dict:
        n = oracle_count_rel(scene, s0, rel0, o0)
        return make_question(
            scene, f"How many {C_PLURALS[s0]} are {rel0} the {o0}?", str(n),
            "Relations", ALL_HIT, relational=True)

    def c3() -> dict:
        n = oracle_count_dir(scene, s0, d, w1s)
        return make_question(
            scene, f"How many {C_PLURALS[s0]} are {pos_phrase(d, w1s)}?", str(n),
            "Objects", ALL_HIT)

    def c4() -> dict:
        return make_question(
            scene,
            f"Are there both {article(w1s)} {w1s} and {article(w2s)} {w2s}?",
            "yes", "Logical", ALL_HIT)

    def c5() -> dict:
        return make_question(
            scene,
            f"Is there {article(w2s)} {w2s} or {article(absent)} {absent}?",
            "yes", "Logical", ALL_HIT)

    def c6() -> dict:
        x = oracle_color(scene, w2s)
        y = COLORS[(COLORS.index(x) + 4) % len(COLORS)]
        return make_question(
            scene, f"What color is the {w2s}, {x} or {y}?", x, "Choose", ALL_HIT)

    def c7() -> dict:
        if c % 2 == 0:
            text = f"What color is the {w1s}?"
        else:
            text = f"What is the color of the {w1s}?"
        return make_question(scene, text, oracle_color(scene, w1s), "Query", ALL_HIT)

    def c8() -> dict:
        return make_question(
            scene, f"What material is the {w2s}?", oracle_material(scene, w2s),
            "Query", ALL_HIT)

    def c9() -> dict:
        true_color = oracle_color(scene, w1s)
        if c % 2 == 0:
            return make_question(
                scene, f"Is the {w1s} {true_color}?", "yes", "Verify", ALL_HIT)
        wrong = COLORS[(COLORS.index(true_color) + 5) % len(COLORS)]
        return make_question(scene, f"Is the {w1s} {wrong}?", "no", "Verify", ALL_HIT)

    def c10() -> dict:
        col = oracle_color(scene, w2s)
        return make_question(
            scene, f"Is there a {col} {w2s}?", "yes", "Verify", ALL_HIT)

    def c11() -> dict:
        truth = oracle_is_dir(scene, w2s, d, w1s)
        return make_question(
            scene, f"Is the {w2s} {pos_phrase(d, w1s)}?", yes_no(truth),
            "Objects", ALL_HIT)

    def c12() -> dict:
        return make_question(
            scene, f"Is there {article(s0)} {s0} {rel0} the {o0}?",
            yes_no(oracle_has_edge(scene, s0, rel0, o0)),
            "Relations", ALL_HIT, relational=True)

    menu = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12]
    qs = [menu[(2 * c + k) % 12]() for k in range(6)]
    return scene, qs


# ---------------------------------------------------------------------------


def build_corpus() -> dict:
    pools = [C_LABELS, A_FILLER_LABELS, A_TARGET_LABELS, B_FILLER_LABELS,
             B_TARGET_LABELS, RELATIONS, DIRS, COLORS, MATERIALS]
    flat = [w for pool in pools for w in pool]
    assert len(flat) == len(set(flat)), "vocabulary pools must be disjoint"

    rng = np.random.default_rng(SEED)
    scenes: list[dict] = []
    questions: list[dict] = []
    for a in range(8):
        scene, qs = build_a_scene(a, rng)
        scenes.append(scene)
        questions.extend(qs)
    for b in range(8):
        scene, qs = build_b_scene(b, rng)
        scenes.append(scene)
        questions.extend(qs)
    for c in range(8):
        scene, qs = build_c_scene(c, rng)
        scenes.append(scene)
        questions.extend(qs)

    out_questions = []
    for i, q in enumerate(questions, start=1):
        out_questions.append({
            "id": i,
            "text": q["text"],
            "image_index": q["image_index"],
            "answer": q["answer"],
            "type_tag": q["type_tag"],
            "meta_tags": q["meta_tags"],
        })
    doc = {"scenes": scenes, "questions": out_questions}
    side = [{"id": i + 1, "intent": q["_intent"], "relational": q["_relational"]}
            for i, q in enumerate(questions)]
    return {"doc": doc, "side": side}


# ---------------------------------------------------------------------------
# validation: replay everything through the package


def validate(path: Path, side: list[dict]) -> None:
    sys.path.insert(0, str(REPO / "src"))
    from gscsim.answer_reasoner import ReceivedScene, Reasoner, answers_match
    from gscsim.question_frontend import TemplateGrammar, extract_keywords
    from gscsim.phy_link.wire import deserialize_payload, serialize_payload
    from gscsim.scene_source import image_bit_size, load_corpus
    from gscsim.semantic_ranker import (
        PayloadMode, RankedPayload, build_question_graph, rank_bbox, rank_do,
        rank_original, rank_sg,
    )

    corpus = load_corpus(path)
    kb = corpus.kb
    grammar = TemplateGrammar.bundled(kb)
    reasoner = Reasoner(kb)
    intents = {s["id"]: s for s in side}

    assert len(corpus.scenes) == 24
    assert len(corpus.questions) == 120

    # family structure: pattern multiplicity as designed
    stats = corpus.stats
    for a in range(8):
        for pat in a_target_triplets(a):
            toks = (kb.objects.token_of(pat[0]), kb.relations.token_of(pat[1]),
                    kb.objects.token_of(pat[2]))
            assert stats.pattern_count(toks) == 3, (a, pat)
    for b in range(8):
        for pat in b_target_triplets(b):
            toks = (kb.objects.token_of(pat[0]), kb.relations.token_of(pat[1]),
                    kb.objects.token_of(pat[2]))
            assert stats.pattern_count(toks) == 4, (b, pat)
    for lab in B_FILLER_LABELS:
        assert stats.label_count(kb.objects.token_of(lab)) == 8, lab
    for lab in B_TARGET_LABELS:
        assert stats.label_count(kb.objects.token_of(lab)) == 4, lab
    for lab in A_FILLER_LABELS:
        assert stats.label_count(kb.objects.token_of(lab)) == 1, lab
    for lab in A_TARGET_LABELS:
        assert stats.label_count(kb.objects.token_of(lab)) == 3, lab

    # every question parses, and the reasoner on the full scene graph
    # reproduces the oracle answer
    parsed = {}
    for q in corpus.questions:
        prog = grammar.parse(q)
        parsed[q.id] = prog
        scene = corpus.scene_for(q)
        full = ReceivedScene.from_scene(scene, mode=PayloadMode.SG)
        ans = reasoner.execute(prog, full, mode=PayloadMode.SG)
        assert answers_match(ans.value, q.answer, kb), (
            q.id, q.text, ans.value, q.answer)

    # ranking + wire + reasoning replay at the design truncation depth
    def full_order(q, method, mode):
        scene = corpus.scene_for(q)
        kws = extract_keywords(q, kb)
        if mode is PayloadMode.BBOX:
            items = scene.objects
            if method == "GO":
                return rank_bbox(items, kws, stats).items
            if method == "DO":
                return rank_do(items, stats).items
            return rank_original(items).items
        items = scene.triplets
        if method == "GO":
            qg = build_question_graph(kws, parsed[q.id])
            return rank_sg(items, qg, stats, scene).items
        if method == "DO":
            return rank_do(items, stats, scene=scene).items
        return rank_original(items, scene=scene).items

    orders = {}
    for q in corpus.questions:
        for method in ("GO", "DO", "Original"):
            for mode in (PayloadMode.SG, PayloadMode.BBOX):
                orders[(q.id, method, mode)] = full_order(q, method, mode)

    def received_for(q, method, mode, n):
        scene = corpus.scene_for(q)
        items = orders[(q.id, method, mode)][:n]
        payload = RankedPayload(mode=mode, items=tuple(items), n_top=n,
                                scene_objects=scene.objects)
        bits = serialize_payload(payload)
        got = deserialize_payload(bits, kb)
        assert got.dropped == 0 and not got.header_error
        return ReceivedScene.from_entries(got.entries)

    def correct(q, method, mode, n):
        ans = reasoner.execute(parsed[q.id], received_for(q, method, mode, n),
                               mode=mode)
        return answers_match(ans.value, q.answer, kb), ans

    mismatches = []
    for q in corpus.questions:
        info = intents[q.id]
        for method in ("GO", "DO", "Original"):
            for mode in (PayloadMode.SG, PayloadMode.BBOX):
                ok, ans = correct(q, method, mode, 9)
                if info["relational"] and mode is PayloadMode.BBOX:
                    if ans.value != "unknown":
                        mismatches.append((q.id, method, "BBox-relational", ans.value))
                    continue
                want = info["intent"][method]
                if ok != want:
                    mismatches.append((q.id, q.text, method, mode.value, ans.value,
                                       q.answer, "want-correct" if want else "want-wrong"))
    if mismatches:
        for m in mismatches[:40]:
            print("MISMATCH", m)
        raise AssertionError(f"{len(mismatches)} delivery-intent mismatches")

    # structural accuracy at the design depth, all six method/mode pairs
    def accuracy(method, mode, n):
        hits = sum(1 for q in corpus.questions if correct(q, method, mode, n)[0])
        return hits / len(corpus.questions)

    acc9 = {(m, mode.value): accuracy(m, mode, 9)
            for m in ("GO", "DO", "Original")
            for mode in (PayloadMode.SG, PayloadMode.BBOX)}
    print("structural accuracy at depth 9:")
    for k, v in sorted(acc9.items()):
        print(f"  {k[0]:>8}-{k[1]}: {v:.3f}")
    assert acc9[("GO", "SG")] == 1.0
    assert acc9[("GO", "SG")] > acc9[("DO", "SG")] > acc9[("Original", "SG")]
    assert acc9[("GO", "BBox")] > acc9[("DO", "BBox")] > acc9[("Original", "BBox")]
    assert acc9[("GO", "SG")] >= acc9[("GO", "BBox")] + 0.05
    assert acc9[("DO", "SG")] >= acc9[("DO", "BBox")] + 0.05

    # goal-oriented curves over the truncation sweep: non-decreasing, with the
    # richer payload mode strictly ahead
    prev_sg = prev_bb = 0.0
    for n in range(3, 31):
        sg = accuracy("GO", PayloadMode.SG, n)
        bb = accuracy("GO", PayloadMode.BBOX, n)
        assert sg >= prev_sg and bb >= prev_bb, n
        assert sg >= bb + 0.05, (n, sg, bb)
        prev_sg, prev_bb = sg, bb

    # payload size stays tiny next to raw image bits
    img_bits = image_bit_size(next(iter(corpus.scenes.values())))
    worst = 0
    for q in corpus.questions:
        for method in ("GO", "DO", "Original"):
            for mode in (PayloadMode.SG, PayloadMode.BBOX):
                scene = corpus.scene_for(q)
                items = orders[(q.id, method, mode)][:9]
                payload = RankedPayload(mode=mode, items=tuple(items), n_top=9,
                                        scene_objects=scene.objects)
                worst = max(worst, len(serialize_payload(payload)))
    print(f"worst 9-item payload: {worst} bits vs image {img_bits} bits")
    assert worst <= 0.01 * img_bits

    # answers are never the reasoner's failure sentinel
    assert all(q.answer != "unknown" for q in corpus.questions)
    counts = {}
    for q in corpus.questions:
        counts[q.type_tag.value] = counts.get(q.type_tag.value, 0) + 1
    print("type mix:", dict(sorted(counts.items())))
    print("validation OK")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=OUT_DEFAULT)
    ap.add_argument("--skip-validation", action="store_true")
    args = ap.parse_args()

    built = build_corpus()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(built["doc"], indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out} "
          f"({len(built['doc']['scenes'])} scenes, {len(built['doc']['questions'])} questions)")
    if not args.skip_validation:
        validate(args.out, built["side"])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
