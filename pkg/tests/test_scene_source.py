import copy
import json

import pytest

from gscsim.scene_source import (
    CorpusError,
    DeviceProfile,
    ExtractionKind,
    extraction_latency,
    image_bit_size,
    load_bundled_corpus,
    load_corpus,
    save_corpus,
    triplet_pattern,
)

DOC = {
    "scenes": [
        {
            "image_index": 0,
            "height": 320,
            "width": 480,
            "depth": 3,
            "objects": [
                {"label": "car", "box": [10, 10, 40, 30], "attributes": ["red"]},
                {"label": "tree", "box": [100, 50, 30, 80], "attributes": []},
            ],
            "triplets": [{"subject": 0, "relation": "near", "object": 1}],
        }
    ],
    "questions": [
        {
            "id": 1,
            "text": "Is the car near the tree?",
            "image_index": 0,
            "answer": "yes",
            "type_tag": "Relations",
            "meta_tags": ["Binary"],
        }
    ],
}


def write_doc(tmp_path, doc):
    p = tmp_path / "corpus.json"
    p.write_text(json.dumps(doc))
    return p


def mutate(fn):
    doc = copy.deepcopy(DOC)
    fn(doc)
    return doc


def test_minimal_doc_loads(tmp_path):
    corpus = load_corpus(write_doc(tmp_path, DOC))
    assert len(corpus.scenes) == 1 and len(corpus.questions) == 1
    scene = corpus.scene_for(corpus.questions[0])
    assert scene.objects[0].label == "car"
    assert scene.objects[0].center == (30.0, 25.0)
    assert scene.triplets[0].relation == "near"


@pytest.mark.parametrize(
    "breaker,fragment",
    [
        (lambda d: d["scenes"][0]["objects"][0].update(box=[460, 10, 40, 30]),
         "outside the image"),
        (lambda d: d["scenes"][0]["objects"][0].update(box=[10, 10, 0, 30]),
         "empty box"),
        (lambda d: d["scenes"][0]["triplets"][0].update(object=5),
         "references object"),
        (lambda d: d["scenes"][0]["triplets"][0].update(object=0),
         "itself"),
        (lambda d: d["scenes"].append(copy.deepcopy(d["scenes"][0])),
         "duplicate image_index"),
        (lambda d: d["questions"].append(copy.deepcopy(d["questions"][0])),
         "duplicate question id"),
        (lambda d: d["questions"][0].update(type_tag="essay"),
         "unknown type_tag"),
        (lambda d: d["questions"][0].update(image_index=9),
         "has no scene"),
        (lambda d: d["scenes"][0].pop("objects"),
         "missing field"),
        (lambda d: d["scenes"][0].update(height=0),
         "bad dimensions"),
    ],
)
def test_rejections(tmp_path, breaker, fragment):
    with pytest.raises(CorpusError, match=fragment):
        load_corpus(write_doc(tmp_path, mutate(breaker)))


def test_not_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(CorpusError, match="not valid JSON"):
        load_corpus(p)
    with pytest.raises(CorpusError, match="cannot read"):
        load_corpus(tmp_path / "absent.json")


def test_stats_consistency(corpus):
    total_objs = sum(len(s.objects) for s in corpus.scenes.values())
    total_trips = sum(len(s.triplets) for s in corpus.scenes.values())
    assert corpus.stats.label_total == total_objs
    assert corpus.stats.pattern_total == total_trips
    recount: dict[tuple[int, int, int], int] = {}
    for scene in corpus.scenes.values():
        for t in scene.triplets:
            pat = triplet_pattern(scene, t)
            recount[pat] = recount.get(pat, 0) + 1
    assert recount == corpus.stats.pattern_counts
    assert corpus.stats.pattern_count((-1, -1, -1)) == 0


def test_bundled_corpus_shape(corpus):
    assert len(corpus.scenes) == 24
    assert len(corpus.questions) == 120
    assert all(len(s.objects) <= 32 for s in corpus.scenes.values())


def test_extraction_latency_defaults():
    prof = DeviceProfile()
    assert extraction_latency(ExtractionKind.BBOX_ONLY, prof) == pytest.approx(
        0.44 / 1.33, abs=1e-12)
    assert extraction_latency(ExtractionKind.BBOX_PLUS_SG, prof) == pytest.approx(
        0.46 / 1.33, abs=1e-12)


def test_device_profile_validation():
    with pytest.raises(ValueError):
        DeviceProfile(device_tflops=0.0)
    with pytest.raises(ValueError):
        DeviceProfile(answer_cost_seconds=-1.0)


def test_image_bit_size(corpus):
    scene = corpus.scenes[0]
    assert (scene.width, scene.height, scene.depth) == (480, 320, 3)
    assert image_bit_size(scene) == 14_745_600


def test_save_load_round_trip(tmp_path, corpus):
    out = tmp_path / "copy.json"
    save_corpus(corpus, out)
    again = load_corpus(out)
    assert set(again.scenes) == set(corpus.scenes)
    for idx, scene in corpus.scenes.items():
        other = again.scenes[idx]
        assert [o.label for o in other.objects] == [o.label for o in scene.objects]
        assert [o.box for o in other.objects] == [o.box for o in scene.objects]
        assert len(other.triplets) == len(scene.triplets)
    assert [q.text for q in again.questions] == [q.text for q in corpus.questions]
    # Canonical form: saving what we loaded reproduces the file exactly.
    out2 = tmp_path / "copy2.json"
    save_corpus(again, out2)
    assert out.read_bytes() == out2.read_bytes()


def test_bundled_is_canonical(tmp_path):
    from importlib import resources

    corpus = load_bundled_corpus()
    out = tmp_path / "canon.json"
    save_corpus(corpus, out)
    raw = (
        resources.files("gscsim.data").joinpath("corpus.json").read_bytes()
    )
    assert out.read_bytes() == raw
