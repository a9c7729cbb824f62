"""End-to-end acceptance checks for the simulator.

One test per claim, each with its tolerance and runtime budget stated
inline; ``pytest -v`` therefore prints one pass/fail line per criterion.
All randomized checks run from fixed seeds.
"""

import math
import time

import numpy as np
import pytest
from ged_oracle import brute_force_ged

from gscsim.experiment_harness import (
    ALL_TYPES,
    ExperimentConfig,
    emit_csv,
    run_sweep,
)
from gscsim.graph_edit import LabelledGraph, ged
from gscsim.phy_link.channel import ChannelKind
from gscsim.phy_link.ldpc import default_code, extract_message, ldpc_encode, parity_check
from gscsim.phy_link.link import (
    LinkConfig,
    comm_latency,
    total_latency,
    transmit,
    uncoded_bpsk_awgn_ber,
)
from gscsim.phy_link.wire import serialize_payload
from gscsim.question_frontend import TemplateGrammar, extract_keywords
from gscsim.scene_source import (
    CorpusStats,
    DetectedObject,
    DeviceProfile,
    ExtractionKind,
    SceneAnnotation,
    extraction_latency,
    image_bit_size,
)
from gscsim.semantic_ranker import (
    KeywordSet,
    build_question_graph,
    rank_bbox,
    rank_do,
    rank_original,
    rank_sg,
)

SEMANTIC_METHODS = (
    "GO-SG", "GO-BBox", "DO-SG", "DO-BBox", "Original-SG", "Original-BBox")


def all_rows(rows, **match):
    out = [r for r in rows if r.type_tag == ALL_TYPES
           and all(getattr(r, k) == v for k, v in match.items())]
    return out


def test_criterion_01_uncoded_bpsk_ber_matches_theory():
    # BER within 5% relative of Q(sqrt(2*SNR)) at 0/2/4 dB, 1e6 bits, < 30 s
    start = time.monotonic()
    for i, snr_db in enumerate((0.0, 2.0, 4.0)):
        snr = 10.0 ** (snr_db / 10.0)
        theory = 0.5 * math.erfc(math.sqrt(snr))
        measured = uncoded_bpsk_awgn_ber(snr_db, 1_000_000, seed=i)
        assert measured == pytest.approx(theory, rel=0.05), f"at {snr_db} dB"
    assert time.monotonic() - start < 30.0


def test_criterion_02_ldpc_parity_round_trip_and_coding_gain():
    # 1e4 random codewords all satisfy H c^T = 0 and decode back exactly;
    # at 4 dB AWGN decoding strictly reduces the bit error count; < 60 s
    start = time.monotonic()
    code = default_code()
    rng = np.random.default_rng(42)
    msgs = rng.integers(0, 2, size=(10_000, code.k), dtype=np.uint8)
    cws = ldpc_encode(msgs, code)
    assert parity_check(cws, code).all()
    assert (extract_message(cws, code) == msgs).all()

    payload = rng.integers(0, 2, size=20 * code.k, dtype=np.uint8)
    clean = transmit(payload, LinkConfig(snr_db=math.inf),
                     np.random.default_rng(1))
    assert (clean.bits == payload).all()
    assert clean.post_bit_errors == 0

    noisy = transmit(payload, LinkConfig(snr_db=4.0), np.random.default_rng(2))
    assert noisy.raw_bit_errors > 0
    assert noisy.post_bit_errors < noisy.raw_bit_errors
    assert time.monotonic() - start < 60.0


def _random_graph(rng) -> LabelledGraph:
    n = int(rng.integers(0, 5))
    labels = tuple(int(rng.integers(0, 3)) for _ in range(n))
    edges = []
    if n:
        for _ in range(int(rng.integers(0, 5))):
            edges.append((int(rng.integers(0, n)), int(rng.integers(0, n)),
                          int(rng.integers(0, 2))))
    return LabelledGraph(node_labels=labels, edges=tuple(edges))


def test_criterion_03_ged_matches_brute_force_oracle():
    # exact distance equals exhaustive enumeration on 200 random pairs of
    # graphs with <= 4 nodes; symmetry and the triangle inequality hold; < 60 s
    start = time.monotonic()
    rng = np.random.default_rng(7)
    graphs = []
    for _ in range(200):
        g1, g2 = _random_graph(rng), _random_graph(rng)
        graphs.extend([g1, g2])
        assert ged(g1, g2) == pytest.approx(brute_force_ged(g1, g2), abs=1e-9)
        assert ged(g1, g2) == pytest.approx(ged(g2, g1), abs=1e-9)
    for _ in range(100):
        a, b, c = (graphs[int(rng.integers(len(graphs)))] for _ in range(3))
        assert ged(a, c) <= ged(a, b) + ged(b, c) + 1e-9
    assert time.monotonic() - start < 60.0


def _toy_scene(tokens):
    objects = tuple(
        DetectedObject(index=i, label=f"l{t}", label_token=int(t),
                       box=(4 * i, 0, 4, 4))
        for i, t in enumerate(tokens))
    return SceneAnnotation(image_index=0, height=320, width=480, depth=3,
                           objects=objects, triplets=())


def test_criterion_04_goal_ranking_dominance():
    # over 1000 random scenes with >= 2 distinct labels and unit goal weight,
    # every keyword-matched object outranks every unmatched one; with no
    # keywords the goal-oriented order equals the frequency-only order
    rng = np.random.default_rng(20240823)
    for _ in range(1000):
        tokens = rng.integers(0, 6, size=int(rng.integers(2, 13)))
        while len(set(tokens.tolist())) < 2:
            tokens = rng.integers(0, 6, size=int(rng.integers(2, 13)))
        scene = _toy_scene(tokens)
        stats = CorpusStats()
        for o in scene.objects:
            stats.label_counts[o.label_token] = (
                stats.label_counts.get(o.label_token, 0) + 1)
        hit = int(rng.choice(sorted(set(tokens.tolist()))))
        ks = KeywordSet(image_index=0, object_tokens=frozenset({hit}),
                        relation_tokens=frozenset())
        ranked = rank_bbox(list(scene.objects), ks, stats, w=1.0)
        flags = [s.item.label_token == hit for s in ranked.items]
        assert flags == sorted(flags, reverse=True)

        empty = KeywordSet(image_index=0, object_tokens=frozenset(),
                           relation_tokens=frozenset())
        go = rank_bbox(list(scene.objects), empty, stats, w=1.0)
        do = rank_do(list(scene.objects), stats)
        assert [s.item.index for s in go.items] == [s.item.index for s in do.items]


def test_criterion_05_ground_truth_and_high_snr_accuracy(corpus):
    # complete ground-truth payloads answer every bundled question; the
    # goal-oriented scene-graph method with unlimited depth matches them
    # at 12 dB AWGN under a fixed seed
    cfg = ExperimentConfig(
        corpus_path="bundled",
        methods=("GroundTruth", "GO-SG"),
        channels=(ChannelKind.AWGN,),
        snr_db=(12.0,),
        n_top=(None,),
        master_seed=1,
    )
    rows = run_sweep(cfg, corpus)
    gt = all_rows(rows, method="GroundTruth")[0]
    go = all_rows(rows, method="GO-SG")[0]
    assert gt.accuracy == 1.0
    assert go.accuracy == 1.0


def test_criterion_06_latency_formulas():
    # image uplink seconds at 100 kHz / 8 dB; parallel composition of the
    # total; default extraction components
    cfg = LinkConfig(snr_db=8.0, bandwidth_hz=100e3)
    assert comm_latency(14_745_600, cfg) == pytest.approx(51.39, abs=0.01)

    rng = np.random.default_rng(0)
    for _ in range(100):
        tq, ti, tc, ta = rng.uniform(0.0, 10.0, size=4)
        assert total_latency(tq, ti, tc, ta) == pytest.approx(
            max(tq, ti + tc) + ta, abs=1e-12)

    prof = DeviceProfile()
    assert extraction_latency(ExtractionKind.BBOX_ONLY, prof) == pytest.approx(
        0.4400 / 1.33, abs=1e-9)
    assert extraction_latency(ExtractionKind.BBOX_PLUS_SG, prof) == pytest.approx(
        0.4600 / 1.33, abs=1e-9)


def test_criterion_07_accuracy_vs_snr_shape(corpus):
    # fixed-seed sweep over -4..12 dB on both channels: every method's mean
    # accuracy is non-decreasing in SNR, and at 8 dB Rayleigh with depth 9
    # the goal-oriented > data-oriented > unranked ordering holds per mode;
    # < 10 min
    start = time.monotonic()
    cfg = ExperimentConfig(
        corpus_path="bundled",
        methods=SEMANTIC_METHODS,
        channels=(ChannelKind.AWGN, ChannelKind.RAYLEIGH),
        snr_db=tuple(float(s) for s in range(-4, 13, 2)),
        n_top=(9,),
        trials=2,
        master_seed=1,
    )
    rows = run_sweep(cfg, corpus)
    elapsed = time.monotonic() - start

    for method in SEMANTIC_METHODS:
        for channel in ("AWGN", "Rayleigh"):
            curve = sorted(all_rows(rows, method=method, channel=channel),
                           key=lambda r: r.snr_db)
            assert len(curve) == 9
            accs = [r.accuracy for r in curve]
            assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:])), (
                f"{method}/{channel} not monotone: {accs}")

    def acc_at(method):
        return all_rows(rows, method=method, channel="Rayleigh", snr_db=8.0)[0].accuracy

    assert acc_at("GO-SG") >= acc_at("DO-SG") >= acc_at("Original-SG")
    assert acc_at("GO-BBox") >= acc_at("DO-BBox") >= acc_at("Original-BBox")
    assert elapsed < 600.0


def test_criterion_08_accuracy_vs_depth_shape(corpus):
    # fixed-seed depth sweep 3..30 at 8 dB: goal-oriented accuracy never
    # decreases with depth, and the scene-graph mode dominates the
    # bounding-box mode at every depth
    cfg = ExperimentConfig(
        corpus_path="bundled",
        methods=("GO-SG", "GO-BBox"),
        channels=(ChannelKind.AWGN,),
        snr_db=(8.0,),
        n_top=tuple(range(3, 31)),
        master_seed=1,
    )
    rows = run_sweep(cfg, corpus)
    curves = {}
    for method in ("GO-SG", "GO-BBox"):
        curve = sorted(all_rows(rows, method=method), key=lambda r: r.n_top)
        assert [r.n_top for r in curve] == list(range(3, 31))
        accs = [r.accuracy for r in curve]
        assert all(a <= b + 1e-12 for a, b in zip(accs, accs[1:])), (
            f"{method} not monotone in depth: {accs}")
        curves[method] = accs
    for sg, bb in zip(curves["GO-SG"], curves["GO-BBox"]):
        assert sg >= bb


def test_criterion_09_payload_reduction(corpus):
    # every depth-9 triplet payload serializes to at most 1% of the raw
    # 480x320x3 image size
    grammar = TemplateGrammar.bundled(corpus.kb)
    for q in corpus.questions:
        scene = corpus.scene_for(q)
        budget = 0.01 * image_bit_size(scene)
        assert image_bit_size(scene) == 14_745_600
        ks = extract_keywords(q, corpus.kb)
        qg = build_question_graph(ks, grammar.parse(q))
        payloads = (
            rank_sg(list(scene.triplets), qg, corpus.stats, scene, n_top=9),
            rank_do(list(scene.triplets), corpus.stats, n_top=9, scene=scene),
            rank_original(list(scene.triplets), n_top=9, scene=scene),
        )
        for payload in payloads:
            assert serialize_payload(payload).size <= budget


def test_criterion_10_byte_identical_reruns(tmp_path, corpus):
    # the same config and seed produce byte-identical CSV output
    cfg = ExperimentConfig(
        corpus_path="bundled",
        methods=("GO-SG", "DO-BBox"),
        channels=(ChannelKind.AWGN, ChannelKind.RAYLEIGH),
        snr_db=(0.0, 8.0),
        n_top=(9,),
        trials=2,
        master_seed=3,
    )
    first = emit_csv(run_sweep(cfg, corpus), tmp_path / "a.csv")
    second = emit_csv(run_sweep(cfg, corpus), tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()
