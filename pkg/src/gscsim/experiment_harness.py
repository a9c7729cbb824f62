"""Sweep driver: methods x channels x SNR x payload depth over a corpus.

Runs the full pipeline per question (keywords -> program -> ranking ->
serialization -> link -> reasoning -> scoring), aggregates accuracy and
latency per grid point and question type, and emits CSV/JSON rows.

Reproducibility contract: all channel randomness derives from the master
seed plus (channel, question id, trial), so a given config yields
byte-identical output files across runs.  The transmit stream deliberately
excludes method, SNR, and payload depth, so sweeps along those axes reuse
common random numbers.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .answer_reasoner import (
    Answer,
    EvalRecord,
    LatencyBreakdown,
    Reasoner,
    ReceivedScene,
    answers_match,
)
from .graph_edit import LabelledGraph
from .knowledge_base import KnowledgeBase
from .phy_link.channel import ChannelKind
from .phy_link.link import LinkConfig, comm_latency, total_latency, transmit
from .phy_link.wire import deserialize_payload, serialize_payload
from .question_frontend import (
    KeywordSet,
    Question,
    TemplateGrammar,
    UnparseableQuestion,
    extract_keywords,
)
from .scene_source import (
    Corpus,
    DeviceProfile,
    ExtractionKind,
    extraction_latency,
    image_bit_size,
    load_bundled_corpus,
    load_corpus,
)
from .semantic_ranker import (
    PayloadMode,
    RankedPayload,
    RankerConfig,
    build_question_graph,
    rank_bbox,
    rank_do,
    rank_original,
    rank_sg,
)

log = logging.getLogger(__name__)

METHOD_GO_SG = "GO-SG"
METHOD_GO_BBOX = "GO-BBox"
METHOD_DO_SG = "DO-SG"
METHOD_DO_BBOX = "DO-BBox"
METHOD_ORIGINAL_SG = "Original-SG"
METHOD_ORIGINAL_BBOX = "Original-BBox"
METHOD_GROUND_TRUTH = "GroundTruth"
METHOD_IMAGE = "ImageTransmission"

METHODS = (
    METHOD_GO_SG,
    METHOD_GO_BBOX,
    METHOD_DO_SG,
    METHOD_DO_BBOX,
    METHOD_ORIGINAL_SG,
    METHOD_ORIGINAL_BBOX,
    METHOD_GROUND_TRUTH,
    METHOD_IMAGE,
)

# ranker family and payload mode per method; the last two bypass the link
_METHOD_SPEC = {
    METHOD_GO_SG: ("GO", PayloadMode.SG),
    METHOD_GO_BBOX: ("GO", PayloadMode.BBOX),
    METHOD_DO_SG: ("DO", PayloadMode.SG),
    METHOD_DO_BBOX: ("DO", PayloadMode.BBOX),
    METHOD_ORIGINAL_SG: ("Original", PayloadMode.SG),
    METHOD_ORIGINAL_BBOX: ("Original", PayloadMode.BBOX),
    METHOD_GROUND_TRUTH: (None, PayloadMode.SG),
    METHOD_IMAGE: (None, PayloadMode.SG),
}

_CHANNEL_CODE = {ChannelKind.AWGN: 0, ChannelKind.RAYLEIGH: 1}

ALL_TYPES = "All"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_path: str | Path
    methods: tuple[str, ...] = METHODS
    channels: tuple[ChannelKind, ...] = (ChannelKind.AWGN, ChannelKind.RAYLEIGH)
    snr_db: tuple[float, ...] = (8.0,)
    n_top: tuple[int | None, ...] = (9,)  # None means every item
    trials: int = 1
    master_seed: int = 0
    ranker: RankerConfig = field(default_factory=RankerConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    device: DeviceProfile = field(default_factory=DeviceProfile)

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("methods axis is empty")
        for m in self.methods:
            if m not in _METHOD_SPEC:
                raise ConfigError(f"unknown method {m!r}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("duplicate method")
        if not self.channels:
            raise ConfigError("channels axis is empty")
        for c in self.channels:
            if not isinstance(c, ChannelKind):
                raise ConfigError(f"bad channel {c!r}")
        if not self.snr_db:
            raise ConfigError("snr_db axis is empty")
        if not self.n_top:
            raise ConfigError("n_top axis is empty")
        for n in self.n_top:
            if n is not None and n < 1:
                raise ConfigError("n_top entries must be None or >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    method: str
    channel: str
    snr_db: float
    n_top: int | None
    type_tag: str
    accuracy: float
    latency_total_s: float
    latency_uplink_s: float
    latency_extraction_bbox_s: float
    latency_extraction_sg_s: float
    latency_answer_s: float
    payload_bits: float
    blocks_dropped: float
    trials: int
    seed: int


CSV_COLUMNS = tuple(f.name for f in dataclasses.fields(ResultRow))


def _question_rng(master_seed: int, channel: ChannelKind, qid: int, trial: int):
    seq = np.random.SeedSequence(
        (master_seed, _CHANNEL_CODE[channel], qid, trial))
    return np.random.default_rng(seq)


class _Pipeline:
    """Per-corpus caches: parses, keyword sets, rankings, serialized bits."""

    def __init__(self, corpus: Corpus, config: ExperimentConfig):
        self.corpus = corpus
        self.config = config
        self.kb = corpus.kb
        self.reasoner = Reasoner(self.kb)
        grammar = TemplateGrammar.bundled(self.kb)
        self.programs: dict[int, object] = {}
        self.keywords: dict[int, KeywordSet] = {}
        self.parse_failures: list[int] = []
        for q in corpus.questions:
            self.keywords[q.id] = extract_keywords(q, self.kb)
            try:
                self.programs[q.id] = grammar.parse(q)
            except UnparseableQuestion as exc:
                self.programs[q.id] = None
                self.parse_failures.append(q.id)
                log.warning("question %d unparseable: %s", q.id, exc)
        self._orders: dict[tuple, tuple] = {}
        self._bits: dict[tuple, np.ndarray] = {}
        self._full_reference: dict[int, ReceivedScene] = {}

    def _full_order(self, q: Question, family: str, mode: PayloadMode) -> tuple:
        key = (q.id, family, mode)
        if key in self._orders:
            return self._orders[key]
        scene = self.corpus.scene_for(q)
        stats = self.corpus.stats
        rc = self.config.ranker
        if mode is PayloadMode.BBOX:
            items = scene.objects
            if family == "GO":
                ranked = rank_bbox(items, self.keywords[q.id], stats, w=rc.go_weight)
            elif family == "DO":
                ranked = rank_do(items, stats)
            else:
                ranked = rank_original(items)
        else:
            items = scene.triplets
            if family == "GO":
                program = self.programs[q.id]
                if program is None:
                    # unparseable question: fall back to a keywords-only graph
                    qg = LabelledGraph(tuple(sorted(self.keywords[q.id].object_tokens)))
                else:
                    qg = build_question_graph(self.keywords[q.id], program)
                ranked = rank_sg(
                    items, qg, stats, scene,
                    costs=rc.ged_costs,
                    literal=rc.literal_sg_score,
                    allow_heuristic=rc.allow_heuristic,
                )
            elif family == "DO":
                ranked = rank_do(items, stats, scene=scene)
            else:
                ranked = rank_original(items, scene=scene)
        self._orders[key] = ranked.items
        return ranked.items

    def payload_bits(self, q: Question, family: str, mode: PayloadMode,
                     n_top: int | None) -> np.ndarray:
        key = (q.id, family, mode, n_top)
        if key in self._bits:
            return self._bits[key]
        scene = self.corpus.scene_for(q)
        items = self._full_order(q, family, mode)
        if n_top is not None:
            items = items[:n_top]
        payload = RankedPayload(mode=mode, items=tuple(items), n_top=n_top,
                                scene_objects=scene.objects)
        bits = serialize_payload(payload)
        self._bits[key] = bits
        return bits

    def full_reference(self, q: Question) -> ReceivedScene:
        if q.id not in self._full_reference:
            scene = self.corpus.scene_for(q)
            self._full_reference[q.id] = ReceivedScene.from_scene(
                scene, mode=PayloadMode.SG)
        return self._full_reference[q.id]

    def execute(self, q: Question, received: ReceivedScene,
                mode: PayloadMode) -> Answer:
        program = self.programs[q.id]
        if program is None:
            return Answer.unknown()
        return self.reasoner.execute(program, received, mode=mode)


def _aggregate(method: str, channel: ChannelKind, snr_db: float,
               n_top: int | None, records: list[EvalRecord],
               config: ExperimentConfig) -> list[ResultRow]:
    device = config.device
    ext_bbox = extraction_latency(ExtractionKind.BBOX_ONLY, device)
    ext_full = extraction_latency(ExtractionKind.BBOX_PLUS_SG, device)
    _, mode = _METHOD_SPEC[method]
    sg_component = ext_full - ext_bbox if mode is PayloadMode.SG else 0.0

    groups: dict[str, list[EvalRecord]] = {ALL_TYPES: records}
    for r in records:
        groups.setdefault(r.type_tag, []).append(r)

    rows = []
    for tag in sorted(groups):
        rs = groups[tag]
        rows.append(ResultRow(
            method=method,
            channel=channel.value,
            snr_db=float(snr_db),
            n_top=n_top,
            type_tag=tag,
            accuracy=sum(r.correct for r in rs) / len(rs),
            latency_total_s=sum(r.latency.total_s for r in rs) / len(rs),
            latency_uplink_s=sum(r.latency.comm_s for r in rs) / len(rs),
            latency_extraction_bbox_s=ext_bbox,
            latency_extraction_sg_s=sg_component,
            latency_answer_s=device.answer_cost_seconds,
            payload_bits=sum(r.payload_bits for r in rs) / len(rs),
            blocks_dropped=sum(r.blocks_dropped for r in rs) / len(rs),
            trials=config.trials,
            seed=config.master_seed,
        ))
    return rows


def run_sweep(config: ExperimentConfig,
              corpus: Corpus | None = None) -> list[ResultRow]:
    """Evaluate every (method, channel, snr, n_top) grid point.

    Returns one row per grid point and question type, plus an aggregate
    row tagged "All".  Ranking and serialization are computed once per
    (question, method, depth); only channel noise is redrawn per trial.
    """
    if corpus is None:
        if str(config.corpus_path) == "bundled":
            corpus = load_bundled_corpus()
        else:
            corpus = load_corpus(config.corpus_path)
    pipe = _Pipeline(corpus, config)
    device = config.device
    ext_bbox = extraction_latency(ExtractionKind.BBOX_ONLY, device)
    ext_full = extraction_latency(ExtractionKind.BBOX_PLUS_SG, device)

    rows: list[ResultRow] = []
    for method in config.methods:
        family, mode = _METHOD_SPEC[method]
        ext = ext_full if mode is PayloadMode.SG else ext_bbox
        for channel in config.channels:
            for snr_db in config.snr_db:
                link_cfg = dataclasses.replace(
                    config.link, channel=channel, snr_db=float(snr_db))
                for n_top in config.n_top:
                    records = []
                    for q in corpus.questions:
                        for trial in range(config.trials):
                            records.append(_evaluate(
                                pipe, q, method, family, mode, link_cfg,
                                channel, n_top, trial, ext, device))
                    rows.extend(_aggregate(
                        method, channel, snr_db, n_top, records, config))
    return rows


def _evaluate(pipe: _Pipeline, q: Question, method: str, family: str | None,
              mode: PayloadMode, link_cfg: LinkConfig, channel: ChannelKind,
              n_top: int | None, trial: int, ext: float,
              device: DeviceProfile) -> EvalRecord:
    corpus = pipe.corpus
    scene = corpus.scene_for(q)
    if method == METHOD_GROUND_TRUTH:
        bits_count = int(pipe.payload_bits(q, "Original", PayloadMode.SG, None).size)
        received = pipe.full_reference(q)
        blocks_dropped = 0
        t_comm = comm_latency(bits_count, link_cfg)
    elif method == METHOD_IMAGE:
        bits_count = image_bit_size(scene)
        received = pipe.full_reference(q)
        blocks_dropped = 0
        t_comm = comm_latency(bits_count, link_cfg)
    else:
        bits = pipe.payload_bits(q, family, mode, n_top)
        bits_count = int(bits.size)
        rng = _question_rng(pipe.config.master_seed, channel, q.id, trial)
        result = transmit(bits, link_cfg, rng)
        got = deserialize_payload(result.bits, pipe.kb, result.reliability)
        received = ReceivedScene.from_entries(got.entries)
        blocks_dropped = result.blocks_dropped
        t_comm = comm_latency(bits_count, link_cfg)

    answer = pipe.execute(q, received, mode)
    correct = answers_match(answer.value, q.answer, pipe.kb)
    latency = LatencyBreakdown(
        question_s=device.parse_cost_seconds,
        extraction_s=ext,
        comm_s=t_comm,
        answer_s=device.answer_cost_seconds,
        total_s=total_latency(
            device.parse_cost_seconds, ext, t_comm, device.answer_cost_seconds),
    )
    return EvalRecord(
        question_id=q.id,
        method=method,
        channel=channel.value,
        snr_db=link_cfg.snr_db,
        n_top=n_top,
        answer=answer.value,
        truth=q.answer,
        correct=correct,
        type_tag=q.type_tag.value,
        meta_tags=tuple(q.meta_tags),
        latency=latency,
        payload_bits=bits_count,
        blocks_dropped=blocks_dropped,
        trial=trial,
    )


# ---------------------------------------------------------------------------
# output


def _cell(value) -> str:
    if value is None:
        return "all"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows: list[ResultRow], path: str | Path) -> Path:
    """Write rows with the fixed CSV_COLUMNS header, one line per row."""
    if not rows:
        raise ValueError("no rows to emit")
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_cell(getattr(row, c)) for c in CSV_COLUMNS])
    return path


def emit_json(rows: list[ResultRow], path: str | Path) -> Path:
    """Write rows as a JSON list of objects keyed by CSV_COLUMNS."""
    if not rows:
        raise ValueError("no rows to emit")
    path = Path(path)
    doc = [{c: getattr(row, c) for c in CSV_COLUMNS} for row in rows]
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def load_rows_json(path: str | Path) -> list[ResultRow]:
    """Inverse of emit_json."""
    doc = json.loads(Path(path).read_text())
    return [ResultRow(**{c: row[c] for c in CSV_COLUMNS}) for row in doc]
