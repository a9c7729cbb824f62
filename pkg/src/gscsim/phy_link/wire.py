"""Bit-exact wire format for ranked semantic payloads.

Layout, most significant bit first:

    magic 0x5347 (16) | entry count (16) | entries...

Each entry:

    subject token (16) | subject box x,y,w,h (4x16) | relation token (16,
    0 for a bare bounding box) | object token (16) | object box (4x16) |
    attribute count (8) | attribute tokens (16 each) | CRC-16/CCITT over
    all preceding bytes of the entry

Every field is byte-aligned, so a corrupted variable-length entry can be
skipped by scanning forward one byte at a time for the next position whose
entry checksum validates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..knowledge_base import KnowledgeBase, UNK, UNK_TERM
from ..scene_source import DetectedObject, SGTriplet
from ..semantic_ranker import PayloadMode, RankedPayload

MAGIC = 0x5347
HEADER_BITS = 32
FIXED_ENTRY_BITS = 200  # entry with zero attributes
_PRE_ATTR_BYTES = 23  # subject + boxes + relation + object fields
_CRC_POLY = 0x1021
_CRC_INIT = 0xFFFF


class WireFormatError(ValueError):
    """Field too large for its wire width."""


@dataclass(frozen=True)
class WireEntry:
    """One decoded payload entry; a bare BBox has relation token 0."""

    subject_token: int
    subject_box: tuple[int, int, int, int]
    relation_token: int
    object_token: int
    object_box: tuple[int, int, int, int]
    attribute_tokens: tuple[int, ...] = ()

    @property
    def is_bbox(self) -> bool:
        return self.relation_token == UNK


@dataclass(frozen=True)
class DeserializedPayload:
    entries: tuple[WireEntry, ...]
    dropped: int
    header_error: bool = False


def crc16_ccitt(data: bytes) -> int:
    crc = _CRC_INIT
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ _CRC_POLY) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


class _BitWriter:
    def __init__(self):
        self._bits: list[int] = []

    def write(self, value: int, width: int, what: str) -> None:
        if value < 0 or value >= (1 << width):
            raise WireFormatError(f"{what} value {value} exceeds {width} bits")
        for shift in range(width - 1, -1, -1):
            self._bits.append((value >> shift) & 1)

    def byte_view(self, start_bit: int) -> bytes:
        chunk = self._bits[start_bit:]
        return np.packbits(np.array(chunk, dtype=np.uint8)).tobytes()

    def position(self) -> int:
        return len(self._bits)

    def to_array(self) -> np.ndarray:
        return np.array(self._bits, dtype=np.uint8)


def _entry_fields(
    item: DetectedObject | SGTriplet,
    scene_objects: tuple[DetectedObject, ...],
) -> tuple[DetectedObject, int, int, tuple[int, int, int, int]]:
    """(subject object, relation token, object token, object box) of an item."""
    if isinstance(item, DetectedObject):
        return item, UNK, 0, (0, 0, 0, 0)
    subject = scene_objects[item.subject_obj]
    obj = scene_objects[item.object_obj]
    return subject, item.relation_token, obj.label_token, obj.box


def serialize_payload(payload: RankedPayload) -> np.ndarray:
    """Serialize ranked items to a 0/1 uint8 bit array."""
    writer = _BitWriter()
    writer.write(MAGIC, 16, "magic")
    writer.write(len(payload.items), 16, "entry count")
    for scored in payload.items:
        subject, rel_tok, obj_tok, obj_box = _entry_fields(
            scored.item, payload.scene_objects
        )
        start = writer.position()
        writer.write(subject.label_token, 16, "subject token")
        for v in subject.box:
            writer.write(v, 16, "subject box")
        writer.write(rel_tok, 16, "relation token")
        writer.write(obj_tok, 16, "object token")
        for v in obj_box:
            writer.write(v, 16, "object box")
        attrs = subject.attribute_tokens
        writer.write(len(attrs), 8, "attribute count")
        for tok in attrs:
            writer.write(tok, 16, "attribute token")
        writer.write(crc16_ccitt(writer.byte_view(start)), 16, "entry crc")
    return writer.to_array()


def payload_bit_length(n_entries: int, attr_counts: list[int] | None = None) -> int:
    """Wire size of a payload with the given entry attribute counts."""
    attr_counts = attr_counts or [0] * n_entries
    return HEADER_BITS + sum(FIXED_ENTRY_BITS + 16 * a for a in attr_counts)


class _BitReader:
    def __init__(self, bits: np.ndarray):
        self.bits = np.asarray(bits, dtype=np.uint8) & 1
        self.pos = 0

    def remaining(self) -> int:
        return len(self.bits) - self.pos

    def read(self, width: int) -> int:
        if self.remaining() < width:
            raise WireFormatError("bitstream exhausted")
        value = 0
        for bit in self.bits[self.pos : self.pos + width]:
            value = (value << 1) | int(bit)
        self.pos += width
        return value


def _try_entry(bits: np.ndarray, start: int) -> tuple[WireEntry, int] | None:
    """Parse and checksum one entry at bit offset ``start``; None on failure."""
    total = len(bits)
    if total - start < FIXED_ENTRY_BITS:
        return None
    rd = _BitReader(bits)
    rd.pos = start
    subject_token = rd.read(16)
    subject_box = tuple(rd.read(16) for _ in range(4))
    relation_token = rd.read(16)
    object_token = rd.read(16)
    object_box = tuple(rd.read(16) for _ in range(4))
    n_attr = rd.read(8)
    if rd.remaining() < 16 * n_attr + 16:
        return None
    attrs = tuple(rd.read(16) for _ in range(n_attr))
    stated_crc = rd.read(16)
    body = np.packbits(bits[start : rd.pos - 16]).tobytes()
    if crc16_ccitt(body) != stated_crc:
        return None
    entry = WireEntry(
        subject_token=subject_token,
        subject_box=subject_box,
        relation_token=relation_token,
        object_token=object_token,
        object_box=object_box,
        attribute_tokens=attrs,
    )
    return entry, rd.pos


def _table_has(table, token: int) -> bool:
    return table.term_of(token) != UNK_TERM


def _validate_entry(entry: WireEntry, kb: KnowledgeBase) -> WireEntry | None:
    """Map unknown tokens to UNK; reject entries whose core tokens are unknown."""
    if not _table_has(kb.objects, entry.subject_token):
        return None
    if not entry.is_bbox:
        if not _table_has(kb.relations, entry.relation_token):
            return None
        if not _table_has(kb.objects, entry.object_token):
            return None
    attrs = tuple(
        tok if _table_has(kb.words, tok) else UNK for tok in entry.attribute_tokens
    )
    if attrs == entry.attribute_tokens:
        return entry
    return WireEntry(
        subject_token=entry.subject_token,
        subject_box=entry.subject_box,
        relation_token=entry.relation_token,
        object_token=entry.object_token,
        object_box=entry.object_box,
        attribute_tokens=attrs,
    )


def deserialize_payload(
    bits: np.ndarray,
    kb: KnowledgeBase,
    reliability: np.ndarray | None = None,
) -> DeserializedPayload:
    """Recover entries from a (possibly corrupted) payload bitstream.

    Entries failing their checksum, overlapping bits flagged unreliable by
    the decoder, or carrying unknown core tokens are dropped and counted.
    A bad magic word drops the whole payload and flags a header error.
    """
    bits = np.asarray(bits, dtype=np.uint8) & 1
    if reliability is not None:
        reliability = np.asarray(reliability, dtype=bool)
        if reliability.shape != bits.shape:
            raise ValueError("reliability mask must align with the bitstream")
    if len(bits) < HEADER_BITS:
        return DeserializedPayload(entries=(), dropped=0, header_error=True)
    if reliability is not None and not reliability[:HEADER_BITS].all():
        return DeserializedPayload(entries=(), dropped=0, header_error=True)
    rd = _BitReader(bits)
    magic = rd.read(16)
    count = rd.read(16)
    if magic != MAGIC:
        return DeserializedPayload(entries=(), dropped=0, header_error=True)

    entries: list[WireEntry] = []
    pos = HEADER_BITS
    while len(entries) < count and len(bits) - pos >= FIXED_ENTRY_BITS:
        parsed = _try_entry(bits, pos)
        if parsed is not None:
            entry, new_pos = parsed
            reliable = reliability is None or reliability[pos:new_pos].all()
            pos = new_pos
            if reliable:
                checked = _validate_entry(entry, kb)
                if checked is not None:
                    entries.append(checked)
            continue
        # checksum failure: hunt byte-by-byte for the next valid entry
        resync = pos + 8
        while len(bits) - resync >= FIXED_ENTRY_BITS:
            if _try_entry(bits, resync) is not None:
                break
            resync += 8
        pos = resync
    dropped = max(0, count - len(entries))
    return DeserializedPayload(entries=tuple(entries), dropped=dropped)
