"""Shared token tables and concept normalization.

Both ends of the simulated link (and the wire serializer between them) agree
on compact 16-bit integer tokens for natural words, object labels, and
relationship labels. Token id 0 is reserved as the UNK sentinel in every
table and is never assigned to a term.
"""

from __future__ import annotations

import enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

UNK = 0
UNK_TERM = "<unk>"
MAX_TOKEN = 0xFFFF


class TableKind(enum.Enum):
    WORD = "word"
    OBJECT = "object"
    RELATION = "relation"


class TableError(ValueError):
    """Malformed table file or violated table invariant."""


class TableFullError(TableError):
    """All 16-bit token ids are exhausted."""


class TokenTable:
    """Bidirectional term <-> token-id map for one vocabulary kind."""

    def __init__(self, kind: TableKind):
        self.kind = kind
        self._term_to_id: dict[str, int] = {}
        self._id_to_term: dict[int, str] = {}
        self.next_id = 1

    def __len__(self) -> int:
        return len(self._term_to_id)

    def __contains__(self, term: str) -> bool:
        return term in self._term_to_id

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TokenTable):
            return NotImplemented
        return (
            self.kind == other.kind
            and self._term_to_id == other._term_to_id
            and self.next_id == other.next_id
        )

    def items(self) -> Iterable[tuple[str, int]]:
        return self._term_to_id.items()

    def token_of(self, term: str, allow_assign: bool = False) -> int:
        """Look up (or, with ``allow_assign``, mint) the token id for ``term``.

        Unknown terms map to UNK (0) unless assignment is allowed, in which
        case the next free id is handed out and recorded.
        """
        tok = self._term_to_id.get(term)
        if tok is not None:
            return tok
        if not allow_assign:
            return UNK
        if self.next_id > MAX_TOKEN:
            raise TableFullError(f"{self.kind.value} table exhausted all 16-bit ids")
        tok = self.next_id
        self._term_to_id[term] = tok
        self._id_to_term[tok] = term
        self.next_id += 1
        return tok

    def term_of(self, token: int) -> str:
        """Inverse lookup; id 0 and unassigned ids yield the UNK sentinel."""
        return self._id_to_term.get(token, UNK_TERM)

    def _insert(self, term: str, token: int) -> None:
        if token == UNK or token > MAX_TOKEN:
            raise TableError(f"id {token} out of assignable range for {term!r}")
        if token in self._id_to_term:
            raise TableError(f"duplicate id {token} in {self.kind.value} table")
        if term in self._term_to_id:
            raise TableError(f"duplicate term {term!r} in {self.kind.value} table")
        self._term_to_id[term] = token
        self._id_to_term[token] = term
        self.next_id = max(self.next_id, token + 1)


# Suffix folding rules: (suffix, replacement, minimum stem length).
# Each rule's output can never re-trigger a rule, which keeps folding
# idempotent; exceptions are carried by the explicit synonym table.
_SUFFIX_RULES = (
    ("sses", "ss", 2),
    ("ches", "ch", 2),
    ("shes", "sh", 2),
    ("xes", "x", 2),
    ("ies", "y", 2),
    ("s", "", 3),
    ("ing", "", 3),
    ("ed", "", 3),
)

# Final consonants commonly doubled before -ing/-ed ("running" -> "run").
_GEMINATES = set("bdgmnpt")


def _fold_once(word: str) -> str:
    for suffix, repl, min_stem in _SUFFIX_RULES:
        if not word.endswith(suffix):
            continue
        if suffix == "s" and word[-2:] in ("ss", "us", "is"):
            continue
        stem = word[: len(word) - len(suffix)]
        if len(stem) < min_stem:
            continue
        if suffix in ("ing", "ed") and len(stem) >= 2:
            if stem[-1] == stem[-2] and stem[-1] in _GEMINATES:
                stem = stem[:-1]
        return stem + repl
    return word


class ConceptNormalizer:
    """Maps surface words to canonical concepts via synonyms and suffix folding.

    Total and idempotent: unseen regular words pass through the suffix rules,
    irregular forms go through the synonym map, everything else is returned
    unchanged.
    """

    def __init__(self, synonyms: Mapping[str, str] | None = None):
        self._synonyms: dict[str, str] = {}
        if synonyms:
            for term, canon in synonyms.items():
                self.add_synonym(term, canon)
            self.validate()

    def add_synonym(self, term: str, canonical: str) -> None:
        """Record one mapping; identity entries pin a word against folding."""
        term = term.strip().lower()
        canonical = canonical.strip().lower()
        if not term or not canonical:
            raise TableError("empty synonym entry")
        if term in self._synonyms and self._synonyms[term] != canonical:
            raise TableError(f"conflicting synonym entries for {term!r}")
        self._synonyms[term] = canonical

    def validate(self) -> None:
        """Check every synonym target is a normalization fixed point."""
        for term, canonical in self._synonyms.items():
            if self._synonyms.get(canonical, canonical) != canonical:
                raise TableError(f"synonym chain via {term!r} -> {canonical!r}")
            if canonical not in self._synonyms:
                folded = canonical
                while _fold_once(folded) != folded:
                    folded = _fold_once(folded)
                if folded != canonical:
                    raise TableError(
                        f"synonym target {canonical!r} folds to {folded!r}; "
                        "add an identity entry to pin it"
                    )

    def normalize(self, term: str) -> str:
        t = term.strip().lower()
        while t:
            canon = self._synonyms.get(t)
            if canon is not None:
                return canon
            folded = _fold_once(t)
            if folded == t:
                return t
            t = folded
        return t

    def normalize_phrase(self, text: str) -> str:
        """Normalize a whitespace-separated phrase word by word."""
        return " ".join(self.normalize(w) for w in text.split())

    @classmethod
    def from_tsv(cls, path: str | Path) -> "ConceptNormalizer":
        norm = cls()
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise TableError(f"{path}:{lineno}: expected 'term<TAB>canonical'")
            norm.add_synonym(parts[0], parts[1])
        norm.validate()
        return norm

    @classmethod
    def bundled(cls) -> "ConceptNormalizer":
        with resources.as_file(
            resources.files("gscsim.data").joinpath("synonyms.tsv")
        ) as p:
            return cls.from_tsv(p)


class KnowledgeBase:
    """The three shared token tables plus the word normalizer."""

    def __init__(self, normalizer: ConceptNormalizer | None = None):
        self.words = TokenTable(TableKind.WORD)
        self.objects = TokenTable(TableKind.OBJECT)
        self.relations = TokenTable(TableKind.RELATION)
        self.normalizer = normalizer or ConceptNormalizer.bundled()

    def table(self, kind: TableKind) -> TokenTable:
        return {
            TableKind.WORD: self.words,
            TableKind.OBJECT: self.objects,
            TableKind.RELATION: self.relations,
        }[kind]

    def normalize(self, term: str) -> str:
        return self.normalizer.normalize(term)


def save_tables(tables: Iterable[TokenTable], path: str | Path) -> None:
    """Write tables as '<kind>\\t<id>\\t<term>' lines, ids ascending per kind."""
    lines = []
    for table in tables:
        for term, tok in sorted(table.items(), key=lambda kv: kv[1]):
            lines.append(f"{table.kind.value}\t{tok}\t{term}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_tables(path: str | Path) -> dict[TableKind, TokenTable]:
    """Inverse of :func:`save_tables`; validates ids and uniqueness."""
    tables = {kind: TokenTable(kind) for kind in TableKind}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise TableError(f"{path}:{lineno}: expected '<kind>\\t<id>\\t<term>'")
        kind_s, id_s, term = parts
        try:
            kind = TableKind(kind_s)
        except ValueError as exc:
            raise TableError(f"{path}:{lineno}: unknown table kind {kind_s!r}") from exc
        try:
            tok = int(id_s)
        except ValueError as exc:
            raise TableError(f"{path}:{lineno}: bad token id {id_s!r}") from exc
        tables[kind]._insert(term, tok)
    return tables
