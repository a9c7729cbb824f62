"""Question analysis: keyword extraction and template-based program compilation.

Questions are matched against an ordered list of surface templates after word
normalization; the first matching template yields a small instruction program
for the answer reasoner. A deterministic grammar keeps the whole pipeline
reproducible, at the cost of only understanding the published template set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .knowledge_base import KnowledgeBase, TableError, UNK

# Words carrying no semantic payload for matching purposes.
ARTICLES = frozenset({"a", "an", "the"})

DIRECTIONS = frozenset({"left", "right", "above", "below"})

RELATE_INCOMING = "incoming"
RELATE_OUTGOING = "outgoing"


class QuestionType(enum.Enum):
    CHOOSE = "Choose"
    LOGICAL = "Logical"
    QUERY = "Query"
    VERIFY = "Verify"
    RELATIONS = "Relations"
    OBJECTS = "Objects"


@dataclass(frozen=True)
class Question:
    id: int
    text: str
    image_index: int
    answer: str
    type_tag: QuestionType
    meta_tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class KeywordSet:
    """Question-relevant object and relation tokens sent to the device side."""

    image_index: int
    object_tokens: frozenset[int]
    relation_tokens: frozenset[int]

    @property
    def all_tokens(self) -> frozenset[int]:
        return self.object_tokens | self.relation_tokens


class Opcode(enum.Enum):
    SELECT = "SELECT"
    FILTER_LABEL = "FILTER_LABEL"
    FILTER_ATTR = "FILTER_ATTR"
    FILTER_POSITION = "FILTER_POSITION"
    RELATE = "RELATE"
    COUNT = "COUNT"
    EXISTS = "EXISTS"
    QUERY_ATTR = "QUERY_ATTR"
    VERIFY_ATTR = "VERIFY_ATTR"
    AND = "AND"
    OR = "OR"
    CHOOSE = "CHOOSE"


TERMINAL_OPCODES = frozenset(
    {
        Opcode.COUNT,
        Opcode.EXISTS,
        Opcode.QUERY_ATTR,
        Opcode.VERIFY_ATTR,
        Opcode.AND,
        Opcode.OR,
        Opcode.CHOOSE,
    }
)

# opcode -> (argument count, argument kinds); kinds are checked when a
# template file is loaded so a bad grammar fails fast, not mid-run.
OPCODE_ARITY: dict[Opcode, tuple[str, ...]] = {
    Opcode.SELECT: ("object",),
    Opcode.FILTER_LABEL: ("object",),
    Opcode.FILTER_ATTR: ("word",),
    Opcode.FILTER_POSITION: ("direction", "object"),
    Opcode.RELATE: ("relation", "relate_direction"),
    Opcode.COUNT: (),
    Opcode.EXISTS: (),
    Opcode.QUERY_ATTR: ("kind",),
    Opcode.VERIFY_ATTR: ("word",),
    Opcode.AND: (),
    Opcode.OR: (),
    Opcode.CHOOSE: ("word", "word"),
}


@dataclass(frozen=True)
class Instruction:
    opcode: Opcode
    args: tuple = ()

    def __post_init__(self):
        expected = OPCODE_ARITY[self.opcode]
        if len(self.args) != len(expected):
            raise ValueError(
                f"{self.opcode.value} takes {len(expected)} args, got {len(self.args)}"
            )


@dataclass(frozen=True)
class ReasoningProgram:
    steps: tuple[Instruction, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("empty program")
        if self.steps[-1].opcode not in TERMINAL_OPCODES:
            raise ValueError(f"program must end in a terminal opcode, got {self.steps[-1].opcode.value}")

    def __len__(self) -> int:
        return len(self.steps)


class UnparseableQuestion(ValueError):
    """No template in the grammar matches the question."""


class GrammarError(ValueError):
    """Malformed template grammar file."""


def tokenize_text(text: str, kb: KnowledgeBase) -> list[str]:
    """Normalized content words of a question, articles and punctuation dropped."""
    words = []
    for raw in text.split():
        w = raw.strip(".,?!;:'\"()").lower()
        if not w:
            continue
        w = kb.normalize(w)
        if w in ARTICLES:
            continue
        words.append(w)
    return words


def extract_keywords(q: Question, kb: KnowledgeBase) -> KeywordSet:
    """Tokens of question words that name known objects or relations."""
    objects = set()
    relations = set()
    for w in tokenize_text(q.text, kb):
        tok = kb.objects.token_of(w)
        if tok != UNK:
            objects.add(tok)
        tok = kb.relations.token_of(w)
        if tok != UNK:
            relations.add(tok)
    return KeywordSet(
        image_index=q.image_index,
        object_tokens=frozenset(objects),
        relation_tokens=frozenset(relations),
    )


@dataclass(frozen=True)
class _Slot:
    name: str
    kind: str  # object | relation | word | direction


@dataclass(frozen=True)
class Template:
    """One 'pattern :: program' grammar rule."""

    pattern: tuple  # words (str) and _Slot entries
    program_spec: tuple[tuple[str, tuple[str, ...]], ...]
    line: int

    def match(self, words: list[str], kb: KnowledgeBase) -> dict[str, str] | None:
        if len(words) != len(self.pattern):
            return None
        bound: dict[str, str] = {}
        for pat, word in zip(self.pattern, words):
            if isinstance(pat, str):
                if pat != word:
                    return None
                continue
            if not _slot_accepts(pat.kind, word, kb):
                return None
            bound[pat.name] = word
        return bound


def _slot_accepts(kind: str, word: str, kb: KnowledgeBase) -> bool:
    if kind == "object":
        return kb.objects.token_of(word) != UNK
    if kind == "relation":
        return kb.relations.token_of(word) != UNK
    if kind == "word":
        return kb.words.token_of(word) != UNK
    if kind == "direction":
        return word in DIRECTIONS
    raise GrammarError(f"unknown slot kind {kind!r}")


_SLOT_KINDS = {"obj": "object", "rel": "relation", "attr": "word", "dir": "direction"}


def _parse_pattern(text: str, line: int) -> tuple:
    pattern = []
    for tok in text.split():
        if tok.startswith("<") and tok.endswith(">"):
            inner = tok[1:-1]
            if ":" not in inner:
                raise GrammarError(f"line {line}: slot {tok!r} needs '<kind:Name>' form")
            kind_s, name = inner.split(":", 1)
            if kind_s not in _SLOT_KINDS:
                raise GrammarError(f"line {line}: unknown slot kind {kind_s!r}")
            pattern.append(_Slot(name=name, kind=_SLOT_KINDS[kind_s]))
        elif tok.lower() not in ARTICLES:
            pattern.append(tok.lower())
    return tuple(pattern)


def _parse_program_spec(text: str, line: int) -> tuple:
    steps = []
    for chunk in text.split(";"):
        parts = chunk.split()
        if not parts:
            raise GrammarError(f"line {line}: empty instruction")
        try:
            opcode = Opcode(parts[0].upper())
        except ValueError as exc:
            raise GrammarError(f"line {line}: unknown opcode {parts[0]!r}") from exc
        args = tuple(parts[1:])
        if len(args) != len(OPCODE_ARITY[opcode]):
            raise GrammarError(
                f"line {line}: {opcode.value} takes "
                f"{len(OPCODE_ARITY[opcode])} args, got {len(args)}"
            )
        steps.append((opcode.value, args))
    return tuple(steps)


class TemplateGrammar:
    """Ordered template rules; first matching rule compiles the question."""

    def __init__(self, templates: list[Template], kb: KnowledgeBase):
        self.templates = templates
        self.kb = kb

    @classmethod
    def from_file(cls, path: str | Path, kb: KnowledgeBase) -> "TemplateGrammar":
        templates = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "::" not in line:
                raise GrammarError(f"line {lineno}: expected 'pattern :: program'")
            pattern_s, program_s = line.split("::", 1)
            pattern = _parse_pattern(_normalize_pattern(pattern_s, kb), lineno)
            spec = _parse_program_spec(program_s.strip(), lineno)
            _check_spec_slots(pattern, spec, lineno)
            templates.append(Template(pattern=pattern, program_spec=spec, line=lineno))
        return cls(templates, kb)

    @classmethod
    def bundled(cls, kb: KnowledgeBase) -> "TemplateGrammar":
        with resources.as_file(
            resources.files("gscsim.data").joinpath("templates.txt")
        ) as p:
            return cls.from_file(p, kb)

    def parse(self, q: Question) -> ReasoningProgram:
        words = tokenize_text(q.text, self.kb)
        for tpl in self.templates:
            bound = tpl.match(words, self.kb)
            if bound is None:
                continue
            return self._compile(tpl, bound)
        raise UnparseableQuestion(f"question {q.id}: no template matches {q.text!r}")

    def _compile(self, tpl: Template, bound: dict[str, str]) -> ReasoningProgram:
        kb = self.kb
        steps = []
        for opcode_s, arg_specs in tpl.program_spec:
            opcode = Opcode(opcode_s)
            args = []
            for kind, spec in zip(OPCODE_ARITY[opcode], arg_specs):
                value = bound.get(spec, spec)
                if kind == "object":
                    args.append(_resolve(kb.objects.token_of(value), value, "object"))
                elif kind == "relation":
                    args.append(_resolve(kb.relations.token_of(value), value, "relation"))
                elif kind == "word":
                    args.append(_resolve(kb.words.token_of(value), value, "word"))
                elif kind == "direction":
                    if value not in DIRECTIONS:
                        raise UnparseableQuestion(f"bad direction {value!r}")
                    args.append(value)
                elif kind == "relate_direction":
                    if value not in (RELATE_INCOMING, RELATE_OUTGOING):
                        raise GrammarError(f"bad relate direction {value!r}")
                    args.append(value)
                elif kind == "kind":
                    args.append(value)
                else:  # pragma: no cover - closed by OPCODE_ARITY
                    raise GrammarError(f"unknown arg kind {kind!r}")
            steps.append(Instruction(opcode=opcode, args=tuple(args)))
        return ReasoningProgram(steps=tuple(steps))


def _resolve(token: int, value: str, table: str) -> int:
    if token == UNK:
        raise UnparseableQuestion(f"{table} term {value!r} not in knowledge base")
    return token


def _normalize_pattern(pattern_s: str, kb: KnowledgeBase) -> str:
    """Normalize literal pattern words so grammar and questions share forms."""
    out = []
    for tok in pattern_s.split():
        if tok.startswith("<"):
            out.append(tok)
        else:
            out.append(kb.normalize(tok))
    return " ".join(out)


def _check_spec_slots(pattern: tuple, spec: tuple, lineno: int) -> None:
    last = Opcode(spec[-1][0])
    if last not in TERMINAL_OPCODES:
        raise GrammarError(f"line {lineno}: program must end in a terminal opcode")


def parse_question(q: Question, grammar: TemplateGrammar) -> ReasoningProgram:
    """Compile a question to its reasoning program; pure in (text, grammar)."""
    return grammar.parse(q)
