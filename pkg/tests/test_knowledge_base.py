import pytest
from hypothesis import given, strategies as st

from gscsim.knowledge_base import (
    UNK,
    UNK_TERM,
    ConceptNormalizer,
    KnowledgeBase,
    TableError,
    TableKind,
    TokenTable,
    load_tables,
    save_tables,
)

words = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=12)


@pytest.fixture(scope="module")
def norm():
    return ConceptNormalizer.bundled()


@given(words)
def test_normalize_idempotent(w):
    n = ConceptNormalizer.bundled()
    once = n.normalize(w)
    assert n.normalize(once) == once


@given(words)
def test_normalize_total_and_lower(w):
    n = ConceptNormalizer.bundled()
    out = n.normalize(w.upper())
    assert out == n.normalize(w)


def test_plural_folding(norm):
    assert norm.normalize("cars") == "car"
    assert norm.normalize("boxes") == "box"
    assert norm.normalize("benches") == "bench"
    assert norm.normalize("glasses") == "glass"
    assert norm.normalize("people") == "person"
    assert norm.normalize("buses") == "bus"


def test_verb_folding(norm):
    assert norm.normalize("walking") == "walk"
    assert norm.normalize("parked") == "park"
    assert norm.normalize("running") == "run"
    assert norm.normalize("riding") == "ride"
    assert norm.normalize("is") == "be"
    assert norm.normalize("are") == "be"
    assert norm.normalize("does") == "do"


def test_identity_pins(norm):
    # words whose surface form would fold wrongly are pinned
    assert norm.normalize("building") == "building"
    assert norm.normalize("buildings") == "building"
    assert norm.normalize("awning") == "awning"
    assert norm.normalize("grass") == "grass"
    assert norm.normalize("colour") == "color"
    assert norm.normalize("gray") == "grey"


def test_synonym_chain_rejected():
    n = ConceptNormalizer()
    n.add_synonym("a1", "b1")
    n.add_synonym("b1", "c1")
    with pytest.raises(TableError):
        n.validate()


def test_unpinned_target_rejected():
    n = ConceptNormalizer()
    n.add_synonym("autos", "cars")  # target folds to "car"
    with pytest.raises(TableError):
        n.validate()


def test_conflicting_synonyms_rejected():
    n = ConceptNormalizer()
    n.add_synonym("kids", "child")
    with pytest.raises(TableError):
        n.add_synonym("kids", "person")


def test_token_table_round_trip():
    t = TokenTable(TableKind.OBJECT)
    a = t.token_of("car", allow_assign=True)
    b = t.token_of("tree", allow_assign=True)
    assert a != b != UNK
    assert t.token_of("car") == a
    assert t.term_of(a) == "car"
    assert t.term_of(999) == UNK_TERM
    assert t.token_of("unseen") == UNK
    assert "car" in t and "unseen" not in t


def test_kb_tables_save_load(tmp_path):
    kb = KnowledgeBase()
    kb.objects.token_of("car", allow_assign=True)
    kb.objects.token_of("tree", allow_assign=True)
    kb.relations.token_of("near", allow_assign=True)
    kb.words.token_of("red", allow_assign=True)
    path = tmp_path / "tables.tsv"
    save_tables([kb.words, kb.objects, kb.relations], path)

    loaded = load_tables(path)
    assert loaded[TableKind.OBJECT] == kb.objects
    assert loaded[TableKind.RELATION] == kb.relations
    assert loaded[TableKind.WORD] == kb.words


def test_kb_normalize_applies_to_lookup():
    kb = KnowledgeBase()
    tok = kb.objects.token_of(kb.normalize("cars"), allow_assign=True)
    assert kb.objects.token_of(kb.normalize("car")) == tok


def test_table_rejects_duplicate_ids():
    t = TokenTable(TableKind.WORD)
    t._insert("alpha", 5)
    with pytest.raises(TableError):
        t._insert("beta", 5)
    with pytest.raises(TableError):
        t._insert("alpha", 6)
    with pytest.raises(TableError):
        t._insert("gamma", UNK)
