import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxalign.errors import ValidationError
from ctxalign.model import (
    Descriptor,
    Kind,
    Property,
    build_ontology,
    lint_descriptor_kinds,
    partition_descriptors,
    to_raw,
)
from ctxalign.text import make_id, normalize_label


def raw(entity="Responsibility", prop="Integrity", descs=(("Code of conduct", "formal", 3),)):
    return [{
        "name": entity,
        "properties": [{"name": prop, "descriptors": [{"label": l, "kind": k, "sources": n} for l, k, n in descs]}],
    }]


class TestNormalize:
    @pytest.mark.parametrize("text, expected", [
        ("  Legal   Liability ", "legal liability"),
        ("", ""),
        ("AI Decision Accountability", "ai decision accountability"),
        ("tab\tand\nnewline", "tab and newline"),
        ("Café", "café"),
        ("STRASSE", "strasse"),
    ])
    def test_examples(self, text, expected):
        assert normalize_label(text) == expected

    @given(st.text())
    def test_idempotent(self, text):
        once = normalize_label(text)
        assert normalize_label(once) == once

    def test_ids_escape_separator(self):
        assert make_id("a/b", "c") != make_id("a", "b/c")
        assert make_id("A", "B") == "a/b"


class TestBuildOntology:
    def test_table1_shape(self, table1):
        assert len(table1.entities) == 1
        assert len(table1.properties()) == 10
        assert len(table1.descriptors()) == 36

    def test_empty(self):
        o = build_ontology("empty", [])
        assert o.entities == ()
        assert o.counts() == {"entities": 0, "properties": 0, "essential": 0, "contextual": 0}

    def test_duplicate_descriptor_after_normalization(self):
        with pytest.raises(ValidationError, match="duplicate"):
            build_ontology("x", raw(descs=(("Code of Conduct", "formal", 1), ("  code  of conduct", "contextual", 2))))

    def test_duplicate_entity(self):
        with pytest.raises(ValidationError, match="duplicate entity"):
            build_ontology("x", raw() + raw(entity="RESPONSIBILITY"))

    @pytest.mark.parametrize("descs", [(("   ", "formal", 1),), (("x", "formal", -1),), (("x", "structural", 1),)])
    def test_rejects_bad_descriptors(self, descs):
        with pytest.raises(ValidationError):
            build_ontology("x", raw(descs=descs))

    def test_empty_entity_name(self):
        with pytest.raises(ValidationError):
            build_ontology("x", raw(entity=" "))

    def test_formal_is_essential(self):
        o = build_ontology("x", raw(descs=(("a", "Formal", 1), ("b", "ESSENTIAL", 1), ("c", "Contextual", 1))))
        kinds = [d.kind for d in o.descriptors()]
        assert kinds == [Kind.ESSENTIAL, Kind.ESSENTIAL, Kind.CONTEXTUAL]

    def test_property_value_defaults_to_normalized_name(self, table1):
        p = table1.property("responsibility/legal liability")
        assert p.value == "legal liability"
        assert p.name == "Legal Liability"

    def test_explicit_property_value(self):
        data = raw()
        data[0]["properties"][0]["value"] = "Honesty"
        assert build_ontology("x", data).properties()[0].value == "Honesty"

    def test_children_in_canonical_order(self, table1):
        ids = [p.id for p in table1.properties()]
        assert ids == sorted(ids)
        for p in table1.properties():
            assert [d.id for d in p.descriptors] == sorted(d.id for d in p.descriptors)

    def test_round_trip_through_raw(self, table1):
        assert build_ontology(table1.name, to_raw(table1)) == table1

    def test_direct_construction_validates(self):
        with pytest.raises(ValidationError):
            Property("p", "p", "", ())
        with pytest.raises(ValidationError):
            Descriptor("d", "d", "essential", 1)  # plain string is not a Kind


class TestPartition:
    def test_table1(self, table1):
        ess, ctx = partition_descriptors(table1.entities[0])
        assert (len(ess), len(ctx)) == (18, 18)
        assert all(d.kind is Kind.ESSENTIAL for d in ess)
        assert all(d.kind is Kind.CONTEXTUAL for d in ctx)

    def test_no_descriptors(self):
        o = build_ontology("x", raw(descs=()))
        assert partition_descriptors(o.entities[0]) == ((), ())

    def test_all_contextual(self):
        o = build_ontology("x", raw(descs=(("a", "contextual", 1), ("b", "contextual", 0))))
        ess, ctx = partition_descriptors(o.entities[0])
        assert ess == () and len(ctx) == 2


labels = st.text(alphabet="abcAB /%", min_size=1, max_size=6).filter(lambda s: normalize_label(s))


@given(st.lists(st.tuples(labels, labels, labels, st.sampled_from(list(Kind)), st.integers(0, 90)), max_size=12))
def test_partition_is_a_partition(rows):
    entities: dict = {}
    seen = set()
    for e, p, d, k, n in rows:
        key = make_id(e, p, d)
        if key in seen:
            continue
        seen.add(key)
        ent = entities.setdefault(make_id(e), {"name": e, "properties": {}})
        prop = ent["properties"].setdefault(make_id(e, p), {"name": p, "descriptors": []})
        prop["descriptors"].append({"label": d, "kind": k, "sources": n})
    o = build_ontology("h", [{"name": v["name"], "properties": list(v["properties"].values())} for v in entities.values()])
    for ent in o.entities:
        ess, ctx = partition_descriptors(ent)
        everything = {d.id for p in ent.properties for d in p.descriptors}
        assert len(ess) + len(ctx) == len(everything)
        assert {d.id for d in ess} | {d.id for d in ctx} == everything
        assert not {d.id for d in ess} & {d.id for d in ctx}
    # canonical ids are injective over distinct label triples
    assert len({d.id for d in o.descriptors()}) == len(seen)


def test_lint_flags_suspicious_typing():
    o = build_ontology("x", raw(descs=(("Public perception of audits", "formal", 1),
                                       ("Public opinion", "formal", 1),
                                       ("Mandatory audit procedures", "contextual", 1))))
    warnings = lint_descriptor_kinds(o)
    assert len(warnings) == 2
    assert any("public opinion" in w and "typed essential" in w for w in warnings)
    assert any("mandatory audit procedures" in w and "typed contextual" in w for w in warnings)


def test_lint_is_quiet_on_table1(table1):
    assert lint_descriptor_kinds(table1) == []
