import math
import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ctxalign.errors import DomainError, UndefinedImprovementError, UndefinedMetricError, ValidationError
from ctxalign.model import Descriptor, Kind
from ctxalign.similarity import (
    MatchedPair,
    OverrideTable,
    aggregate_similarity,
    edit_distance,
    improvement,
    lexical_similarity,
    resolve_similarity,
)

from oracles import exact_lexical, mp_aggregate, recursive_levenshtein

E, C = Kind.ESSENTIAL, Kind.CONTEXTUAL


def pair(s, src, kind=E, name="d", target="t"):
    return MatchedPair(name, target, kind, s, src)


def pairs_from(spec):
    return [pair(s, n, k, f"{k.value}{i}") for i, (s, n, k) in enumerate(spec)]


class TestLexical:
    def test_equal_after_normalization(self):
        assert lexical_similarity("Legal Liability", "legal liability") == 1.0

    def test_total_mismatch(self):
        assert lexical_similarity("abc", "xyz") == 0.0

    def test_risk_assessment_vs_audit(self):
        # Jaccard {risk} / {risk, assessment, audit} = 1/3; edit distance 8 over 15 chars
        assert recursive_levenshtein("risk assessment", "risk audit") == 8
        assert exact_lexical("Risk Assessment", "Risk Audit") == Fraction(2, 5)
        assert lexical_similarity("Risk Assessment", "Risk Audit") == pytest.approx(0.4, abs=1e-15)

    def test_empty_strings(self):
        assert lexical_similarity("", "  ") == 1.0
        assert lexical_similarity("", "abc") == 0.0

    @given(st.text(max_size=12), st.text(max_size=12))
    @settings(max_examples=300)
    def test_matches_exact_oracle_and_is_symmetric(self, a, b):
        got = lexical_similarity(a, b)
        assert got == lexical_similarity(b, a)
        assert 0.0 <= got <= 1.0
        assert got == pytest.approx(float(exact_lexical(a, b)), abs=1e-12)

    @given(st.text(alphabet="abc", max_size=8), st.text(alphabet="abc", max_size=8))
    def test_edit_distance_oracle(self, a, b):
        assert edit_distance(a, b) == recursive_levenshtein(a, b)


class TestOverrides:
    def test_lookup_and_fallback(self):
        a = Descriptor("x/p/a", "Legal Liability", E, 1)
        b = Descriptor("y/p/b", "Liability law", E, 1)
        table = OverrideTable({("x/p/a", "y/p/b"): 0.85})
        assert resolve_similarity(a, b, table) == 0.85
        assert resolve_similarity(b, a, table) == lexical_similarity(b.label, a.label)
        assert resolve_similarity(a, b, None) == lexical_similarity(a.label, b.label)

    @pytest.mark.parametrize("bad", [1.2, -0.1, float("nan"), "0.5", True])
    def test_range_guard(self, bad):
        with pytest.raises(ValidationError):
            OverrideTable({("a", "b"): bad})

    def test_duplicate_keys(self):
        with pytest.raises(ValidationError):
            OverrideTable([(("a", "b"), 0.1), (("a", "b"), 0.2)])


class TestMatchedPair:
    def test_unmatched_must_be_zero(self):
        MatchedPair("a", None, E, 0.0, 3)
        with pytest.raises(ValidationError):
            MatchedPair("a", None, E, 0.4, 3)

    def test_negative_src(self):
        with pytest.raises(ValidationError):
            MatchedPair("a", "b", E, 0.4, -1)


class TestAggregate:
    def test_all_ones(self):
        assert aggregate_similarity(pairs_from([(1.0, 3, E), (1.0, 70, C), (1.0, 0, C)])) == 1.0

    def test_single_pair(self):
        assert aggregate_similarity([pair(0.5, 10)]) == 0.5

    def test_worked_example(self):
        spec = [(0.8, 75, E), (0.6, 72, E), (0.9, 65, C), (0.5, 60, C)]
        # frozen from a 60-digit evaluation of the pooled log-weighted mean
        expected = 0.70116912251603869785
        assert float(mp_aggregate([(s, n) for s, n, _ in spec])) == pytest.approx(expected, rel=1e-15)
        assert aggregate_similarity(pairs_from(spec)) == pytest.approx(expected, rel=1e-12)
        assert round(aggregate_similarity(pairs_from(spec)), 4) == 0.7012

    def test_empty(self):
        with pytest.raises(UndefinedMetricError):
            aggregate_similarity([])

    def test_all_zero_weights(self):
        with pytest.raises(UndefinedMetricError):
            aggregate_similarity(pairs_from([(0.3, 0, E), (0.9, 0, C)]))

    def test_zero_weight_pair_is_ignored(self):
        base = pairs_from([(0.4, 10, E)])
        assert aggregate_similarity(base + [pair(1.0, 0, C, "z")]) == 0.4

    def test_essential_only_is_the_general_formula_with_no_contextual(self):
        spec = [(0.2, 5, E), (0.9, 50, E)]
        expected = (0.2 * math.log(6) + 0.9 * math.log(51)) / (math.log(6) + math.log(51))
        assert aggregate_similarity(pairs_from(spec)) == pytest.approx(expected, rel=1e-14)

    def test_order_and_chunking_independent(self):
        rng = random.Random(5)
        ps = pairs_from([(rng.random(), rng.uniform(0, 100), rng.choice([E, C])) for _ in range(30)])
        ref = aggregate_similarity(ps)
        for _ in range(20):
            rng.shuffle(ps)
            assert aggregate_similarity(ps) == ref
        assert aggregate_similarity(ps[:10] + ps[10:]) == ref


pair_specs = st.lists(
    st.tuples(st.floats(0, 1), st.floats(0, 100), st.sampled_from([E, C])), min_size=1, max_size=20
)


@given(pair_specs)
def test_weighted_mean_bounds(spec):
    live = [s for s, n, _ in spec if math.log1p(n) > 0]
    assume(live)
    got = aggregate_similarity(pairs_from(spec))
    assert min(live) <= got <= max(live)


@given(pair_specs, st.floats(0.1, 10))
def test_log_base_invariance(spec, c):
    assume(any(n > 0 for _, n, _ in spec))
    ps = pairs_from(spec)
    base = aggregate_similarity(ps)
    scaled = aggregate_similarity(ps, weight=lambda n: c * math.log1p(n))
    assert scaled == pytest.approx(base, rel=1e-12, abs=1e-300)


@given(pair_specs, st.data())
def test_monotone_in_each_weighted_score(spec, data):
    assume(any(n >= 1 for _, n, _ in spec))
    i = data.draw(st.sampled_from([k for k, (_, n, _) in enumerate(spec) if n >= 1]))
    s, n, k = spec[i]
    assume(s <= 0.9)
    raised = list(spec)
    raised[i] = (s + 0.1, n, k)
    assert aggregate_similarity(pairs_from(raised)) > aggregate_similarity(pairs_from(spec))


@given(pair_specs, st.floats(0, 1), st.floats(1, 100))
def test_contextual_pair_pulls_toward_its_score(spec, s_new, src):
    assume(any(n > 0 for _, n, _ in spec))
    before = aggregate_similarity(pairs_from(spec))
    after = aggregate_similarity(pairs_from(spec + [(s_new, src, C)]))
    if s_new > before + 1e-9:
        assert after > before
    elif s_new < before - 1e-9:
        assert after < before


class TestImprovement:
    def test_no_change(self):
        assert improvement(0.5, 0.5) == 0.0

    def test_ten_percent(self):
        assert improvement(0.5, 0.55) == pytest.approx(0.10, rel=1e-12)

    def test_zero_baseline(self):
        with pytest.raises(UndefinedImprovementError):
            improvement(0.0, 0.4)

    @pytest.mark.parametrize("args", [(-0.1, 0.4), (0.4, -0.1)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            improvement(*args)

    @given(st.floats(1e-6, 1), st.floats(0, 1), st.floats(0, 1))
    def test_identity_and_monotone(self, s_f, a, b):
        assert improvement(s_f, s_f) == 0.0
        if a < b:
            assert improvement(s_f, a) <= improvement(s_f, b)
