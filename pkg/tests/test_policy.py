import pytest
from hypothesis import given, strategies as st

from eovsim.model import Endorsement, ReadSet, WriteSet
from eovsim.policy import (
    And,
    Or,
    OutOf,
    PolicyError,
    Principal,
    evaluate,
    parse_policy,
    principal_labels,
    print_policy,
)

from oracles import all_flag_combinations, brute_force_policy_count

SITES = {"e.heidelberg": "Heidelberg", "e.poland": "Poland", "e.a": "A", "e.b": "B", "e.c": "C", "e.d": "D"}


def endorsement(endorser: str, valid: bool = True) -> Endorsement:
    return Endorsement("p1", endorser, ReadSet(), WriteSet(), signature_valid=valid)


class TestParse:
    def test_two_site_conjunction(self):
        tree = parse_policy('AND ("Heidelberg" peer, "Poland" peer)')
        assert tree == And((Principal("Heidelberg"), Principal("Poland")))

    def test_single_principal(self):
        assert parse_policy('"X" peer') == Principal("X")

    def test_outof(self):
        tree = parse_policy('OUTOF(2, "A" peer, "B" peer, "C" peer)')
        assert tree == OutOf(2, (Principal("A"), Principal("B"), Principal("C")))

    def test_nested(self):
        tree = parse_policy('OR(AND("A" peer, "B" peer), "C" peer)')
        assert tree == Or((And((Principal("A"), Principal("B"))), Principal("C")))

    def test_keywords_case_insensitive_labels_case_sensitive(self):
        assert parse_policy('and("A" PEER, "b" peer)') == And((Principal("A"), Principal("b")))

    def test_whitespace_insensitive(self):
        assert parse_policy('  AND (  "A"   peer ,"B" peer )  ') == parse_policy('AND("A" peer, "B" peer)')

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "   ",
            "AND()peer",
            'XOR("A" peer)',
            '"A" node',
            'AND("A" peer',
            'AND("A" peer,)',
            '"A" peer trailing',
            "peer",
        ],
    )
    def test_syntax_errors(self, text):
        with pytest.raises(PolicyError):
            parse_policy(text)

    def test_error_carries_position(self):
        with pytest.raises(PolicyError) as err:
            parse_policy('AND("A" peer, "B" node)')
        assert err.value.position == 18

    @pytest.mark.parametrize("m", [0, 3])
    def test_outof_threshold_range(self, m):
        with pytest.raises(PolicyError):
            parse_policy(f'OUTOF({m}, "A" peer, "B" peer)')


class TestEvaluate:
    def test_conjunction_satisfied(self):
        tree = parse_policy('AND ("Heidelberg" peer, "Poland" peer)')
        both = [endorsement("e.heidelberg"), endorsement("e.poland")]
        assert evaluate(tree, both, SITES) is True

    def test_conjunction_missing_conjunct(self):
        tree = parse_policy('AND ("Heidelberg" peer, "Poland" peer)')
        assert evaluate(tree, [endorsement("e.heidelberg")], SITES) is False

    def test_invalid_signature_counts_as_absent(self):
        tree = parse_policy('"Heidelberg" peer')
        assert evaluate(tree, [endorsement("e.heidelberg", valid=False)], SITES) is False

    def test_unknown_endorser_matches_nothing(self):
        tree = parse_policy('"Heidelberg" peer')
        assert evaluate(tree, [endorsement("e.unknown")], SITES) is False

    def test_duplicates_count_once(self):
        tree = parse_policy('OUTOF(2, "A" peer, "B" peer)')
        assert evaluate(tree, [endorsement("e.a"), endorsement("e.a")], SITES) is False

    def test_empty_endorsements(self):
        assert evaluate(parse_policy('"A" peer'), [], SITES) is False

    def test_outof_matches_brute_force_over_all_subsets(self):
        tree = parse_policy('OUTOF(2, "A" peer, "B" peer, "C" peer)')
        endorsers = ["e.a", "e.b", "e.c"]
        for flags in all_flag_combinations(3):
            ends = [endorsement(e, valid=f) for e, f in zip(endorsers, flags)]
            assert evaluate(tree, ends, SITES) == brute_force_policy_count(2, flags)

    def test_principal_labels(self):
        tree = parse_policy('OR(AND("A" peer, "B" peer), OUTOF(1, "C" peer))')
        assert principal_labels(tree) == {"A", "B", "C"}


labels = st.sampled_from(["A", "B", "C", "D"])


@st.composite
def policy_trees(draw, depth=2):
    if depth == 0:
        return Principal(draw(labels))
    kind = draw(st.sampled_from(["principal", "and", "or", "outof"]))
    if kind == "principal":
        return Principal(draw(labels))
    children = tuple(draw(policy_trees(depth=depth - 1)) for _ in range(draw(st.integers(1, 3))))
    if kind == "and":
        return And(children)
    if kind == "or":
        return Or(children)
    return OutOf(draw(st.integers(1, len(children))), children)


@st.composite
def endorsement_sets(draw):
    ends = []
    for site in ["A", "B", "C", "D"]:
        present = draw(st.booleans())
        if present:
            ends.append(endorsement(f"e.{site.lower()}", valid=draw(st.booleans())))
    return ends


class TestProperties:
    @given(policy_trees())
    def test_print_parse_round_trip(self, tree):
        assert parse_policy(print_policy(tree)) == tree

    @given(policy_trees(), endorsement_sets(), st.sampled_from(["A", "B", "C", "D"]))
    def test_monotone_in_valid_endorsements(self, tree, ends, extra_site):
        before = evaluate(tree, ends, SITES)
        extended = ends + [endorsement(f"e.{extra_site.lower()}", valid=True)]
        after = evaluate(tree, extended, SITES)
        assert after or not before

    @given(policy_trees(depth=1), endorsement_sets())
    def test_single_child_wrappers_equal_child(self, child, ends):
        for wrapper in (And((child,)), Or((child,)), OutOf(1, (child,))):
            assert evaluate(wrapper, ends, SITES) == evaluate(child, ends, SITES)

    def test_outof_extremes_match_and_or_exhaustively(self):
        # For every policy over <= 4 principals and every endorsement
        # subset: OUTOF(n, ...) == AND(...) and OUTOF(1, ...) == OR(...).
        sites = ["A", "B", "C", "D"]
        children = tuple(Principal(s) for s in sites)
        for k in range(1, 5):
            subset = children[:k]
            for flags in all_flag_combinations(k):
                ends = [endorsement(f"e.{s.lower()}", valid=f) for s, f in zip(sites, flags)]
                assert evaluate(OutOf(k, subset), ends, SITES) == evaluate(And(subset), ends, SITES)
                assert evaluate(OutOf(1, subset), ends, SITES) == evaluate(Or(subset), ends, SITES)
