from hypothesis import given
from hypothesis import strategies as st

from nego.constraints import (
    ConnLit,
    ForbidConjunction,
    MapLit,
    PriorityNogood,
    PriorityPrecedence,
    SelLit,
    active_priority_constraints,
    configuration_ok,
    sort_constraints,
)
from nego.model import Configuration

CFG = Configuration(
    frozenset({"A", "B"}),
    frozenset({("A", "s", "B")}),
    {("A", "t1"): "R1", ("B", "t2"): "R2"},
    (("A", "th"), ("B", "th")),
)


def test_literal_holds():
    assert SelLit("A", True).holds(CFG)
    assert SelLit("C", False).holds(CFG)
    assert not SelLit("A", False).holds(CFG)
    assert ConnLit("A", "s", "B").holds(CFG)
    assert not ConnLit("B", "s", "A").holds(CFG)
    assert MapLit("A", "t1", "R1").holds(CFG)
    assert not MapLit("A", "t1", "R2").holds(CFG)


def test_literal_strings():
    assert str(SelLit("A", False)) == "sel[A]=false"
    assert str(ConnLit("A", "s", "B")) == "conn[A,s]=B"
    assert str(MapLit("A", "t1", "R1")) == "map[A.t1]=R1"


def test_forbid_blocks_only_full_match():
    both = ForbidConjunction(frozenset({ConnLit("A", "s", "B"), MapLit("A", "t1", "R1")}))
    assert both.blocks(CFG)
    partial = ForbidConjunction(frozenset({ConnLit("A", "s", "B"), MapLit("A", "t1", "R2")}))
    assert not partial.blocks(CFG)


def test_empty_forbid_blocks_everything():
    assert ForbidConjunction(frozenset()).blocks(CFG)


def test_precedence():
    ok = PriorityPrecedence(("A", "th"), ("B", "th"))
    assert not ok.violated_by(CFG.ranks())
    bad = PriorityPrecedence(("B", "th"), ("A", "th"))
    assert bad.violated_by(CFG.ranks())
    absent = PriorityPrecedence(("C", "th"), ("A", "th"))
    assert not absent.violated_by(CFG.ranks())


def test_nogood_requires_context_and_all_pairs():
    nogood = PriorityNogood(
        frozenset({ConnLit("A", "s", "B")}),
        frozenset({(("A", "th"), ("B", "th"))}),
    )
    assert nogood.applies(CFG)
    assert nogood.violated_by(CFG)
    reordered = Configuration(CFG.selected, CFG.connections, CFG.mapping, (("B", "th"), ("A", "th")))
    assert not nogood.violated_by(reordered)
    elsewhere = PriorityNogood(
        frozenset({ConnLit("B", "s", "A")}),
        frozenset({(("A", "th"), ("B", "th"))}),
    )
    assert not elsewhere.violated_by(CFG)


def test_nogood_empty_pairs_never_fires():
    nogood = PriorityNogood(frozenset(), frozenset())
    assert nogood.applies(CFG)
    assert not nogood.violated_by(CFG)


def test_configuration_ok():
    constraints = [
        PriorityPrecedence(("A", "th"), ("B", "th")),
        ForbidConjunction(frozenset({SelLit("C", True)})),
    ]
    assert configuration_ok(CFG, constraints)
    constraints.append(ForbidConjunction(frozenset({SelLit("A", True)})))
    assert not configuration_ok(CFG, constraints)


def test_active_priority_constraints():
    precedence = PriorityPrecedence(("A", "th"), ("B", "th"))
    applicable = PriorityNogood(frozenset({SelLit("A", True)}), frozenset({(("A", "th"), ("B", "th"))}))
    foreign = PriorityNogood(frozenset({SelLit("Z", True)}), frozenset({(("A", "th"), ("B", "th"))}))
    forbid = ForbidConjunction(frozenset())
    precedences, nogoods = active_priority_constraints([precedence, applicable, foreign, forbid], CFG)
    assert precedences == [precedence]
    assert nogoods == [applicable]


def test_sort_constraints_stable_by_text():
    a = ForbidConjunction(frozenset({SelLit("A", True)}))
    b = PriorityPrecedence(("A", "th"), ("B", "th"))
    assert sort_constraints([b, a]) == sort_constraints([a, b])


threads = [("A", "th"), ("B", "th"), ("C", "th"), ("D", "th")]


@given(st.permutations(threads), st.sets(st.sampled_from(range(4)), min_size=1, max_size=3))
def test_nogood_violation_matches_pair_semantics(order, picks):
    pairs = frozenset((threads[i], threads[(i + 1) % 4]) for i in picks)
    cfg = Configuration(frozenset("ABCD"), frozenset(), {}, tuple(order))
    ranks = cfg.ranks()
    expected = all(ranks[t] < ranks[m] for t, m in pairs)
    nogood = PriorityNogood(frozenset(), pairs)
    assert nogood.violated_by(cfg) == expected
