import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horndim.constraints import (
    EQ, FALSE, INTEGER, TRUE, BudgetExhausted, ConstraintConj, LinConstraint, conj, entails,
    entails_all, equivalent, hull, is_empty, is_sat, lin, minimize, project, remove_redundant,
    widen,
)
from horndim.constraints.simplex import solve

from oracles import boxed, grid_models, interval_sat, random_conj

XY = ("X", "Y")
XYZ = ("X", "Y", "Z")


# -- canonical form --------------------------------------------------------------

def test_spellings_normalize_to_one_constraint():
    assert lin("2*X=<4") == lin("X=<2") == lin("-X>=-2")
    assert lin("X>Y") == lin("Y<X")
    assert lin("X=Y+1") == lin("Y+1=X")


def test_trivial_constraints():
    assert lin("0=<1") == TRUE
    assert lin("1=<0") == FALSE
    assert ConstraintConj([TRUE]) == ConstraintConj()
    assert ConstraintConj([lin("X>0"), FALSE]).is_trivially_false


def test_integer_tightening():
    assert lin("2*X<3").integer_tightened() == lin("X=<1")
    assert lin("2*X=3").integer_tightened() == FALSE
    assert lin("3*X+3*Y>=1").integer_tightened() == lin("X+Y>=1")


# -- satisfiability ---------------------------------------------------------------

def test_contradictory_bounds_are_unsat():
    assert not is_sat(conj("X>1", "X=<0"))


def test_empty_conjunction_is_sat():
    assert is_sat(ConstraintConj())


def test_strictness_matters():
    assert is_sat(conj("X>=0", "X=<0"))
    assert not is_sat(conj("X>0", "X=<0"))
    assert is_sat(conj("X>0", "X<1"))
    assert not is_sat(conj("X>0", "X<1"), INTEGER)


def test_integer_budget_exhaustion_raises():
    # unbounded in the direction branch and bound keeps exploring
    c = conj("2*X-2*Y=1")
    assert not is_sat(c, INTEGER)
    with pytest.raises(BudgetExhausted):
        is_sat(conj("3*X+3*Y>=1", "3*X+3*Y=<2", "X-Y>=Z", "Z>=0"), INTEGER, budget=0)


def test_rational_model_satisfies_constraints():
    c = conj("X+Y=3", "X-Y<1", "Y=<5", "2*X>1")
    model = solve(c, want_model=True)
    assert model is not None and c.evaluate(model)


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_sat_matches_grid(rng):
    c = random_conj(rng, XY)
    model = solve(c, want_model=True)
    half = grid_models(c, XY, step=Fraction(1, 2))
    if model is None:
        assert not half
    else:
        assert c.evaluate(model)
    whole = grid_models(c, XY)
    assert is_sat(c, INTEGER) == bool(whole)


# -- entailment -------------------------------------------------------------------

def test_entailment_through_equality_chain():
    assert entails(conj("K1>=K2+1", "K=K1", "K=<1"), lin("K2=<0"))
    assert not entails(conj("K1>=K2+1", "K=K1", "K=<1"), lin("K2=<-1"))


def test_unsat_entails_everything():
    assert entails(conj("X>1", "X<0"), lin("Y=7"))


def test_equivalence_is_semantic():
    assert equivalent(conj("X=Y", "Y=Z"), conj("X=Z", "Z=Y"))
    assert not equivalent(conj("X>=0"), conj("X>0"))


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_entailment_matches_grid(rng):
    c = random_conj(rng, XY)
    f = random_conj(rng, XY, n=1, box=None).items
    if not f:
        return
    f = f[0]
    if entails(c, f):
        assert all(f.evaluate(pt) for pt in grid_models(c, XY, step=Fraction(1, 2)))
    else:
        witnesses = [solve(list(c) + [n], want_model=True) for n in f.negations()]
        assert any(w is not None and c.evaluate(w) and not f.evaluate(w) for w in witnesses)


# -- projection -------------------------------------------------------------------

def test_projection_of_dimension_chain():
    c = conj("K1>=K2+1", "K=K1", "K=<1")
    assert equivalent(project(c, ["K2"]), conj("K2=<0"))
    assert equivalent(project(c, ["K1"]), conj("K1=<1"))


def test_projection_keeps_only_requested_vars():
    p = project(conj("X=Y+1", "Y>=0", "Z=<X"), ["X", "Z"])
    assert p.vars <= {"X", "Z"}
    assert equivalent(p, conj("X>=1", "Z=<X"))


def test_projection_of_unsat_is_false():
    assert is_empty(project(conj("X>Y", "Y>X", "Z=0"), ["Z"]))


def test_projection_regression_equalities_reappearing():
    # redundancy removal once rebuilt an equality that elimination then
    # treated as a single inequality
    c = conj("X=<Y", "Y=<X", "X+Z>=2", "Y-W=<1", "W>=0", "Z=<3")
    assert equivalent(project(c, ["Z", "W"]), project(conj("X=Y", "X+Z>=2", "X-W=<1", "W>=0",
                                                           "Z=<3"), ["Z", "W"]))


@settings(max_examples=150, deadline=None)
@given(st.randoms(use_true_random=False))
def test_projection_matches_interval_oracle(rng):
    c = random_conj(rng, XYZ)
    p = project(c, XY)
    assert p.vars <= set(XY)
    for pt in grid_models(boxed(XY), XY, step=Fraction(1, 2)):
        assert p.evaluate(pt) == interval_sat(c, "Z", pt)


# -- redundancy -------------------------------------------------------------------

def test_remove_redundant_drops_implied():
    out = remove_redundant(conj("X>=0", "X>=1", "X+Y=<3", "Y>=0", "X=<3"))
    assert equivalent(ConstraintConj(out), conj("X>=1", "Y>=0", "X+Y=<3"))
    assert len(out) == 3


def test_minimize_of_unsat():
    assert minimize(conj("X>1", "X<0")).is_trivially_false


# -- hull and widening ------------------------------------------------------------

def test_hull_of_two_points():
    assert equivalent(hull(conj("X=0"), conj("X=1")), conj("X>=0", "X=<1"))


def test_hull_with_empty_operand():
    a = conj("X>=2", "X=<5")
    assert equivalent(hull(a, conj("X>1", "X<0")), a)
    assert equivalent(hull(conj("X>1", "X<0"), a), a)


def test_hull_is_closed():
    h = hull(conj("X>0", "X<1"), conj("X=3"))
    assert equivalent(h, conj("X>=0", "X=<3"))


def test_hull_regression_order_independent():
    p1 = conj("X1>=0", "X1=<1", "X1=X2", "X3=0")
    p2 = conj("2*X2=<3*X1-5", "2*X3=<X1-1", "2*X1=<X2+5", "2*X1=<X2+X3+3", "X3>=1")
    for h in (hull(p1, p2), hull(p2, p1)):
        assert entails(h, lin("2*X3=<X1"))
    assert equivalent(hull(p1, p2), hull(p2, p1))


def test_widen_drops_unstable_bounds():
    assert equivalent(widen(conj("X>=0", "X=<1"), conj("X>=0", "X=<2")), conj("X>=0"))


def test_widen_keeps_stable_equalities_as_halves():
    w = widen(conj("X=0", "Y=0"), conj("X>=0", "X=<1", "Y=0"))
    assert equivalent(w, conj("X>=0", "Y=0"))


def test_widen_from_empty():
    b = conj("X=4")
    assert widen(conj("X>1", "X<0"), b) == b


def _hull_widen_invariants(a, b):
    h = hull(a, b)
    assert entails_all(a, h) and entails_all(b, h)
    pa = grid_models(a, XY)
    pb = grid_models(b, XY)
    for x, y in zip(pa[:6], pb[:6]):
        mid = {v: (x[v] + y[v]) / 2 for v in XY}
        assert h.evaluate(mid)
    assert equivalent(h, hull(b, a))
    if is_sat(a):
        w = widen(a, b)
        assert entails_all(a, w) and entails_all(b, w)
        assert set(w.split_equalities()) <= set(a.split_equalities())


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_hull_and_widen_invariants(rng):
    _hull_widen_invariants(random_conj(rng, XY), random_conj(rng, XY))


def test_hull_is_exact_in_one_dimension():
    rng = random.Random(7)
    for _ in range(50):
        a, b = random_conj(rng, ["X"]), random_conj(rng, ["X"])
        h = hull(a, b)
        pts = [pt["X"] for pt in grid_models(a, ["X"], step=Fraction(1, 2))
               + grid_models(b, ["X"], step=Fraction(1, 2))]
        if not pts:
            continue
        lo, hi = min(pts), max(pts)
        # the hull is closed and interval-shaped; grid extremes bound it from inside
        assert h.evaluate({"X": lo}) and h.evaluate({"X": hi})


def test_equality_constraints_have_fixed_sign():
    c = LinConstraint.make({"X": -2, "Y": 4}, 6, EQ)
    assert c == lin("X-2*Y=3")


def test_hull_of_two_rays():
    h = hull(conj("X>=0", "Y=0"), conj("X=0", "Y>=0"))
    assert entails_all(h, conj("X>=0", "Y>=0"))


def test_widen_is_stable():
    a = conj("X>=0", "X=<4", "Y=X+1")
    assert equivalent(widen(a, a), a)
