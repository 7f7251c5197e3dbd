import json
import math
import random

import pytest

from akl.certificates import holonomy_cases
from akl.family import FamilyParams, KillingField, Regime
from akl.group import GroupElement, commutes, flow, inverse
from akl.holonomy import (
    COMMUTING,
    NOT_COMMUTING,
    OBSTRUCTED_NEG,
    OBSTRUCTED_Y,
    check_verdict,
    classify_holonomy,
    commutator_residual,
    degeneracy_curve,
    invariance_residual,
)

POS = FamilyParams(3, 2, 0, 1)
RP = Regime.of(POS)
A1, A2 = RP.float_roots


def same_field(f, g, tol=1e-9):
    return max(abs(f.sigma - g.sigma), abs(f.tau - g.tau), abs(f.w[0] - g.w[0]), abs(f.w[1] - g.w[1])) < tol


def test_identity_pair_is_in_h():
    e = GroupElement.identity(RP)
    v = classify_holonomy(POS, e, e)
    assert (v.outcome, v.branch) == (COMMUTING, "both-in-H")
    assert [f.expr() for f in v.fields] == ["(x)*d/dx + (0)*d/dy", "(0)*d/dx + (1)*d/dy"]


def test_not_commuting():
    g1 = GroupElement((0, 1), (0, 0), RP)
    g2 = GroupElement((0, 0), (0, 1), RP)
    v = classify_holonomy(POS, g1, g2)
    assert v.outcome == NOT_COMMUTING and v.fields == ()


def test_delta_zero_example():
    p = FamilyParams(0, 0, 0, 1)
    r = Regime.of(p)
    g1, g2 = GroupElement((0, 1), (0, 1), r), GroupElement((0, 2), (0, 2), r)
    assert commutes(g1, g2)
    v = classify_holonomy(p, g1, g2)
    assert v.branch == "delta=0" and v.c == 1.0
    assert [f.expr() for f in v.fields] == ["(1)*d/dx + (0)*d/dy", "(y)*d/dx + (1)*d/dy"]
    assert check_verdict(p, v, g1, g2)["passed"]


def test_delta_positive_subcase_two_recovers_generating_fields():
    W1 = KillingField(A1, 1.0, (0.0, 0.0), RP)
    W2 = KillingField(A2, 1.0, (1.0, 0.0), RP)
    g1, g2 = flow(W1, 1.0), flow(W2, 1.0)
    v = classify_holonomy(POS, g1, g2)
    assert v.branch == "delta>0 subcase 2"
    assert v.c == pytest.approx(1.0, abs=1e-12)
    assert same_field(v.fields[0], W1) and same_field(v.fields[1], W2)
    # dependence locus: det [[-x, 1], [-2x + e^{-y}, 1]] = x - e^{-y}, i.e. (a1 - a2) x = c e^{a1 y}
    curve = v.degeneracy
    assert curve is not None
    for y in (-1.0, 0.0, 0.5):
        assert curve.x_of_y(y) == pytest.approx(math.exp(-y), rel=1e-12)
        x = curve.x_of_y(y)
        a, b = W1.value(x, y), W2.value(x, y)
        assert abs(a[0] * b[1] - a[1] * b[0]) < 1e-12


def test_delta_positive_subcase_one():
    W1 = KillingField(A1, 1.0, (0.0, 0.0), RP)
    Z1 = KillingField(0.0, 0.0, (1.0, 0.0), RP)
    v = classify_holonomy(POS, flow(W1, 1.0), flow(Z1, 0.5))
    assert v.branch == "delta>0 subcase 1" and v.degeneracy is None


def test_delta_positive_swapped_roots():
    # generator on the a2 root line: s = a2 t
    W = KillingField(A2, 1.0, (0.0, 0.0), RP)
    Z2 = KillingField(0.0, 0.0, (0.0, 1.0), RP)
    g1, g2 = flow(W, 1.0), flow(Z2, 0.3)
    v = classify_holonomy(POS, g1, g2)
    assert v.swapped_roots and v.branch == "delta>0 subcase 1"
    assert check_verdict(POS, v, g1, g2)["passed"]
    assert same_field(v.fields[0], W)


def test_swapped_generators():
    W1 = KillingField(A1, 1.0, (0.0, 0.0), RP)
    Z1 = KillingField(0.0, 0.0, (1.0, 0.0), RP)
    v = classify_holonomy(POS, flow(Z1, 0.5), flow(W1, 1.0))
    assert v.swapped_generators and v.branch == "delta>0 subcase 1"


def test_conjugated_input_maps_back():
    # conjugate a subcase-2 pair by (0, q): the verdict fields are the pushed-forward ones
    W1 = KillingField(A1, 1.0, (0.0, 0.0), RP)
    W2 = KillingField(A2, 1.0, (1.0, 0.0), RP)
    k = GroupElement((0, 0), (0.7, -0.4), RP)
    g1 = k * flow(W1, 1.0) * inverse(k)
    g2 = k * flow(W2, 1.0) * inverse(k)
    v = classify_holonomy(POS, g1, g2)
    assert v.branch == "delta>0 subcase 2"
    chk = check_verdict(POS, v, g1, g2)
    assert chk["passed"] and chk["invariance"] < 1e-8


def test_obstructions():
    rp = RP
    v = classify_holonomy(POS, GroupElement((0, 0), (1, 0), rp), GroupElement((0, 0), (0, 1), rp))
    assert v.outcome == OBSTRUCTED_Y and v.branch == "I_F0"
    p = FamilyParams(0, 1, 0, 1)
    rn = Regime.of(p)
    v = classify_holonomy(p, GroupElement((0, 2 * math.pi), (1, 0), rn), GroupElement((0, 4 * math.pi), (0, 1), rn))
    assert v.outcome == OBSTRUCTED_NEG
    assert any("m = [1, 2]" in n for n in v.notes) and any("finite cover" in n for n in v.notes)


@pytest.mark.parametrize("branch, p, g1, g2", holonomy_cases(), ids=[c[0] for c in holonomy_cases()])
def test_every_branch_reached_and_certified(branch, p, g1, g2):
    v = classify_holonomy(p, g1, g2)
    assert v.branch == branch
    if v.outcome == COMMUTING:
        chk = check_verdict(p, v, g1, g2)
        assert chk["flow_residual"] < 1e-5 and chk["commutator"] < 1e-8 and chk["invariance"] < 1e-8
    json.dumps(v.to_json())


def test_random_commuting_pairs_are_certified():
    rng = random.Random(0)
    for p in (POS, FamilyParams(2, 1, 0, 1), FamilyParams(1, -2, 1, 1)):
        r = Regime.of(p)
        for _ in range(5):
            f = KillingField(rng.uniform(-1, 1), rng.uniform(0.5, 1.5), (rng.uniform(-1, 1), rng.uniform(-1, 1)), r)
            g1, g2 = flow(f, 0.8), flow(f, -1.7)
            v = classify_holonomy(p, g1, g2)
            assert v.outcome == COMMUTING
            assert check_verdict(p, v, g1, g2)["passed"]


def test_degeneracy_curve_independent_everywhere():
    # d/dx and y d/dx + d/dy never become dependent
    r = Regime.of(FamilyParams(0, 0, 0, 1))
    assert degeneracy_curve(KillingField(0, 0, (1, 0), r), KillingField(0, 1, (0, 1), r)) is None
    # X and Y degenerate on x = 0
    c = degeneracy_curve(KillingField(1, 0, (0, 0), RP), KillingField(0, 1, (0, 0), RP))
    assert c is not None and c(0.0, 0.3) == 0 and c(1.0, 0.3) != 0
    assert str(c) == "1*x = 0"


def test_residual_helpers():
    X = KillingField(1.0, 0.0, (0.0, 0.0), RP)
    Z1 = KillingField(0.0, 0.0, (1.0, 0.0), RP)
    assert commutator_residual(X, Z1) > 0.1
    assert invariance_residual(GroupElement((0.5, 0), (0, 0), RP), Z1) > 0.1
    assert invariance_residual(GroupElement((0, 0), (0.5, 0.2), RP), Z1) < 1e-14
