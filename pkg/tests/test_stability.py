from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqnet.eigen import eigenvalues
from seqnet.massaction import ModelParams, eps_slots, sequestration_jacobian
from seqnet.stability import (
    ScalingMatrix,
    StabilityReport,
    balanced_columns,
    classify,
    classify_state,
    column_slack,
    dominance_verdict,
    gershgorin_discs,
    in_disc_union,
    is_diagonally_dominant,
    scaling_all_ones,
    scaling_boundary,
    scaling_comparison,
    try_certificate,
)

F = Fraction
fracs = st.fractions(min_value=F(1, 10), max_value=10, max_denominator=30)


def test_disc_values():
    A = np.array([[-4.0, 1.0, -2.0], [0.5, -3.0, 0.0], [1.0, 1.0, -5.0]])
    rows = gershgorin_discs(A, "row")
    cols = gershgorin_discs(A, "column")
    assert [d.radius for d in rows] == [3.0, 0.5, 2.0]
    assert [d.radius for d in cols] == [1.5, 2.0, 2.0]
    assert all(in_disc_union(z, rows) and in_disc_union(z, cols) for z in eigenvalues(A))
    with pytest.raises(ValueError):
        gershgorin_discs(A, "diag")


def test_exact_dominance_ties_count():
    A = np.array([[F(-2), F(2)], [F(1), F(-1)]], dtype=object)
    ok, margin = is_diagonally_dominant(A, "row")
    assert ok and margin == 0 and isinstance(margin, Fraction)
    assert not is_diagonally_dominant(A, "column")[0]


def test_dominance_verdict():
    assert dominance_verdict(np.array([[-3.0, 1.0], [1.0, -3.0]])) == "negative-real-parts"
    assert dominance_verdict(np.array([[3.0, 0.0], [0.0, -3.0]])) == "inconclusive"
    assert dominance_verdict(np.array([[-1.0, 5.0], [5.0, -1.0]])) == "inconclusive"


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(2, 6), st.data())
def test_scalings_preserve_spectrum(n, m, data):
    p = ModelParams(m, n)
    r = data.draw(st.lists(fracs, min_size=2 * n, max_size=2 * n))
    x = data.draw(st.lists(fracs, min_size=n, max_size=n))
    J = sequestration_jacobian(p, r, x)
    Jf = J.astype(float)
    ref = np.sort_complex(np.linalg.eigvals(Jf))
    for sc in (scaling_all_ones(p, r, x), scaling_boundary(p, r, x)):
        S = sc.apply(J).astype(float)
        got = np.sort_complex(np.linalg.eigvals(S))
        assert np.max(np.abs(got - ref)) <= 1e-8 * max(1.0, np.max(np.abs(ref)))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5, 7, 9]), st.integers(2, 6), st.data())
def test_scaling_equalities_exact(n, m, data):
    p = ModelParams(m, n)
    r = data.draw(st.lists(fracs, min_size=2 * n, max_size=2 * n))
    x = data.draw(st.lists(fracs, min_size=n, max_size=n))
    # the boundary equalities hold with epsilon present
    sc = scaling_boundary(p, r, x)
    slack = column_slack(sc.apply(sequestration_jacobian(p, r, x)))
    assert all(slack[j - 1] == 0 for j in balanced_columns(p, sc))
    # the all-ones equalities need the epsilon slots at zero
    for j in eps_slots(n):
        r[j - 1] = F(0)
    sc = scaling_all_ones(p, r, x)
    slack = column_slack(sc.apply(sequestration_jacobian(p, r, x)))
    assert all(slack[j - 1] == 0 for j in balanced_columns(p, sc))
    assert balanced_columns(p, sc) == list(range(2, n + 1))


def test_comparison_scaling():
    A = np.array([[-1.0, 3.0], [0.1, -1.0]])
    sc = scaling_comparison(A)
    assert sc is not None and sc.name == "comparison"
    assert try_certificate(A, sc) is not None
    assert try_certificate(A, ScalingMatrix((F(1), F(1)))) is None
    # not an H-matrix
    assert scaling_comparison(np.array([[-1.0, 2.0], [2.0, -1.0]])) is None


def test_scaling_rejects_nonpositive():
    with pytest.raises(ValueError):
        ScalingMatrix((1, 0))


def test_classify_verdicts():
    assert classify(np.array([[-2.0, 1.0], [1.0, -2.0]])).verdict == "certified-stable"
    # stable but not dominant under any scaling tried
    rot = np.array([[-0.1, 10.0], [-10.0, -0.1]])
    assert classify(rot).verdict == "eigen-stable"
    assert classify(np.array([[1.0, 0.0], [0.0, -1.0]])).verdict == "unstable"
    assert classify(np.array([[-1.0, 1.0], [1.0, -1.0]])).verdict == "degenerate"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_certified_implies_eigen_stable(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A -= np.diag(rng.uniform(0, 3 * n, n))
    rep = classify(A)
    if rep.verdict == "certified-stable":
        assert max(np.linalg.eigvals(A).real) < 0
    if rep.verdict == "unstable":
        assert max(np.linalg.eigvals(A).real) > 0


def test_first_example_verdicts():
    p = ModelParams(6, 5)
    from seqnet.steady import full_rates, three_states

    core = [F(v) for v in (2, 1, 6, 7, 1, 5)]
    r = full_rates(p, core, F(6, 1000))
    states = three_states(p, core, 0.006)
    reps = [classify_state(p, r, s.x) for s in states]
    assert [q.verdict for q in reps] == ["certified-stable", "unstable", "certified-stable"]
    assert reps[0].scaling.name == "all-ones" and reps[0].exact_certificate
    # the closed-form boundary scaling is not dominant at this epsilon; the
    # comparison-matrix scaling is
    assert reps[2].scaling.name == "comparison"


def test_report_round_trip():
    rep = classify(np.array([[-2.0, 1.0], [1.0, -2.0]]))
    d = rep.to_dict()
    back = StabilityReport.from_dict(d)
    assert back.to_dict() == d and d["schema"] == "seqnet/1"
