import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import example_witness
from seqnet.massaction import ModelParams
from seqnet.network import parse_network
from seqnet.sim import basin_probe, dopri5, integrate, is_stiff, relaxation_time


def test_dopri5_exponential():
    tr = dopri5(lambda x: -x, np.array([1.0]), 5.0, 1e-10, 1e-12, (), 1e-8)
    assert abs(tr.final[0] - np.exp(-5.0)) < 1e-9
    assert tr.terminal == "max-time"


def test_dopri5_logistic_accuracy():
    f = lambda x: x * (1 - x)
    exact = 0.1 * np.exp(3.0) / (1 - 0.1 + 0.1 * np.exp(3.0))
    errs = []
    for tol in (1e-5, 1e-10):
        tr = dopri5(f, np.array([0.1]), 3.0, tol, tol * 1e-2, (), 1e-8)
        errs.append(abs(tr.final[0] - exact))
    assert errs[1] < errs[0] and errs[1] < 1e-8


def _first():
    w = example_witness("ones")
    return w.params, [float(v) for v in w.r], [s.x for s in w.states]


def test_converges_to_all_ones():
    p, r, targets = _first()
    tr = integrate(p, r, [1.01, 1, 1, 1, 1], targets=targets)
    assert tr.terminal == "converged" and tr.target == 0


@pytest.mark.parametrize("method", ["dopri5", "stiff"])
def test_methods_agree(method):
    p, r, _ = _first()
    tr = integrate(p, r, [1.2, 0.9, 1.1, 1, 1], t_max=5.0, method=method)
    ref = integrate(p, r, [1.2, 0.9, 1.1, 1, 1], t_max=5.0, method="dopri5", rtol=1e-11, atol=1e-13)
    assert np.max(np.abs(tr.final - ref.final) / (1 + np.abs(ref.final))) < 1e-6


def test_tolerance_halving_changes_little():
    p, r, _ = _first()
    a = integrate(p, r, [1.5, 0.5, 2, 0.5, 3], t_max=20.0, method="dopri5")
    b = integrate(p, r, [1.5, 0.5, 2, 0.5, 3], t_max=20.0, method="dopri5", rtol=5e-9, atol=5e-11)
    assert np.max(np.abs(a.final - b.final) / (1 + np.abs(b.final))) < 10 * 1e-8


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(1e-3, 100.0), min_size=5, max_size=5))
def test_positivity(x0):
    p, r, _ = _first()
    tr = integrate(p, r, x0, t_max=50.0)
    assert all(np.all(x > 0) for x in tr.states)


def test_zero_horizon_single_row():
    p, r, _ = _first()
    tr = integrate(p, r, [1.01, 1, 1, 1, 1], t_max=0.0)
    assert len(tr.times) == 1
    assert tr.to_csv().splitlines() == ["t,x1,x2,x3,x4,x5", "0.0,1.01,1.0,1.0,1.0,1.0"]


def test_rejects_nonpositive_start():
    p, r, _ = _first()
    with pytest.raises(ValueError):
        integrate(p, r, [-1, 1, 1, 1, 1])


def test_generic_network():
    net = parse_network("X1 -> X2 ; r1\nX2 -> X1 ; r2")
    tr = integrate(net, [1.0, 2.0], [1.0, 0.5], t_max=30.0)
    np.testing.assert_allclose(tr.final, [1.0, 0.5], atol=1e-6)


def test_stiffness_detection():
    assert is_stiff(np.diag([-1.0, -1e5]))
    assert not is_stiff(np.diag([-1.0, -2.0]))


def test_basin_probe_counts():
    p, r, targets = _first()
    counts = basin_probe(p, r, targets, samples=8, seed=3)
    assert [c.target for c in counts] == [0, 1, 2]
    assert counts[0].fraction == 1.0 and counts[2].fraction == 1.0
    assert counts[1].fraction < 1.0
    assert counts[1].returned + sum(counts[1].other.values()) + counts[1].unresolved + counts[1].left_domain == 8


def test_relaxation_time():
    p, r, targets = _first()
    tau = relaxation_time(p, r, targets[2])
    assert 1 / 0.0025 < tau < 1 / 0.0015
