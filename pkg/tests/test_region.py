from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqnet.massaction import ModelParams
from seqnet.region import (
    RegionError,
    canonical_rates,
    check_bistability,
    check_mss,
    in_region_set,
    in_region_set_closed,
    sample_region,
)

F = Fraction
odd_n = st.sampled_from([3, 5, 7, 9, 11, 13])


def test_first_example_records():
    p = ModelParams(6, 5)
    chk = check_bistability(p, [2, 1, 6, 7, 1, 5])
    assert chk.all_satisfied
    rec = chk.record("ones-stable")
    assert (rec.lhs, rec.rhs) == (15, 10)
    assert chk.to_dict()["schema"] == "seqnet/1"


def test_second_example_is_alt():
    p = ModelParams(6, 5)
    core = [3, 6, 6, 18, 2, 5]
    assert not check_bistability(p, core).all_satisfied
    assert check_bistability(p, core, alt=True).all_satisfied
    assert check_mss(p, core).all_satisfied


def test_violated_inflow_record():
    p = ModelParams(6, 5)
    chk = check_bistability(p, [2, 1, 6, 5, 1, 5])  # r4 = 5 < m r5 = 6
    assert [r.label for r in chk.failed()][0] == "inflow"


def test_separation_is_a_disequality():
    p = ModelParams(2, 3)
    chk = check_mss(p, [F(1), F(3), F(1), F(1, 2)])
    sep = chk.record("separation")
    assert sep.strictness == "not-equal" and not sep.satisfied


def test_delta_family_has_every_index():
    chk = check_mss(ModelParams(3, 9), canonical_rates(ModelParams(3, 9)))
    assert [r.index for r in chk.records if r.id == "delta"] == list(range(3, 10))


@pytest.mark.parametrize("bad", [[1, 1, 1], [1, 1, 0, 1], [1, -1, 1, 1]])
def test_core_validation(bad):
    with pytest.raises(ValueError):
        check_bistability(ModelParams(2, 3), bad)


def test_region_error_message():
    chk = check_bistability(ModelParams(6, 5), [2, 1, 6, 5, 1, 5])
    err = RegionError(chk)
    assert "inflow" in str(err) and err.check is chk


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 10), odd_n)
def test_canonical_rates_pass(m, n):
    p = ModelParams(m, n)
    assert check_bistability(p, canonical_rates(p)).all_satisfied
    assert check_bistability(p, canonical_rates(p, "alt"), alt=True).all_satisfied
    assert check_mss(p, canonical_rates(p, "mss")).all_satisfied


def test_sampling_always_inside():
    rng = np.random.default_rng(0)
    count = 0
    for m in (2, 3, 6):
        for n in (3, 5, 7, 9, 11):
            p = ModelParams(m, n)
            for _ in range(700):
                assert check_bistability(p, sample_region(p, rng)).all_satisfied
                count += 1
    assert count >= 10_000


def test_sampling_reproducible():
    p = ModelParams(3, 7)
    assert sample_region(p, 5) == sample_region(p, 5)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 5), st.sampled_from([5, 7, 9]), st.data())
def test_triangular_set_equivalence(m, n, data):
    p = ModelParams(m, n)
    core = data.draw(st.lists(st.fractions(F(1, 100), 20, max_denominator=100), min_size=n + 1, max_size=n + 1))
    assert in_region_set(p, core) == check_bistability(p, core).all_satisfied


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.data())
def test_closed_set_n3(m, data):
    p = ModelParams(m, 3)
    core = data.draw(st.lists(st.fractions(F(1, 100), 20, max_denominator=100), min_size=4, max_size=4))
    assert in_region_set_closed(p, core) == check_bistability(p, core).all_satisfied
    # the bare n = 3 description only drops the stability inequality
    if check_bistability(p, core).all_satisfied:
        assert in_region_set(p, core)
