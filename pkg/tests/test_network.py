import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqnet.network import (
    NetworkError,
    NetworkSyntaxError,
    build_sequestration,
    exact_rank,
    format_network,
    fully_open_extension,
    network_to_dict,
    parse_network,
    same_structure,
    sequestration_extension,
    stoichiometric_matrix,
)


def test_k23_reactions():
    net = build_sequestration(2, 3)
    lines = [ln for ln in format_network(net).splitlines() if not ln.startswith("#")]
    assert lines == ["X1 + X2 -> 0 ; r1", "X2 + X3 -> 0 ; r2", "X1 -> 2 X3 ; r3"]


@pytest.mark.parametrize("m,n", [(2, 3), (6, 5), (1, 2), (3, 7)])
def test_extension_counts_and_labels(m, n):
    net = sequestration_extension(m, n)
    assert net.n_species == n and net.n_reactions == 3 * n
    assert [r.rate_index for r in net.reactions] == list(range(1, 3 * n + 1))
    # outflows then inflows
    for i in range(1, n + 1):
        assert net.reactions[n + i - 1].reactants == {i: 1} and not net.reactions[n + i - 1].products
        assert net.reactions[2 * n + i - 1].products == {i: 1} and not net.reactions[2 * n + i - 1].reactants


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(2, 13), st.booleans())
def test_format_parse_round_trip(m, n, extended):
    net = build_sequestration(m, n)
    if extended:
        net = fully_open_extension(net)
    assert same_structure(parse_network(format_network(net)), net)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(2, 13))
def test_stoichiometric_rank(m, n):
    S = stoichiometric_matrix(sequestration_extension(m, n))
    assert S.shape == (n, 3 * n)
    assert exact_rank(S) == n


def test_stoichiometric_columns():
    S = stoichiometric_matrix(sequestration_extension(3, 3))
    np.testing.assert_array_equal(S[:, 0], [-1, -1, 0])
    np.testing.assert_array_equal(S[:, 2], [-1, 0, 3])


@pytest.mark.parametrize(
    "text",
    [
        "X1 + X2 -> 0",  # no label
        "X1 -> ; r1",  # empty side
        "X1 -> X2 -> X1 ; r1",
        "X1 -> Y ; r1",
        "X1 -> 0 ; r1\nX2 -> 0 ; r1",
        "X1 -> 0 ; q1",
    ],
)
def test_parse_errors(text):
    with pytest.raises(NetworkSyntaxError):
        parse_network(text)


def test_parse_label_gap():
    with pytest.raises(NetworkError):
        parse_network("X1 -> 0 ; r1\nX2 -> 0 ; r3")


def test_parse_custom_species_and_coefficients():
    net = parse_network("2 A + B -> 3 C ; r2\nC -> 0 ; r1", species=["A", "B", "C"])
    assert net.reactions[0].rate_index == 1
    assert net.reactions[1].reactants == {1: 2, 2: 1}
    assert net.reactions[1].products == {3: 3}


@pytest.mark.parametrize("m,n", [(0, 3), (2, 1), (1.5, 3)])
def test_bad_family(m, n):
    with pytest.raises(NetworkError):
        build_sequestration(m, n)


def test_double_extension_rejected():
    with pytest.raises(NetworkError):
        fully_open_extension(sequestration_extension(2, 3))


def test_json_shape():
    d = network_to_dict(sequestration_extension(6, 5))
    assert d["schema"] == "seqnet/1" and len(d["reactions"]) == 15
    assert d["reactions"][4] == {"rate": "r5", "reactants": {"X1": 1}, "products": {"X5": 6}}
