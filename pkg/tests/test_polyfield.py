from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tfcalc.polyfield import (
    Polynomial, RegularGraph, constant_value, depolarize, deriv_tensor, derivative_norm, graph_polynomial,
    harmonic_decompose, laplacian_poly, polarize, random_polynomial, recompose,
)
from tfcalc.curvalg import rictr_wedge
from tfcalc.symalg import Metric, norm2

x = [Polynomial.variable(3, i) for i in range(3)]


def E(n):
    return Polynomial.quadratic_form(Metric.identity(n, exact=True))


def test_polarize_examples():
    x1, x2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    w = polarize(x1 * x2)
    assert w[(0, 1)] == Fraction(1, 2) and w[(0, 0)] == 0
    assert (polarize(E(3)) - Metric.identity(3, exact=True).tensor).is_zero()


@given(st.integers(1, 4), st.integers(0, 5), st.integers(0, 1000))
def test_polarize_roundtrip(n, g, seed):
    P = random_polynomial(n, g, seed)
    assert depolarize(polarize(P)) == P


def test_derivatives():
    F = x[0] * x[1] * x[2]
    assert F.partial((0, 1)) == x[2]
    assert derivative_norm(F, 2) == E(3) * 2
    assert constant_value(deriv_tensor(F, 3)).values.tolist() == [0] * 4 + [1] + [0] * 5
    assert derivative_norm(F, 3).terms == {(0, 0, 0): 6}
    with pytest.raises(ValueError):
        deriv_tensor(F, 4)


def test_laplacian():
    for n in (2, 3, 5):
        assert laplacian_poly(E(n)) == 2 * n
    assert laplacian_poly(x[0] * x[1] * x[2]) == 0
    assert laplacian_poly(E(3) * x[0]) == x[0] * 10


def test_harmonic_decompose_examples():
    assert [(i, q) for i, q in harmonic_decompose(E(3))] == [(1, Polynomial.constant(3, 1))]
    parts = dict(harmonic_decompose(x[0] * x[0]))
    assert parts[0] == x[0] * x[0] - E(3) / 3
    assert parts[1] == Fraction(1, 3)


@given(st.integers(2, 4), st.integers(0, 5), st.integers(0, 1000))
def test_harmonic_decompose_roundtrip(n, g, seed):
    P = random_polynomial(n, g, seed)
    h = Metric.identity(n, exact=True)
    parts = harmonic_decompose(P, h)
    if not parts:
        assert P == 0
        return
    assert recompose(parts, h) == P
    for _, Q in parts:
        assert laplacian_poly(Q, h) == 0


def test_non_homogeneous_rejected():
    with pytest.raises(ValueError):
        polarize(x[0] + x[1] * x[1])


def test_graph_parse_and_blocks():
    G = RegularGraph.parse("# K4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\nsigns: +-+-\n")
    assert G.regularity == 3 and G.num_edges == 6
    assert G.blocks == [(0, 1, 2), (0, 3, 4), (1, 3, 5), (2, 4, 5)]
    assert G.signs == (1, -1, 1, -1)
    for bad in ("1 1\n", "1 2\n1 2\n", "1 2\n2 3\n", "1 2 3\n", "", "1 2\nsigns: +x\n"):
        with pytest.raises(ValueError):
            RegularGraph.parse(bad)


@pytest.mark.parametrize("G", [RegularGraph.complete4(), RegularGraph.petersen()], ids=["k4", "petersen"])
def test_graph_polynomial(G):
    P, w = graph_polynomial(G)
    n, k = P.dim, G.regularity
    h = Metric.identity(n, exact=True)
    assert laplacian_poly(P) == 0
    Q = Polynomial.quadratic_form(h)
    assert derivative_norm(P, k - 1) == Q * 4
    sig = rictr_wedge(w, w, h)
    assert (sig - h.tensor * (Fraction(norm2(w, h)) / n)).is_zero()


def test_graph_k4_values():
    P, w = graph_polynomial(RegularGraph.complete4())
    h = Metric.identity(6, exact=True)
    assert norm2(w, h) == 24
    assert (rictr_wedge(w, w, h) - h.tensor * 4).is_zero()


def test_graph_signs_do_not_matter_for_norm():
    G = RegularGraph(4, RegularGraph.complete4().edges, (1, -1, -1, 1))
    P, w = graph_polynomial(G)
    assert derivative_norm(P, 2) == Polynomial.quadratic_form(Metric.identity(6, exact=True)) * 4


def test_two_regular_fails():
    cycle = RegularGraph.parse("1 2\n2 3\n3 4\n4 1\n")
    with pytest.raises(ValueError):
        graph_polynomial(cycle)
    P, _ = graph_polynomial(cycle, strict=False)
    D1 = derivative_norm(P, 1)
    assert D1 != Polynomial.quadratic_form(Metric.identity(4, exact=True)) * 2


def test_evaluate():
    F = x[0] * x[1] * x[2] + 2
    assert F.evaluate_exact([1, 2, Fraction(1, 2)]) == 3
    assert F([1.0, 2.0, 0.5]) == pytest.approx(3.0)
