import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tfcalc.symalg import (
    DegenerateProjection, Metric, SymTensor, cartan_product, contract_slot, inner, met, multi_indices,
    multiplicities, norm2, power_of_metric, random_metric, random_tensor, random_tracefree, sym_product,
    symbol_norms, tf, tf_decompose, trace,
)

dims = st.integers(2, 5)
ranks = st.integers(0, 4)
seeds = st.integers(0, 10_000)


def dense_sym(arr):
    k = arr.ndim
    perms = list(itertools.permutations(range(k)))
    return sum(np.transpose(arr, p) for p in perms) / len(perms)


def test_storage_sizes_and_multiplicities():
    for n in range(1, 6):
        for k in range(0, 5):
            assert len(multi_indices(n, k)) == math.comb(n + k - 1, k)
            assert multiplicities(n, k).sum() == n ** k


def test_sym_product_examples():
    h = Metric.identity(2, exact=True)
    hh = sym_product(h.tensor, h.tensor)
    assert hh[(0, 0, 1, 1)] == Fraction(1, 3)
    one = SymTensor.scalar(2, 1)
    b = random_tensor(3, 2, 1, exact=True)
    assert (sym_product(one, b) - b).is_zero()
    dx1 = SymTensor.from_components(2, 1, {(0,): 1})
    dx2 = SymTensor.from_components(2, 1, {(1,): 1})
    assert sym_product(dx1, dx2)[(0, 1)] == Fraction(1, 2)


@given(dims, st.integers(0, 3), st.integers(0, 3), seeds)
def test_sym_product_matches_dense(n, a, b, seed):
    x = random_tensor(a, n, seed)
    y = random_tensor(b, n, seed + 1)
    ref = dense_sym(np.multiply.outer(x.dense(), y.dense()))
    assert np.allclose(sym_product(x, y).dense(), ref, atol=1e-13)


def test_trace_examples():
    for n in (2, 3, 5):
        h = Metric.identity(n, exact=True)
        assert trace(h.tensor, h).scalar_value() == n
        hh = sym_product(h.tensor, h.tensor)
        assert (trace(hh, h) - h.tensor * Fraction(n + 2, 3)).is_zero()
    w = random_tensor(1, 3, 0)
    assert trace(w, Metric.identity(3)).rank == 0 and trace(w, Metric.identity(3)).is_zero()


@given(st.integers(2, 5), st.integers(2, 5), seeds)
def test_met_tr_adjoint(n, k, seed):
    h = random_metric(n, seed)
    a = random_tensor(k, n, seed)
    b = random_tensor(k - 2, n, seed + 7)
    lhs = inner(a, met(b, h), h)
    rhs = inner(trace(a, h), b, h)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_met_examples():
    h = Metric.identity(3, exact=True)
    assert (met(SymTensor.scalar(3, 1), h) - h.tensor).is_zero()
    assert (met(h.tensor, h) - sym_product(h.tensor, h.tensor)).is_zero()
    a, b = random_tensor(4, 3, 3, exact=True), random_tensor(2, 3, 4, exact=True)
    assert inner(a, met(b, h), h) == inner(trace(a, h), b, h)


@given(dims, st.integers(0, 5), seeds, st.booleans())
def test_tf_is_projection(n, k, seed, exact):
    h = random_metric(n, seed, exact=exact)
    w = random_tensor(k, n, seed, exact=exact)
    t, psi = tf_decompose(w, h)
    tol = 0 if exact else 1e-9
    assert trace(t, h).max_abs() <= tol * max(1.0, w.max_abs()) * 10
    assert (tf(t, h) - t).max_abs() <= tol * 10
    if k >= 2:
        assert (t + met(psi, h) - w).max_abs() <= tol * 10
        b = random_tensor(k - 2, n, seed + 3, exact=exact)
        assert tf(met(b, h), h).max_abs() <= tol * 100
        assert abs(inner(t, met(b, h), h)) <= tol * 1000


def test_tf_examples():
    h = Metric.identity(2, exact=True)
    w = SymTensor.from_components(2, 2, {(0, 0): 1})
    assert tf(w, h).values.tolist() == [Fraction(1, 2), 0, Fraction(-1, 2)]
    dx1 = SymTensor.from_components(2, 1, {(0,): 1})
    assert cartan_product(dx1, dx1, h).values.tolist() == [Fraction(1, 2), 0, Fraction(-1, 2)]
    assert cartan_product(h.tensor, tf(random_tensor(2, 2, 1, exact=True), h), h).is_zero()


def test_tf_indefinite_never_degenerate():
    # the recursion coefficients n+2m are positive for n >= 1, signature plays no role
    for n in range(1, 5):
        for neg in range(n + 1):
            h = random_metric(n, 5, exact=True, negative=neg)
            w = random_tensor(4, n, 2, exact=True)
            assert trace(tf(w, h), h).is_zero()


def test_inner_examples():
    for n in (2, 3, 4):
        h = Metric.identity(n, exact=True)
        assert inner(h.tensor, h.tensor, h) == n
        hh = met(h.tensor, h)
        assert inner(hh, hh, h) == Fraction(n * (n + 2), 3)
    dx1 = SymTensor.from_components(3, 1, {(0,): 1})
    assert norm2(dx1, Metric.identity(3, exact=True)) == 1


def test_cartan_associative():
    h = Metric.identity(3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b, c = (random_tracefree(int(rng.integers(0, 3)), 3, int(rng.integers(1 << 30)), h) for _ in range(3))
        left = cartan_product(cartan_product(a, b, h), c, h)
        right = cartan_product(a, cartan_product(b, c, h), h)
        assert (left - right).max_abs() < 1e-12


def test_random_tracefree_determinism():
    h = Metric.identity(4)
    a, b = random_tracefree(3, 4, 1, h), random_tracefree(3, 4, 1, h)
    assert np.array_equal(a.values, b.values)
    assert not np.allclose(a.values, random_tracefree(3, 4, 2, h).values)
    assert trace(a, h).max_abs() < 1e-12


def test_power_of_metric_is_pure_trace():
    h = random_metric(4, 3, exact=True)
    for k in range(1, 4):
        assert tf(power_of_metric(h, k), h).is_zero()


def test_contract_slot_dense():
    w = random_tensor(3, 4, 0)
    v = np.arange(4.0)
    assert np.allclose(contract_slot(w, v).dense(), np.tensordot(v, w.dense(), axes=(0, 0)))


@given(st.integers(2, 5), st.integers(1, 4), seeds)
def test_symbol_norm_closed_forms(n, k, seed):
    h = random_metric(n, seed)
    phi = random_tracefree(k, n, seed, h)
    Z = np.random.default_rng(seed).normal(size=n)
    s = symbol_norms(Z, phi, h)
    scale = max(1.0, abs(s["L"]) + abs(s["K"]) + abs(s["div"]))
    assert abs(s["L"] - s["closed_L"]) <= 1e-9 * scale
    if not s["limiting_case"]:
        assert abs(s["K"] - s["closed_K"]) <= 1e-9 * scale


def test_symbol_examples():
    n = 4
    h = Metric.identity(n)
    Z = np.eye(n)[0]
    s = symbol_norms(Z, SymTensor(n, 1, Z.copy()), h)
    assert s["L"] == pytest.approx((n - 1) / n)
    phi = tf(SymTensor.from_components(n, 2, {(1, 2): 1.0}), h)
    s = symbol_norms(Z, phi, h)
    assert s["div"] == pytest.approx(0.0)
    assert s["K"] == pytest.approx(norm2(phi, h) / 2)


def test_symbol_limiting_flag():
    h = Metric.identity(2)
    assert symbol_norms(np.array([1.0, 0.0]), SymTensor(2, 1, np.array([0.3, 0.7])), h)["limiting_case"]


def test_degenerate_projection_type():
    assert issubclass(DegenerateProjection, ValueError)
