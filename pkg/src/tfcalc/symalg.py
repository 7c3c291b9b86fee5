"""
Symmetric tensors stored on nondecreasing multi-indices.

Components live in a flat array aligned with ``multi_indices(n, k)``; the
dtype is float64 for numerical work or object (Fractions, polynomials) for
exact work. Contractions go through gather tables that map merged or split
multi-indices back to their sorted positions, so ordered-tuple sums are
recovered with multinomial weights and nothing is expanded to n**k unless
``dense()`` is asked for.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np


class DegenerateProjection(ValueError):
    pass


# ---------------------------------------------------------------------------
# index tables

@lru_cache(maxsize=None)
def multi_indices(n, k):
    rows = list(itertools.combinations_with_replacement(range(n), k))
    idx = np.array(rows, dtype=np.intp).reshape(len(rows), k)
    idx.flags.writeable = False
    return idx


@lru_cache(maxsize=None)
def _keys(n, k):
    return multi_indices(n, k) @ (n ** np.arange(k - 1, -1, -1, dtype=np.int64))


def rank_of(n, idx):
    """Positions of sorted multi-indices (last axis) in the canonical basis."""
    idx = np.asarray(idx, dtype=np.intp)
    k = idx.shape[-1]
    key = idx @ (n ** np.arange(k - 1, -1, -1, dtype=np.int64))
    return np.searchsorted(_keys(n, k), key)


@lru_cache(maxsize=None)
def multiplicities(n, k):
    """Number of ordered tuples represented by each sorted multi-index."""
    out = np.empty(len(multi_indices(n, k)), dtype=np.int64)
    fk = math.factorial(k)
    for r, row in enumerate(multi_indices(n, k)):
        c = fk
        for v in np.bincount(row, minlength=1):
            c //= math.factorial(int(v))
        out[r] = c
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def join_table(n, a, b):
    """rank(sort(I + J)) for I in basis(n, a), J in basis(n, b); shape (C_a, C_b)."""
    A, B = multi_indices(n, a), multi_indices(n, b)
    merged = np.concatenate(
        [np.broadcast_to(A[:, None, :], (len(A), len(B), a)),
         np.broadcast_to(B[None, :, :], (len(A), len(B), b))], axis=2)
    out = rank_of(n, np.sort(merged, axis=2))
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def split_table(n, k, m):
    """For sorted I and each m-subset S of positions: (rank(I_S), rank(I_{S^c}))."""
    I = multi_indices(n, k)
    subsets = list(itertools.combinations(range(k), m))
    left = np.empty((len(I), len(subsets)), dtype=np.intp)
    right = np.empty_like(left)
    for s, S in enumerate(subsets):
        Sc = [p for p in range(k) if p not in S]
        left[:, s] = rank_of(n, I[:, list(S)])
        right[:, s] = rank_of(n, I[:, Sc])
    left.flags.writeable = False
    right.flags.writeable = False
    return left, right


@lru_cache(maxsize=None)
def _expand_table(n, k):
    """Position in the compressed basis of every ordered tuple, shape (n,)*k."""
    grid = np.indices((n,) * k).reshape(k, -1).T
    return rank_of(n, np.sort(grid, axis=1)).reshape((n,) * k)


@lru_cache(maxsize=None)
def _perm_gather(n, k):
    """Flat dense offsets of all k! rearrangements of each sorted multi-index."""
    I = multi_indices(n, k)
    strides = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
    perms = np.array(list(itertools.permutations(range(k))), dtype=np.intp).reshape(-1, k)
    return (I[:, perms] @ strides)


# ---------------------------------------------------------------------------
# scalars

def is_exact(values):
    return getattr(values, "dtype", None) == object


def coef(p, q=1, exact=False):
    if exact:
        return Fraction(p) / Fraction(q)
    return float(p) / float(q)


def _mean(x, axis, exact):
    cnt = x.shape[axis]
    if exact:
        return x.sum(axis=axis) * Fraction(1, cnt)
    return x.mean(axis=axis)


def _to_object(a):
    a = np.asarray(a)
    if a.dtype == object:
        return a
    out = np.empty(a.shape, dtype=object)
    out.flat[:] = [Fraction(v) if isinstance(v, (int, np.integer)) else Fraction(v).limit_denominator(10**12)
                   if isinstance(v, float) else v for v in a.flat]
    return out


def exact_array(a):
    """Object array of Fractions; floats are rejected to avoid silent rounding."""
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for pos, v in np.ndenumerate(a):
        if isinstance(v, float):
            raise TypeError("exact arrays need ints, Fractions or strings, got float")
        out[pos] = Fraction(v) if isinstance(v, (int, np.integer, str)) else v
    return out


def exact_inverse(M):
    n = M.shape[0]
    A = [[Fraction(M[i, j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [v * inv for v in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = A[i][n + j]
    return out


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True, eq=False)
class Metric:
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix if is_exact(self.matrix) else np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("metric must be a square matrix")
        if is_exact(m):
            if any(m[i, j] != m[j, i] for i in range(len(m)) for j in range(i)):
                raise ValueError("metric must be symmetric")
        elif not np.allclose(m, m.T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())):
            raise ValueError("metric must be symmetric")
        object.__setattr__(self, "matrix", m)
        self.inverse  # nondegeneracy check

    @classmethod
    def identity(cls, n, exact=False):
        if exact:
            return cls(exact_array(np.eye(n, dtype=int)))
        return cls(np.eye(n))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def exact(self):
        return is_exact(self.matrix)

    @cached_property
    def inverse(self):
        if self.exact:
            return exact_inverse(self.matrix)
        if abs(np.linalg.det(self.matrix)) < 1e-300:
            raise ValueError("degenerate metric")
        inv = np.linalg.inv(self.matrix)
        return (inv + inv.T) / 2

    @cached_property
    def signature(self):
        ev = np.linalg.eigvalsh(np.asarray(self.matrix, dtype=float))
        return int((ev > 0).sum()), int((ev < 0).sum())

    @property
    def riemannian(self):
        return self.signature[1] == 0

    @cached_property
    def is_diagonal(self):
        m = self.matrix
        return all(m[i, j] == 0 for i in range(self.dim) for j in range(self.dim) if i != j)

    @cached_property
    def tensor(self):
        return SymTensor.from_dense(self.matrix)

    def as_float(self):
        return Metric(np.asarray(self.matrix, dtype=float))


@dataclass(frozen=True, eq=False)
class SymTensor:
    dim: int
    rank: int
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if not isinstance(v, np.ndarray) or (v.dtype != object and v.dtype != np.float64):
            v = np.asarray(v, dtype=object if is_exact(np.asarray(v)) else float)
        if v.shape != (len(multi_indices(self.dim, self.rank)),):
            raise ValueError(f"expected {len(multi_indices(self.dim, self.rank))} components, got {v.shape}")
        object.__setattr__(self, "values", v)

    # construction
    @classmethod
    def zeros(cls, n, k, exact=False):
        size = len(multi_indices(n, k))
        if exact:
            return cls(n, k, exact_array(np.zeros(size, dtype=int)))
        return cls(n, k, np.zeros(size))

    @classmethod
    def scalar(cls, n, value):
        arr = np.empty(1, dtype=object) if not isinstance(value, (float, np.floating)) else np.empty(1)
        arr[0] = Fraction(value) if isinstance(value, int) else value
        return cls(n, 0, arr)

    @classmethod
    def from_components(cls, n, k, comps, exact=None):
        """Build from a mapping multi-index -> value (unsorted keys allowed, last write wins)."""
        if exact is None:
            exact = not any(isinstance(v, float) for v in comps.values())
        t = cls.zeros(n, k, exact)
        vals = t.values.copy()
        for idx, v in comps.items():
            idx = tuple(sorted(idx))
            if len(idx) != k or (k and (min(idx) < 0 or max(idx) >= n)):
                raise ValueError(f"bad index {idx}")
            vals[int(rank_of(n, idx))] = Fraction(v) if exact and not isinstance(v, Fraction) else v
        return cls(n, k, vals)

    @classmethod
    def from_dense(cls, arr):
        """Read off components of an already symmetric array (no averaging)."""
        arr = np.asarray(arr) if not is_exact(arr) else arr
        k = arr.ndim
        n = arr.shape[0] if k else 1
        if k == 0:
            return cls(n, 0, arr.reshape(1))
        I = multi_indices(n, k)
        vals = arr[tuple(I.T)]
        if not is_exact(vals):
            vals = vals.astype(float)
        return cls(n, k, vals)

    @classmethod
    def symmetrize(cls, arr, n=None):
        """Symmetric part of an arbitrary dense array."""
        k = arr.ndim
        if k == 0:
            return cls(n or 1, 0, np.asarray(arr).reshape(1))
        n = arr.shape[0]
        g = np.asarray(arr).reshape(-1)[_perm_gather(n, k)]
        return cls(n, k, _mean(g, 1, is_exact(g)))

    # access
    @property
    def exact(self):
        return is_exact(self.values)

    def __getitem__(self, idx):
        if isinstance(idx, (int, np.integer)):
            idx = (idx,)
        idx = tuple(sorted(idx))
        if len(idx) != self.rank:
            raise IndexError("wrong number of indices")
        if self.rank == 0:
            return self.values[0]
        return self.values[int(rank_of(self.dim, idx))]

    def components(self):
        return {tuple(int(i) for i in idx): v for idx, v in zip(multi_indices(self.dim, self.rank), self.values)}

    def dense(self):
        if self.rank == 0:
            return self.values.reshape(())
        return self.values[_expand_table(self.dim, self.rank)]

    def scalar_value(self):
        if self.rank != 0:
            raise ValueError("not a scalar")
        return self.values[0]

    def as_float(self):
        return SymTensor(self.dim, self.rank, np.asarray([float(v) for v in self.values], dtype=float))

    # arithmetic
    def _check(self, other):
        if not isinstance(other, SymTensor) or other.dim != self.dim or other.rank != self.rank:
            raise ValueError("dimension or rank mismatch")

    def __add__(self, other):
        self._check(other)
        return SymTensor(self.dim, self.rank, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return SymTensor(self.dim, self.rank, self.values - other.values)

    def __neg__(self):
        return SymTensor(self.dim, self.rank, -self.values)

    def __mul__(self, c):
        if isinstance(c, SymTensor):
            return NotImplemented
        return SymTensor(self.dim, self.rank, self.values * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        if self.exact and isinstance(c, int):
            c = Fraction(c)
        return SymTensor(self.dim, self.rank, self.values / c)

    def max_abs(self):
        return float(max((abs(float(v)) for v in self.values), default=0.0))

    def is_zero(self):
        if self.exact:
            return all(v == 0 for v in self.values)
        return not np.any(self.values)

    def __repr__(self):
        return f"SymTensor(dim={self.dim}, rank={self.rank}, nnz={sum(1 for v in self.values if v != 0)})"


# ---------------------------------------------------------------------------
# products and contractions

def _same_dim(*ts):
    ns = {t.dim for t in ts if isinstance(t, SymTensor)} | {t.dim for t in ts if isinstance(t, Metric)}
    if len(ns) > 1:
        raise ValueError("dimension mismatch")


def sym_product(a, b):
    _same_dim(a, b)
    n, k, l = a.dim, a.rank, b.rank
    exact = a.exact or b.exact
    if k == 0:
        return SymTensor(n, l, b.values * a.values[0])
    if l == 0:
        return SymTensor(n, k, a.values * b.values[0])
    left, right = split_table(n, k + l, k)
    outer = np.multiply.outer(a.values, b.values)
    return SymTensor(n, k + l, _mean(outer[left, right], 1, exact))


def _pair_weights(h_inv, n):
    """h^{pq} on sorted pairs times the multiplicity (1 or 2)."""
    P = multi_indices(n, 2)
    return h_inv[P[:, 0], P[:, 1]] * multiplicities(n, 2)


def trace(w, h):
    _same_dim(w, h)
    n, k = w.dim, w.rank
    if k < 2:
        return SymTensor.zeros(n, 0, w.exact)
    slab = w.values[join_table(n, k - 2, 2)]
    return SymTensor(n, k - 2, slab @ _pair_weights(h.inverse, n))


def met(w, h):
    _same_dim(w, h)
    return sym_product(h.tensor, w)


def raise_values(vals, n, k, h):
    """Raise every index of a batch of compressed rank-k tensors (rows of vals)."""
    vals = np.asarray(vals) if not is_exact(vals) else vals
    batch = vals.reshape(-1, vals.shape[-1])
    A = h.inverse
    if k == 0:
        return vals
    if h.is_diagonal:
        d = np.array([A[i, i] for i in range(n)], dtype=object if h.exact else float)
        fac = np.prod(d[multi_indices(n, k)], axis=1)
        return vals * fac
    # U_m[b, J, I']: first m slots fixed at J, the remaining k-m slots transformed
    U = batch.reshape(batch.shape[0], -1, 1)
    for m in range(k - 1, -1, -1):
        J1 = join_table(n, m, 1)
        rest_basis = multi_indices(n, k - m)
        first = rest_basis[:, 0]
        rest = rank_of(n, rest_basis[:, 1:])
        Z = U[:, J1[:, :, None], rest[None, None, :]]
        U = (Z * A[first].T[None, None, :, :]).sum(axis=2)
    return U.reshape(vals.shape)


def raise_all(w, h):
    """Components of w with every index raised by h (still a symmetric array)."""
    return SymTensor(w.dim, w.rank, raise_values(w.values, w.dim, w.rank, h))


def raised_slices(w, m, h):
    """S[J, P] = w_{J}^{P}: first m indices kept down, the remaining block raised."""
    n, k = w.dim, w.rank
    S = w.values[join_table(n, m, k - m)]
    return raise_values(S, n, k - m, h)


def inner(a, b, h):
    _same_dim(a, b, h)
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    n, k = a.dim, a.rank
    up = raise_all(a, h)
    return np.sum(up.values * b.values * multiplicities(n, k))


def norm2(a, h):
    return inner(a, a, h)


def tf_decompose(w, h):
    """Return (tf(w), psi) with w = tf(w) + met(psi).

    tr∘met acts on S^m as alpha_m·I + beta_m·met∘tr, so a system of the form
    (c0·I + c1·met∘tr) x = r reduces to the same form one trace level down.
    """
    n, k = w.dim, w.rank
    if k < 2:
        return w, SymTensor.zeros(n, max(k - 2, 0), w.exact)
    exact = w.exact or h.exact

    def alpha(m):
        return coef(2 * (n + 2 * m), (m + 1) * (m + 2), exact)

    def beta(m):
        return coef(m * (m - 1), (m + 1) * (m + 2), exact)

    def solve(r, c0, c1):
        m = r.rank
        if c0 == 0:
            raise DegenerateProjection("degenerate projection")
        if m < 2 or c1 == 0:
            return r * (1 / c0 if not exact else Fraction(1) / c0)
        y = solve(trace(r, h), c0 + c1 * alpha(m - 2), c1 * beta(m - 2))
        inv = (Fraction(1) / c0) if exact else 1.0 / c0
        return (r - met(y, h) * c1) * inv

    psi = solve(trace(w, h), alpha(k - 2), beta(k - 2))
    return w - met(psi, h), psi


def tf(w, h):
    return tf_decompose(w, h)[0]


def cartan_product(a, b, h):
    return tf(sym_product(a, b), h)


def contract_slot(w, v):
    """i(Z)w: contract the first slot of w with the vector v (upper index)."""
    n, k = w.dim, w.rank
    if k == 0:
        raise ValueError("cannot contract a scalar")
    slab = w.values[join_table(n, k - 1, 1)]
    return SymTensor(n, k - 1, slab @ np.asarray(v))


def lower(v, h):
    return SymTensor(h.dim, 1, np.asarray(h.matrix @ np.asarray(v)))


def random_tensor(k, n, seed, exact=False):
    rng = np.random.default_rng(seed)
    size = len(multi_indices(n, k))
    if exact:
        vals = exact_array(rng.integers(-8, 9, size=size))
        return SymTensor(n, k, vals)
    return SymTensor(n, k, rng.uniform(-1.0, 1.0, size=size))


def random_tracefree(k, n, seed, h=None, exact=False):
    """Deterministic random element of S^k_0 (uniform components, then tf)."""
    h = h or Metric.identity(n, exact)
    return tf(random_tensor(k, n, seed, exact), h)


def random_metric(n, seed, exact=False, negative=0, max_cond=None):
    """Deterministic random integer metric P D P^T with unit lower-triangular P and p negative entries in D.

    With max_cond, draws from the same generator are repeated until cond(M) <= max_cond.
    """
    rng = np.random.default_rng(seed)
    while True:
        P = np.tril(rng.integers(-1, 2, size=(n, n)), -1) + np.eye(n, dtype=int)
        d = rng.integers(1, 4, size=n)
        d[n - negative:] *= -1
        M = P @ np.diag(d) @ P.T
        if max_cond is None or np.linalg.cond(M) <= max_cond:
            break
    return Metric(exact_array(M)) if exact else Metric(M.astype(float))


def power_of_metric(h, k):
    out = SymTensor.scalar(h.dim, Fraction(1) if h.exact else 1.0)
    for _ in range(k):
        out = met(out, h)
    return out


# ---------------------------------------------------------------------------
# dense splitting of T*⊗S^k (first slot is the derivative slot)

def sym_axes(arr, axes):
    """Average of arr over all permutations of the listed axes."""
    axes = list(axes)
    if len(axes) < 2:
        return arr
    perms = list(itertools.permutations(axes))
    acc = None
    for p in perms:
        order = list(range(arr.ndim))
        for src, dst in zip(axes, p):
            order[src] = dst
        t = np.transpose(arr, order)
        acc = t if acc is None else acc + t
    return acc * (Fraction(1, len(perms)) if is_exact(arr) else 1.0 / len(perms))


def _divergence_dense(T, h):
    """div_{I'} = h^{pq} T_{p q I'} for T in T*⊗S^k."""
    d = np.tensordot(h.inverse, T, axes=([0, 1], [0, 1]))
    return d


def clie_part(T, h):
    """Trace-free symmetrization of T ∈ T*⊗S^k_0 (the L part)."""
    n = h.dim
    k = T.ndim - 1
    exact = h.exact or is_exact(T)
    div = divergence_part(T, h) if k >= 1 else None
    out = SymTensor.symmetrize(T)
    if k >= 1:
        out = out - met(div, h) * coef(k, n + 2 * (k - 1), exact)
    return out


def klie_part(T, h):
    """The K part: trace-free part of the skew derivative, slots (i, j | i1..i_{k-1})."""
    n = h.dim
    k = T.ndim - 1
    exact = h.exact or is_exact(T)
    half = Fraction(1, 2) if exact else 0.5
    skew = (T - np.swapaxes(T, 0, 1)) * half
    if k == 1:
        return skew
    div = _divergence_dense(T, h)               # rank k-1, symmetric
    hm = np.asarray(h.matrix)
    # X[i, i1, ..., i_{k-1}, j] = h_{i(i1} div_{i2..i_{k-1}) j}
    X = np.multiply.outer(hm, div)              # axes: i, i1, j, i2..i_{k-1}
    X = np.moveaxis(X, 2, -1)                   # i, i1, i2.., j
    X = sym_axes(X, range(1, k))
    # bring to (i, j, i1..i_{k-1})
    Xij = np.moveaxis(X, -1, 1)
    corr = (Xij - np.swapaxes(Xij, 0, 1)) * coef(k - 1, 2 * (n + k - 3), exact)
    return skew - corr


def tlie_part(T, h):
    k = T.ndim - 1
    K = klie_part(T, h)
    return sym_axes(K, range(1, k + 1)) * coef(2 * k, k + 1, is_exact(K))


def ih(sig, h, k):
    """ih: S^{k-1}_0 -> T*⊗S^k_0, returned dense of rank k+1."""
    n = h.dim
    exact = h.exact or sig.exact
    hm = np.asarray(h.matrix)
    s = sig.dense()
    den = (n + k - 3) * (n + 2 * (k - 1))
    A = coef(k * (n + 2 * (k - 2)), den, exact) if den else coef(1, n, exact)
    B = coef(k * (1 - k), den, exact) if den else 0
    t1 = sym_axes(np.multiply.outer(hm, s), range(1, k + 1))
    out = t1 * A
    if k >= 2:
        t2 = np.moveaxis(np.multiply.outer(hm, s), -1, 0)   # i, i1, i2, i3.. with s's last slot as i
        out = out + sym_axes(t2, range(1, k + 1)) * B
    return out


def dense_norm2(T, h):
    """Complete contraction |T|^2 of a covariant dense array."""
    up = T
    for ax in range(T.ndim):
        up = np.moveaxis(np.tensordot(h.inverse, up, axes=([1], [ax])), 0, ax)
    return np.sum(up * T)


def dense_inner(S, T, h):
    up = S
    for ax in range(S.ndim):
        up = np.moveaxis(np.tensordot(h.inverse, up, axes=([1], [ax])), 0, ax)
    return np.sum(up * T)


def divergence_part(T, h):
    d = _divergence_dense(T, h)
    if T.ndim == 2:
        return SymTensor.scalar(h.dim, d[()] if isinstance(d, np.ndarray) else d)
    return SymTensor.from_dense(d)


# ---------------------------------------------------------------------------
# principal symbols

class LimitingCase(UserWarning):
    pass


def symbol_norms(Z, phi, h):
    """Squared norms of the principal symbols of L, K and div at covector direction Z.

    Z is a vector (upper index). Returns a dict with the three values, the
    closed forms and a flag for the k=1, n=2 regime where the K coefficient is
    a limit.
    """
    n, k = phi.dim, phi.rank
    Zv = np.asarray(Z, dtype=float)
    Zf = lower(Zv, h).values
    T = np.multiply.outer(Zf, phi.dense())
    L = clie_part(T, h)
    iz = contract_slot(phi, Zv)
    zz = float(Zf @ Zv)
    pp = float(norm2(phi, h))
    izn = float(norm2(iz, h)) if k else 0.0
    sL = float(norm2(L, h))
    limiting = (k == 1 and n == 2)
    if k == 1:
        K = (T - T.T) / 2
        kcoef = 1.0           # limit of (n+2(k-2))/(n+k-3) as n -> 2 at k = 1
    else:
        K = klie_part(T, h)
        kcoef = (n + 2 * (k - 2)) / (n + k - 3)
    sK = float(dense_norm2(K, h))
    closed_L = zz * pp / (k + 1) + k * (n + 2 * (k - 2)) / ((k + 1) * (n + 2 * (k - 1))) * izn
    closed_K = 0.5 * (zz * pp - kcoef * izn)
    return {"L": sL, "K": sK, "div": izn,
            "closed_L": closed_L, "closed_K": closed_K, "closed_div": izn,
            "klie_inequality": pp * zz - kcoef * izn,
            "limiting_case": limiting}
