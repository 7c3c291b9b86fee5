"""Curvature-type tensors: the wedge of symmetric tensors, Ricci traces, Weyl parts and op_Y."""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .symalg import (
    SymTensor, coef, is_exact, join_table, multi_indices, multiplicities, raise_all, raised_slices,
    split_table, _mean, _same_dim,
)


@lru_cache(maxsize=None)
def representatives(n):
    """Quadruples (i<j, k<l, (i,j) <= (k,l))."""
    pairs = list(itertools.combinations(range(n), 2))
    quads = [p + q for a, p in enumerate(pairs) for q in pairs[a:]]
    return np.array(quads, dtype=np.intp).reshape(len(quads), 4)


@lru_cache(maxsize=None)
def _expansion(n):
    """For every (i,j,k,l): (position of its representative, sign)."""
    pairs = list(itertools.combinations(range(n), 2))
    pidx = {p: a for a, p in enumerate(pairs)}
    P = len(pairs)
    rep_pos = {}
    for r, q in enumerate(representatives(n)):
        rep_pos[(pidx[tuple(q[:2])], pidx[tuple(q[2:])])] = r
    pos = np.zeros((n,) * 4, dtype=np.intp)
    sign = np.zeros((n,) * 4, dtype=np.int64)
    for i, j, k, l in itertools.product(range(n), repeat=4):
        if i == j or k == l:
            continue
        s = 1
        a = (i, j) if i < j else (j, i)
        s *= 1 if i < j else -1
        b = (k, l) if k < l else (l, k)
        s *= 1 if k < l else -1
        pa, pb = pidx[a], pidx[b]
        if pa > pb:
            pa, pb = pb, pa
        pos[i, j, k, l] = rep_pos[(pa, pb)]
        sign[i, j, k, l] = s
    del P
    return pos, sign


@dataclass(frozen=True, eq=False)
class CurvTensor:
    dim: int
    values: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(representatives(self.dim)):
            raise ValueError("wrong number of representative components")

    @classmethod
    def from_dense(cls, Y):
        """Read representative components of an array already in the symmetry class."""
        n = Y.shape[0]
        R = representatives(n)
        vals = Y[R[:, 0], R[:, 1], R[:, 2], R[:, 3]]
        return cls(n, vals if is_exact(vals) else vals.astype(float))

    @classmethod
    def zeros(cls, n, exact=False):
        size = len(representatives(n))
        if exact:
            v = np.empty(size, dtype=object)
            v[:] = Fraction(0)
            return cls(n, v)
        return cls(n, np.zeros(size))

    @property
    def exact(self):
        return is_exact(self.values)

    @cached_property
    def _dense(self):
        pos, sign = _expansion(self.dim)
        return self.values[pos] * sign

    def dense(self):
        return self._dense

    def __getitem__(self, idx):
        return self._dense[tuple(idx)]

    def components(self):
        return {tuple(int(i) for i in q): v for q, v in zip(representatives(self.dim), self.values)}

    def __add__(self, other):
        return CurvTensor(self.dim, self.values + other.values)

    def __sub__(self, other):
        return CurvTensor(self.dim, self.values - other.values)

    def __neg__(self):
        return CurvTensor(self.dim, -self.values)

    def __mul__(self, c):
        return CurvTensor(self.dim, self.values * c)

    __rmul__ = __mul__

    def max_abs(self):
        return float(max((abs(float(v)) for v in self.values), default=0.0))

    def as_float(self):
        return CurvTensor(self.dim, np.array([float(v) for v in self.values]))


def bianchi_defect(Y):
    D = Y.dense() if isinstance(Y, CurvTensor) else Y
    return D + np.transpose(D, (1, 2, 0, 3)) + np.transpose(D, (2, 0, 1, 3))


def project_mcurv(T):
    """Orthogonal projection of a raw 4-tensor onto the metric curvature symmetry class."""
    T = np.asarray(T) if not is_exact(T) else T
    exact = is_exact(T)
    half = Fraction(1, 2) if exact else 0.5
    A = (T - np.transpose(T, (1, 0, 2, 3))) * half
    A = (A - np.transpose(A, (0, 1, 3, 2))) * half
    A = (A + np.transpose(A, (2, 3, 0, 1))) * half
    # subtract the totally antisymmetric part
    alt = None
    for p in itertools.permutations(range(4)):
        sgn = _perm_sign(p)
        t = np.transpose(A, p) * sgn
        alt = t if alt is None else alt + t
    alt = alt * (Fraction(1, 24) if exact else 1 / 24)
    return CurvTensor.from_dense(A - alt)


def _perm_sign(p):
    s, p = 1, list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


def _pair_contraction(a, b, h):
    """M[x,y,z,w] = a_{xy}^{P} b_{zwP}, summing over ordered blocks P of length k-2."""
    n, k = a.dim, a.rank
    P2 = multi_indices(n, 2)
    if k == 2:
        A2, B2 = a.values, b.values
        M2 = np.multiply.outer(A2, B2)
    else:
        Sa = a.values[join_table(n, 2, k - 2)]
        Sb = raised_slices(b, 2, h) * multiplicities(n, k - 2)
        M2 = Sa @ Sb.T
    pr = np.zeros((n, n), dtype=np.intp)
    for r, (x, y) in enumerate(P2):
        pr[x, y] = pr[y, x] = r
    return M2[pr[:, :, None, None], pr[None, None, :, :]]


def kwedge(a, b, h):
    """The symmetric bilinear wedge S^k x S^k -> mcurv.

    For k = 1 there is no contraction block; the map used is the bilinear
    combination of (a⊙b)∧h and <a,b> h∧h whose Ricci trace is a_(i b_j).
    """
    _same_dim(a, b, h)
    if a.rank != b.rank:
        raise ValueError("rank mismatch")
    n, k = a.dim, a.rank
    exact = a.exact or b.exact or h.exact
    if k < 1:
        raise ValueError("rank must be at least 1")
    if k == 1:
        if n < 3:
            raise ValueError("the rank-1 wedge needs n >= 3")
        from .symalg import sym_product, inner
        ab = sym_product(a, b)
        x = coef(-2, n - 2, exact)
        y = inner(a, b, h) * coef(1, (n - 1) * (n - 2), exact)
        return kwedge(ab, h.tensor, h) * x + kwedge(h.tensor, h.tensor, h) * y
    M = _pair_contraction(a, b, h)
    # (a∧b)_{ijkl} = a_{k[i}b_{j]l} - a_{l[i}b_{j]k}, with a_{xy}b_{zw} -> M[x,y,z,w]
    half = Fraction(1, 2) if exact else 0.5
    t1 = (np.einsum("kijl->ijkl", M) - np.einsum("kjil->ijkl", M)) * half
    t2 = (np.einsum("lijk->ijkl", M) - np.einsum("ljik->ijkl", M)) * half
    return CurvTensor.from_dense(t1 - t2)


def rictr(Y, h):
    D = Y.dense()
    return SymTensor.from_dense(np.einsum("pq,pijq->ij", h.inverse, D))


def scal(Y, h):
    r = rictr(Y, h)
    return np.sum(h.inverse * r.dense())


def rictr_wedge(a, b, h):
    """rictr(a∧b) computed directly by contraction (all but one index)."""
    from .symalg import sym_product, trace
    n, k = a.dim, a.rank
    exact = a.exact or b.exact or h.exact
    if k == 1:
        return sym_product(a, b)
    M = a.values[join_table(n, 1, k - 1)] @ (raised_slices(b, 1, h) * multiplicities(n, k - 1)).T
    out = SymTensor.symmetrize(M)
    if k >= 2:
        ta, tb = trace(a, h), trace(b, h)
        if not (ta.is_zero() and tb.is_zero()):
            half = coef(1, 2, exact)
            out = out - (_contract_block(a, tb, h) + _contract_block(b, ta, h)) * half
    return out


def _contract_block(a, t, h):
    """a_{ij}^{P} t_P over a block of length k-2."""
    n, k = a.dim, a.rank
    if k == 2:
        return a * t.values[0]
    tu = raise_all(t, h)
    J = join_table(n, 2, k - 2)
    return SymTensor(n, 2, (a.values[J] * multiplicities(n, k - 2)) @ tu.values)


def inner_curv(Y, Z, h):
    up = Y.dense()
    Hi = h.inverse
    for ax in range(4):
        up = np.moveaxis(np.tensordot(Hi, up, axes=([1], [ax])), 0, ax)
    return np.sum(up * Z.dense())


def norm2_curv(Y, h):
    return inner_curv(Y, Y, h)


def hwedgeh(h):
    return kwedge(h.tensor, h.tensor, h)


def tf_curv(Y, h, form=1):
    """Weyl part. form=1 uses rictr and scal, form=2 the trace-free Ricci part."""
    n = Y.dim
    if n < 3:
        raise ValueError("dimension too small")
    exact = Y.exact or h.exact
    r = rictr(Y, h)
    s = scal(Y, h)
    hh = hwedgeh(h)
    if form == 1:
        return Y + kwedge(r, h.tensor, h) * coef(2, n - 2, exact) - hh * (s * coef(1, (n - 2) * (n - 1), exact))
    r0 = r - h.tensor * (s * coef(1, n, exact))
    return Y + kwedge(r0, h.tensor, h) * coef(2, n - 2, exact) + hh * (s * coef(1, n * (n - 1), exact))


def op_Y(Y, w, h):
    """The curvature action on S^k (Lichnerowicz-type operator)."""
    n, k = w.dim, w.rank
    if k < 1:
        raise ValueError("rank must be at least 1")
    exact = w.exact or Y.exact or h.exact
    Hi = h.inverse
    Ric = rictr(Y, h).dense()
    # term 1: Sym[ Ric_{i1}^{q} w_{q i2..ik} ]
    A = Ric @ Hi
    S1 = w.values[join_table(n, 1, k - 1)]            # (n, C_{k-1}) rows q
    T1 = A @ S1                                          # (n, C_{k-1})
    left, right = split_table(n, k, 1)
    out = _mean(T1[left, right], 1, exact)
    if k >= 2:
        D = Y.dense()
        # K[a,b,r,q] = h^{rp} Y_{p a b s} h^{sq}, symmetrized in (a,b) and (r,q)
        Kt = np.einsum("rp,pabs,sq->abrq", Hi, D, Hi)
        half = Fraction(1, 2) if exact else 0.5
        Kt = (Kt + np.swapaxes(Kt, 0, 1)) * half
        Kt = (Kt + np.swapaxes(Kt, 2, 3)) * half
        P2 = multi_indices(n, 2)
        K2 = Kt[P2[:, 0], P2[:, 1]][:, P2[:, 0], P2[:, 1]] * multiplicities(n, 2)
        S2 = w.values[join_table(n, 2, k - 2)]           # (C_2, C_{k-2})
        T2 = K2 @ S2
        left2, right2 = split_table(n, k, 2)
        out = out + _mean(T2[left2, right2], 1, exact) * (1 - k)
    return SymTensor(n, k, out)


def qY(Y, w, h):
    from .symalg import inner
    return inner(w, op_Y(Y, w, h), h)


def qY_wedge_form(Y, a, b, h):
    """<rictr(a∧b), rictr Y> + ((k-1)/2)<a∧b, Y>."""
    from .symalg import inner
    k = a.rank
    exact = a.exact or Y.exact or h.exact
    val = inner(rictr_wedge(a, b, h), rictr(Y, h), h)
    if k > 1:
        val = val + coef(k - 1, 2, exact) * inner_curv(kwedge(a, b, h), Y, h)
    return val


def qY_tracefree_form(Y, a, b, h):
    """Three-term form valid for trace-free a, b and n > 2."""
    from .symalg import inner
    n, k = a.dim, a.rank
    exact = a.exact or Y.exact or h.exact
    r = rictr(Y, h)
    s = scal(Y, h)
    r0 = r - h.tensor * (s * coef(1, n, exact))
    val = coef(n + 2 * (k - 2), n - 2, exact) * inner(rictr_wedge(a, b, h), r0, h)
    val = val + coef(n + k - 2, n * (n - 1), exact) * s * inner(a, b, h)
    if k > 1:
        val = val + coef(k - 1, 2, exact) * inner_curv(kwedge(a, b, h), tf_curv(Y, h), h)
    return val


def random_curv(n, seed, exact=False):
    rng = np.random.default_rng(seed)
    if exact:
        from .symalg import exact_array
        return project_mcurv(exact_array(rng.integers(-8, 9, size=(n,) * 4)))
    return project_mcurv(rng.uniform(-1, 1, size=(n,) * 4))
