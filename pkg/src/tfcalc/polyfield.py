"""Polynomials with rational coefficients, polarization, Lefschetz decomposition and graph polynomials."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .symalg import Metric, SymTensor, multi_indices, multiplicities, tf_decompose


class Polynomial:
    """Sparse polynomial in n variables; terms map exponent tuples to coefficients."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        self.dim = dim
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != dim or min(e, default=0) < 0:
                raise ValueError(f"bad exponent {e}")
            if c != 0:
                clean[e] = clean.get(e, 0) + (Fraction(c) if isinstance(c, (int, str)) else c)
                if clean[e] == 0:
                    del clean[e]
        self.terms = clean

    @classmethod
    def variable(cls, n, i):
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): Fraction(1)})

    @classmethod
    def constant(cls, n, c):
        return cls(n, {(0,) * n: c})

    @classmethod
    def quadratic_form(cls, h):
        """E = h_ij x^i x^j."""
        h = h.matrix if isinstance(h, Metric) else h
        n = h.shape[0]
        terms = {}
        for i in range(n):
            for j in range(n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                terms[tuple(e)] = terms.get(tuple(e), 0) + Fraction(h[i, j])
        return cls(n, terms)

    # arithmetic
    def _lift(self, other):
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        return Polynomial.constant(self.dim, other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Polynomial(self.dim, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            if other == 0:
                return Polynomial(self.dim)
            return Polynomial(self.dim, {e: c * other for e, c in self.terms.items()})
        other = self._lift(other)
        t = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return Polynomial(self.dim, t)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (Fraction(1) / Fraction(c) if isinstance(c, int) else 1 / c)

    def __pow__(self, m):
        out = Polynomial.constant(self.dim, 1)
        for _ in range(m):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if other == 0:
                return not self.terms
            other = Polynomial.constant(self.dim, other)
        return self.dim == other.dim and self.terms == other.terms

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}" + (f"^{p}" if p > 1 else "") for i, p in enumerate(e) if p)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # structure
    @property
    def degree(self):
        return max((sum(e) for e in self.terms), default=0)

    def is_homogeneous(self):
        return len({sum(e) for e in self.terms}) <= 1

    def derivative(self, i):
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return Polynomial(self.dim, t)

    def partial(self, idx):
        out = self
        for i in idx:
            out = out.derivative(i)
        return out

    def __call__(self, x):
        """Evaluate at a point or at a batch of points (last axis = coordinates)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for e, c in self.terms.items():
            term = np.full(x.shape[:-1], float(c))
            for i, p in enumerate(e):
                if p:
                    term = term * x[..., i] ** p
            out = out + term
        return out

    def evaluate_exact(self, x):
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for xi, p in zip(x, e):
                term = term * Fraction(xi) ** p
            total += term
        return total

    def max_abs_coeff(self):
        return max((abs(float(c)) for c in self.terms.values()), default=0.0)


def _check_homogeneous(P):
    if not P.is_homogeneous():
        raise ValueError("polynomial is not homogeneous")


def polarize(P, h=None):
    """ω^P = (1/k!) D^(k) P, read off from the coefficients."""
    _check_homogeneous(P)
    n, k = P.dim, P.degree
    I = multi_indices(n, k)
    mult = multiplicities(n, k)
    vals = np.empty(len(I), dtype=object)
    for r, idx in enumerate(I):
        e = tuple(np.bincount(idx, minlength=n)) if k else (0,) * n
        vals[r] = Fraction(P.terms.get(tuple(int(v) for v in e), 0)) / int(mult[r])
    return SymTensor(n, k, vals)


def depolarize(w):
    n, k = w.dim, w.rank
    terms = {}
    for idx, m, v in zip(multi_indices(n, k), multiplicities(n, k), w.values):
        if v != 0:
            e = tuple(int(c) for c in np.bincount(idx, minlength=n)) if k else (0,) * n
            terms[e] = v * int(m)
    return Polynomial(n, terms)


def deriv_tensor(F, j):
    """The j-fold derivative as a symmetric tensor whose components are polynomials."""
    if j > F.degree:
        raise ValueError("order exceeds degree")
    n = F.dim
    I = multi_indices(n, j)
    vals = np.empty(len(I), dtype=object)
    for r, idx in enumerate(I):
        vals[r] = F.partial(idx)
    return SymTensor(n, j, vals)


def constant_value(T):
    """Convert a tensor of constant polynomials into a tensor of Fractions."""
    vals = np.empty(len(T.values), dtype=object)
    for r, p in enumerate(T.values):
        if p.degree > 0:
            raise ValueError("component is not constant")
        vals[r] = p.terms.get((0,) * T.dim, Fraction(0))
    return SymTensor(T.dim, T.rank, vals)


def laplacian_poly(P, h=None):
    n = P.dim
    h = h or Metric.identity(n, exact=True)
    Hi = h.inverse
    out = Polynomial(n)
    for i in range(n):
        di = P.derivative(i)
        for j in range(n):
            if Hi[i, j] != 0:
                out = out + di.derivative(j) * Hi[i, j]
    return out


def harmonic_decompose(P, h=None):
    """P = Σ E^i Q_i with Q_i harmonic; returns [(i, Q_i)] for nonzero Q_i."""
    _check_homogeneous(P)
    h = h or Metric.identity(P.dim, exact=True)
    out = []
    w = polarize(P, h)
    i = 0
    while True:
        t, psi = tf_decompose(w, h)
        if not t.is_zero():
            out.append((i, depolarize(t)))
        if w.rank < 2 or psi.is_zero():
            break
        w, i = psi, i + 1
    return out


def recompose(parts, h):
    E = Polynomial.quadratic_form(h)
    total = None
    for i, Q in parts:
        term = Q * (E ** i)
        total = term if total is None else total + term
    return total


def random_polynomial(n, g, seed, lo=-5, hi=5):
    """Random homogeneous polynomial with small integer coefficients."""
    rng = np.random.default_rng(seed)
    terms = {}
    for idx in multi_indices(n, g):
        e = tuple(int(c) for c in np.bincount(idx, minlength=n))
        terms[e] = Fraction(int(rng.integers(lo, hi + 1)))
    return Polynomial(n, terms)


# ---------------------------------------------------------------------------
# regular graphs

@dataclass(frozen=True)
class RegularGraph:
    num_vertices: int
    edges: tuple              # ((u, v), ...) 1-based, file order fixes coordinates
    signs: tuple = None       # ±1 per block, blocks ordered by vertex id

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError("loops are not allowed")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError("multiple edges are not allowed")
            seen.add(key)
        degs = self.degrees
        if len(set(degs.values())) != 1 or len(degs) != self.num_vertices:
            raise ValueError("graph is not regular")
        if self.signs is None:
            object.__setattr__(self, "signs", (1,) * self.num_vertices)
        if len(self.signs) != self.num_vertices or any(s not in (1, -1) for s in self.signs):
            raise ValueError("need one sign ±1 per block")

    @property
    def degrees(self):
        d = {}
        for u, v in self.edges:
            d[u] = d.get(u, 0) + 1
            d[v] = d.get(v, 0) + 1
        return d

    @property
    def regularity(self):
        return next(iter(self.degrees.values()))

    @property
    def vertices(self):
        return sorted(self.degrees)

    @property
    def blocks(self):
        """For each vertex (sorted by id) the sorted 0-based indices of its incident edges."""
        return [tuple(e for e, (u, v) in enumerate(self.edges) if w in (u, v)) for w in self.vertices]

    @property
    def num_edges(self):
        return len(self.edges)

    @classmethod
    def parse(cls, text):
        edges, signs = [], None
        for line in text.splitlines():
            line = line.split("#")[0].strip()
            if not line:
                continue
            if line.lower().startswith("signs:"):
                raw = line.split(":", 1)[1].strip().replace("−", "-").replace(" ", "")
                if any(c not in "+-" for c in raw):
                    raise ValueError(f"bad sign string {raw!r}")
                signs = tuple(1 if c == "+" else -1 for c in raw)
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"bad edge line {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
        if not edges:
            raise ValueError("empty graph")
        nv = len({v for e in edges for v in e})
        return cls(nv, tuple(edges), signs)

    @classmethod
    def complete4(cls):
        return cls(4, ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)))

    @classmethod
    def petersen(cls):
        outer = [(i, i % 5 + 1) for i in range(1, 6)]
        spokes = [(i, i + 5) for i in range(1, 6)]
        inner = [(6 + i, 6 + (i + 2) % 5) for i in range(5)]
        return cls(10, tuple(outer + spokes + inner))


def graph_polynomial(G, strict=True):
    """P = Σ ε_I x_I over vertex blocks, and ω = D^(k) P.

    strict=False allows k < 3 so the failure of the norm identity can be shown.
    """
    k = G.regularity
    if strict and k < 3:
        raise ValueError("regularity below supported range")
    n = G.num_edges
    terms = {}
    for eps, block in zip(G.signs, G.blocks):
        e = [0] * n
        for b in block:
            e[b] = 1
        terms[tuple(e)] = terms.get(tuple(e), 0) + Fraction(eps)
    P = Polynomial(n, terms)
    w = polarize(P) * math.factorial(k)
    return P, w


def derivative_norm(F, j, h=None):
    """|D^(j) F|^2 as a polynomial (sum over ordered index tuples)."""
    from .symalg import inner
    h = h or Metric.identity(F.dim, exact=True)
    T = deriv_tensor(F, j)
    return inner(T, T, h)
