"""Certifiers for coupled Einstein-type solutions and the algebraic inequality suites."""

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import chartgeo as cg
from .curvalg import (
    CurvTensor, hwedgeh, inner_curv, kwedge, norm2_curv, project_mcurv, qY, random_curv, rictr,
    rictr_wedge, scal, tf_curv,
)
from .polyfield import (
    Polynomial, deriv_tensor, derivative_norm, harmonic_decompose, laplacian_poly, polarize,
    RegularGraph, graph_polynomial,
)
from .symalg import Metric, SymTensor, inner, norm2, random_tracefree, tf, trace


# ---------------------------------------------------------------------------
# reports

def _num(v):
    if isinstance(v, Fraction):
        return float(v) if v.denominator != 1 else int(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


@dataclass
class Report:
    check: str
    residual: float
    tol: float
    passed: bool
    notes: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    digest: str = ""

    def to_dict(self):
        return {
            "check": self.check,
            "residual": _num(self.residual),
            "tol": self.tol,
            "pass": bool(self.passed),
            "notes": list(self.notes),
            "values": {k: _jsonable(v) for k, v in sorted(self.values.items())},
            "digest": self.digest,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return _num(v)


def digest(*parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
    return h.hexdigest()[:16]


def _report(check, residual, tol, notes=(), exact=False, **values):
    res = residual if exact else float(residual)
    ok = (res == 0) if exact else bool(abs(res) <= tol)
    return Report(check, res, tol, ok, list(notes), values)


def _maxabs(t):
    if isinstance(t, (SymTensor, CurvTensor)):
        return t.max_abs()
    return max((abs(v) for v in np.asarray(t, dtype=object).reshape(-1)), default=0)


# ---------------------------------------------------------------------------
# coupled equations

@dataclass
class Coupling:
    """One summand: coefficient, tensor (SymTensor or TensorField) and its kernel class."""
    coef: object
    tensor: object
    cls: str = "codazzi"      # codazzi → a_k·stp(ω), killing → b_k·stm(γ)

    def __post_init__(self):
        if self.cls not in ("codazzi", "killing"):
            raise ValueError("class must be codazzi or killing")


@dataclass
class SolutionCandidate:
    kind: str                                   # flat-algebraic | chart | lie-group | hypersurface
    metric: object                              # Metric or MetricField
    tensors: list = field(default_factory=list)
    c: Optional[float] = None
    kappa: Optional[float] = None               # user value, compared against the derived one
    ricci: Optional[SymTensor] = None           # exact Ricci for lie-group candidates
    points: Optional[np.ndarray] = None         # sample points for chart candidates
    validated: bool = False

    KINDS = ("flat-algebraic", "chart", "lie-group", "hypersurface")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown candidate kind {self.kind!r}")


def kappa_from_trace(sc, parts, n):
    """κ from tracing the coupled equation, and κ' from the trace-free Ricci form.

    parts: [(coef, |t|^2, k, class)].
    """
    exact = isinstance(sc, Fraction) or all(isinstance(p[1], Fraction) for p in parts)
    fr = (lambda a, b: Fraction(a, b)) if exact else (lambda a, b: a / b)
    kap, kap2 = sc, sc
    for coef, n2, k, cls in parts:
        if cls == "codazzi":
            kap -= coef * n2
            kap2 -= coef * n2
        else:
            kap += coef * n2 * fr(n + 2 * k, k * (n - 2))
            kap2 -= coef * n2
    return kap, kap2


def _stress_at(Ric, hm, tensors):
    """Ric − Σ rictr terms, the stress sum, |t|^2 list."""
    n = hm.dim
    rhs = SymTensor.zeros(n, 2, exact=hm.exact)
    ric_rest = Ric
    parts = []
    for cpl in tensors:
        w = cpl.tensor
        n2 = norm2(w, hm)
        parts.append((cpl.coef, n2, w.rank, cpl.cls))
        r = rictr_wedge(w, w, hm)
        ric_rest = ric_rest - r * cpl.coef
        rhs = rhs + cg.stpm(w, hm, 1 if cpl.cls == "codazzi" else -1) * cpl.coef
    return ric_rest, rhs, parts


def _check_tracefree(tensors, hm, tol):
    for cpl in tensors:
        t = cpl.tensor
        if t.rank >= 2 and _maxabs(trace(t, hm)) > tol:
            raise ValueError("tensor is not trace-free")


def stressenergy_point(Ric, hm, tensors):
    """Residuals of the coupled equation at one point with κ from the trace."""
    n = hm.dim
    if n < 3:
        raise ValueError("n >= 3 required")
    ex = hm.exact
    sc = sum(hm.inverse.reshape(-1) * Ric.dense().reshape(-1)) if ex else float(np.sum(hm.inverse * Ric.dense()))
    ric_rest, T, parts = _stress_at(Ric, hm, tensors)
    kap, kap2 = kappa_from_trace(sc, parts, n)
    half = Fraction(1, 2) if ex else 0.5
    fr = Fraction(n - 2, 2 * n) if ex else (n - 2) / (2 * n)
    lhs = Ric - hm.tensor * (half * sc) + hm.tensor * (fr * kap)
    full = lhs - T
    tfric = ric_rest - hm.tensor * (kap2 / n if not ex else Fraction(kap2) / n)
    return {"scal": sc, "kappa": kap, "kappa_ricci": kap2,
            "residual": _maxabs(full), "tracefree_residual": _maxabs(tfric)}


def stressenergy_residual(cand, tol=1e-5, cfg=None):
    """Certify the coupled Einstein equation with κ derived from the trace."""
    notes = ["kappa is derived from the trace; kappa_ricci is the constant of the trace-free Ricci form"]
    if cand.kind in ("flat-algebraic", "lie-group"):
        hm = cand.metric
        _check_tracefree(cand.tensors, hm, 0)
        n = hm.dim
        Ric = cand.ricci if cand.ricci is not None else SymTensor.zeros(n, 2, exact=hm.exact)
        r = stressenergy_point(Ric, hm, cand.tensors)
        exact = hm.exact
        if cand.kappa is not None and cand.kappa != r["kappa"]:
            notes.append(f"supplied kappa {cand.kappa} differs from derived {r['kappa']}")
        res = max(r["residual"], r["tracefree_residual"])
        rep = _report("stressenergy", res, 0 if exact else tol, notes, exact=exact,
                      kappa=r["kappa"], kappa_ricci=r["kappa_ricci"], scal=r["scal"])
        rep.digest = digest(cand.kind, n, [c.tensor.values.tolist() for c in cand.tensors])
        return rep
    # chart / hypersurface candidates: FD curvature at sample points
    cfg = cfg or cg.FDConfig()
    h = cand.metric
    pts = cand.points if cand.points is not None else np.zeros((1, h.dim))
    worst, kaps = 0.0, []
    for x in pts:
        hm = h.at(x)
        Ric = cg.ricci(h, x, cfg)
        tens = [Coupling(c.coef, c.tensor.sym(x) if isinstance(c.tensor, cg.TensorField) else c.tensor, c.cls)
                for c in cand.tensors]
        _check_tracefree(tens, hm, 1e-8)
        r = stressenergy_point(Ric, hm, tens)
        worst = max(worst, r["residual"], r["tracefree_residual"])
        kaps.append(r["kappa"])
    spread = max(kaps) - min(kaps)
    # dκ at the first point
    def kap_at(y):
        hm = h.at(y)
        tens = [Coupling(c.coef, c.tensor.sym(y) if isinstance(c.tensor, cg.TensorField) else c.tensor, c.cls)
                for c in cand.tensors]
        return stressenergy_point(cg.ricci(h, y, cfg), hm, tens)["kappa"]
    dk = float(np.abs(cg.partial(kap_at, pts[0], cg.FDConfig(max(cfg.step, 1e-2), cfg.scheme))).max())
    if cand.kappa is not None and abs(cand.kappa - kaps[0]) > tol:
        notes.append(f"supplied kappa {cand.kappa} differs from derived {kaps[0]}")
    res = max(worst, spread)
    rep = _report("stressenergy", res, tol, notes, kappa=kaps[0], kappa_spread=spread, dkappa=dk)
    rep.passed = rep.passed and dk <= max(tol, 1e-3)
    return rep


def projectivehiggs_residual(R, w, c, kappa, hm, tol=1e-5):
    """R − c(ω∧ω) + κ/(n(n−1)) h∧h, and its Ricci and scalar consequences."""
    n = hm.dim
    exact = hm.exact and R.exact
    fr = Fraction(1, n * (n - 1)) if exact else 1 / (n * (n - 1))
    ww = kwedge(w, w, hm) if w.rank >= 1 and not w.is_zero() else CurvTensor.zeros(n, exact=exact)
    res = R - ww * c + hwedgeh(hm) * (kappa * fr)
    r_main = _maxabs(res)
    sc = scal(R, hm)
    n2 = norm2(w, hm) if w.rank else 0
    r_scal = abs(sc - (c * n2 + kappa))
    rw = rictr_wedge(w, w, hm) if not w.is_zero() else SymTensor.zeros(n, 2, exact=exact)
    ric = rictr(R, hm) - hm.tensor * (kappa / n if not exact else Fraction(kappa) / n) - rw * c
    r_ric = _maxabs(ric)
    scale = 1.0 if exact else max(1.0, float(R.max_abs()))
    res = max(r_main, r_scal, r_ric)
    return _report("projectivehiggs", res if exact else res / scale, 0 if exact else tol, exact=exact,
                   curvature=r_main, scal=r_scal, ricci=r_ric)


# ---------------------------------------------------------------------------
# flat algebraic solutions

def flat_algebraic_verify(F, h=None):
    """|D^(g−1)F|^2 = cE with c = |D^(g)F|^2/n, in exact arithmetic."""
    n, g = F.dim, F.degree
    h = h or Metric.identity(n, exact=True)
    if not F.is_homogeneous() or g < 2:
        raise ValueError("need a homogeneous polynomial of degree >= 2")
    if laplacian_poly(F, h) != 0:
        raise ValueError("polynomial is not harmonic")
    E = Polynomial.quadratic_form(h)
    lhs = derivative_norm(F, g - 1, h)
    top = derivative_norm(F, g, h)
    top_c = top.terms.get((0,) * n, Fraction(0))
    c = Fraction(top_c) / n
    diff = lhs - E * c
    notes = ["c is fixed by the trace: n*c = |D^(g)F|^2"]
    ok = diff == 0
    if not ok:
        notes.append("|D^(g-1)F|^2 is not a multiple of E")
    rep = Report("flat_algebraic", Fraction(0) if ok else Fraction(diff.max_abs_coeff()), 0, ok, notes,
                 {"c": c, "top_norm": top_c, "n": n, "g": g})
    rep.digest = digest(sorted(F.terms.items()))
    return rep


def flat_candidate(F, h=None, coef=1):
    """Flat candidate with ω = trace-free part of D^(g)F (constant)."""
    h = h or Metric.identity(F.dim, exact=True)
    from .polyfield import constant_value
    w = tf(constant_value(deriv_tensor(F, F.degree)), h)
    return SolutionCandidate("flat-algebraic", h, [Coupling(coef, w, "codazzi")])


def graph_certificate(G, strict=True):
    """All exact certificates for a graph polynomial."""
    P, w = graph_polynomial(G, strict)
    n, k = P.dim, G.regularity
    h = Metric.identity(n, exact=True)
    E = Polynomial.quadratic_form(h)
    harmonic = laplacian_poly(P, h) == 0
    lhs = derivative_norm(P, k - 1, h)
    norm_ok = lhs == E * (2 * math.factorial(k - 1))
    sig = rictr_wedge(w, w, h)
    n2 = norm2(w, h)
    sig_ok = (sig - h.tensor * (Fraction(n2) / n)).is_zero()
    tf_ok = k < 2 or trace(w, h).is_zero()
    se = stressenergy_residual(SolutionCandidate("flat-algebraic", h, [Coupling(1, w)]))
    ok = harmonic and norm_ok and sig_ok and tf_ok and se.passed
    notes = []
    if not norm_ok:
        notes.append("|D^(k-1)P|^2 differs from 2(k-1)! Q")
    rep = Report("graph_polynomial", Fraction(0) if ok else Fraction(1), 0, ok, notes,
                 {"n": n, "k": k, "harmonic": harmonic, "norm_identity": norm_ok,
                  "sigma_over_h": Fraction(n2) / n, "norm2": n2, "kappa": se.values["kappa"],
                  "tracefree": tf_ok, "stressenergy_residual": se.residual})
    rep.digest = digest(G.edges, G.signs)
    return rep, P, w


# ---------------------------------------------------------------------------
# Cartan–Münzner polynomials

def _traceless_sym3_basis():
    B = []
    B.append(np.diag([1, -1, 0]))
    B.append(np.diag([0, 1, -1]))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        M = np.zeros((3, 3), dtype=int)
        M[i, j] = M[j, i] = 1
        B.append(M)
    return [b.astype(object) for b in B]


def _poly_from_matrix_trace(B, power, scale, n):
    """scale·tr(X^power) with X = Σ x_a B_a, as an exact Polynomial."""
    import itertools
    terms = {}
    for idx in itertools.product(range(n), repeat=power):
        M = B[idx[0]]
        for a in idx[1:]:
            M = M.dot(B[a])
        t = sum(M[i, i] for i in range(M.shape[0]))
        if t != 0:
            e = [0] * n
            for a in idx:
                e[a] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0) + Fraction(t) * scale
    return Polynomial(n, terms)


def cartan_cubic():
    """The cubic tr(X^3)/6 on traceless symmetric 3x3 matrices with h_ab = tr(B_a B_b)/6.

    The basis is rational but not orthonormal, so h is not diagonal. The
    fixture is certified against the Münzner equations before it is returned.
    """
    B = _traceless_sym3_basis()
    n = len(B)
    hm = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            hm[a, b] = Fraction(int(np.trace(B[a].dot(B[b]))), 6)
    h = Metric(hm)
    P = _poly_from_matrix_trace(B, 3, Fraction(1, 6), n)
    cert = munzner_exact(P, h, 3, 1, 1)
    if not cert:
        raise RuntimeError("Cartan cubic fixture failed its Münzner certificate")
    return P, h


def fkm_quartic(l=4):
    """|x|^4 − 2(⟨P0x,x⟩^2 + ⟨P1x,x⟩^2) on R^(2l) for a rank-one Clifford system."""
    n = 2 * l
    I = np.eye(l, dtype=int)
    Z = np.zeros((l, l), dtype=int)
    P0 = np.block([[I, Z], [Z, -I]])
    P1 = np.block([[Z, I], [I, Z]])
    h = Metric.identity(n, exact=True)
    E = Polynomial.quadratic_form(h)
    q0 = Polynomial.quadratic_form(P0.astype(object))
    q1 = Polynomial.quadratic_form(P1.astype(object))
    return E * E - (q0 * q0 + q1 * q1) * 2, h


def grad_norm2(P, h):
    Hi = h.inverse
    d = [P.derivative(i) for i in range(P.dim)]
    out = Polynomial(P.dim)
    for i in range(P.dim):
        for j in range(P.dim):
            if Hi[i, j] != 0:
                out = out + d[i] * d[j] * Hi[i, j]
    return out


def munzner_exact(P, h, g, m1, m2):
    E = Polynomial.quadratic_form(h)
    a = grad_norm2(P, h) - (E ** (g - 1)) * (g * g)
    lap_target = (E ** (g // 2 - 1)) * Fraction((m2 - m1) * g * g, 2) if g % 2 == 0 else Polynomial(P.dim)
    if g % 2 and m1 != m2:
        return False
    b = laplacian_poly(P, h) - lap_target
    return a == 0 and b == 0


def cm_constant(n, g, m1, m2, displayed=False):
    """σ/h for the harmonic part of a Cartan–Münzner polynomial.

    The reduction P = Q + aE^(g/2) with a = (m2−m1)g/(2(n+g−2)) gives the factor
    1 − a^2; displayed=True returns the variant 1 − (m2−m1)^2/(n+g−2)^2, which
    agrees only when g = 2 or m1 = m2.
    """
    prod = 1
    for j in range(1, g - 1):
        prod *= n + 2 * j
    a = Fraction((m2 - m1) * (1 if displayed else g), (1 if displayed else 2) * (n + g - 2))
    return (1 - a * a) * g * math.factorial(g) * prod


def cartan_munzner_verify(P, g, m1, m2, h=None, points=500, seed=0, tol=1e-9):
    n = P.dim
    h = h or Metric.identity(n, exact=True)
    if not P.is_homogeneous() or P.degree != g or g < 2:
        raise ValueError("need a homogeneous polynomial of degree g >= 2")
    notes = []
    # seeded point check
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(points, n))
    hf = np.asarray(h.matrix, dtype=float)
    E = Polynomial.quadratic_form(h)
    Ev = E(X)
    G = grad_norm2(P, h)
    r1 = np.abs(G(X) - g * g * Ev ** (g - 1)) / np.maximum(1.0, g * g * Ev ** (g - 1))
    lap = laplacian_poly(P, h)
    target = (m2 - m1) / 2 * g * g * Ev ** (g / 2 - 1)
    r2 = np.abs(lap(X) - target) / np.maximum(1.0, np.abs(target) + np.abs(lap(X)))
    pt_res = float(max(r1.max(), r2.max()))
    exact_ok = munzner_exact(P, h, g, m1, m2)
    if pt_res > tol or not exact_ok:
        return Report("cartan_munzner", pt_res, tol, False, ["not Cartan-Münzner"], {"exact": exact_ok})
    # harmonic part
    Q = P - (E ** (g // 2)) * Fraction((m2 - m1) * g, 2 * (n + g - 2)) if g % 2 == 0 else P
    if laplacian_poly(Q, h) != 0:
        return Report("cartan_munzner", pt_res, tol, False, ["reduced polynomial is not harmonic"], {})
    from .polyfield import constant_value
    degenerate = Q == 0
    if not degenerate:
        # σ_ij = ω_{i P} ω_j^{P}
        sig = rictr_like_sigma(constant_value(deriv_tensor(Q, g)), h)
        degenerate = sig.is_zero()
    if degenerate:
        notes.append("harmonic part vanishes: degenerate fixture (P is a power of E)")
        return Report("cartan_munzner", pt_res, tol, True, notes,
                      {"degenerate": True, "exact": exact_ok, "points": points})
    const = cm_constant(n, g, m1, m2)
    diff = sig - h.tensor * const
    ok = diff.is_zero()
    if not ok:
        notes.append("sigma is not the predicted multiple of h")
        if g < 4 and m1 != m2:
            notes.append("multiplicities differ with g < 4, outside the reduction argument")
    if m1 != m2 and const != cm_constant(n, g, m1, m2, displayed=True):
        notes.append("constant uses the factor 1 - ((m2-m1)g/(2(n+g-2)))^2 from the reduction")
    return Report("cartan_munzner", pt_res, tol, ok, notes,
                  {"sigma_over_h": const if ok else None, "predicted": const, "exact": exact_ok,
                   "points": points, "degenerate": False})


def rictr_like_sigma(w, h):
    """σ_ij = ω_{i p…} ω_j^{p…}, full contraction over all but one slot."""
    n, k = w.dim, w.rank
    D = w.dense()
    up = D
    for ax in range(1, k):
        up = np.moveaxis(np.tensordot(h.inverse, up, axes=([1], [ax])), 0, ax)
    S = np.tensordot(D, up, axes=(list(range(1, k)), list(range(1, k))))
    return SymTensor.from_dense(S)


# ---------------------------------------------------------------------------
# Lie groups

@dataclass
class LieAlgebra:
    name: str
    structure: np.ndarray     # c[i, j, k] with [e_i, e_j] = c_ij^k e_k (Fractions)
    basis: list               # complex matrices (for building invariant polynomials)

    @property
    def dim(self):
        return self.structure.shape[0]

    def killing(self):
        c = self.structure
        return np.einsum("apq,bqp->ab", c, c)

    def metric(self):
        return Metric(-self.killing())

    def jacobi_defect(self):
        c = self.structure
        t = (np.einsum("ijm,mkl->ijkl", c, c) + np.einsum("jkm,mil->ijkl", c, c)
             + np.einsum("kim,mjl->ijkl", c, c))
        return max((abs(v) for v in t.reshape(-1)), default=0)

    def invariance_defect(self, h):
        """c_ab^d h_dc + c_ac^d h_bd."""
        c = self.structure
        H = h.matrix
        t = np.einsum("abd,dc->abc", c, H)
        t = t + np.swapaxes(t, 1, 2)
        return max((abs(v) for v in t.reshape(-1)), default=0)

    def curvature(self, h):
        """R_ijkl = −¼ c_ij^p c_kl^q h_pq for the bi-invariant metric h."""
        c = self.structure
        R = np.einsum("ijp,klq,pq->ijkl", c, c, h.matrix) * Fraction(-1, 4)
        return project_mcurv(R)


def _gauss_trace(M):
    t = complex(np.trace(M))
    re, im = round(t.real), round(t.imag)
    if abs(t.real - re) > 1e-9 or abs(t.imag - im) > 1e-9:
        raise ValueError("non-integral trace")
    return re, im


def _lie_from_basis(name, B, form_scale):
    """Structure constants from a basis of anti-Hermitian matrices via the trace form."""
    n = len(B)
    G = np.empty((n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            re, im = _gauss_trace(B[a] @ B[b])
            G[a, b] = Fraction(re * form_scale)
    from .symalg import exact_inverse
    Gi = exact_inverse(G)
    c = np.empty((n, n, n), dtype=object)
    for a in range(n):
        for b in range(n):
            C = B[a] @ B[b] - B[b] @ B[a]
            coords = np.array([Fraction(_gauss_trace(C @ B[d])[0] * form_scale) for d in range(n)], dtype=object)
            c[a, b] = Gi.dot(coords)
    return LieAlgebra(name, c, B)


def su(N):
    """su(N) with the integral basis i·(E_jj − E_j+1,j+1), E_jk − E_kj, i(E_jk + E_kj)."""
    B = []
    for j in range(N - 1):
        M = np.zeros((N, N), dtype=complex)
        M[j, j], M[j + 1, j + 1] = 1j, -1j
        B.append(M)
    for j in range(N):
        for k in range(j + 1, N):
            M = np.zeros((N, N), dtype=complex)
            M[j, k], M[k, j] = 1, -1
            B.append(M)
            M = np.zeros((N, N), dtype=complex)
            M[j, k] = M[k, j] = 1j
            B.append(M)
    return _lie_from_basis(f"su({N})", B, 1)


def su_cubic(L):
    """P(x) = i·tr(X^3) with X = Σ x_a B_a, an ad-invariant real cubic."""
    import itertools
    n = L.dim
    terms = {}
    for idx in itertools.product(range(n), repeat=3):
        M = L.basis[idx[0]] @ L.basis[idx[1]] @ L.basis[idx[2]]
        re, im = _gauss_trace(M)
        val = -im        # Re(i·t) = −Im t
        if val:
            e = [0] * n
            for a in idx:
                e[a] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0) + Fraction(val)
    return Polynomial(n, terms)


def ad_invariance_defect(L, w):
    """k·c_{i(i1}^p ω_{i2…ik)p}."""
    from .symalg import sym_axes
    k = w.rank
    D = w.dense()
    c = L.structure
    t = np.tensordot(c, D, axes=([2], [k - 1]))     # (i, i1, i2..ik)
    t = sym_axes(t, range(1, k + 1)) * k
    return max((abs(v) for v in t.reshape(-1)), default=0)


def lie_group_verify(L, P, coef=1):
    n = L.dim
    if n <= 3:
        raise ValueError("Lie algebra dimension must be greater than 3")
    if P.degree < 3 or not P.is_homogeneous():
        raise ValueError("invariant polynomial must be homogeneous of degree >= 3")
    notes = []
    jac = L.jacobi_defect()
    h = L.metric()
    if not h.riemannian:
        raise ValueError("minus the Killing form is not positive definite")
    inv = L.invariance_defect(h)
    w = polarize(P)
    adv = ad_invariance_defect(L, w)
    w0 = tf(w, h)
    if w0.is_zero():
        raise ValueError("harmonic part is zero: P is a polynomial in the quadratic form")
    if not (w0 - w).is_zero():
        notes.append("P is not harmonic; its trace-free part is used")
    R = L.curvature(h)
    Ric = rictr(R, h)
    ric_quarter = (Ric - h.tensor * Fraction(1, 4)).is_zero()
    sig = rictr_wedge(w0, w0, h)
    n2 = norm2(w0, h)
    sig_ok = (sig - h.tensor * (Fraction(n2) / n)).is_zero()
    se = stressenergy_residual(SolutionCandidate("lie-group", h, [Coupling(coef, w0)], ricci=Ric))
    ok = jac == 0 and inv == 0 and adv == 0 and ric_quarter and sig_ok and se.passed
    return Report("lie_group", Fraction(0) if ok else Fraction(1), 0, ok, notes,
                  {"algebra": L.name, "dim": n, "jacobi": jac, "killing_invariance": inv, "ad_invariance": adv,
                   "ricci_is_quarter_h": ric_quarter, "sigma_over_h": Fraction(n2) / n, "norm2": n2,
                   "kappa": se.values["kappa"], "stressenergy_residual": se.residual})


# ---------------------------------------------------------------------------
# hypersurfaces in the unit sphere

@dataclass(frozen=True)
class Immersion:
    """x ↦ f(x) in the unit sphere S^(n+1) ⊂ R^(n+2)."""
    dim: int
    func: object
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)


def clifford_torus():
    s = 1 / math.sqrt(2)
    return Immersion(2, lambda x: s * np.array([math.cos(x[0]), math.sin(x[0]), math.cos(x[1]), math.sin(x[1])]),
                     "clifford")


def sphere_product(p=2, q=1):
    """S^p(√(p/(p+q))) × S^q(√(q/(p+q))) ⊂ S^(p+q+1); implemented for p=2, q=1."""
    if (p, q) != (2, 1):
        raise ValueError("only S^2 x S^1 is implemented")
    r1, r2 = math.sqrt(2 / 3), math.sqrt(1 / 3)
    return Immersion(3, lambda x: np.array([r1 * math.sin(x[0]) * math.cos(x[1]), r1 * math.sin(x[0]) * math.sin(x[1]),
                                            r1 * math.cos(x[0]), r2 * math.cos(x[2]), r2 * math.sin(x[2])]),
                     "s2xs1")


def equator(n=2):
    def f(x):
        y = np.zeros(n + 2)
        s = 1 + x @ x
        y[:n] = 2 * x / s
        y[n] = (1 - x @ x) / s
        return y
    return Immersion(n, f, "equator")


def induced_metric(f, cfg):
    def h(x):
        J = cg.partial(f, x, cfg)           # (n, N)
        return J @ J.T
    return cg.MetricField(f.dim, h, f"induced:{f.name}")


def unit_normal(f, x, cfg):
    J = cg.partial(f, x, cfg)
    A = np.vstack([J, f(x)[None, :]])
    _, s, Vt = np.linalg.svd(A)
    if s[-1] < 1e-10:
        raise ValueError("degenerate induced metric")
    Z = Vt[-1]
    # orient so that (∂f, f, Z) is a positive frame; SVD signs are arbitrary
    return Z if np.linalg.det(np.vstack([A, Z[None, :]])) > 0 else -Z


def second_fundamental_form(f, x, cfg):
    Z = unit_normal(f, x, cfg)
    H = cg.partial(lambda y: cg.partial(f, y, cfg), x, cfg)     # (n, n, N)
    P = np.tensordot(H, Z, axes=([2], [0]))
    return (P + P.T) / 2


def hypersurface_verify(f, points, cfg=None, tol=1e-3, minimal=True, eps=1):
    """Gauss, Codazzi, minimality and the projectively flat equation for a hypersurface of the unit sphere."""
    cfg = cfg or cg.FDConfig(1e-2, "central4")
    n = f.dim
    h = induced_metric(f, cfg)
    scal_g = n * (n + 1)
    Pi = cg.TensorField(n, 2, lambda y: second_fundamental_form(f, y, cfg), name="II")
    worst = {"gauss": 0.0, "codazzi": 0.0, "trace": 0.0, "higgs": 0.0}
    kappa = Fraction(n - 1, n + 1) * scal_g
    for x in points:
        hm = h.at(x)
        if abs(np.linalg.det(hm.matrix)) < 1e-12:
            raise ValueError("degenerate induced metric")
        R = cg.riemann(h, x, cfg)
        II = Pi.sym(x)
        pp = kwedge(II, II, hm)
        gauss = R + pp * eps + hwedgeh(hm) * (scal_g / (n * (n + 1)))
        scale = max(1.0, R.max_abs())
        worst["gauss"] = max(worst["gauss"], gauss.max_abs() / scale)
        DP = cg.cov_deriv(Pi, h, x, cfg)
        worst["codazzi"] = max(worst["codazzi"], float(np.abs(DP - np.swapaxes(DP, 0, 1)).max()))
        worst["trace"] = max(worst["trace"], abs(float(trace(II, hm).values[0])))
        if minimal:
            w = tf(II, hm)
            ph = projectivehiggs_residual(R, w, -eps, float(kappa), hm, tol)
            worst["higgs"] = max(worst["higgs"], ph.residual)
    keys = ["gauss", "codazzi"] + (["trace", "higgs"] if minimal else [])
    res = max(worst[k] for k in keys)
    return _report("hypersurface", res, tol, [f"c = {-eps}, kappa = ((n-1)/(n+1)) scal_g"],
                   kappa=kappa, c=-eps, n=n, **worst)


# ---------------------------------------------------------------------------
# affine hypersphere connections

def ahs_constant(w, h):
    """Exact check of the ∇± = D ± ω claims for constant ω on flat space."""
    n = w.dim
    if w.rank != 3:
        raise ValueError("rank 3 required")
    tr = trace(w, h)
    if not tr.is_zero():
        raise ValueError("ω is not trace-free")
    Hi = h.inverse
    W = w.dense()
    Wup = np.einsum("ijp,pk->ijk", W, Hi)              # ω_ij^k
    # constant ω on flat space: the ±(D_iω_jk^l − D_jω_ik^l) part vanishes, so R+ = R−
    Rup = np.einsum("iml,jkm->ijkl", Wup, Wup) - np.einsum("jml,ikm->ijkl", Wup, Wup)
    ricp = np.einsum("pijp->ij", Rup)
    Rl = project_mcurv(np.einsum("ijkp,pl->ijkl", Rup, h.matrix))
    # the same curvature as 2ω_pl[iω_j]k^p
    alt = (np.einsum("pli,jkq,pq->ijkl", W, W, Hi) - np.einsum("plj,ikq,pq->ijkl", W, W, Hi))
    res = _maxabs(Rl.dense() - alt)
    n2 = norm2(w, h)
    kappa = 0 - n2
    rres = _maxabs(ricp - h.matrix * (Fraction(kappa) / n))
    # ∇±h_ij k = ∓2ω: h-compatibility in the antisymmetrized sense is automatic for symmetric ω
    nabla_h = -2 * W
    skew = _maxabs(nabla_h - np.swapaxes(nabla_h, 0, 1))
    vol = _maxabs(np.einsum("ipq,pq->i", W, Hi))
    tot = max(res, rres, skew, vol)
    return Report("ahs", tot, 0, tot == 0, [], {"kappa": kappa, "ricci_over_h": Fraction(kappa) / n,
                                               "self_conjugate": res == 0, "ricci": rres, "codazzi_h": skew,
                                               "volume": vol})


def ahs_chart(w, h, x, cfg, tol=1e-6):
    """FD version: curvature of Γ ± ω^ and the Ricci claim at x; ω a rank-3 trace-free Codazzi field."""
    n = w.dim
    ker = cg.kernel_residuals(w, h, x, cfg)
    D = cg.cov_deriv(w, h, x, cfg)
    cod = float(np.abs(D - np.swapaxes(D, 0, 1)).max()) if np.abs(w(x)).max() else 0.0
    if cod > 1e-6:
        raise ValueError("ω is not Codazzi")

    def conn(s):
        def G(y):
            W = w(y)
            return cg.christoffel(h, y, cfg) + s * np.einsum("kp,ijp->kij", np.linalg.inv(h(y)), W)
        return G

    Rp = cg.riemann_raw(h, x, cfg, conn(1))
    Rm = cg.riemann_raw(h, x, cfg, conn(-1))
    hm = h.at(x)
    R = cg.riemann(h, x, cfg)
    W = w(x)
    Wup = np.einsum("ijp,pk->ijk", W, hm.inverse)
    Rform = R.dense() + np.einsum("ijkp,pl->ijkl",
                                  np.einsum("iml,jkm->ijkl", Wup, Wup) - np.einsum("jml,ikm->ijkl", Wup, Wup), hm.matrix)
    ricp = np.einsum("pijq,pq->ij", Rp, hm.inverse)
    sc = float(np.sum(hm.inverse * rictr(R, hm).dense()))
    kappa = sc - float(norm2(w.sym(x), hm))
    res = {
        "self_conjugate": float(np.abs(Rp - Rm).max()),
        "formula": float(np.abs(Rp - Rform).max()),
        "ricci": float(np.abs(ricp - kappa / n * hm.matrix).max()),
        "volume": float(np.abs(np.einsum("ipq,pq->i", W, hm.inverse)).max()),
    }
    tot = max(res.values())
    return _report("ahs_chart", tot, tol, kappa=kappa, **res)


# ---------------------------------------------------------------------------
# inequality suites

def norm_quantities(w, h):
    n2 = float(norm2(w, h))
    ww = kwedge(w, w, h)
    r = rictr(ww, h)
    tr_r = float(np.sum(h.inverse * r.dense()))
    r0 = r - h.tensor * (tr_r / w.dim)
    return {
        "w2": n2,
        "wedge2": float(norm2_curv(ww, h)),
        "ric2": float(norm2(r, h)),
        "ric0_2": float(norm2(r0, h)),
        "tfwedge2": float(norm2_curv(tf_curv(ww, h), h)),
        "ric": r,
    }


def norm_inequalities(w, h):
    """Margins (≥ 0 when the bound holds; = 0 for identities) for every algebraic norm bound."""
    if not h.riemannian:
        raise ValueError("Riemannian metric required")
    n, k = w.dim, w.rank
    q = norm_quantities(w, h)
    w4 = q["w2"] ** 2
    m = {}
    if k >= 2:
        m["lijnorm_upper"] = (n + k - 3) / (n + 2 * (k - 2)) * w4 - q["ric2"]
        m["lijnorm_lower"] = q["ric2"] - w4 / n
        m["lijnormb"] = (n - 2) * (n + k - 2) / (n * (n + 2 * (k - 2))) * w4 - q["ric0_2"]
        m["lijklnorm_upper"] = 4 * w4 - q["wedge2"]
        m["lijklnorm_lower"] = q["wedge2"] - 2 / (n * (n - 1)) * w4
        m["lijklnormb_upper"] = (4 - 2 / (n * (n - 1))) * w4 - q["tfwedge2"] - 4 / (n - 2) * q["ric0_2"]
        m["lijklnormb_lower"] = 4 / (n - 2) * q["ric0_2"]
        ev = np.linalg.eigvals(np.linalg.solve(np.asarray(h.matrix, dtype=float), q["ric"].dense().astype(float)))
        m["katoremark"] = (n + k - 3) / (n + 2 * (k - 2)) * q["w2"] - float(np.max(ev.real))
    ident = {}
    if k == 2:
        ident["lijklnormbk2"] = 2 * (n - 2) / (n - 1) * w4 - q["tfwedge2"] - 2 * n / (n - 2) * q["ric0_2"]
        ident["lijklnormbk2b"] = 2 * w4 - q["wedge2"] - 2 * q["ric2"]
    if k == 3:
        m["lijklnormk3_upper"] = (2 * n - 1) / n * w4 - q["wedge2"] - q["ric2"]
        m["lijklnormk3_mid"] = q["ric2"]
        m["lijklnormk3_lower"] = q["wedge2"] - 2 / (n * (n - 1)) * w4
        m["lijklnormbk3"] = 2 * (n - 2) / (n - 1) * w4 - q["tfwedge2"] - (n + 2) / (n - 2) * q["ric0_2"]
    return m, ident, max(w4, 1e-300)


def norm_inequality_suite(w, h, tol=1e-10, id_tol=1e-11):
    m, ident, scale = norm_inequalities(w, h)
    worst_ineq = min(m.values(), default=0.0) / scale
    worst_id = max((abs(v) for v in ident.values()), default=0.0) / scale
    ok = worst_ineq >= -tol and worst_id <= id_tol
    res = max(-worst_ineq, worst_id, 0.0)
    return Report("norm_inequalities", res, tol, ok, [],
                  {**{key: v / scale for key, v in m.items()}, **{key: v / scale for key, v in ident.items()}})


def tfomom_residual(w, h):
    """|ω|^4 = ... consistency: |ω∧ω|^2 splits into Weyl, trace-free Ricci and scalar parts."""
    n = w.dim
    ww = kwedge(w, w, h)
    r = rictr(ww, h)
    s = float(scal(ww, h))
    r0 = r - h.tensor * (s / n)
    W = tf_curv(ww, h)
    lhs = float(norm2_curv(ww, h))
    rhs = float(norm2_curv(W, h)) + 4 / (n - 2) * float(norm2(r0, h)) + 2 / (n * (n - 1)) * s * s
    return abs(lhs - rhs) / max(1.0, lhs)


def qr_chain(w, c, kappa, h):
    """qY(ω) for Y = c(ω∧ω) − κ/(n(n−1)) h∧h, against its closed form and the rank-specific bounds."""
    n, k = w.dim, w.rank
    Y = kwedge(w, w, h) * c - hwedgeh(h) * (kappa / (n * (n - 1)))
    q = float(qY(Y, w, h))
    Q = norm_quantities(w, h)
    w2 = Q["w2"]
    closed = c * ((k - 1) / 2 * Q["wedge2"] + Q["ric2"]) + kappa * (n + k - 2) / (n * (n - 1)) * w2
    out = {"qY": q, "closed": closed, "chain": q - closed}
    if k == 2:
        out["k2"] = q - w2 * (kappa / (n - 1) + c * w2)
    elif k == 3:
        bound = w2 * ((n + 1) * kappa / (n * (n - 1)) + c * (2 * n - 1) / n * w2)
        out["k3"] = (q - bound) if c <= 0 else (bound - q)
    elif k > 3:
        bound = w2 * (kappa * (n + k - 2) / (n * (n - 1)) + c * (1 + (2 * n + 1) * (k - 1) / n) * w2)
        out["kgt3"] = (q - bound) if c <= 0 else (bound - q)
    return out


def qr_chain_check(w, c, kappa, h, tol=1e-10):
    out = qr_chain(w, c, kappa, h)
    scale = max(1.0, abs(out["qY"]), float(norm2(w, h)) ** 2)
    eq = abs(out["chain"])
    if "k2" in out:
        eq = max(eq, abs(out["k2"]))
    ineq = min(out.get("k3", 0.0), out.get("kgt3", 0.0))
    res = max(eq, -ineq, 0.0) / scale
    return _report("qr_chain", res, tol, **{k: v for k, v in out.items()})


def qrom_residual(R, w, h):
    """qR = qW + ((n+2(k−2))/(n−2))⟨rictr(ω∧ω), Ric⟩ + ((1−k)/((n−1)(n−2)))·scal·|ω|^2."""
    n, k = w.dim, w.rank
    q = float(qY(R, w, h))
    W = tf_curv(R, h)
    qW = float(qY(W, w, h))
    Ric = rictr(R, h)
    s = float(scal(R, h))
    rhs = (qW + (n + 2 * (k - 2)) / (n - 2) * float(inner(rictr_wedge(w, w, h), Ric, h))
           + (1 - k) / ((n - 1) * (n - 2)) * s * float(norm2(w, h)))
    return abs(q - rhs) / max(1.0, abs(q))


def trace_stpm(w, h):
    """Residuals of tr stp = ((2−n)/2)|ω|^2 and tr stm = ((n+2k)/(2k))|ω|^2."""
    n, k = w.dim, w.rank
    n2 = float(norm2(w, h))
    tp = float(trace(cg.stpm(w, h, 1), h).values[0])
    tm = float(trace(cg.stpm(w, h, -1), h).values[0])
    return abs(tp - (2 - n) / 2 * n2), abs(tm - (n + 2 * k) / (2 * k) * n2)


# ---------------------------------------------------------------------------
# algebra suite

METRIC_MAX_COND = 500

ALGEBRA_CHECKS = ("adjoint", "tf_idempotent", "tf_orthogonal", "hycommute_met", "hycommute_tr", "op_hpower",
                  "op_selfadjoint", "op_tf", "qyalbe", "qyalal", "qyalbetr", "tfweylnorm", "tfomom")


def _size(x, h):
    if isinstance(x, CurvTensor):
        return math.sqrt(abs(float(norm2_curv(x, h))))
    return math.sqrt(abs(float(norm2(x, h))))


def _pair_res(lhs, rhs, scale, exact):
    d = lhs - rhs
    if exact:
        return abs(d)
    return abs(float(d)) / scale if scale > 0 else abs(float(d))


def _tensor_res(d, ref, exact):
    m = d.max_abs()
    if exact:
        return abs(m)
    r = float(ref)
    return float(m) / r if r > 0 else float(m)


def algebra_trial(n, k, seed, exact=False, max_cond=METRIC_MAX_COND):
    """One seeded trial of the pointwise algebra identities; returns {check: residual}.

    Residuals are relative in float mode and exact (Fraction) in exact mode.
    The metric is a random positive definite integer matrix, not the identity,
    with condition number at most max_cond so float rounding stays below
    the 1e-10 target on rank-5 contractions (None lifts the bound).
    """
    from .curvalg import op_Y, qY_tracefree_form, qY_wedge_form
    from .symalg import met, power_of_metric, random_metric, random_tensor
    base = seed * 7919 + 31 * n + k
    h = random_metric(n, base, exact, max_cond=max_cond)
    al = random_tensor(k, n, base + 1, exact)
    be = random_tensor(k, n, base + 2, exact)
    A2 = random_tensor(k + 2, n, base + 3, exact)
    Y = random_curv(n, base + 4, exact)
    a0, b0 = tf(al, h), tf(be, h)
    sz = lambda x: _size(x, h)
    out = {}
    mb = met(be, h)
    out["adjoint"] = _pair_res(inner(A2, mb, h), inner(trace(A2, h), be, h),
                               sz(A2) * sz(mb) + sz(trace(A2, h)) * sz(be), exact)
    out["tf_idempotent"] = _tensor_res(tf(a0, h) - a0, a0.max_abs(), exact)
    if k >= 2:
        g = random_tensor(k - 2, n, base + 5, exact)
        mg = met(g, h)
        out["tf_orthogonal"] = _pair_res(inner(a0, mg, h), 0, sz(a0) * sz(mg), exact)
    else:
        out["tf_orthogonal"] = 0 if exact else 0.0
    ma = met(al, h)
    lhs = op_Y(Y, ma, h) * (k + 2)
    rhs = met(op_Y(Y, al, h), h) * k
    out["hycommute_met"] = _tensor_res(lhs - rhs, max(lhs.max_abs(), rhs.max_abs()), exact)
    if k >= 2:
        rhs = trace(op_Y(Y, al, h), h) * k
        lhs = op_Y(Y, trace(al, h), h) * (k - 2) if k > 2 else rhs * 0
        ref = max(lhs.max_abs(), rhs.max_abs(), sz(Y) * sz(al))
        out["hycommute_tr"] = _tensor_res(lhs - rhs, ref, exact)
    else:
        out["hycommute_tr"] = 0 if exact else 0.0
    m = (k + 1) // 2
    hp = power_of_metric(h, m)
    out["op_hpower"] = _tensor_res(op_Y(Y, hp, h), sz(Y) * sz(hp), exact)
    ob = op_Y(Y, be, h)
    oa = op_Y(Y, al, h)
    out["op_selfadjoint"] = _pair_res(inner(al, ob, h), inner(oa, be, h), 2 * sz(al) * sz(ob), exact)
    d = op_Y(Y, a0, h) - tf(oa, h)
    out["op_tf"] = _tensor_res(d, max(sz(Y) * sz(al), oa.max_abs()), exact)
    ob0 = op_Y(Y, b0, h)
    ref = sz(a0) * sz(ob0) + sz(a0) * sz(b0) * sz(Y) * 4
    out["qyalbe"] = _pair_res(inner(a0, ob0, h), qY_wedge_form(Y, a0, b0, h), ref, exact)
    q = qY(Y, a0, h)
    out["qyalal"] = _pair_res(q, qY_wedge_form(Y, a0, a0, h), sz(a0) ** 2 * sz(Y) * 4, exact)
    out["qyalbetr"] = _pair_res(inner(a0, ob0, h), qY_tracefree_form(Y, a0, b0, h), ref, exact)
    W = tf_curv(Y, h)
    r = rictr(Y, h)
    s = scal(Y, h)
    r0 = r - h.tensor * (s / n if not exact else Fraction(1, n) * s)
    lhs = norm2_curv(Y, h)
    c1 = Fraction(4, n - 2) if exact else 4 / (n - 2)
    c2 = Fraction(2, n * (n - 1)) if exact else 2 / (n * (n - 1))
    rhs = norm2_curv(W, h) + c1 * norm2(r0, h) + c2 * s * s
    out["tfweylnorm"] = _pair_res(lhs, rhs, abs(float(lhs)) + abs(float(rhs)), exact)
    ww = kwedge(a0, a0, h)
    rw = rictr(ww, h)
    sw = scal(ww, h)
    rw0 = rw - h.tensor * (sw / n if not exact else Fraction(1, n) * sw)
    fr = (lambda p, q_: Fraction(p, q_)) if exact else (lambda p, q_: p / q_)
    w2 = norm2(a0, h)
    lhs = fr(k - 1, 2) * norm2_curv(ww, h) + norm2(rw, h)
    rhs = (fr(k - 1, 2) * norm2_curv(tf_curv(ww, h), h) + fr(n + 2 * (k - 2), n - 2) * norm2(rw0, h)
           + fr(n + k - 2, n * (n - 1)) * w2 * w2)
    out["tfomom"] = _pair_res(lhs, rhs, abs(float(lhs)) + abs(float(rhs)), exact)
    return out


# ---------------------------------------------------------------------------
# refined Kato fixtures

def _quaternion_units():
    Li = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
    Lj = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    return Li, Lj


def _poly_field(T, name):
    return cg.TensorField.from_polynomials(T, name)


def _flat_codazzi(n, k, m, seed):
    from .polyfield import random_polynomial
    F = random_polynomial(n, k + m, seed)
    Q = dict(harmonic_decompose(F)).get(0)
    return _poly_field(deriv_tensor(Q, k), f"D^{k}(harmonic deg {k + m})")


def _tf_power(n, k):
    """tf(x^{⊙k}) as a polynomial tensor field on flat space."""
    from .polyfield import Polynomial
    from .symalg import multi_indices, sym_product
    xs = [Polynomial.variable(n, i) for i in range(n)]
    vals = np.empty(n, dtype=object)
    vals[:] = xs
    x = SymTensor(n, 1, vals)
    t = x
    for _ in range(k - 1):
        t = sym_product(t, x)
    # subtract traces with h = δ, using the exact symbolic projection
    return tf(t, Metric.identity(n, exact=True))


def kato_cases(seed=0):
    """[(name, field, metric, class, point sampler)] spanning the three kernel classes."""
    rng = np.random.default_rng(seed)
    cases = []
    for k, m, n in ((1, 1, 3), (2, 1, 3), (2, 2, 3), (3, 1, 3), (2, 1, 4)):
        cases.append((f"codazzi flat n={n} k={k} m={m}", _flat_codazzi(n, k, m, int(rng.integers(1 << 30))),
                      cg.flat(n), "codazzi", "cube"))
    for n in (3, 4):
        A = rng.normal(size=(n, n))
        A = A - A.T
        cases.append((f"killing flat n={n} k=1", cg.TensorField(n, 1, lambda y, A=A: A @ y, lambda y, A=A: A.T.copy()),
                      cg.flat(n), "killing", "cube"))
    A = rng.normal(size=(3, 3))
    A = A - A.T
    cases.append(("killing sphere n=3 k=1",
                  cg.TensorField(3, 1, lambda y, A=A: 4 / (1 + y @ y) ** 2 * (A @ y)), cg.sphere(3), "killing", "ball"))
    Li, Lj = _quaternion_units()

    def quat(y):
        a, b = Li @ y, Lj @ y
        return (np.outer(a, b) + np.outer(b, a)) / 2

    cases.append(("killing flat n=4 k=2", cg.TensorField(4, 2, quat), cg.flat(4), "killing", "cube"))
    for k in (1, 2, 3):
        T = _tf_power(3, k)
        cases.append((f"both flat n=3 k={k}", _poly_field(T, f"tf(x^{k})"), cg.flat(3), "both", "cube"))

    def df(y):
        return -4 * y / (1 + y @ y) ** 2

    cases.append(("both sphere n=3 k=1", cg.TensorField(3, 1, df), cg.sphere(3), "both", "ball"))
    return cases


def sample_point(kind, n, rng):
    if kind == "ball":
        v = rng.normal(size=n)
        return v / np.linalg.norm(v) * 0.8 * rng.uniform() ** (1 / n)
    return rng.uniform(-1, 1, size=n)


def kato_suite(samples=200, seed=0, cfg=None, tol=1e-8):
    """Margins of the refined Kato inequalities over seeded points cycling through every fixture."""
    cfg = cfg or cg.FDConfig()
    cases = kato_cases(seed)
    rng = np.random.default_rng(seed + 1)
    rows = []
    for i in range(samples):
        name, w, h, cls, kind = cases[i % len(cases)]
        x = sample_point(kind, w.dim, rng)
        while float(np.abs(w(x)).max()) < 1e-3:
            x = sample_point(kind, w.dim, rng)
        r = cg.kato_check(w, h, x, cfg, cls, subharmonic=(cls == "codazzi" and i < len(cases)))
        rows.append((name, cls, r))
    worst = min(r.margin for _, _, r in rows)
    looser = any(r.unrefined_margin > r.margin + 1e-12 for _, _, r in rows)
    subs = [r.subharmonic for _, _, r in rows if r.subharmonic is not None]
    sub_ok = all(s >= -1e-6 for s in subs)
    ok = worst >= -tol and looser and sub_ok
    per_class = {}
    for _, cls, r in rows:
        per_class[cls] = min(per_class.get(cls, np.inf), r.margin)
    return Report("kato", max(0.0, -worst), tol, ok,
                  [] if looser else ["unrefined constant is never looser"],
                  {"samples": samples, "worst_margin": worst, "unrefined_looser": looser,
                   "per_class_worst": per_class, "subharmonic_min": min(subs) if subs else None})
