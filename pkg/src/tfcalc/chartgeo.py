"""
Finite-difference geometry on a single coordinate chart.

Fields are plain closures ``x -> dense covariant array``. Every differential
operator is built from one primitive, ``cov_deriv_dense``, which applies the
Levi-Civita connection to whatever field it is handed; second-order operators
simply hand it another first-order field. The first slot of a derivative is
always the differentiation slot.
"""

import ast
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .curvalg import CurvTensor, kwedge, op_Y, project_mcurv, qY, rictr, rictr_wedge, scal
from .symalg import (
    Metric, SymTensor, cartan_product, clie_part, dense_inner, dense_norm2, divergence_part,
    ih, klie_part, random_tensor, sym_axes, tf, tlie_part,
)


@dataclass(frozen=True)
class FDConfig:
    step: float = 1e-3
    scheme: str = "central4"     # or "central2"
    refine: float = 2.0

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.scheme not in _STENCILS:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def refined(self):
        return FDConfig(self.step / self.refine, self.scheme, self.refine)


_STENCILS = {
    "central2": ((1, 0.5), (-1, -0.5)),
    "central4": ((2, -1 / 12), (1, 8 / 12), (-1, -8 / 12), (-2, 1 / 12)),
}


@dataclass(frozen=True)
class MetricField:
    dim: int
    func: Callable
    name: str = ""
    christoffel_exact: Optional[Callable] = None
    curvature_exact: Optional[Callable] = None      # x -> dense R_ijkl

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def at(self, x):
        return Metric(self(x))

    def scaled(self, f, name=None):
        """The conformally related metric f*h for a positive function f."""
        return MetricField(self.dim, lambda x: f(x) * self.func(x), name or f"{self.name}*f")


@dataclass(frozen=True)
class TensorField:
    """A covariant tensor field; ``func`` returns a dense array with ``rank`` axes."""
    dim: int
    rank: int
    func: Callable
    deriv: Optional[Callable] = None   # exact coordinate partials, derivative slot first
    name: str = ""

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def sym(self, x):
        v = self(x)
        if self.rank == 0:
            return SymTensor(self.dim, 0, np.array([float(v)]))
        return SymTensor.from_dense(v)

    def scaled(self, f, name=None):
        return TensorField(self.dim, self.rank, lambda x: f(x) * self.func(x), name=name or self.name)

    @classmethod
    def from_polynomials(cls, T, name=""):
        """Field whose components are the Polynomial entries of a SymTensor T."""
        n, k = T.dim, T.rank
        comps = T.dense()
        polys = list(comps.reshape(-1)) if k else [T.values[0]]
        dpolys = [[p.derivative(i) for p in polys] for i in range(n)]
        shape = (n,) * k

        def func(x):
            return np.array([p(x) for p in polys]).reshape(shape)

        def deriv(x):
            return np.array([[p(x) for p in row] for row in dpolys]).reshape((n,) + shape)

        return cls(n, k, func, deriv, name)


# ---------------------------------------------------------------------------
# primitive derivatives

def partial(F, x, cfg):
    """Coordinate partials of a field at x, derivative slot first."""
    x = np.asarray(x, dtype=float)
    s = cfg.step
    rows = []
    for i in range(x.size):
        acc = 0.0
        for m, c in _STENCILS[cfg.scheme]:
            xp = x.copy()
            xp[i] += m * s
            acc = acc + c * np.asarray(F(xp), dtype=float)
        rows.append(acc / s)
    return np.stack(rows)


def christoffel(h, x, cfg):
    """Γ^k_ij as G[k, i, j]."""
    hx = h(x)
    dh = partial(h, x, cfg)                                  # dh[c, a, b] = ∂_c h_ab
    low = 0.5 * (np.einsum("ijk->kij", dh) + np.einsum("jik->kij", dh) - dh)   # Γ_{k i j}
    try:
        Hi = np.linalg.inv(hx)
    except np.linalg.LinAlgError:
        raise ValueError("singular metric at sample point") from None
    return np.einsum("kl,lij->kij", Hi, low)


def _gamma_func(h, cfg, connection=None):
    if connection is not None:
        return connection
    return lambda y: christoffel(h, y, cfg)


def cov_deriv_dense(F, h, x, cfg, dF=None, connection=None):
    """∇F for a covariant dense field F (any number of slots)."""
    G = _gamma_func(h, cfg, connection)(x)
    val = np.asarray(F(x), dtype=float)
    out = (partial(F, x, cfg) if dF is None else np.asarray(dF, dtype=float)).copy()
    for s in range(val.ndim):
        t = np.tensordot(G, val, axes=([0], [s]))            # (i, a, rest)
        out -= np.moveaxis(t, 1, s + 1)
    return out


def cov_deriv_up(F, h, x, cfg, connection=None):
    """∇F for a contravariant dense field F."""
    G = _gamma_func(h, cfg, connection)(x)
    val = np.asarray(F(x), dtype=float)
    out = partial(F, x, cfg).copy()
    for s in range(val.ndim):
        t = np.tensordot(G, val, axes=([2], [s]))            # (a, i, rest)
        out += np.moveaxis(np.swapaxes(t, 0, 1), 1, s + 1)
    return out


def cov_deriv(w, h, x, cfg):
    """Dω at x (rank k+1, first slot not symmetrized)."""
    dF = w.deriv(np.asarray(x, dtype=float)) if w.deriv is not None else None
    return cov_deriv_dense(w, h, x, cfg, dF=dF)


def D_field(w, h, cfg):
    return TensorField(w.dim, w.rank + 1, lambda y: cov_deriv(w, h, y, cfg), name=f"D({w.name})")


def gradient(f, x, cfg):
    return partial(f, x, cfg)


def laplacian_scalar(f, h, x, cfg):
    grad = lambda y: partial(f, y, cfg)
    H = cov_deriv_dense(grad, h, x, cfg)
    return float(np.sum(np.linalg.inv(h(x)) * H))


# ---------------------------------------------------------------------------
# curvature

def riemann_up(h, x, cfg, connection=None):
    """R_ijk^l = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_imΓ^m_jk − Γ^l_jmΓ^m_ik."""
    Gf = _gamma_func(h, cfg, connection)
    G = Gf(x)
    dG = partial(Gf, x, cfg)
    return (np.einsum("iljk->ijkl", dG) - np.einsum("jlik->ijkl", dG)
            + np.einsum("lim,mjk->ijkl", G, G) - np.einsum("ljm,mik->ijkl", G, G))


def riemann_raw(h, x, cfg, connection=None):
    return np.einsum("ijkp,pl->ijkl", riemann_up(h, x, cfg, connection), h(x))


def riemann(h, x, cfg):
    """Curvature as a CurvTensor, cleaned of FD noise by projection."""
    return project_mcurv(riemann_raw(h, x, cfg))


def ricci(h, x, cfg):
    return rictr(riemann(h, x, cfg), h.at(x))


def scalar_curvature(h, x, cfg):
    return float(scal(riemann(h, x, cfg), h.at(x)))


def op_R(w, h, x, cfg, R=None):
    R = riemann(h, x, cfg) if R is None else R
    return op_Y(R, w.sym(x), h.at(x))


# ---------------------------------------------------------------------------
# first-order operators

def clie(w, h, x, cfg):
    return clie_part(cov_deriv(w, h, x, cfg), h.at(x))


def klie(w, h, x, cfg):
    return klie_part(cov_deriv(w, h, x, cfg), h.at(x))


def divergence(w, h, x, cfg):
    return divergence_part(cov_deriv(w, h, x, cfg), h.at(x))


def tlie(w, h, x, cfg):
    return tlie_part(cov_deriv(w, h, x, cfg), h.at(x))


def ih_at(sig, h, x, k):
    return ih(sig, h.at(x), k)


def _as_dense(t):
    return t.dense() if isinstance(t, SymTensor) else np.asarray(t)


def clie_field(w, h, cfg):
    return TensorField(w.dim, w.rank + 1, lambda y: clie(w, h, y, cfg).dense(), name=f"L({w.name})")


def klie_field(w, h, cfg):
    return TensorField(w.dim, w.rank + 1, lambda y: klie(w, h, y, cfg), name=f"K({w.name})")


def div_field(w, h, cfg):
    return TensorField(w.dim, w.rank - 1, lambda y: _as_dense(divergence(w, h, y, cfg)), name=f"div({w.name})")


def check_tracefree(w, h, x, tol=1e-8):
    from .symalg import trace
    if w.rank < 2:
        return
    t = trace(w.sym(x), h.at(x))
    scale = max(1.0, float(np.abs(w(x)).max()))
    if t.max_abs() > tol * scale:
        raise ValueError("field is not trace-free at the sample point")


# ---------------------------------------------------------------------------
# second-order operators

def _trace01(T, Hi):
    return np.tensordot(Hi, T, axes=([0, 1], [0, 1]))


def laplacian(w, h, x, cfg):
    DD = cov_deriv_dense(D_field(w, h, cfg), h, x, cfg)
    return _trace01(DD, np.linalg.inv(h(x)))


def div_clie(w, h, x, cfg):
    DL = cov_deriv_dense(clie_field(w, h, cfg), h, x, cfg)
    return _trace01(DL, np.linalg.inv(h(x)))


def clie_div(w, h, x, cfg):
    d = div_field(w, h, cfg)
    return clie_part(cov_deriv_dense(d, h, x, cfg), h.at(x)).dense()


def kliea_klie(w, h, x, cfg):
    """−D^p K(ω)_{p(i1…ik)}."""
    DK = cov_deriv_dense(klie_field(w, h, cfg), h, x, cfg)
    t = _trace01(DK, np.linalg.inv(h(x)))
    return -sym_axes(t, range(t.ndim))


def weitzenbock_terms(w, h, x, cfg):
    return {
        "lap": laplacian(w, h, x, cfg),
        "opR": op_R(w, h, x, cfg).dense(),
        "div_clie": div_clie(w, h, x, cfg),
        "clie_div": clie_div(w, h, x, cfg),
        "kliea_klie": kliea_klie(w, h, x, cfg),
    }


def culap_coefficients(n, k, alpha):
    """(a, b, c) with Δω + αop_R(ω) = a·div L + b·L div + c·K*K."""
    a = 1 + alpha
    b = (n + 2 * (k - 2)) * (k - alpha * (n + k - 2)) / ((n + k - 3) * (n + 2 * (k - 1)))
    c = 2 * (alpha - k) / (k + 1)
    return a, b, c


WEITZENBOCK = ("divlie", "lapom", "klieweitzenbock", "lapom3", "lapom2", "culap", "differentialr",
               "lapomsq", "lapomdivlie", "lapomliediv")


def weitzenbock_residual(w, h, x, cfg, which, alpha=0.0, terms=None):
    """Max-norm residual of one second-order identity at x (both sides by nested FD)."""
    n, k = w.dim, w.rank
    if which in ("lapomsq", "lapomdivlie", "lapomliediv"):
        return _scalar_weitzenbock(w, h, x, cfg, which)
    if which == "differentialr":
        return _differentialr(w, h, x, cfg)
    t = weitzenbock_terms(w, h, x, cfg) if terms is None else terms
    lap, R, dL, Ld, KK = t["lap"], t["opR"], t["div_clie"], t["clie_div"], t["kliea_klie"]
    if which == "divlie":
        lhs = lap + k * R
        rhs = (k + 1) * dL - k * (n + 2 * (k - 2)) / (n + 2 * (k - 1)) * Ld
    elif which == "lapom":
        lhs = lap
        rhs = dL + k * (n + 2 * (k - 2)) / ((n + k - 3) * (n + 2 * (k - 1))) * Ld - 2 * k / (k + 1) * KK
    elif which == "klieweitzenbock":
        lhs = R
        rhs = dL - (n + k - 2) * (n + 2 * (k - 2)) / ((n + k - 3) * (n + 2 * (k - 1))) * Ld + 2 / (k + 1) * KK
    elif which == "lapom3":
        lhs = lap - R
        rhs = (n + 2 * (k - 2)) / (n + k - 3) * Ld - 2 * KK
    elif which == "lapom2":
        lhs = lap + k / (n + k - 2) * R
        rhs = (n + 2 * (k - 1)) / (n + k - 2) * dL - 2 * k * (n + k - 3) / ((k + 1) * (n + k - 2)) * KK
    elif which == "culap":
        a, b, c = culap_coefficients(n, k, alpha)
        lhs = lap + alpha * R
        rhs = a * dL + b * Ld + c * KK
    else:
        raise ValueError(f"unknown identity {which!r}")
    return float(np.abs(lhs - rhs).max())


def _differentialr(w, h, x, cfg):
    """D^p D_(i1 ω_{i2…ik)p} − D_(i1 D^p ω_{i2…ik)p} = op_R(ω)."""
    k = w.rank
    Hi = np.linalg.inv(h(x))
    DD = cov_deriv_dense(D_field(w, h, cfg), h, x, cfg)         # DD[a, b, c...] = D_a D_b ω_c...
    first = np.tensordot(Hi, DD, axes=([0, 1], [0, 2]))         # (b, rest of ω)
    first = sym_axes(first, range(k))
    second = cov_deriv_dense(div_field(w, h, cfg), h, x, cfg)
    second = sym_axes(second, range(k))
    R = op_R(w, h, x, cfg).dense()
    return float(np.abs(first - second - R).max())


def _scalar_weitzenbock(w, h, x, cfg, which):
    n, k = w.dim, w.rank
    norm = lambda y: float(dense_norm2(w(y), h.at(y)))
    lhs = 0.5 * laplacian_scalar(norm, h, x, cfg)
    hx = h.at(x)
    om = w(x)
    Dw = cov_deriv(w, h, x, cfg)
    t = weitzenbock_terms(w, h, x, cfg)
    ip = lambda a: float(dense_inner(om, a, hx))
    q = float(qY(riemann(h, x, cfg), w.sym(x), hx))
    base = float(dense_norm2(Dw, hx))
    if which == "lapomsq":
        rhs = base + (k + 1) * ip(t["div_clie"]) - k * (n + 2 * (k - 2)) / (n + 2 * (k - 1)) * ip(t["clie_div"]) - k * q
    elif which == "lapomdivlie":
        rhs = (base + (n + 2 * (k - 1)) / (n + k - 2) * ip(t["div_clie"])
               - 2 * k * (n + k - 3) / ((k + 1) * (n + k - 2)) * ip(t["kliea_klie"]) - k / (n + k - 2) * q)
    else:
        rhs = base + (n + 2 * (k - 2)) / (n + k - 3) * ip(t["clie_div"]) - 2 * ip(t["kliea_klie"]) + q
    return abs(lhs - rhs)


def richardson(fn, cfg):
    """Residual at step s and s/refine plus the observed order."""
    r1 = fn(cfg)
    r2 = fn(cfg.refined())
    order = math.log(r1 / r2) / math.log(cfg.refine) if r1 > 0 and r2 > 0 else float("inf")
    return {"residual": r1, "residual_refined": r2, "ratio": r1 / r2 if r2 > 0 else float("inf"), "order": order}


# ---------------------------------------------------------------------------
# Schouten bracket

def raise_field(w, h):
    def f(y):
        v = w(y)
        Hi = np.linalg.inv(h(y))
        for ax in range(v.ndim):
            v = np.moveaxis(np.tensordot(Hi, v, axes=([1], [ax])), 0, ax)
        return v
    return TensorField(w.dim, w.rank, f, name=f"{w.name}#")


def lower_dense(v, hx):
    for ax in range(v.ndim):
        v = np.moveaxis(np.tensordot(hx, v, axes=([1], [ax])), 0, ax)
    return v


def schouten_bracket(X, Y, h, x, cfg, connection=None):
    """{X,Y} for contravariant symmetric fields, using a torsion-free connection."""
    k, l = X.rank, Y.rank
    Xv, Yv = X(x), Y(x)
    DX = cov_deriv_up(X, h, x, cfg, connection)      # DX[p, i...]
    DY = cov_deriv_up(Y, h, x, cfg, connection)
    out = 0.0
    if k >= 1:
        t = np.tensordot(Xv, DY, axes=([0], [0]))    # X^{p I} ∇_p Y^{J}
        out = out + k * sym_axes(t, range(t.ndim))
    if l >= 1:
        t = np.tensordot(Yv, DX, axes=([0], [0]))
        out = out - l * sym_axes(t, range(t.ndim))
    return out


def metric_bivector(h):
    return TensorField(h.dim, 2, lambda y: np.linalg.inv(h(y)), name="h^-1")


def perturbed_connection(h, cfg, seed=0, eps=0.1):
    """Levi-Civita plus a smooth symmetric difference tensor (still torsion-free)."""
    rng = np.random.default_rng(seed)
    n = h.dim
    A = rng.uniform(-1, 1, size=(n, n, n))
    A = (A + np.swapaxes(A, 1, 2)) / 2
    B = rng.uniform(-1, 1, size=(n, n, n))
    B = (B + np.swapaxes(B, 1, 2)) / 2
    return lambda y: christoffel(h, y, cfg) + eps * (A * math.sin(y.sum()) + B * math.cos(y[0]))


# ---------------------------------------------------------------------------
# identity checks

def decomposition_check(w, h, x, cfg):
    """Residuals of Dω = L + T + ih(div) and of the norm split."""
    n, k = w.dim, w.rank
    hx = h.at(x)
    T = cov_deriv(w, h, x, cfg)
    L = clie_part(T, hx).dense()
    K = klie_part(T, hx)
    Tl = tlie_part(T, hx)
    div = divergence_part(T, hx)
    I = ih(div, hx, k)
    scale = max(1.0, float(np.abs(T).max()))
    r1 = float(np.abs(T - L - Tl - I).max()) / scale
    coeff = k * (n + 2 * (k - 2)) / ((n + k - 3) * (n + 2 * (k - 1)))
    from .symalg import norm2
    n2 = float(dense_norm2(T, hx))
    split = float(dense_norm2(L, hx)) + 2 * k / (k + 1) * float(dense_norm2(K, hx)) + coeff * float(norm2(div, hx))
    r2 = abs(n2 - split) / max(1.0, n2)
    return r1, r2


def conformal_check(w, h, f, x, cfg, alpha=0.5):
    """Residuals of the three conformal scaling laws plus the stp/stm law (relative)."""
    n, k = w.dim, w.rank
    ht = h.scaled(f)
    fx = float(f(x))

    def rel(a, b):
        a, b = _as_dense(a), _as_dense(b)
        return float(np.abs(a - b).max()) / max(1.0, float(np.abs(b).max()))

    r_clie = rel(clie(w.scaled(lambda y: f(y) ** k), ht, x, cfg), fx ** k * _as_dense(clie(w, h, x, cfg)))
    e = (k - 1) / 2
    r_klie = rel(klie(w.scaled(lambda y: f(y) ** e), ht, x, cfg), fx ** e * klie(w, h, x, cfg))
    e = 1 - n / 2
    r_div = rel(fx * _as_dense(divergence(w.scaled(lambda y: f(y) ** e), ht, x, cfg)),
                fx ** e * _as_dense(divergence(w, h, x, cfg)))
    om = w.sym(x)
    r_st = 0.0
    for sign in (1, -1):
        lhs = stpm(om * fx ** alpha, ht.at(x), sign)
        rhs = stpm(om, h.at(x), sign) * fx ** (2 * alpha + 1 - k)
        r_st = max(r_st, rel(lhs, rhs))
    return r_clie, r_klie, r_div, r_st


def derivation_check(a, b, h, x, cfg):
    """|L(α∘β) − L(α)∘β − α∘L(β)| at x."""
    prod = TensorField(a.dim, a.rank + b.rank,
                       lambda y: cartan_product(a.sym(y), b.sym(y), h.at(y)).dense())
    hx = h.at(x)
    lhs = clie(prod, h, x, cfg)
    rhs = cartan_product(clie(a, h, x, cfg), b.sym(x), hx) + cartan_product(a.sym(x), clie(b, h, x, cfg), hx)
    return float((lhs - rhs).max_abs())


# stress-energy type tensors

def stpm(w, hm, sign):
    """stp (sign=+1) or stm (sign=-1) of a trace-free tensor at a point."""
    from .symalg import norm2
    k = w.rank
    n2 = norm2(w, hm)
    R = rictr_wedge(w, w, hm)
    if sign > 0:
        return R - hm.tensor * (0.5 * n2)
    return R + hm.tensor * ((0.5 if k == 1 else 1 / (2 * k)) * n2)


def _one_forms(w, h, x, cfg):
    """κ-cons, c-cons and div-cons one-forms."""
    hx = h.at(x)
    Hi = hx.inverse
    T = cov_deriv(w, h, x, cfg)
    om = w(x)
    om_up = om
    for ax in range(om.ndim):
        om_up = np.moveaxis(np.tensordot(Hi, om_up, axes=([1], [ax])), 0, ax)
    K = klie_part(T, hx)
    L = clie_part(T, hx).dense()
    div = divergence_part(T, hx)
    ax = list(range(1, w.rank + 1))
    kc = np.tensordot(K, om_up, axes=(ax, list(range(w.rank))))
    cc = np.tensordot(L, om_up, axes=(ax, list(range(w.rank))))
    if w.rank == 1:
        dc = om * float(div.values[0])
    else:
        d_up = div.dense()
        for a in range(d_up.ndim):
            d_up = np.moveaxis(np.tensordot(Hi, d_up, axes=([1], [a])), 0, a)
        dc = np.tensordot(om, d_up, axes=(list(range(1, w.rank)), list(range(w.rank - 1))))
    return kc, cc, dc


def div_identities(w, h, x, cfg):
    """Residuals of the divergence identities for rictr(ω∧ω), |ω|^2 and stp/stm."""
    n, k = w.dim, w.rank
    kc, cc, dc = _one_forms(w, h, x, cfg)
    Hi = np.linalg.inv(h(x))
    ric = TensorField(n, 2, lambda y: rictr_wedge(w.sym(y), w.sym(y), h.at(y)).dense())
    div_ric = _trace01(cov_deriv_dense(ric, h, x, cfg), Hi)
    half_d = 0.5 * partial(lambda y: float(dense_norm2(w(y), h.at(y))), x, cfg)
    sp = TensorField(n, 2, lambda y: stpm(w.sym(y), h.at(y), 1).dense())
    sm = TensorField(n, 2, lambda y: stpm(w.sym(y), h.at(y), -1).dense())
    div_sp = _trace01(cov_deriv_dense(sp, h, x, cfg), Hi)
    div_sm = _trace01(cov_deriv_dense(sm, h, x, cfg), Hi)
    a = (n + k - 3) * (n + 2 * (k - 1))
    res = {
        "divrictr": div_ric - (-2 / (k + 1) * kc + cc + (1 + (n - 2) / a) * dc),
        "divnorm": half_d - (2 * k / (k + 1) * kc + cc + k * (n + 2 * (k - 2)) / a * dc),
        "divrictrk": half_d - div_ric - (2 * kc - (n - 2) / (n + k - 3) * dc),
        "divrictrc": half_d / k + div_ric - ((k + 1) / k * cc + (n + 2 * k) / (n + 2 * (k - 1)) * dc),
        "divstp": div_sp - (-2 * kc + (n - 2) / (n + k - 3) * dc),
        "divstm": div_sm - ((k + 1) / k * cc + (n + 2 * k) / (n + 2 * (k - 1)) * dc),
    }
    return {key: float(np.abs(v).max()) for key, v in res.items()}


# ---------------------------------------------------------------------------
# refined Kato inequalities

KATO_CLASSES = ("codazzi", "killing", "both")


def kato_constant(cls, n, k):
    if cls == "codazzi":
        return (n + k - 2) / (n + 2 * (k - 1))
    if cls == "killing":
        return k / (k + 1)
    if cls == "both":
        return k / (n + 2 * (k - 1))
    raise ValueError(f"unknown class {cls!r}")


def kernel_residuals(w, h, x, cfg):
    """Relative sizes of L, K and div against |Dω|."""
    from .symalg import norm2
    hx = h.at(x)
    T = cov_deriv(w, h, x, cfg)
    scale = math.sqrt(max(float(dense_norm2(T, hx)), 1e-300))
    L = math.sqrt(abs(float(norm2(clie_part(T, hx), hx)))) / scale
    K = math.sqrt(abs(float(dense_norm2(klie_part(T, hx), hx)))) / scale
    d = divergence_part(T, hx)
    dv = math.sqrt(abs(float(norm2(d, hx)))) / scale
    return {"clie": L, "klie": K, "div": dv}


_CLASS_KERNELS = {"codazzi": ("klie", "div"), "killing": ("clie", "div"), "both": ("clie", "klie")}


@dataclass(frozen=True)
class KatoResult:
    lhs: float
    rhs: float
    margin: float              # (rhs − lhs)/|Dω|^2
    unrefined_margin: float    # same with constant 1
    kernel: dict
    subharmonic: Optional[float] = None


def kato_check(w, h, x, cfg, cls, kernel_tol=1e-6, subharmonic=False):
    if cls not in KATO_CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    hx = h.at(x)
    if not hx.riemannian:
        raise ValueError("Riemannian metric required")
    n, k = w.dim, w.rank
    ker = kernel_residuals(w, h, x, cfg)
    bad = [op for op in _CLASS_KERNELS[cls] if ker[op] > kernel_tol]
    if bad:
        raise ValueError(f"kernel-class validation failed for {cls}: {bad}")
    T = cov_deriv(w, h, x, cfg)
    om = w(x)
    n_om = float(dense_norm2(om, hx))
    if n_om <= 0:
        raise ValueError("ω vanishes at the sample point")
    # d|ω|^2 = 2⟨ω, D_i ω⟩
    dn = 2 * np.array([float(dense_inner(om, T[i], hx)) for i in range(n)])
    lhs = float(dn @ hx.inverse @ dn) / (4 * n_om)
    DT = float(dense_norm2(T, hx))
    c = kato_constant(cls, n, k)
    rhs = c * DT
    sub = None
    if subharmonic and cls == "codazzi" and n > 2:
        p = (n - 2) / (n + k - 2)
        f = lambda y: float(dense_norm2(w(y), h.at(y))) ** (p / 2)
        lap = laplacian_scalar(f, h, x, cfg)
        q = float(qY(riemann(h, x, cfg), w.sym(x), hx))
        sub = n_om ** ((n + 2 * (k - 1)) / (2 * (n + k - 2))) * lap - (n - 2) / (n + k - 2) * q
    denom = DT if DT > 0 else 1.0
    return KatoResult(lhs, rhs, (rhs - lhs) / denom, (DT - lhs) / denom, ker, sub)


# ---------------------------------------------------------------------------
# fixtures

def _conformal_field(n, phi, dphi, name, curvature=None):
    """h = e^{2φ}δ with closed-form Christoffel symbols."""
    def func(x):
        return math.exp(2 * phi(x)) * np.eye(n)

    def gam(x):
        g = np.asarray(dphi(x))
        I = np.eye(n)
        return np.einsum("ki,j->kij", I, g) + np.einsum("kj,i->kij", I, g) - np.einsum("ij,k->kij", I, g)

    return MetricField(n, func, name, gam, curvature)


def flat(n=3):
    return MetricField(n, lambda x: np.eye(n), "flat", lambda x: np.zeros((n, n, n)),
                       lambda x: np.zeros((n,) * 4))


def torus(n=3):
    return MetricField(n, lambda x: np.eye(n), "torus", lambda x: np.zeros((n, n, n)),
                       lambda x: np.zeros((n,) * 4))


def _hh(hm):
    return np.einsum("ik,jl->ijkl", hm, hm) - np.einsum("il,jk->ijkl", hm, hm)


def sphere(n=3):
    """Stereographic chart of the unit sphere: 4δ/(1+|x|^2)^2."""
    phi = lambda x: math.log(2) - math.log1p(x @ x)
    dphi = lambda x: -2 * x / (1 + x @ x)
    m = _conformal_field(n, phi, dphi, "sphere")
    return MetricField(n, m.func, "sphere", m.christoffel_exact, lambda x: -_hh(m.func(x)))


def hyperbolic(n=3):
    """Poincaré ball: 4δ/(1−|x|^2)^2."""
    phi = lambda x: math.log(2) - math.log(1 - x @ x)
    dphi = lambda x: 2 * x / (1 - x @ x)
    m = _conformal_field(n, phi, dphi, "hyperbolic")
    return MetricField(n, m.func, "hyperbolic", m.christoffel_exact, lambda x: _hh(m.func(x)))


def conformal(expr, n=3):
    """e^{2f}δ for an expression f in the chart grammar."""
    f = parse_expr(expr, n)
    return MetricField(n, lambda x: math.exp(2 * f(x)) * np.eye(n), f"conformal:{expr}")


def perturbed(seed=0, eps=0.1, n=3):
    """δ + ε S(x) with S a smooth symmetric trigonometric matrix field."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, size=(n, n))
    A = (A + A.T) / 2
    B = rng.uniform(-1, 1, size=(n, n))
    B = (B + B.T) / 2
    wa = rng.integers(1, 3, size=n)
    wb = rng.integers(1, 3, size=n)

    def func(x):
        return np.eye(n) + eps * (A * math.sin(wa @ x) + B * math.cos(wb @ x))

    return MetricField(n, func, f"perturbed:{seed},{eps}")


def get_fixture(key, n=3):
    """Look up a metric fixture by registry key."""
    if key == "flat":
        return flat(n)
    if key == "torus":
        return torus(n)
    if key == "sphere":
        return sphere(n)
    if key == "hyperbolic":
        return hyperbolic(n)
    if key.startswith("conformal:"):
        return conformal(key.split(":", 1)[1], n)
    if key.startswith("perturbed:"):
        parts = key.split(":", 1)[1].split(",")
        if len(parts) != 2:
            raise ValueError("perturbed fixture needs 'seed,eps'")
        return perturbed(int(parts[0]), float(parts[1]), n)
    raise KeyError(f"unknown fixture {key!r}")


FIXTURES = ("flat", "sphere", "hyperbolic", "torus", "conformal:<expr>", "perturbed:<seed,eps>")


# ---------------------------------------------------------------------------
# chart expression grammar
#
#   expr   := term (("+" | "-") term)*
#   term   := factor (("*" | "/") factor)*
#   factor := ("+" | "-") factor | power
#   power  := atom ("**" factor)?
#   atom   := number | "pi" | "x" digit+ | func "(" expr ")" | "(" expr ")"
#   func   := "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "sinh" | "cosh" | "tanh"
#
# Coordinates are x1..xn. Parsing goes through Python's ast with a whitelist.

_FUNCS = {name: getattr(math, name) for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")}
_ALLOWED = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call, ast.Load,
            ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def parse_expr(text, n):
    """Compile a chart expression into a function of the coordinate vector."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise ValueError(f"cannot parse expression {text!r}") from e
    names = {f"x{i + 1}" for i in range(n)} | {"pi"}
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"disallowed syntax in {text!r}: {type(node).__name__}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ValueError("only numeric constants are allowed")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or len(node.args) != 1 or node.keywords:
                raise ValueError(f"unknown function in {text!r}")
        elif isinstance(node, ast.Name) and node.id not in names and node.id not in _FUNCS:
            raise ValueError(f"unknown name {node.id!r}")
    code = compile(tree, "<expr>", "eval")

    def f(x):
        env = {f"x{i + 1}": float(x[i]) for i in range(n)}
        env["pi"] = math.pi
        env.update(_FUNCS)
        return eval(code, {"__builtins__": {}}, env)

    return f


def field_from_expressions(n, k, exprs, name="user"):
    """Symmetric field from {1-based index key ("12" or "1,2"): expression}; omitted components are 0."""
    from .symalg import rank_of
    comps = {}
    for key, text in exprs.items():
        parts = key.split(",") if isinstance(key, str) and "," in key else list(key)
        idx = tuple(sorted(int(i) - 1 for i in parts))
        if len(idx) != k or (k and (min(idx) < 0 or max(idx) >= n)):
            raise ValueError(f"bad index {idx}")
        comps[idx] = parse_expr(text, n)

    def func(x):
        vals = np.zeros(len(SymTensor.zeros(n, k).values))
        for idx, f in comps.items():
            vals[int(rank_of(n, idx)) if k else 0] = f(x)
        return SymTensor(n, k, vals).dense()

    return TensorField(n, k, func, name=name)


# ---------------------------------------------------------------------------
# random smooth fields

def random_trig_field(n, k, seed, h=None, modes=2, tracefree=True):
    """Sum of a few trigonometric modes with constant random coefficients, projected by tf_h(x)."""
    rng = np.random.default_rng(seed)
    ws = rng.integers(-2, 3, size=(modes, n))
    ws[np.all(ws == 0, axis=1)] = 1
    A = [random_tensor(k, n, int(rng.integers(1 << 30))).values for _ in range(modes)]
    B = [random_tensor(k, n, int(rng.integers(1 << 30))).values for _ in range(modes)]
    c0 = random_tensor(k, n, int(rng.integers(1 << 30))).values * 0.5

    def raw(x):
        v = c0.copy()
        for w_, a, b in zip(ws, A, B):
            t = float(w_ @ x)
            v = v + a * math.cos(t) + b * math.sin(t)
        return SymTensor(n, k, v)

    if tracefree and k >= 2:
        if h is None:
            hm = Metric.identity(n)
            func = lambda x: tf(raw(x), hm).dense()
        else:
            func = lambda x: tf(raw(x), h.at(x)).dense()
    else:
        func = lambda x: raw(x).dense() if k else np.float64(raw(x).values[0])
    return TensorField(n, k, func, name=f"trig(seed={seed})")


# ---------------------------------------------------------------------------
# Bochner identity on the flat torus

@dataclass(frozen=True)
class TrigField:
    """ω(x) = Σ_m a_m cos(m·x) + b_m sin(m·x) with trace-free constant a_m, b_m."""
    dim: int
    rank: int
    modes: np.ndarray          # (M, n) integer wave vectors
    cos_coef: tuple            # SymTensor per mode
    sin_coef: tuple

    @classmethod
    def random(cls, n, k, seed, num_modes=3, max_freq=2):
        rng = np.random.default_rng(seed)
        modes = rng.integers(-max_freq, max_freq + 1, size=(num_modes, n))
        modes[np.all(modes == 0, axis=1), 0] = 1
        I = Metric.identity(n)
        a = tuple(tf(random_tensor(k, n, int(rng.integers(1 << 30))), I) for _ in range(num_modes))
        b = tuple(tf(random_tensor(k, n, int(rng.integers(1 << 30))), I) for _ in range(num_modes))
        return cls(n, k, modes, a, b)

    def __call__(self, x):
        out = 0.0
        for m, a, b in zip(self.modes, self.cos_coef, self.sin_coef):
            t = float(m @ x)
            out = out + a.dense() * math.cos(t) + b.dense() * math.sin(t)
        return out

    def derivative_modes(self):
        """Dω = Σ_m C_m cos(m·x) + S_m sin(m·x), as dense constants."""
        C, S = [], []
        for m, a, b in zip(self.modes, self.cos_coef, self.sin_coef):
            mf = m.astype(float)
            C.append(np.multiply.outer(mf, b.dense()))
            S.append(-np.multiply.outer(mf, a.dense()))
        return C, S

    def as_field(self):
        modes, a, b = self.modes, self.cos_coef, self.sin_coef

        def deriv(x):
            out = 0.0
            for m, ca, sb in zip(modes, a, b):
                t = float(m @ x)
                out = out + np.multiply.outer(m.astype(float), -ca.dense() * math.sin(t) + sb.dense() * math.cos(t))
            return out

        return TensorField(self.dim, self.rank, self, deriv, name="trig")


def torus_bochner(field, grid=32):
    """Integrated Bochner combination on the flat torus (2π)^n; returns (combination, scale).

    The projections L, K, div are linear, so each is applied to the constant
    coefficients of every mode and the fields are rebuilt on a uniform grid,
    where the trapezoidal rule is exact for these band-limited integrands.
    """
    n, k = field.dim, field.rank
    if n > 3:
        raise ValueError("torus quadrature is capped at n = 3")
    I = Metric.identity(n)
    C, S = field.derivative_modes()
    ops = {
        "L": lambda T: clie_part(T, I).dense(),
        "K": lambda T: klie_part(T, I),
        "div": lambda T: _as_dense(divergence_part(T, I)),
    }
    axes = np.meshgrid(*[np.arange(grid) * 2 * np.pi / grid] * n, indexing="ij")
    X = np.stack([a.reshape(-1) for a in axes], axis=1)            # (N, n)
    phase = X @ field.modes.T.astype(float)                         # (N, M)
    cosb, sinb = np.cos(phase), np.sin(phase)
    vol = (2 * np.pi) ** n
    norms = {}
    for name, op in ops.items():
        cc = np.stack([np.asarray(op(c), dtype=float).reshape(-1) for c in C])    # (M, comps)
        ss = np.stack([np.asarray(op(s), dtype=float).reshape(-1) for s in S])
        vals = cosb @ cc + sinb @ ss
        norms[name] = float(np.sum(vals * vals)) * vol / len(X)
    coef_div = (n + k - 2) * (n + 2 * (k - 2)) / ((n + k - 3) * (n + 2 * (k - 1)))
    comb = 2 / (k + 1) * norms["K"] + coef_div * norms["div"] - norms["L"]
    scale = max(norms["L"], norms["K"], norms["div"], 1e-300)
    return comb, scale, norms


def trih1_residual(a, h, x, cfg):
    """((k+1)/2) tr{h,α} − 2 div α − ((k−1)/2){h, tr α}, α any symmetric covariant field of rank ≥ 2."""
    from .symalg import trace
    k = a.rank
    hx = h.at(x)
    H = metric_bivector(h)
    A = raise_field(a, h)
    lhs = lower_dense(schouten_bracket(H, A, h, x, cfg), hx.matrix)
    lhs = trace(SymTensor.from_dense(lhs), hx).dense() * ((k + 1) / 2)
    div = _as_dense(divergence(a, h, x, cfg))
    tr_a = TensorField(a.dim, k - 2, lambda y: _as_dense(trace(a.sym(y), h.at(y))))
    if k == 2:
        tr_a = TensorField(a.dim, 0, lambda y: float(trace(a.sym(y), h.at(y)).values[0]))
    B = schouten_bracket(H, raise_field(tr_a, h) if k > 2 else tr_a, h, x, cfg)
    rhs = 2 * div + (k - 1) / 2 * lower_dense(np.asarray(B), hx.matrix)
    return float(np.abs(lhs - rhs).max())


def metricity_residual(h, x, cfg):
    """|Dh| at x."""
    return float(np.abs(cov_deriv_dense(h, h, x, cfg)).max())


def product_rule_residual(a, b, h, x, cfg):
    """|d⟨α,β⟩ − ⟨Dα,β⟩ − ⟨α,Dβ⟩|."""
    hx = h.at(x)
    d = partial(lambda y: float(dense_inner(a(y), b(y), h.at(y))), x, cfg)
    Da, Db = cov_deriv(a, h, x, cfg), cov_deriv(b, h, x, cfg)
    av, bv = a(x), b(x)
    rhs = np.array([float(dense_inner(Da[i], bv, hx) + dense_inner(av, Db[i], hx)) for i in range(a.dim)])
    return float(np.abs(d - rhs).max())


def bianchi_residual(h, x, cfg):
    """First Bianchi and pair symmetries of the raw FD curvature, before projection."""
    R = riemann_raw(h, x, cfg)
    b = R + np.einsum("jkil->ijkl", R) + np.einsum("kijl->ijkl", R)
    anti = R + np.swapaxes(R, 0, 1)
    pair = R - np.einsum("klij->ijkl", R)
    return float(max(np.abs(b).max(), np.abs(anti).max(), np.abs(pair).max()))
