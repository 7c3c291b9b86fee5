"""Command line driver: ``tfcalc {algebra,chart,solution,construct}``.

Every subcommand writes newline-delimited JSON reports (one per check, sorted
by check id) followed by a summary record, and prints a table to stdout.
Exit status: 0 all checks passed, 1 some check failed, 2 bad input or config.
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import chartgeo as cg
from . import serial
from . import verify as V

FLOAT_BOUNDS = (12, 8)
EXACT_BOUNDS = (8, 6)


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    trials: int = 1
    dims: tuple = (3, 3)
    ranks: tuple = (1, 3)
    exact: bool = False
    tol: float = None
    out: str = None
    fixture: str = None
    step: float = 1e-3
    input: str = None
    edges: str = None
    target: str = None
    jobs: int = 1
    extra: dict = field(default_factory=dict)


def parse_range(text, name):
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"malformed {name} range {text!r}") from None
    if lo > hi:
        raise ConfigError(f"empty {name} range {text!r}")
    return lo, hi


# ---------------------------------------------------------------------------
# algebra

def _algebra_block(args):
    n, k, seed, trials, exact = args
    worst = {}
    for t in range(trials):
        for key, v in V.algebra_trial(n, k, seed + t, exact).items():
            if key not in worst or v > worst[key]:
                worst[key] = v
    return n, k, worst


def run_algebra(cfg):
    nlo, nhi = cfg.dims
    klo, khi = cfg.ranks
    nmax, kmax = EXACT_BOUNDS if cfg.exact else FLOAT_BOUNDS
    if nlo < 3 or nhi > nmax or klo < 1 or khi > kmax:
        raise ConfigError(f"ranges must satisfy 3 <= n <= {nmax}, 1 <= k <= {kmax}")
    if cfg.trials < 0:
        raise ConfigError("trials must be nonnegative")
    tol = cfg.tol if cfg.tol is not None else 1e-10
    reports = []
    if cfg.trials == 0:
        return reports
    jobs = [(n, k, cfg.seed, cfg.trials, cfg.exact) for n in range(nlo, nhi + 1) for k in range(klo, khi + 1)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(_algebra_block, jobs))
    else:
        results = [_algebra_block(j) for j in jobs]
    for n, k, worst in results:
        for key, v in worst.items():
            if cfg.exact:
                rep = V.Report(f"algebra/{key}/n={n}/k={k}", v, 0, v == 0, [], {"trials": cfg.trials})
            else:
                rep = V.Report(f"algebra/{key}/n={n}/k={k}", float(v), tol, float(v) <= tol, [],
                               {"trials": cfg.trials})
            reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# chart

def _fixture(cfg, n):
    try:
        return cg.get_fixture(cfg.fixture, n)
    except (KeyError, ValueError) as e:
        raise ConfigError(e.args[0] if e.args else repr(e)) from None


def _points(key, n, count, rng):
    if key == "torus":
        return [rng.uniform(0, 2 * np.pi, size=n) for _ in range(count)]
    return [V.sample_point("ball", n, rng) * 0.6 for _ in range(count)]


def run_chart(cfg):
    n = cfg.extra.get("dim", 3)
    h = _fixture(cfg, n)
    cfg1 = cg.FDConfig(cfg.step, "central4")
    tol1 = cfg.tol if cfg.tol is not None else 1e-5
    rng = np.random.default_rng(cfg.seed)
    pts = _points(cfg.fixture, n, max(cfg.trials, 1), rng)
    reports = []

    def add(check, values, tol, **extra):
        res = max(values) if values else 0.0
        reports.append(V.Report(f"chart/{cfg.fixture}/{check}", float(res), tol, bool(res <= tol), [], extra))

    # first-order facts
    if h.christoffel_exact is not None:
        add("christoffel_closed_form",
            [float(np.abs(cg.christoffel(h, x, cfg1) - h.christoffel_exact(x)).max()) for x in pts], tol1)
    if h.curvature_exact is not None:
        vals = []
        for x in pts:
            ex = h.curvature_exact(x)
            vals.append(float(np.abs(cg.riemann(h, x, cfg1).dense() - ex).max()) / max(1.0, float(np.abs(ex).max())))
        add("curvature_closed_form", vals, tol1)
    add("metricity", [cg.metricity_residual(h, x, cfg1) for x in pts], tol1)
    add("bianchi_raw", [cg.bianchi_residual(h, x, cfg1) for x in pts], tol1)
    seed = cfg.seed
    w2 = cg.random_trig_field(n, 2, seed + 1, h=h)
    w1 = cg.random_trig_field(n, 1, seed + 2)
    w3 = cg.random_trig_field(n, 3, seed + 3, h=h)
    dec = [cg.decomposition_check(w2, h, x, cfg1) for x in pts]
    add("decomposition/domkl", [d[0] for d in dec], tol1)
    add("decomposition/normdom", [d[1] for d in dec], tol1)
    b2 = cg.random_trig_field(n, 2, seed + 4, h=h)
    add("product_rule", [cg.product_rule_residual(w2, b2, h, x, cfg1) for x in pts], tol1)
    f = cg.parse_expr("exp(0.3*sin(x1) + 0.2*x2)", n)
    add("conformal", [max(cg.conformal_check(w2, h, f, x, cfg1)) for x in pts], tol1)
    add("derivation", [cg.derivation_check(w1, w2, h, x, cfg1) for x in pts], tol1)
    for w in (w1, w3):
        res = [max(cg.div_identities(w, h, x, cfg1).values()) for x in pts]
        add(f"div_identities/k={w.rank}", res, tol1)
    a = cg.random_trig_field(n, 2, seed + 5, tracefree=False)
    add("schouten/trih1", [cg.trih1_residual(a, h, x, cfg1) for x in pts], tol1)
    # second-order identities
    tol2 = cfg.extra.get("tol2", 1e-3)
    cfg2 = cg.FDConfig(max(10 * cfg.step, 1e-2), "central2")
    x0 = pts[0]
    for which in ("divlie", "lapom", "klieweitzenbock", "lapom3", "lapom2", "culap", "differentialr",
                  "lapomsq", "lapomdivlie", "lapomliediv"):
        r = [cg.weitzenbock_residual(w2, h, x, cfg1, which, alpha=0.3) for x in pts]
        add(f"weitzenbock/{which}", r, tol2)
    for which in ("divlie", "lapom", "klieweitzenbock", "lapom3", "lapom2"):
        rr = cg.richardson(lambda c: cg.weitzenbock_residual(w2, h, x0, c, which), cfg2)
        ok = rr["order"] >= 1.8 or rr["residual"] < 1e-9
        reports.append(V.Report(f"chart/{cfg.fixture}/order/{which}", rr["residual_refined"], tol2,
                                bool(ok and rr["residual_refined"] <= tol2), [],
                                {"order": rr["order"], "ratio": rr["ratio"]}))
    if cfg.fixture == "torus" and n <= 3:
        vals = []
        for k in (1, 2, 3):
            comb, scale, _ = cg.torus_bochner(cg.TrigField.random(n, k, seed + k))
            vals.append(abs(comb) / scale)
        add("bochner", vals, 1e-8)
    return reports


# ---------------------------------------------------------------------------
# solution candidates

def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from None


def _parse(fn, *args):
    try:
        return fn(*args)
    except (ValueError, KeyError, TypeError, ZeroDivisionError) as e:
        raise ConfigError(f"cannot parse input: {e}") from None


def _graph_from(source):
    from .polyfield import RegularGraph
    if source in ("k4", "K4"):
        return RegularGraph.complete4()
    if source == "petersen":
        return RegularGraph.petersen()
    if isinstance(source, dict):
        text = "\n".join(f"{u} {v}" for u, v in source["edges"])
        if "signs" in source:
            text += f"\nsigns: {source['signs']}"
        return _parse(RegularGraph.parse, text)
    p = Path(source)
    if not p.exists():
        raise ConfigError(f"no such edge file: {source}")
    return _parse(RegularGraph.parse, p.read_text())


def _couplings(data, n, as_fields):
    out = []
    for t in data.get("tensors", []):
        coef = _parse(serial.scalar_in, t.get("coef", 1))
        cls = t.get("class", "codazzi")
        if as_fields:
            k = int(t["rank"])
            obj = _parse(cg.field_from_expressions, n, k, t["components"])
        else:
            obj = _parse(serial.tensor_from_json, t["tensor"])
        out.append(V.Coupling(coef, obj, cls))
    return out


def certify(data, cfg):
    """Run every check that applies to a candidate record."""
    kind = data.get("kind")
    tol = cfg.tol
    reps = []
    if kind == "flat-algebraic":
        if "graph" in data:
            rep, P, w = V.graph_certificate(_graph_from(data["graph"]), strict=data.get("strict", True))
            reps.append(rep)
            return reps
        if "munzner" in data:
            m = data["munzner"]
            if data.get("fixture") == "cartan-cubic":
                P, h = V.cartan_cubic()
            elif data.get("fixture") == "fkm":
                P, h = V.fkm_quartic(int(m.get("l", 4)))
            else:
                P = _parse(serial.poly_from_json, data["polynomial"])
                h = _parse(serial.metric_from_json, data["metric"]) if "metric" in data else None
            reps.append(V.cartan_munzner_verify(P, int(m["g"]), int(m["m1"]), int(m["m2"]), h,
                                                points=int(m.get("points", 500)), seed=cfg.seed,
                                                tol=tol if tol is not None else 1e-9))
            return reps
        if "polynomial" in data:
            F = _parse(serial.poly_from_json, data["polynomial"])
            reps.append(V.flat_algebraic_verify(F))
            if F.dim >= 3:
                reps.append(V.stressenergy_residual(V.flat_candidate(F)))
            return reps
        h = _parse(serial.metric_from_json, data["metric"])
        tensors = _couplings(data, h.dim, False)
        cand = V.SolutionCandidate("flat-algebraic", h, tensors, kappa=data.get("kappa"))
        reps.append(V.stressenergy_residual(cand, tol if tol is not None else 1e-10))
        for chk in data.get("checks", []):
            w = tensors[0].tensor
            if chk == "ahs":
                reps.append(V.ahs_constant(w, h))
            elif chk == "norm_inequalities":
                reps.append(V.norm_inequality_suite(w.as_float(), h.as_float()))
            else:
                raise ConfigError(f"unknown check {chk!r}")
        return reps
    if kind == "lie-group":
        name = data.get("algebra", "su(3)")
        if not (name.startswith("su(") and name.endswith(")")):
            raise ConfigError(f"unsupported algebra {name!r}")
        L = V.su(int(name[3:-1]))
        which = data.get("polynomial", "cubic")
        if which == "cubic":
            P = V.su_cubic(L)
        elif which == "quadratic-squared":
            from .polyfield import Polynomial
            E = Polynomial.quadratic_form(L.metric())
            P = E * E
        else:
            raise ConfigError(f"unknown invariant polynomial {which!r}")
        try:
            reps.append(V.lie_group_verify(L, P))
        except ValueError as e:
            expected = bool(data.get("expect_reject"))
            reps.append(V.Report("lie_group", 0 if expected else 1, 0, expected, [f"rejected: {e}"],
                                 {"algebra": name, "rejected": True}))
        return reps
    if kind == "hypersurface":
        imm = {"clifford": V.clifford_torus, "s2xs1": V.sphere_product, "equator": V.equator}
        name = data.get("immersion")
        if name not in imm:
            raise ConfigError(f"unknown immersion {name!r}")
        f = imm[name]()
        rng = np.random.default_rng(cfg.seed)
        pts = data.get("points")
        if pts is None:
            lo, hi = (0.6, 2.4) if name != "equator" else (-0.5, 0.5)
            pts = rng.uniform(lo, hi, size=(int(data.get("count", 3)), f.dim))
        step = float(data.get("step", 1e-2))
        reps.append(V.hypersurface_verify(f, np.asarray(pts, dtype=float), cg.FDConfig(step, "central4"),
                                          tol if tol is not None else 1e-3))
        return reps
    if kind == "chart":
        n = int(data.get("dim", 3))
        try:
            h = cg.get_fixture(data["fixture"], n)
        except (KeyError, ValueError) as e:
            raise ConfigError(str(e)) from None
        tensors = _couplings(data, n, True)
        pts = data.get("points")
        if pts is None:
            rng = np.random.default_rng(cfg.seed)
            pts = [V.sample_point("ball", n, rng) * 0.5 for _ in range(int(data.get("count", 3)))]
        cand = V.SolutionCandidate("chart", h, tensors, kappa=data.get("kappa"), points=np.asarray(pts, dtype=float))
        reps.append(V.stressenergy_residual(cand, tol if tol is not None else 1e-5, cg.FDConfig(cfg.step)))
        if "c" in data:
            for j, x in enumerate(cand.points):
                hm = h.at(x)
                w = tensors[0].tensor.sym(x) if tensors else None
                from .symalg import SymTensor
                w = w if w is not None else SymTensor.zeros(n, 2)
                reps.append(V.projectivehiggs_residual(cg.riemann(h, x, cg.FDConfig(cfg.step)), w, float(data["c"]),
                                                       float(reps[0].values["kappa"]), hm,
                                                       tol if tol is not None else 1e-5))
                reps[-1].check = f"projectivehiggs/p{j}"
        return reps
    raise ConfigError(f"unknown candidate kind {kind!r}")


def run_solution(cfg):
    if not cfg.input:
        raise ConfigError("--input is required")
    data = _load_json(cfg.input)
    items = data if isinstance(data, list) else [data]
    reports = []
    for i, item in enumerate(items):
        try:
            reps = certify(item, cfg)
        except ConfigError:
            raise
        except (KeyError, TypeError) as e:
            raise ConfigError(f"malformed candidate: {e}") from None
        except ValueError as e:
            reps = [V.Report("rejected", 1, 0, False, [str(e)], {"kind": item.get("kind")})]
        for r in reps:
            r.check = f"solution/{i}/{r.check}"
        reports.extend(reps)
    return reports


# ---------------------------------------------------------------------------
# construct

def run_construct(cfg):
    target = cfg.target
    if target == "graph-poly":
        if not cfg.edges:
            raise ConfigError("--edges is required for graph-poly")
        try:
            G = _graph_from(cfg.edges)
            rep, P, w = V.graph_certificate(G, strict=not cfg.extra.get("allow_low_degree"))
        except ValueError as e:
            raise ConfigError(str(e)) from None
        artifact = {"polynomial": serial.poly_to_json(P), "tensor": serial.tensor_to_json(w),
                    "certificate": rep.to_dict()}
    elif target == "cartan-cubic":
        P, h = V.cartan_cubic()
        rep = V.cartan_munzner_verify(P, 3, 1, 1, h, seed=cfg.seed)
        artifact = {"polynomial": serial.poly_to_json(P), "metric": serial.metric_to_json(h),
                    "certificate": rep.to_dict()}
    elif target == "su3-cubic":
        L = V.su(3)
        P = V.su_cubic(L)
        rep = V.lie_group_verify(L, P)
        artifact = {"polynomial": serial.poly_to_json(P), "metric": serial.metric_to_json(L.metric()),
                    "certificate": rep.to_dict()}
    else:
        raise ConfigError(f"unknown construction {target!r}")
    rep.check = f"construct/{target}/{rep.check}"
    art = cfg.extra.get("artifact")
    if art:
        Path(art).write_text(serial.dumps(artifact) + "\n")
    return [rep]


# ---------------------------------------------------------------------------
# output

def summary(reports, elapsed=None):
    failed = [r.check for r in reports if not r.passed]
    return {"summary": True, "total": len(reports), "passed": len(reports) - len(failed),
            "failed": len(failed), "failed_checks": failed, "exit": 1 if failed else 0}


def emit(reports, cfg, stream=None):
    stream = stream or sys.stdout
    reports = sorted(reports, key=lambda r: r.check)
    lines = [r.to_json() for r in reports]
    lines.append(json.dumps(summary(reports), sort_keys=True))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    width = max([len(r.check) for r in reports] + [5])
    stream.write(f"{'check':<{width}}  {'residual':>12}  {'tol':>9}  result\n")
    for r in reports:
        res = r.residual
        res_s = f"{float(res) + 0.0:12.3e}" if not isinstance(res, Fraction) or res.denominator != 1 else f"{int(res):12d}"
        stream.write(f"{r.check:<{width}}  {res_s}  {float(r.tol):9.1e}  {'pass' if r.passed else 'FAIL'}\n")
    s = summary(reports)
    stream.write(f"{s['passed']}/{s['total']} passed\n")
    if not cfg.out:
        stream.write(text)
    return s["exit"]


def build_parser():
    p = argparse.ArgumentParser(prog="tfcalc", description="Identity suites and certificates for trace-free tensors.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write NDJSON reports here")
        sp.add_argument("--tol", type=float)
        sp.add_argument("--exact", action="store_true", help="rational arithmetic where supported")
        sp.add_argument("--jobs", type=int, default=int(os.environ.get("TFCALC_THREADS", "1")))

    a = sub.add_parser("algebra", help="pointwise algebra identities over random tensors")
    common(a)
    a.add_argument("--dims", default="3..5")
    a.add_argument("--ranks", default="1..4")
    a.add_argument("--trials", type=int, default=10)

    c = sub.add_parser("chart", help="finite-difference geometry suite on a fixture chart")
    common(c)
    c.add_argument("--fixture", required=True, help=", ".join(cg.FIXTURES))
    c.add_argument("--step", type=float, default=1e-3)
    c.add_argument("--dim", type=int, default=3)
    c.add_argument("--trials", type=int, default=2, help="number of sample points")

    s = sub.add_parser("solution", help="certify candidate solutions from a JSON file")
    common(s)
    s.add_argument("--input", required=True)
    s.add_argument("--step", type=float, default=1e-3)

    k = sub.add_parser("construct", help="build and certify a solution")
    common(k)
    k.add_argument("target", choices=["graph-poly", "cartan-cubic", "su3-cubic"])
    k.add_argument("--edges", help="edge list file, or k4 / petersen")
    k.add_argument("--artifact", help="write the constructed tensor JSON here")
    k.add_argument("--allow-low-degree", action="store_true", help="permit 2-regular graphs (counterexamples)")
    return p


def config_from_args(ns):
    cfg = RunConfig(ns.command, seed=ns.seed, tol=ns.tol, out=ns.out, exact=ns.exact, jobs=max(1, ns.jobs))
    if ns.command == "algebra":
        cfg.dims = parse_range(ns.dims, "dims")
        cfg.ranks = parse_range(ns.ranks, "ranks")
        cfg.trials = ns.trials
    elif ns.command == "chart":
        if not ns.step > 0:
            raise ConfigError("--step must be positive")
        if not 2 <= ns.dim <= FLOAT_BOUNDS[0]:
            raise ConfigError("--dim out of range")
        cfg.fixture, cfg.step, cfg.trials = ns.fixture, ns.step, ns.trials
        cfg.extra["dim"] = ns.dim
    elif ns.command == "solution":
        cfg.input, cfg.step = ns.input, ns.step
    elif ns.command == "construct":
        cfg.target, cfg.edges = ns.target, ns.edges
        cfg.extra["artifact"] = ns.artifact
        cfg.extra["allow_low_degree"] = ns.allow_low_degree
    return cfg


RUNNERS = {"algebra": run_algebra, "chart": run_chart, "solution": run_solution, "construct": run_construct}


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)        # argparse exits with 2 on usage errors
    try:
        cfg = config_from_args(ns)
        reports = RUNNERS[cfg.command](cfg)
    except ConfigError as e:
        print(f"tfcalc: error: {e}", file=sys.stderr)
        return 2
    return emit(reports, cfg)


if __name__ == "__main__":
    sys.exit(main())
