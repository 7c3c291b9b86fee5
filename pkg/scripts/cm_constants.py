"""Cartan–Münzner constants: derived factor versus the displayed one, on concrete fixtures.

Run: python3 scripts/cm_constants.py
"""
from fractions import Fraction

from tfcalc import verify as V
from tfcalc.polyfield import Polynomial
from tfcalc.symalg import Metric


def row(name, P, h, g, m1, m2, points=200):
    r = V.cartan_munzner_verify(P, g, m1, m2, h, points=points)
    n = P.dim
    derived = V.cm_constant(n, g, m1, m2)
    shown = V.cm_constant(n, g, m1, m2, displayed=True)
    got = r.values.get("sigma_over_h")
    print(f"{name:<22} n={n:<2} g={g} m=({m1},{m2})  sigma/h={str(got):<10} derived={str(derived):<10} "
          f"displayed={str(shown):<10} pass={r.passed}")
    for note in r.notes:
        print(f"{'':<24}- {note}")


def main():
    P, h = V.cartan_cubic()
    row("Cartan cubic", P, h, 3, 1, 1, points=500)
    P, h = V.fkm_quartic(4)
    row("FKM quartic (l=4)", P, h, 4, 1, 2)
    x = [Polynomial.variable(3, i) for i in range(3)]
    h3 = Metric.identity(3, exact=True)
    row("x1^2+x2^2-x3^2", x[0] ** 2 + x[1] ** 2 - x[2] ** 2, h3, 2, 0, 1)
    row("E (degenerate)", Polynomial.quadratic_form(h3), h3, 2, 0, 3)
    print()
    print("factor table, g=4, m1=1:")
    for n, m2 in ((8, 2), (10, 3), (14, 5)):
        a = Fraction((m2 - 1) * 4, 2 * (n + 2))
        print(f"  n={n:<3} m2={m2}  1-a^2={1 - a * a}  displayed={1 - Fraction(m2 - 1, n + 2) ** 2}")


if __name__ == "__main__":
    main()
