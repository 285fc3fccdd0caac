"""Independent oracle: large-x coefficients by direct substitution.

With y = x^{-1/3}, u = sum_n a_n y^{n-1} and d/dx = -(1/3) y^4 d/dy, the ODE
is expanded in powers of y and solved order by order with sympy. No use is
made of the package's recurrence.
"""
import json
import sympy as sp

def coefficients(N):
    y, t = sp.symbols("y t")
    w = sp.symbols("w")  # a_0, with w^3 = -6
    a = [w] + list(sp.symbols(f"a1:{N + 1}"))
    u = sum(a[n] * y ** (n - 1) for n in range(N + 1))
    D = lambda f: sp.expand(-sp.Rational(1, 3) * y ** 4 * sp.diff(f, y))
    u1 = D(u); u2 = D(u1); u4 = D(D(u2))
    expr = sp.expand((u4 + 10 * u1 ** 2 + 20 * u * u2 + 40 * (u ** 3 - 6 * t * u)) * y ** 3 + 240)
    # y^3 * 6x = 6*... x = y^-3 so 40*6x*y^3 = 240
    poly = sp.Poly(expr, y)
    sol = {}
    for n in range(1, N + 1):
        c = poly.coeff_monomial(y ** n)
        c = sp.expand(c.subs(sol))
        c = sp.expand(c).subs(w ** 3, -6)
        c = sp.expand(sp.expand(c).subs(w ** 4, -6 * w).subs(w ** 5, -6 * w ** 2).subs(w ** 6, 36))
        s = sp.solve(c, a[n])
        sol[a[n]] = sp.simplify(s[0])
    return [w] + [sol[a[n]] for n in range(1, N + 1)], t, w

if __name__ == "__main__":
    N = 14
    coeffs, t, w = coefficients(N)
    w0 = -sp.root(6, 3)
    out = {}
    for label, tv in (("1", 1), ("-2", -2), ("i", sp.I), ("0.5+0.25i", sp.Rational(1, 2) + sp.I / 4)):
        vals = [sp.N(c.subs({t: tv, w: w0}), 30) for c in coeffs]
        out[label] = [[str(sp.re(v)), str(sp.im(v))] for v in vals]
    print(json.dumps(out))
