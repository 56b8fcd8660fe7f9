"""Regenerate src/biot/_manufactured.py (closed-form data of the manufactured case).

    python scripts/gen_manufactured.py > src/biot/_manufactured.py
"""

import sympy as sp
from sympy.printing.numpy import NumPyPrinter

x, y, t = sp.symbols("x y t", real=True)
lam, mu, alpha, c0, kp = sp.symbols("lam mu alpha c0 kp", positive=True)

bubble = x * y * (1 - x) ** 2 * (1 - y)
u1 = sp.sin(sp.pi * x * t) * sp.cos(sp.pi * y * t) * bubble
u2 = sp.cos(sp.pi * x * t) * sp.sin(sp.pi * y * t) * bubble
p = sp.cos(t + x - y) * bubble

div_u = sp.diff(u1, x) + sp.diff(u2, y)
xi = alpha * p - lam * div_u
eps = sp.Matrix([[sp.diff(u1, x), (sp.diff(u1, y) + sp.diff(u2, x)) / 2],
                 [(sp.diff(u1, y) + sp.diff(u2, x)) / 2, sp.diff(u2, y)]])
sigma = 2 * mu * eps - xi * sp.eye(2)
f1 = -(sp.diff(sigma[0, 0], x) + sp.diff(sigma[0, 1], y))
f2 = -(sp.diff(sigma[1, 0], x) + sp.diff(sigma[1, 1], y))
g = (c0 + alpha**2 / lam) * sp.diff(p, t) - alpha / lam * sp.diff(xi, t) - kp * (sp.diff(p, x, 2) + sp.diff(p, y, 2))

outputs = {
    "displacement": [u1, u2],
    "displacement_grad": [sp.diff(u1, x), sp.diff(u1, y), sp.diff(u2, x), sp.diff(u2, y)],
    "pressure": [p],
    "pressure_grad": [sp.diff(p, x), sp.diff(p, y)],
    "total_pressure": [xi],
    "body_force": [f1, f2],
    "source": [g],
}

printer = NumPyPrinter({"fully_qualified_modules": False})

print('"""Closed-form manufactured solution data. Generated by scripts/gen_manufactured.py; do not edit."""')
print()
print("from numpy import cos, pi, sin")
for name, exprs in outputs.items():
    args = "x, y, t" if name in ("displacement", "displacement_grad", "pressure", "pressure_grad") else "x, y, t, lam, mu, alpha, c0, kp"
    print()
    print()
    print(f"def {name}({args}):")
    subs, reduced = sp.cse(exprs, optimizations="basic")
    for sym, val in subs:
        print(f"    {sym} = {printer.doprint(val)}")
    results = [printer.doprint(r) for r in reduced]
    print(f"    return ({', '.join(results)}{',' if len(results) == 1 else ''})")
