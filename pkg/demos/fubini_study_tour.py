"""Walk through the chart pipeline on complex projective space.

Curvature of the Fubini-Study connection at a rational point, its E/W
split, the derived fields u and b, then the symmetric triple.  A random
connection is shown alongside as a contrast.

    python demos/fubini_study_tour.py
"""
from gmpy2 import mpq

from symcurv.connection import bianchi_residuals, curvature_at
from symcurv.models import fubini_study, random_model
from symcurv.ricci import decompose, ricci_type_report
from symcurv.scalars import EXACT, relative
from symcurv.triple import build_triple, killing_certificate, triple_residuals

point = [mpq(1, 4), mpq(-1, 8), mpq(0), mpq(3, 8)]

data = curvature_at(fubini_study(2), point, depth=4, mode=EXACT)
print("Bianchi residuals (first, second):", bianchi_residuals(data))

E, W = decompose(data)
print("relative size of W:", relative(W.max_abs(), data.R_low.components))

rep = ricci_type_report(data)
print("Ricci type:", rep.is_ricci_type)
print("u =", list(rep.u), " b =", rep.b)
for name, value in rep.residuals.items():
    print(f"  {name:16s} {value}")

# the curvature span closes into a Lie algebra because nabla R = 0
for sign in (1, -1):
    t = build_triple(data, curvature_sign=sign)
    cert = killing_certificate(t)
    worst = max(triple_residuals(t, data).values())
    print(f"triple (sign {sign:+d}): dim {t.dim}, worst residual {worst}, Killing det {cert.determinant}, "
          f"definite: {cert.definite}")

print()
generic = curvature_at(random_model(2, seed=2), point, depth=3, mode=EXACT)
rep = ricci_type_report(generic)
print("random connection, relative W:", float(rep.W_norm))
print("random connection, eq1_1 residual:", float(rep.residuals["eq1_1"]))
