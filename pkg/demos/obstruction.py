"""Replay the dimension-4 frame computation and show the exact 2-form.

The second run swaps the omega coefficient of the d(beta) identity and
shows which checks break.
"""
from symcurv.coframe import GRAM, adapted_frame, verify_section4
from symcurv.scalars import EXACT, asarray
from symcurv.symplectic import SymplecticForm

form = SymplecticForm(asarray(GRAM, EXACT))
A = asarray([[0, 0, 0, 0], [1, 0, 0, 0], [0, "6/25", 0, 0], [0, 0, 1, 0]], EXACT)
frame = adapted_frame(A, asarray([1, 0, 0, 0], EXACT), form)
print("adapted frame u(e1) =", frame.u_e1)
print("Gram matrix:", frame.gram.tolist())
print()

report = verify_section4()
print(report.text())
print()

mutated = verify_section4(1)
print("with d(beta) omega-coefficient 1:")
for name, entry in mutated.identities.items():
    if entry["status"] == "fail":
        print("  fails:", name)
print("  obstruction coefficient:", mutated.obstruction_coefficient)
