"""Left-invariant connections on small Lie algebras.

Builds a few algebraic models, prints the divergence identity and the
classification of the Ricci endomorphism, then runs a short search for a
Ricci-type connection on the 4-dimensional filiform algebra.
"""
import itertools

import numpy as np

from symcurv.homogeneous import abelian, filiform4, homogeneous_diagnostics, search_ricci_type
from symcurv.scalars import EXACT, FLOAT, asarray


def symmetric_cube(seed):
    s = np.random.default_rng(seed).integers(-2, 3, size=(4, 4, 4))
    return asarray(sum(np.transpose(s, p) for p in itertools.permutations(range(3))), EXACT)


models = {
    "abelian, flat": abelian(2),
    "abelian, S(1)": abelian(2, S=symmetric_cube(1)),
    "filiform": filiform4(),
    "filiform, S(2)": filiform4(S=symmetric_cube(2)),
}

for name, m in models.items():
    d = homogeneous_diagnostics(m)
    label = d.classification.label if d.classification is not None else "-"
    print(f"{name:16s} W={str(d.W_norm):>10s}  div ubar={str(d.div_ubar):>14s}  "
          f"identity residual={d.div_identity}  class={label}")

m = filiform4(mode=FLOAT)
for seed in range(3):
    res = search_ricci_type(m.c, m.omega.matrix, seed=seed, max_nfev=400)
    print(f"search seed {seed}: W={res.W_norm:.2e} |u|={res.u_norm:.2e} success={res.success}")
