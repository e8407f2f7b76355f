"""Equilibria, their spectra and the analytic stability curves at one rate pair."""

import numpy as np

from genspec import equilibria as eqm
from genspec import stability as st
from genspec import sweep as sw
from genspec.model import Params

np.set_printoptions(precision=4, suppress=True)

# reference parameters, both infection rates moderate
p = Params.eq7(alpha=1.5, alpha_s=0.2)

for e in eqm.all_equilibria(p):
    tag = "feasible" if e.feasible else "outside"
    print(f"{e.name} {e.label:<28} {tag:<9} residual={e.residual:.1e}")
    print("   ", e.reported_state())

# only feasible points get a stability verdict
for r in st.stability_reports(p):
    print(f"{r.name}: {r.classification:<8} max Re = {r.max_real:+.4f}")
print("stable here:", st.stable_equilibria(p))

# thresholds that do not depend on the other rate
for label in ("T12", "T13", "T26", "T45", "T57"):
    curve = st.TRANSCRITICAL[label]
    print(f"{label} ({'+'.join(curve.pair)}): {curve.axis} = {curve.value(p):.6f}")
print(f"H5: alpha = {st.hopf_locus_v5(p):.6f}")

# the rest are curves in the rate plane
for a in (1.0, 1.5, 2.0):
    print(f"alpha={a}: T23 -> {st.transcritical_value('T23', p, a):.4f}, T37 -> {st.transcritical_value('T37', p, a):.4f}")

# the coexistence pair is born in a fold
q = p.with_rates(alpha_s=1.0)
fold = sw.fold_alpha(q, 0.5, 1.2)[0]
print(f"coexistence fold at alpha_s=1: alpha = {fold:.9f}")
for a in (fold - 0.01, fold + 0.01):
    print(f"  alpha={a:.4f}: roots {eqm.coexistence_roots(q.with_rates(alpha=a)).roots}")
