"""Walk along the generalist rate at low specialist rate and watch stability hand off."""

from genspec import sweep as sw
from genspec.model import Params

p = Params.eq7(alpha_s=0.2)
table = sw.bifurcation_sweep_1d(p, "alpha", 0.1, 3.0, 30)

for c in table.crossings:
    print(f"{c.label:>5} at alpha = {c.value:.4f}")

# one line per sample: what is stable, and the oscillation range once v5 has lost it
for v in sorted({r.value for r in table.rows}):
    stable = table.stable_at(v)
    orbits = [r for r in table.rows if r.value == v and r.equilibrium.startswith("po:")]
    extra = "".join(f"  {r.equilibrium} |s| in [{r.po_min:.3f}, {r.po_max:.3f}]" for r in orbits)
    print(f"alpha={v:.3f}  stable={','.join(stable) or '-'}{extra}")
