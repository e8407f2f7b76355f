"""Coarse attractor and LLE maps over the rate plane, printed as text."""

from genspec import sweep as sw
from genspec.model import Params

p = Params.eq7()
grid = sw.Grid2D((0.25, 3.0), 12, (0.25, 3.0), 12)

rows = sw.stability_map(p, grid, sw.BasinConfig(n=3))
dominant = sw.dominant_attractors(rows)
lles = {(r.alpha, r.alpha_s): r.lle for r in sw.lle_map(p, grid)}

print("dominant attractor (rows: alpha_s, top is largest)")
print("       " + "".join(f"{a:>8.2f}" for a in grid.alphas))
for s in reversed(grid.alpha_ss):
    print(f"{s:6.2f} " + "".join(f"{dominant[(a, s)]:>8}" for a in grid.alphas))

print("\ncells with LLE > 1e-3")
for s in reversed(grid.alpha_ss):
    print(f"{s:6.2f} " + "".join("       #" if lles[(a, s)] > 1e-3 else "       ." for a in grid.alphas))
