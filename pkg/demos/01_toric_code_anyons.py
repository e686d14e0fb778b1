"""Toric code on a small torus: ground space, ribbon excitations and braiding.

Run with ``python3 demos/01_toric_code_anyons.py``.
"""

import numpy as np

from anyonlab import (AbelianGroup, EdgeLattice, QuantumDoubleModel, Site, anyon_labels, build_ribbon,
                      eigenspace, excite, lattice_monodromy, measure_charge, modular_data, ribbon_operator)

G = AbelianGroup((2,))
model = QuantumDoubleModel(EdgeLattice(2, 3), G)
print(f"Z2 quantum double on a 2x3 torus: {model.lattice.num_edges} edges, dim {model.dim}")

# the ground space is the kernel of the frustration-free Hamiltonian
w, V = eigenspace(model.hamiltonian(), (-0.5, 0.5))
print(f"ground-space dimension {len(w)} (|G|^2 = {G.order ** 2} on a torus)")

# a short ribbon with both ends in the bulk
rib = build_ribbon(model.lattice, [Site((0, 0), (-1, 0)), Site((1, 0), (0, 0))])
ground = model.ground_state()
for lab in anyon_labels(G):
    psi, E, res = excite(model, ground, ribbon_operator(model, rib, lab))
    end = measure_charge(model, psi, rib.end)
    print(f"  {str(lab):14s} energy {E:.3f}  charge at end {end}")

# braiding: a closed loop around one endpoint picks up the monodromy
data = modular_data(G)
e, m = anyon_labels(G)[1], anyon_labels(G)[2]
print("lattice monodromy e around m:", np.round(lattice_monodromy(e, m, model), 12))
print("S matrix:\n", np.round(data.S.real, 6))
