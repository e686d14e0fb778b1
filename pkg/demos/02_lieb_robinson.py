"""Commutator growth versus a Lieb-Robinson bound on the 2x3 toric code.

This takes about a minute (one 4096-dimensional diagonalization).
"""

from anyonlab import (AbelianGroup, EdgeLattice, FFunctionSpec, QuantumDoubleModel, f_norm, lr_bound)
from anyonlab.linalg import Evolution
from anyonlab.locality import lattice_convolution_constant
from anyonlab.model import interaction_f_norm

model = QuantumDoubleModel(EdgeLattice(2, 3), AbelianGroup((2,)))
lat = model.lattice
F = FFunctionSpec(nu=2.0, eps_hat=1.0)
print("||F|| over Z^2:", f_norm(F).value)
phi = interaction_f_norm(model.interaction(), F)
C_F = lattice_convolution_constant(F, lat)
v = 2 * phi * C_F
print(f"||Phi||_F = {phi:.4g}, C_F = {C_F:.4g}, velocity {v:.4g}")

chi = model.group.character((1,))
A, B = model.edge_shift(0, (1,)), model.edge_shift(2, (1,))
ev = Evolution(model.hamiltonian())
for t in (0.25, 0.5, 1.0, 2.0):
    exact = ev.commutator_norm(A, B, t)
    bound = lr_bound((0,), (2,), t, F, v, C_F, lat)
    print(f"t={t:4.2f}  ||[tau_t(X0), X2]|| = {exact:.3e}  bound {bound:.3e}")

# in a commuting model tau_t(A) only spreads over the terms touching A;
# Z0 reaches Z6 through the star at (0, 0) that both edges share
Z0 = model.edge_phase(0, chi)
print("||[tau_1(Z0), Z6]|| =", ev.commutator_norm(Z0, model.edge_phase(6, chi), 1.0))
