"""Numerical toolkit for abelian quantum double models: spectra, ribbons, braiding,
locality bounds and the spectral flow."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .groups import AbelianGroup, AnyonLabel, Character, anyon_labels, character_eval, fuse
from .lattice import ConeRegion, EdgeLattice, RibbonPath, Site, build_ribbon, cone_sites, region_distance
from .linalg import HilbertSpace, Monomial, conditional_expectation, eigenspace, evolve, op_norm
from .model import PerturbationPath, QuantumDoubleModel, build_hamiltonian, perturbed_hamiltonian
from .ribbons import RibbonOperator, excite, measure_charge, ribbon_compose, ribbon_operator
from .anyons import braid_equation_check, lattice_monodromy, modular_data, monodromy, twist
from .locality import FFunctionSpec, cone_double_sum, f_norm, locality_profile, lr_bound
from .flow import build_filter, flow_generator, flow_unitary, stability_experiment, track_gap
