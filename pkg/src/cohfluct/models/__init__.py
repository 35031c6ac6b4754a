"""LMG and Dicke models, classical dynamics and exact fluctuation decompositions."""
from .classical import ClassicalState, Trajectory, integrate_classical, spin_vector
from .dicke import (
    DickeParams,
    dicke_classical_rhs,
    dicke_energy_expectation,
    dicke_hamiltonian,
    dicke_omega1,
    dicke_omega1_kinematic,
    dicke_omega2,
    dicke_rhs,
    dicke_state_params,
)
from .lmg import (
    LmgParams,
    lmg_classical_rhs,
    lmg_ehrenfest_time,
    lmg_energy_constant,
    lmg_energy_expectation,
    lmg_hamiltonian,
    lmg_iso_spin_length,
    lmg_iso_splus,
    lmg_omega1,
    lmg_omega1_kinematic,
    lmg_omega2,
    lmg_revival_time,
    lmg_rhs,
)
from .generic import SpinPolynomial
