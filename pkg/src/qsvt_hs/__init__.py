"""QSVT Hamiltonian simulation with OAA/FPAA and a linear Vlasov-Poisson application."""

from .hs import BlockEncodedOp, QueryCount, build_fpaa, build_hs_step, build_oaa, build_u_exp, query_count
from .polyapprox import ChebyshevSeries, build_sign_poly, build_trig_polys
from .qsp import PhaseSequence, find_phases
from .simulator import DenseUnitary, StateVec
from .vlasov import VelocityGrid, build_grid, build_hamiltonian, evolve_hs, initial_state

__all__ = [
    "BlockEncodedOp", "ChebyshevSeries", "DenseUnitary", "PhaseSequence", "QueryCount", "StateVec",
    "VelocityGrid", "build_fpaa", "build_grid", "build_hamiltonian", "build_hs_step", "build_oaa",
    "build_sign_poly", "build_trig_polys", "build_u_exp", "evolve_hs", "find_phases",
    "initial_state", "query_count",
]
__version__ = "0.1.0"
