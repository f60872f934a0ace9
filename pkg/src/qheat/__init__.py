"""Steady-state quantum heat machines built from degenerate multilevel and Dicke systems."""
from .baths import BathSpec, ModulationSpec, effective_boltzmann
from .errors import PhysicsError, QHeatError, UsageError
from .geometry import DipoleConfig, build_collective_basis, decompose_domains, validate_config
from .liouville import ThreeLevelParams, build_dicke_liouvillian, build_total_liouvillian
from .dynamics import evolve, evolve_detuned, steady_state
from .analytic import steady_general, steady_three_level
from .thermo import DickeMachine, Machine, critical_frequency, dicke_report, heat_currents

__version__ = "0.1.0"
