"""Periodically driven lattice models: integer and fractional drive resonances.

Symmetry-sector bases, Floquet stroboscopic evolution, effective-Hamiltonian
quadrature, and localization diagnostics, with a config-driven CLI that writes
CSV series and figures.
"""

from .basis import (
    LocalSpace,
    ParityBasis,
    SectorBasis,
    enumerate_sector,
    index_of,
    parity_project,
    symmetrized_state,
)
from .errors import (
    BasisMismatchError,
    ConfigError,
    EmptySectorError,
    FloqsimError,
    KrylovBreakdownError,
    NotConvergedError,
    NotInSectorError,
    PeriodicityViolationError,
    QuadratureNotConvergedError,
    SizeLimitError,
)
from .floquet import (
    MagnusResult,
    TrimerOracle,
    fractional_weight,
    magnus_h0,
    magnus_h1,
    magnus_result,
    resonance_weight,
    trimer_populations_fractional,
    trimer_populations_integer,
)
from .models import (
    DriveSpec,
    DrivenModel,
    build_bose_hubbard,
    build_jch,
    build_spin1_xxz,
    build_spin_ladder,
    hamiltonian_at,
    to_polariton_frame,
)
from .observables import (
    ObservableSeries,
    autocorrelations,
    configuration_count,
    heating_rate_series,
    loschmidt_echo,
    participation_ratio,
    populations,
    site_occupations,
    von_neumann_entropy,
)
from .propagate import (
    PeriodPropagator,
    StateVector,
    basis_state,
    continuous_evolve,
    lanczos_expmv,
    period_propagator,
    sparse_evolve,
    stroboscopic_evolve,
)

__version__ = "0.1.0"
