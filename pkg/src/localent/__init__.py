"""Local entanglement of smooth bipartite continuous-variable pure states.

Closed-form leading-order expressions for the entanglement left after both
parties filter their particles into small position boxes, together with an
independent brute-force reduced-density-matrix oracle, coordinate-transform
machinery, WKB semiclassics and built-in wavefunction families.
"""

from .core import (AliceOnlyResult, EntanglementReport, MeasurementRegion,
                   Validity, binary_entropy, concurrence_from_log_state,
                   epsilon_alice_only, epsilon_joint, epsilon_pair_matrix,
                   lambda3_joint, report, validity_and_cutoff)
from .errors import (ConfigError, ConvergenceError, DomainError, LocalEntError,
                     QuadratureError, UnsupportedOrderError, ValidationError)
from .oracle import (ComparisonReport, DiscretizedRdm, OracleSpectrum,
                     build_rdm, compare, probability_mass, schmidt_spectrum,
                     spectrum)
from .states import (BipartiteState, ComRelState, ConfigPoint,
                     GaussianPacketSpec, MultiIndex, PlaneWaveSpec,
                     ProductState, UserState, coupled_oscillator_from_lengths,
                     coupled_oscillator_state, gaussian_factor,
                     gaussian_packet_factor, hydrogen_state, plane_wave_factor,
                     separable_product)
from .transforms import (ComRelSplit, LocalTransform, MappedState,
                         SeparableSystem, com_rel_epsilon,
                         com_rel_epsilon_general, orthogonal_pullback_epsilon,
                         separable_epsilon, spherical_cartesian_jet)

__version__ = "0.1.0"
