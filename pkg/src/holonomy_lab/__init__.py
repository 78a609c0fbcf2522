"""Gauge-covariant non-local observables, Wilson lines and cone holonomies."""
from .errors import (BoundaryError, ConvergenceError, CoreCollisionError, GridMismatchError,
                     HolonomyLabError, NumericalError, OverlapError, ResolutionError,
                     ScenarioError, TopologyError)
from .grid import (DensityMatrix, GridSpec, WaveFunction, gaussian_packet, inner_product,
                   mixture_trace, momentum_moment, superpose, translate, translation_operator)
from .gauge import (GaugePotential, GaugeTransformation, LieAlgebraBasis, apply_gauge_to_potential,
                    apply_gauge_to_wavefunction, nonabelian_flux_tube, random_smooth_gauge,
                    solenoid_potential)
from .transport import (Curve, GroupElement, arc, circle, holonomy, line_integral,
                        path_ordered_exponential, polyline, segment)
from .observables import (NonlocalOperatorSpec, apply_f_ell, apply_g_gamma, build_ab_packets,
                          closed_loop_reduction_check, g_gamma_expectation)
from .dynamics import EvolutionConfig, ab_scenario, evolve
from .gravity import (ConeGeometry, PoincareElement, gravitational_ab_expectation,
                      poincare_transport, tangent_frame_distinguishability)

__version__ = "0.1.0"
