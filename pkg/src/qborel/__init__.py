"""q-Borel-Laplace summation toolkit."""
from .errors import (DegenerateOperator, DivisionNearZero, NonConvergent, NonFinite,
                     NotIncreasing, PoleHit, QBorelError, SingularDirection, WindowExhausted,
                     ZeroParameter)
from .qcore import (FormalSeries, LogPoint, QContext, QDifferenceOperator, operator_apply,
                    operator_from_json, operator_to_json, series_from_json, series_mul,
                    series_to_json)
from .formal import check_commutation, qborel_formal, qlaplace_formal
from .kernel import eq_kernel, halfpower_kernel_residual, kernel_identity_residual, log_eq
from .quad import (DEFAULT_CONFIG, LogFunction, Memoized, QuadratureConfig, borel_numeric,
                   growth_scan, laplace_numeric)
from .euler import (EulerFactor, SingularSet, euler_borel, euler_coeffs, euler_sum,
                    functional_residual, singular_directions, spiral_inverse_scan,
                    stokes_jump, stokes_n_correction, stokes_n_deviation)
from .newton import (BorelGerm, MultisumOrder, NewtonPolygon, morphism_checks, multisum,
                     newton_polygon, tilde_sequence)
from .product import (DecompositionTerm, EulerDecomposition, ProductSum, f1_eval, f2_eval,
                      product_sum, product_theorem_check, qeuler_carre_operator)

__all__ = [name for name in dir() if not name.startswith("_")]
