"""Phase-field regularisation of cohesive fracture in one dimension.

Modules
-------
material_law
    Degradation laws, assumption checks and the eps-regularisation.
profile_ode
    Optimal-profile ODE: classification, time of flight, integration.
cohesive_law
    Cohesive density ``g`` by quadrature, ``s_frac`` and the small-jump exponent.
sharp_model
    Critical points of the sharp cohesive energy on a bar.
critical_point_solver
    Shooting construction of critical points of the regularised energy.
experiments
    Eps-sweeps and figure data.
cli
    Command-line front end.
"""

from .errors import NumericalFailure, ShootingError
from .material_law import (
    CustomLaw,
    MaterialLaw,
    PrototypeP,
    PrototypeQ,
    RegularizedLaw,
    ValidationReport,
    law_from_config,
    make_prototype_p,
    make_prototype_q,
    regularize,
    validate_assumptions,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "NumericalFailure",
    "ShootingError",
    "MaterialLaw",
    "PrototypeQ",
    "PrototypeP",
    "CustomLaw",
    "RegularizedLaw",
    "ValidationReport",
    "validate_assumptions",
    "regularize",
    "make_prototype_q",
    "make_prototype_p",
    "law_from_config",
]
