"""Groups of torus homeomorphisms: rotation vectors, invariant averaging, class algebra.

The submodules layer bottom-up: mcg (integer matrix classes), maps (words
of generators and their lifts), measures (empirical measures and rotation
statistics), averaging (the invariant-measure construction), fixed_points,
covers (annulus doubling and the Klein involution), catalog (ready-made
maps and measures), scenario + cli (file-driven batch runs), verify (the
built-in checking suite).  The names used most often are re-exported here.
"""

from .averaging import (ConstructionTrace, GroupSpec, bounded_orbit_check,
                        construct_invariant, rotev_residual)
from .catalog import build_catalog, franks_cases
from .covers import (AnnulusMapSpec, check_sigma_commute, double_annulus,
                     klein_symmetrize, rho_bar)
from .errors import ConfigError, RotorError
from .fixed_points import (common_fixed_points, find_fixed_points,
                           franks_certificate)
from .maps import Generator, LiftedWord, MapGroup, Word, linear_part
from .mcg import (MCGClass, check_condition_star_star, classify_nilpotent,
                  spectral_class, torsion_order)
from .measures import (EmpiricalMeasure, estimate_rotation_set,
                       invariance_defect, irrotational_lift,
                       krylov_bogolyubov, pushforward, rotation_vector)
from .scenario import parse_scenario
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "AnnulusMapSpec", "ConfigError", "ConstructionTrace", "EmpiricalMeasure",
    "Generator", "GroupSpec", "LiftedWord", "MCGClass", "MapGroup",
    "RotorError", "Word", "bounded_orbit_check", "build_catalog",
    "check_condition_star_star", "check_sigma_commute", "classify_nilpotent",
    "common_fixed_points", "construct_invariant", "double_annulus",
    "estimate_rotation_set", "find_fixed_points", "franks_cases",
    "franks_certificate", "invariance_defect", "irrotational_lift",
    "klein_symmetrize", "krylov_bogolyubov", "linear_part", "parse_scenario",
    "pushforward", "rho_bar", "rotation_vector", "rotev_residual",
    "run_suite", "spectral_class", "torsion_order",
]
