"""Obstructions to unitary equivalence of continuous normal matrix fields.

Two fields with the same eigenvalues at every point are unitarily
equivalent pointwise; whether a continuous intertwiner exists globally is
decided by an integer 2-cocycle with twisted coefficients.  This package
discretizes the base as a simplicial complex, transports eigenlines along
edges and computes that class exactly.
"""

from .complexes import (
    SimplicialComplex,
    build_builtin,
    circle,
    icosphere,
    interval,
    load_complex,
    mapping_torus_antipodal,
    parse_complex_spec,
    product_circle_sphere,
    save_complex,
    subdivide,
)
from .errors import UniequivError
from .fields import MatrixField, builtin_field, check_admissible, conjugated, pullback
from .matrix_core import match_projections, spectral_decompose
from .monodromy import LocalSystem, build_local_system, pi1_rep
from .obstruction import (
    ObstructionReport,
    chern_numbers,
    obstruction_class,
    obstruction_cochain,
    synthesize_intertwiner,
    verify_relations,
)
from .settings import DEFAULT, Tolerances
from .snf import smith_normal_form
from .twisted_cohomology import CohomologyGroup, classes_equal, cohomology_group, is_coboundary

__version__ = "0.1.0"

__all__ = [
    "CohomologyGroup",
    "DEFAULT",
    "LocalSystem",
    "MatrixField",
    "ObstructionReport",
    "SimplicialComplex",
    "Tolerances",
    "UniequivError",
    "build_builtin",
    "build_local_system",
    "builtin_field",
    "check_admissible",
    "chern_numbers",
    "circle",
    "classes_equal",
    "cohomology_group",
    "conjugated",
    "icosphere",
    "interval",
    "is_coboundary",
    "load_complex",
    "mapping_torus_antipodal",
    "match_projections",
    "obstruction_class",
    "obstruction_cochain",
    "parse_complex_spec",
    "pi1_rep",
    "product_circle_sphere",
    "pullback",
    "save_complex",
    "smith_normal_form",
    "spectral_decompose",
    "subdivide",
    "synthesize_intertwiner",
    "verify_relations",
]
