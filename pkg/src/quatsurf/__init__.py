"""Conformal surface geometry in the quaternionic projective line.

The package models immersed surface patches in H and S^4 = HP^1 on
regular parameter grids, builds their quaternionic frame data (left and
right normals, mean curvature, the mean-curvature 2-sphere congruence
and its Hopf fields), evaluates the Willmore energy and its
Euler-Lagrange residual, performs the one-step and two-step Willmore
transforms, computes twistor lifts with a super-conformality
classification, and checks the 3-sphere duality.  A surface catalog, a
JSON/OBJ/CSV serialization layer, and the ``quatsurf`` command-line
interface sit on top.

Layering, bottom to top: :mod:`quatsurf.quaternion` (scalar algebra),
:mod:`quatsurf.qarray` (vectorized kernels), :mod:`quatsurf.qmatrix`
and :mod:`quatsurf.moebius` (2x2 quaternionic matrices and the
projective line), :mod:`quatsurf.chart` / :mod:`quatsurf.frames`
(sampled immersions and their frames), :mod:`quatsurf.functionals`,
:mod:`quatsurf.backlund`, :mod:`quatsurf.twistor` (the analysis
engine), and :mod:`quatsurf.catalog`, :mod:`quatsurf.analyze`,
:mod:`quatsurf.serialization`, :mod:`quatsurf.cli` (the shell).
"""

__version__ = "0.1.0"

from .errors import (DomainError, InconsistencyError, InputError,
                     NotConformalError, NotImmersedError, QuatSurfError,
                     SingularityError)
from .quaternion import (I, J, K, ONE, ZERO, Quaternion, dot_cross,
                         rotation_matrix, su2_matrix)
from .qmatrix import (QMat2, QVec2, adjoint_wrt, m2_inverse, plane_normals,
                      solve_sylvester, trace_pair)
from .moebius import (HPoint, Sphere2, induced_metric, moebius_apply,
                      sphere_contains, sphere_encode)
from .chart import SurfaceChart, conjugate_chart, jet_fields
from .frames import SurfaceGeometry
from .functionals import (FunctionalsReport, ResidualReport,
                          SuperConformalReport, cell_weights,
                          conformal_gauss_checks, degree_of_normal,
                          functionals_report, gauss_bonnet_defect,
                          hopf_line_checks, moebius_density_invariance,
                          moebius_transform_chart, stencil_interior_mask,
                          super_conformal_classify, willmore_residual_field)
from .backlund import (DualityReport, TransformResult, adjoint_field,
                       hopf_exchange_defect, integrate_one_form,
                       one_step_backward, one_step_forward,
                       s3_duality_check, two_step_backward,
                       two_step_forward, two_step_roundtrip_defect)
from .twistor import (HolomorphicityReport, TwistorLift,
                      classification_agreement, lift_holomorphicity_defect,
                      lift_plane_rank, twistor_lift, twistor_section)
from .catalog import FAMILIES, CatalogSpec, build, catalog_build
from .analyze import AnalyzeOptions, analyze, duality_report
from .serialization import (atomic_write_text, canonical_json,
                            load_surface_json, save_report_json,
                            save_surface_csv, save_surface_json,
                            save_surface_obj, surface_from_dict,
                            surface_to_dict)

__all__ = [
    "__version__",
    # errors
    "QuatSurfError", "DomainError", "SingularityError",
    "InconsistencyError", "NotImmersedError", "NotConformalError",
    "InputError",
    # scalar quaternion algebra
    "Quaternion", "ONE", "I", "J", "K", "ZERO", "dot_cross",
    "rotation_matrix", "su2_matrix",
    # 2x2 quaternionic linear algebra and the projective line
    "QVec2", "QMat2", "m2_inverse", "trace_pair", "adjoint_wrt",
    "plane_normals", "solve_sylvester",
    "HPoint", "Sphere2", "moebius_apply", "sphere_encode",
    "sphere_contains", "induced_metric",
    # charts and frames
    "SurfaceChart", "conjugate_chart", "jet_fields", "SurfaceGeometry",
    # functionals and invariants
    "FunctionalsReport", "ResidualReport", "SuperConformalReport",
    "functionals_report", "willmore_residual_field",
    "super_conformal_classify", "conformal_gauss_checks",
    "hopf_line_checks", "degree_of_normal", "gauss_bonnet_defect",
    "moebius_transform_chart", "moebius_density_invariance",
    "stencil_interior_mask", "cell_weights",
    # Willmore transforms and duality
    "TransformResult", "one_step_forward", "one_step_backward",
    "two_step_forward", "two_step_backward", "two_step_roundtrip_defect",
    "hopf_exchange_defect", "integrate_one_form", "adjoint_field",
    "DualityReport", "s3_duality_check",
    # twistor lifts
    "TwistorLift", "twistor_lift", "twistor_section", "lift_plane_rank",
    "HolomorphicityReport", "lift_holomorphicity_defect",
    "classification_agreement",
    # catalog, reports, files
    "CatalogSpec", "FAMILIES", "build", "catalog_build",
    "AnalyzeOptions", "analyze", "duality_report",
    "load_surface_json", "save_surface_json", "save_report_json",
    "save_surface_obj", "save_surface_csv", "surface_to_dict",
    "surface_from_dict", "canonical_json", "atomic_write_text",
]
