"""Numerical laboratory for petals and hedgehogs of neutral fixed points."""

from .arithmetic import (BrjunoReport, ContinuedFractionExpansion, RotationAngle,
                         brjuno_sum, continued_fraction_expand,
                         evaluate_continued_fraction, liouville_angle, parse_angle)
from .compacta import (CompactSetApprox, check_complete_invariance, fill_to_full,
                       hausdorff_distance, naive_hausdorff)
from .conefield import ConeFieldSpec, PartialHyperbolicityCertificate, certify
from .germs import (Classification, FixedPointData, Germ, NormalFormData, PolyMap,
                    approximating_sequence, classify, henon_germ,
                    normalize_fixed_point, quadratic1d_germ,
                    semiparabolic_multiplicity, with_classification)
from .hedgehog import (HedgehogRun, HedgehogStage, hedgehog_approximate,
                       scan_periodic_points, strong_stable_lamination_sample)
from .manifolds import JetGraph, center_manifold_jet, shadowing_check, strong_stable_disc
from .petals import (DeltaRegion, PetalFamily, asymptotic_curve_sample, delta_contains,
                     local_attracting_petals, local_repelling_petals, maximal_petals,
                     petal_cycle, petal_touches_boundary)

__version__ = "0.1.0"

__all__ = [
    "BrjunoReport", "ContinuedFractionExpansion", "RotationAngle",
    "brjuno_sum", "continued_fraction_expand", "evaluate_continued_fraction",
    "liouville_angle", "parse_angle",
    "CompactSetApprox", "check_complete_invariance", "fill_to_full",
    "hausdorff_distance", "naive_hausdorff",
    "ConeFieldSpec", "PartialHyperbolicityCertificate", "certify",
    "Classification", "FixedPointData", "Germ", "NormalFormData", "PolyMap",
    "approximating_sequence", "classify", "henon_germ", "normalize_fixed_point",
    "quadratic1d_germ", "semiparabolic_multiplicity", "with_classification",
    "HedgehogRun", "HedgehogStage", "hedgehog_approximate",
    "scan_periodic_points", "strong_stable_lamination_sample",
    "JetGraph", "center_manifold_jet", "shadowing_check", "strong_stable_disc",
    "DeltaRegion", "PetalFamily", "asymptotic_curve_sample", "delta_contains",
    "local_attracting_petals", "local_repelling_petals", "maximal_petals",
    "petal_cycle", "petal_touches_boundary",
]
