"""Numerical verification of horizontal Simons-type identities for hypersurfaces in Heisenberg groups."""

from .extrinsic import SurfaceGeometry
from .surface_defs import GALLERY_IDS, Region, SurfaceDef, gallery, sample_points
from .verifier import (
    CATALOG,
    CheckReport,
    Tolerances,
    appendix_criteria,
    check_contracted_simons,
    check_hhJ_identity_H2,
    check_kato,
    check_properties,
    check_simons_full,
    check_simons_kato,
)

__all__ = [
    "CATALOG",
    "CheckReport",
    "GALLERY_IDS",
    "Region",
    "SurfaceDef",
    "SurfaceGeometry",
    "Tolerances",
    "appendix_criteria",
    "check_contracted_simons",
    "check_hhJ_identity_H2",
    "check_kato",
    "check_properties",
    "check_simons_full",
    "check_simons_kato",
    "gallery",
    "sample_points",
]

__version__ = "0.1.0"
