"""Amoebas of rational curves and plane curves: volumes, areas, bounds, rasters."""

from .density import critical_locus_sample, is_degenerate, pair_determinant
from .planecurve import (
    LatticePolygon,
    LaurentPolynomial,
    check_pr,
    fiber_roots,
    newton_polygon,
    parse_laurent,
    polygon_area,
    pr_bound,
    raster_amoeba,
)
from .quadrature import (
    DegenerateCurveError,
    QuadratureResult,
    decay_exponent,
    decompose_plane,
    diagnose,
    local_mass,
    tail_mass,
    vol2,
)
from .ratfun import (
    INFINITY,
    DomainError,
    ParseError,
    RationalComponent,
    RationalCurve,
    curve,
    parse_component,
    parse_curve,
    serialize_curve,
)
from .sheets import AmoebaRaster, SheetReport, area, enumerate_preimages, raster_forward, sheet_report, theorem41_bound
from .tropical import DirectionVector, end_asymptote_fit, hausdorff_distance, limit_directions

__all__ = [name for name in dir() if not name.startswith("_")]
