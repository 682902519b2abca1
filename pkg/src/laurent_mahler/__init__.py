"""Laurent-property recurrences, cluster mutations and Mahler-measure entropies."""
from .laurent import (LaurentPoly, NotLaurent, ZeroCoordinate, DegreeProfile, add, mul,
                      div_exact, substitute, eval_complex, degree_profile, dvector,
                      format_poly, parse_poly)
from .extended import ExtComplex, XArray

__version__ = "0.1.0"

__all__ = [
    "LaurentPoly", "NotLaurent", "ZeroCoordinate", "DegreeProfile", "add", "mul",
    "div_exact", "substitute", "eval_complex", "degree_profile", "dvector",
    "format_poly", "parse_poly", "ExtComplex", "XArray",
]
