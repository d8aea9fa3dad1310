"""Logarithmic potential operators on planar domains: discretization,
spectra, Schatten norms and isoperimetric checks against the unit disc."""
from .geometry import (Disc, DomainError, Polygon, RasterGrid, Triangle, area, contains,
                       load_domain, rasterize, sample_uniform, scale_to_area)
from .discretize import GridTooFine, assemble, self_weight
from .spectral import Spectrum, SchattenEstimate, eigen_sym, schatten_from_spectrum
from .disc_oracle import bessel_j, bessel_zero, disc_opnorm, disc_schatten
from .trace_mc import TraceEstimate, cyclic_trace_mc

__version__ = "0.1.0"

__all__ = [
    "Disc", "DomainError", "Polygon", "RasterGrid", "Triangle", "area", "contains",
    "load_domain", "rasterize", "sample_uniform", "scale_to_area", "GridTooFine", "assemble",
    "self_weight", "Spectrum", "SchattenEstimate", "eigen_sym", "schatten_from_spectrum",
    "bessel_j", "bessel_zero", "disc_opnorm", "disc_schatten", "TraceEstimate",
    "cyclic_trace_mc",
]
