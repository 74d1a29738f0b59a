"""detgreen: regularized determinants of conjugated dbar-Laplacian families
and Green-kernel symplectic pairings on disc and torus models, plus a small
formal algebra of products of distributions.

The package splits into compute modules (surface, spectral, zeta, green,
symplectic, prodist), a deterministic selftest suite, and a CLI front end.
"""

from .green import GreenCoeffTable, coeff_table, green_value, reproduction_constant
from .laurent import LaurentCocycle
from .prodist import (ProDistribution, circle_delta, evaluate, format_prodist,
                      module_multiply, normalize, parse_prodist, smooth_density,
                      tensor_product)
from .spectral import (ConjugatedFamily, SpectralDecomposition, assemble_family,
                       eigen_spectrum, variation_trace_terms)
from .surface import DiscretizedSurface, SmoothBump, build_surface, bump_function
from .symplectic import (HarmonicForm, atiyah_bott_form, harmonic_reduce,
                         omega_contour_oracle, omega_series)
from .zeta import (AsymptoticFit, ZetaResult, fit_asymptotics, theta_from_spectrum,
                   zeta_prime_zero)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticFit",
    "ConjugatedFamily",
    "DiscretizedSurface",
    "GreenCoeffTable",
    "HarmonicForm",
    "LaurentCocycle",
    "ProDistribution",
    "SmoothBump",
    "SpectralDecomposition",
    "ZetaResult",
    "assemble_family",
    "atiyah_bott_form",
    "build_surface",
    "bump_function",
    "circle_delta",
    "coeff_table",
    "eigen_spectrum",
    "evaluate",
    "fit_asymptotics",
    "format_prodist",
    "green_value",
    "harmonic_reduce",
    "module_multiply",
    "normalize",
    "omega_contour_oracle",
    "omega_series",
    "parse_prodist",
    "reproduction_constant",
    "smooth_density",
    "tensor_product",
    "theta_from_spectrum",
    "variation_trace_terms",
    "zeta_prime_zero",
    "__version__",
]
