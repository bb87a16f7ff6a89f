"""Single-radius spherical mean transform: multipliers, inversion, Abel pairs and R-convexity."""
from .abel import AbelParams, EvenProfile, abel_forward, abel_inverse, local_theorem_pipeline
from .field import GridField, RadialProfile, load_field, radialize, save_field, sphere_quadrature
from .geometry import DomainMask, r_convex
from .inversion import (CounterexampleSpec, HarnessConfig, RegularizationPolicy, deconvolve,
                        rconvex_region_growing, support_theorem_harness, zalcman_field)
from .specfun import bessel_j, bessel_zeros, normalized_j
from .transform import (RepresentationKernel, SphereKernel, fixed_radius_transform,
                        quadrature_transform, spherical_mean)

__version__ = "0.1.0"

__all__ = [
    "AbelParams", "EvenProfile", "abel_forward", "abel_inverse", "local_theorem_pipeline",
    "GridField", "RadialProfile", "load_field", "radialize", "save_field", "sphere_quadrature",
    "DomainMask", "r_convex",
    "CounterexampleSpec", "HarnessConfig", "RegularizationPolicy", "deconvolve",
    "rconvex_region_growing", "support_theorem_harness", "zalcman_field",
    "bessel_j", "bessel_zeros", "normalized_j",
    "RepresentationKernel", "SphereKernel", "fixed_radius_transform", "quadrature_transform",
    "spherical_mean",
]
