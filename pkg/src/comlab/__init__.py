"""Numerical toolkit for center-of-mass functionals on asymptotically flat 3-metrics."""

from .errors import (ComLabError, DegenerateSurface, MassZero, NewtonDiverged,
                     NoContraction, NonPositiveDefinite, TailNotDecaying,
                     TooFewSamples)
from .geometry import (ConformalFactor, MetricSpec, PerturbationField, PhiSpec,
                       PotentialTable, christoffel_at, dmetric_at, metric_at,
                       scalar_curvature_at)
from .quadrature import (RadialRule, SphereRule, integrate_annulus,
                         integrate_r3_decaying, integrate_sphere,
                         make_radial_rule, make_sphere_rule)
from .functionals import (ComSeries, LimitVerdict, adm_mass_at, c_cs_at,
                          c_cs_flat_at, com_series, limit_verdict,
                          radius_grid, scalar_moment_annulus)

__version__ = "0.1.0"
