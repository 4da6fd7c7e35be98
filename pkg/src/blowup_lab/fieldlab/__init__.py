"""Weighted functionals and identity audits on manufactured fields."""

from .functionals import FunctionalSeries, blowup_functional, functional_X, functional_Y, holder_gap
from .grid import Grid, GridField, TruncationError
from .identities import (
    CoefficientError,
    ElasticCoeffs,
    curl_weight_check,
    elastic_inequality,
    field_integrals,
    grad_decomposition_identity,
    q1_identities,
    q2_bound,
)
from .manufactured import Bump, ScalarField, VectorField, gradient_field, solenoidal_field, vector_ensemble
