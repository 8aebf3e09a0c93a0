"""Numerical convexity checks for holomorphic mappings on D_p^n = {sum_j |z_j|^{p_j} < 1}."""

from .criterion import (CriterionEvaluation, ScanReport, TangentConstraint, evaluate_J,
                        project_tangent, scan, tangency)
from .errors import (AllSamplesSingular, DegenerateConstraint, DimensionMismatch, DPConvexError,
                     InvalidDomain, InvalidMapping, NonFiniteInput, ParamOutOfRange,
                     ShapeMismatch, SingularJacobian, SingularMatrix, StepTooLarge, ZeroPoint)
from .falsifier import SearchConfig, SearchResult, certify_campaign, minimize_J
from .geometry import DomainSpec, RhoResult, contains, minkowski, rho, rho_bar_gradient, sample_interior
from .hypotheses import (CheckReport, ConditionMargin, ExampleParams, check_theorem1,
                         check_theorem2, check_theorem3, check_theorem4, validate_example,
                         validate_example1, validate_example2, validate_example3,
                         validate_example4)
from .mappings import DerivativeBundle, MappingSpec, derivatives, derivatives_fd, evaluate

__version__ = "0.1.0"
