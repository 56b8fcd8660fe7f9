from .assembly import (
    FORMS,
    DirichletSystem,
    apply_dirichlet,
    assemble_boundary_load,
    assemble_form,
    assemble_load,
    error_norm,
    h1_matrix,
    load_degree,
    mass_matrix,
    stiffness_matrix,
)
from .elements import ReferenceElement, lagrange_basis, reference_element
from .quadrature import QuadratureRule, interval_rule, triangle_rule
from .space import FunctionSpace

__all__ = [
    "FORMS",
    "DirichletSystem",
    "FunctionSpace",
    "QuadratureRule",
    "ReferenceElement",
    "apply_dirichlet",
    "assemble_boundary_load",
    "assemble_form",
    "assemble_load",
    "error_norm",
    "h1_matrix",
    "interval_rule",
    "lagrange_basis",
    "load_degree",
    "mass_matrix",
    "reference_element",
    "stiffness_matrix",
    "triangle_rule",
]
