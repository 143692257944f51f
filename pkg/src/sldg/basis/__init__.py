"""Quadrature rules and modal Legendre bases."""

from .modal import (
    SPACE_1D,
    SPACE_P,
    SPACE_Q,
    Basis1D,
    Basis2D,
    ModalPoly1D,
    ModalPoly2D,
    evaluate,
    get_basis,
    integrate_product,
    l2_project,
    legendre_derivatives,
    legendre_values,
    lift_degree,
    mode_indices,
    n_modes,
    project_solution_1d,
    project_solution_2d,
)
from .quadrature import QuadratureRule, gauss_legendre, gauss_lobatto, tensor_rule

__all__ = [
    "SPACE_1D",
    "SPACE_P",
    "SPACE_Q",
    "Basis1D",
    "Basis2D",
    "ModalPoly1D",
    "ModalPoly2D",
    "QuadratureRule",
    "evaluate",
    "gauss_legendre",
    "gauss_lobatto",
    "get_basis",
    "integrate_product",
    "l2_project",
    "legendre_derivatives",
    "legendre_values",
    "lift_degree",
    "mode_indices",
    "n_modes",
    "project_solution_1d",
    "project_solution_2d",
    "tensor_rule",
]
