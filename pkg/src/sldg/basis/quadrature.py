"""Gauss-Legendre and Gauss-Lobatto rules on the reference interval [-1, 1]."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy.special import roots_legendre


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights on [-1, 1]; weights sum to 2."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Integrate ``f`` over [-1, 1]."""
        return float(np.dot(self.weights, f(self.nodes)))

    def mapped(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights transported to the interval [a, b]."""
        half = 0.5 * (b - a)
        return a + half * (self.nodes + 1.0), half * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.

    Raises:
        ValueError: If ``n < 1``.
    """
    if n < 1:
        raise ValueError(f"Gauss-Legendre rule needs n >= 1, got {n}")
    nodes, weights = roots_legendre(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, kind="gauss-legendre")


@lru_cache(maxsize=None)
def gauss_lobatto(n: int) -> QuadratureRule:
    """n-point Gauss-Lobatto rule including both endpoints, exact for degree 2n-3.

    Interior nodes are the roots of P'_{n-1}; weights are 2 / (n (n-1) P_{n-1}(x)^2).

    Raises:
        ValueError: If ``n < 2``.
    """
    if n < 2:
        raise ValueError(f"Gauss-Lobatto rule needs n >= 2, got {n}")
    p_last = np.zeros(n)
    p_last[-1] = 1.0
    interior = legendre.legroots(legendre.legder(p_last)) if n > 2 else np.array([])
    nodes = np.concatenate(([-1.0], np.sort(np.real(interior)), [1.0]))
    weights = 2.0 / (n * (n - 1) * legendre.legval(nodes, p_last) ** 2)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, kind="gauss-lobatto")


def tensor_rule(rule_x: QuadratureRule, rule_y: QuadratureRule) -> Tuple[np.ndarray, ...]:
    """Flattened tensor-product rule: ``(xi, eta, weights)`` with x the slow index."""
    xi, eta = np.meshgrid(rule_x.nodes, rule_y.nodes, indexing="ij")
    w = np.outer(rule_x.weights, rule_y.weights)
    return xi.ravel(), eta.ravel(), w.ravel()
