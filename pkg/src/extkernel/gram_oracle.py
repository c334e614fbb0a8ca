"""Brute-force correlation kernel from Gram-matrix biorthogonalization.

The joint eigenvalue density is a product of two determinants: one from
the Vandermonde factor (polynomial family phi) and one from the source
tilts with the zero eigenvalues resolved into monomial rows (family psi).
Inverting the Gram matrix of the two families gives the correlation
kernel directly, independently of the finite-rank representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .orthopoly import RecurrenceTable, build_recurrence, eval_monic_stack
from .quadrature import (
    QuadratureRule,
    WeightSpec,
    default_rule_size,
    stabilized_rule,
)
from .source_kernel import SourceSpec

__all__ = ["GramOracle", "build_gram", "build_gram_sourcefree", "oracle_K", "oracle_grid"]


@dataclass
class GramOracle:
    """Gram matrix G_{ij} = <phi_i, psi_j> and its factorization.

    phi spans polynomials of degree < n (monomials or, for conditioning,
    the monic orthogonal family); psi is (e^{a_1 s}, ..., e^{a_r s},
    followed by polynomials of degree < n-r in the same basis style).
    """

    n: int
    a: tuple[float, ...]
    weight: WeightSpec
    table: RecurrenceTable
    rule: QuadratureRule
    basis: str
    G: np.ndarray
    G_lu: tuple
    G_cond: float

    def phi(self, x) -> np.ndarray:
        """Polynomial family, shape (n,) + x.shape."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.basis == "monomial":
            return np.vander(x, self.n, increasing=True).T
        return eval_monic_stack(self.table, self.n - 1, x)

    def psi(self, y) -> np.ndarray:
        """Tilt-plus-polynomial family, shape (n,) + y.shape."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        n, r = self.n, len(self.a)
        rows = np.empty((n, y.size))
        if r:
            rows[:r] = np.exp(np.multiply.outer(np.array(self.a), y))
        if n > r:
            if self.basis == "monomial":
                rows[r:] = np.vander(y, n - r, increasing=True).T
            else:
                rows[r:] = eval_monic_stack(self.table, n - r - 1, y)
        return rows


def build_gram(
    spec: SourceSpec,
    weight: WeightSpec,
    rule: QuadratureRule | None = None,
    table: RecurrenceTable | None = None,
    basis: str = "monic",
) -> GramOracle:
    return _build(spec.n, spec.a, weight, rule, table, basis)


def build_gram_sourcefree(
    n: int,
    weight: WeightSpec,
    rule: QuadratureRule | None = None,
    table: RecurrenceTable | None = None,
    basis: str = "monic",
) -> GramOracle:
    """Oracle for the source-free ensemble; its Gram matrix is the moment
    (Hankel) matrix in the monomial basis and the kernel reduces to the
    rank-n projection kernel."""
    return _build(n, (), weight, rule, table, basis)


def _build(
    n: int,
    a: tuple[float, ...],
    weight: WeightSpec,
    rule: QuadratureRule | None,
    table: RecurrenceTable | None,
    basis: str,
) -> GramOracle:
    if basis not in ("monic", "monomial"):
        raise ValueError(f"unknown basis {basis!r}")
    for av in a:
        weight.check_tilt(av)
    if table is None or table.size < n:
        table = build_recurrence(weight, max(n, 1))
    oracle = GramOracle(
        n=n,
        a=tuple(a),
        weight=weight,
        table=table,
        rule=rule if rule is not None else _default_rule(n, a, weight, table),
        basis=basis,
        G=np.empty(0),
        G_lu=(),
        G_cond=np.inf,
    )
    s, w = oracle.rule.nodes, oracle.rule.weights
    G = np.einsum("is,js,s->ij", oracle.phi(s), oracle.psi(s), w)
    try:
        lu = lu_factor(G)
    except Exception as exc:  # pragma: no cover
        raise RuntimeError(
            "Gram matrix is singular; check for duplicate source eigenvalues "
            "or an undersized quadrature rule"
        ) from exc
    diag = np.abs(np.diag(lu[0]))
    if np.any(diag == 0.0):
        raise RuntimeError(
            "Gram matrix is singular; check for duplicate source eigenvalues "
            "or an undersized quadrature rule"
        )
    oracle.G = G
    oracle.G_lu = lu
    oracle.G_cond = float(np.linalg.cond(G, 1))
    return oracle


def _default_rule(n: int, a: tuple[float, ...], weight: WeightSpec,
                  table: RecurrenceTable):
    """Doubling-stabilized rule for the worst Gram integrand."""
    a_worst = max(a, key=abs) if a else 0.0
    top = n - 1

    def worst(s, _k=top, _a=a_worst):
        stack = eval_monic_stack(table, _k, s)
        return stack[_k] * np.exp(_a * s)

    m0 = default_rule_size(n, max(len(a), 1), weight.degree)
    return stabilized_rule(weight, [worst], m0)


def oracle_K(oracle: GramOracle, x: float, y: float) -> float:
    """K(x, y) = e^{-V(x)} psi(y)^t G^{-1} phi(x)."""
    return float(oracle_grid(oracle, [x], [y])[0, 0])


def oracle_grid(oracle: GramOracle, xs, ys) -> np.ndarray:
    """Oracle kernel on the product grid, shape (len(xs), len(ys))."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    core = lu_solve(oracle.G_lu, oracle.psi(ys), trans=1).T @ oracle.phi(xs)  # (Ny, Nx)
    return np.exp(-oracle.weight(xs))[:, None] * core.T
