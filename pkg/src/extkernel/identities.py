"""Finite identities tying the coefficient truncations to the kernel data.

Everything here works with real-rescaled quantities: the bookkeeping
factor -2*pi*i that appears when the construction is phrased through
boundary-value problems is divided out, so c_j here means the monomial
coefficients of kappa_{n-1}^2 pi_{n-1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_solve

from .orthopoly import (
    PolyCoeffs,
    RecurrenceTable,
    eval_monic,
    eval_monic_stack,
    extract_coeffs,
)
from .quadrature import QuadratureRule
from .source_kernel import KernelModel

__all__ = [
    "QSMatrices",
    "truncated_eval",
    "row_identity",
    "projection_identity",
    "build_QS",
    "build_S_projection",
]

# monomial-coefficient arithmetic degrades past this order
COEFF_STABLE_N = 12


@dataclass(frozen=True)
class QSMatrices:
    """Q = S B, with S upper triangular carrying the orthonormalizers."""

    Q: np.ndarray
    S: np.ndarray


def _warn_if_unstable(n: int) -> None:
    if n > COEFF_STABLE_N:
        warnings.warn(
            f"monomial-coefficient identities are unreliable for n={n} > "
            f"{COEFF_STABLE_N}",
            RuntimeWarning,
            stacklevel=3,
        )


def truncated_eval(coeffs: np.ndarray, j: int, z) -> np.ndarray:
    """Value of the degree-j truncation coeffs[0] z^j + ... + coeffs[j]."""
    if not (0 <= j < coeffs.size):
        raise ValueError(f"truncation order {j} out of range")
    return np.polynomial.polynomial.polyval(z, coeffs[j::-1])


def row_identity(table: RecurrenceTable, n: int, j: int, z) -> float:
    """P_n^j(z) kappa_{n-1}^2 pi_{n-1}(z) - Q_n^j(z) pi_n(z).

    Despite the high-degree products, the result is a polynomial of
    degree n-1 whose expansion starts at pi_{n-j-1}.
    """
    _warn_if_unstable(n)
    pc: PolyCoeffs = extract_coeffs(table, n)
    p = truncated_eval(pc.b, j, z)
    q = truncated_eval(pc.c, j, z)
    kap2 = table.kappa[n - 1] ** 2
    return p * kap2 * eval_monic(table, n - 1, z) - q * eval_monic(table, n, z)


def projection_identity(
    table: RecurrenceTable, n: int, j: int, k: int, rule: QuadratureRule
) -> float:
    """<P_n^j kappa_{n-1}^2 pi_{n-1} - Q_n^j pi_n, pi_k> on the given rule.

    Contract: 0 for k <= n-j-2 and exactly 1 for k = n-j-1.  The rule's
    weights must carry e^{-V}.
    """
    if not (0 <= k <= n - 1):
        raise ValueError(f"projection degree {k} out of range 0..{n - 1}")
    s = rule.nodes
    vals = row_identity(table, n, j, s) * eval_monic(table, k, s)
    return float(np.dot(rule.weights, vals))


def build_QS(model: KernelModel) -> QSMatrices:
    """Tilted integrals of the truncation rows, factorized as S B.

    Row i of Q (i = 0..r-1, corresponding to truncation order j = r-1-i)
    integrates the row polynomial against e^{a_l s} e^{-V(s)}; S is
    recovered as Q B^{-1} and is upper triangular with the squared
    orthonormalizing constants kappa_{n-r}^2..kappa_{n-1}^2 on the
    diagonal.
    """
    spec = model.spec
    n, r = spec.n, spec.r
    _warn_if_unstable(n)
    s, w = model.rule.nodes, model.rule.weights
    tilts = np.exp(np.multiply.outer(np.array(spec.a), s))  # (r, m)
    Q = np.empty((r, r))
    for i in range(r):
        j = r - 1 - i
        rowvals = row_identity(model.table, n, j, s)
        Q[i, :] = tilts @ (w * rowvals)
    S = lu_solve(model.B_lu, Q.T, trans=1).T  # solve S B = Q for S
    return QSMatrices(Q=Q, S=S)


def build_S_projection(model: KernelModel) -> np.ndarray:
    """S built independently by projecting the rows onto the monic basis.

    S[i, l] = kappa_{n-r+l}^2 <row_{j=r-1-i}, pi_{n-r+l}>.
    """
    spec = model.spec
    n, r = spec.n, spec.r
    s, w = model.rule.nodes, model.rule.weights
    pis = eval_monic_stack(model.table, n - 1, s)
    kap2 = model.table.kappa[n - r : n] ** 2
    S = np.empty((r, r))
    for i in range(r):
        j = r - 1 - i
        rowvals = row_identity(model.table, n, j, s)
        S[i, :] = kap2 * (pis[n - r : n] @ (w * rowvals))
    return S
