"""Monic orthogonal polynomials for e^{-V} and their projection kernel.

The three-term recurrence pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k
pi_{k-1}(x) is built by the Stieltjes procedure on a quadrature rule for
the weight.  The rank-n Christoffel-Darboux kernel carries the weight
one-sidedly on its first argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import (
    QuadratureRule,
    WeightSpec,
    hermite_tilted_rule,
)

__all__ = [
    "RecurrenceTable",
    "PolyCoeffs",
    "build_recurrence",
    "eval_monic",
    "eval_monic_deriv",
    "eval_monic_stack",
    "extract_coeffs",
    "cd_kernel_k0",
    "cd_kernel_k0_sum",
]

# below this relative separation the ratio form of the kernel loses
# more than half the mantissa, so the confluent form takes over
DIAG_TOL = 1e-8


@dataclass(frozen=True)
class RecurrenceTable:
    """Recurrence data for the monic orthogonal polynomials of e^{-V}.

    alpha has length `size` (centers alpha_0..alpha_{size-1}); beta, h and
    kappa have length size+1 with beta[0] unused.  h_k = <pi_k, pi_k> and
    kappa_k = h_k^{-1/2}.
    """

    alpha: np.ndarray
    beta: np.ndarray
    h: np.ndarray
    kappa: np.ndarray
    size: int

    def __post_init__(self):
        for name in ("alpha", "beta", "h", "kappa"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.alpha.size != self.size:
            raise ValueError("alpha must have length size")
        if self.h.size != self.size + 1 or self.beta.size != self.size + 1:
            raise ValueError("beta and h must have length size+1")
        if np.any(self.h <= 0) or np.any(self.beta[1:] <= 0):
            raise ValueError("norms and couplings must be positive")


def build_recurrence(
    weight: WeightSpec,
    N: int,
    rule: QuadratureRule | None = None,
) -> RecurrenceTable:
    """Stieltjes procedure: recurrence coefficients for pi_0..pi_N.

    Inner products are taken on `rule` (default: a tilted-Hermite rule
    refined until the norms h_k stabilize to 1e-12 relative).
    """
    if N < 1:
        raise ValueError(f"table size must be >= 1, got {N}")
    if rule is not None:
        return _stieltjes(rule, N)
    m = max(400, 4 * N + 4 * weight.degree)
    table = _stieltjes(hermite_tilted_rule(weight, m), N)
    while True:
        m2 = 2 * m
        table2 = _stieltjes(hermite_tilted_rule(weight, m2), N)
        if np.all(np.abs(table.h - table2.h) <= 1e-12 * table2.h) and np.all(
            np.abs(table.alpha - table2.alpha) <= 1e-12 * (1.0 + np.abs(table2.alpha))
        ):
            return table2
        m, table = m2, table2
        if m > 25600:
            raise RuntimeError(
                "recurrence coefficients did not stabilize; "
                "supply a larger quadrature rule explicitly"
            )


def _stieltjes(rule: QuadratureRule, N: int) -> RecurrenceTable:
    x, w = rule.nodes, rule.weights
    alpha = np.zeros(N)
    beta = np.zeros(N + 1)
    h = np.zeros(N + 1)
    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    h[0] = np.dot(w, p_cur * p_cur)
    for k in range(N):
        alpha[k] = np.dot(w, x * p_cur * p_cur) / h[k]
        if k == 0:
            p_next = (x - alpha[k]) * p_cur
        else:
            p_next = (x - alpha[k]) * p_cur - beta[k] * p_prev
        h_next = np.dot(w, p_next * p_next)
        if h_next <= 0:
            raise RuntimeError(
                f"lost positivity of the squared norm at degree {k + 1}; "
                "the quadrature rule is too small for this table size"
            )
        h[k + 1] = h_next
        beta[k + 1] = h_next / h[k]
        p_prev, p_cur = p_cur, p_next
    kappa = 1.0 / np.sqrt(h)
    return RecurrenceTable(alpha=alpha, beta=beta, h=h, kappa=kappa, size=N)


def eval_monic(table: RecurrenceTable, k: int, x):
    """pi_k(x) by forward recurrence; x may be a scalar or array."""
    if not (0 <= k <= table.size):
        raise ValueError(f"degree {k} outside table range 0..{table.size}")
    x = np.asarray(x, dtype=float)
    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    for j in range(k):
        p_next = (x - table.alpha[j]) * p_cur - table.beta[j] * p_prev
        p_prev, p_cur = p_cur, p_next
    return p_cur if p_cur.ndim else float(p_cur)


def eval_monic_deriv(table: RecurrenceTable, k: int, x):
    """pi_k'(x) from the differentiated recurrence."""
    if not (0 <= k <= table.size):
        raise ValueError(f"degree {k} outside table range 0..{table.size}")
    x = np.asarray(x, dtype=float)
    p_prev, p_cur = np.zeros_like(x), np.ones_like(x)
    d_prev, d_cur = np.zeros_like(x), np.zeros_like(x)
    for j in range(k):
        p_next = (x - table.alpha[j]) * p_cur - table.beta[j] * p_prev
        d_next = p_cur + (x - table.alpha[j]) * d_cur - table.beta[j] * d_prev
        p_prev, p_cur = p_cur, p_next
        d_prev, d_cur = d_cur, d_next
    return d_cur if d_cur.ndim else float(d_cur)


def eval_monic_stack(table: RecurrenceTable, kmax: int, x) -> np.ndarray:
    """Array of shape (kmax+1,) + x.shape with rows pi_0(x)..pi_kmax(x)."""
    if not (0 <= kmax <= table.size):
        raise ValueError(f"degree {kmax} outside table range 0..{table.size}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x - table.alpha[0]
    for j in range(1, kmax):
        out[j + 1] = (x - table.alpha[j]) * out[j] - table.beta[j] * out[j - 1]
    return out


@dataclass(frozen=True)
class PolyCoeffs:
    """Monomial coefficients (descending degree) used by the finite identities.

    b holds pi_n; c holds kappa_{n-1}^2 pi_{n-1} padded with a leading zero
    to the same length n+1, so b[0] = 1 and c[0] = 0.
    """

    b: np.ndarray
    c: np.ndarray
    n: int


def _monic_coeffs(table: RecurrenceTable, n: int) -> np.ndarray:
    """Descending monomial coefficients of pi_n by synthetic expansion."""
    p_prev = np.array([1.0])  # pi_0
    if n == 0:
        return p_prev
    p_cur = np.array([1.0, -table.alpha[0]])  # pi_1
    for j in range(1, n):
        p_next = np.convolve(p_cur, [1.0, -table.alpha[j]])
        p_next[2:] -= table.beta[j] * p_prev
        p_prev, p_cur = p_cur, p_next
    return p_cur


def extract_coeffs(table: RecurrenceTable, n: int) -> PolyCoeffs:
    if not (1 <= n <= table.size):
        raise ValueError(f"degree {n} outside table range 1..{table.size}")
    b = _monic_coeffs(table, n)
    c = np.zeros(n + 1)
    c[1:] = table.kappa[n - 1] ** 2 * _monic_coeffs(table, n - 1)
    return PolyCoeffs(b=b, c=c, n=n)


def cd_kernel_k0(
    table: RecurrenceTable, weight: WeightSpec, n: int, x: float, y: float
) -> float:
    """Rank-n projection kernel K0(x, y), weight on the first argument.

    Uses the two-term ratio form away from the diagonal and the confluent
    (derivative) form when |x - y| < 1e-8 (1 + |x|).
    """
    if not (1 <= n <= table.size):
        raise ValueError(f"order {n} outside table range 1..{table.size}")
    kap2 = table.kappa[n - 1] ** 2
    pref = math.exp(-weight(x))
    if abs(x - y) < DIAG_TOL * (1.0 + abs(x)):
        dn = eval_monic_deriv(table, n, x)
        dn1 = eval_monic_deriv(table, n - 1, x)
        pn = eval_monic(table, n, x)
        pn1 = eval_monic(table, n - 1, x)
        return pref * kap2 * (dn * pn1 - dn1 * pn)
    num = eval_monic(table, n, x) * eval_monic(table, n - 1, y) - eval_monic(
        table, n - 1, x
    ) * eval_monic(table, n, y)
    return pref * kap2 * num / (x - y)


def cd_kernel_k0_sum(table: RecurrenceTable, weight: WeightSpec, n: int, xs, ys):
    """K0 on a grid via the sum form e^{-V(x)} sum_k kappa_k^2 pi_k(x) pi_k(y).

    Returns an array of shape (len(xs), len(ys)).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    px = eval_monic_stack(table, n - 1, xs)
    py = eval_monic_stack(table, n - 1, ys)
    kap2 = table.kappa[: n] ** 2
    core = np.einsum("ki,k,kj->ij", px, kap2, py)
    return np.exp(-weight(xs))[:, None] * core
