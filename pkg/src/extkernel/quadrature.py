"""Weight specifications and Gaussian quadrature rules.

Everything downstream integrates against a weight of the form e^{-V(s)},
with V an even-degree polynomial with positive leading coefficient, often
tilted by an exponential factor e^{a s}.  The rules built here are exact
(up to accumulation roundoff) for polynomials against their weight and
converge super-geometrically for entire integrands such as e^{a s}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "WeightSpec",
    "QuadratureRule",
    "QuadratureConvergenceError",
    "gauss_hermite_rule",
    "hermite_tilted_rule",
    "custom_weight_rule",
    "legendre_rule",
    "integrate_weighted",
    "default_rule_size",
    "stabilized_rule",
]

# exp() overflows just above 709; keep a margin
EXP_ARG_LIMIT = 700.0


class QuadratureConvergenceError(RuntimeError):
    """Raised when doubling the rule size fails to stabilize an integral."""


@dataclass(frozen=True)
class WeightSpec:
    """Potential V(x) = sum_k v_k x^k defining the weight e^{-V(x)}.

    The degree must be even with positive leading coefficient so that
    e^{-V(x) + a x} is integrable for every real a.
    """

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 3:
            raise ValueError("potential must have degree >= 2")
        if coeffs[-1] == 0.0:
            raise ValueError("leading coefficient must be nonzero")
        d = len(coeffs) - 1
        if d % 2 != 0:
            raise ValueError(f"potential degree must be even, got {d}")
        if coeffs[-1] <= 0.0:
            raise ValueError("leading coefficient must be positive")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("potential coefficients must be finite")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_gaussian(self) -> bool:
        """True when the weight is exactly e^{-x^2}."""
        return self.coefficients == (0.0, 0.0, 1.0)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def tilt_maximum(self, a: float) -> float:
        """max_s (a s - V(s)), the log of the largest tilted-weight value."""
        # stationary points solve V'(s) = a
        dcoef = np.polynomial.polynomial.polyder(self.coefficients)
        dcoef = np.array(dcoef, dtype=float)
        dcoef[0] -= a
        roots = np.polynomial.polynomial.polyroots(dcoef)
        real = roots[np.abs(roots.imag) < 1e-9].real
        if real.size == 0:
            return -math.inf
        vals = a * real - self(real)
        return float(np.max(vals))

    def check_tilt(self, a: float) -> None:
        m = self.tilt_maximum(a)
        if m > EXP_ARG_LIMIT:
            raise ValueError(
                f"tilted weight e^({a}*s - V(s)) peaks at exp({m:.1f}); "
                f"limit is exp({EXP_ARG_LIMIT:.0f})"
            )


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a fixed quadrature rule."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "custom-weight"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if nodes.size == 0:
            raise ValueError("rule must have at least one node")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be strictly positive")

    @property
    def size(self) -> int:
        return self.nodes.size


def _jacobi_eigendecomposition(alpha: np.ndarray, offdiag: np.ndarray, mu0: float):
    """Golub-Welsch: nodes/weights from the symmetric tridiagonal Jacobi matrix."""
    m = alpha.size
    if m == 1:
        return alpha.copy(), np.array([mu0])
    J = np.diag(alpha) + np.diag(offdiag, 1) + np.diag(offdiag, -1)
    vals, vecs = np.linalg.eigh(J)
    weights = mu0 * vecs[0, :] ** 2
    order = np.argsort(vals)
    return vals[order], weights[order]


def _hermite_nodes(m: int) -> np.ndarray:
    alpha = np.zeros(m)
    offdiag = np.sqrt(np.arange(1, m) / 2.0)
    if m == 1:
        return alpha
    J = np.diag(alpha) + np.diag(offdiag, 1) + np.diag(offdiag, -1)
    return np.sort(np.linalg.eigh(J)[0])


def _hermite_log_weights(nodes: np.ndarray, m: int) -> np.ndarray:
    """log of the Gauss-Hermite weights via the Christoffel function.

    w_i = 1 / sum_{k<m} p_k(x_i)^2 with p_k orthonormal for e^{-x^2};
    the running rescale keeps the tail weights relatively accurate,
    which eigenvector-based weights are not.
    """
    x = np.asarray(nodes, dtype=float)
    u_prev = np.zeros_like(x)
    u_cur = np.full_like(x, math.pi**-0.25)
    total = u_cur**2
    logscale = np.zeros_like(x)
    for k in range(1, m):
        u_next = (x * u_cur - math.sqrt((k - 1) / 2.0) * u_prev) / math.sqrt(k / 2.0)
        u_prev, u_cur = u_cur, u_next
        big = np.abs(u_cur) > 1e100
        if np.any(big):
            u_prev[big] *= 1e-100
            u_cur[big] *= 1e-100
            total[big] *= 1e-200
            logscale[big] += math.log(1e100)
        total = total + u_cur**2
    return -(np.log(total) + 2.0 * logscale)


def gauss_hermite_rule(m: int) -> QuadratureRule:
    """m-node Gauss rule for the weight e^{-s^2} on the real line."""
    if m < 1:
        raise ValueError(f"rule size must be >= 1, got {m}")
    nodes = _hermite_nodes(m)
    logw = _hermite_log_weights(nodes, m)
    # nodes whose weight underflows carry less mass than any tolerance
    # used downstream
    keep = logw > -745.0
    return QuadratureRule(nodes[keep], np.exp(logw[keep]), kind="hermite-based")


def hermite_tilted_rule(weight: WeightSpec, m: int) -> QuadratureRule:
    """Rule for e^{-V(s)} built by reweighting Gauss-Hermite nodes.

    Uses w_i e^{x_i^2 - V(x_i)} so that sum w_i' f(x_i) ~ int f e^{-V}.
    Exact for the Gaussian potential; converges super-geometrically for
    other even polynomial potentials as m grows.
    """
    nodes = _hermite_nodes(m)
    logw = _hermite_log_weights(nodes, m) + nodes**2 - weight(nodes)
    keep = logw > -745.0
    return QuadratureRule(nodes[keep], np.exp(logw[keep]), kind="hermite-based")


def custom_weight_rule(table, m: int) -> QuadratureRule:
    """m-node Gauss rule for e^{-V} from the weight's own recurrence table.

    The table must hold recurrence coefficients for indices 0..m; the
    weights sum to h_0 = int e^{-V}.
    """
    if m < 1:
        raise ValueError(f"rule size must be >= 1, got {m}")
    if table.size < m:
        raise ValueError(
            f"recurrence table of size {table.size} too short for an {m}-node rule"
        )
    alpha = np.asarray(table.alpha[:m], dtype=float)
    offdiag = np.sqrt(np.asarray(table.beta[1:m], dtype=float))
    nodes, weights = _jacobi_eigendecomposition(alpha, offdiag, float(table.h[0]))
    return QuadratureRule(nodes, weights, kind="custom-weight")


def legendre_rule(lo: float, hi: float, m: int) -> QuadratureRule:
    """Gauss-Legendre rule mapped affinely to [lo, hi]."""
    if m < 1:
        raise ValueError(f"rule size must be >= 1, got {m}")
    if not (lo < hi):
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    x, w = np.polynomial.legendre.leggauss(m)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return QuadratureRule(mid + half * x, half * w, kind="legendre-interval")


def integrate_weighted(f: Callable, rule: QuadratureRule) -> float:
    """sum_i w_i f(x_i); errors out naming the node if f is non-finite there."""
    vals = np.asarray(f(rule.nodes), dtype=float)
    if vals.shape != rule.nodes.shape:
        vals = np.array([f(x) for x in rule.nodes], dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        node = rule.nodes[bad][0]
        raise ValueError(f"integrand evaluated to a non-finite value at node {node!r}")
    return float(np.dot(rule.weights, vals))


def default_rule_size(n: int, r: int, degree: int) -> int:
    """Starting quadrature size for the ensemble integrals."""
    return max(200, 4 * n + 4 * r + 2 * degree)


def stabilized_rule(
    weight: WeightSpec,
    integrands: list[Callable],
    m0: int,
    rtol: float = 1e-10,
    cap: int = 6400,
) -> QuadratureRule:
    """Smallest tilted-Hermite rule whose integrals survive node doubling.

    Doubles m until every integrand changes by <= rtol (relative to
    max(1, |value|)) under a further doubling.
    """
    m = m0
    rule = hermite_tilted_rule(weight, m)
    vals = np.array([integrate_weighted(f, rule) for f in integrands])
    while m <= cap:
        rule2 = hermite_tilted_rule(weight, 2 * m)
        vals2 = np.array([integrate_weighted(f, rule2) for f in integrands])
        scale = np.maximum(1.0, np.abs(vals2))
        if np.all(np.abs(vals - vals2) <= rtol * scale):
            return rule2
        m, rule, vals = 2 * m, rule2, vals2
    raise QuadratureConvergenceError(
        f"integrals did not stabilize below {rtol} with up to {cap} nodes"
    )
