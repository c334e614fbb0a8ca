"""Finite-rank representation of the external-source correlation kernel.

The kernel splits as K(x, y) = K0(x, y) + e^{-V(x)} w(y)^t B^{-1} t(x)
where t stacks the top r monic orthogonal polynomials, B couples them to
the exponential tilts e^{a_j s}, and w is the part of the tilt family
orthogonal to all polynomials of degree < n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .orthopoly import (
    RecurrenceTable,
    build_recurrence,
    cd_kernel_k0,
    cd_kernel_k0_sum,
    eval_monic_stack,
)
from .quadrature import (
    EXP_ARG_LIMIT,
    QuadratureRule,
    WeightSpec,
    default_rule_size,
    stabilized_rule,
)

__all__ = [
    "SourceSpec",
    "KernelModel",
    "SingularSourceMatrixError",
    "build_model",
    "vector_t",
    "vector_v",
    "matrix_B",
    "vector_w",
    "kernel_K",
    "kernel_K_det_form",
    "kernel_grid",
    "kernel_diag",
    "kernel_trace",
]

SOURCE_SEPARATION_RTOL = 1e-6
COND_WARN_LIMIT = 1e12


class SingularSourceMatrixError(RuntimeError):
    """The coupling matrix B is singular to working precision."""


@dataclass(frozen=True)
class SourceSpec:
    """Matrix dimension n and the r distinct nonzero source eigenvalues."""

    n: int
    r: int
    a: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        object.__setattr__(self, "a", a)
        if not (1 <= self.r <= self.n):
            raise ValueError(f"need 1 <= r <= n, got r={self.r}, n={self.n}")
        if len(a) != self.r:
            raise ValueError(f"expected {self.r} source eigenvalues, got {len(a)}")
        if any(v == 0.0 for v in a):
            raise ValueError("source eigenvalues must be nonzero")
        for i in range(len(a) - 1):
            if a[i] <= a[i + 1]:
                raise ValueError("source eigenvalues must be strictly decreasing")
            if a[i] - a[i + 1] < SOURCE_SEPARATION_RTOL * max(1.0, abs(a[i])):
                raise ValueError(
                    f"source eigenvalues {a[i]} and {a[i + 1]} are too close; "
                    "near-coincident sources make the coupling matrix singular"
                )


@dataclass
class KernelModel:
    """Precomputed ingredients for pointwise kernel evaluation.

    `moments[k, j] = int pi_k(s) e^{a_j s} e^{-V(s)} ds` for k < n; B is its
    bottom r rows.  Immutable by convention after construction.
    """

    spec: SourceSpec
    weight: WeightSpec
    table: RecurrenceTable
    rule: QuadratureRule
    moments: np.ndarray
    B: np.ndarray
    B_lu: tuple
    B_cond: float


def vector_t(model: KernelModel, z):
    """(pi_{n-r}(z), ..., pi_{n-1}(z))^t."""
    n, r = model.spec.n, model.spec.r
    stack = eval_monic_stack(model.table, n - 1, z)
    return stack[n - r : n]


def vector_v(spec: SourceSpec, z):
    """(e^{a_1 z}, ..., e^{a_r z})^t, with an overflow guard."""
    z = np.asarray(z, dtype=float)
    args = np.multiply.outer(np.array(spec.a), z)
    if np.any(args > EXP_ARG_LIMIT):
        raise ValueError(
            f"exponential tilt overflows: max a_j*z = {float(np.max(args)):.1f} "
            f"> {EXP_ARG_LIMIT:.0f}"
        )
    return np.exp(args)


def _tilted_moments(
    spec: SourceSpec,
    table: RecurrenceTable,
    rule: QuadratureRule,
) -> np.ndarray:
    """moments[k, j] = int pi_k(s) e^{a_j s} e^{-V(s)} ds, k = 0..n-1.

    The rule's weights already carry e^{-V}, so only the polynomial and
    the tilt are evaluated at the nodes.
    """
    s, w = rule.nodes, rule.weights
    pis = eval_monic_stack(table, spec.n - 1, s)
    tilts = np.exp(np.multiply.outer(np.array(spec.a), s))  # (r, m)
    return np.einsum("ks,js,s->kj", pis, tilts, w)


def matrix_B(
    spec: SourceSpec,
    weight: WeightSpec,
    table: RecurrenceTable,
    rule: QuadratureRule,
):
    """Coupling matrix B_{ij} = <pi_{n-r-1+i}, e^{a_j s}> plus its LU data.

    Returns (B, lu_data, condition_estimate); raises if B is singular to
    working precision.
    """
    moments = _tilted_moments(spec, table, rule)
    B = moments[spec.n - spec.r : spec.n, :]
    return _factorize_B(B) + (moments,)


def _factorize_B(B: np.ndarray):
    try:
        lu = lu_factor(B)
    except Exception as exc:  # pragma: no cover - scipy raises on exact zeros
        raise SingularSourceMatrixError(
            "coupling matrix B could not be factorized; it is invertible in exact "
            "arithmetic, so enlarge the quadrature rule or the source gaps"
        ) from exc
    diag = np.abs(np.diag(lu[0]))
    if np.any(diag == 0.0) or np.min(diag) < 1e-300 * max(1.0, np.max(diag)):
        raise SingularSourceMatrixError(
            "coupling matrix B is singular to working precision; it is invertible "
            "in exact arithmetic, so enlarge the quadrature rule or the source gaps"
        )
    cond = float(np.linalg.cond(B, 1))
    return B, lu, cond


def build_model(
    spec: SourceSpec,
    weight: WeightSpec,
    rule: QuadratureRule | None = None,
    table: RecurrenceTable | None = None,
) -> KernelModel:
    """Assemble all kernel ingredients behind one shared quadrature rule."""
    for a in spec.a:
        weight.check_tilt(a)
    if table is None or table.size < spec.n:
        table = build_recurrence(weight, max(spec.n, 1))
    if rule is None:
        # worst integrand: top polynomial against the largest tilt
        a_worst = max(spec.a, key=abs)
        top = spec.n - 1

        def worst(s, _table=table, _a=a_worst, _k=top):
            stack = eval_monic_stack(_table, _k, s)
            return stack[_k] * np.exp(_a * s)

        m0 = default_rule_size(spec.n, spec.r, weight.degree)
        rule = stabilized_rule(weight, [worst], m0)
    B, lu, cond, moments = matrix_B(spec, weight, table, rule)
    return KernelModel(
        spec=spec,
        weight=weight,
        table=table,
        rule=rule,
        moments=moments,
        B=B,
        B_lu=lu,
        B_cond=cond,
    )


def vector_w(model: KernelModel, y):
    """w(y)^t = v(y)^t - int K0(s, y) v(s)^t ds.

    Expanding K0 in the orthonormal polynomials reduces the integral to
    the precomputed tilted moments, so w_j(y) = e^{a_j y} -
    sum_k kappa_k^2 pi_k(y) moments[k, j].
    """
    n = model.spec.n
    y = np.atleast_1d(np.asarray(y, dtype=float))
    v = vector_v(model.spec, y)  # (r, Ny)
    py = eval_monic_stack(model.table, n - 1, y)
    kap2 = model.table.kappa[: n] ** 2
    proj = np.einsum("kj,k,k...->j...", model.moments, kap2, py)
    return v - proj


def kernel_K(model: KernelModel, x: float, y: float) -> float:
    """K(x, y) = K0(x, y) + e^{-V(x)} w(y)^t B^{-1} t(x)."""
    k0 = cd_kernel_k0(model.table, model.weight, model.spec.n, x, y)
    t = np.ravel(vector_t(model, x))
    w = np.ravel(vector_w(model, y))
    z = lu_solve(model.B_lu, t)
    return k0 + math.exp(-model.weight(x)) * float(np.dot(w, z))


def kernel_K_det_form(model: KernelModel, x: float, y: float) -> float:
    """Same kernel via the bordered determinant -det([[0, w^t],[t, B]])/det B."""
    k0 = cd_kernel_k0(model.table, model.weight, model.spec.n, x, y)
    r = model.spec.r
    t = np.ravel(vector_t(model, x))
    w = np.ravel(vector_w(model, y))
    bordered = np.zeros((r + 1, r + 1))
    bordered[0, 1:] = w
    bordered[1:, 0] = t
    bordered[1:, 1:] = model.B
    sign_b, logdet_b = np.linalg.slogdet(model.B)
    sign_m, logdet_m = np.linalg.slogdet(bordered)
    if sign_b == 0:
        raise SingularSourceMatrixError("coupling matrix B is numerically singular")
    update = -sign_m * sign_b * math.exp(logdet_m - logdet_b)
    return k0 + math.exp(-model.weight(x)) * update


def kernel_grid_core(model: KernelModel, xs, ys) -> np.ndarray:
    """e^{V(x)} K(x, y) on the product grid; safe at far-out x.

    This is the polynomial-plus-tilt core with the one-sided weight
    stripped, which is what integrals over the first argument need.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    n = model.spec.n
    px = eval_monic_stack(model.table, n - 1, xs)
    py = eval_monic_stack(model.table, n - 1, ys)
    kap2 = model.table.kappa[: n] ** 2
    k0 = np.einsum("ki,k,kj->ij", px, kap2, py)
    t = px[n - model.spec.r : n]  # (r, Nx)
    w = vector_w(model, ys)  # (r, Ny)
    z = lu_solve(model.B_lu, t)
    return k0 + z.T @ w


def kernel_grid(model: KernelModel, xs, ys) -> np.ndarray:
    """K on the product grid xs x ys, shape (len(xs), len(ys))."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    core = kernel_grid_core(model, xs, ys)
    return np.exp(-model.weight(xs))[:, None] * core


def kernel_diag_core(model: KernelModel, xs) -> np.ndarray:
    """e^{V(x)} K(x, x) along a vector of points."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    n = model.spec.n
    px = eval_monic_stack(model.table, n - 1, xs)
    kap2 = model.table.kappa[: n] ** 2
    k0 = np.einsum("k,ki,ki->i", kap2, px, px)
    t = px[n - model.spec.r : n]
    w = vector_w(model, xs)
    z = lu_solve(model.B_lu, t)
    return k0 + np.einsum("ri,ri->i", z, w)


def kernel_diag(model: KernelModel, xs) -> np.ndarray:
    """K(x, x) along a vector of points."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return np.exp(-model.weight(xs)) * kernel_diag_core(model, xs)


def kernel_trace(model: KernelModel) -> float:
    """int K(x, x) dx via the model's rule; equals n for a valid model."""
    vals = kernel_diag_core(model, model.rule.nodes)
    return float(np.dot(model.rule.weights, vals))
