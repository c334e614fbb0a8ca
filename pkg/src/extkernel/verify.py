"""Named self-checks over a constructed kernel model.

Each check returns its worst residual against a fixed tolerance; the CLI
`verify` subcommand prints the table and fails if any check fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import identities
from .gram_oracle import build_gram, oracle_grid
from .orthopoly import cd_kernel_k0, cd_kernel_k0_sum, eval_monic_stack
from .source_kernel import (
    KernelModel,
    kernel_grid,
    kernel_grid_core,
    kernel_K,
    kernel_K_det_form,
    kernel_trace,
    vector_w,
)

__all__ = ["CheckResult", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


def _orthogonality(model: KernelModel) -> tuple[float, float]:
    n = model.spec.n
    s, w = model.rule.nodes, model.rule.weights
    pis = eval_monic_stack(model.table, n, s)
    gram = np.einsum("is,js,s->ij", pis, pis, w)
    expected = np.diag(model.table.h[: n + 1])
    return float(np.max(np.abs(gram - expected))), 1e-10 * float(np.max(model.table.h[: n + 1]))


def _trace(model: KernelModel) -> tuple[float, float]:
    return abs(kernel_trace(model) - model.spec.n), 1e-8


def _kernel_forms_agree(model: KernelModel) -> tuple[float, float]:
    pts = np.linspace(-3.0, 4.0, 7)
    worst = 0.0
    for x in pts:
        for y in pts:
            a = kernel_K(model, x, y)
            b = kernel_K_det_form(model, x, y)
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return worst, 1e-9


def _k0_forms_agree(model: KernelModel) -> tuple[float, float]:
    xs = np.linspace(-3.0, 4.0, 9)
    ys = xs + 0.37  # stay off the diagonal
    grid = cd_kernel_k0_sum(model.table, model.weight, model.spec.n, xs, ys)
    worst = 0.0
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            worst = max(worst, abs(grid[i, j] - cd_kernel_k0(model.table, model.weight, model.spec.n, x, y)))
    return worst, 1e-10


def _w_orthogonality(model: KernelModel) -> tuple[float, float]:
    n = model.spec.n
    s, w = model.rule.nodes, model.rule.weights
    wvals = vector_w(model, s)  # (r, m)
    pis = eval_monic_stack(model.table, n - 1, s)
    inner = np.einsum("rs,ks,s->rk", wvals, pis, w)
    norm = float(np.sqrt(np.max(np.einsum("rs,rs,s->r", wvals, wvals, w))))
    return float(np.max(np.abs(inner))), 1e-9 * max(1.0, norm)


def _reproducing(model: KernelModel) -> tuple[float, float]:
    pts = np.linspace(-2.0, 3.0, 5)
    s, w = model.rule.nodes, model.rule.weights
    Kxs = kernel_grid(model, pts, s)  # (5, m)
    core = kernel_grid_core(model, s, pts)  # (m, 5), weight on s stripped
    composed = (Kxs * w) @ core
    direct = kernel_grid(model, pts, pts)
    return float(np.max(np.abs(composed - direct))), 1e-7


def _projection_identities(model: KernelModel) -> tuple[float, float]:
    n, r = model.spec.n, model.spec.r
    worst = 0.0
    for j in range(r):
        for k in range(n):
            val = identities.projection_identity(model.table, n, j, k, model.rule)
            if k <= n - j - 2:
                worst = max(worst, abs(val))
            elif k == n - j - 1:
                worst = max(worst, abs(val - 1.0))
    return worst, 1e-9


def _qs_factorization(model: KernelModel) -> tuple[float, float]:
    qs = identities.build_QS(model)
    n, r = model.spec.n, model.spec.r
    worst = float(np.max(np.abs(qs.Q - qs.S @ model.B))) / max(1.0, float(np.max(np.abs(qs.Q))))
    kap2 = model.table.kappa[n - r : n] ** 2
    worst = max(worst, float(np.max(np.abs(np.diag(qs.S) - kap2))))
    worst = max(worst, float(np.max(np.abs(np.tril(qs.S, -1)))))
    return worst, 1e-9


def _oracle_agreement(model: KernelModel) -> tuple[float, float]:
    oracle = build_gram(model.spec, model.weight, rule=model.rule, table=model.table)
    xs = np.linspace(-4.0, 6.0, 21)
    ours = kernel_grid(model, xs, xs)
    ref = oracle_grid(oracle, xs, xs)
    scale = max(1.0, float(np.max(np.abs(ref))))
    return float(np.max(np.abs(ours - ref))) / scale, 1e-8


_CHECKS: list[tuple[str, Callable]] = [
    ("orthogonality", _orthogonality),
    ("kernel trace = n", _trace),
    ("K0 ratio vs sum form", _k0_forms_agree),
    ("solve vs determinant form", _kernel_forms_agree),
    ("w orthogonal to low degrees", _w_orthogonality),
    ("reproducing property", _reproducing),
    ("projection identities", _projection_identities),
    ("Q = S B factorization", _qs_factorization),
]


def run_checks(model: KernelModel, with_oracle: bool = False) -> list[CheckResult]:
    checks = list(_CHECKS)
    if with_oracle:
        checks.append(("agreement with Gram oracle", _oracle_agreement))
    results = []
    for name, fn in checks:
        residual, tol = fn(model)
        results.append(CheckResult(name=name, residual=residual, tolerance=tol))
    return results
