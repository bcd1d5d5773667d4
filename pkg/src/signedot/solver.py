"""Exact balanced transport between discrete measures and the signed cost.

The transportation LP is solved by POT's network simplex, which also returns
the optimal basis potentials used as dual certificates.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

# POT probes every installed tensor framework on import; none are needed here.
for _key in (
    "POT_BACKEND_DISABLE_PYTORCH",
    "POT_BACKEND_DISABLE_JAX",
    "POT_BACKEND_DISABLE_TENSORFLOW",
    "POT_BACKEND_DISABLE_CUPY",
):
    os.environ.setdefault(_key, "1")

import ot  # noqa: E402

from .measures import (  # noqa: E402
    MASS_RTOL,
    DiscreteMeasure,
    SignedGridMeasure,
    SplitPair,
    mainini_split,
    normalize_pair,
    to_support,
)
from .metric import CostMatrix, cost_matrix, pairwise_toroidal  # noqa: E402

log = logging.getLogger(__name__)

DUAL_TOL = 1e-7
MAX_SIMPLEX_ITER = 100_000_000


@dataclass(frozen=True)
class TransportPlan:
    """Sparse optimal coupling with its cost and basis potentials."""

    src_index: np.ndarray
    dst_index: np.ndarray
    mass: np.ndarray
    total_cost_p: float
    p: int
    dual_src: np.ndarray
    dual_dst: np.ndarray
    src: DiscreteMeasure
    dst: DiscreteMeasure

    @property
    def wasserstein_p(self) -> float:
        return self.total_cost_p ** (1.0 / self.p)

    @property
    def entries(self):
        return list(zip(self.src_index.tolist(), self.dst_index.tolist(), self.mass.tolist()))

    def dense(self) -> np.ndarray:
        G = np.zeros((len(self.src), len(self.dst)))
        G[self.src_index, self.dst_index] = self.mass
        return G


@dataclass(frozen=True)
class SignedDistanceResult:
    value: float
    normalized: bool
    plan: TransportPlan | None
    split: SplitPair
    degenerate: bool = field(default=False)


def _check_balanced(src: DiscreteMeasure, dst: DiscreteMeasure) -> None:
    if len(src) == 0 or len(dst) == 0:
        raise ValueError("transport requires non-empty supports")
    ms, md = src.total_mass, dst.total_mass
    if abs(ms - md) > MASS_RTOL * max(ms, md):
        raise ValueError(f"mass mismatch: {ms!r} vs {md!r}")


def solve_transport(
    src: DiscreteMeasure,
    dst: DiscreteMeasure,
    p: int,
    cost: CostMatrix | None = None,
) -> TransportPlan:
    """Exact optimal plan for costs ``toroidal_distance ** p``."""
    if src is None or dst is None:
        raise ValueError("transport requires non-empty supports")
    _check_balanced(src, dst)
    if cost is None:
        cost = cost_matrix(src, dst, p)
    a = np.ascontiguousarray(src.weights)
    b = np.ascontiguousarray(dst.weights)
    G, info = ot.emd(
        a, b, cost.entries, numItermax=MAX_SIMPLEX_ITER, log=True,
        check_marginals=False,
    )
    if info["result_code"] != 1:
        raise RuntimeError(f"network simplex did not converge: {info['warning']}")
    rows, cols = np.nonzero(G > 0.0)
    mass = G[rows, cols]
    total = math.fsum(mass * cost.entries[rows, cols])
    return TransportPlan(
        src_index=rows,
        dst_index=cols,
        mass=mass,
        total_cost_p=max(total, 0.0),
        p=cost.p,
        dual_src=np.asarray(info["u"], dtype=np.float64),
        dual_dst=np.asarray(info["v"], dtype=np.float64),
        src=src,
        dst=dst,
    )


def wasserstein(src: DiscreteMeasure, dst: DiscreteMeasure, p: int) -> float:
    return solve_transport(src, dst, p).wasserstein_p


def grid_wasserstein(
    alpha: SignedGridMeasure, beta: SignedGridMeasure, p: int, power: bool = False
) -> float:
    """``W_p`` between two non-negative grid images of equal mass.

    Two zero images are at distance 0. With ``power=True`` returns ``W_p^p``.
    """
    a, _ = to_support(alpha)
    b, _ = to_support(beta)
    if a is None and b is None:
        return 0.0
    plan = solve_transport(a, b, p)
    return plan.total_cost_p if power else plan.wasserstein_p


def signed_wasserstein(
    mu: SignedGridMeasure,
    nu: SignedGridMeasure,
    p: int,
    normalize: bool = True,
    tol_rel: float = MASS_RTOL,
) -> SignedDistanceResult:
    """Signed cost ``W_p(mu+ + nu-, nu+ + mu-)``.

    With ``normalize`` the split is rescaled to unit masses whenever its two
    halves differ in mass by more than ``tol_rel``; otherwise unequal masses
    are an error.
    """
    split = mainini_split(mu, nu)
    if split.C_S == 0.0 and split.C_T == 0.0:
        return SignedDistanceResult(0.0, False, None, split, degenerate=True)
    if normalize:
        split = normalize_pair(split, tol_rel)
    src, _ = to_support(split.S)
    dst, _ = to_support(split.T)
    if src is None or dst is None:
        raise ValueError("degenerate split: one side has no mass")
    plan = solve_transport(src, dst, p)
    return SignedDistanceResult(plan.wasserstein_p, split.normalized, plan, split)


@dataclass(frozen=True)
class DualityReport:
    passed: bool
    primal: float
    dual: float
    lipschitz_dual: float
    worst_feasibility: float
    worst_lipschitz: float
    gap: float

    def __bool__(self):
        return self.passed


def check_lp_duality(
    plan: TransportPlan, cost: CostMatrix | None = None, tol: float = DUAL_TOL
) -> DualityReport:
    """Certify any plan through its LP potentials.

    Checks ``u_i + v_j <= c_ij`` everywhere and ``sum u a + sum v b == primal``.
    The Lipschitz fields of the report are left at zero.
    """
    if cost is None:
        cost = cost_matrix(plan.src, plan.dst, plan.p)
    u, v = plan.dual_src, plan.dual_dst
    primal = plan.total_cost_p
    feas = u[:, None] + v[None, :] - cost.entries
    worst_feas = float(max(feas.max(), 0.0))
    dual = math.fsum(np.concatenate([u * plan.src.weights, v * plan.dst.weights]))
    # relative gap, with an absolute floor for (near) zero-cost problems
    gap = abs(primal - dual) / max(abs(primal), 1e-5)
    passed = worst_feas <= tol and gap <= tol
    return DualityReport(passed, primal, dual, dual, worst_feas, 0.0, gap)


def check_w1_duality(
    plan: TransportPlan, cost: CostMatrix | None = None, tol: float = DUAL_TOL
) -> DualityReport:
    """Certify a ``p = 1`` plan through the Lipschitz dual.

    The basis potentials must pass :func:`check_lp_duality`. They are then
    extended to the 1-Lipschitz function ``f(x) = min_j d(x, y_j) - v_j`` on
    the union of both supports, which is checked for the Lipschitz property on
    every pair and for ``<f, src - dst> == primal``.
    """
    if plan.p != 1:
        raise ValueError("duality certificate applies to p = 1 plans")
    lp = check_lp_duality(plan, cost, tol)
    v = plan.dual_dst
    a, b = plan.src.weights, plan.dst.weights
    primal = plan.total_cost_p

    pts = np.concatenate([plan.src.points, plan.dst.points])
    d_all = pairwise_toroidal(pts, plan.dst.points)
    f = np.min(d_all - v[None, :], axis=1)
    dd = pairwise_toroidal(pts, pts)
    lip = f[:, None] - f[None, :] - dd
    worst_lip = float(max(lip.max(), 0.0))
    k = len(a)
    lip_dual = math.fsum(np.concatenate([f[:k] * a, -f[k:] * b]))

    gap = max(lp.gap, abs(primal - lip_dual) / max(abs(primal), 1e-5))
    passed = lp.worst_feasibility <= tol and worst_lip <= tol and gap <= tol
    return DualityReport(passed, primal, lp.dual, lip_dual, lp.worst_feasibility, worst_lip, gap)
