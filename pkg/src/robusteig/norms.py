"""Penalty norms g1/g2 and the robust objective phi with subgradients.

Both penalty norms are infimal convolutions

    g(x) = min over x = u + v of  ||u||_dom + sum_j c_j |v_j|

with the dominant norm ||.||_inf for g1 and ||.||_2 for g2, and weights
c_j = eps_j / eps formed from the per-column uncertainty budgets.  Their dual
characterizations drive both evaluation and subgradients:

    g1(x) = max { z.x : ||z||_1 <= 1, |z_j| <= c_j }
    g2(x) = max { z.x : ||z||_2 <= 1, |z_j| <= c_j }

and any optimizing z is a subgradient.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .graph_matrix import SparseStochasticMatrix, check_score_vector


class NormPair(enum.Enum):
    """Residual-norm / penalty-norm selection for the robust objective."""

    L1_G1 = "l1g1"
    L2_G2 = "l2g2"
    L2_L2 = "l2l2"

    @classmethod
    def from_string(cls, s: str) -> "NormPair":
        for p in cls:
            if p.value == s.lower():
                return p
        raise ValueError(f"unknown norm pair {s!r}; expected one of "
                         f"{[p.value for p in cls]}")

    @property
    def residual_norm(self) -> str:
        return "l1" if self is NormPair.L1_G1 else "l2"


@dataclass(frozen=True)
class UncertaintySpec:
    """Total budget eps, per-column budgets eps_j, and the norm pair.

    column_budgets may be a scalar (uniform eps_j), an array of length n, or
    None for the default eps_j = eps / n.  Weights c_j = eps_j / eps are what
    every formula consumes; see :meth:`weights`.
    """

    epsilon: float
    pair: NormPair = NormPair.L2_L2
    column_budgets: float | np.ndarray | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        cb = self.column_budgets
        if cb is not None:
            arr = np.atleast_1d(np.asarray(cb, dtype=float))
            if not (arr > 0).all():
                raise ValueError("all column budgets must be > 0")

    def weights(self, n: int) -> np.ndarray:
        """Return c_j = eps_j / eps as an array of length n."""
        cb = self.column_budgets
        if cb is None:
            return np.full(n, 1.0 / n)
        arr = np.asarray(cb, dtype=float)
        if arr.ndim == 0:
            return np.full(n, float(arr) / self.epsilon)
        if arr.shape != (n,):
            raise ValueError(f"column budgets have shape {arr.shape}, expected ({n},)")
        return arr / self.epsilon


@dataclass(frozen=True)
class ObjectiveValue:
    residual_term: float
    penalty_term: float
    total: float


def _check_weights(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if not (c > 0).all():
        raise ValueError("all weights c_j must be > 0")
    return c


def _g1_with_dual(x: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    """g1 value via the threshold scan plus an optimizing dual vector.

    The primal minimum over decompositions reduces to
    min_{t >= 0} t + sum_j c_j (|x_j| - t)_+ scanned over breakpoints
    t in {0} U {|x_j|}; the dual vector is the greedy fractional-knapsack
    fill of max{z.x : ||z||_1 <= 1, |z_j| <= c_j}.
    """
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    order = np.argsort(-a, kind="stable")
    a_s, c_s = a[order], c[order]
    cum_c = np.cumsum(c_s)
    prev_c = cum_c - c_s                       # sum of c over strictly larger |x|
    prev_ca = np.cumsum(c_s * a_s) - c_s * a_s
    candidates = a_s * (1.0 - prev_c) + prev_ca
    value = float(np.sum(c_s * a_s))           # t = 0
    if candidates.size:
        value = min(value, float(candidates.min()))
    fill = np.clip(1.0 - prev_c, 0.0, c_s)
    z = np.empty_like(a)
    z[order] = fill
    z *= np.sign(x)
    return value, z


def _g2_with_dual(x: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    """g2 value and optimizing dual z of max{z.x : ||z||_2 <= 1, |z_j| <= c_j}.

    The optimal z clamps x/rho at the box, z_j = clamp(x_j / rho, +-c_j); rho
    solves ||z(rho)||_2 = 1, found exactly on the sorted breakpoints
    |x_j| / c_j, unless the box absorbs the whole ball (sum of c_j^2 over the
    support <= 1), in which case g2 = sum_j c_j |x_j|.
    """
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    z = np.zeros_like(a)
    support = a > 0
    if not support.any():
        return 0.0, z
    if float(np.sum(c[support] ** 2)) <= 1.0:
        z[support] = np.sign(x[support]) * c[support]
        return float(np.sum(c[support] * a[support])), z
    a_s, c_s = a[support], c[support]
    breakpoints = a_s / c_s
    order = np.argsort(breakpoints, kind="stable")
    a_o, c_o, bp_o = a_s[order], c_s[order], breakpoints[order]
    m = a_o.size
    cum_a2 = np.concatenate(([0.0], np.cumsum(a_o ** 2)))                    # uncapped mass
    cum_c2_rev = np.concatenate((np.cumsum((c_o ** 2)[::-1])[::-1], [0.0]))  # capped mass
    cum_ca_rev = np.concatenate((np.cumsum((c_o * a_o)[::-1])[::-1], [0.0]))
    for k in range(m, -1, -1):
        capped_c2 = cum_c2_rev[k]
        uncapped_a2 = cum_a2[k]
        if capped_c2 >= 1.0 or uncapped_a2 == 0.0:
            continue
        rho = float(np.sqrt(uncapped_a2 / (1.0 - capped_c2)))
        lo = bp_o[k - 1] if k >= 1 else 0.0
        hi = bp_o[k] if k < m else np.inf
        if lo * (1.0 - 1e-12) <= rho <= hi * (1.0 + 1e-12) + 1e-300:
            value = float(cum_ca_rev[k] + uncapped_a2 / rho)
            z_sup = np.minimum(a_s / rho, c_s) * np.sign(x[support])
            z[support] = z_sup
            return value, z
    raise RuntimeError("g2 breakpoint scan found no consistent interval")  # pragma: no cover


def g1(x: np.ndarray, c: np.ndarray) -> float:
    """min over x = u + v of ||u||_inf + sum_j c_j |v_j| (O(n log n))."""
    return _g1_with_dual(x, _check_weights(c))[0]


def g2(x: np.ndarray, c: np.ndarray) -> float:
    """min over x = u + v of ||u||_2 + sum_j c_j |v_j| (O(n log n))."""
    return _g2_with_dual(x, _check_weights(c))[0]


def g_oracle(x: np.ndarray, c: np.ndarray, kind: str) -> float:
    """Independent reference evaluation of g1/g2 for testing.

    g1: exact greedy fractional knapsack on the dual budget problem.
    g2: golden-section search on the scalar Lagrangian dual
        q(rho) = rho/2 + sum_j [ x_j^2/(2 rho)        if |x_j| <= rho c_j
                                 c_j|x_j| - rho c_j^2/2  otherwise ].
    Intended for small n; shares no code path with g1/g2 above.
    """
    c = _check_weights(c)
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    if kind == "g1":
        budget = 1.0
        value = 0.0
        for j in np.argsort(-a, kind="stable"):
            take = min(float(c[j]), budget)
            value += take * float(a[j])
            budget -= take
            if budget <= 0.0:
                break
        return value
    if kind == "g2":
        if not (a > 0).any():
            return 0.0

        def q(rho):
            uncapped = a <= rho * c
            inner = float(np.sum(a[uncapped] ** 2)) / (2.0 * rho)
            outer = float(np.sum(c[~uncapped] * a[~uncapped])) \
                - rho * float(np.sum(c[~uncapped] ** 2)) / 2.0
            return rho / 2.0 + inner + outer

        lo = 1e-14
        hi = 2.0 * min(float(np.linalg.norm(a)), float(np.sum(c * a))) + 1.0
        invphi = (np.sqrt(5.0) - 1.0) / 2.0
        x1 = hi - invphi * (hi - lo)
        x2 = lo + invphi * (hi - lo)
        f1, f2 = q(x1), q(x2)
        for _ in range(200):
            if f1 <= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - invphi * (hi - lo)
                f1 = q(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + invphi * (hi - lo)
                f2 = q(x2)
        return float(min(f1, f2))
    raise ValueError(f"unknown oracle kind {kind!r}")


def _penalty_with_dual(x: np.ndarray, spec: UncertaintySpec) -> tuple[float, np.ndarray]:
    """Penalty-norm value and a subgradient of it at x."""
    x = np.asarray(x, dtype=float)
    if spec.pair is NormPair.L2_L2:
        nx = float(np.linalg.norm(x))
        if nx == 0.0:
            return 0.0, np.zeros_like(x)
        return nx, x / nx
    c = spec.weights(x.size)
    if spec.pair is NormPair.L1_G1:
        return _g1_with_dual(x, c)
    return _g2_with_dual(x, c)


def phi(P: SparseStochasticMatrix, x: np.ndarray, spec: UncertaintySpec) -> ObjectiveValue:
    """Robust objective: residual norm of P x - x plus eps times the penalty."""
    x = check_score_vector(x)
    if x.size != P.n:
        raise ValueError(f"vector has size {x.size}, matrix has n={P.n}")
    r = P.matvec(x) - x
    if spec.pair.residual_norm == "l1":
        residual_term = float(np.abs(r).sum())
    else:
        residual_term = float(np.linalg.norm(r))
    penalty_value, _ = _penalty_with_dual(x, spec)
    penalty_term = spec.epsilon * penalty_value
    return ObjectiveValue(residual_term, penalty_term, residual_term + penalty_term)


def phi_value(P: SparseStochasticMatrix, x: np.ndarray, spec: UncertaintySpec) -> float:
    return phi(P, x, spec).total


def subgradient_phi(P: SparseStochasticMatrix, x: np.ndarray, spec: UncertaintySpec) -> np.ndarray:
    """One valid subgradient of phi at x.

    Residual part: (P - I)^T sign(Px - x) for the l1 norm, or
    (P - I)^T (Px - x)/||Px - x||_2 for l2 (zero when Px = x).  Penalty part:
    eps times the optimizing dual vector of the penalty norm.
    """
    x = np.asarray(x, dtype=float)
    if x.size != P.n:
        raise ValueError(f"vector has size {x.size}, matrix has n={P.n}")
    r = P.matvec(x) - x
    if spec.pair.residual_norm == "l1":
        s = np.sign(r)
        g_res = P.rmatvec(s) - s
    else:
        nr = float(np.linalg.norm(r))
        if nr == 0.0:
            g_res = np.zeros_like(x)
        else:
            u = r / nr
            g_res = P.rmatvec(u) - u
    _, g_pen = _penalty_with_dual(x, spec)
    return g_res + spec.epsilon * g_pen
