"""Score-vector solvers: PageRank, Cesaro-averaged power method, the
regularized power method with its objective-increase stopping rule, an exact
first-order minimizer of the robust objective, and a brute-force simplex-grid
oracle for tiny instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_matrix import SparseStochasticMatrix, uniform_vector
from .norms import (NormPair, ObjectiveValue, UncertaintySpec, g2, phi,
                    phi_value, subgradient_phi)

STOP_PHI_INCREASE = "phi_increase"
STOP_MAX_ITER = "max_iter"
STOP_TOLERANCE = "tolerance"

# default pair used whenever a solver needs an objective but the caller gave
# no uncertainty model: both norms Euclidean, unit budget
_DEFAULT_SPEC = UncertaintySpec(epsilon=1.0, pair=NormPair.L2_L2)

# averaged_power switches to the dense pair-doubling path when the matrix is
# small and the term count is large; above this size the dense n^3 work and
# n^2 memory stop paying for themselves
_DOUBLING_MAX_N = 600
_DOUBLING_MIN_K = 2048


@dataclass
class SolveReport:
    """Outcome of an iterative solve.

    phi_history holds (iteration, objective value) pairs; iteration 0 is the
    starting point.  For the phi_increase stop the final iterate is the one
    preceding the first recorded increase.
    """

    final: np.ndarray
    phi_history: list[tuple[int, float]]
    iterations_used: int
    stop_reason: str
    objective: ObjectiveValue


@dataclass
class SolverConfig:
    """Knobs shared by the iterative solvers."""

    alpha: float = 0.85
    tol: float = 1e-10
    max_iter: int = 100_000
    gamma0: float = 1.0
    step_policy: str = "geometric"   # or "sqrt_k": gamma0 / sqrt(k)
    md_epochs: int = 45
    md_iters_per_epoch: int = 200

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.step_policy not in ("geometric", "sqrt_k"):
            raise ValueError(f"unknown step policy {self.step_policy!r}")


def pagerank(P: SparseStochasticMatrix, alpha: float = 0.85, tol: float = 1e-10,
             max_iter: int = 100_000, spec: UncertaintySpec | None = None) -> SolveReport:
    """Fixed point of x <- alpha P x + (1 - alpha) e to l1 tolerance tol.

    The teleport matrix is never materialized; each step is one sparse matvec
    plus a constant shift.  Successive iterates contract by alpha, so stopping
    when they are within tol leaves a fixed-point residual <= alpha * tol.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    spec = spec or _DEFAULT_SPEC
    n = P.n
    e = uniform_vector(n)
    x = e.copy()
    history = [(0, phi_value(P, x, spec))]
    stop_reason = STOP_MAX_ITER
    iterations = 0
    for k in range(1, max_iter + 1):
        x_next = alpha * P.matvec(x) + (1.0 - alpha) * e
        delta = float(np.abs(x_next - x).sum())
        x = x_next
        iterations = k
        history.append((k, phi_value(P, x, spec)))
        if delta <= tol:
            stop_reason = STOP_TOLERANCE
            break
    return SolveReport(x, history, iterations, stop_reason, phi(P, x, spec))


def _cesaro_pair_doubling(dense: np.ndarray, K: int) -> np.ndarray:
    """x_K = (1/K) sum_{j<K} P^j e computed with O(log K) dense matmuls.

    Maintains pairs (P^c, S_c) where S_c is the *average* of the first c
    powers; both factors stay column-stochastic, so the combination
    S_{r+c} = (r S_r + c P^r S_c) / (r + c) is numerically benign.
    """
    n = dense.shape[0]
    pow_c = dense.copy()
    avg_c = np.eye(n)
    c = 1
    pow_r: np.ndarray | None = None
    avg_r: np.ndarray | None = None
    r = 0
    k = K
    while k:
        if k & 1:
            if pow_r is None:
                pow_r, avg_r, r = pow_c.copy(), avg_c.copy(), c
            else:
                avg_r = (r * avg_r + c * (pow_r @ avg_c)) / (r + c)
                pow_r = pow_r @ pow_c
                r += c
        k >>= 1
        if k:
            avg_c = (avg_c + pow_c @ avg_c) / 2.0
            pow_c = pow_c @ pow_c
            c *= 2
    return avg_r @ uniform_vector(n)


def averaged_power(P: SparseStochasticMatrix, K: int) -> np.ndarray:
    """Cesaro average (e + Pe + ... + P^{K-1} e) / K.

    Satisfies ||P x_K - x_K||_1 = ||P^K e - e||_1 / K <= 2/K for every K and
    every column-stochastic P, including cyclic ones where plain power
    iteration oscillates.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if P.n <= _DOUBLING_MAX_N and K > _DOUBLING_MIN_K:
        return _cesaro_pair_doubling(P.to_dense(), K)
    current = uniform_vector(P.n)
    total = current.copy()
    for _ in range(K - 1):
        current = P.matvec(current)
        total += current
    return total / K


def dominant_eigenvector(P: SparseStochasticMatrix, tol: float = 1e-6) -> np.ndarray:
    """A simplex vector with ||P x - x||_1 <= tol via Cesaro averaging.

    Uses K = ceil(2 / tol) averaged-power terms, which meets the residual
    bound unconditionally (no spectral-gap assumption).
    """
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    return averaged_power(P, math.ceil(2.0 / tol))


def regularized_power_method(P: SparseStochasticMatrix, spec: UncertaintySpec,
                             max_iter: int = 100_000,
                             stall_tol: float = 1e-12) -> SolveReport:
    """Power method with 1/(k+1) uniform mixing, stopped at the first rise
    of the robust objective.

    Starts at e (iteration 0); iteration k produces
    x_k = (1 - 1/(k+1)) P x_{k-1} + (1/(k+1)) e, which is the Cesaro average
    of the first k+1 power-iteration terms.  Stops at the first k with
    phi(x_k) > phi(x_{k-1}) + stall_tol and returns x_{k-1}; plateaus continue
    until max_iter.
    """
    e = uniform_vector(P.n)
    x_prev = e.copy()
    phi_prev = phi_value(P, x_prev, spec)
    history = [(0, phi_prev)]
    for k in range(1, max_iter + 1):
        w = 1.0 / (k + 1)
        x = (1.0 - w) * P.matvec(x_prev) + w * e
        phi_k = phi_value(P, x, spec)
        history.append((k, phi_k))
        if phi_k > phi_prev + stall_tol:
            return SolveReport(x_prev, history, k, STOP_PHI_INCREASE,
                               phi(P, x_prev, spec))
        x_prev, phi_prev = x, phi_k
    return SolveReport(x_prev, history, max_iter, STOP_MAX_ITER, phi(P, x_prev, spec))


def _entropic_step(x: np.ndarray, g: np.ndarray, step: float) -> np.ndarray:
    # multiplicative update; shifting g by its max keeps exp() in range and
    # cancels in the normalization
    w = x * np.exp(-step * (g - g.max()))
    return w / w.sum()


def mirror_descent_minimize(P: SparseStochasticMatrix, spec: UncertaintySpec,
                            config: SolverConfig | None = None,
                            x0: np.ndarray | None = None) -> SolveReport:
    """Minimize phi over the simplex by entropic mirror descent.

    Multiplicative updates x <- normalize(x * exp(-gamma_k g_k)) with
    g_k = subgradient_phi and steps scaled by 1/||g_k||_inf, tracking the best
    iterate seen.  The default "geometric" policy runs epochs of constant
    step, halving the step and restarting from the best iterate each epoch,
    which drives the nonsmooth objective to solver-level accuracy; "sqrt_k"
    is the classical gamma0/sqrt(k) decay.

    Unless x0 is given, descent starts from the stopped regularized-power
    iterate (cheap and already good), so the returned objective never exceeds
    that method's result.
    """
    config = config or SolverConfig()
    if x0 is None:
        x0 = regularized_power_method(P, spec, max_iter=config.max_iter).final
    x = np.asarray(x0, dtype=float).copy()
    best_x = x.copy()
    best_phi = phi_value(P, x, spec)
    # the uniform point is free to evaluate and never worse than untried
    e_phi = phi_value(P, uniform_vector(P.n), spec)
    if e_phi < best_phi:
        best_x, best_phi = uniform_vector(P.n), e_phi
    history = [(0, best_phi)]
    iterations = 0

    def advance(x, step_scale):
        nonlocal best_x, best_phi, iterations
        g = subgradient_phi(P, x, spec)
        g_inf = float(np.abs(g).max())
        if g_inf == 0.0:
            return None
        x = _entropic_step(x, g, step_scale / g_inf)
        iterations += 1
        value = phi_value(P, x, spec)
        if value < best_phi:
            best_phi = value
            best_x = x.copy()
            history.append((iterations, value))
        return x

    stationary = False
    if config.step_policy == "sqrt_k":
        for k in range(1, config.max_iter + 1):
            x = advance(x, config.gamma0 / math.sqrt(k))
            if x is None:
                stationary = True
                break
    else:
        gamma = config.gamma0
        for _ in range(config.md_epochs):
            x = best_x.copy()
            for _ in range(config.md_iters_per_epoch):
                x = advance(x, gamma)
                if x is None:
                    stationary = True
                    break
            if stationary:
                break
            gamma /= 2.0
    stop_reason = STOP_TOLERANCE if stationary else STOP_MAX_ITER
    return SolveReport(best_x, history, iterations, stop_reason,
                       phi(P, best_x, spec))


def _simplex_lattice_blocks(n: int, m: int, block_rows: int = 200_000):
    """Yield blocks of all lattice points (k_1/m, ..., k_n/m), sum k_i = m."""
    if n == 1:
        yield np.ones((1, 1))
        return

    def compositions(parts, budget):
        if parts == 0:
            yield ()
            return
        for k in range(budget + 1):
            for rest in compositions(parts - 1, budget - k):
                yield (k,) + rest

    rows = []
    for head in compositions(n - 2, m):
        rem = m - sum(head)
        k = np.arange(rem + 1)
        block = np.empty((rem + 1, n))
        block[:, :n - 2] = np.asarray(head, dtype=float)
        block[:, n - 2] = k
        block[:, n - 1] = rem - k
        rows.append(block)
        if sum(b.shape[0] for b in rows) >= block_rows:
            yield np.vstack(rows) / m
            rows = []
    if rows:
        yield np.vstack(rows) / m


def grid_oracle_minimize(P: SparseStochasticMatrix, spec: UncertaintySpec,
                         resolution: float) -> np.ndarray:
    """Exhaustive phi minimization on the simplex lattice with step ~resolution.

    Only for n <= 4; certifies the first-order solver on tiny instances.
    """
    n = P.n
    if n > 4:
        raise ValueError(f"grid oracle supports n <= 4, got n={n}")
    m = round(1.0 / resolution)
    if m < 1:
        raise ValueError(f"resolution {resolution} coarser than the whole simplex")
    dense = P.to_dense()
    shift = dense - np.eye(n)
    best_value = np.inf
    best_x = uniform_vector(n)
    use_l1 = spec.pair.residual_norm == "l1"
    for X in _simplex_lattice_blocks(n, m):
        R = X @ shift.T
        res = np.abs(R).sum(axis=1) if use_l1 else np.linalg.norm(R, axis=1)
        if spec.pair is NormPair.L2_L2:
            pen = np.linalg.norm(X, axis=1)
        else:
            c = spec.weights(n)
            if spec.pair is NormPair.L1_G1:
                pen = _g1_batch(X, c)
            else:
                pen = np.array([g2(row, c) for row in X])
        values = res + spec.epsilon * pen
        i = int(values.argmin())
        if values[i] < best_value:
            best_value = float(values[i])
            best_x = X[i].copy()
    return best_x


def _g1_batch(X: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Row-wise g1 via the threshold scan, vectorized over a block."""
    A = np.abs(X)
    order = np.argsort(-A, axis=1, kind="stable")
    A_s = np.take_along_axis(A, order, axis=1)
    C_s = c[order]
    cum_c = np.cumsum(C_s, axis=1)
    prev_c = cum_c - C_s
    prev_ca = np.cumsum(C_s * A_s, axis=1) - C_s * A_s
    candidates = A_s * (1.0 - prev_c) + prev_ca
    t0 = np.sum(C_s * A_s, axis=1)
    return np.minimum(t0, candidates.min(axis=1))


def suggest_epsilon(n: int, q: float, m: float) -> float:
    """Budget heuristic sqrt(q n) / m for out-degree uncertainty.

    q is the fraction of pages whose out-degree is only known to +-1, m the
    average out-degree.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must be in (0, 1], got {q}")
    if not m > 0:
        raise ValueError(f"m must be > 0, got {m}")
    return math.sqrt(q * n) / m
