"""Splitting solver for the reduced equality-constrained design.

The reduced problem

    min  tr(Y^-1) + (Nt-K)^2 / (P_T - tr Z)   over X_1..X_K, Y, Z
    s.t. rho_k tr(Q_k X_k) - tr(Q_k Y) = sigma^2   for each user,
         sum_k X_k = Y,  Y = Z,
         X in { PSD blocks with sum of traces <= P_T }

is solved by a balanced augmented Lagrangian sweep: one proximal step per
primal block (all closed-form, K+2 eigendecompositions of K x K matrices),
then a structured dual update whose only linear solve is against the cached
K x K Cholesky factor.  Nothing here touches an Nt-sized object, so the
per-iteration cost is O(K^4) independent of the antenna count.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve

from .feasibility import p_low_from_gram
from .linalg import monotone_scalar_root, positive_cubic_root


class NumericalDivergence(Exception):
    """Non-finite value in the solver state; try a smaller stepsize."""


@dataclass(frozen=True)
class SolverConfig:
    tau: float | None = None          # None -> norm-scaled default stepsize
    delta: float = 1e-4
    tol_violation: float = 1e-9
    max_iterations: int = 200000
    log_every: int = 0                # 0 disables the trace history
    debug_flip_z_sign: bool = False   # use the opposite Z-step sign (diagnostics only)

    def __post_init__(self):
        if self.tau is not None and self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.delta <= 0 or self.tol_violation <= 0:
            raise ValueError("delta and tol_violation must be positive")


@dataclass
class SolverState:
    x: np.ndarray        # (K, K, K) stack of per-user blocks
    y: np.ndarray        # (K, K)
    z: np.ndarray        # (K, K)
    x_prev: np.ndarray
    y_prev: np.ndarray
    z_prev: np.ndarray
    mu: np.ndarray       # (K,) real
    omega1: np.ndarray   # (K, K) Hermitian
    omega2: np.ndarray   # (K, K) Hermitian
    iteration: int = 0

    def copy(self):
        return SolverState(
            x=self.x.copy(), y=self.y.copy(), z=self.z.copy(),
            x_prev=self.x_prev.copy(), y_prev=self.y_prev.copy(), z_prev=self.z_prev.copy(),
            mu=self.mu.copy(), omega1=self.omega1.copy(), omega2=self.omega2.copy(),
            iteration=self.iteration,
        )


@dataclass(frozen=True)
class SolveReport:
    status: str          # "converged" or "iteration_cap"
    iterations: int
    final_violation: float
    objective: float
    trace_history: list | None = None


def _water_level(eigs, budget):
    """Smallest t >= 0 with sum(max(eigs - t, 0)) <= budget."""
    positive = eigs[eigs > 0.0]
    if positive.sum() <= budget:
        return 0.0
    s = np.sort(positive)[::-1]
    csum = np.cumsum(s)
    counts = np.arange(1, s.size + 1)
    levels = (csum - budget) / counts
    keep = np.nonzero(s > levels)[0][-1]
    return levels[keep]


def prox_x(x_tilde, power_budget):
    """Joint projection of the K blocks onto the PSD cone with a shared trace budget.

    Eigenvalues across all blocks are soft-thresholded by a common water
    level gamma/2, the smallest nonnegative level that brings the total
    positive mass within the budget.
    """
    w, v = np.linalg.eigh(x_tilde)
    level = _water_level(w.ravel(), power_budget)
    clipped = np.maximum(w - level, 0.0)
    return np.einsum("kij,kj,klj->kil", v, clipped, v.conj())


def prox_y(y_tilde, tau):
    """Proximal map of tr(Y^-1): each eigenvalue solves x^3 - s x^2 - tau = 0."""
    w, v = np.linalg.eigh(y_tilde)
    roots = positive_cubic_root(w, np.full_like(w, tau))
    return (v * roots[..., None, :]) @ v.conj().swapaxes(-1, -2)


def _z_shrink_level(eigs, tau, budget, null_dim):
    """Unique root of lam * (budget - sum(max(eigs - lam, 0)))^2 = tau * null_dim^2.

    On the interval where exactly m eigenvalues survive the shrinkage, the
    substitution w = budget - tr(Z) turns the equation into the same cubic
    solved by prox_y, so the root is located by testing each active count.
    """
    c = tau * float(null_dim) ** 2
    s = np.sort(eigs)[::-1]
    n = s.size

    sigma_m = budget - np.cumsum(s)
    m = np.arange(1, n + 1, dtype=float)
    roots = positive_cubic_root(sigma_m, m * c)
    candidates = np.empty(n + 1)
    candidates[0] = c / budget**2  # nothing survives
    candidates[1:] = (roots - sigma_m) / m

    # accept the candidate consistent with its own active count; exactly one
    # interval contains the root (ties at breakpoints give equal roots)
    upper = np.concatenate([[np.inf], s])
    lower = np.concatenate([s, [-np.inf]])
    slack = 1e-9 * (np.max(np.abs(s), initial=0.0) + candidates[0] + 1.0)
    valid = (candidates >= lower - slack) & (candidates <= upper + slack)
    if np.any(valid):
        idx = np.nonzero(valid)[0]
        trz = np.maximum(s[None, :] - candidates[idx, None], 0.0).sum(axis=1)
        residuals = candidates[idx] * (budget - trz) ** 2 - c
        best = float(candidates[idx[int(np.argmin(np.abs(residuals)))]])
    else:
        hi = max(s[0], 0.0) + c / budget**2
        best = monotone_scalar_root(
            lambda lam: lam * (budget - np.maximum(s - lam, 0.0).sum()) ** 2 - c, 0.0, hi
        )
    # Newton polish on the original equation removes the cubic's scaled error
    for _ in range(3):
        gap = budget - np.maximum(s - best, 0.0).sum()
        active = float(np.count_nonzero(s > best))
        slope = gap * gap + 2.0 * best * gap * active
        best = max(best - (best * gap * gap - c) / slope, 0.0)
    return best


def prox_z(z_tilde, tau, power_budget, n_tx, n_users):
    """Proximal map of the null-space power term (Nt-K)^2 / (P_T - tr Z).

    Shrinks the eigenvalues by the level lam solving the scalar equation
    above; the result always satisfies tr(Z) < P_T because
    P_T - tr(Z) = (Nt - K) sqrt(tau / lam) at the root.
    """
    w, v = np.linalg.eigh(z_tilde)
    level = _z_shrink_level(w, tau, power_budget, n_tx - n_users)
    clipped = np.maximum(w - level, 0.0)
    return (v * clipped[..., None, :]) @ v.conj().swapaxes(-1, -2)


def _quad_per_user(h_tilde, x_stack):
    """real(q_k^H X_k q_k) for each user, i.e. tr(Q_k X_k)."""
    return np.einsum("ik,kij,jk->k", h_tilde.conj(), x_stack, h_tilde).real


def _quad_diag(h_tilde, m):
    """real diag(H~^H M H~), i.e. tr(Q_k M) for each user."""
    return np.einsum("ik,ij,jk->k", h_tilde.conj(), m, h_tilde).real


def default_stepsize(instance):
    """0.9 over the Frobenius-norm bound on the constraint operator.

    The bound is exact in closed form: the SINR rows contribute
    rho_k^2 ||h_k||^4 and ||h_k||^4, the block-sum rows K^3, and the three
    identity blocks K^2 each.
    """
    norms4 = instance.channel_norms_sq**2
    k = float(instance.n_users)
    fro_sq = np.sum((instance.rho**2 + 1.0) * norms4) + k**3 + 3.0 * k**2
    return 0.9 / np.sqrt(fro_sq)


def initial_state(instance, p_low=None):
    """Isotropic interior start: X_k = (p0 / K^2) I with p0 = min(P_T, 2 p_low)."""
    k = instance.n_users
    if p_low is None:
        gram = instance.h_tilde.conj().T @ instance.h_tilde
        thresholds = 1.0 / (instance.rho - 1.0)
        lam, _, _ = p_low_from_gram(gram, thresholds, instance.noise_power)
        p_low = float(np.sum(lam))
    p0 = min(instance.power_budget, 2.0 * p_low)
    eye = np.eye(k, dtype=complex)
    x = np.broadcast_to((p0 / k**2) * eye, (k, k, k)).copy()
    y = x.sum(axis=0)
    return SolverState(
        x=x, y=y, z=y.copy(),
        x_prev=x.copy(), y_prev=y.copy(), z_prev=y.copy(),
        mu=np.zeros(k), omega1=np.zeros((k, k), dtype=complex),
        omega2=np.zeros((k, k), dtype=complex), iteration=0,
    )


def iterate(state, instance, dual, config):
    """One full sweep: proximal primal steps, extrapolated residuals, dual update.

    config.tau must be resolved to a number (solve() does this).
    """
    tau = config.tau
    q = instance.q_tilde
    ht = instance.h_tilde
    rho = instance.rho
    p_t = instance.power_budget

    x, y, z = state.x, state.y, state.z
    mu, om1, om2 = state.mu, state.omega1, state.omega2

    x_t = x - tau * ((rho * mu)[:, None, None] * q + om1[None, :, :])
    x_new = prox_x(x_t, p_t)
    y_t = y + tau * (np.tensordot(mu, q, axes=1) + om1 - om2)
    y_new = prox_y(y_t, tau)
    z_sign = -1.0 if config.debug_flip_z_sign else 1.0
    z_t = z + z_sign * tau * om2
    z_new = prox_z(z_t, tau, p_t, instance.n_tx, instance.n_users)

    x_bar = 2.0 * x_new - x
    y_bar = 2.0 * y_new - y
    z_bar = 2.0 * z_new - z
    r = rho * _quad_per_user(ht, x_bar) - _quad_diag(ht, y_bar) - instance.noise_power
    r1 = x_bar.sum(axis=0) - y_bar
    r2 = y_bar - z_bar

    rhs = r + dual.theta1 * _quad_diag(ht, r1) + dual.theta2 * _quad_diag(ht, r2)
    dmu = cho_solve(dual.l_factor, rhs) / tau
    if not np.all(np.isfinite(dmu)):
        raise NumericalDivergence(f"dual step became non-finite at sweep {state.iteration + 1}")
    kap = dual.kappa
    om1_new = om1 + (kap * dual.beta * r1 + kap * r2) / tau + ht @ ((dual.theta1 * dmu)[:, None] * ht.conj().T)
    om2_new = om2 + (kap * r1 + kap * dual.alpha * r2) / tau + ht @ ((dual.theta2 * dmu)[:, None] * ht.conj().T)

    return SolverState(
        x=x_new, y=y_new, z=z_new,
        x_prev=x, y_prev=y, z_prev=z,
        mu=mu + dmu, omega1=om1_new, omega2=om2_new,
        iteration=state.iteration + 1,
    )


def constraint_violation(state, instance):
    """Combined Euclidean norm of the three constraint residuals at the
    current (non-extrapolated) iterates."""
    r = (
        instance.rho * _quad_per_user(instance.h_tilde, state.x)
        - _quad_diag(instance.h_tilde, state.y)
        - instance.noise_power
    )
    r1 = state.x.sum(axis=0) - state.y
    r2 = state.y - state.z
    return float(np.sqrt(np.sum(r**2) + np.sum(np.abs(r1) ** 2) + np.sum(np.abs(r2) ** 2)))


def objective_value(state, instance):
    """tr(Y^-1) + (Nt-K)^2 / (P_T - tr Z) at the current iterates."""
    y_eigs = np.linalg.eigvalsh(state.y)
    head = float(np.sum(1.0 / y_eigs))
    slack = instance.power_budget - float(np.trace(state.z).real)
    return head + (instance.n_tx - instance.n_users) ** 2 / slack


def solve(instance, dual, config=None, init=None):
    """Run sweeps until the violation norm drops below config.tol_violation.

    Returns (final_state, SolveReport).  Hitting the iteration cap is reported
    via status "iteration_cap", not an exception.
    """
    config = config or SolverConfig()
    if config.tau is None:
        config = replace(config, tau=default_stepsize(instance))
    state = init.copy() if init is not None else initial_state(instance)

    trace = [] if config.log_every else None
    violation = constraint_violation(state, instance)
    status = "iteration_cap"
    if init is not None and violation <= config.tol_violation:
        status = "converged"
        steps = 0
    else:
        for steps in range(1, config.max_iterations + 1):
            state = iterate(state, instance, dual, config)
            violation = constraint_violation(state, instance)
            if not np.isfinite(violation):
                raise NumericalDivergence(f"violation became non-finite at sweep {steps}")
            if trace is not None and steps % config.log_every == 0:
                trace.append((state.iteration, violation, objective_value(state, instance)))
            if violation <= config.tol_violation:
                status = "converged"
                break

    report = SolveReport(
        status=status,
        iterations=state.iteration,
        final_violation=violation,
        objective=objective_value(state, instance),
        trace_history=trace,
    )
    return state, report
