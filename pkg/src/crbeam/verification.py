"""Independent oracles for validating the solver.

Nothing here shares code with the structured dual update it checks: the dense
path materializes the full constraint operator and inverts the regularized
normal matrix directly, the K=1 oracle minimizes the one-dimensional objective
by golden-section search, and the KKT check fits multipliers numerically from
a candidate solution.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .linalg import null_space_basis
from .rbal import SolverState, prox_x, prox_y, prox_z
from .scenario import evaluate_sinr


def _vec(m):
    return np.asarray(m).reshape(-1, order="F")


def _unvec(v, k):
    return v.reshape(k, k, order="F")


@dataclass(frozen=True)
class DenseSystem:
    """Literal constraint operator D and right-hand side b, plus the dense
    factorization of D D^H + delta I."""

    d: np.ndarray
    b: np.ndarray
    delta: float
    normal_factor: tuple


def build_dense_system(instance, delta):
    """Assemble D = [A; B; C] row blocks exactly as defined.

    Row block 1 (K rows): SINR equalities, rho_k vec(Q_k)^H on the k-th x
    block and -vec(Q_k)^H on y.  Row block 2 (K^2 rows): sum_k X_k - Y = 0.
    Row block 3 (K^2 rows): Y - Z = 0.
    """
    k = instance.n_users
    k2 = k * k
    m = k + 2 * k2
    n = k * k2 + 2 * k2
    d = np.zeros((m, n), dtype=complex)
    for i in range(k):
        q_vec = _vec(instance.q_tilde[i])
        d[i, i * k2 : (i + 1) * k2] = instance.rho[i] * q_vec.conj()
        d[i, k * k2 : k * k2 + k2] = -q_vec.conj()
    eye = np.eye(k2)
    for i in range(k):
        d[k : k + k2, i * k2 : (i + 1) * k2] = eye
    d[k : k + k2, k * k2 : k * k2 + k2] = -eye
    d[k + k2 :, k * k2 : k * k2 + k2] = eye
    d[k + k2 :, k * k2 + k2 :] = -eye

    b = np.zeros(m, dtype=complex)
    b[:k] = instance.noise_power

    normal = d @ d.conj().T + delta * np.eye(m)
    return DenseSystem(d=d, b=b, delta=float(delta), normal_factor=cho_factor(normal, lower=True))


def _pack_u(state):
    parts = [_vec(xk) for xk in state.x]
    parts.append(_vec(state.y))
    parts.append(_vec(state.z))
    return np.concatenate(parts)


def _pack_lam(state):
    return np.concatenate([state.mu.astype(complex), _vec(state.omega1), _vec(state.omega2)])


def reference_iterate(state, instance, dense, tau):
    """One literal balanced-ALM step with materialized u, lambda and D.

    Uses the same proximal operators as the structured path; everything else
    (the gradient step D^H lambda, the extrapolated residual D(2u+ - u) - b,
    and the dense solve against D D^H + delta I) is computed from scratch.
    """
    k = instance.n_users
    k2 = k * k
    u = _pack_u(state)
    lam = _pack_lam(state)

    u_t = u - tau * (dense.d.conj().T @ lam)
    x_t = np.stack([_unvec(u_t[i * k2 : (i + 1) * k2], k) for i in range(k)])
    y_t = _unvec(u_t[k * k2 : k * k2 + k2], k)
    z_t = _unvec(u_t[k * k2 + k2 :], k)

    x_new = prox_x(x_t, instance.power_budget)
    y_new = prox_y(y_t, tau)
    z_new = prox_z(z_t, tau, instance.power_budget, instance.n_tx, instance.n_users)

    u_new = np.concatenate([_vec(xk) for xk in x_new] + [_vec(y_new), _vec(z_new)])
    p = dense.d @ (2.0 * u_new - u) - dense.b
    lam_new = lam + cho_solve(dense.normal_factor, p) / tau

    mu_new = lam_new[:k]
    assert np.max(np.abs(mu_new.imag)) < 1e-10 * (1.0 + np.max(np.abs(mu_new.real)))
    return SolverState(
        x=x_new, y=y_new, z=z_new,
        x_prev=state.x.copy(), y_prev=state.y.copy(), z_prev=state.z.copy(),
        mu=mu_new.real.copy(),
        omega1=_unvec(lam_new[k : k + k2], k),
        omega2=_unvec(lam_new[k + k2 :], k),
        iteration=state.iteration + 1,
    )


def assemble_structured_inverse(instance, dual):
    """Materialize the block-form inverse of D D^H + delta I.

    Built purely from the cached scalars/diagonals (kappa, alpha, beta,
    Theta_1, Theta_2) and the K x K Schur matrix L, so multiplying it against
    the densely constructed normal matrix checks the structured dual update.
    """
    k = instance.n_users
    k2 = k * k
    b1 = -np.stack([_vec(instance.q_tilde[i]).conj() for i in range(k)])  # (K, K^2)
    v1 = dual.theta1[:, None] * b1
    v2 = dual.theta2[:, None] * b1
    l_inv = np.linalg.inv(dual.l_matrix).astype(complex)

    eye = np.eye(k2)
    kap = dual.kappa
    s12 = -l_inv @ v1
    s13 = -l_inv @ v2
    v1l = v1.conj().T @ l_inv
    v2l = v2.conj().T @ l_inv
    return np.block([
        [l_inv, s12, s13],
        [-v1l, kap * dual.beta * eye + v1l @ v1, kap * eye + v1l @ v2],
        [-v2l, kap * eye + v2l @ v1, kap * dual.alpha * eye + v2l @ v2],
    ])


def dense_dual_inverse_check(instance, dual):
    """Max-abs entry of structured_inverse @ (D D^H + delta I) - I."""
    k = instance.n_users
    m = k + 2 * k * k
    dense = build_dense_system(instance, dual.delta)
    normal = dense.d @ dense.d.conj().T + dual.delta * np.eye(m)
    structured = assemble_structured_inverse(instance, dual)
    return float(np.max(np.abs(structured @ normal - np.eye(m))))


def scalar_oracle_k1(scenario, channel):
    """Single-user oracle: minimize 1/x + (Nt-1)^2/(P_T - x) over x >= x_min.

    x is the scalar reduced variable, x_min = threshold * noise / ||h||^2 the
    SINR floor.  Golden-section search; no solver code involved.  Returns
    (x_opt, objective, degenerate) where degenerate means the SINR constraint
    is slack at the optimum.
    """
    if scenario.n_users != 1:
        raise ValueError("oracle requires K = 1")
    h = np.asarray(channel).reshape(-1)
    hnorm2 = float(np.vdot(h, h).real)
    p_t = scenario.power_budget
    x_min = float(scenario.sinr_thresholds[0]) * scenario.noise_power / hnorm2
    if p_t < x_min * (1.0 - 1e-9):
        raise ValueError(f"infeasible: P_T = {p_t} below minimum power {x_min}")
    x_min = min(x_min, p_t)
    null_sq = float(scenario.n_tx - 1) ** 2

    def f(x):
        if x >= p_t:
            return float("inf")
        return 1.0 / x + null_sq / (p_t - x)

    lo, hi = x_min, p_t * (1.0 - 1e-12)
    if lo >= hi:  # budget exactly at the feasibility boundary
        return x_min, f(x_min), False
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1e-12 * p_t:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x_opt = 0.5 * (a + b)
    # golden section localizes x only to ~sqrt(eps) on this flat objective;
    # a few Newton steps on f' pin the interior stationary point
    for _ in range(4):
        grad = -1.0 / x_opt**2 + null_sq / (p_t - x_opt) ** 2
        curv = 2.0 / x_opt**3 + 2.0 * null_sq / (p_t - x_opt) ** 3
        x_opt = min(max(x_opt - grad / curv, x_min), hi)
    if f(x_min) <= f(x_opt):
        x_opt = x_min
    degenerate = (x_opt - x_min) > 1e-9 * (hi - x_min)
    return x_opt, f(x_opt), degenerate


def kkt_residuals(sol, scenario, channel):
    """Numerical certificate of optimality for a candidate solution.

    Recovers omega from the null-space eigenvalue of the total covariance and
    the SINR multipliers by least squares on the stationarity equations, then
    reports relative residuals: stationarity, PSD margins of the implied dual
    slacks, complementary slackness, and primal feasibility.  Diagnostics
    only; never raises on a bad solution.
    """
    if sol.full_cov is None:
        raise ValueError("kkt_residuals needs full_cov materialized")
    h = np.asarray(channel)
    n_tx, k = h.shape
    rho = 1.0 + 1.0 / scenario.sinr_thresholds
    w = np.column_stack(sol.w)
    full = sol.full_cov

    eigs, vecs = np.linalg.eigh(full)
    r_minus2 = (vecs / eigs**2) @ vecs.conj().T
    u_c = null_space_basis(h)
    theta_est = float(np.einsum("ij,ik,kj->", u_c.conj(), full, u_c).real) / (n_tx - k)
    omega = 1.0 / theta_est**2
    scale = 1.0 / eigs[0] ** 2 + omega

    # least-squares fit of the SINR multipliers on the user stationarity rows
    hw = h.conj().T @ w                       # hw[j, k] = h_j^H w_k
    blocks = []
    rhs = []
    for i in range(k):
        block = h * hw[:, i][None, :]
        block[:, i] *= 1.0 - rho[i]
        blocks.append(block)
        rhs.append(r_minus2 @ w[:, i] - omega * w[:, i])
    a_mat = np.vstack(blocks)
    rhs = np.concatenate(rhs)
    a_real = np.vstack([a_mat.real, a_mat.imag])
    rhs_real = np.concatenate([rhs.real, rhs.imag])
    mu = np.linalg.lstsq(a_real, rhs_real, rcond=None)[0]

    base = -r_minus2 + omega * np.eye(n_tx) + h @ (mu[:, None] * h.conj().T)
    theta_psd = np.inf
    stationarity = 0.0
    comp = 0.0
    for i in range(k):
        theta_i = base - mu[i] * rho[i] * np.outer(h[:, i], h[:, i].conj())
        tw = theta_i @ w[:, i]
        wnorm = np.linalg.norm(w[:, i])
        stationarity = max(stationarity, np.linalg.norm(tw) / (scale * wnorm))
        comp = max(comp, abs(np.vdot(w[:, i], tw).real) / (scale * wnorm**2))
        theta_psd = min(theta_psd, np.linalg.eigvalsh(theta_i)[0] / scale)
    sens_norm = np.linalg.norm(sol.sensing_cov)
    if sens_norm > 0:
        stationarity = max(
            stationarity, np.linalg.norm(base @ sol.sensing_cov) / (scale * sens_norm)
        )
    theta_psd = min(theta_psd, np.linalg.eigvalsh(base)[0] / scale)

    sinr = evaluate_sinr(h, w, sol.sensing_cov, scenario.noise_power)
    slack_rel = sinr / scenario.sinr_thresholds - 1.0
    mu_scale = np.max(np.abs(mu)) + 1e-300
    power = float(np.trace(full).real)

    return {
        "omega": omega,
        "mu": mu,
        "stationarity": float(stationarity),
        "theta_psd_margin": float(theta_psd),
        "complementarity": float(comp),
        "mu_complementarity": float(np.max(np.abs(mu) * np.abs(slack_rel)) / mu_scale),
        "mu_min": float(np.min(mu) / mu_scale),
        "primal_sinr": float(max(0.0, -np.min(slack_rel))),
        "primal_power": abs(power - scenario.power_budget) / scenario.power_budget,
    }
