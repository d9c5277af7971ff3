"""Reduction of the Nt-dimensional design to K x K variables.

The optimal per-user covariances live in the range of the channel matrix H,
and the sensing block is an isotropic scaling of the null-space projector.
Writing W_k = U X_k U^H with U an orthonormal range basis turns the design
into K coupled K x K semidefinite blocks; this module builds that instance,
precomputes every constant the structured dual update needs, and detects the
degenerate regime that admits a closed-form optimum.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor

from .linalg import compact_svd


class IllConditionedDual(Exception):
    """Cholesky of the dual Schur complement failed; try a larger delta."""


@dataclass(frozen=True)
class ReducedInstance:
    """K-dimensional problem data.

    u_tilde: Nt x K orthonormal basis of the channel range space.
    h_tilde: K x K projected channel, column k is q_k = u_tilde^H h_k.
    q_tilde: (K, K, K) stack of rank-one matrices q_k q_k^H.
    rho:     per-user constants 1 + 1/threshold.
    """

    u_tilde: np.ndarray
    h_tilde: np.ndarray
    q_tilde: np.ndarray
    rho: np.ndarray
    power_budget: float
    noise_power: float
    n_tx: int
    n_users: int

    @property
    def channel_norms_sq(self):
        """||h_k||^2 = tr(q_tilde_k)."""
        return np.einsum("ik,ik->k", self.h_tilde.conj(), self.h_tilde).real


@dataclass(frozen=True)
class DualPrecompute:
    """Constants of the structured dual update, computed once per instance."""

    delta: float
    kappa: float
    alpha: float
    beta: float
    theta1: np.ndarray
    theta2: np.ndarray
    l_matrix: np.ndarray
    l_factor: tuple


@dataclass(frozen=True)
class DegeneracyVerdict:
    degenerate_condition_holds: bool
    witness: list | None
    chosen_index: int | None = None
    witness_scales: np.ndarray | None = None


def build_reduced(scenario, channel):
    """Project (scenario, channel) onto the K-dimensional range space."""
    channel = np.asarray(channel)
    u_tilde, _, _ = compact_svd(channel)
    h_tilde = u_tilde.conj().T @ channel
    q_tilde = np.einsum("ik,jk->kij", h_tilde, h_tilde.conj())
    rho = 1.0 + 1.0 / np.asarray(scenario.sinr_thresholds, dtype=float)
    return ReducedInstance(
        u_tilde=u_tilde,
        h_tilde=h_tilde,
        q_tilde=q_tilde,
        rho=rho,
        power_budget=float(scenario.power_budget),
        noise_power=float(scenario.noise_power),
        n_tx=scenario.n_tx,
        n_users=scenario.n_users,
    )


def precompute_dual(instance, delta=1e-4):
    """Assemble kappa, alpha, beta, Theta_1, Theta_2 and the Schur matrix L.

    L is the K x K Schur complement of the regularized dual normal matrix;
    its Cholesky factor is cached and reused by every iteration.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    rho = instance.rho
    k = instance.n_users
    gram = instance.h_tilde.conj().T @ instance.h_tilde
    gram_abs2 = np.abs(gram) ** 2

    alpha = k + 1.0 + delta
    beta = delta + 2.0
    kappa = 1.0 / (alpha * beta - 1.0)
    theta1 = kappa * (1.0 - beta * rho - beta)
    theta2 = kappa * (alpha - rho - 1.0)

    rho1 = rho + 1.0
    p_matrix = (
        beta * np.outer(rho1, rho1)
        - np.outer(rho1, np.ones(k))
        - np.outer(np.ones(k), rho1)
        + alpha * np.ones((k, k))
    )
    l_matrix = delta * np.eye(k) + gram_abs2 * (np.diag(rho**2) + np.ones((k, k)) - kappa * p_matrix)
    try:
        l_factor = cho_factor(l_matrix, lower=True)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedDual(f"Cholesky of L failed for delta={delta}: {exc}") from exc
    return DualPrecompute(
        delta=float(delta),
        kappa=float(kappa),
        alpha=float(alpha),
        beta=float(beta),
        theta1=theta1,
        theta2=theta2,
        l_matrix=l_matrix,
        l_factor=l_factor,
    )


def degeneracy_lhs(scenario, channel):
    """Left-hand sides of the degeneracy test, one per candidate index l.

    Entry l is ||h_l||^2 * sum_k (P_T ||h_k||^2 + sigma^2 Nt) / (rho_k tr(Q_k Q_l));
    cross terms below 1e-14 * ||h_k||^2 ||h_l||^2 count as zero, which sends
    the corresponding entry to +inf (orthogonal users are never degenerate).
    """
    channel = np.asarray(channel)
    gram = channel.conj().T @ channel
    norms_sq = np.diag(gram).real
    cross = np.abs(gram) ** 2  # cross[k, l] = tr(Q_k Q_l)
    rho = 1.0 + 1.0 / np.asarray(scenario.sinr_thresholds, dtype=float)
    numer = scenario.power_budget * norms_sq + scenario.noise_power * scenario.n_tx

    floor = 1e-14 * np.outer(norms_sq, norms_sq)
    with np.errstate(divide="ignore"):
        terms = np.where(cross > floor, (numer / rho)[:, None] / cross, np.inf)
    return norms_sq * terms.sum(axis=0)


def check_degenerate(scenario, channel):
    """Detect the closed-form regime and construct its witness when it holds.

    When the test passes for every l, the beamformers a_k Q_l (for the l with
    the largest slack) plus an isotropic remainder are optimal: the witness is
    the list [W_1, ..., W_K, W_{K+1}] of full-space Hermitian matrices.
    """
    channel = np.asarray(channel)
    lhs = degeneracy_lhs(scenario, channel)
    p_t = scenario.power_budget
    if not np.all(lhs < p_t):
        return DegeneracyVerdict(degenerate_condition_holds=False, witness=None)

    n_tx = scenario.n_tx
    gram = channel.conj().T @ channel
    norms_sq = np.diag(gram).real
    cross = np.abs(gram) ** 2
    rho = 1.0 + 1.0 / np.asarray(scenario.sinr_thresholds, dtype=float)
    l_star = int(np.argmax(p_t - lhs))

    numer = p_t * norms_sq + scenario.noise_power * n_tx
    a = numer / (rho * n_tx * cross[:, l_star])
    h_l = channel[:, l_star]
    q_l = np.outer(h_l, h_l.conj())
    witness = [a_k * q_l for a_k in a]
    sensing = (p_t / n_tx) * np.eye(n_tx) - a.sum() * q_l
    witness.append(sensing)

    # the construction satisfies the optimality system exactly; failure here
    # means numerical trouble, not a property of the instance
    sensing_min_eig = p_t / n_tx - a.sum() * norms_sq[l_star]
    if sensing_min_eig < -1e-10 * p_t / n_tx:
        raise AssertionError(f"degenerate witness not PSD (min eig {sensing_min_eig:.3e})")
    sinr_lhs = rho * a * cross[:, l_star] - (p_t / n_tx) * norms_sq
    if np.max(np.abs(sinr_lhs - scenario.noise_power)) > 1e-8 * scenario.noise_power:
        raise AssertionError("degenerate witness violates an SINR equality")

    return DegeneracyVerdict(
        degenerate_condition_holds=True,
        witness=witness,
        chosen_index=l_star,
        witness_scales=a,
    )
