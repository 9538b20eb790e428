"""Exact long-run statistics for one fixed environment.

For a realized graph theta, the per-site stationary means solve the linear
fixed point

    m[i] = mu + (1-lam)/n * ( sum_{j excitatory} theta[i,j] m[j]
                            + sum_{j inhibitory} theta[i,j] (1 - m[j]) )

and the column-sum vector of the resolvent solves

    c = 1 + (1-lam) * A^T c,   A[i,j] = +/- theta[i,j] / n

(sign by the column's population).  From these the long-time limits of the
three trajectory statistics follow in closed form; pushing them through the
inversion pipeline gives the environment-level parameter estimates that
finite-T estimates converge to.

Both systems are solved by fixed-point iteration (contraction factor at most
1 - lam); a dense LU solve is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log

import numpy as np

from .inversion import InversionResult, invert_triple
from .model import Environment, ModelParams

FIXED_POINT_TOL = 1e-12


@dataclass(frozen=True)
class EnvironmentSolution:
    """Solutions of the two linear systems for one environment."""

    m_vec: np.ndarray
    c_vec: np.ndarray


@dataclass(frozen=True)
class TheoreticalLimits:
    """Long-time limits of the three trajectory statistics, theta fixed."""

    m_inf: float
    v_inf: float
    w_inf: float


def _iterate(apply_map, x0: np.ndarray, lam: float,
             tol: float = FIXED_POINT_TOL) -> np.ndarray:
    """Fixed-point iteration x <- F(x), geometric convergence for lam > 0."""
    if lam >= 1.0:
        return apply_map(x0)
    max_iter = 10 * ceil(log(tol) / log(1.0 - lam))
    x = x0
    for _ in range(max_iter):
        x_next = apply_map(x)
        change = float(np.max(np.abs(x_next - x)))
        x = x_next
        if change < tol:
            return x
    raise RuntimeError(f"fixed-point iteration did not converge in {max_iter} steps")


def solve_m(env: Environment, params: ModelParams,
            tol: float = FIXED_POINT_TOL) -> np.ndarray:
    """Per-site stationary firing probabilities, sup-norm residual < ~tol."""
    sp = env.partition.size_plus
    theta = env.theta.astype(np.float64)
    coef = (1.0 - params.lam) / env.n
    base = params.mu + coef * theta[:, sp:].sum(axis=1)
    signed = theta
    signed[:, sp:] *= -1.0

    def apply_map(x):
        return base + coef * (signed @ x)

    return _iterate(apply_map, np.full(env.n, params.mu), params.lam, tol)


def solve_c(env: Environment, params: ModelParams,
            tol: float = FIXED_POINT_TOL) -> np.ndarray:
    """Resolvent column sums: c = 1 + (1-lam) A^T c; |c_i| <= 1/lam."""
    sp = env.partition.size_plus
    theta = env.theta.astype(np.float64)
    coef = (1.0 - params.lam) / env.n
    sign = np.ones(env.n)
    sign[sp:] = -1.0

    def apply_map(x):
        return 1.0 + coef * sign * (x @ theta)

    return _iterate(apply_map, np.ones(env.n), params.lam, tol)


def _dense_matrix(env: Environment, params: ModelParams) -> np.ndarray:
    """I - (1-lam) A as a dense matrix, for the LU cross-check."""
    sp = env.partition.size_plus
    a = env.theta.astype(np.float64) / env.n
    a[:, sp:] *= -1.0
    return np.eye(env.n) - (1.0 - params.lam) * a


def solve_m_dense(env: Environment, params: ModelParams) -> np.ndarray:
    """Direct elimination solve of the mean system (cross-validation only)."""
    sp = env.partition.size_plus
    theta = env.theta.astype(np.float64)
    coef = (1.0 - params.lam) / env.n
    base = params.mu + coef * theta[:, sp:].sum(axis=1)
    return np.linalg.solve(_dense_matrix(env, params), base)


def solve_c_dense(env: Environment, params: ModelParams) -> np.ndarray:
    """Direct elimination solve of the column-sum system (cross-validation only)."""
    return np.linalg.solve(_dense_matrix(env, params).T, np.ones(env.n))


def environment_solution(env: Environment, params: ModelParams) -> EnvironmentSolution:
    return EnvironmentSolution(m_vec=solve_m(env, params), c_vec=solve_c(env, params))


def limits(env: Environment, params: ModelParams) -> TheoreticalLimits:
    """Long-time limits (m_inf, v_inf, w_inf) for the given environment."""
    sol = environment_solution(env, params)
    m_vec, c_vec = sol.m_vec, sol.c_vec
    m_inf = float(m_vec.mean())
    dev = m_vec - m_inf
    v_inf = float(dev @ dev)
    w_inf = float(np.mean(c_vec * c_vec * (m_vec - m_vec * m_vec)))
    return TheoreticalLimits(m_inf=m_inf, v_inf=v_inf, w_inf=w_inf)


def limit_inversion(env: Environment, params: ModelParams,
                    r_plus: float | None = None) -> InversionResult:
    """Parameters recovered from the environment's exact limits."""
    if r_plus is None:
        r_plus = params.r_plus
    lim = limits(env, params)
    return invert_triple(lim.m_inf, lim.v_inf, lim.w_inf, r_plus)
