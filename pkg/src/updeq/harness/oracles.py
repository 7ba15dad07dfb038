"""Independent numeric oracles for the closed-form updates.

The closed forms are checked against a constrained maximizer of the
regularized objective  <p, q> - KL(p, pi)/eta - alpha*KL(p, rho)  over the
simplex (SLSQP with analytic gradients), which shares no code with the
exponential-form implementation.
"""

from __future__ import annotations

import numpy as np

from ..rng import RngStream
from ..updates import hedge_update, mmd_update


def regularized_objective(p, pibar, q, eta, alpha, rho):
    p = np.asarray(p, dtype=float)
    eps = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_pi = float(np.sum(np.where(p > eps, p * np.log(p / pibar), 0.0)))
        kl_rho = float(np.sum(np.where(p > eps, p * np.log(p / rho), 0.0)))
    return float(p @ q) - kl_pi / eta - alpha * kl_rho


def numeric_update_oracle(pibar, q, eta, alpha, rho):
    """argmax of the regularized objective over the simplex (SLSQP)."""
    from scipy.optimize import minimize

    pibar = np.asarray(pibar, dtype=float)
    q = np.asarray(q, dtype=float)
    rho = np.asarray(rho, dtype=float)
    k = len(q)

    def neg(p):
        p = np.maximum(p, 1e-12)
        return -(p @ q) + np.sum(p * np.log(p / pibar)) / eta \
            + alpha * np.sum(p * np.log(p / rho))

    def grad(p):
        p = np.maximum(p, 1e-12)
        return -q + (np.log(p / pibar) + 1.0) / eta \
            + alpha * (np.log(p / rho) + 1.0)

    x0 = np.full(k, 1.0 / k)
    res = minimize(neg, x0, jac=grad, method="SLSQP",
                   bounds=[(1e-12, 1.0)] * k,
                   constraints=[{"type": "eq", "fun": lambda p: p.sum() - 1.0,
                                 "jac": lambda p: np.ones(k)}],
                   options={"maxiter": 500, "ftol": 1e-14})
    p = np.maximum(res.x, 0.0)
    return p / p.sum()


def grid_update_oracle(pibar, q, eta, alpha, rho, steps=20001):
    """Two-action grid maximizer (independent of both the closed form and
    SLSQP); used for the pinned two-action examples."""
    assert len(q) == 2
    p0 = np.linspace(0.0, 1.0, steps)
    best, best_val = None, -np.inf
    for x in p0:
        p = np.array([x, 1.0 - x])
        val = regularized_objective(p, pibar, q, eta, alpha, rho)
        if val > best_val:
            best, best_val = p, val
    return best


def random_update_instances(n, seed=20240, min_actions=2, max_actions=5):
    gen = RngStream(seed, 777).generator()
    for _ in range(n):
        k = int(gen.integers(min_actions, max_actions + 1))
        pibar = gen.dirichlet(np.ones(k))
        pibar = 0.98 * pibar + 0.02 / k   # keep the oracle's interior valid
        q = gen.normal(0.0, 2.0, size=k)
        eta = float(np.exp(gen.uniform(np.log(0.05), np.log(10.0))))
        if gen.random() < 1.0 / 3.0:
            alpha = 0.0
        else:
            alpha = float(np.exp(gen.uniform(np.log(0.02), np.log(5.0))))
        rho = gen.dirichlet(np.ones(k))
        rho = 0.9 * rho + 0.1 / k
        yield pibar, q, eta, alpha, rho


def check_updates_against_oracle(n=1000, seed=20240, tol=1e-4):
    """Max L-inf error of hedge/mmd closed forms vs the numeric maximizer
    over n random instances. Returns (max_err, failures)."""
    max_err = 0.0
    failures = 0
    for pibar, q, eta, alpha, rho in random_update_instances(n, seed):
        if alpha == 0.0:
            got = hedge_update(pibar, q, eta)
        else:
            got = mmd_update(pibar, q, rho, eta, alpha)
        want = numeric_update_oracle(pibar, q, eta, alpha, rho)
        err = float(np.max(np.abs(got - want)))
        max_err = max(max_err, err)
        if err > tol:
            failures += 1
    return max_err, failures
