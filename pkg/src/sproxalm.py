"""
Smoothed proximal augmented Lagrangian (SProx-ALM) baseline for box constraints X = [l, u].

    L(x, lambda)    = f(x) + <lambda, Ax - b> + gamma/2 ||Ax - b||^2
    K(x, z, lambda) = L(x, lambda) + p/2 ||x - z||^2

One iteration, in this order:

    lambda <- lambda + alpha_t (Ax - b)
    x      <- P_X[x - c grad_x K(x, z, lambda)]     (with the new lambda)
    z      <- z + beta_t (x - z)                    (with the new x)
"""

import logging

from dataclasses import dataclass

import numpy as np

from src import diagnostics
from src.utils import NumericalFailure, SolveResult, all_finite, as_vector, now_ns, null_sink, rng_from_seed

logger = logging.getLogger(__name__)

DEFAULT_BETA_T = 0.5

@dataclass(frozen=True)
class SproxParams:

    gamma: float
    alpha_t: float
    p: float
    beta_t: float
    c: float

    def __post_init__(self):

        for name in ("gamma", "alpha_t", "p", "c"):
            if not getattr(self, name) > 0:
                raise ValueError("{} must be positive, got {}".format(name, getattr(self, name)))

        if not 0 < self.beta_t <= 1:
            raise ValueError("beta_t must lie in (0, 1], got {}".format(self.beta_t))

    def as_dict(self):

        return {"gamma": self.gamma, "alpha_t": self.alpha_t, "p": self.p, "beta_t": self.beta_t, "c": self.c}

@dataclass(frozen=True)
class SproxState:

    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    k: int = 0

def sprox_defaults(p, gamma=None):
    """
    alpha_t = gamma/4, p = 2 L_f, beta_t = 0.5, c = 1/(2 (L_f + p + gamma sigma_max^2)).
    :param p: CompositeProblem
    :param gamma: augmented Lagrangian penalty, 2 L_f when None
    :return: SproxParams
    """

    if gamma is None:
        gamma = 2 * p.L_f
        logger.warning("SProx-ALM gamma not given, using 2 L_f = %g", gamma)

    prox_weight = 2 * p.L_f
    c = 1. / (2 * (p.L_f + prox_weight + gamma * p.sigma_max ** 2))

    return SproxParams(gamma=float(gamma), alpha_t=gamma / 4, p=prox_weight, beta_t=DEFAULT_BETA_T, c=c)

def _require_box(p):

    if not p.h.is_box:
        raise ValueError("SProx-ALM needs h to be a box indicator, got variant {!r}".format(p.h.variant))

def sprox_initial_state(p, seed=0, x0=None):
    """ x0 = z0 = P_X(standard normal from PCG64(seed)), lambda0 = 0 """

    _require_box(p)

    if x0 is None:
        x0 = rng_from_seed(seed).standard_normal(p.n)

    x0 = p.h.box.project(as_vector(x0, p.n, "x0"))

    return SproxState(x=x0, z=x0.copy(), lam=np.zeros(p.m))

def grad_L(p, params, x, lam):
    """ grad f(x) + A'lambda + gamma A'(Ax - b) """

    return p.f_grad(x) + p.A.rmatvec(lam + params.gamma * p.residual(x))

def grad_K(p, params, x, z, lam):
    """ grad_L(x, lambda) + p (x - z) """

    x = as_vector(x, p.n, "x")
    z = as_vector(z, p.n, "z")
    lam = as_vector(lam, p.m, "lambda")

    return grad_L(p, params, x, lam) + params.p * (x - z)

def augmented_lagrangian(p, params, x, lam):

    res = p.residual(x)

    return float(p.f_value(x) + lam @ res + 0.5 * params.gamma * (res @ res))

def sprox_iterate(p, params, state):

    _require_box(p)

    k = state.k

    lam = state.lam + params.alpha_t * p.residual(state.x)
    if not all_finite(lam):
        raise NumericalFailure("sprox-lambda", k)

    x = p.h.box.project(state.x - params.c * grad_K(p, params, state.x, state.z, lam))
    if not all_finite(x):
        raise NumericalFailure("sprox-x", k)

    z = state.z + params.beta_t * (x - state.z)
    if not all_finite(z):
        raise NumericalFailure("sprox-z", k)

    return SproxState(x=x, z=z, lam=lam, k=k + 1)

def sprox_residual(p, params, state):
    """ (||x - P_X[x - grad_x L(x, lambda)]||, ||Ax - b||) """

    stat = diagnostics.stationarity_residual(p.h, state.x, grad_L(p, params, state.x, state.lam))

    return stat, float(np.linalg.norm(p.residual(state.x)))

def sprox_solve(p, params, stop, sink=null_sink, state=None, seed=0):
    """
    Same contract as pplag.solve. Records leave dual_mu, delta, d_norm and descent_ok empty.
    """

    _require_box(p)

    if state is None:
        state = sprox_initial_state(p, seed)

    t0 = now_ns()
    stat, feas = sprox_residual(p, params, state)
    reason = "max_iters"

    logger.info("sprox-alm: gamma=%g alpha_t=%g p=%g beta_t=%g c=%g", params.gamma, params.alpha_t, params.p, params.beta_t, params.c)

    for i in range(stop.max_iters):

        state = sprox_iterate(p, params, state)

        stat, feas = sprox_residual(p, params, state)
        done = stat <= stop.eps_stat and feas <= stop.eps_feas

        if sink is not null_sink and stop.should_record(state.k, last=done or i == stop.max_iters - 1):
            lagrangian = augmented_lagrangian(p, params, state.x, state.lam)
            sink(diagnostics.sprox_record(p, state, lagrangian, stat, feas, now_ns() - t0))

        if done:
            reason = "tolerance"
            break

    elapsed = (now_ns() - t0) / 1e9
    report = diagnostics.eps_kkt_report(stat, feas, stop.eps_stat, stop.eps_feas, state.k)

    logger.info("sprox-alm: %s after %d iterations, stat=%.3e feas=%.3e (%.2f s)", reason, state.k, stat, feas, elapsed)

    return SolveResult(state=state, reason=reason, iterations=state.k, stationarity=stat, feasibility=feas,
                       objective=diagnostics.objective_value(p, state.x), report=report, wallclock_s=elapsed)
