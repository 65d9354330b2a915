"""
Residuals and per-iteration certificates.

The stationarity residual ||x - prox_h(x - g)|| with a unit step is a computable
surrogate for dist(0, grad f(x) + A'lambda + dh(x)): both vanish at the same points,
and for a box it is the projected-gradient residual ||x - P_X(x - g)||.

The certificates of the perturbed Lagrangian method (descent inequality, subgradient
bound, iterate relations) hold for steps that start from a consistent iterate, i.e.
one with lambda - mu = rho (Ax - b) and z = (lambda - mu)/alpha. Every iterate with
k >= 1 is consistent; the default starting point is not unless Ax0 = b.
"""

import logging

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from src import pplag
from src.prox import h_value, is_infeasible, prox_apply

logger = logging.getLogger(__name__)

CERTIFICATE_SLACK = 1e-9

@dataclass(frozen=True)
class IterationRecord:

    k: int
    objective: float
    stationarity: float
    feasibility: float
    lagrangian: float
    dual_norm_lambda: float
    dual_norm_mu: Optional[float] = None
    delta: Optional[float] = None
    d_norm: Optional[float] = None
    descent_ok: Optional[bool] = None
    wallclock_ns: Optional[int] = None

@dataclass(frozen=True)
class EpsKktReport:

    eps_stat: float
    eps_feas: float
    achieved_stat: float
    achieved_feas: float
    satisfied: bool
    iter_at: Optional[int]

    def as_dict(self):

        return {"eps_stat": self.eps_stat, "eps_feas": self.eps_feas, "achieved_stat": self.achieved_stat,
                "achieved_feas": self.achieved_feas, "satisfied": self.satisfied, "iter_at": self.iter_at}

class Certificate(NamedTuple):

    passed: bool
    gap: float # rhs - lhs, >= -slack when passed
    applicable: bool
    z_norm_form_ok: bool

class Relations(NamedTuple):
    """ (value, bound) pairs; the mid-iterate pair is an identity """

    mu_step: tuple
    tau_gap: tuple
    mid_iterate: tuple
    lambda_step: tuple

def eps_kkt_report(stat, feas, eps_stat, eps_feas, iter_at=None):

    satisfied = stat <= eps_stat and feas <= eps_feas

    return EpsKktReport(eps_stat, eps_feas, float(stat), float(feas), bool(satisfied), iter_at)

def objective_value(p, x):
    """ f(x) + h(x), the h term dropped when x is outside dom h """

    h = h_value(p.h, x)

    return float(p.f_value(x)) + (0. if is_infeasible(h) else h)

# ------------------------------------------------------------------------------ RESIDUALS

def stationarity_residual(spec, x, g):
    """ ||x - prox_{1 h}(x - g)|| """

    return float(np.linalg.norm(x - prox_apply(spec, 1., x - g)))

def kkt_residual(p, x, lam):
    """
    :return: (stationarity, feasibility) with g = grad f(x) + A'lambda and feasibility ||Ax - b||
    """

    g = p.f_grad(x) + p.A.rmatvec(lam)

    return stationarity_residual(p.h, x, g), float(np.linalg.norm(p.residual(x)))

def dual_bound(delta0, r_ratio):
    """ delta0 / (2 (1 - r)), half the sum of all delta_k, which bounds every ||mu_k|| """

    if not 0 < delta0 <= 1:
        raise ValueError("delta0 must lie in (0, 1], got {}".format(delta0))

    if not 0.9 < r_ratio < 1:
        raise ValueError("r_ratio must lie in (0.9, 1), got {}".format(r_ratio))

    return delta0 / (2 * (1 - r_ratio))

# ------------------------------------------------------------------------------ CERTIFICATES

def _check_consecutive(w_k, w_next):

    if w_next.k != w_k.k + 1:
        raise ValueError("iterates must be consecutive, got k={} and k={}".format(w_k.k, w_next.k))

def subgradient_vector_d(p, params, w_k, w_next):
    """
    Element (d1, 0, 0, d2) of the subdifferential of L at w_next:
        d1 = grad f(x+) - grad f(x) + A'(lambda+ - lambda) + (x - x+)/eta
        d2 = (1 + alpha beta) z+
    :return: (d1, d2, norm)
    """

    _check_consecutive(w_k, w_next)

    d1 = p.f_grad(w_next.x) - p.f_grad(w_k.x) + p.A.rmatvec(w_next.lam - w_k.lam) + (w_k.x - w_next.x) / params.eta
    d2 = (1 + params.alpha * params.beta) * w_next.z

    return d1, d2, float(np.sqrt(d1 @ d1 + d2 @ d2))

def d_bound(p, params, w_k, w_next):
    """ c2 (||x+ - x|| + ||z+||) + sigma_max delta_k, c2 = max(L_f + rho sigma^2 + 1/eta, 1 + alpha beta) """

    c2 = max(p.L_f + params.rho * p.sigma_max ** 2 + 1 / params.eta, 1 + params.alpha * params.beta)

    return c2 * (np.linalg.norm(w_next.x - w_k.x) + np.linalg.norm(w_next.z)) + p.sigma_max * w_k.delta

def descent_certificate(p, params, w_k, w_next, delta_k=None):
    """
    Checks
        L(w+) - L(w) <= -gamma ||dx||^2 - alpha/2 ||dz||^2 + delta/rho + delta^2/(8 rho) + 1e-9 (1 + |L(w)|)
    and, as a monitored diagnostic only, the same bound with -1/(2 alpha) ||z+||^2 in place of the dz term.
    """

    _check_consecutive(w_k, w_next)

    delta = w_k.delta if delta_k is None else delta_k

    L_k = pplag.lagrangian_value(p, params, w_k)
    L_next = pplag.lagrangian_value(p, params, w_next)

    if is_infeasible(L_k) or is_infeasible(L_next):
        return Certificate(False, float("nan"), False, False)

    gamma = params.gamma(p)
    rho = params.rho
    dx = w_next.x - w_k.x
    dz = w_next.z - w_k.z

    perturbation = delta / rho + delta ** 2 / (8 * rho)
    lhs = L_next - L_k
    rhs = -gamma * (dx @ dx) - 0.5 * params.alpha * (dz @ dz) + perturbation
    slack = CERTIFICATE_SLACK * (1 + abs(L_k))

    z_norm_rhs = -gamma * (dx @ dx) - (w_next.z @ w_next.z) / (2 * params.alpha) + perturbation
    z_norm_form_ok = bool(lhs <= z_norm_rhs + slack)

    if not z_norm_form_ok:
        logger.debug("k=%d: descent bound with -|z+|^2/(2 alpha) misses by %.3e", w_k.k, lhs - z_norm_rhs)

    applicable = gamma > 0 and pplag.is_consistent(p, params, w_k)

    return Certificate(bool(lhs <= rhs + slack), float(rhs - lhs), applicable, z_norm_form_ok)

def iteration_relations(p, params, w_k, w_next):
    """ Iterate relations of one step; the lambda bound needs a consistent w_k. """

    _check_consecutive(w_k, w_next)

    tau = w_next.tau_last
    delta = w_k.delta
    diff = w_k.lam - w_k.mu
    diff2 = float(diff @ diff)
    dx = w_next.x - w_k.x
    dlam = w_next.lam - w_k.lam

    return Relations(mu_step=(float(np.linalg.norm(w_next.mu - w_k.mu)), delta / 2),
                     tau_gap=(tau * diff2, delta),
                     mid_iterate=(float(np.linalg.norm(w_next.mu - w_k.lam)), (1 - tau) * np.sqrt(diff2)),
                     lambda_step=(float(dlam @ dlam), 2 * params.rho ** 2 * p.sigma_max ** 2 * float(dx @ dx) + delta ** 2 / 2))

# ------------------------------------------------------------------------------ RECORDS

def pplag_record(p, params, w_k, w_next, stat, feas, wallclock_ns=None):

    lagrangian = pplag.lagrangian_value(p, params, w_next)
    _, _, d_norm = subgradient_vector_d(p, params, w_k, w_next)

    descent_ok = None

    if pplag.is_consistent(p, params, w_k):
        descent_ok = descent_certificate(p, params, w_k, w_next).passed

    return IterationRecord(k=w_next.k,
                           objective=objective_value(p, w_next.x),
                           stationarity=stat,
                           feasibility=feas,
                           lagrangian=float(lagrangian),
                           dual_norm_lambda=float(np.linalg.norm(w_next.lam)),
                           dual_norm_mu=float(np.linalg.norm(w_next.mu)),
                           delta=w_next.delta,
                           d_norm=d_norm,
                           descent_ok=descent_ok,
                           wallclock_ns=wallclock_ns)

def sprox_record(p, state, lagrangian, stat, feas, wallclock_ns=None):

    return IterationRecord(k=state.k,
                           objective=objective_value(p, state.x),
                           stationarity=stat,
                           feasibility=feas,
                           lagrangian=float(lagrangian),
                           dual_norm_lambda=float(np.linalg.norm(state.lam)),
                           wallclock_ns=wallclock_ns)
