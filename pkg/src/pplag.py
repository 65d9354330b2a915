"""
Proximal-perturbed Lagrangian method for

    min f(x) + h(x)   s.t.   Ax = b

The perturbed Lagrangian over w = (x, z, lambda, mu) is

    L(w) = f(x) + <lambda, Ax - b - z> + <mu, z> + alpha/2 ||z||^2 - beta/2 ||lambda - mu||^2 + h(x)

and one iteration updates, in this order,

    x      <- prox_{eta h}(x - eta (grad f(x) + A'lambda))
    mu     <- mu + tau (lambda - mu),  tau = delta / (||lambda - mu||^2 + 1)
    lambda <- mu + rho (Ax - b),       rho = alpha / (1 + alpha beta)
    z      <- (lambda - mu) / alpha
    delta  <- r delta
"""

import logging

from dataclasses import dataclass

import numpy as np

from src.prox import INFEASIBLE, h_value, is_infeasible, prox_apply
from src.utils import NumericalFailure, SolveResult, all_finite, as_vector, now_ns, null_sink, rng_from_seed

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 1e3
DEFAULT_BETA = 0.5
DEFAULT_DELTA0 = 0.5
DEFAULT_R_RATIO = 1 - 1e-7
DEFAULT_SAFETY = 1.

CONSISTENCY_TOL = 1e-9

def derive_rho(alpha, beta):
    """ rho = alpha / (1 + alpha beta), always below 1/beta """

    if not alpha > 0:
        raise ValueError("alpha must be positive, got {}".format(alpha))

    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1), got {}".format(beta))

    return alpha / (1 + alpha * beta)

def eta_bound(L_f, sigma_max, alpha, beta):
    """ 1 / (L_f + (2 + 1/(1 + alpha beta)) rho sigma_max^2), the step size bound """

    rho = derive_rho(alpha, beta)

    return 1. / (L_f + (2 + 1 / (1 + alpha * beta)) * rho * sigma_max ** 2)

def default_eta(L_f, sigma_max, alpha, beta, safety=DEFAULT_SAFETY):
    """
    :param L_f: Lipschitz constant of grad f
    :param sigma_max: largest singular value of A
    :param safety: fraction of the bound, in (0, 1]
    :return: safety times the step size bound
    """

    if not L_f > 0:
        raise ValueError("L_f must be positive, got {}".format(L_f))

    if not sigma_max >= 0:
        raise ValueError("sigma_max must be nonnegative, got {}".format(sigma_max))

    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1], got {}".format(safety))

    return safety * eta_bound(L_f, sigma_max, alpha, beta)

@dataclass(frozen=True)
class PplagParams:

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    r_ratio: float = DEFAULT_R_RATIO
    delta0: float = DEFAULT_DELTA0
    eta: float = 1e-3

    def __post_init__(self):

        # validates alpha and beta
        derive_rho(self.alpha, self.beta)

        if not 0.9 < self.r_ratio < 1:
            raise ValueError("r_ratio must lie in (0.9, 1), got {}".format(self.r_ratio))

        if not 0 < self.delta0 <= 1:
            raise ValueError("delta0 must lie in (0, 1], got {}".format(self.delta0))

        if not self.eta > 0:
            raise ValueError("eta must be positive, got {}".format(self.eta))

    @property
    def rho(self):
        return derive_rho(self.alpha, self.beta)

    def gamma(self, p):
        """ 1/2 (1/eta - L_f - (2 + 1/(1 + alpha beta)) rho sigma_max^2), the descent coefficient """

        return 0.5 * (1 / self.eta - 1 / eta_bound(p.L_f, p.sigma_max, self.alpha, self.beta))

    def as_dict(self):

        return {"alpha": self.alpha, "beta": self.beta, "rho": self.rho, "r_ratio": self.r_ratio, "delta0": self.delta0, "eta": self.eta}

def check_step_size(p, params):
    """ Refuses an eta above the bound, warns at equality. """

    bound = eta_bound(p.L_f, p.sigma_max, params.alpha, params.beta)

    if params.eta > bound * (1 + 1e-15):
        raise ValueError("eta={} exceeds the step size bound {}".format(params.eta, bound))

    if params.eta >= bound:
        logger.warning("eta=%g equals the step size bound, the strict inequality is not met", params.eta)

def make_params(p, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA, r_ratio=DEFAULT_R_RATIO, delta0=DEFAULT_DELTA0, safety=DEFAULT_SAFETY):
    """ PplagParams with eta derived from the problem's L_f and sigma_max. """

    eta = default_eta(p.L_f, p.sigma_max, alpha, beta, safety)
    params = PplagParams(alpha=alpha, beta=beta, r_ratio=r_ratio, delta0=delta0, eta=eta)

    check_step_size(p, params)

    return params

@dataclass(frozen=True)
class PplagState:

    x: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    delta: float
    k: int = 0
    tau_last: float = float("nan")

def initial_state(p, params, seed=0, x0=None):
    """
    x0 standard normal from PCG64(seed), prox-mapped once so that h(x0) is finite;
    z0 = lambda0 = mu0 = 0.
    """

    if x0 is None:
        x0 = rng_from_seed(seed).standard_normal(p.n)

    x0 = prox_apply(p.h, params.eta, as_vector(x0, p.n, "x0"))
    zeros = np.zeros(p.m)

    return PplagState(x=x0, z=zeros, lam=zeros.copy(), mu=zeros.copy(), delta=params.delta0)

# ------------------------------------------------------------------------------ UPDATES

def grad_smooth(p, x, lam):
    """ gradient in x of the smooth part: grad f(x) + A'lambda (z and mu do not enter) """

    return p.f_grad(x) + p.A.rmatvec(lam)

def step_x(p, params, state):

    x = state.x

    return prox_apply(p.h, params.eta, x - params.eta * grad_smooth(p, x, state.lam))

def step_mu(state):
    """ :return: (mu_next, tau) """

    direction = state.lam - state.mu
    tau = state.delta / (float(direction @ direction) + 1)

    return state.mu + tau * direction, tau

def step_lambda(p, params, x_next, mu_next):

    return mu_next + params.rho * p.residual(x_next)

def step_z(params, lam_next, mu_next):

    return (lam_next - mu_next) / params.alpha

def iterate(p, params, state):
    """ One pass of the x, mu, lambda, z, delta updates. """

    k = state.k

    x = step_x(p, params, state)
    if not all_finite(x):
        raise NumericalFailure("x", k)

    mu, tau = step_mu(state)
    if not all_finite(mu):
        raise NumericalFailure("mu", k)

    lam = step_lambda(p, params, x, mu)
    if not all_finite(lam):
        raise NumericalFailure("lambda", k)

    z = step_z(params, lam, mu)
    if not all_finite(z):
        raise NumericalFailure("z", k)

    if logger.isEnabledFor(logging.DEBUG):
        dz = np.linalg.norm(z - state.z)
        logger.debug("k=%d tau=%.3e |z|/|dz|=%.3e", k, tau, np.linalg.norm(z) / dz if dz > 0 else float("inf"))

    # delta may underflow to 0: tau becomes 0 and mu freezes
    return PplagState(x=x, z=z, lam=lam, mu=mu, delta=params.r_ratio * state.delta, k=k + 1, tau_last=tau)

# ------------------------------------------------------------------------------ VALUE FUNCTIONS

def lagrangian_value(p, params, w):
    """ L(w) of the module docstring; INFEASIBLE when h(x) is +inf. """

    h = h_value(p.h, w.x)

    if is_infeasible(h):
        return INFEASIBLE

    diff = w.lam - w.mu

    return float(p.f_value(w.x) + w.lam @ (p.residual(w.x) - w.z) + w.mu @ w.z
                 + 0.5 * params.alpha * (w.z @ w.z) - 0.5 * params.beta * (diff @ diff) + h)

def lagrangian_closed_form(p, params, w):
    """ f(x) + 1/(2 rho) (||lambda||^2 - ||mu||^2) + h(x), equal to L(w) at every iterate k >= 1 """

    h = h_value(p.h, w.x)

    if is_infeasible(h):
        return INFEASIBLE

    return float(p.f_value(w.x) + (w.lam @ w.lam - w.mu @ w.mu) / (2 * params.rho) + h)

def is_consistent(p, params, w, tol=CONSISTENCY_TOL):
    """ lambda - mu = rho (Ax - b) and z = (lambda - mu)/alpha, as after any update """

    diff = w.lam - w.mu
    scale = 1 + np.linalg.norm(w.lam) + np.linalg.norm(w.mu)

    return bool(np.linalg.norm(diff - params.rho * p.residual(w.x)) <= tol * scale
                and np.linalg.norm(w.z - diff / params.alpha) <= tol * scale)

# ------------------------------------------------------------------------------ DRIVER

def solve(p, params, stop, sink=null_sink, state=None, seed=0):
    """
    Runs iterate until both residuals fall below the thresholds or stop.max_iters is hit.
    :param p: CompositeProblem
    :param params: PplagParams
    :param stop: StoppingRule
    :param sink: called with one IterationRecord per recorded iteration, in order
    :param state: starting PplagState, initial_state(p, params, seed) when None
    :return: SolveResult
    """

    # imported here, diagnostics depends on this module
    from src import diagnostics

    check_step_size(p, params)

    if state is None:
        state = initial_state(p, params, seed)

    t0 = now_ns()
    stat, feas = diagnostics.kkt_residual(p, state.x, state.lam)
    reason = "max_iters"

    logger.info("pplag: alpha=%g beta=%g rho=%g eta=%g, initial stat=%.3e feas=%.3e", params.alpha, params.beta, params.rho, params.eta, stat, feas)

    for i in range(stop.max_iters):

        previous = state
        state = iterate(p, params, previous)

        stat, feas = diagnostics.kkt_residual(p, state.x, state.lam)
        done = stat <= stop.eps_stat and feas <= stop.eps_feas

        if sink is not null_sink and stop.should_record(state.k, last=done or i == stop.max_iters - 1):
            sink(diagnostics.pplag_record(p, params, previous, state, stat, feas, now_ns() - t0))

        if done:
            reason = "tolerance"
            break

    elapsed = (now_ns() - t0) / 1e9
    report = diagnostics.eps_kkt_report(stat, feas, stop.eps_stat, stop.eps_feas, state.k)

    logger.info("pplag: %s after %d iterations, stat=%.3e feas=%.3e (%.2f s)", reason, state.k, stat, feas, elapsed)

    return SolveResult(state=state, reason=reason, iterations=state.k, stationarity=stat, feasibility=feas,
                       objective=diagnostics.objective_value(p, state.x), report=report, wallclock_s=elapsed)
