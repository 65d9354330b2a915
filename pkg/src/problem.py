"""
Constrained composite problems

    min f(x) + h(x)   s.t.   Ax = b

and the nonconvex LCQP family used by the benchmarks:
f(x) = 1/2 x'Qx + r'x with indefinite symmetric Q, h the indicator of a box.
"""

import logging

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from scipy import linalg

from src.prox import BoxSet, ProxSpec
from src.utils import as_vector, rng_from_seed

logger = logging.getLogger(__name__)

GENERATOR_NAME = "pcg64-ziggurat"
GENERATOR_VERSION = 1

MIN_LIPSCHITZ = 1e-12

SYMMETRY_TOL = 1e-12

def _frozen(array):

    array = np.array(array, dtype=float)
    array.setflags(write=False)

    return array

@dataclass(frozen=True)
class LinearMap:
    """ Dense m x n matrix. """

    entries: np.ndarray

    def __post_init__(self):

        entries = _frozen(np.atleast_2d(self.entries))

        if entries.ndim != 2 or min(entries.shape) < 1:
            raise ValueError("a linear map needs a non-empty 2d matrix, got shape {}".format(entries.shape))

        if not np.all(np.isfinite(entries)):
            raise ValueError("linear map entries must be finite")

        object.__setattr__(self, "entries", entries)

    @property
    def m(self):
        return self.entries.shape[0]

    @property
    def n(self):
        return self.entries.shape[1]

    def matvec(self, x):
        return self.entries @ x

    def rmatvec(self, y):
        return self.entries.T @ y

@dataclass(frozen=True)
class CompositeProblem:

    f_value: Callable
    f_grad: Callable
    h: ProxSpec
    A: LinearMap
    b: np.ndarray
    L_f: float
    sigma_max: float

    def __post_init__(self):

        b = _frozen(self.b)

        if b.shape != (self.A.m,):
            raise ValueError("b must have length m={}, got shape {}".format(self.A.m, b.shape))

        if not self.L_f > 0:
            raise ValueError("L_f must be positive, got {}".format(self.L_f))

        if not self.sigma_max >= 0:
            raise ValueError("sigma_max must be nonnegative, got {}".format(self.sigma_max))

        if self.h.is_box and self.h.box.n != self.A.n:
            raise ValueError("box has length {} but the problem has n={}".format(self.h.box.n, self.A.n))

        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.A.n

    @property
    def m(self):
        return self.A.m

    def residual(self, x):
        """ Ax - b """
        return self.A.matvec(x) - self.b

def composite_problem(f_value, f_grad, h, A, b, L_f, sigma_max=None):
    """
    :param f_value: x -> f(x)
    :param f_grad: x -> grad f(x)
    :param h: ProxSpec
    :param A: LinearMap or 2d array
    :param b: right-hand side
    :param L_f: Lipschitz constant of grad f
    :param sigma_max: largest singular value of A, computed when None
    :return: CompositeProblem
    """

    if not isinstance(A, LinearMap):
        A = LinearMap(A)

    if sigma_max is None:
        sigma_max = largest_singular_value(A)

    return CompositeProblem(f_value, f_grad, h, A, b, float(L_f), float(sigma_max))

def feasibility_residual(p, x):
    """ ||Ax - b|| """

    x = as_vector(x, p.n)

    return float(np.linalg.norm(p.residual(x)))

# ------------------------------------------------------------------------------ LCQP

@dataclass(frozen=True)
class GeneratorConfig:

    n: int
    m: int
    seed: int = 0
    lower_value: float = 0.
    upper_value: float = 5.

    def __post_init__(self):

        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1, got n={} m={}".format(self.n, self.m))

        if self.seed < 0:
            raise ValueError("seed must be unsigned, got {}".format(self.seed))

        if self.lower_value > self.upper_value:
            raise ValueError("lower_value {} exceeds upper_value {}".format(self.lower_value, self.upper_value))

        if self.m > self.n:
            logger.warning("m=%d exceeds n=%d: Ax=b is overdetermined", self.m, self.n)

@dataclass(frozen=True)
class LcqpInstance:

    Q: np.ndarray
    r: np.ndarray
    A: LinearMap
    b: np.ndarray
    box: BoxSet
    seed: int = 0
    x_feas: Optional[np.ndarray] = None

    def __post_init__(self):

        Q = _frozen(np.atleast_2d(self.Q))
        n = self.A.n

        if Q.shape != (n, n):
            raise ValueError("Q must be {0}x{0}, got {1}".format(n, Q.shape))

        check_symmetric(Q)

        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "r", _frozen(as_vector(self.r, n, "r")))
        object.__setattr__(self, "b", _frozen(as_vector(self.b, self.A.m, "b")))

        if self.box.n != n:
            raise ValueError("box has length {} but n={}".format(self.box.n, n))

        if self.x_feas is not None:
            object.__setattr__(self, "x_feas", _frozen(as_vector(self.x_feas, n, "x_feas")))

    @property
    def n(self):
        return self.A.n

    @property
    def m(self):
        return self.A.m

def lcqp_value(inst, x):
    """ 1/2 x'Qx + r'x """

    x = as_vector(x, inst.n)

    return float(0.5 * x @ (inst.Q @ x) + inst.r @ x)

def lcqp_grad(inst, x):
    """ Qx + r """

    x = as_vector(x, inst.n)

    return inst.Q @ x + inst.r

def generate_lcqp(cfg):
    """
    Draws Q~, r, A and x_feas i.i.d. standard normal, in that order (matrices row-major),
    from PCG64(cfg.seed), then sets Q = (Q~ + Q~')/2 and b = A x_feas.
    :param cfg: GeneratorConfig
    :return: LcqpInstance
    """

    n, m = cfg.n, cfg.m
    rng = rng_from_seed(cfg.seed)

    Q1 = rng.standard_normal((n, n))
    r = rng.standard_normal(n)
    A = rng.standard_normal((m, n))
    x_feas = rng.standard_normal(n)

    # elementwise sums commute, so Q is exactly symmetric
    Q = (Q1 + Q1.T) / 2
    b = A @ x_feas

    box = BoxSet.uniform(n, cfg.lower_value, cfg.upper_value)

    logger.debug("generated LCQP n=%d m=%d seed=%d", n, m, cfg.seed)

    return LcqpInstance(Q, r, LinearMap(A), b, box, seed=cfg.seed, x_feas=x_feas)

def lcqp_problem(inst):
    """ CompositeProblem view of an LCQP instance, h the indicator of its box. """

    L_Q = lipschitz_constant(inst.Q)

    if L_Q < MIN_LIPSCHITZ:
        logger.warning("L_Q=%g is below %g, using L_f=%g", L_Q, MIN_LIPSCHITZ, MIN_LIPSCHITZ)
        L_Q = MIN_LIPSCHITZ

    return CompositeProblem(f_value=lambda x: lcqp_value(inst, x),
                            f_grad=lambda x: lcqp_grad(inst, x),
                            h=ProxSpec.box_indicator(inst.box),
                            A=inst.A,
                            b=inst.b,
                            L_f=L_Q,
                            sigma_max=largest_singular_value(inst.A))

# ------------------------------------------------------------------------------ SPECTRAL CONSTANTS

def check_symmetric(Q):

    scale = max(1., float(np.max(np.abs(Q)))) if Q.size else 1.

    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or np.max(np.abs(Q - Q.T)) > SYMMETRY_TOL * scale:
        raise ValueError("Q must be a symmetric matrix")

def lipschitz_constant(Q):
    """ Largest eigenvalue of Q in absolute value, from a dense symmetric eigensolve. """

    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    check_symmetric(Q)

    eigenvalues = linalg.eigvalsh(Q)

    return float(np.max(np.abs(eigenvalues)))

def largest_singular_value(A, method="dense", n_power_iterations=10000, tol=1e-12):
    """
    :param A: LinearMap or 2d array
    :param method: "dense" (SVD, the reference) or "power" (power iteration on the smaller Gram matrix)
    :param n_power_iterations: cap for the power method
    :param tol: relative change of the estimate that stops the power method
    :return: sigma_max(A)
    """

    entries = A.entries if isinstance(A, LinearMap) else np.atleast_2d(np.asarray(A, dtype=float))

    if method == "dense":
        return float(linalg.svdvals(entries)[0])

    if method != "power":
        raise ValueError("unknown method {!r}".format(method))

    return _power_sigma(entries, n_power_iterations, tol)

def _power_sigma(entries, n_power_iterations, tol):

    m, n = entries.shape
    gram = entries.T @ entries if n <= m else entries @ entries.T

    # deterministic start, not orthogonal to the top eigenvector with probability one
    v = rng_from_seed(0).standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)

    sigma2 = 0.

    for _ in range(n_power_iterations):

        w = gram @ v
        new_sigma2 = float(np.linalg.norm(w))

        if new_sigma2 == 0.:
            return 0.

        v = w / new_sigma2

        if abs(new_sigma2 - sigma2) <= tol * new_sigma2:
            sigma2 = new_sigma2
            break

        sigma2 = new_sigma2

    else:
        logger.warning("power iteration stopped after %d iterations", n_power_iterations)

    return float(np.sqrt(sigma2))

if __name__ == "__main__":

    # kinda test the construction identities
    inst = generate_lcqp(GeneratorConfig(n=50, m=10, seed=0))

    assert np.array_equal(inst.Q, inst.Q.T)
    assert np.linalg.norm(inst.A.matvec(inst.x_feas) - inst.b) == 0.
