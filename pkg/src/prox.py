"""
Proximal maps of the nonsmooth term h.

Three variants are supported: the zero function, the indicator of a box
{l <= x <= u} and a weighted l1 norm. prox_apply(spec, eta, v) returns

    argmin_y { h(y) + 1/(2 eta) ||y - v||^2 }

(the usual prox, with h evaluated at the argument y).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

ZERO, BOX, L1 = "zero", "box", "l1"

BOX_TOL = 1e-12

class Infeasible(object):
    """ +inf of an indicator function. Supports no arithmetic. """

    _instance = None

    def __new__(cls):

        if cls._instance is None:
            cls._instance = super().__new__(cls)

        return cls._instance

    def __repr__(self):
        return "INFEASIBLE"

    def __float__(self):
        return float("inf")

INFEASIBLE = Infeasible()

def is_infeasible(value):

    return value is INFEASIBLE

@dataclass(frozen=True)
class BoxSet:

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):

        lower = np.array(self.lower, dtype=float, ndmin=1)
        upper = np.array(self.upper, dtype=float, ndmin=1)

        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("box bounds must be vectors of the same length, got {} and {}".format(lower.shape, upper.shape))

        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("box bounds must be finite")

        if np.any(lower > upper):
            raise ValueError("box lower bound exceeds upper bound at index {}".format(int(np.argmax(lower > upper))))

        lower.setflags(write=False)
        upper.setflags(write=False)

        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, n, lower_value=0., upper_value=5.):

        return cls(np.full(n, lower_value), np.full(n, upper_value))

    @property
    def n(self):
        return self.lower.shape[0]

    def project(self, v):

        return np.clip(v, self.lower, self.upper)

    def contains(self, x, tol=BOX_TOL):

        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

@dataclass(frozen=True)
class ProxSpec:

    variant: str = ZERO
    box: Optional[BoxSet] = None
    weight: float = 0.

    def __post_init__(self):

        if self.variant not in (ZERO, BOX, L1):
            raise ValueError("unknown prox variant {!r}".format(self.variant))

        if self.variant == BOX and self.box is None:
            raise ValueError("box variant needs a BoxSet")

        if self.variant == L1 and not self.weight >= 0:
            raise ValueError("l1 weight must be nonnegative, got {}".format(self.weight))

    @classmethod
    def zero(cls):
        return cls(ZERO)

    @classmethod
    def box_indicator(cls, box):
        return cls(BOX, box=box)

    @classmethod
    def l1(cls, weight):
        return cls(L1, weight=float(weight))

    @property
    def is_box(self):
        return self.variant == BOX

def _check_length(spec, v):

    if spec.variant == BOX and v.shape != spec.box.lower.shape:
        raise ValueError("vector of shape {} does not match box of length {}".format(v.shape, spec.box.n))

def prox_apply(spec, eta, v):
    """
    :param spec: ProxSpec
    :param eta: prox step, > 0
    :param v: point to map
    :return: prox_{eta h}(v)
    """

    if not eta > 0:
        raise ValueError("prox step eta must be positive, got {}".format(eta))

    v = np.asarray(v, dtype=float)
    _check_length(spec, v)

    if spec.variant == ZERO:
        return v.copy()

    if spec.variant == BOX:
        return spec.box.project(v)

    # soft thresholding
    return np.sign(v) * np.maximum(np.abs(v) - eta * spec.weight, 0.)

def h_value(spec, x):
    """ h(x) as a float, or INFEASIBLE outside the box (1e-12 absolute tolerance). """

    x = np.asarray(x, dtype=float)
    _check_length(spec, x)

    if spec.variant == ZERO:
        return 0.

    if spec.variant == BOX:
        return 0. if spec.box.contains(x) else INFEASIBLE

    return spec.weight * float(np.sum(np.abs(x)))

if __name__ == "__main__":

    # kinda test soft thresholding against the closed form
    spec = ProxSpec.l1(1.)
    assert np.allclose(prox_apply(spec, 0.5, np.array([0.3, -2.])), [0., -1.5])
