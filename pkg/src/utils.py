import os
import time

from dataclasses import dataclass
from typing import Any

import numpy as np

def make_directory(dir_path, force=False):
    """ Creates dir_path. An existing non-empty directory is refused unless force is set."""

    if os.path.exists(dir_path) and os.listdir(dir_path) and not force:
        raise FileExistsError("{} already exists. Use --force to overwrite it.".format(dir_path))

    if not os.path.exists(dir_path):
        os.makedirs(dir_path)

def now_ns():
    return time.perf_counter_ns()

def as_vector(x, size, name="x"):
    """
    :param x: array-like
    :param size: expected length
    :param name: used in the error message
    :return: x as a 1d float64 numpy array
    """

    x = np.asarray(x, dtype=float)

    if x.ndim != 1 or x.shape[0] != size:
        raise ValueError("{} must be a vector of length {}, got shape {}".format(name, size, x.shape))

    return x

def all_finite(*arrays):

    return all(np.all(np.isfinite(a)) for a in arrays)

class NumericalFailure(ArithmeticError):
    """ A solver produced a non-finite intermediate. """

    def __init__(self, step, iteration):

        self.step = step
        self.iteration = iteration

        super().__init__("non-finite value in step '{}' at iteration {}".format(step, iteration))

@dataclass(frozen=True)
class StoppingRule:

    max_iters: int = 200000
    eps_stat: float = 1e-3
    eps_feas: float = 1e-3
    record_every: int = 1

    def __post_init__(self):

        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1, got {}".format(self.max_iters))

        if not (self.eps_stat > 0 and self.eps_feas > 0):
            raise ValueError("eps_stat and eps_feas must be positive")

        if self.record_every < 1:
            raise ValueError("record_every must be >= 1, got {}".format(self.record_every))

    def should_record(self, k, last=False):

        return last or k % self.record_every == 0

@dataclass
class SolveResult:

    state: Any
    reason: str # "tolerance" or "max_iters"
    iterations: int
    stationarity: float
    feasibility: float
    objective: float
    report: Any = None
    wallclock_s: float = 0.

    @property
    def converged(self):
        return self.reason == "tolerance"

class ListSink(object):
    """ Keeps every record in memory, in iteration order. """

    def __init__(self):

        self.records = []

    def __call__(self, record):

        if self.records and record.k <= self.records[-1].k:
            raise ValueError("records must arrive in increasing k, got {} after {}".format(record.k, self.records[-1].k))

        self.records.append(record)

    def __len__(self):

        return len(self.records)

def null_sink(record):
    pass

def rng_from_seed(seed):
    """ PCG64 generator, the only generator used across the package. """

    return np.random.Generator(np.random.PCG64(seed))
