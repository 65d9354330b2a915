import os

import numpy as np

from scipy import io

from src.problem import LcqpInstance, LinearMap
from src.prox import BoxSet
from src.reporting import read_json

def load_vector(path):

    return np.atleast_1d(np.loadtxt(path, dtype=float))

def load_matrix(path):

    M = io.mmread(path)

    # coordinate files come back sparse
    if hasattr(M, "toarray"):
        M = M.toarray()

    return np.atleast_2d(np.asarray(M, dtype=float))

def load_instance(path):
    """
    Inverse of save_instance. Shapes and the symmetry of Q are validated by LcqpInstance.
    :param path: instance directory
    :return: (LcqpInstance, meta dict)
    """

    if not os.path.isdir(path):
        raise FileNotFoundError("no instance directory at {}".format(path))

    meta = read_json(os.path.join(path, "meta.json"))

    Q = load_matrix(os.path.join(path, "Q.mtx"))
    A = load_matrix(os.path.join(path, "A.mtx"))
    r = load_vector(os.path.join(path, "r.txt"))
    b = load_vector(os.path.join(path, "b.txt"))
    bounds = load_vector(os.path.join(path, "box.txt"))

    n = A.shape[1]

    if bounds.shape != (2 * n,):
        raise ValueError("box.txt must hold 2n={} values, got {}".format(2 * n, bounds.shape[0]))

    if meta.get("n") != n or meta.get("m") != A.shape[0]:
        raise ValueError("meta.json dimensions {}x{} do not match A {}".format(meta.get("m"), meta.get("n"), A.shape))

    x_feas_path = os.path.join(path, "x_feas.txt")
    x_feas = load_vector(x_feas_path) if os.path.exists(x_feas_path) else None

    inst = LcqpInstance(Q=Q, r=r, A=LinearMap(A), b=b, box=BoxSet(bounds[:n], bounds[n:]),
                        seed=int(meta.get("seed", 0)), x_feas=x_feas)

    return inst, meta
