"""
Writes an LCQP instance directory:

    Q.mtx, A.mtx    MatrixMarket array, general, 17 significant digits
    r.txt, b.txt    one value per line
    box.txt         n lower bounds then n upper bounds
    x_feas.txt      generating point, when known
    meta.json       n, m, seed, generator, bounds, L_Q, sigma_max
"""

import logging
import os

import numpy as np

from scipy import io

from src.problem import GENERATOR_NAME, GENERATOR_VERSION, largest_singular_value, lipschitz_constant
from src.reporting import write_json
from src.utils import make_directory

logger = logging.getLogger(__name__)

PRECISION = 17

def save_vector(path, v):

    np.savetxt(path, np.asarray(v, dtype=float), fmt="%.17g")

def save_matrix(path, M):

    io.mmwrite(path, np.asarray(M, dtype=float), precision=PRECISION, symmetry="general")

def instance_meta(inst):

    lower, upper = inst.box.lower, inst.box.upper

    return {"n": inst.n,
            "m": inst.m,
            "seed": inst.seed,
            "generator": {"name": GENERATOR_NAME, "version": GENERATOR_VERSION},
            "lower": float(lower[0]) if np.all(lower == lower[0]) else lower.tolist(),
            "upper": float(upper[0]) if np.all(upper == upper[0]) else upper.tolist(),
            "L_Q": lipschitz_constant(inst.Q),
            "sigma_max": largest_singular_value(inst.A)}

def save_instance(inst, path, force=False):
    """
    :param inst: LcqpInstance
    :param path: instance directory, created if missing
    :param force: allow writing into a non-empty directory
    :return: the meta dict written to meta.json
    """

    make_directory(path, force)

    save_matrix(os.path.join(path, "Q.mtx"), inst.Q)
    save_matrix(os.path.join(path, "A.mtx"), inst.A.entries)

    save_vector(os.path.join(path, "r.txt"), inst.r)
    save_vector(os.path.join(path, "b.txt"), inst.b)
    save_vector(os.path.join(path, "box.txt"), np.concatenate([inst.box.lower, inst.box.upper]))

    x_feas_path = os.path.join(path, "x_feas.txt")

    if inst.x_feas is not None:
        save_vector(x_feas_path, inst.x_feas)

    elif os.path.exists(x_feas_path):
        os.remove(x_feas_path)

    meta = instance_meta(inst)
    write_json(os.path.join(path, "meta.json"), meta)

    logger.info("instance n=%d m=%d seed=%d written to %s", inst.n, inst.m, inst.seed, path)

    return meta
