import numpy as np
import pytest

from src.problem import GeneratorConfig, composite_problem, generate_lcqp, lcqp_problem
from src.prox import BoxSet, ProxSpec

def concave_1d(a, b):
    """ f(x) = -x^2 on [0, 5] subject to a x = b """

    return composite_problem(f_value=lambda x: -float(x @ x),
                             f_grad=lambda x: -2. * x,
                             h=ProxSpec.box_indicator(BoxSet([0.], [5.])),
                             A=np.array([[a]]),
                             b=np.array([b]),
                             L_f=2.)

def central_difference(f, x, h=1e-5):

    g = np.zeros_like(x)

    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)

    return g

@pytest.fixture
def kkt_fixture():
    """ KKT point (x, lambda) = (0.5, 1) """
    return concave_1d(1., 0.5)

@pytest.fixture
def converging_fixture():
    """ KKT point (x, lambda) = (0.5, 0.5) """
    return concave_1d(2., 1.)

@pytest.fixture
def small_instance():
    return generate_lcqp(GeneratorConfig(n=20, m=5, seed=1))

@pytest.fixture
def small_problem(small_instance):
    return lcqp_problem(small_instance)

@pytest.fixture(params=[0, 1, 2, 3, 4])
def random_problem(request):
    return lcqp_problem(generate_lcqp(GeneratorConfig(n=30, m=6, seed=request.param)))
