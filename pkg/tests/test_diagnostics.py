import dataclasses

import numpy as np
import pytest

from src import diagnostics, pplag
from src.problem import composite_problem
from src.prox import BoxSet, ProxSpec
from src.utils import ListSink, StoppingRule

BOX = ProxSpec.box_indicator(BoxSet([0.], [5.]))

def state(x, lam, z=0., mu=0., delta=0.5, k=0):

    return pplag.PplagState(x=np.array([x]), z=np.array([z]), lam=np.array([lam]), mu=np.array([mu]), delta=delta, k=k)

def run(p, params, iterations, seed=0):

    states = [pplag.initial_state(p, params, seed)]

    for _ in range(iterations):
        states.append(pplag.iterate(p, params, states[-1]))

    return states

@pytest.mark.parametrize("x, g, expected", [(2., 0., 0.), (0., 3., 0.), (1., 3., 1.), (4., -3., 1.)])
def test_stationarity_residual_by_hand(x, g, expected):

    assert diagnostics.stationarity_residual(BOX, np.array([x]), np.array([g])) == pytest.approx(expected)

def test_kkt_residual_at_kkt_point(kkt_fixture):

    assert diagnostics.kkt_residual(kkt_fixture, np.array([0.5]), np.array([1.])) == (0., 0.)

def test_kkt_residual_off_the_multiplier(kkt_fixture):

    stat, feas = diagnostics.kkt_residual(kkt_fixture, np.array([0.5]), np.array([1.1]))

    assert stat == pytest.approx(0.1)
    assert feas == 0.

def test_kkt_residual_infeasible_row(kkt_fixture):

    _, feas = diagnostics.kkt_residual(kkt_fixture, np.array([0.75]), np.array([0.]))

    assert feas == pytest.approx(0.25)

def test_stationarity_residual_is_continuous(small_problem):

    rng = np.random.default_rng(3)

    for _ in range(20):
        x = small_problem.h.box.project(3 * rng.standard_normal(20))
        g = rng.standard_normal(20)
        dg = rng.standard_normal(20)
        dg *= 1e-8 / np.linalg.norm(dg)

        r0 = diagnostics.stationarity_residual(small_problem.h, x, g)
        r1 = diagnostics.stationarity_residual(small_problem.h, x, g + dg)

        assert abs(r1 - r0) <= 1e-8 + 1e-15

def test_subgradient_vector_by_hand():

    p = composite_problem(lambda x: 0., np.zeros_like, ProxSpec.zero(), np.eye(1), [0.], 1.)
    params = pplag.PplagParams(eta=1.)

    d1, d2, norm = diagnostics.subgradient_vector_d(p, params, state(1., 0.), state(0.5, 1., k=1))

    np.testing.assert_allclose(d1, [1.5])
    np.testing.assert_allclose(d2, [0.])
    assert norm == pytest.approx(1.5)

def test_subgradient_vector_vanishes_without_movement(converging_fixture):

    params = pplag.make_params(converging_fixture)
    w = state(0.5, 0.5, k=3)

    _, _, norm = diagnostics.subgradient_vector_d(converging_fixture, params, w, dataclasses.replace(w, k=4))

    assert norm == 0.

def test_iterates_must_be_consecutive(converging_fixture):

    params = pplag.make_params(converging_fixture)

    with pytest.raises(ValueError):
        diagnostics.subgradient_vector_d(converging_fixture, params, state(1., 0.), state(1., 0., k=2))

    with pytest.raises(ValueError):
        diagnostics.descent_certificate(converging_fixture, params, state(1., 0., k=1), state(1., 0., k=1))

def test_certificate_without_movement(converging_fixture):

    params = pplag.make_params(converging_fixture)
    w = state(0.5, 0.5, mu=0.5, k=3)

    cert = diagnostics.descent_certificate(converging_fixture, params, w, dataclasses.replace(w, k=4))

    assert cert.passed
    assert cert.gap > 0

def test_certificate_on_exact_steps(small_problem):

    # eta below the bound so gamma > 0, delta = 0 so that the step carries no perturbation
    params = pplag.make_params(small_problem, safety=0.5)
    w = dataclasses.replace(run(small_problem, params, 3)[-1], delta=0.)

    for _ in range(20):
        nxt = pplag.iterate(small_problem, params, w)
        cert = diagnostics.descent_certificate(small_problem, params, w, nxt)

        assert cert.applicable
        assert cert.passed
        assert np.any(nxt.x != w.x)

        w = nxt

def test_certificate_applicability_at_default_start(small_problem):

    params = pplag.make_params(small_problem, safety=0.5)
    w0, w1 = run(small_problem, params, 1)

    assert not diagnostics.descent_certificate(small_problem, params, w0, w1).applicable

def test_dual_bound_by_hand():

    assert diagnostics.dual_bound(0.5, 0.99) == pytest.approx(25.)
    assert diagnostics.dual_bound(0.5, 1 - 1e-7) == pytest.approx(2.5e6, rel=1e-6)

    with pytest.raises(ValueError):
        diagnostics.dual_bound(0., 0.99)

    with pytest.raises(ValueError):
        diagnostics.dual_bound(0.5, 0.5)

def test_iteration_relations_along_runs(random_problem):

    p = random_problem
    params = pplag.make_params(p)
    states = run(p, params, 300)
    bound = diagnostics.dual_bound(params.delta0, params.r_ratio)

    for k, (w, nxt) in enumerate(zip(states, states[1:])):

        rel = diagnostics.iteration_relations(p, params, w, nxt)

        assert rel.mu_step[0] <= rel.mu_step[1] + 1e-12
        assert rel.tau_gap[0] <= rel.tau_gap[1] + 1e-12
        assert rel.mid_iterate[0] == pytest.approx(rel.mid_iterate[1], rel=1e-10, abs=1e-12)
        assert np.linalg.norm(nxt.mu) <= bound

        if k == 0:
            continue

        assert rel.lambda_step[0] <= rel.lambda_step[1] * (1 + 1e-9) + 1e-12

        _, _, d_norm = diagnostics.subgradient_vector_d(p, params, w, nxt)
        assert d_norm <= diagnostics.d_bound(p, params, w, nxt) + 1e-9

def test_approximate_monotonicity(small_problem):

    params = pplag.make_params(small_problem)
    states = run(small_problem, params, 300)

    for w, nxt in zip(states[1:], states[2:]):

        L, L_next = pplag.lagrangian_value(small_problem, params, w), pplag.lagrangian_value(small_problem, params, nxt)
        perturbation = w.delta / params.rho + w.delta ** 2 / (8 * params.rho)

        assert L_next <= L + perturbation + 1e-9 * (1 + abs(L))

def test_records_of_a_run(small_problem):

    params = pplag.make_params(small_problem)
    sink = ListSink()

    pplag.solve(small_problem, params, StoppingRule(max_iters=20, eps_stat=1e-12, eps_feas=1e-12), sink)

    first, last = sink.records[0], sink.records[-1]

    assert first.descent_ok is None
    assert last.descent_ok is True
    assert last.d_norm >= 0 and last.dual_norm_mu >= 0
    assert last.delta == pytest.approx(params.delta0 * params.r_ratio ** 20)
    assert last.wallclock_ns >= first.wallclock_ns

def test_eps_kkt_report():

    report = diagnostics.eps_kkt_report(1e-4, 2e-3, 1e-3, 1e-3, iter_at=12)

    assert not report.satisfied
    assert report.as_dict()["iter_at"] == 12
    assert diagnostics.eps_kkt_report(1e-4, 1e-3, 1e-3, 1e-3).satisfied

def test_objective_value_drops_infeasible_h(kkt_fixture):

    assert diagnostics.objective_value(kkt_fixture, np.array([6.])) == pytest.approx(-36.)
