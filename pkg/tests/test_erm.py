import numpy as np
import pytest

from aoftrl import oracle
from aoftrl.domains import Hyperrectangle
from aoftrl.engine import CAOGD_L1, run_online
from aoftrl.erm import (ErmProblem, erm_bound, erm_bound_terms, erm_distribution, group_estimate,
                        run_caos_reg_erm_epoch, run_caos_reg_erm_epoch_minibatch)
from aoftrl.harness.data import erm_problem_for, synthetic_classification, problem_from_dataset
from aoftrl.harness.streams import ErmLasso, LossStream
from aoftrl.predictors import LastGradient
from aoftrl.regularizers import L1, SquaredL2


@pytest.fixture(scope="module")
def lasso():
    return erm_problem_for(ErmLasso(m=30, data_seed=1, alpha=0.05, n=6))


def test_erm_distribution_examples():
    np.testing.assert_allclose(erm_distribution([1, 1, 1]), [1 / 3] * 3)
    np.testing.assert_allclose(erm_distribution([1, 3]), [0.25, 0.75])
    np.testing.assert_allclose(erm_distribution([2, 5, 1]), erm_distribution([20, 50, 10]))
    with pytest.raises(ValueError):
        erm_distribution([1, 0])


def test_erm_bound_examples():
    assert erm_bound([1.0], lipschitz=[1, 1], T=4) == pytest.approx(32.0)
    same = np.ones((5, 2))
    terms = [erm_bound_terms(same, same, [0.2] * 5) for _ in range(10)]
    assert erm_bound([1.0, 1.0], terms=terms) == 0.0
    rng = np.random.default_rng(0)
    g, s = rng.normal(size=(4, 3)), rng.normal(size=(4, 3))
    p = np.full(4, 0.25)
    full = erm_bound([1, 2, 3], terms=[erm_bound_terms(g, s, p)])
    half = erm_bound([1, 2, 3], terms=[erm_bound_terms(g, s, p / 2)])
    assert half == pytest.approx(full * np.sqrt(2))
    with pytest.raises(ValueError):
        erm_bound([1.0])


def test_problem_validation():
    box = Hyperrectangle.cube(2)
    with pytest.raises(ValueError):
        ErmProblem(np.ones((3, 2)), np.ones(2), "squared", box)
    with pytest.raises(ValueError):
        ErmProblem(np.ones((2, 2)), [1.0, 0.5], "logistic", box)
    with pytest.raises(ValueError):
        ErmProblem(np.zeros((2, 2)), [1.0, -1.0], "hinge", box)
    with pytest.raises(ValueError):
        ErmProblem(np.ones((2, 3)), [1.0, -1.0], "hinge", box)


@pytest.mark.parametrize("loss", ["squared", "logistic", "hinge"])
def test_component_gradients_and_bounds(loss):
    data = synthetic_classification(12, 4, 3)
    p = problem_from_dataset(data, loss, alpha=0.1)
    rng = np.random.default_rng(0)
    assert p.check_bounds(rng)
    x = rng.uniform(-0.9, 0.9, 4)
    G = p.component_grads(x)
    for j in range(p.m):
        np.testing.assert_allclose(p.component_grad(j, x), G[j])
    if loss != "hinge":
        h = 1e-6
        fd = np.array([(p.F.value(x + h * e) - p.F.value(x - h * e)) / (2 * h) for e in np.eye(4)])
        np.testing.assert_allclose(p.F.grad(x), fd, atol=1e-6)
    assert np.all(np.abs(G.sum(axis=0)) <= p.coordinate_lipschitz() + 1e-12)


def test_k_must_divide_T(lasso):
    with pytest.raises(ValueError):
        run_caos_reg_erm_epoch(lasso, 3, 100, 0, find_comparator=False)


def test_single_component_every_round_snapshot_is_last_gradient_aogd():
    rng = np.random.default_rng(2)
    box = Hyperrectangle(np.array([1.0, 0.5, 2.0]))
    p = ErmProblem(rng.normal(size=(1, 3)), [0.4], "squared", box, L1(0.05))
    T = 60
    a = run_caos_reg_erm_epoch(p, T, T, 1, find_comparator=False)
    b = run_online(LossStream(3, T, p.coordinate_lipschitz(), _constant=p.F), box, LastGradient(), CAOGD_L1(0.05),
                   T, find_comparator=False)
    for ra, rb in zip(a.trace, b.trace):
        np.testing.assert_array_equal(ra.x, rb.x)
    # after round 1, estimate minus prediction is the change of one gradient between consecutive iterates
    est = np.array(a.extras["erm"].estimates)
    pred = np.array(a.extras["erm"].est_predictions)
    np.testing.assert_allclose(est[1:] - pred[1:], np.diff(est, axis=0), atol=1e-15)


def test_fixed_seed_determinism(lasso):
    a = run_caos_reg_erm_epoch(lasso, 5, 100, 3, find_comparator=False)
    b = run_caos_reg_erm_epoch(lasso, 5, 100, 3, find_comparator=False)
    assert a.regret == b.regret and a.bounds == b.bounds
    np.testing.assert_array_equal(a.final_iterate, b.final_iterate)


def test_singleton_minibatch_is_trace_identical(lasso):
    a = run_caos_reg_erm_epoch(lasso, 4, 200, 8, find_comparator=False)
    b = run_caos_reg_erm_epoch_minibatch(lasso, [[j] for j in range(lasso.m)], 4, 200, 8, find_comparator=False)
    assert a.extras["erm"].sampled == b.extras["erm"].sampled
    for ra, rb in zip(a.trace, b.trace):
        np.testing.assert_array_equal(ra.x, rb.x)
    assert a.regret == b.regret and a.bounds == b.bounds


def test_single_group_is_full_gradient(lasso):
    rep = run_caos_reg_erm_epoch_minibatch(lasso, [list(range(lasso.m))], 2, 40, 0, find_comparator=False)
    for rec, est in zip(rep.trace, rep.extras["erm"].estimates):
        np.testing.assert_allclose(est, rec.grad, atol=1e-12)


def test_two_group_estimate_unbiased(lasso):
    groups = [list(range(0, lasso.m, 2)), list(range(1, lasso.m, 2))]
    probs = np.array([0.5, 0.5])
    x = np.linspace(-0.5, 0.5, lasso.n)
    ests = np.array([group_estimate(lasso, x, i, groups, probs) for i in range(2)])
    rng = np.random.default_rng(0)
    draws = ests[rng.choice(2, size=100_000, p=probs)]
    se = draws.std(axis=0) / np.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - lasso.F.grad(x)) <= 4 * se + 1e-12)


def test_snapshot_epochs(lasso):
    rep = run_caos_reg_erm_epoch(lasso, 5, 100, 0, find_comparator=False)
    assert rep.extras["erm"].snapshots == [1, 21, 41, 61, 81]


def test_objective_improves_on_every_seed(lasso):
    h0 = lasso.H(lasso.box.center())
    for seed in range(10):
        rep = run_caos_reg_erm_epoch(lasso, 10, 500, seed, find_comparator=False)
        assert rep.extras["final_objective"] <= h0


def test_frequent_snapshots_shrink_prediction_error():
    p = erm_problem_for(ErmLasso(m=20, data_seed=4, alpha=0.01, n=5))
    wins = 0
    for seed in range(10):
        every = run_caos_reg_erm_epoch(p, 400, 400, seed, find_comparator=False)
        once = run_caos_reg_erm_epoch(p, 1, 400, seed, find_comparator=False)
        err = lambda r: float(np.sum(np.abs(np.array(r.extras["erm"].estimates)
                                            - np.array(r.extras["erm"].est_predictions))))
        wins += err(every) <= err(once)
    assert wins == 10


def test_squared_l2_composite_runs():
    data = synthetic_classification(20, 3, 0)
    p = ErmProblem(data.features, data.labels, "logistic", Hyperrectangle.cube(3), SquaredL2(0.1))
    x_star = oracle.best_fixed_point([p.F], p.box, p.psi, 1).x
    rep = run_caos_reg_erm_epoch(p, 10, 1000, 0, comparator=x_star)
    assert rep.extras["final_objective"] - p.H(x_star) < 0.05


def test_non_finite_data_rejected():
    with pytest.raises(ValueError):
        ErmProblem(np.array([[np.nan, 1.0]]), [1.0], "squared", Hyperrectangle.cube(2))


def test_overflowing_bounds_rejected():
    box = Hyperrectangle(np.array([1e300, 1e300]))
    with pytest.raises(ValueError):
        ErmProblem(np.array([[1e300, 1e300]]), [0.0], "squared", box)
