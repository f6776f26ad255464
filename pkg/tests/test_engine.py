import numpy as np
import pytest

from aoftrl import oracle
from aoftrl.domains import Hyperrectangle, Simplex
from aoftrl.engine import (AOEG, AOGD, CAOGD_L1, RoundRecord, StreamError, aoeg_regret_bound, aoeg_step, aogd_regret_bound,
                           aogd_step, cao_l1_step, composite_step, numeric_step, posteriori_bound,
                           posteriori_optimal_value, run_online, squared_l2_step, theorem1_bound)
from aoftrl.harness.streams import FixedLinear, LossStream, RandomLinear, generate_stream
from aoftrl.losses import LinearLoss
from aoftrl.predictors import LastGradient, Zero
from aoftrl.regularizers import AoegRegState, AogdRegState, L1, SquaredL2

BOX1 = Hyperrectangle(np.array([1.0]))


def state(A, B, R=None):
    A = np.asarray(A, dtype=float)
    return AogdRegState(np.ones_like(A) if R is None else np.asarray(R, dtype=float), A=A, B=B)


@pytest.mark.parametrize("A, B, c, expected", [
    ([1.0], [0.0], [0.0], [0.0]),
    ([1.0], [1.0], [0.0], [1.0]),
    ([0.5], [0.0], [4.0], [-1.0]),
])
def test_aogd_step_examples(A, B, c, expected):
    out = aogd_step(state(A, B), c, BOX1)
    np.testing.assert_allclose(out, expected)
    st = state(A, B)
    num = numeric_step(st, c, BOX1)
    np.testing.assert_allclose(num, expected, atol=1e-6)


def test_aogd_step_degenerate_coordinates():
    box = Hyperrectangle(np.array([1.0, 2.0, 3.0]))
    out = aogd_step(state([0, 0, 0], [0, 0, 0], box.radii), [2.0, -1.0, 0.0], box, prev=[0.1, 0.2, 0.3])
    np.testing.assert_array_equal(out, [-1.0, 2.0, 0.3])


def test_aoeg_step_examples():
    np.testing.assert_allclose(aoeg_step(1.7, [0.0, 0.0]), [0.5, 0.5])
    np.testing.assert_allclose(aoeg_step(0.3, [2.5, 2.5, 2.5]), [1 / 3] * 3)
    np.testing.assert_allclose(aoeg_step(1.0, [0.0, np.log(4.0)]), [0.8, 0.2], atol=1e-15)
    c = np.array([0.0, np.log(4.0)])
    res = oracle.numeric_argmin(lambda x: (float(c @ x + np.sum(x * np.log(np.maximum(x, 1e-300)))),
                                           c + np.log(np.maximum(x, 1e-300)) + 1.0), Simplex(2))
    np.testing.assert_allclose(res.x, [0.8, 0.2], atol=1e-6)


def test_aoeg_step_overflow_safe():
    x = aoeg_step(1e-3, [1e3, -1e3, 0.0])
    assert Simplex(3).contains(x)
    np.testing.assert_allclose(x, [0, 1, 0])


def test_cao_l1_examples():
    np.testing.assert_allclose(cao_l1_step(state([1.0], [1.0]), [0.0], 1.0, BOX1), [0.5])
    out = cao_l1_step(state([1.0], [0.25]), [0.0], 1.0, BOX1)
    assert out[0] == 0.0
    np.testing.assert_allclose(numeric_step(state([1.0], [1.0]), [0.0], BOX1, l1_weight=1.0), [0.5], atol=1e-6)
    np.testing.assert_allclose(numeric_step(state([1.0], [0.25]), [0.0], BOX1, l1_weight=1.0), [0.0], atol=1e-6)


def test_cao_l1_zero_weight_is_aogd():
    rng = np.random.default_rng(0)
    box = Hyperrectangle(rng.uniform(0.5, 2, 6))
    for _ in range(50):
        A = rng.uniform(0, 2, 6) * (rng.random(6) > 0.3)
        st = state(A, rng.normal(size=6), box.radii)
        c = rng.normal(size=6) * (rng.random(6) > 0.2)
        prev = box.uniform_point(rng)
        np.testing.assert_array_equal(cao_l1_step(st, c, 0.0, box, prev), aogd_step(st, c, box, prev))


def test_l1_large_weight_gives_zero_vector():
    rng = np.random.default_rng(1)
    box = Hyperrectangle.cube(5)
    for _ in range(20):
        st = state(rng.uniform(0.1, 2, 5), rng.normal(size=5), box.radii)
        c = rng.normal(size=5)
        w = np.max(np.abs(2 * st.B - c)) + 1e-9
        np.testing.assert_array_equal(cao_l1_step(st, c, w, box), np.zeros(5))


def test_squared_l2_step_matches_numeric():
    rng = np.random.default_rng(2)
    box = Hyperrectangle(np.array([1.0, 0.5, 2.0]))
    for _ in range(10):
        st = state(rng.uniform(0, 1, 3), rng.normal(size=3), box.radii)
        c = rng.normal(size=3) * 2
        w = rng.uniform(0.1, 1.0)
        np.testing.assert_allclose(squared_l2_step(st, c, w, box), numeric_step(st, c, box, l2_weight=w), atol=1e-6)


def test_composite_step_dispatch():
    st = state([1.0], [1.0])
    np.testing.assert_allclose(composite_step(st, [0.0], L1(0.5), 2, BOX1), [0.5])
    np.testing.assert_allclose(composite_step(st, [0.0], SquaredL2(0.5), 2, BOX1), [0.5])
    np.testing.assert_allclose(composite_step(st, [0.0], None, 2, BOX1), [1.0])


def test_aogd_bound_examples():
    g = [np.array([1.0, 0.0]), np.array([1.0, 0.0])]
    pred = [np.zeros(2), g[0]]
    assert aogd_regret_bound(g, pred, [1, 1]) == pytest.approx(4.0)
    assert aogd_regret_bound(g, g, [1, 1]) == 0.0
    assert aogd_regret_bound([np.array([3.0, 4.0])], [np.zeros(2)], [1, 1]) == pytest.approx(28.0)


def test_aoeg_bound_examples():
    g1 = [np.array([0.3, 0.1])]
    assert aoeg_regret_bound(g1, [np.zeros(2)], 1.0, 2) == pytest.approx(2.354820, abs=1e-6)
    g = [np.array([1.0, 0.0]), np.array([0.2, 0.2])]
    assert aoeg_regret_bound(g, g, 1.0, 2) == pytest.approx(2 * np.sqrt(2 * np.log(2)))
    assert aoeg_regret_bound(g, [np.zeros(2), np.zeros(2)], 1.0, 2) == pytest.approx(3.330218, abs=1e-6)


def test_posteriori_examples():
    assert posteriori_optimal_value([3.0, 4.0]) == pytest.approx(24.5)
    assert posteriori_optimal_value([0.0, 0.0]) == 0.0
    assert posteriori_optimal_value([5.0]) == pytest.approx(25.0)
    assert posteriori_bound([3.0, 4.0]) == pytest.approx(7.0)


def test_theorem1_trivial_cases():
    box = Hyperrectangle.cube(2)
    zero = LossStream(2, 10, np.zeros(2), _constant=LinearLoss(np.zeros(2)))
    rep = run_online(zero, box, LastGradient(), AOGD(), 10)
    assert rep.regret == 0.0 and rep.bounds["theorem1"] == 0.0
    # perfect predictions: no increments and no dual terms, so the bound is r_{0:T}(x*) = 0
    st = AogdRegState.fresh(box.radii)
    trace = []
    g = np.array([0.4, -0.2])
    for t in range(1, 6):
        st.accumulate(np.zeros(2), g, g)
        trace.append(RoundRecord(t, np.zeros(2), 0.0, g, g, st.dual_norm_sq(g - g)))
    assert theorem1_bound(trace, st.value, box.radii) == 0.0


def test_empty_run():
    rep = run_online(generate_stream(RandomLinear(), 0, 0, Hyperrectangle.cube(3)), Hyperrectangle.cube(3),
                     T=0)
    assert rep.trace == [] and rep.regret == 0.0


def test_random_2d_bound_holds_at_every_comparator():
    box = Hyperrectangle(np.array([1.0, 2.0]))
    rng = np.random.default_rng(0)
    for seed in range(5):
        rep = run_online(generate_stream(RandomLinear(), seed, 100, box), box, LastGradient(), AOGD(), 100)
        assert rep.holds("theorem1") and rep.holds("aogd")
        for x in [box.uniform_point(rng) for _ in range(20)] + [box.radii, -box.radii]:
            reg = rep.regret_curve(x)[-1]
            assert reg <= theorem1_bound(rep.trace, rep.r_total_at, x) + 1e-9


def test_constant_loss_gives_constant_regret():
    box = Hyperrectangle.cube(3)
    kind = FixedLinear((0.5, -1.0, 0.25))
    short = run_online(generate_stream(kind, 0, 10, box), box, LastGradient(), AOGD(), 10)
    long = run_online(generate_stream(kind, 0, 1000, box), box, LastGradient(), AOGD(), 1000)
    xs = np.array([r.x for r in long.trace[1:]])
    assert np.all(xs == xs[0])
    assert abs(long.regret - short.regret) < short.bounds["aogd"]


def test_aoeg_zero_predictor_weight_monotone():
    s = Simplex(4)
    g = np.array([0.3, 0.1, 0.5, 0.9])
    rep = run_online(LossStream(4, 200, g, _constant=LinearLoss(g)), s, Zero(), AOEG(1.0), 200)
    w = np.array([r.x[1] for r in rep.trace])
    assert np.all(np.diff(w) >= -1e-15)
    assert rep.holds("theorem2") and rep.holds("aoeg")


def test_zero_predictor_matches_reference_ftrl_prox():
    """Reference adaptive FTRL-Prox written from scratch: stores every (x_s, a_s)."""
    box = Hyperrectangle(np.array([1.0, 0.5, 2.0]))
    stream = generate_stream(RandomLinear(), 4, 60, box)
    rep = run_online(stream, box, Zero(), AOGD(), 60)
    R = box.radii
    x = np.zeros(3)
    G = np.zeros(3)
    sq = np.zeros(3)
    centers, weights = [], []
    for t in range(1, 61):
        np.testing.assert_allclose(rep.trace[t - 1].x, x, atol=1e-12)
        g = stream.loss(t).g
        old = np.sqrt(sq)
        sq = sq + g * g
        weights.append((np.sqrt(sq) - old) / (2 * R))
        centers.append(x.copy())
        G = G + g
        W = np.sum(weights, axis=0)
        x = np.clip((2 * np.sum(np.array(weights) * np.array(centers), axis=0) - G) / (2 * W), -R, R)


def test_non_finite_stream_is_fatal():
    bad = LossStream(2, 3, np.ones(2), _constant=LinearLoss(np.array([np.nan, 0.0])))
    with pytest.raises(StreamError):
        run_online(bad, Hyperrectangle.cube(2), T=3)


def test_domain_algorithm_mismatch():
    s = generate_stream(RandomLinear(), 0, 5, Hyperrectangle.cube(3))
    with pytest.raises(TypeError):
        run_online(s, Hyperrectangle.cube(3), algorithm=AOEG())
    with pytest.raises(TypeError):
        run_online(s, Simplex(3), algorithm=AOGD())


def test_caogd_l1_run_reports_composite_regret():
    box = Hyperrectangle.cube(4)
    rep = run_online(generate_stream(RandomLinear(0.2), 1, 300, box), box, LastGradient(), CAOGD_L1(0.1), 300)
    assert rep.holds("theorem1")
    assert np.all(np.abs(rep.final_iterate) <= 1.0)
