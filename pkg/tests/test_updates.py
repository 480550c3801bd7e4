import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlnmf.objective import is_divergence
from tlnmf.updates import (normalize_columns, supervised_penalty, update_h,
                           update_h_supervised, update_w)

FLOOR = 1e-300


def penalized(v, w, h, lam_scaled):
    return is_divergence(v, np.maximum(w @ h, FLOOR)) + lam_scaled * h.sum()


@st.composite
def instances(draw):
    seed = draw(st.integers(0, 2 ** 31))
    r = np.random.default_rng(seed)
    M, K, N = draw(st.integers(1, 16)), draw(st.integers(1, 4)), draw(st.integers(1, 16))
    lam = draw(st.sampled_from([0.0, 0.1, 10.0, 1e3]))
    v = r.gamma(1.0, size=(M, N)) + 1e-3
    w = r.uniform(1e-3, 1, (M, K))
    w /= w.sum(axis=0)
    h = r.uniform(1e-3, 1, (K, N))
    return v, w, h, lam * M / K


class TestUpdateH:
    def test_fixed_point(self, rng):
        w, h = rng.uniform(0.1, 1, (5, 2)), rng.uniform(0.1, 1, (2, 4))
        np.testing.assert_allclose(update_h(w @ h, w, h, 0.0, FLOOR), h, rtol=1e-14)

    def test_scalar(self):
        assert update_h([[4.0]], [[1.0]], [[1.0]], 0.0, FLOOR)[0, 0] == pytest.approx(2.0)

    def test_infinite_penalty(self, rng):
        w, h = rng.uniform(0.1, 1, (3, 2)), rng.uniform(0.1, 1, (2, 3))
        assert not np.any(update_h(w @ h, w, h, np.inf, FLOOR))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            update_h(np.ones((3, 3)), np.ones((3, 2)), np.ones((3, 3)))

    @settings(max_examples=60, deadline=None)
    @given(instances())
    def test_monotone(self, inst):
        v, w, h, lam = inst
        h2 = update_h(v, w, h, lam, FLOOR)
        assert np.all(h2 >= 0)
        before, after = penalized(v, w, h, lam), penalized(v, w, h2, lam)
        assert after <= before * (1 + 1e-9)


class TestUpdateW:
    def test_fixed_point(self, rng):
        w, h = rng.uniform(0.1, 1, (5, 2)), rng.uniform(0.1, 1, (2, 4))
        np.testing.assert_allclose(update_w(w @ h, w, h, 0.0, FLOOR), w, rtol=1e-14)

    def test_scalar(self):
        assert update_w([[9.0]], [[1.0]], [[1.0]], 0.0, FLOOR)[0, 0] == pytest.approx(3.0)

    def test_zero_row_stays_zero(self, rng):
        w = rng.uniform(0.1, 1, (4, 2))
        w[1] = 0.0
        h = rng.uniform(0.1, 1, (2, 5))
        v = rng.uniform(0.1, 1, (4, 5))
        assert not np.any(update_w(v, w, h, 1.0, floor=1e-10)[1])

    @settings(max_examples=60, deadline=None)
    @given(instances())
    def test_monotone_after_normalization(self, inst):
        # for any lambda, update_w then renormalizing cannot increase the objective
        v, w, h, lam = inst
        w2, h2 = normalize_columns(update_w(v, w, h, lam, FLOOR), h)
        assert np.all(w2 >= 0) and np.all(h2 >= 0)
        assert penalized(v, w2, h2, lam) <= penalized(v, w, h, lam) * (1 + 1e-9)


class TestNormalizeColumns:
    def test_example(self):
        w, h = normalize_columns([[2.0], [2.0]], [[3.0]])
        np.testing.assert_allclose(w, [[0.5], [0.5]])
        np.testing.assert_allclose(h, [[12.0]])

    def test_idempotent(self, rng):
        w, h = normalize_columns(rng.uniform(size=(4, 3)), rng.uniform(size=(3, 5)))
        w2, h2 = normalize_columns(w, h)
        np.testing.assert_allclose(w2, w, rtol=1e-15)
        np.testing.assert_allclose(h2, h, rtol=1e-15)
        np.testing.assert_allclose(w.sum(axis=0), 1.0, atol=1e-12)

    def test_zero_column(self, caplog):
        w = np.array([[1.0, 0.0], [3.0, 0.0]])
        h = np.ones((2, 3))
        w2, h2 = normalize_columns(w, h)
        np.testing.assert_allclose(w2[:, 1], [0.5, 0.5])
        assert not np.any(h2[1])
        assert "all-zero" in caplog.text

    @settings(max_examples=40, deadline=None)
    @given(instances())
    def test_product_preserved(self, inst):
        v, w, h, _ = inst
        w2, h2 = normalize_columns(3.7 * w, h)
        np.testing.assert_allclose(w2 @ h2, 3.7 * w @ h, rtol=1e-12)
        assert penalized(v, w2, h2, 0.0) == pytest.approx(penalized(v, 3.7 * w, h, 0.0), rel=1e-9)


class TestSupervisedUpdate:
    def test_fixed_point(self, rng):
        w, h = rng.uniform(0.1, 1, (5, 4)), rng.uniform(0.1, 1, (4, 3))
        np.testing.assert_allclose(update_h_supervised(w @ h, w, h, 2, 2, 0, 0, FLOOR), h,
                                   rtol=1e-14)

    def test_reduces_to_uniform_penalty(self, rng):
        M, n_sp, n_no, lam = 6, 2, 4, 0.3
        w, h = rng.uniform(0.1, 1, (M, 6)), rng.uniform(0.1, 1, (6, 5))
        v = rng.uniform(0.1, 1, (M, 5))
        # lam_sp / n_sp == lam_no / n_no == lam / K with K = 6
        a = update_h_supervised(v, w, h, n_sp, n_no, lam * n_sp / 6, lam * n_no / 6, FLOOR)
        b = update_h(v, w, h, lam * M / 6, FLOOR)
        np.testing.assert_allclose(a, b, rtol=1e-14)

    def test_scalar_blocks(self, rng):
        M = 3
        w, h = rng.uniform(0.1, 1, (M, 2)), rng.uniform(0.1, 1, (2, 4))
        v = rng.uniform(0.1, 1, (M, 4))
        by_hand = np.array([[M * 0.5], [M * 2.0]])
        np.testing.assert_allclose(update_h_supervised(v, w, h, 1, 1, 0.5, 2.0, FLOOR),
                                   update_h(v, w, h, by_hand, FLOOR))
        np.testing.assert_allclose(supervised_penalty(M, 1, 1, 0.5, 2.0), by_hand)

    def test_wrong_row_count(self):
        with pytest.raises(ValueError):
            update_h_supervised(np.ones((3, 2)), np.ones((3, 3)), np.ones((3, 2)), 1, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2 ** 31), st.integers(1, 5), st.integers(1, 5),
           st.sampled_from([0.0, 0.1, 5.0]), st.sampled_from([0.0, 1.0]))
    def test_monotone(self, seed, n_sp, n_no, lam_sp, lam_no):
        r = np.random.default_rng(seed)
        M, N = 8, 6
        w = r.gamma(1.0, size=(M, n_sp + n_no))
        h = r.uniform(1e-3, 1, (n_sp + n_no, N))
        v = r.gamma(1.0, size=(M, N)) + 1e-3
        pen = supervised_penalty(M, n_sp, n_no, lam_sp, lam_no)

        def obj(h):
            return is_divergence(v, np.maximum(w @ h, FLOOR)) + np.sum(pen * h)

        h2 = update_h_supervised(v, w, h, n_sp, n_no, lam_sp, lam_no, FLOOR)
        assert np.all(h2 >= 0)
        assert obj(h2) <= obj(h) * (1 + 1e-9)
