import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagchange import (
    DegenerateScale,
    KernelSpec,
    auto_scale,
    eval_count,
    eval_pairs,
    kernel_eval,
    median_trick,
    reset_eval_count,
)

import reference_impls as ref


def test_quadexp_known_value():
    spec = KernelSpec("quadexp", 1.0)
    # one coordinate at squared distance 4, the other equal
    val = kernel_eval(spec, (0.0, 0.0), (2.0, 0.0))
    assert abs(val - (-math.exp(-1.0))) < 1e-15


def test_quadexp_identical_points_is_one():
    spec = KernelSpec("quadexp", 0.7)
    assert kernel_eval(spec, (1.5, -2.0, 0.25), (1.5, -2.0, 0.25)) == 1.0


def test_gauss_known_values():
    spec = KernelSpec("gauss", 0.5)
    assert kernel_eval(spec, (3.0,), (3.0,)) == 1.0
    # squared distance 25, beta^2/2 = 0.125
    assert abs(kernel_eval(spec, (0.0, 0.0), (3.0, 4.0)) - math.exp(-3.125)) < 1e-15


def test_energy_known_value():
    spec = KernelSpec("energy", 1.0)
    assert kernel_eval(spec, (0.0, 0.0), (3.0, 4.0)) == 5.0
    assert kernel_eval(spec, (2.0,), (2.0,)) == 0.0


def test_signs():
    assert KernelSpec("gauss", 1.0).sign == 1
    assert KernelSpec("quadexp", 1.0).sign == 1
    assert KernelSpec("energy", 1.0).sign == -1


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("quadexp", 0.0)
    with pytest.raises(ValueError):
        KernelSpec("quadexp", -1.0)
    with pytest.raises(ValueError):
        KernelSpec("gauss", math.inf)
    with pytest.raises(ValueError):
        KernelSpec("energy", 2.0)  # exponent must stay below 2
    with pytest.raises(ValueError):
        KernelSpec("sobolev", 1.0)


def test_eval_pairs_matches_scalar_reference():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(40, 3))
    y = rng.normal(size=(40, 3))
    for family, scale in (("gauss", 0.8), ("quadexp", 1.3), ("energy", 1.0)):
        got = eval_pairs(KernelSpec(family, scale), x, y)
        want = [ref.kernel_scalar(family, scale, x[i], y[i]) for i in range(40)]
        assert np.allclose(got, want, rtol=0, atol=1e-12)


coord = st.floats(-50, 50, allow_nan=False)
vec = st.lists(coord, min_size=1, max_size=4)


@settings(max_examples=60, deadline=None)
@given(xy=st.tuples(vec, vec), family=st.sampled_from(["gauss", "quadexp", "energy"]))
def test_symmetry(xy, family):
    x, y = xy
    k = min(len(x), len(y))
    x, y = x[:k], y[:k]
    spec = KernelSpec(family, 1.1)
    assert kernel_eval(spec, x, y) == kernel_eval(spec, y, x)


@settings(max_examples=60, deadline=None)
@given(xy=st.tuples(vec, vec), shift=coord)
def test_translation_invariance(xy, shift):
    x, y = xy
    k = min(len(x), len(y))
    x = np.asarray(x[:k])
    y = np.asarray(y[:k])
    for family in ("gauss", "quadexp", "energy"):
        spec = KernelSpec(family, 0.9)
        a = kernel_eval(spec, x, y)
        b = kernel_eval(spec, x + shift, y + shift)
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=80, deadline=None)
@given(xy=st.tuples(vec, vec), scale=st.floats(0.05, 20, allow_nan=False))
def test_value_ranges(xy, scale):
    x, y = xy
    k = min(len(x), len(y))
    x, y = x[:k], y[:k]
    g = kernel_eval(KernelSpec("gauss", scale), x, y)
    # strictly positive in exact arithmetic; exp underflow can hit 0.0
    assert 0.0 <= g <= 1.0
    q = kernel_eval(KernelSpec("quadexp", scale), x, y)
    assert -2.0 * math.exp(-2.0 / 3.0) <= q <= 1.0
    e = kernel_eval(KernelSpec("energy", 1.0), x, y)
    assert e >= 0.0


def test_eval_counter_counts_rows():
    reset_eval_count()
    x = np.zeros((17, 2))
    eval_pairs(KernelSpec("gauss", 1.0), x, x)
    eval_pairs(KernelSpec("energy", 1.0), x[:5], x[:5])
    assert eval_count() == 22


def test_eval_counter_thread_safety():
    reset_eval_count()
    x = np.zeros((100, 1))
    spec = KernelSpec("gauss", 1.0)

    def work():
        for _ in range(50):
            eval_pairs(spec, x, x)

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert eval_count() == 4 * 50 * 100


def test_median_trick_small_example():
    rows = np.array([[0.0], [0.0], [2.0], [2.0]])
    # squared distances among all pairs: 0,4,4,4,4,0 -> lower median 4
    assert median_trick(rows, lag=0, bandwidth=2) == 2.0


def test_median_trick_single_pair():
    rows = np.array([[0.0], [1.0]])
    assert median_trick(rows, lag=0, bandwidth=1) == 0.5


def test_median_trick_band_limit():
    # rows 0..9; with bandwidth 2 and lag 0 only pairs separated by <= 4 count
    rows = np.arange(10.0)[:, None]
    full = median_trick(rows, lag=0, bandwidth=5)
    banded = median_trick(rows, lag=0, bandwidth=2)
    assert banded <= full


def test_median_trick_degenerate():
    rows = np.ones((30, 2))
    with pytest.raises(DegenerateScale) as exc:
        median_trick(rows, lag=3, bandwidth=10)
    assert exc.value.lag == 3


def test_median_trick_subsample_deterministic():
    rng = np.random.default_rng(0)
    rows = rng.normal(size=(600, 2))
    a = median_trick(rows, lag=0, bandwidth=290, cap=2000, seed=11)
    b = median_trick(rows, lag=0, bandwidth=290, cap=2000, seed=11)
    assert a == b and a > 0


def test_auto_scale_families():
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(80, 2))
    delta = median_trick(rows, lag=1, bandwidth=20)
    q = auto_scale("quadexp", rows, lag=1, bandwidth=20)
    assert q.family == "quadexp" and q.scale == delta
    g = auto_scale("gauss", rows, lag=1, bandwidth=20)
    # beta chosen so that beta^2 * delta * 2 == 1
    assert abs(g.scale**2 * 2.0 * delta - 1.0) < 1e-12
    e = auto_scale("energy", rows, lag=1, bandwidth=20)
    assert e.scale == 1.0
