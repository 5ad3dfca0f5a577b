"""Property suites: core invariants under a generative harness."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from contrastseg import (Annotations, SolverConfig, build_contrast_set,
                         contrast_map, cosine_similarity_map, solve_cvm)

CASES = 1000

_slow_ok = settings(max_examples=CASES, deadline=None, derandomize=True,
                    suppress_health_check=[HealthCheck.too_slow,
                                           HealthCheck.data_too_large,
                                           HealthCheck.filter_too_much])


def _unit_floats():
    return st.floats(min_value=0.0, max_value=1.0, allow_nan=False,
                     allow_infinity=False, width=64)


def _corr_floats():
    return st.floats(min_value=-1.0, max_value=1.0, allow_nan=False,
                     allow_infinity=False, width=64)


@_slow_ok
@given(z=hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2,
                                                 min_side=2, max_side=6),
                    elements=_unit_floats()),
       max_iters=st.integers(min_value=1, max_value=6))
def test_solver_output_stays_in_unit_range(z, max_iters):
    u, rep = solve_cvm(z, SolverConfig(max_iters=max_iters))
    assert u.min() >= 0.0 and u.max() <= 1.0
    assert len(rep.energy_trace) == rep.iterations_used + 1
    trace = np.array(rep.energy_trace)
    assert np.all(np.diff(trace) <= 1e-12 * np.maximum(1.0, np.abs(trace[:-1])))


@_slow_ok
@given(data=st.data(),
       shape=hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8),
       eta=_unit_floats())
def test_contrast_map_stays_in_unit_range(data, shape, eta):
    s_p = data.draw(hnp.arrays(np.float64, shape, elements=_corr_floats()))
    s_q = data.draw(hnp.arrays(np.float64, shape, elements=_corr_floats()))
    c = contrast_map(s_p, s_q, eta)
    assert c.shape == shape
    assert c.min() >= 0.0 and c.max() <= 1.0


@_slow_ok
@given(seed=st.integers(min_value=0, max_value=2 ** 31),
       n_in=st.integers(min_value=1, max_value=4),
       n_out=st.integers(min_value=1, max_value=4),
       perm_seed=st.integers(min_value=0, max_value=2 ** 31))
def test_contrast_set_permutation_invariance(seed, n_in, n_out, perm_seed):
    rng = np.random.default_rng(seed)
    h, w, c = 5, 5, 3
    features = rng.normal(size=(c, h, w))
    cells = [(x, y) for y in range(h) for x in range(w)]
    picks = rng.choice(len(cells), size=n_in + n_out, replace=False)
    p = [cells[i] for i in picks[:n_in]]
    q = [cells[i] for i in picks[n_in:]]
    perm = np.random.default_rng(perm_seed)
    ann_a = Annotations(image_width=w, image_height=h, reduction_factor=1,
                        in_target=list(p), out_of_target=list(q)).validate()
    ann_b = Annotations(image_width=w, image_height=h, reduction_factor=1,
                        in_target=[p[i] for i in perm.permutation(n_in)],
                        out_of_target=[q[i] for i in perm.permutation(n_out)]).validate()
    a = build_contrast_set(features, ann_a)
    b = build_contrast_set(features, ann_b)
    assert a.points_in == b.points_in and a.points_out == b.points_out
    for ma, mb in zip(a.means, b.means):
        assert np.array_equal(ma, mb)
    for ra, rb in zip(a.maps, b.maps):
        for ca, cb in zip(ra, rb):
            assert np.array_equal(ca, cb)


@_slow_ok
@given(seed=st.integers(min_value=0, max_value=2 ** 31),
       scale=st.floats(min_value=1e-3, max_value=1e3, allow_nan=False,
                       allow_infinity=False))
def test_cosine_scale_invariance(seed, scale):
    rng = np.random.default_rng(seed)
    features = rng.normal(size=(4, 4, 5))
    f = rng.normal(size=4)
    base = cosine_similarity_map(f, features)
    scaled = cosine_similarity_map(scale * f, features)
    assert np.abs(scaled - base).max() <= 1e-12
    assert np.abs(base).max() <= 1.0
