import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NEG_POOL, IMAG_POOL, planted
from ergolib.errors import DimensionMismatchError, InputError, TrajectoryOverflowWarning
from ergolib.evolution import (
    Regime,
    Trajectory,
    classify_boundedness,
    empirical_boundedness,
    exp_action,
    exp_series_oracle,
    geometric_grid,
    regime_of,
)
from ergolib.spectral_core import spectral_decompose

JORDAN = np.array([[0, 1], [0, 0]], dtype=complex)


class TestExpAction:
    def test_imaginary_unit_half_turn(self):
        y = exp_action(spectral_decompose([[1j]]), [1.0], math.pi)
        assert abs(y[0] + 1) < 1e-15

    def test_zero_generator(self):
        f = np.array([1 + 2j, -3, 0.5j])
        d = spectral_decompose(np.zeros((3, 3)))
        for t in (0.0, 1.0, 1e6):
            assert np.array_equal(exp_action(d, f, t), f)

    def test_random_against_oracle(self, rng):
        for _ in range(10):
            A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            f = rng.standard_normal(5) + 0j
            d = spectral_decompose(A)
            for t in (0.1, 1.0, 5.0):
                ref = exp_series_oracle(A, t) @ f
                assert np.linalg.norm(exp_action(d, f, t) - ref) <= 1e-8 * np.linalg.norm(ref)

    def test_time_zero_is_identity(self, rng):
        fx = planted(rng, [(-1 + 0j, 3, "full"), (1j, 1, "full")])
        d = spectral_decompose(fx.A)
        np.testing.assert_allclose(exp_action(d, fx.f, 0.0), fx.f, atol=1e-13)

    def test_negative_time_rejected(self):
        with pytest.raises(InputError):
            exp_action(spectral_decompose([[1.0]]), [1.0], -1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            exp_action(spectral_decompose(np.eye(2)), [1.0, 2.0, 3.0], 1.0)

    def test_overflow_flagged(self):
        d = spectral_decompose([[1.0]])
        with pytest.warns(TrajectoryOverflowWarning):
            y = exp_action(d, [1.0], 1000.0)
        assert np.isinf(y[0].real) and not np.isnan(y[0])

    def test_equilibrium(self):
        d = spectral_decompose(JORDAN)
        for t in (0.5, 10.0, 1e5):
            assert np.array_equal(exp_action(d, [1.0, 0.0], t), [1.0, 0.0])

    def test_eigenvector_solution(self, rng):
        fx = planted(rng, [(-0.5 + 1j, 1, "full"), (2j, 2, "full")])
        v = fx.S[:, 0]
        d = spectral_decompose(fx.A)
        for t in (0.3, 4.0):
            np.testing.assert_allclose(exp_action(d, v, t), np.exp((-0.5 + 1j) * t) * v, atol=1e-12)


class TestOracle:
    def test_zero(self):
        assert np.array_equal(exp_series_oracle(np.zeros((2, 2))), np.eye(2))

    def test_nilpotent(self):
        np.testing.assert_allclose(exp_series_oracle(JORDAN, 1.0), [[1, 1], [0, 1]], atol=1e-15)

    def test_scalar_quarter_turn(self):
        np.testing.assert_allclose(exp_series_oracle([[1j]], math.pi / 2), [[1j]], atol=1e-15)

    def test_large_norm_scaling(self):
        np.testing.assert_allclose(exp_series_oracle([[-30.0]], 1.0), [[math.exp(-30)]], rtol=1e-12)


class TestClassify:
    def test_imaginary_unit_bounded(self):
        assert classify_boundedness(spectral_decompose([[1j]]), [1.0]).bounded

    def test_jordan_unbounded_witness(self):
        c = classify_boundedness(spectral_decompose(JORDAN), [0.0, 1.0])
        assert c.verdict == "Unbounded" and c.bounded_form is None
        (w,) = c.witnesses
        assert w.lam == 0 and w.regime is Regime.ZERO_RE and w.violated
        assert w.violating_term[0] == 1 and abs(w.violating_term[1] - 1.0) < 1e-14

    def test_jordan_equilibrium_bounded(self):
        d = spectral_decompose(JORDAN)
        c = classify_boundedness(d, [1.0, 0.0])
        assert c.bounded
        for t in (0.0, 3.0, 1e4):
            np.testing.assert_allclose(c.evaluate_bounded_form(t), [1.0, 0.0])

    def test_positive_component_violates(self):
        c = classify_boundedness(spectral_decompose(np.diag([0.5, -1.0])), [1.0, 1.0])
        w = next(w for w in c.witnesses if w.lam == 0.5)
        assert w.regime is Regime.POS_RE and w.violating_term[0] == 0

    def test_positive_eigenvalue_without_component(self):
        assert classify_boundedness(spectral_decompose(np.diag([0.5, -1.0])), [0.0, 1.0]).bounded

    def test_bounded_form_reconstructs(self, rng):
        fx = planted(rng, [(-1 + 0j, 3, "full"), (1j, 2, "eig"), (0j, 1, "full")])
        d = spectral_decompose(fx.A)
        c = classify_boundedness(d, fx.f)
        assert c.bounded
        for t in (0.0, 0.7, 5.0, 40.0):
            np.testing.assert_allclose(c.evaluate_bounded_form(t), exp_action(d, fx.f, t), atol=1e-9)

    def test_regime_band(self):
        assert regime_of(1e-12 + 1j, 1e-9) is Regime.ZERO_RE
        assert regime_of(-1e-6, 1e-9) is Regime.NEG_RE
        assert regime_of(2e-9, 1e-9) is Regime.POS_RE

    def test_margin_reported(self):
        c = classify_boundedness(spectral_decompose(np.diag([-0.25, 2j])), [1.0, 1.0])
        margins = sorted(w.margin for w in c.witnesses)
        assert margins[0] < 0 < margins[1]


class TestEmpirical:
    def test_imaginary_unit(self):
        e = empirical_boundedness(spectral_decompose([[1j]]), [1.0], 1e3)
        assert abs(e.sup_norm - 1) < 1e-14 and not e.growing

    def test_jordan_growth(self):
        e = empirical_boundedness(spectral_decompose(JORDAN), [0.0, 1.0], 1e3)
        assert e.growing and abs(e.sup_norm - math.sqrt(1 + 1e6)) < 1e-9

    def test_decay(self):
        e = empirical_boundedness(spectral_decompose([[-1.0]]), [1.0], 1e3)
        assert e.sup_norm == 1.0 and not e.growing

    def test_overflow_is_growing(self):
        e = empirical_boundedness(spectral_decompose([[2.0]]), [1.0], 1e4)
        assert e.overflow and e.growing and math.isinf(e.sup_norm)

    def test_grid_density(self):
        g = geometric_grid(1.0, 1e4, 32)
        assert len(g) == 129 and g[0] == 1.0 and abs(g[-1] - 1e4) < 1e-9


class TestKernels:
    def test_backends_agree(self, rng):
        from ergolib import _kernels

        if "compiled" not in _kernels.available_backends():
            pytest.skip("compiled kernels not built")
        fx = planted(rng, [(-1 + 1j, 3, "full"), (1j, 1, "full"), (0j, 2, "eig"), (0.001, 1, "full")])
        traj = Trajectory(spectral_decompose(fx.A), fx.f)
        times = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 200)])
        for fn in (_kernels.trajectory_grid, _kernels.cesaro_grid):
            t = times if fn is _kernels.trajectory_grid else times[1:]
            Yc, oc = fn(traj.lams, traj.orbits, traj.orders, t)
            Yp, op = fn(traj.lams, traj.orbits, traj.orders, t, backend="python")
            assert np.array_equal(oc, op)
            finite = np.isfinite(Yp)
            np.testing.assert_allclose(Yc[finite], Yp[finite], rtol=1e-12, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.sampled_from(NEG_POOL + IMAG_POOL), min_size=1, max_size=3, unique=True),
    st.lists(st.integers(1, 3), min_size=3, max_size=3),
    st.floats(0.0, 5.0),
    st.floats(0.0, 5.0),
    st.integers(0, 2**32 - 1),
)
def test_semigroup_property(lams, sizes, t, s, seed):
    rng = np.random.default_rng(seed)
    fx = planted(rng, [(complex(lam), size if complex(lam).real < 0 else 1, "full") for lam, size in zip(lams, sizes)])
    d = spectral_decompose(fx.A)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        direct = exp_action(d, fx.f, t + s)
        twice = exp_action(d, exp_action(d, fx.f, s), t)
    assert np.linalg.norm(direct - twice) <= 1e-8 * max(1.0, np.linalg.norm(direct))
