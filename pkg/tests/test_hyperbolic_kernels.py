import math

import numpy as np
import pytest
from scipy.integrate import quad

from spaceform_areas import (
    QuadratureControl,
    WindowExhaustedError,
    ch1_joint_density,
    ch1_loop_area_density,
    ch1_loop_slice,
    chn_joint_density,
)

CTL = QuadratureControl()


class TestCh1JointDensity:
    def test_loop_slice_matches_quadrature(self):
        for th in (-2.5, -1.0, 0.0, 0.7, 3.0):
            q = ch1_joint_density(1.0, 0.0, th, CTL).value
            closed = float(ch1_loop_slice(1.0, th))
            assert q == pytest.approx(closed, rel=1e-8)

    def test_even_in_theta(self):
        a = ch1_joint_density(0.8, 0.6, 1.3, CTL).value
        b = ch1_joint_density(0.8, 0.6, -1.3, CTL).value
        assert a == pytest.approx(b, rel=1e-12)

    def test_positive_and_decaying_in_theta(self):
        vals = [ch1_joint_density(1.0, 0.5, th, CTL).value
                for th in (0.0, 1.0, 2.0, 4.0)]
        assert all(v > 0 for v in vals)
        assert vals[0] > vals[1] > vals[2] > vals[3]

    def test_theta_marginal_is_radial_heat_kernel_mass(self):
        # integrating the area out at fixed r recovers a probability density
        # in r (weighted by pi sinh 2r); spot-check the total mass over a
        # truncated (r, theta) box is slightly below 1
        def inner(r):
            f = lambda th: ch1_joint_density(1.0, r, th, CTL).value
            v, _ = quad(f, 0.0, 10.0, limit=100)
            return 2.0 * v * math.pi * math.sinh(2.0 * r)

        total, _ = quad(inner, 0.0, 6.0, limit=60)
        assert total == pytest.approx(1.0, abs=1e-4)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            ch1_joint_density(-1.0, 0.5, 0.0, CTL)
        with pytest.raises(ValueError):
            ch1_joint_density(1.0, -0.5, 0.0, CTL)

    def test_window_exhaustion_raises(self):
        tight = QuadratureControl(rel_tol=1e-9, abs_tol=1e-11,
                                  max_window=1.0, max_subdivisions=200)
        with pytest.raises(WindowExhaustedError):
            ch1_joint_density(1.0, 0.5, 0.3, tight)


class TestChnJointDensity:
    def test_requires_n_at_least_two(self):
        with pytest.raises(ValueError):
            chn_joint_density(1, 1.0, 0.5, 0.0, CTL)

    def test_positive_even_decaying(self):
        v0 = chn_joint_density(2, 1.0, 0.5, 0.0, CTL).value
        v1 = chn_joint_density(2, 1.0, 0.5, 1.5, CTL).value
        v1m = chn_joint_density(2, 1.0, 0.5, -1.5, CTL).value
        assert v0 > v1 > 0
        assert v1 == pytest.approx(v1m, rel=1e-10)

    def test_error_estimate_small(self):
        v = chn_joint_density(2, 1.0, 0.8, 0.5, CTL)
        assert v.est_error < 1e-6 * max(abs(v.value), 1e-30)


class TestLoopAreaDensity:
    def test_normalized(self):
        total, _ = quad(lambda th: float(ch1_loop_area_density(1.0, th, CTL)),
                        -40.0, 40.0, limit=200)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_proportional_to_loop_slice(self):
        # same shape as the r=0 kernel slice, rescaled to unit mass
        ths = np.array([-2.0, -0.5, 0.5, 1.5])
        d = np.array([float(ch1_loop_area_density(1.0, t, CTL)) for t in ths])
        s = ch1_loop_slice(1.0, ths)
        ratio = d / s
        assert np.allclose(ratio, ratio[0], rtol=1e-10)
