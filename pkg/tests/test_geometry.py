import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cryf.errors import ConfigurationError
from cryf.geometry import (
    GridSpec,
    build_nilmanifold,
    canonical_index,
    frame_commutator_check,
    frame_derivative,
    frame_derivative_adjoint,
    grid_inner,
    integrate_base,
    pullback_z_shift,
    sub_laplacian_base,
    weighted_div_form,
)
from cryf import manufactured as mfg

from conftest import random_field


class TestGridSpec:
    def test_valid_cube(self):
        geom = build_nilmanifold(GridSpec(8, 8, 8))
        assert geom.spec.npoints == 512
        assert geom.w0 == pytest.approx(1.0 / 512, rel=0, abs=0)

    def test_divisibility_rejected(self):
        with pytest.raises(ConfigurationError, match="divide"):
            GridSpec(8, 8, 12)

    def test_divisible_ok(self):
        GridSpec(16, 8, 16)

    @pytest.mark.parametrize("bad", [(3, 8, 8), (8, 3, 9), (8, 8, 0), (8, -8, 8)])
    def test_too_small_rejected(self, bad):
        with pytest.raises(ConfigurationError):
            GridSpec(*bad)

    def test_non_integer_rejected(self):
        with pytest.raises(ConfigurationError):
            GridSpec(8.0, 8, 8)


class TestCanonicalIndex:
    def test_plain_wrap_k(self):
        assert canonical_index(GridSpec(8, 8, 8), 0, 0, -1) == (0, 0, 7)

    def test_twisted_wrap(self):
        # one unit x-wrap at j=3 shifts k by -3*N_z/N_y
        assert canonical_index(GridSpec(8, 8, 8), 8, 3, 5) == (0, 3, 2)

    def test_twisted_wrap_composition_oracle(self):
        # stepping +1 in i repeatedly must agree with the one-shot reduction
        spec = GridSpec(8, 8, 8)
        i, j, k = 0, 3, 5
        for _ in range(8):
            i, j, k = canonical_index(spec, i + 1, j, k)
        assert (i, j, k) == canonical_index(spec, 8, 3, 5)

    def test_identity_in_range(self):
        assert canonical_index(GridSpec(8, 8, 8), 0, 2, 4) == (0, 2, 4)

    @given(st.integers(-100, 100), st.integers(-100, 100), st.integers(-100, 100))
    @settings(max_examples=60, deadline=None)
    def test_idempotent(self, i, j, k):
        spec = GridSpec(8, 4, 8)
        once = canonical_index(spec, i, j, k)
        assert canonical_index(spec, *once) == once
        assert 0 <= once[0] < 8 and 0 <= once[1] < 4 and 0 <= once[2] < 8

    @pytest.mark.parametrize("offset", [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, 2, 3)])
    def test_shift_is_bijection(self, offset):
        spec = GridSpec(4, 4, 8)
        di, dj, dk = offset
        image = {
            canonical_index(spec, i + di, j + dj, k + dk)
            for (i, j, k) in itertools.product(range(4), range(4), range(8))
        }
        assert len(image) == spec.npoints

    def test_twist_independent_of_j_representative(self):
        # adding N_y to j must not change the reduction
        spec = GridSpec(8, 4, 8)
        assert canonical_index(spec, 9, 2, 5) == canonical_index(spec, 9, 6, 5)


class TestFrameDerivative:
    @pytest.mark.parametrize("which", ["X", "Y", "Z"])
    @pytest.mark.parametrize("scheme", ["forward", "centered"])
    def test_constant_exact_zero(self, geom448, which, scheme):
        f = np.full(geom448.shape, 2.25)
        assert np.all(frame_derivative(geom448, f, which, scheme) == 0.0)

    def test_sin_x_centered_formula(self, geom16):
        # centered difference of exact samples has a closed form
        x, _, _ = geom16.coords()
        f = np.sin(2 * np.pi * x) + np.zeros(geom16.shape)
        got = frame_derivative(geom16, f, "X", "centered")
        h = geom16.spec.hx
        expect = np.sin(2 * np.pi * h) / h * np.cos(2 * np.pi * x) + np.zeros(geom16.shape)
        assert np.abs(got - expect).max() <= 1e-12 * np.abs(expect).max()

    @pytest.mark.parametrize("which,axis", [("X", 0), ("Y", 1)])
    def test_centered_second_order(self, which, axis):
        errs = []
        for n in (16, 32):
            geom = build_nilmanifold(GridSpec(n, n, n))
            coords = geom.coords()
            c = coords[axis]
            f = np.sin(2 * np.pi * c) + np.zeros(geom.shape)
            exact = 2 * np.pi * np.cos(2 * np.pi * c) + np.zeros(geom.shape)
            errs.append(np.abs(frame_derivative(geom, f, which, "centered") - exact).max())
        assert np.log2(errs[0] / errs[1]) > 1.9

    def test_theta_field_derivatives_converge(self):
        # genuinely twisted test function with exact closed-form derivatives
        errs = {"X": [], "Y": [], "Z": []}
        for n in (16, 32):
            geom = build_nilmanifold(GridSpec(n, n, n))
            tf = mfg.theta_field(geom)
            for which, exact in (("X", tf.xf), ("Y", tf.yf), ("Z", tf.zf)):
                got = frame_derivative(geom, tf.f, which, "centered")
                errs[which].append(np.abs(got - exact).max())
        for which, (coarse, fine) in errs.items():
            assert np.log2(coarse / fine) > 1.5, which

    def test_bad_arguments(self, geom4):
        f = np.zeros(geom4.shape)
        with pytest.raises(ValueError):
            frame_derivative(geom4, f, "W")
        with pytest.raises(ValueError):
            frame_derivative(geom4, f, "X", "upwind")
        with pytest.raises(ValueError):
            frame_derivative(geom4, np.zeros((4, 4, 5)), "X")


class TestAdjointness:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_forward_adjoint_pair(self, seed):
        geom = build_nilmanifold(GridSpec(5, 4, 8))
        f = random_field(geom, seed)
        g = random_field(geom, seed + 1)
        for which in ("X", "Y", "Z"):
            lhs = grid_inner(geom, frame_derivative(geom, f, which, "forward"), g)
            rhs = grid_inner(geom, f, frame_derivative_adjoint(geom, g, which))
            scale = np.sqrt(grid_inner(geom, f, f) * grid_inner(geom, g, g))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, scale)


class TestDivForm:
    def test_unit_weight_matches_base_bitwise(self, geom448):
        f = random_field(geom448, 11)
        ones = np.ones(geom448.shape)
        assert np.array_equal(weighted_div_form(geom448, ones, f),
                              sub_laplacian_base(geom448, f))

    def test_constant_field_exact_zero(self, geom448):
        w = 0.5 + np.abs(random_field(geom448, 12))
        f = np.full(geom448.shape, -3.0)
        assert np.all(weighted_div_form(geom448, w, f) == 0.0)

    def test_nonpositive_weight_rejected(self, geom4):
        w = np.ones(geom4.shape)
        w[0, 0, 0] = 0.0
        with pytest.raises(ValueError, match="positive"):
            weighted_div_form(geom4, w, np.ones(geom4.shape))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_exact_zero_mean_symmetry_semidefiniteness(self, seed):
        geom = build_nilmanifold(GridSpec(4, 4, 8))
        rng = np.random.default_rng(seed)
        w = 0.5 + rng.random(geom.shape)
        f = rng.standard_normal(geom.shape)
        g = rng.standard_normal(geom.shape)
        lf = weighted_div_form(geom, w, f)
        lg = weighted_div_form(geom, w, g)
        scale = integrate_base(geom, np.abs(lf))
        assert abs(integrate_base(geom, lf)) <= 1e-12 * max(1.0, scale)
        sym = grid_inner(geom, g, lf) - grid_inner(geom, f, lg)
        assert abs(sym) <= 1e-12 * max(1.0, abs(grid_inner(geom, g, lf)))
        quad = grid_inner(geom, f, lf)
        assert quad <= 1e-12 * max(1.0, abs(quad))


class TestSubLaplacian:
    def test_constant_exact_zero(self, geom548):
        f = np.full(geom548.shape, 7.5)
        assert np.all(sub_laplacian_base(geom548, f) == 0.0)

    def test_sin_y_discrete_closed_form(self, geom16):
        n = geom16.spec.ny
        _, y, _ = geom16.coords()
        f = np.sin(2 * np.pi * y) + np.zeros(geom16.shape)
        got = sub_laplacian_base(geom16, f)
        expect = -4.0 * n * n * np.sin(np.pi / n) ** 2 * f
        assert np.abs(got - expect).max() <= 1e-12 * np.abs(expect).max()

    @pytest.mark.parametrize("case", mfg.UNTWISTED_CASES, ids=lambda c: c[0])
    def test_untwisted_consistency_order(self, case):
        _, factory = case
        errs = []
        for n in (16, 32):
            geom = build_nilmanifold(GridSpec(n, n, n))
            f, lap = factory(geom)
            diff = sub_laplacian_base(geom, f) - lap
            errs.append(np.sqrt(integrate_base(geom, diff * diff)))
        assert np.log2(errs[0] / errs[1]) >= 1.8

    def test_twisted_consistency_order(self):
        errs = []
        for n in (16, 32):
            geom = build_nilmanifold(GridSpec(n, n, n))
            tf = mfg.theta_field(geom)
            diff = sub_laplacian_base(geom, tf.f) - tf.lap
            errs.append(np.sqrt(integrate_base(geom, diff * diff)))
        assert np.log2(errs[0] / errs[1]) >= 0.9


class TestIntegrateBase:
    def test_unit_volume(self, geom548):
        assert integrate_base(geom548, np.ones(geom548.shape)) == pytest.approx(1.0, abs=1e-14)

    def test_sin_zero(self, geom8):
        _, y, _ = geom8.coords()
        f = np.sin(2 * np.pi * y) + np.zeros(geom8.shape)
        assert abs(integrate_base(geom8, f)) <= 1e-14

    def test_sin_squared_half(self, geom8):
        # equispaced sampling is exact for this trigonometric polynomial
        _, y, _ = geom8.coords()
        f = np.sin(2 * np.pi * y) ** 2 + np.zeros(geom8.shape)
        assert abs(integrate_base(geom8, f) - 0.5) <= 1e-14


class TestPullback:
    def test_identity_shifts(self, geom448):
        f = random_field(geom448, 21)
        assert np.array_equal(pullback_z_shift(geom448, f, 0), f)
        assert np.array_equal(pullback_z_shift(geom448, f, geom448.spec.nz), f)

    def test_integral_invariant_and_commutes(self, geom448):
        f = random_field(geom448, 22)
        shifted = pullback_z_shift(geom448, f, 3)
        assert abs(integrate_base(geom448, shifted) - integrate_base(geom448, f)) \
            <= 1e-15 * max(1.0, abs(integrate_base(geom448, f)))
        lhs = sub_laplacian_base(geom448, shifted)
        rhs = pullback_z_shift(geom448, sub_laplacian_base(geom448, f), 3)
        assert np.abs(lhs - rhs).max() <= 1e-15 * max(1.0, np.abs(rhs).max())


class TestCommutator:
    def test_constant_exact_zero(self, geom448):
        f = np.full(geom448.shape, 4.2)
        assert np.all(frame_commutator_check(geom448, f) == 0.0)

    def test_sin_x_vanishes(self, geom16):
        x, _, _ = geom16.coords()
        f = np.sin(2 * np.pi * x) + np.zeros(geom16.shape)
        assert np.abs(frame_commutator_check(geom16, f)).max() <= 1e-12

    def test_sin_y_vanishes(self, geom16):
        _, y, _ = geom16.coords()
        f = np.sin(2 * np.pi * y) + np.zeros(geom16.shape)
        assert np.abs(frame_commutator_check(geom16, f)).max() <= 1e-12

    def test_theta_field_converges_first_order(self):
        errs = []
        for n in (16, 32):
            geom = build_nilmanifold(GridSpec(n, n, n))
            tf = mfg.theta_field(geom)
            errs.append(np.abs(frame_commutator_check(geom, tf.f)).max())
        assert np.log2(errs[0] / errs[1]) >= 1.0
