import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinchlab.curvature import constant_curvature, fubini_study, normalized_scalar, random_algebraic, sectional
from pinchlab.errors import DimensionMismatch, FrameNotUnitary, MissingAmbientScalar
from pinchlab.frames import random_frame
from pinchlab.isotropic import cone_minimum
from pinchlab.submanifold import (
    AmbientRestriction,
    SecondFundamentalForm,
    check_unitary,
    complex_gauss_check,
    double_trace_residual,
    gauss_induced,
    isotropic_unitary_frame,
    pinching_complex_frame,
    restrict_ambient,
    second_fundamental_term,
)


def random_sff(rng, n, codim, scale=1.0):
    A = rng.standard_normal((codim, n, n)) * scale
    return SecondFundamentalForm((A + np.swapaxes(A, 1, 2)) / 2)


def random_unitary(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(Z)
    return Q


class TestSecondFundamentalForm:
    def test_umbilic_quantities(self):
        B = SecondFundamentalForm.umbilic(5, 2.0, codim=2)
        assert np.allclose(B.mean_curvature, [0.5, 0])
        assert B.norm_sq == pytest.approx(5 / 4) and B.traceless_norm_sq == pytest.approx(0, abs=1e-15)

    def test_single_slice(self):
        assert SecondFundamentalForm(np.eye(3)).codim == 1

    def test_asymmetric(self):
        with pytest.raises(ValueError):
            SecondFundamentalForm(np.array([[[0, 1], [0, 0]]]))

    def test_shape(self):
        with pytest.raises(DimensionMismatch):
            SecondFundamentalForm(np.zeros((2, 3, 4)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.integers(4, 7), st.integers(1, 3))
    def test_norm_split(self, seed, n, codim):
        # |B|^2 = |B0|^2 + n|H|^2, so |B|^2 - n|H|^2 >= 0
        B = random_sff(np.random.default_rng(seed), n, codim)
        assert abs(B.norm_sq - B.traceless_norm_sq - n * B.mean_curvature_sq) < 1e-10 * max(1, B.norm_sq)
        assert B.norm_sq - n * B.mean_curvature_sq >= -1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31), st.integers(4, 6))
    def test_term_additive_over_slices(self, seed, n):
        rng = np.random.default_rng(seed)
        B1, B2 = random_sff(rng, n, 1), random_sff(rng, n, 2)
        both = SecondFundamentalForm(np.concatenate([B1.slices, B2.slices]))
        total = second_fundamental_term(B1) + second_fundamental_term(B2)
        assert second_fundamental_term(both).allclose(total, atol=1e-12)


class TestGauss:
    @pytest.mark.parametrize("n", [4, 6])
    @pytest.mark.parametrize("r", [1.0, 2.0])
    def test_umbilic_sphere(self, n, r):
        R = gauss_induced(constant_curvature(n, 0), SecondFundamentalForm.umbilic(n, r))
        assert R.allclose(constant_curvature(n, 1 / r**2), atol=1e-12)
        assert cone_minimum(R, "PIC2").min_value == pytest.approx(1 / r**2, abs=1e-8)

    def test_zero_form(self, rng):
        RT = random_algebraic(5, 2)
        assert gauss_induced(RT, SecondFundamentalForm.zero(5, 3)).allclose(RT, atol=0)

    def test_hand_computed(self):
        # diagonal h = diag(k1..kn): K(e_i, e_j) = k_i k_j
        k = np.array([1.0, 2.0, -1.0, 0.5])
        R = gauss_induced(constant_curvature(4, 0), SecondFundamentalForm(np.diag(k)))
        e = np.eye(4)
        for i in range(4):
            for j in range(i + 1, 4):
                assert sectional(R, e[i], e[j]) == pytest.approx(k[i] * k[j], abs=1e-14)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gauss_induced(constant_curvature(4, 1), SecondFundamentalForm.zero(5))

    def test_codim_exceeds(self):
        amb = restrict_ambient(constant_curvature(5, 1), 4, compute_bounds=False)
        with pytest.raises(DimensionMismatch):
            gauss_induced(amb, SecondFundamentalForm.zero(4, 2))

    @pytest.mark.parametrize("seed", range(50))
    def test_double_trace(self, seed):
        rng = np.random.default_rng(seed)
        n = 4 + seed % 3
        amb = restrict_ambient(random_algebraic(n + 2, seed), n, compute_bounds=False)
        assert double_trace_residual(amb, random_sff(rng, n, 2)) < 1e-9

    def test_double_trace_umbilic(self):
        n = 5
        B = SecondFundamentalForm.umbilic(n, 1.0)
        R = gauss_induced(constant_curvature(n, 0), B)
        assert normalized_scalar(R) == pytest.approx(1.0, abs=1e-12)


class TestComplexGauss:
    @pytest.mark.parametrize("seed", range(40))
    def test_random_inputs(self, seed):
        rng = np.random.default_rng(1000 + seed)
        n = 4 + seed % 3
        amb = restrict_ambient(random_algebraic(n + 2, seed), n, compute_bounds=False)
        B = random_sff(rng, n, 2)
        assert complex_gauss_check(amb, B, random_unitary(rng, n)) < 1e-10

    @pytest.mark.parametrize("n", [4, 5])
    def test_isotropic_frame(self, n, rng):
        F = isotropic_unitary_frame(n)
        check_unitary(F)
        assert complex_gauss_check(random_algebraic(n, 4), random_sff(rng, n, 1), F) < 1e-10

    def test_pinching_frame(self, rng):
        E = random_frame(5, 5, rng)
        F = pinching_complex_frame(E, 0.3, 0.8)
        check_unitary(F)
        assert complex_gauss_check(random_algebraic(5, 1), random_sff(rng, 5, 2), F) < 1e-10

    def test_not_unitary(self):
        with pytest.raises(FrameNotUnitary):
            check_unitary(np.ones((4, 4)))

    def test_wrong_shape(self, rng):
        with pytest.raises(DimensionMismatch):
            complex_gauss_check(random_algebraic(4, 1), random_sff(rng, 4, 1), np.eye(3))


class TestAmbient:
    def test_fubini_study_restriction(self):
        # span(e1, e2, e3, e4) in CP^3 holds the complex line span(e1, Je1 = e4)
        amb = restrict_ambient(fubini_study(3), 4)
        e = np.eye(4)
        assert amb.tangential.components[0, 1, 0, 1] == pytest.approx(1.0, abs=1e-14)
        assert sectional(amb.tangential, e[0], e[3]) == pytest.approx(4.0, abs=1e-14)
        assert amb.k_min == pytest.approx(1, abs=1e-8) and amb.k_max == pytest.approx(4, abs=1e-8)
        assert amb.r0 == pytest.approx(8 / 5)  # 2(m + 1) / (2m - 1)

    def test_scalar_mismatch_warns(self):
        with pytest.warns(UserWarning, match="k_max"):
            amb = restrict_ambient(constant_curvature(5, 1), 4, scalars={"k_max": 2.0})
        assert amb.k_max == pytest.approx(1, abs=1e-8)

    def test_scalar_agreement_is_quiet(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            restrict_ambient(constant_curvature(5, 1), 4, scalars={"k_max": 1.0})

    def test_unknown_scalar(self):
        with pytest.raises(ValueError):
            restrict_ambient(constant_curvature(5, 1), 4, scalars={"bogus": 1.0})

    def test_missing_scalar(self):
        amb = AmbientRestriction.from_scalars(constant_curvature(4, 1), 6, k_max=1.0)
        assert amb.require("k_max") == 1.0
        with pytest.raises(MissingAmbientScalar):
            amb.require("r0")

    def test_ambient_too_small(self):
        with pytest.raises(DimensionMismatch):
            AmbientRestriction.from_scalars(constant_curvature(5, 1), 4)

    def test_rotated_tangent_frame(self, rng):
        T = random_frame(6, 4, rng).vectors
        amb = restrict_ambient(constant_curvature(6, 2), T, compute_bounds=False)
        assert amb.tangential.allclose(constant_curvature(4, 2), atol=1e-12)
