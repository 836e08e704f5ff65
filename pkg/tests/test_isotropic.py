import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from pinchlab.curvature import complex_structure, constant_curvature, evaluate, fubini_study, k_extremes, random_algebraic, sectional
from pinchlab.errors import DegeneratePlane, DimensionMismatch, FrameNotOrthonormal, InvalidDimension
from pinchlab.frames import SearchConfig, random_frame
from pinchlab.isotropic import (
    ConeKind,
    _interval_min,
    complex_frame_vectors,
    complex_sectional,
    cone_brute_force,
    cone_minimum,
    i_lambda_mu,
    isotropic_value,
    verdict_for,
)

from conftest import unit_tensor

# Frozen from tools/derive_oracles.py (scipy L-BFGS-B over QR-parametrized
# frames, 150-300 starts, no shared code with the search under test).
ORACLE_CONE = {
    (4, 3, "PIC"): -0.044661175163282135,
    (4, 3, "PIC1"): -0.19552396918707957,
    (4, 3, "PIC2"): -0.24141799955019802,
    (5, 2, "PIC"): -0.0930831984776877,
    (5, 2, "PIC1"): -0.13999535545814754,
    (5, 2, "PIC2"): -0.19599927406282056,
}
ORACLE_SECTIONAL = {
    (4, 3): (-2.606832249714836, 3.7433831439172276),
    (5, 2): (-2.7506320035082585, 3.5622145284470763),
    (6, 1): (-4.586550126381729, 3.769148775326264),
}


def cp_zero_frame(m):
    # e1, Je1, e2, Je2 (0-based indices 0, m, 1, m + 1)
    e = np.eye(2 * m)
    return e[[0, m, 1, m + 1]]


class TestValues:
    def test_constant_curvature(self, rng):
        F = random_frame(5, 4, rng)
        assert isotropic_value(constant_curvature(5, 1.5), F) == pytest.approx(6.0, abs=1e-12)

    @pytest.mark.parametrize("m", [2, 3])
    def test_fubini_study_zero_frame(self, m):
        assert abs(isotropic_value(fubini_study(m), cp_zero_frame(m))) < 1e-14

    def test_sign_flip(self, rng):
        # flipping e4 changes the value by 4 R(e1, e2, e3, e4)
        R = random_algebraic(4, 5)
        F = random_frame(4, 4, rng).vectors
        G = F.copy()
        G[3] *= -1
        r1234 = evaluate(R, *F)
        assert abs(isotropic_value(R, G) - (isotropic_value(R, F) + 4 * r1234)) < 1e-12

    def test_rejects_bad_frame(self):
        with pytest.raises(FrameNotOrthonormal):
            isotropic_value(constant_curvature(4, 1), np.ones((4, 4)))
        with pytest.raises(FrameNotOrthonormal):
            isotropic_value(constant_curvature(5, 1), np.eye(5)[:3])

    def test_frame_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            isotropic_value(constant_curvature(5, 1), np.eye(4))

    def test_weights_constant_curvature(self, rng):
        F = random_frame(6, 4, rng)
        for lam, mu in rng.uniform(-1, 1, (20, 2)):
            assert i_lambda_mu(constant_curvature(6, 2.0), F, lam, mu) == pytest.approx(2.0, abs=1e-12)

    def test_weight_range(self):
        with pytest.raises(ValueError):
            i_lambda_mu(constant_curvature(4, 1), np.eye(4), 1.5, 0)

    def test_mu_zero_reduces(self, rng):
        R = random_algebraic(4, 8)
        F = random_frame(4, 4, rng).vectors
        lam = 0.7
        K = lambda a, b: sectional(R, F[a], F[b])
        assert i_lambda_mu(R, F, lam, 0.0) == pytest.approx((K(0, 2) + lam**2 * K(0, 3)) / (1 + lam**2), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0, 1), st.floats(0, 1))
    def test_weight_sign_flip(self, seed, lam, mu):
        r = np.random.default_rng(seed)
        R = random_algebraic(5, seed % 101)
        F = random_frame(5, 4, r).vectors
        G = F.copy()
        G[3] *= -1
        assert abs(i_lambda_mu(R, F, -lam, mu) - i_lambda_mu(R, G, lam, mu)) < 1e-12


class TestComplex:
    def test_real_plane(self, rng):
        R = random_algebraic(5, 1)
        z, w = random_frame(5, 2, rng).vectors
        assert complex_sectional(R, z, w) == pytest.approx(sectional(R, z, w), abs=1e-12)

    def test_isotropic_plane_constant(self):
        e = np.eye(4)
        assert complex_sectional(constant_curvature(4, 1), e[0] + 1j * e[1], e[2] + 1j * e[3]) == pytest.approx(1)

    def test_fubini_study_isotropic_zero(self):
        J = complex_structure(2)
        e = np.eye(4)
        v = complex_sectional(fubini_study(2), e[0] + 1j * J @ e[0], e[1] + 1j * J @ e[1])
        assert abs(v) < 1e-14

    def test_degenerate(self):
        z = np.array([1, 1j, 0, 0])
        with pytest.raises(DegeneratePlane):
            complex_sectional(constant_curvature(4, 1), z, 2j * z)

    @pytest.mark.parametrize("seed", range(20))
    def test_bridges(self, seed):
        r = np.random.default_rng(seed)
        R = unit_tensor(random_algebraic(6, seed))
        F = random_frame(6, 4, r).vectors
        iso = isotropic_value(R, F)
        assert abs(i_lambda_mu(R, F, 1, 1) - iso / 4) < 1e-12
        assert abs(4 * complex_sectional(R, F[0] + 1j * F[1], F[2] + 1j * F[3]) - iso) < 1e-10
        lam, mu = r.uniform(0, 1, 2)
        z, w = complex_frame_vectors(F, lam, mu)
        assert abs(complex_sectional(R, z, w) - i_lambda_mu(R, F, lam, mu)) < 1e-12


class TestIntervalMin:
    @settings(max_examples=200, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-1, 0.9))
    @example(-1.0, 0.0, 0.0, -1.0)  # C = 0: interior minimum at t = 0
    @example(-1.0, 0.0, 1e-200, -1.0)
    def test_matches_dense_grid(self, A, B, C, lo):
        hi = 1.0
        t = float(_interval_min(A, B, C, lo, hi))
        f = lambda s: (A + B * s * s - 2 * C * s) / (1 + s * s)
        grid = np.linspace(lo, hi, 20001)
        assert lo - 1e-15 <= t <= hi + 1e-15
        assert f(t) <= f(grid).min() + 1e-12


class TestCone:
    @pytest.mark.parametrize("kind", list(ConeKind))
    def test_constant_curvature(self, kind):
        c = cone_minimum(constant_curvature(5, 1), kind)
        assert c.min_value == pytest.approx(1, abs=1e-8) and c.verdict == "positive"

    def test_fubini_study_zero(self):
        c = cone_minimum(fubini_study(2), "pic")
        assert abs(c.min_value) < 1e-6 and c.verdict == "nonnegative_with_zero"
        assert c.unnormalized == pytest.approx(4 * c.min_value)

    def test_flat(self):
        c = cone_minimum(constant_curvature(4, 0), ConeKind.PIC)
        assert c.min_value == 0 and c.verdict == "nonnegative_with_zero"

    def test_dimension(self):
        with pytest.raises(InvalidDimension):
            cone_minimum(constant_curvature(3, 1), "PIC")

    def test_parse(self):
        assert ConeKind.parse("pic2") is ConeKind.PIC2
        with pytest.raises(ValueError):
            ConeKind.parse("pic3")

    def test_verdicts(self):
        assert verdict_for(1e-6) == "positive"
        assert verdict_for(-1e-6) == "negative"
        assert verdict_for(5e-8) == "nonnegative_with_zero"

    @pytest.mark.parametrize("key", sorted(ORACLE_CONE))
    def test_matches_independent_oracle(self, key):
        dim, seed, kind = key
        R = unit_tensor(random_algebraic(dim, seed))
        c = cone_minimum(R, kind)
        assert abs(c.min_value - ORACLE_CONE[key]) < 1e-8

    @pytest.mark.parametrize("key", sorted(ORACLE_SECTIONAL))
    def test_sectional_matches_oracle(self, key):
        e = k_extremes(random_algebraic(*key))
        lo, hi = ORACLE_SECTIONAL[key]
        assert abs(e.k_min - lo) < 1e-8 and abs(e.k_max - hi) < 1e-8

    @pytest.mark.parametrize("seed", range(3))
    def test_witness_reproduces(self, seed):
        R = unit_tensor(random_algebraic(5, seed))
        for kind in ConeKind:
            c = cone_minimum(R, kind)
            assert 0 <= c.lam <= 1 and 0 <= c.mu <= 1
            assert abs(i_lambda_mu(R, c.frame, c.lam, c.mu) - c.min_value) < 1e-10

    @pytest.mark.parametrize("seed", range(3))
    def test_nesting_and_extended_domain(self, seed):
        R = unit_tensor(constant_curvature(5, 0.3) + random_algebraic(5, seed) * 0.2)
        v = {k: cone_minimum(R, k).min_value for k in ConeKind}
        assert v[ConeKind.PIC2] <= v[ConeKind.PIC1] + 1e-9 <= v[ConeKind.PIC] + 2e-9
        for k in (ConeKind.PIC1, ConeKind.PIC2):
            assert abs(cone_minimum(R, k, extended=True).min_value - v[k]) < 1e-6

    def test_rotation_invariance(self, rng):
        R = unit_tensor(random_algebraic(5, 12))
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        for k in ConeKind:
            assert abs(cone_minimum(R, k).min_value - cone_minimum(R.conjugated(Q), k).min_value) < 1e-7

    def test_brute_force_dominated(self):
        R = unit_tensor(random_algebraic(4, 3))
        for k in ConeKind:
            c = cone_minimum(R, k)
            assert c.min_value <= cone_brute_force(R, k, 20_000) + 1e-7

    def test_certificate_dict(self):
        d = cone_minimum(fubini_study(2), "PIC2", SearchConfig(restarts=4, samples=256)).to_dict()
        assert d["kind"] == "PIC2" and len(d["frame"]) == 4 and "unnormalized_value" in d
