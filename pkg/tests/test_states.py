"""State representations, basis operations, energy-bound diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from stellar_zeros import (
    CutoffTooSmall,
    FockVector,
    InvalidParameter,
    StellarState,
    Verdict,
    ZeroVector,
    annihilation_matrix,
    energy_moment,
    normalize,
    phase_shift,
    random_stellar_state,
    squeezed_vacuum_fock,
    state_from_json,
    state_to_json,
    stellar_to_fock,
    stellar_to_fock_exponential,
)


def vec(*amps):
    return FockVector(np.array(amps, dtype=complex))


class TestNormalize:
    def test_already_normalized(self):
        v = normalize(vec(1, 0, 0))
        assert np.allclose(v.coeffs, [1, 0, 0])

    def test_scaling(self):
        v = normalize(vec(2, 0))
        assert np.allclose(v.coeffs, [1, 0])

    def test_symmetry(self):
        v = normalize(vec(1, 1))
        assert np.allclose(v.coeffs, [1 / math.sqrt(2)] * 2)
        assert abs(v.norm() - 1.0) < 1e-12

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            normalize(vec(0, 0, 0))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidParameter):
            vec(1, float("nan"))


class TestPhaseShift:
    def test_identity(self):
        v = normalize(vec(1, 1, 1))
        assert np.allclose(phase_shift(v, 0.0).coeffs, v.coeffs)

    def test_quarter_turn_single_photon(self):
        v = phase_shift(vec(0, 1), math.pi / 2)
        assert abs(v.coeffs[1] - (-1j)) < 1e-15

    def test_full_turn(self):
        v = normalize(vec(1, 2, 3, 4))
        w = phase_shift(v, 2 * math.pi)
        assert np.max(np.abs(w.coeffs - v.coeffs)) < 1e-14

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(-12, 12, allow_nan=False),
        st.floats(-12, 12, allow_nan=False),
    )
    def test_unitary_and_composed(self, t1, t2):
        v = normalize(vec(0.3, -0.5 + 0.1j, 0.7, 0.2j, -0.1))
        w = phase_shift(v, t1)
        assert abs(w.norm() - v.norm()) < 1e-14
        once = phase_shift(w, t2).coeffs
        both = phase_shift(v, t1 + t2).coeffs
        assert np.max(np.abs(once - both)) < 1e-13


class TestEnergyMoment:
    def test_vacuum(self):
        rep = energy_moment(vec(1, 0, 0, 0), 2.0)
        assert rep.partial_sum == 1.0
        assert rep.verdict is Verdict.CONVERGED
        assert rep.tail_estimate == 0.0

    def test_single_photon(self):
        rep = energy_moment(vec(0, 1, 0, 0, 0), 3.0)
        assert abs(rep.partial_sum - 3.0) < 1e-15
        assert rep.verdict is Verdict.CONVERGED

    def test_requires_s_above_one(self):
        with pytest.raises(InvalidParameter):
            energy_moment(vec(1, 0), 1.0)

    def test_squeezed_vacuum_thresholds(self):
        # tanh r = 0.5 puts the convergence edge at s = 2.
        r = math.atanh(0.5)
        v = squeezed_vacuum_fock(r, 2000)
        assert energy_moment(v, 1.8).verdict is Verdict.CONVERGED
        assert energy_moment(v, 2.2).verdict is Verdict.DIVERGED

        # Independent brute-force check: growth of consecutive partial sums.
        mags2 = np.abs(v.coeffs) ** 2
        ns = np.arange(mags2.size)
        for s, should_grow in ((1.8, False), (2.2, True)):
            with np.errstate(divide="ignore", over="ignore"):
                terms = np.exp(ns * math.log(s) + np.log(np.where(mags2 > 0, mags2, 1e-320)))
            terms[mags2 == 0] = 0.0
            s1000 = terms[:1001].sum()
            s2000 = terms.sum()
            grew = (s2000 - s1000) > 1e-3 * s1000
            assert grew == should_grow

    def test_monotone_in_s(self):
        v = squeezed_vacuum_fock(0.4, 300)
        sums = [energy_moment(v, s).partial_sum for s in (1.1, 1.4, 1.9, 2.6)]
        assert all(a <= b for a, b in zip(sums, sums[1:]))

    @pytest.mark.parametrize("rank", range(5))
    def test_finite_rank_states_satisfy_a_bound(self, rank):
        st_ = random_stellar_state(rank, 3 + rank, scale=1.0)
        chi_mag = abs(st_.chi)
        s = 2.0 if chi_mag < 1e-12 else 1.0 + 0.1 * (1.0 / math.tanh(chi_mag) - 1.0)
        v = stellar_to_fock(st_, 400)
        assert energy_moment(v, s).verdict is Verdict.CONVERGED

    @pytest.mark.parametrize("rank", range(5))
    def test_photon_addition_keeps_bound(self, rank):
        st_ = random_stellar_state(rank, 3 + rank, scale=1.0)
        chi_mag = abs(st_.chi)
        s = 2.0 if chi_mag < 1e-12 else 1.0 + 0.1 * (1.0 / math.tanh(chi_mag) - 1.0)
        v = stellar_to_fock(st_, 400)
        added = np.zeros(v.coeffs.size + 1, dtype=complex)
        added[1:] = v.coeffs * np.sqrt(np.arange(1, v.coeffs.size + 1))
        w = normalize(FockVector(added))
        assert energy_moment(w, (1.0 + s) / 2.0).verdict is Verdict.CONVERGED


class TestSqueezedVacuum:
    def test_zero_squeezing_is_vacuum(self):
        v = squeezed_vacuum_fock(0.0, 10)
        assert v.coeffs[0] == 1.0
        assert np.all(v.coeffs[1:] == 0)

    def test_odd_amplitudes_vanish(self):
        v = squeezed_vacuum_fock(0.7 + 0.3j, 41)
        assert np.all(np.abs(v.coeffs[1::2]) == 0)

    @pytest.mark.parametrize("r", (0.3, 0.8))
    def test_second_amplitude_ratio(self, r):
        v = squeezed_vacuum_fock(r, 20)
        ratio = v.coeffs[2] / v.coeffs[0]
        assert abs(ratio - (-math.tanh(r) / math.sqrt(2))) < 1e-14

    def test_against_dense_matrix_exponential(self):
        chi = 0.55 * np.exp(0.8j)
        dim = 61
        a = annihilation_matrix(dim)
        ad = a.conj().T
        s_op = expm(0.5 * (np.conj(chi) * (a @ a) - chi * (ad @ ad)))
        want = s_op[:, 0]
        got = squeezed_vacuum_fock(chi, 60).coeffs
        # the dense exponential of the truncated generator is only reliable
        # away from the truncation edge
        assert np.max(np.abs(got - want)[:50]) < 1e-12

    def test_cutoff_validation(self):
        with pytest.raises(InvalidParameter):
            squeezed_vacuum_fock(0.3, 1)


def laguerre_displacement_element(m, n, alpha):
    """<m|D(alpha)|n> from the two-index Laguerre closed form (test oracle)."""
    acc = 0.0 + 0.0j
    for j in range(min(m, n) + 1):
        acc += (
            (-1.0) ** j
            * math.factorial(m)
            * math.factorial(n)
            / (
                math.factorial(j)
                * math.factorial(m - j)
                * math.factorial(n - j)
            )
            * alpha ** (m - j)
            * np.conj(alpha) ** (n - j)
        )
    return (
        (-1.0) ** n
        * math.exp(-0.5 * abs(alpha) ** 2)
        / math.sqrt(math.factorial(m) * math.factorial(n))
        * acc
    )


class TestStellarToFock:
    def test_vacuum(self):
        st_ = StellarState(rank=0, core=np.array([1.0 + 0j]), alpha=0.0, chi=0.0)
        v = stellar_to_fock(st_, 8)
        assert abs(v.coeffs[0] - 1.0) < 1e-14
        assert np.max(np.abs(v.coeffs[1:])) < 1e-14

    def test_fock_one(self):
        st_ = StellarState(rank=1, core=np.array([0, 1.0 + 0j]), alpha=0.0, chi=0.0)
        v = stellar_to_fock(st_, 8)
        assert abs(v.coeffs[1] - 1.0) < 1e-14

    def test_displaced_photon_matches_laguerre_formula(self):
        alpha = 1.0
        st_ = StellarState(rank=1, core=np.array([0, 1.0 + 0j]), alpha=alpha, chi=0.0)
        v = stellar_to_fock(st_, 60)
        want = np.array([laguerre_displacement_element(m, 1, alpha) for m in range(61)])
        assert np.max(np.abs(v.coeffs - want)) < 1e-12

    def test_complex_displacement_matches_laguerre_formula(self):
        alpha = 0.6 - 0.8j
        st_ = StellarState(rank=2, core=np.array([0, 0, 1.0 + 0j]), alpha=alpha, chi=0.0)
        v = stellar_to_fock(st_, 60)
        want = np.array([laguerre_displacement_element(m, 2, alpha) for m in range(61)])
        assert np.max(np.abs(v.coeffs - want)) < 1e-12

    def test_cutoff_too_small(self):
        st_ = StellarState(rank=0, core=np.array([1.0 + 0j]), alpha=3.0, chi=0.0)
        with pytest.raises(CutoffTooSmall):
            stellar_to_fock(st_, 10)

    def test_norm_postcondition(self):
        st_ = random_stellar_state(3, 7)
        v = stellar_to_fock(st_)
        assert 0.0 < v.norm() ** 2 <= 1.0 + 1e-9

    def test_exponential_route_agrees(self):
        st_ = random_stellar_state(2, 4, scale=0.8)
        a = stellar_to_fock(st_, 120).coeffs
        b = stellar_to_fock_exponential(st_, 120).coeffs
        assert np.max(np.abs(a - b)) < 1e-11


class TestRandomStellarState:
    def test_deterministic(self):
        a = random_stellar_state(3, 42)
        b = random_stellar_state(3, 42)
        assert np.array_equal(a.core, b.core)
        assert a.alpha == b.alpha and a.chi == b.chi

    def test_rank_zero(self):
        st_ = random_stellar_state(0, 7)
        assert st_.rank == 0
        assert abs(np.linalg.norm(st_.core) - 1.0) < 1e-12

    def test_top_coefficient_alive(self):
        st_ = random_stellar_state(3, 1)
        assert abs(st_.core[-1]) > 1e-6

    def test_scale_bounds(self):
        st_ = random_stellar_state(2, 9, scale=0.5)
        assert abs(st_.alpha) <= 0.5 and abs(st_.chi) <= 0.5


class TestStateJson:
    def test_roundtrip(self):
        st_ = random_stellar_state(3, 11)
        back = state_from_json(state_to_json(st_))
        assert np.max(np.abs(back.core - st_.core)) < 1e-15
        assert back.alpha == st_.alpha and back.chi == st_.chi

    def test_rejects_unnormalized(self):
        data = {"rank": 0, "core": [[2.0, 0.0]], "alpha": [0, 0], "chi": [0, 0]}
        with pytest.raises(InvalidParameter):
            state_from_json(data)
