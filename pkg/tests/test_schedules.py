"""Schedule construction, closed-form integrals, moments, and serialization."""
import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from geomgate.errors import InvalidParameterError
from geomgate.schedules import (
    PulseSchedule,
    PulseSegment,
    SequenceSpec,
    circular_circuit,
    integrate_alpha,
    moment,
    phase_space_path,
    schedule_from_text,
    schedule_to_text,
    step_circuit,
    symmetrized_sequence,
    thue_morse_orientations,
    time_reverse,
    xi_plus,
)

A0 = 1.0
TAU = math.sqrt(math.pi / 16.0)  # single step circuit enclosing pi/8


def quad_complex(f, a, b):
    re, _ = quad(lambda t: f(t).real, a, b, limit=300)
    im, _ = quad(lambda t: f(t).imag, a, b, limit=300)
    return complex(re, im)


def quad_alpha(s, t):
    """Independent quadrature oracle for integral_0^t alpha, split per segment."""
    total = 0j
    for j, seg in enumerate(s.segments):
        lo = s.segment_start(j)
        hi = min(lo + seg.duration, t)
        if hi <= lo:
            break
        total += quad_complex(lambda tt: s.alpha(tt), lo, hi)
    return total


class TestStepCircuit:
    def test_segment_values_time_order(self):
        s = step_circuit(A0, TAU)
        assert [seg.value for seg in s.segments] == [-1j * A0, A0, 1j * A0, -A0]
        assert all(seg.duration == TAU for seg in s.segments)
        assert s.duration == pytest.approx(4 * TAU, rel=1e-15)

    def test_loop_closure(self):
        s = step_circuit(A0, TAU)
        assert abs(integrate_alpha(s, s.duration)) <= 1e-12 * A0 * s.duration

    def test_cbar_is_segmentwise_negation(self):
        c = step_circuit(A0, TAU, "C")
        cbar = step_circuit(A0, TAU, "Cbar")
        rev = time_reverse(c)
        for a, b in zip(rev.segments, cbar.segments):
            assert a.value == b.value
            assert a.duration == b.duration

    def test_invalid_parameters(self):
        with pytest.raises(InvalidParameterError):
            step_circuit(0.0, TAU)
        with pytest.raises(InvalidParameterError):
            step_circuit(A0, -1.0)
        with pytest.raises(InvalidParameterError):
            step_circuit(A0, TAU, "up")


class TestCircularCircuit:
    def test_endpoint_values(self):
        s = circular_circuit(A0, TAU)
        assert s.alpha(0.0) == pytest.approx(A0)
        # half period flips the sign
        assert s.alpha(2 * TAU) == pytest.approx(-A0, abs=1e-14)

    def test_full_period_integral_vanishes(self):
        s = circular_circuit(A0, TAU)
        assert abs(integrate_alpha(s, s.duration)) <= 1e-12 * A0 * s.duration

    def test_half_period_integral_closed_form(self):
        # at t = 2*tau the exact value is i * 4 * alpha0 * tau / pi
        s = circular_circuit(A0, TAU)
        expected = 1j * 4 * A0 * TAU / math.pi
        got = integrate_alpha(s, 2 * TAU)
        assert got == pytest.approx(expected, abs=1e-14)
        oracle = quad_alpha(s, 2 * TAU)
        assert abs(got - oracle) < 1e-12


class TestTimeReverse:
    def test_involution(self):
        for s in (step_circuit(A0, TAU), circular_circuit(A0, TAU)):
            assert time_reverse(time_reverse(s)) == s

    def test_constant_segment_negation(self):
        seg = PulseSegment.constant(0.3 - 0.2j, 1.0)
        s = PulseSchedule(segments=(seg,))
        assert time_reverse(s).segments[0].value == -(0.3 - 0.2j)

    def test_pointwise_negation_circular(self):
        s = circular_circuit(A0, TAU)
        r = time_reverse(s)
        for t in np.linspace(0, s.duration, 17):
            assert r.alpha(t) == pytest.approx(-s.alpha(t), abs=1e-15)


class TestIntegrateAlpha:
    def test_constant_segment(self):
        s = PulseSchedule(segments=(PulseSegment.constant(0.4 + 0.7j, 2.0),))
        assert integrate_alpha(s, 1.3) == pytest.approx((0.4 + 0.7j) * 1.3, rel=1e-15)

    @pytest.mark.parametrize("build", [step_circuit, circular_circuit])
    def test_against_quadrature(self, build):
        s = build(A0, TAU)
        for t in np.linspace(0.01, s.duration, 9):
            assert abs(integrate_alpha(s, t) - quad_alpha(s, t)) < 1e-12

    def test_out_of_range(self):
        s = step_circuit(A0, TAU)
        with pytest.raises(InvalidParameterError):
            integrate_alpha(s, -0.1)
        with pytest.raises(InvalidParameterError):
            integrate_alpha(s, s.duration * 1.1)

    def test_left_continuous_at_boundaries(self):
        s = step_circuit(A0, TAU)
        # at an interior boundary alpha takes the left segment's final value
        assert s.alpha(TAU) == s.segments[0].value
        assert s.alpha(TAU * 1.0001) == s.segments[1].value


def mp_moment(s, j, kappa):
    """High-precision quadrature oracle for the drive moment, per segment."""
    with mpmath.workdps(40):
        total = mpmath.mpc(0)
        for m, seg in enumerate(s.segments):
            t0 = s.segment_start(m)
            val = mpmath.mpmathify(seg.value)
            om = mpmath.mpf(seg.omega)

            def f(u, t0=t0, val=val, om=om):
                return val * mpmath.exp(1j * om * u) * (mpmath.mpf(kappa) * (t0 + u) / 2) ** j

            total += mpmath.quad(f, [0, seg.duration])
        return complex(total)


class TestMoments:
    def test_single_circuit_zeroth_moment_vanishes(self):
        assert abs(moment(step_circuit(A0, TAU), 0, 0.05)) < 1e-15

    def test_first_order_sequence_cancels_j0_j1(self):
        seq = symmetrized_sequence(SequenceSpec(order=1))
        kappa = 0.05
        scale = A0 * seq.duration
        assert abs(moment(seq, 0, kappa)) <= 1e-10 * scale
        assert abs(moment(seq, 1, kappa)) <= 1e-10 * scale * (kappa * seq.duration / 2)

    def test_second_order_sequence_cancels_quadratic_moment(self):
        seq = symmetrized_sequence(SequenceSpec(order=2))
        kappa = 0.05
        val = moment(seq, 2, kappa)
        assert abs(val) < 1e-10 * A0 * seq.duration ** 3 * kappa ** 2
        assert abs(val - mp_moment(seq, 2, kappa)) < 1e-13

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_cancellation_up_to_order(self, k):
        seq = symmetrized_sequence(SequenceSpec(order=k))
        kappa = 0.05
        t_n = seq.duration
        for j in range(k + 1):
            bound = 1e-10 * A0 * t_n * (kappa * t_n / 2) ** j
            assert abs(moment(seq, j, kappa)) <= bound

    def test_nonzero_moments_match_quadrature(self):
        # values that do NOT cancel, checked against a high-precision oracle
        s = step_circuit(A0, TAU)
        kappa = 0.08
        for j in (1, 2, 3):
            got = moment(s, j, kappa)
            ref = mp_moment(s, j, kappa)
            assert abs(got - ref) <= 1e-13 * max(1.0, abs(ref))
            assert abs(got) > 1e-6 * (kappa / 2) ** j  # genuinely nonzero

    def test_invalid_parameters(self):
        s = step_circuit(A0, TAU)
        with pytest.raises(InvalidParameterError):
            moment(s, -1, 0.05)
        with pytest.raises(InvalidParameterError):
            moment(s, 1, -0.1)


class TestSymmetrizedSequence:
    def test_thue_morse_orientations(self):
        assert thue_morse_orientations(0) == ("C",)
        assert thue_morse_orientations(1) == ("C", "Cbar")
        assert thue_morse_orientations(2) == ("C", "Cbar", "Cbar", "C")
        assert thue_morse_orientations(3) == (
            "C", "Cbar", "Cbar", "C", "Cbar", "C", "C", "Cbar",
        )

    def test_recursion_rule(self):
        # S_{k+1} is S_k followed by its orientation flip
        for k in range(4):
            sk = thue_morse_orientations(k)
            sk1 = thue_morse_orientations(k + 1)
            flip = tuple("Cbar" if o == "C" else "C" for o in sk)
            assert sk1 == sk + flip

    def test_durations(self):
        for k in range(4):
            seq = symmetrized_sequence(SequenceSpec(order=k, phase=math.pi / 8))
            n = 2 ** k
            assert seq.duration == pytest.approx(math.sqrt(n * math.pi), rel=1e-14)

    def test_segments_match_concatenated_circuits(self):
        spec = SequenceSpec(order=2)
        seq = symmetrized_sequence(spec)
        manual = []
        for orient in ("C", "Cbar", "Cbar", "C"):
            manual.extend(step_circuit(spec.alpha0, spec.tau, orient).segments)
        assert seq.segments == tuple(manual)

    def test_loop_closure_all_orders(self):
        for k in range(4):
            seq = symmetrized_sequence(SequenceSpec(order=k))
            assert abs(integrate_alpha(seq, seq.duration)) <= 1e-12 * A0 * seq.duration

    def test_invalid_spec(self):
        with pytest.raises(InvalidParameterError):
            SequenceSpec(order=-1)
        with pytest.raises(InvalidParameterError):
            SequenceSpec(phase=0.0)
        with pytest.raises(InvalidParameterError):
            SequenceSpec(base="triangle")


class TestPhaseSpacePath:
    def test_step_path_is_closed_square(self):
        s = step_circuit(A0, TAU)
        pts = phase_space_path(s, 0.0, 401)
        zs = pts[:, 1]
        assert abs(zs[0]) < 1e-15
        assert abs(zs[-1]) <= 1e-12 * A0 * s.duration
        # corners at the segment boundaries
        corners = [-1j * A0 * TAU, (1 - 1j) * A0 * TAU, A0 * TAU]
        for frac, corner in zip((0.25, 0.5, 0.75), corners):
            idx = round(frac * 400)
            assert zs[idx] == pytest.approx(corner, abs=1e-12)

    def test_circular_path_is_closed_circle(self):
        s = circular_circuit(A0, TAU)
        pts = phase_space_path(s, 0.0, 257)
        zs = pts[:, 1]
        radius = 2 * A0 * TAU / math.pi
        center = 1j * radius
        assert abs(zs[-1]) <= 1e-12 * A0 * s.duration
        assert np.max(np.abs(np.abs(zs - center) - radius)) < 1e-12

    def test_two_samples_are_endpoints(self):
        s = step_circuit(A0, TAU)
        pts = phase_space_path(s, 0.0, 2)
        assert pts[0, 1] == 0
        assert pts[1, 1] == integrate_alpha(s, s.duration)

    def test_dissipative_closure_gap(self):
        s = step_circuit(A0, TAU)
        kappa = 0.08
        pts = phase_space_path(s, kappa, 11)
        gap = abs(pts[-1, 1])
        assert gap == pytest.approx(abs(xi_plus(s, kappa, s.duration)), rel=1e-12)
        assert gap > 1e-4  # the loop genuinely fails to close

    def test_samples_validation(self):
        with pytest.raises(InvalidParameterError):
            phase_space_path(step_circuit(A0, TAU), 0.0, 1)


class TestSerialization:
    def test_circuit_round_trip(self):
        for s in (step_circuit(1.3, 0.21, "Cbar"), circular_circuit(0.7, 0.5)):
            assert schedule_from_text(schedule_to_text(s)) == s

    def test_sequence_round_trip(self):
        seq = symmetrized_sequence(SequenceSpec(order=2, phase=math.pi / 8, alpha0=1.5))
        assert schedule_from_text(schedule_to_text(seq)) == seq

    def test_hand_built_schedule_rejected(self):
        s = PulseSchedule(segments=(PulseSegment.constant(1.0, 1.0),))
        with pytest.raises(InvalidParameterError):
            schedule_to_text(s)
