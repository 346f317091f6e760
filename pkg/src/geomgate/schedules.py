"""Piecewise drive schedules alpha(t) for oscillator-assisted geometric gates.

A schedule is an ordered list of segments.  Each segment contributes

    alpha(u) = value * exp(i*omega*u),      u local to the segment,

so constant pulses have omega = 0 and circular arcs have omega = pi/(2*tau)
(one full turn over a duration of 4*tau).  Units are dimensionless with
hbar = 1; the pulse amplitude alpha0 sets the frequency scale.

Built-in circuits (time order; the later pulse acts later):

    step C        four constant pulses [-i*a0, +a0, +i*a0, -a0], each of
                  length tau.  At kappa = 0 this encloses a square loop in
                  oscillator phase space and enacts exp(-i*2*a0^2*tau^2*Jy^2).
    circular C    one full period of alpha(t) = a0*exp(i*pi*t/(2*tau)),
                  duration 4*tau, enclosing a circle of radius 2*a0*tau/pi.
    C-bar         the time-reversed partner, alpha -> -alpha pointwise.

The step-pulse time order is pinned so that the kappa = 0 propagator equals
exp(-i*2*alpha0^2*tau^2*Jy^2) with this sign (checked against the
truncated-Fock matrix-exponential oracle in the test suite); the reversed
order flips the sign of the enclosed area.

`symmetrized_sequence` concatenates 2**k circuits whose orientations follow
the Thue-Morse word C, C-bar, C-bar, C, ...; this cancels the drive moments
I^(j)(T) = integral alpha(t) (kappa*t/2)^j dt for every j <= k, which is the
time-reversal decoupling mechanism.

All objects are immutable; operations are pure functions.
"""
from __future__ import annotations

import cmath
import math
from bisect import bisect_left
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidParameterError

ORIENTATIONS = ("C", "Cbar")


def _int_pow_exp(a: complex, j: int, s: float) -> complex:
    """Closed form of integral_0^s u^j exp(a*u) du.

    Uses the confluent series s^(j+1) * sum_m (a*s)^m / (m! (j+m+1)) when
    |a*s| is small (no cancellation), and the integration-by-parts recursion
    otherwise.  Exact to machine precision over the whole parameter range
    used by the schedules (|a*s| is at most a few).
    """
    if s == 0.0:
        return 0.0 + 0.0j
    z = a * s
    if abs(z) < 0.9:
        acc = 1.0 / (j + 1)
        zm = 1.0 + 0.0j
        for m in range(1, 64):
            zm *= z / m
            term = zm / (j + m + 1)
            acc += term
            if abs(term) <= 1e-18 * abs(acc):
                break
        return (s ** (j + 1)) * acc
    e = cmath.exp(z)
    val = (e - 1.0) / a
    for m in range(1, j + 1):
        val = ((s ** m) * e - m * val) / a
    return val


@dataclass(frozen=True)
class PulseSegment:
    """One piece of the drive: alpha(u) = value * exp(i*omega*u), 0 <= u <= duration."""

    duration: float
    value: complex
    omega: float = 0.0

    def __post_init__(self):
        if not (self.duration > 0.0):
            raise InvalidParameterError(f"segment duration must be > 0, got {self.duration}")

    @staticmethod
    def constant(value: complex, duration: float) -> "PulseSegment":
        return PulseSegment(duration=float(duration), value=complex(value), omega=0.0)

    @staticmethod
    def circular(alpha0: complex, tau: float, duration: float | None = None) -> "PulseSegment":
        """Arc alpha(u) = alpha0 * exp(i*pi*u/(2*tau)); default duration one full period 4*tau."""
        if not (tau > 0.0):
            raise InvalidParameterError(f"quarter period tau must be > 0, got {tau}")
        dur = 4.0 * tau if duration is None else float(duration)
        return PulseSegment(duration=dur, value=complex(alpha0), omega=math.pi / (2.0 * tau))

    @property
    def kind(self) -> str:
        return "constant" if self.omega == 0.0 else "circular"

    def alpha(self, u: float) -> complex:
        return self.value * cmath.exp(1j * self.omega * u)

    def integral(self, u: float) -> complex:
        """integral_0^u alpha(v) dv, closed form."""
        return self.value * _int_pow_exp(1j * self.omega, 0, u)

    def weighted_integral(self, shift: complex, u: float) -> complex:
        """integral_0^u alpha(v) exp(shift*v) dv, closed form."""
        return self.value * _int_pow_exp(1j * self.omega + shift, 0, u)

    def moment_integral(self, t0: float, half_kappa: float, j: int, u: float) -> complex:
        """integral_0^u alpha(v) (half_kappa*(t0 + v))^j dv, closed form."""
        if j == 0:
            return self.integral(u)
        coeff = half_kappa ** j
        if coeff == 0.0:
            return 0.0 + 0.0j
        acc = 0.0 + 0.0j
        for r in range(j + 1):
            acc += math.comb(j, r) * (t0 ** (j - r)) * _int_pow_exp(1j * self.omega, r, u)
        return coeff * self.value * acc


@dataclass(frozen=True)
class PulseSchedule:
    """Immutable ordered drive schedule with circuit metadata.

    Metadata (alpha0, tau, base, orientation, order, phase) is carried for
    labelling and plain-text serialization; the dynamical content is entirely
    in `segments`.
    """

    segments: tuple
    alpha0: float = 0.0
    tau: float = 0.0
    base: str = ""
    orientation: str = ""
    order: int | None = None
    phase: float | None = None
    label: str = ""
    _starts: tuple = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if not self.segments:
            raise InvalidParameterError("schedule needs at least one segment")
        starts = [0.0]
        for seg in self.segments:
            starts.append(starts[-1] + seg.duration)
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "_starts", tuple(starts))

    @property
    def duration(self) -> float:
        return self._starts[-1]

    def segment_index(self, t: float) -> int:
        """Index of the segment owning time t; boundaries belong to the left segment."""
        if t < 0.0 or t > self.duration * (1.0 + 1e-12) + 1e-15:
            raise InvalidParameterError(f"t={t} outside [0, {self.duration}]")
        if t <= 0.0:
            return 0
        idx = bisect_left(self._starts, t) - 1
        return min(max(idx, 0), len(self.segments) - 1)

    def alpha(self, t: float) -> complex:
        """Drive value alpha(t), left-continuous at segment boundaries."""
        j = self.segment_index(t)
        return self.segments[j].alpha(t - self._starts[j])

    def segment_start(self, j: int) -> float:
        return self._starts[j]


def step_circuit(alpha0: float, tau: float, orientation: str = "C") -> PulseSchedule:
    """Square-loop circuit of four constant pulses, each of length tau.

    Time order of the drive values for orientation C is
    [-i*alpha0, +alpha0, +i*alpha0, -alpha0]; C-bar negates every pulse.
    The enclosed phase-space area gives the two-qubit phase 2*alpha0^2*tau^2.
    """
    _check_circuit_args(alpha0, tau, orientation)
    sign = 1.0 if orientation == "C" else -1.0
    values = [-1j * alpha0, alpha0, 1j * alpha0, -alpha0]
    segs = tuple(PulseSegment.constant(sign * v, tau) for v in values)
    return PulseSchedule(
        segments=segs, alpha0=float(alpha0), tau=float(tau), base="step",
        orientation=orientation, label=f"step:{orientation}",
    )


def circular_circuit(alpha0: float, tau: float, orientation: str = "C") -> PulseSchedule:
    """Circular-loop circuit: one full period of alpha0*exp(i*pi*t/(2*tau)).

    Duration 4*tau; the loop is a circle of radius 2*alpha0*tau/pi, enclosing
    the two-qubit phase (8/pi)*alpha0^2*tau^2.
    """
    _check_circuit_args(alpha0, tau, orientation)
    sign = 1.0 if orientation == "C" else -1.0
    segs = (PulseSegment.circular(sign * alpha0, tau),)
    return PulseSchedule(
        segments=segs, alpha0=float(alpha0), tau=float(tau), base="circular",
        orientation=orientation, label=f"circular:{orientation}",
    )


def _check_circuit_args(alpha0, tau, orientation):
    if not (alpha0 > 0.0):
        raise InvalidParameterError(f"alpha0 must be > 0, got {alpha0}")
    if not (tau > 0.0):
        raise InvalidParameterError(f"tau must be > 0, got {tau}")
    if orientation not in ORIENTATIONS:
        raise InvalidParameterError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")


def time_reverse(s: PulseSchedule) -> PulseSchedule:
    """Pointwise negation alpha -> -alpha; durations unchanged (an involution)."""
    segs = tuple(replace(seg, value=-seg.value) for seg in s.segments)
    flip = {"C": "Cbar", "Cbar": "C"}.get(s.orientation, s.orientation)
    return PulseSchedule(
        segments=segs, alpha0=s.alpha0, tau=s.tau, base=s.base,
        orientation=flip, order=s.order, phase=s.phase,
        label=(f"{s.base}:{flip}" if s.base and flip else f"reversed({s.label})"),
    )


@dataclass(frozen=True)
class SequenceSpec:
    """Recipe for a time-reversal symmetrized sequence of order k.

    The sequence concatenates n = 2**k circuits; the per-circuit pulse length
    tau_n is fixed so the total accumulated two-qubit phase equals `phase`
    (for the step base: n * 2 * alpha0^2 * tau_n^2 = phase, which makes the
    total duration sqrt(n*pi)/alpha0 when phase = pi/8).
    """

    base: str = "step"
    order: int = 0
    phase: float = math.pi / 8.0
    alpha0: float = 1.0

    def __post_init__(self):
        if self.base not in ("step", "circular"):
            raise InvalidParameterError(f"base must be 'step' or 'circular', got {self.base!r}")
        if not (isinstance(self.order, int) and self.order >= 0):
            raise InvalidParameterError(f"order k must be a non-negative integer, got {self.order}")
        if not (self.phase > 0.0):
            raise InvalidParameterError(f"target phase must be > 0, got {self.phase}")
        if not (self.alpha0 > 0.0):
            raise InvalidParameterError(f"alpha0 must be > 0, got {self.alpha0}")

    @property
    def n(self) -> int:
        return 2 ** self.order

    @property
    def tau(self) -> float:
        """Per-circuit pulse length from the per-circuit enclosed area.

        One step circuit encloses 2*alpha0^2*tau^2; one circular circuit
        encloses (8/pi)*alpha0^2*tau^2.
        """
        area_coeff = 2.0 if self.base == "step" else 8.0 / math.pi
        return math.sqrt(self.phase / (self.n * area_coeff)) / self.alpha0


def thue_morse_orientations(k: int) -> tuple:
    """Circuit orientations of the order-k sequence, in time order.

    S_0 = [C]; S_{k+1} = S_k followed by its orientation flip, i.e. the
    Thue-Morse word: k=1 -> (C, Cbar); k=2 -> (C, Cbar, Cbar, C).
    """
    return tuple("Cbar" if bin(m).count("1") % 2 else "C" for m in range(2 ** k))


def symmetrized_sequence(spec: SequenceSpec) -> PulseSchedule:
    """Concatenation of 2**k circuits in the Thue-Morse orientation pattern."""
    builder = step_circuit if spec.base == "step" else circular_circuit
    segs = []
    for orient in thue_morse_orientations(spec.order):
        segs.extend(builder(spec.alpha0, spec.tau, orient).segments)
    return PulseSchedule(
        segments=tuple(segs), alpha0=spec.alpha0, tau=spec.tau, base=spec.base,
        orientation="", order=spec.order, phase=spec.phase,
        label=f"{spec.base}:k={spec.order}",
    )


def integrate_alpha(s: PulseSchedule, t: float) -> complex:
    """integral_0^t alpha(t') dt', exact per-segment closed form."""
    j = s.segment_index(t)
    acc = 0.0 + 0.0j
    for m in range(j):
        acc += s.segments[m].integral(s.segments[m].duration)
    acc += s.segments[j].integral(t - s.segment_start(j))
    return acc


def weighted_drive_integral(s: PulseSchedule, shift: complex, t: float) -> complex:
    """integral_0^t alpha(t') exp(shift*t') dt', exact per-segment closed form.

    This is the workhorse behind the filtered drive integrals
    xi_pm(t) = exp(-/+ kappa*t/2) * weighted_drive_integral(s, +/- kappa/2, t).
    """
    j = s.segment_index(t)
    acc = 0.0 + 0.0j
    for m in range(j):
        t0 = s.segment_start(m)
        seg = s.segments[m]
        acc += cmath.exp(shift * t0) * seg.weighted_integral(shift, seg.duration)
    t0 = s.segment_start(j)
    acc += cmath.exp(shift * t0) * s.segments[j].weighted_integral(shift, t - t0)
    return acc


def xi_plus(s: PulseSchedule, kappa: float, t: float) -> complex:
    """Filtered drive integral exp(-kappa*t/2) integral_0^t alpha exp(+kappa*t'/2) dt'."""
    return cmath.exp(-0.5 * kappa * t) * weighted_drive_integral(s, +0.5 * kappa, t)


def xi_minus(s: PulseSchedule, kappa: float, t: float) -> complex:
    """Filtered drive integral exp(+kappa*t/2) integral_0^t alpha exp(-kappa*t'/2) dt'."""
    return cmath.exp(+0.5 * kappa * t) * weighted_drive_integral(s, -0.5 * kappa, t)


def moment(s: PulseSchedule, j: int, kappa: float) -> complex:
    """Drive moment I^(j)(T) = integral_0^T alpha(t) (kappa*t/2)^j dt, closed form.

    The order-k symmetrized sequence cancels these exactly for every j <= k;
    they are the expansion coefficients of xi_pm in powers of kappa.
    """
    if not (isinstance(j, int) and j >= 0):
        raise InvalidParameterError(f"moment order j must be a non-negative integer, got {j}")
    if kappa < 0.0:
        raise InvalidParameterError(f"kappa must be >= 0, got {kappa}")
    acc = 0.0 + 0.0j
    for m, seg in enumerate(s.segments):
        acc += seg.moment_integral(s.segment_start(m), 0.5 * kappa, j, seg.duration)
    return acc


def phase_space_path(s: PulseSchedule, kappa: float, samples: int) -> np.ndarray:
    """Sampled phase-space trace of the drive loop, as complex points.

    kappa = 0 traces integral_0^t alpha (the geometric loop); kappa > 0
    traces the filtered integral xi_plus(t), whose endpoint gap |xi_plus(T)|
    measures how dissipation breaks loop closure.  Returns an array of shape
    (samples, 2) with columns (t, z).
    """
    if samples < 2:
        raise InvalidParameterError(f"samples must be >= 2, got {samples}")
    ts = np.linspace(0.0, s.duration, samples)
    out = np.empty((samples, 2), dtype=complex)
    for i, t in enumerate(ts):
        z = integrate_alpha(s, t) if kappa == 0.0 else xi_plus(s, kappa, t)
        out[i, 0] = t
        out[i, 1] = z
    return out


# -- plain-text key-value serialization ------------------------------------

def schedule_to_text(s: PulseSchedule) -> str:
    """Serialize a built-in circuit or symmetrized sequence to key=value lines."""
    if not s.base:
        raise InvalidParameterError("only built-in circuits/sequences are serializable")
    lines = [f"kind = {s.base}", f"alpha0 = {s.alpha0:.17g}"]
    if s.order is not None:
        lines += [f"k = {s.order}", f"phase = {s.phase:.17g}"]
    else:
        lines += [f"tau = {s.tau:.17g}", f"orientation = {s.orientation}"]
    return "\n".join(lines) + "\n"


def schedule_from_text(text: str) -> PulseSchedule:
    """Rebuild a schedule serialized by `schedule_to_text`."""
    kv = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        kv[key.strip()] = val.strip()
    try:
        kind = kv["kind"]
        alpha0 = float(kv["alpha0"])
    except KeyError as exc:
        raise InvalidParameterError(f"missing schedule key: {exc}") from exc
    if "k" in kv:
        spec = SequenceSpec(base=kind, order=int(kv["k"]), phase=float(kv["phase"]), alpha0=alpha0)
        return symmetrized_sequence(spec)
    builder = step_circuit if kind == "step" else circular_circuit
    return builder(alpha0, float(kv["tau"]), kv.get("orientation", "C"))
