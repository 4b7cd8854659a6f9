"""Synthesis of dynamic power-system test waveforms.

Generators for amplitude-modulated, frequency-ramp and amplitude-step
voltage waveforms, multi-segment composition with continuous phase
chaining, three-phase extension, and additive white Gaussian
measurement noise.  All functions are pure: output depends only on the
arguments, so they are safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * np.pi

SEGMENT_KINDS = ("steady", "amplitude_modulation", "frequency_ramp", "amplitude_step")


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled real waveform.

    Sample n is taken at time ``t0_s + n / rate_hz`` exactly.
    """

    rate_hz: float
    t0_s: float
    samples: np.ndarray

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def times(self) -> np.ndarray:
        return self.t0_s + np.arange(self.samples.size) / self.rate_hz


@dataclass(frozen=True)
class ThreePhaseSet:
    """Phases a, b, c on a shared time base."""

    a: SampledSignal
    b: SampledSignal
    c: SampledSignal

    def __post_init__(self):
        ref = self.a
        for ph in (self.b, self.c):
            if ph.rate_hz != ref.rate_hz or ph.t0_s != ref.t0_s or len(ph) != len(ref):
                raise ValueError("three-phase set requires identical rate, t0 and length")

    @property
    def rate_hz(self) -> float:
        return self.a.rate_hz

    @property
    def t0_s(self) -> float:
        return self.a.t0_s

    def __len__(self) -> int:
        return len(self.a)

    def phases(self) -> tuple[SampledSignal, SampledSignal, SampledSignal]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class SegmentSpec:
    """One stretch of a scenario.  Fields irrelevant to `kind` are ignored.

    ``t_step_s`` is relative to the segment start.  An amplitude step
    persists: later segments keep the stepped amplitude scale.
    """

    kind: str
    t_start_s: float
    t_end_s: float
    ka: float = 0.0
    fa_hz: float = 0.0
    ramp_rate_hz_per_s: float = 0.0
    ks: float = 0.0
    t_step_s: float = 0.0

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}; expected one of {SEGMENT_KINDS}")
        if self.t_end_s <= self.t_start_s:
            raise ValueError("segment must have t_end_s > t_start_s")
        if self.kind == "amplitude_modulation":
            if self.ka < 0:
                raise ValueError("ka must be >= 0")
            if self.fa_hz <= 0:
                raise ValueError("fa_hz must be positive")


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative description of a test waveform.

    ``snr_db=None`` disables measurement noise.  The noise itself is
    injected downstream (on measurement copies), not by `compose`.
    """

    f0_hz: float
    a0: float
    phi0_rad: float
    duration_s: float
    rate_hz: float
    segments: tuple[SegmentSpec, ...]
    snr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.f0_hz <= 0 or self.a0 <= 0:
            raise ValueError("f0_hz and a0 must be positive")
        if self.duration_s <= 0 or self.rate_hz <= 0:
            raise ValueError("duration_s and rate_hz must be positive")
        if self.rate_hz < 20.0 * self.f0_hz:
            raise ValueError(
                f"rate_hz={self.rate_hz} violates anti-aliasing margin rate_hz >= 20*f0_hz"
            )
        object.__setattr__(self, "segments", tuple(self.segments))
        _check_tiling(self.segments, self.duration_s)
        for seg in self.segments:
            if seg.kind == "amplitude_modulation" and seg.fa_hz >= self.f0_hz:
                raise ValueError("modulation frequency must satisfy fa_hz < f0_hz")


def _check_tiling(segments: tuple[SegmentSpec, ...], duration_s: float, tol: float = 1e-9):
    if not segments:
        raise ValueError("scenario needs at least one segment")
    if abs(segments[0].t_start_s) > tol:
        raise ValueError("first segment must start at t=0")
    for prev, cur in zip(segments, segments[1:]):
        if abs(cur.t_start_s - prev.t_end_s) > tol:
            raise ValueError(
                f"segments must tile without gap/overlap: {prev.t_end_s} -> {cur.t_start_s}"
            )
    if abs(segments[-1].t_end_s - duration_s) > tol:
        raise ValueError("last segment must end at duration_s")


def _n_samples(duration_s: float, rate_hz: float) -> int:
    n = int(round(duration_s * rate_hz))
    if n < 1:
        raise ValueError("duration too short for one sample")
    return n


def _check_synth_args(a0, duration_s, rate_hz):
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    if rate_hz <= 0:
        raise ValueError("rate_hz must be positive")


def synth_am(a0, f0_hz, phi0_rad, ka, fa_hz, duration_s, rate_hz) -> SampledSignal:
    """Amplitude-modulated cosine a0*(1+ka*cos(2*pi*fa*t))*cos(2*pi*f0*t+phi0)."""
    _check_synth_args(a0, duration_s, rate_hz)
    if ka < 0:
        raise ValueError("ka must be >= 0")
    if ka > 0 and not (0 < fa_hz < f0_hz):
        raise ValueError("need 0 < fa_hz < f0_hz")
    t = np.arange(_n_samples(duration_s, rate_hz)) / rate_hz
    env = 1.0 + ka * np.cos(TWO_PI * fa_hz * t) if ka > 0 else 1.0
    return SampledSignal(rate_hz, 0.0, a0 * env * np.cos(TWO_PI * f0_hz * t + phi0_rad))


def synth_ramp(a0, f0_hz, phi0_rad, ramp_rate, duration_s, rate_hz) -> SampledSignal:
    """Linear frequency ramp a0*cos(2*pi*f0*t + phi0 + R*pi*t^2).

    Instantaneous frequency is f0 + R*t; it must stay inside
    (0, rate_hz/2) over the whole duration.
    """
    _check_synth_args(a0, duration_s, rate_hz)
    f_end = f0_hz + ramp_rate * duration_s
    for f_inst in (f0_hz, f_end):
        if not (0.0 < f_inst < rate_hz / 2.0):
            raise ValueError(
                f"instantaneous frequency {f_inst} Hz exits (0, rate/2) during ramp"
            )
    t = np.arange(_n_samples(duration_s, rate_hz)) / rate_hz
    return SampledSignal(
        rate_hz, 0.0, a0 * np.cos(TWO_PI * f0_hz * t + phi0_rad + np.pi * ramp_rate * t * t)
    )


def synth_step(a0, f0_hz, phi0_rad, ks, t_step_s, duration_s, rate_hz) -> SampledSignal:
    """Amplitude step a0*(1+ks*h(t-t_step))*cos(2*pi*f0*t+phi0), h(0)=1."""
    _check_synth_args(a0, duration_s, rate_hz)
    if not (0.0 <= t_step_s <= duration_s):
        raise ValueError("t_step_s must lie inside [0, duration_s]")
    t = np.arange(_n_samples(duration_s, rate_hz)) / rate_hz
    env = 1.0 + ks * (t >= t_step_s)
    return SampledSignal(rate_hz, 0.0, a0 * env * np.cos(TWO_PI * f0_hz * t + phi0_rad))


def compose(spec: ScenarioSpec) -> SampledSignal:
    """Render a multi-segment scenario as one waveform.

    Carrier phase and frequency are chained continuously across segment
    boundaries; each segment starts at the terminal instantaneous phase
    (and, after a ramp, the terminal frequency) of its predecessor.
    Amplitude steps persist into later segments.
    """
    rate = spec.rate_hz
    n_total = _n_samples(spec.duration_s, rate)
    out = np.empty(n_total, dtype=np.float64)

    phase = spec.phi0_rad
    freq = spec.f0_hz
    amp_scale = 1.0
    for seg in spec.segments:
        n_lo = int(round(seg.t_start_s * rate))
        n_hi = min(int(round(seg.t_end_s * rate)), n_total)
        tau = np.arange(n_lo, n_hi) / rate - seg.t_start_s
        seg_len = seg.t_end_s - seg.t_start_s

        if seg.kind == "frequency_ramp":
            r = seg.ramp_rate_hz_per_s
            f_end = freq + r * seg_len
            for f_inst in (freq, f_end):
                if not (0.0 < f_inst < rate / 2.0):
                    raise ValueError(
                        f"instantaneous frequency {f_inst} Hz exits (0, rate/2) in ramp segment"
                    )
            arg = phase + TWO_PI * freq * tau + np.pi * r * tau * tau
            out[n_lo:n_hi] = spec.a0 * amp_scale * np.cos(arg)
            phase += TWO_PI * freq * seg_len + np.pi * r * seg_len**2
            freq = f_end
            continue

        arg = phase + TWO_PI * freq * tau
        if seg.kind == "steady":
            env = amp_scale
        elif seg.kind == "amplitude_modulation":
            env = amp_scale * (1.0 + seg.ka * np.cos(TWO_PI * seg.fa_hz * tau))
        else:  # amplitude_step
            if not (0.0 <= seg.t_step_s <= seg_len):
                raise ValueError("t_step_s must lie inside the step segment")
            env = amp_scale * (1.0 + seg.ks * (tau >= seg.t_step_s))
        out[n_lo:n_hi] = spec.a0 * env * np.cos(arg)
        phase += TWO_PI * freq * seg_len
        if seg.kind == "amplitude_step":
            amp_scale *= 1.0 + seg.ks

    return SampledSignal(rate, 0.0, out)


def three_phase(spec: ScenarioSpec) -> ThreePhaseSet:
    """Balanced three-phase extension: phases b, c are phase a with the
    initial phase shifted by -2*pi/3 and +2*pi/3.  All dynamic
    parameters are identical across phases."""
    shift = TWO_PI / 3.0
    a = compose(spec)
    b = compose(replace(spec, phi0_rad=spec.phi0_rad - shift))
    c = compose(replace(spec, phi0_rad=spec.phi0_rad + shift))
    return ThreePhaseSet(a, b, c)


def add_noise(signal: SampledSignal, snr_db, seed) -> SampledSignal:
    """Add white Gaussian noise at the given SNR.

    Noise standard deviation is RMS(input) * 10**(-snr_db/20).
    ``snr_db=None`` (or +inf) returns the input unchanged.  ``seed``
    may be an int or a ``numpy.random.SeedSequence``; the output is a
    pure function of (signal, snr_db, seed).
    """
    if snr_db is None or np.isinf(snr_db):
        return signal
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite or None")
    rms = float(np.sqrt(np.mean(signal.samples**2)))
    sigma = rms * 10.0 ** (-snr_db / 20.0)
    rng = np.random.default_rng(seed)
    noisy = signal.samples + rng.normal(0.0, sigma, signal.samples.size)
    return SampledSignal(signal.rate_hz, signal.t0_s, noisy)


def measurement_seeds(seed: int, n: int = 6) -> list[np.random.SeedSequence]:
    """Independent substreams for the measurement waveforms
    (voltages a,b,c then currents a,b,c)."""
    return np.random.SeedSequence(seed).spawn(n)
