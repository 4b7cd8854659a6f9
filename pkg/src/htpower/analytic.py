"""Hilbert branch: analytic-filter design, analytic signals and the
instantaneous power products.

The analytic filter is a single complex-tap FIR h[n] = b[n] + j*g[n]
with one shared integer group delay D on both branches.  g[n] is a
weighted least-squares approximation of the delayed Hilbert kernel,
with the weight concentrated on the configured passband so that the
mirror band is rejected deeply at small orders; b[n] is either a pure
delay (exact wideband real branch, the default) or a flat low-pass
sharing the same delay (suppresses wideband measurement noise at the
cost of band-limiting the real branch).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SampledSignal

TWO_PI = 2.0 * np.pi

REAL_BRANCH_MODES = ("delay", "lowpass")


class FilterDesignError(ValueError):
    """Raised when a design cannot meet its rejection contract; the
    message carries the achieved figures so the caller can relax."""


@dataclass(frozen=True)
class AnalyticSignal:
    """Complex-valued counterpart of a SampledSignal; same timing
    semantics.  The first and last ``valid_guard`` samples are filter
    startup transients and are excluded from metrics."""

    rate_hz: float
    t0_s: float
    samples: np.ndarray
    valid_guard: int = 0

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def times(self) -> np.ndarray:
        return self.t0_s + np.arange(self.samples.size) / self.rate_hz


@dataclass(frozen=True)
class HtConfig:
    """Design parameters for the analytic filter."""

    order: int = 31
    passband_hz: tuple[float, float] = (25.0, 75.0)
    transition_hz: float = 40.0
    real_branch: str = "delay"
    min_attenuation_db: float = 60.0

    def __post_init__(self):
        if self.real_branch not in REAL_BRANCH_MODES:
            raise ValueError(f"real_branch must be one of {REAL_BRANCH_MODES}")

    def design(self, rate_hz: float) -> "AnalyticFilterSpec":
        return design_analytic_filter(
            rate_hz,
            order=self.order,
            passband_hz=self.passband_hz,
            transition_hz=self.transition_hz,
            real_branch=self.real_branch,
            min_attenuation_db=self.min_attenuation_db,
        )


@dataclass(frozen=True)
class AnalyticFilterSpec:
    """Designed filter plus its measured response figures.

    ``group_delay_samples`` is an integer shared by both branches so
    that delay compensation stays on the sample grid.  The acceptance
    stopband is the mirror of ``passband_hz`` on the negative axis;
    ``negative_attenuation_db`` is measured there."""

    rate_hz: float
    order: int
    passband_hz: tuple[float, float]
    transition_hz: float
    real_branch: str
    coefficients: np.ndarray
    group_delay_samples: int
    passband_ripple_db: float
    negative_attenuation_db: float


def _ls_fir(rate_hz, taps, bands, n_grid=2048):
    """Real-coefficient FIR by weighted least squares.

    ``bands`` is a list of (f_lo, f_hi, weight, target_fn) with
    target_fn(omega) returning the desired complex response on the
    positive-frequency axis; conjugate symmetry covers negative
    frequencies automatically."""
    nyq = rate_hz / 2.0
    rows_a, rows_b = [], []
    n_idx = np.arange(taps)
    for f_lo, f_hi, weight, target_fn in bands:
        pts = max(32, int(round(n_grid * (f_hi - f_lo) / nyq)))
        freqs = np.linspace(f_lo, f_hi, pts)
        omega = TWO_PI * freqs / rate_hz
        target = target_fn(omega)
        basis = np.exp(-1j * np.outer(omega, n_idx))
        w = np.sqrt(weight)
        rows_a.append(w * basis.real)
        rows_b.append(w * target.real)
        rows_a.append(w * basis.imag)
        rows_b.append(w * target.imag)
    a = np.vstack(rows_a)
    b = np.concatenate(rows_b)
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    return coef


def frequency_response(coefficients, rate_hz, freqs_hz) -> np.ndarray:
    """Complex response H(f) = sum_n h[n] exp(-j*2*pi*f*n/rate)."""
    coefficients = np.asarray(coefficients)
    omega = TWO_PI * np.asarray(freqs_hz, dtype=np.float64) / rate_hz
    return np.exp(-1j * np.outer(omega, np.arange(coefficients.size))) @ coefficients


def design_analytic_filter(
    rate_hz: float,
    order: int = 31,
    passband_hz: tuple[float, float] = (25.0, 75.0),
    transition_hz: float = 40.0,
    real_branch: str = "delay",
    min_attenuation_db: float = 60.0,
) -> AnalyticFilterSpec:
    """Design the one-sided (analytic) FIR.

    The filter passes ``passband_hz`` with gain 2 and rejects the
    mirrored negative band; ``transition_hz`` is the width of the
    don't-care strip beyond each passband edge.  Raises
    FilterDesignError with the achieved figure when the measured
    mirror-band rejection falls short of ``min_attenuation_db``.
    """
    if order < 8:
        raise ValueError("order must be >= 8")
    if real_branch not in REAL_BRANCH_MODES:
        raise ValueError(f"real_branch must be one of {REAL_BRANCH_MODES}")
    nyq = rate_hz / 2.0
    f_lo, f_hi = passband_hz
    if not (0.0 < f_lo < f_hi < nyq):
        raise ValueError("passband must lie inside (0, rate/2)")
    taps = order + 1
    delay = round(order / 2)

    def hilbert_target(omega):
        return -1j * np.exp(-1j * omega * delay)

    wide_lo = min(f_hi + transition_hz, 0.9 * nyq)
    wide_hi = 0.96 * nyq
    bands = [
        (f_lo, f_hi, 1e8, hilbert_target),
        (wide_lo, wide_hi, 1.0, hilbert_target),
    ]
    low_hi = f_lo - transition_hz
    if low_hi > 5.0:
        bands.append((min(5.0, 0.5 * low_hi), low_hi, 1.0, hilbert_target))
    g = _ls_fir(rate_hz, taps, bands)

    if real_branch == "delay":
        b = np.zeros(taps)
        b[delay] = 1.0
    else:
        def delay_target(omega):
            return np.exp(-1j * omega * delay)

        def zero_target(omega):
            return np.zeros_like(omega, dtype=complex)

        lp_core_hi = f_hi + transition_hz
        lp_stop_lo = min(lp_core_hi + max(400.0, 10.0 * transition_hz), 0.6 * nyq)
        lp_bands = [
            (0.0, lp_core_hi, 1e8, delay_target),
            (lp_stop_lo, 0.98 * nyq, 1.0, zero_target),
        ]
        b = _ls_fir(rate_hz, taps, lp_bands)

    coefficients = b + 1j * g
    if not np.all(np.isfinite(coefficients)):
        raise FilterDesignError("design produced non-finite taps")

    grid = np.linspace(f_lo, f_hi, 2048)
    h_pass = frequency_response(coefficients, rate_hz, grid)
    h_neg = frequency_response(coefficients, rate_hz, -grid)
    ripple_db = float(np.max(np.abs(20.0 * np.log10(np.abs(h_pass) / 2.0))))
    attenuation_db = float(-20.0 * np.log10(np.max(np.abs(h_neg)) / 2.0))
    if attenuation_db < min_attenuation_db:
        raise FilterDesignError(
            f"mirror-band rejection {attenuation_db:.1f} dB below required "
            f"{min_attenuation_db:.1f} dB at order {order}; widen transition_hz, "
            "narrow the passband or raise the order"
        )
    return AnalyticFilterSpec(
        rate_hz=rate_hz,
        order=order,
        passband_hz=(f_lo, f_hi),
        transition_hz=transition_hz,
        real_branch=real_branch,
        coefficients=coefficients,
        group_delay_samples=delay,
        passband_ripple_db=ripple_db,
        negative_attenuation_db=attenuation_db,
    )


def to_analytic(x: SampledSignal, filt: AnalyticFilterSpec) -> AnalyticSignal:
    """Analytic signal via the complex FIR.

    The output is shifted back by the filter group delay so its
    timestamps align with the input; the first and last ``order``
    samples are startup transients (``valid_guard``)."""
    if x.rate_hz != filt.rate_hz:
        raise ValueError("signal and filter sample rates differ")
    full = np.convolve(x.samples, filt.coefficients)
    d = filt.group_delay_samples
    aligned = full[d : d + len(x)]
    return AnalyticSignal(x.rate_hz, x.t0_s, aligned, valid_guard=filt.order)


def hilbert_fft_oracle(x: SampledSignal) -> AnalyticSignal:
    """Exact discrete analytic signal of the finite record (zero the
    negative bins, double the positive ones).  Test oracle for the FIR
    path; not used inside the estimation pipeline."""
    n = len(x)
    spec = np.fft.fft(x.samples)
    gain = np.zeros(n)
    gain[0] = 1.0
    if n % 2 == 0:
        gain[n // 2] = 1.0
        gain[1 : n // 2] = 2.0
    else:
        gain[1 : (n + 1) // 2] = 2.0
    return AnalyticSignal(x.rate_hz, x.t0_s, np.fft.ifft(spec * gain), valid_guard=0)


@dataclass(frozen=True)
class PowerProducts:
    """Complex three-phase power products.

    p1 = sum_abc v_hat*i_hat, p2 = sum_abc v_hat*conj(i_hat) and
    p3 = p1 + p2 (elementwise, no reformulation)."""

    rate_hz: float
    t0_s: float
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    valid_guard: int = 0


def power_products(v_hats, i_hats) -> PowerProducts:
    """Three-phase products of per-phase analytic voltages/currents."""
    v_hats = tuple(v_hats)
    i_hats = tuple(i_hats)
    if len(v_hats) != 3 or len(i_hats) != 3:
        raise ValueError("expected three phases of voltage and current")
    ref = v_hats[0]
    for sig in (*v_hats, *i_hats):
        if sig.rate_hz != ref.rate_hz or sig.t0_s != ref.t0_s or len(sig) != len(ref):
            raise ValueError("analytic signals must share rate, t0 and length")
    p1 = np.zeros(len(ref), dtype=np.complex128)
    p2 = np.zeros(len(ref), dtype=np.complex128)
    for v_hat, i_hat in zip(v_hats, i_hats):
        p1 += v_hat.samples * i_hat.samples
        p2 += v_hat.samples * np.conj(i_hat.samples)
    p3 = p1 + p2
    guard = max(sig.valid_guard for sig in (*v_hats, *i_hats))
    return PowerProducts(ref.rate_hz, ref.t0_s, p1, p2, p3, valid_guard=guard)


def ht_power(products: PowerProducts):
    """HT-path instantaneous power: real(p3)/2."""
    from .pipeline import PowerSeries  # local import: pipeline imports this module lazily

    return PowerSeries(
        rate_hz=products.rate_hz,
        t0_s=products.t0_s,
        samples=0.5 * np.real(products.p3),
    )
