"""Time-domain simulation of the 2-bus test system.

An ideal three-phase source feeds a parallel RL load through a lumped
pi-equivalent line.  Inductors and capacitors are discretised with
trapezoidal companion models (resistor + history source) and the single
unknown node voltage per phase is solved at every step.  Phases are
decoupled (positive-sequence per-phase parameters, balanced operation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .signals import SampledSignal, ThreePhaseSet

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PiLineParams:
    """Per-phase line constants.  ``x_ohm_per_m`` is the series reactance
    per metre at ``f_nom_hz``, so L = x/(2*pi*f_nom) is frequency
    independent; ``c_f_per_m`` is the per-phase shunt capacitance."""

    r_ohm_per_m: float
    x_ohm_per_m: float
    c_f_per_m: float
    length_m: float
    f_nom_hz: float = 50.0

    def __post_init__(self):
        for name in ("r_ohm_per_m", "x_ohm_per_m", "c_f_per_m", "f_nom_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.length_m < 0:
            raise ValueError("length_m must be >= 0")


@dataclass(frozen=True)
class LoadParams:
    """Three-phase load rating used to derive the parallel RL equivalent."""

    p_watts: float
    pf: float
    v_ll_rms: float
    f_nom_hz: float = 50.0

    def __post_init__(self):
        if self.p_watts <= 0 or self.v_ll_rms <= 0 or self.f_nom_hz <= 0:
            raise ValueError("p_watts, v_ll_rms and f_nom_hz must be positive")
        if not (0.0 < self.pf <= 1.0):
            raise ValueError("pf must lie in (0, 1]")


def derive_load(load: LoadParams) -> tuple[float, float | None]:
    """Parallel per-phase load elements from the rating.

    R = V_ll^2 / P and X = V_ll^2 / Q with Q = P*tan(acos(pf)).
    Returns (r_ohm, l_henry); ``l_henry`` is None for pf = 1 (purely
    resistive load, no inductor).
    """
    r_ohm = load.v_ll_rms**2 / load.p_watts
    if load.pf == 1.0:
        return r_ohm, None
    q_vars = load.p_watts * math.tan(math.acos(load.pf))
    x_ohm = load.v_ll_rms**2 / q_vars
    l_henry = x_ohm / (TWO_PI * load.f_nom_hz)
    if not (math.isfinite(r_ohm) and math.isfinite(l_henry) and r_ohm > 0 and l_henry > 0):
        raise ValueError("derived load elements are not positive finite")
    return r_ohm, l_henry


@dataclass(frozen=True)
class NetworkDescription:
    """Per-phase elements of the assembled 2-bus network.

    Two nodes per phase: sending (driven by the ideal source) and
    receiving (load node).  Half the line capacitance sits at each end;
    the sending-end half is rigidly driven by the source and does not
    influence the receiving-node solution.
    """

    r_line_ohm: float
    l_line_h: float
    c_end_f: float
    r_load_ohm: float
    l_load_h: float | None

    nodes_per_phase: int = 2

    @property
    def c_total_f(self) -> float:
        return 2.0 * self.c_end_f


def build_network(line: PiLineParams, load: LoadParams) -> NetworkDescription:
    """Assemble the pi-equivalent line and the RL load."""
    r_line = line.r_ohm_per_m * line.length_m
    l_line = line.x_ohm_per_m * line.length_m / (TWO_PI * line.f_nom_hz)
    c_end = line.c_f_per_m * line.length_m / 2.0
    r_load, l_load = derive_load(load)
    return NetworkDescription(r_line, l_line, c_end, r_load, l_load)


def simulate(network: NetworkDescription, source: ThreePhaseSet) -> tuple[ThreePhaseSet, ThreePhaseSet]:
    """Step the network over the source record.

    Trapezoidal companion models, fixed step dt = 1/rate, zero initial
    conditions.  Returns (load voltages, series line currents) aligned
    on the source time base.  The first ~0.5 s contains the startup
    transient; downstream metrics exclude it.
    """
    dt = 1.0 / source.rate_hz
    g_c = 2.0 * network.c_end_f / dt
    g_r = 1.0 / network.r_load_ohm
    if network.l_load_h is None:
        g_l = 0.0
    else:
        g_l = dt / (2.0 * network.l_load_h)

    degenerate = network.l_line_h == 0.0 and network.r_line_ohm == 0.0
    if not degenerate:
        denom_rl = 2.0 * network.l_line_h + network.r_line_ohm * dt
        if denom_rl <= 0:
            raise ValueError("singular series branch; line parameters must be positive")
        g_s = dt / denom_rl
        a_s = (2.0 * network.l_line_h - network.r_line_ohm * dt) / denom_rl
        g_node = g_s + g_r + g_l + g_c
        if g_node <= 0 or not math.isfinite(g_node):
            raise ValueError("singular nodal matrix")

    v_out, i_out = [], []
    for phase in source.phases():
        v1 = phase.samples
        n = v1.size
        v2 = np.empty(n)
        i_s = np.empty(n)
        # previous-step state, all zero initial conditions
        v1_p = 0.0
        v2_p = 0.0
        i_s_p = 0.0
        i_l_p = 0.0
        i_c_p = 0.0
        if degenerate:
            # source directly across the load: v2 follows v1; the "line
            # current" is the total current into the receiving node.
            for k in range(n):
                v2_k = v1[k]
                i_l_k = i_l_p + g_l * (v2_k + v2_p)
                i_c_k = g_c * (v2_k - v2_p) - i_c_p
                i_s[k] = v2_k * g_r + i_l_k + i_c_k
                v2[k] = v2_k
                v2_p, i_l_p, i_c_p = v2_k, i_l_k, i_c_k
        else:
            for k in range(n):
                v1_k = v1[k]
                h_s = a_s * i_s_p + g_s * (v1_p - v2_p)
                h_l = i_l_p + g_l * v2_p
                h_c = g_c * v2_p + i_c_p
                v2_k = (g_s * v1_k + h_s - h_l + h_c) / g_node
                i_s_k = g_s * (v1_k - v2_k) + h_s
                i_l_k = g_l * v2_k + h_l
                i_c_k = g_c * v2_k - h_c
                v2[k] = v2_k
                i_s[k] = i_s_k
                v1_p, v2_p, i_s_p, i_l_p, i_c_p = v1_k, v2_k, i_s_k, i_l_k, i_c_k
        v_out.append(SampledSignal(source.rate_hz, source.t0_s, v2))
        i_out.append(SampledSignal(source.rate_hz, source.t0_s, i_s))

    return (
        ThreePhaseSet(*v_out),
        ThreePhaseSet(*i_out),
    )
