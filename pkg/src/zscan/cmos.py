"""Equivalent-impedance model of switching CMOS logic.

A conducting MOSFET is reduced to an effective on-resistance (the mean of its
linear- and saturation-region estimates) in series with the reactance of its
parasitic capacitance. Active gates appear as parallel branches between the
supply rail and ground, behind a board-level baseline network.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import SubthresholdBias


class Polarity(str, Enum):
    PMOS = "PMOS"
    NMOS = "NMOS"


@dataclass(frozen=True)
class MosfetParams:
    k_prime: float          # process transconductance k', A/V^2
    aspect_ratio: float     # W/L
    v_threshold: float      # V_t, V
    v_drain: float          # V_D, V
    v_source: float = 0.0   # V_S, V
    polarity: Polarity = Polarity.NMOS

    def __post_init__(self):
        if not self.k_prime > 0:
            raise ValueError("k_prime must be positive")
        if not self.aspect_ratio > 0:
            raise ValueError("aspect_ratio must be positive")

    @property
    def v_ds(self):
        return abs(self.v_drain - self.v_source)

    @property
    def overdrive(self):
        # magnitudes make one expression serve both polarities
        return self.v_ds - abs(self.v_threshold)

    @property
    def beta(self):
        return self.k_prime * self.aspect_ratio


@dataclass(frozen=True)
class CapacitanceParams:
    """Junction and overlap parameters of one device (SI units throughout)."""

    c_overlap: float = 0.0     # C_o, F/m of width
    width: float = 0.0         # W, m
    k_bottom: float = 0.0      # K_bp
    area_drain: float = 0.0    # AD, m^2
    cj_bottom: float = 0.0     # CJ, F/m^2
    k_sidewall: float = 0.0    # K_sw
    perimeter_drain: float = 0.0  # PD, m
    cj_sidewall: float = 0.0   # CJSW, F/m
    c_wire: float = 0.0        # C_Y, F (from extraction)

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not val >= 0:
                raise ValueError(f"{name} must be nonnegative, got {val!r}")


@dataclass(frozen=True)
class GateBranch:
    r_eff: float   # ohms
    c_eq: float    # farads

    def __post_init__(self):
        if not (self.r_eff > 0 and self.c_eq > 0):
            raise ValueError("branch resistance and capacitance must be positive")


@dataclass(frozen=True)
class BaselineNetwork:
    """Series R-L feed followed by a shunt capacitance to ground."""

    r_series: float = 0.0
    l_series: float = 0.0
    c_shunt: float = 0.0

    def __post_init__(self):
        if min(self.r_series, self.l_series, self.c_shunt) < 0:
            raise ValueError("baseline components must be nonnegative")


def _require_overdrive(p: MosfetParams):
    ov = p.overdrive
    if not ov > 0:
        raise SubthresholdBias(f"overdrive V_DS - V_t = {ov:g} V is not positive")
    return ov


def r_linear(p: MosfetParams) -> float:
    """Effective on-resistance in the linear region, ohms."""
    ov = _require_overdrive(p)
    return (0.5 * ov) / (0.375 * p.beta * ov ** 2)


def r_saturation(p: MosfetParams) -> float:
    """Effective on-resistance in the saturation region, ohms."""
    ov = _require_overdrive(p)
    return p.v_ds / (0.5 * p.beta * ov ** 2)


def r_effective(r_lin: float, r_sat: float) -> float:
    return 0.5 * (r_lin + r_sat)


def parasitic_capacitance(p: CapacitanceParams) -> dict[str, float]:
    """Gate-drain, drain-bulk and total output capacitance in farads."""
    c_gd = 2.0 * p.c_overlap * p.width
    c_db = p.k_bottom * p.area_drain * p.cj_bottom + p.k_sidewall * p.perimeter_drain * p.cj_sidewall
    return {"c_gd": c_gd, "c_db": c_db, "c_total": c_gd + c_db + p.c_wire}


def branch_from_devices(mosfet: MosfetParams, caps: CapacitanceParams, n_parallel=1) -> GateBranch:
    """Lump ``n_parallel`` identical conducting gates into one branch."""
    r = r_effective(r_linear(mosfet), r_saturation(mosfet))
    c = parasitic_capacitance(caps)["c_total"]
    return GateBranch(r / n_parallel, c * n_parallel)


def gate_impedance(b: GateBranch, omega):
    """``R_eff - j / (omega C_eq)``; ``omega`` may be an array."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be positive")
    z = np.asarray(b.r_eff - 1j / (w * b.c_eq))
    return complex(z) if z.ndim == 0 else z


def _network_z(r_s, l_s, c_sh, r_eff, c_eq, omega):
    """Vectorised network impedance over ``omega`` for branch arrays."""
    w0 = np.asarray(omega, dtype=float)
    w = w0.reshape(-1)
    r_eff = np.asarray(r_eff, dtype=float).reshape(-1, 1)
    c_eq = np.asarray(c_eq, dtype=float).reshape(-1, 1)
    y = 1j * w * c_sh
    if r_eff.size:
        y = y + (1.0 / (r_eff - 1j / (w * c_eq))).sum(axis=0)
    # an empty parallel section (no branches, no shunt C) is absent from the path
    with np.errstate(divide="ignore", invalid="ignore"):
        z_par = np.where(y == 0, 0j, 1.0 / np.where(y == 0, 1.0, y))
    return (r_s + 1j * w * l_s + z_par).reshape(w0.shape)


def network_impedance(baseline: BaselineNetwork, branches: Sequence[GateBranch], omega):
    """Impedance seen from the supply pin at angular frequency ``omega``.

    The series feed ``R + j omega L`` is followed by the parallel combination
    of the shunt capacitance and every gate branch.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be positive")
    z = np.asarray(_network_z(baseline.r_series, baseline.l_series, baseline.c_shunt,
                              [b.r_eff for b in branches], [b.c_eq for b in branches], w))
    return complex(z) if z.ndim == 0 else z
