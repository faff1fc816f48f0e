"""Approximate shunt-resonator realization of a low-loss impedance.

Each retained conjugate pole pair (xi +- j*omega, residue a +- j*b) maps to
one parallel-RLC stage through the small-loss truncation

    R = -a/xi,   omega0 = omega,   Q = -omega/(2 xi),
    C = Q/(omega0 R),   L = 1/(omega0^2 C).

The imaginary residue part b is dropped from the element values and kept
only as the quality metric |b/a|.  Real poles, out-of-band pairs, and pairs
with a <= 0 cannot be realized this way and are recorded with a reason.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .ratmodel import TWO_PI, PoleResidueModel

__all__ = [
    "FosterStage",
    "FosterCircuit",
    "DropReason",
    "DroppedTerm",
    "NegativeRealResidueError",
    "UnstablePoleError",
    "InvalidModeError",
    "stage_from_pair",
    "build_foster",
    "q_factor",
    "DEFAULT_BAND_GHZ",
]

# Band of the bundled cavity dataset; every drop rule takes it as input.
DEFAULT_BAND_GHZ = (3.0, 15.0)


class NegativeRealResidueError(ValueError):
    """Residue real part is non-positive: no physical stage exists."""


class UnstablePoleError(ValueError):
    """Pole real part is non-negative."""


class InvalidModeError(ValueError):
    """Q evaluation requested where Re Y <= 0."""


class DropReason(Enum):
    NEGATIVE_REAL_RESIDUE = "NEGATIVE_REAL_RESIDUE"
    DC_TERM = "DC_TERM"
    OUT_OF_BAND = "OUT_OF_BAND"
    REAL_POLE = "REAL_POLE"


@dataclass(frozen=True)
class DroppedTerm:
    pole_indices: tuple
    reason: DropReason


@dataclass(frozen=True)
class FosterStage:
    R: float
    L: float
    C: float
    omega0: float
    Q: float
    source_pole_indices: tuple
    b_ratio: float = 0.0  # |b/a|, the small-loss approximation quality

    def __post_init__(self):
        if min(self.R, self.L, self.C) <= 0:
            raise ValueError("stage R, L, C must be positive")
        if abs(self.omega0 ** 2 * self.L * self.C - 1.0) > 1e-12:
            raise ValueError("omega0^2 != 1/(L C)")
        if abs(self.Q - self.omega0 * self.R * self.C) > 1e-12 * self.Q:
            raise ValueError("Q != omega0 R C")


@dataclass(frozen=True)
class FosterCircuit:
    stages: tuple
    dropped: tuple

    @property
    def num_stages(self) -> int:
        return len(self.stages)


def stage_from_pair(
    xi: float, omega: float, a: float, b: float = 0.0, source=(0, 1)
) -> FosterStage:
    """Build one stage from the upper pole xi + j*omega with residue a + j*b
    (all in rad/ns units)."""
    if a <= 0:
        raise NegativeRealResidueError(
            f"residue real part {a!r} is not positive; no physical network "
            "approximates this term alone"
        )
    if xi >= 0:
        raise UnstablePoleError(f"pole real part {xi!r} is not negative")
    if omega <= 0:
        raise ValueError("pair frequency must be positive")
    r = -a / xi
    q = -omega / (2.0 * xi)
    c = q / (omega * r)
    l = 1.0 / (omega ** 2 * c)
    return FosterStage(
        R=r,
        L=l,
        C=c,
        omega0=omega,
        Q=q,
        source_pole_indices=tuple(source),
        b_ratio=abs(b / a),
    )


def build_foster(
    model: PoleResidueModel,
    band_ghz: tuple = DEFAULT_BAND_GHZ,
    dc_fraction: float = 1.0,
) -> FosterCircuit:
    """Classify every pole of the model into a stage or a dropped record.

    Retained: conjugate pairs with positive residue real part and a
    frequency inside ``band_ghz``.  Dropped: out-of-band pairs
    (OUT_OF_BAND), in-band pairs with a <= 0 (NEGATIVE_REAL_RESIDUE), and
    real poles (DC_TERM when |s| < dc_fraction * band low edge, else
    REAL_POLE).  An empty retained set is allowed.
    """
    lo, hi = TWO_PI * band_ghz[0], TWO_PI * band_ghz[1]
    pairs, reals = model.conjugate_pairs()
    stages, dropped = [], []
    for i in reals:
        p = TWO_PI * model.poles[i]
        reason = DropReason.DC_TERM if abs(p) < dc_fraction * lo else DropReason.REAL_POLE
        dropped.append(DroppedTerm(pole_indices=(i,), reason=reason))
    for i_plus, i_minus in pairs:
        s = TWO_PI * model.poles[i_plus]
        r = model.residues[i_plus]
        if not (lo <= s.imag <= hi):
            dropped.append(
                DroppedTerm(pole_indices=(i_plus, i_minus), reason=DropReason.OUT_OF_BAND)
            )
            continue
        if r.real <= 0:
            dropped.append(
                DroppedTerm(
                    pole_indices=(i_plus, i_minus),
                    reason=DropReason.NEGATIVE_REAL_RESIDUE,
                )
            )
            continue
        if s.real >= 0:
            raise UnstablePoleError(f"pole pair ({i_plus},{i_minus}) is unstable")
        stages.append(
            stage_from_pair(s.real, s.imag, r.real, r.imag, source=(i_plus, i_minus))
        )
    return FosterCircuit(stages=tuple(stages), dropped=tuple(dropped))


def q_factor(
    y_of_omega: Callable, omega_p: float, rel_step: float = 1e-6
) -> float:
    """Mode quality factor Q = (w/2) Im[Y'(w)] / Re[Y(w)] at w = omega_p.

    Y' is a central finite difference with relative step ``rel_step``.
    Re Y = 0 (lossless) returns math.inf; Re Y < 0 beyond rounding raises
    InvalidModeError.
    """
    y0 = complex(y_of_omega(omega_p))
    h = rel_step * abs(omega_p)
    dy = (complex(y_of_omega(omega_p + h)) - complex(y_of_omega(omega_p - h))) / (2 * h)
    re = y0.real
    scale = abs(y0) + abs(dy) * abs(omega_p)
    if re <= 0:
        if abs(re) <= 1e-12 * max(scale, 1e-300):
            return math.inf
        raise InvalidModeError(f"Re Y({omega_p!r}) = {re!r} <= 0")
    return 0.5 * omega_p * dy.imag / re
