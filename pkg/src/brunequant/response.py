"""Frequency responses of synthesized circuits, junction shunting, and
complex qubit-pole tracking.

Two independent ladder evaluations are provided for the coupled-inductor
stages: the T-equivalent recursion and the two-port constitutive relations;
they agree to rounding and cross-check each other in the tests.  Pole
finding is Newton iteration on the total admittance with an analytic
derivative (pole/residue differentiation for models, dual-number arithmetic
for ladders), with a Muller fallback on stall.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from mpmath import mp, mpc

from .brune import BruneCircuit, BruneStage, PreambleElement, PreambleKind
from .foster import FosterCircuit
from .ratmodel import (
    TWO_PI,
    PoleResidueModel,
    evaluate,
    evaluate_derivative,
)

__all__ = [
    "QubitPole",
    "SweepRow",
    "PoleSearchError",
    "CavityPoleWarning",
    "ladder_impedance",
    "shunted_response",
    "find_qubit_pole",
    "sweep_lj",
    "impedance_function",
]


class PoleSearchError(RuntimeError):
    """Root search failed to converge; carries the iterate trajectory."""

    def __init__(self, message, trajectory=()):
        super().__init__(message)
        self.trajectory = tuple(trajectory)


class CavityPoleWarning(UserWarning):
    """The converged pole sits within 50 MHz of a known cavity resonance."""


@dataclass(frozen=True)
class QubitPole:
    """Complex admittance zero s = xi + j*omega with derived quantities.

    Q = omega/|xi| and T1 = 1/|xi| (ns); xi < 0 for passive networks.
    """

    s: complex

    @property
    def xi(self) -> float:
        return self.s.real

    @property
    def omega(self) -> float:
        return self.s.imag

    @property
    def f_ghz(self) -> float:
        return self.s.imag / TWO_PI

    @property
    def q_factor(self) -> float:
        return abs(self.s.imag) / abs(self.s.real) if self.s.real else math.inf

    @property
    def t1_ns(self) -> float:
        return 1.0 / abs(self.s.real) if self.s.real else math.inf


@dataclass(frozen=True)
class SweepRow:
    lj: float
    pole: QubitPole
    branch_jump: bool = False


class _Dual:
    """Complex dual number a + eps*b for forward-mode derivatives."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0.0):
        self.a = complex(a)
        self.b = complex(b)

    def __add__(self, o):
        o = o if isinstance(o, _Dual) else _Dual(o)
        return _Dual(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, o):
        o = o if isinstance(o, _Dual) else _Dual(o)
        return _Dual(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return _Dual(o) - self

    def __mul__(self, o):
        o = o if isinstance(o, _Dual) else _Dual(o)
        return _Dual(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = o if isinstance(o, _Dual) else _Dual(o)
        return _Dual(self.a / o.a, (self.b * o.a - self.a * o.b) / (o.a * o.a))

    def __rtruediv__(self, o):
        return _Dual(o) / self

    def __neg__(self):
        return _Dual(-self.a, -self.b)


def _stage_z_t(stage: BruneStage, s, z_next):
    """Fold one stage onto z_next using the T-equivalent."""
    if stage.degenerate:
        if stage.inductive:
            return stage.R + 1 / (1 / (s * stage.L_shunt) + 1 / z_next)
        return stage.R + 1 / (s * stage.C + 1 / z_next)
    if stage.t_triple is not None:
        l1, l2, l3 = stage.t_triple
    else:
        l1, l2, l3 = stage.L11 - stage.M, stage.M, stage.L22 - stage.M
    zr = z_next + s * l3
    y = 1 / zr + 1 / (s * l2 + 1 / (s * stage.C))
    return 1 / y + s * l1 + stage.R


def _stage_z_coupled(stage: BruneStage, s, z_next):
    """Fold one stage using the coupled-inductor two-port relations.

    Windings: a from the input node A to the common node Y, b from the
    output node D to Y; C sits between Y and the return rail; z_next hangs
    off D.  Solving the 3x3 nodal system for the input current gives the
    stage impedance.
    """
    if stage.degenerate:
        return _stage_z_t(stage, s, z_next)
    l11, l22, m = stage.L11, stage.L22, stage.M
    c = stage.C
    # unknowns (V_Y, V_D, I2) with V_A = 1, I1 eliminated:
    #   1 - V_Y = s L11 I1 + s M I2
    #   V_D - V_Y = s M I1 + s L22 I2
    #   I1 + I2 = s C V_Y
    #   I2 = -V_D / z_next
    # Solve linearly for I1.
    one = 1.0 if not isinstance(s, _Dual) else _Dual(1.0)
    sm = s * m
    sl11 = s * l11
    sl22 = s * l22
    sc = s * c
    # Unit drive V_A = 1.  With I1 = sC V_Y - I2 (KCL at Y) and
    # V_D = -z_next I2 (KCL at D), the winding relations reduce to
    #   (1 + s^2 L11 C) V_Y + (sM - sL11) I2 = 1
    #   (1 + s^2 M  C) V_Y + (z_next + sL22 - sM) I2 = 0
    a11 = one + sl11 * sc
    a12 = sm - sl11
    a21 = one + sm * sc
    a22 = z_next + sl22 - sm
    det = a11 * a22 - a12 * a21
    v_y = a22 / det
    i2 = -(a21 / det)
    i1 = sc * v_y - i2
    return one / i1 + stage.R


def _preamble_fold(elem: PreambleElement, s, z):
    k = elem.kind
    if k is PreambleKind.SERIES_L:
        return z + s * elem.L
    if k is PreambleKind.SERIES_C:
        return z + 1 / (s * elem.C)
    if k is PreambleKind.SERIES_PARALLEL_LC:
        return z + 1 / (s * elem.C + 1 / (s * elem.L))
    if k is PreambleKind.SHUNT_C:
        return 1 / (1 / z + s * elem.C)
    if k is PreambleKind.SHUNT_L:
        return 1 / (1 / z + 1 / (s * elem.L))
    if k is PreambleKind.SHUNT_SERIES_LC:
        return 1 / (1 / z + 1 / (s * elem.L + 1 / (s * elem.C)))
    raise ValueError(f"unknown preamble element {k}")


def ladder_impedance(circuit, s, method: str = "t"):
    """Impedance of a synthesized circuit at complex s (rad/ns).

    ``method`` selects "t" (T-equivalent recursion) or "coupled" (two-port
    solve) for Brune stages.  Works on complex, mpmath mpc, or dual-number
    inputs; Foster circuits sum their parallel-RLC stage impedances.
    """
    if isinstance(circuit, FosterCircuit):
        z = 0.0 * s if isinstance(s, _Dual) else 0.0
        for st in circuit.stages:
            z = z + 1 / (1 / st.R + 1 / (s * st.L) + s * st.C)
        return z
    if not isinstance(circuit, BruneCircuit):
        raise TypeError("expected a BruneCircuit or FosterCircuit")
    fold = _stage_z_t if method == "t" else _stage_z_coupled
    if method not in ("t", "coupled"):
        raise ValueError("method must be 't' or 'coupled'")
    z = circuit.r_terminal + 0.0 * s if isinstance(s, _Dual) else circuit.r_terminal
    for stage in reversed(circuit.stages):
        z = fold(stage, s, z)
    for elem in reversed(circuit.preamble):
        z = _preamble_fold(elem, s, z)
    return z


def impedance_function(obj) -> Callable:
    """Uniform impedance callable for a model, circuit, or plain callable."""
    if isinstance(obj, PoleResidueModel):
        return lambda s: evaluate(obj, s)
    if isinstance(obj, (BruneCircuit, FosterCircuit)):
        return lambda s: ladder_impedance(obj, s)
    if callable(obj):
        return obj
    raise TypeError(f"cannot interpret {type(obj).__name__} as an impedance")


def shunted_response(obj, lj: float, s):
    """Total admittance 1/(s L_J) + 1/Z(s) of the junction-shunted network."""
    if lj <= 0:
        raise ValueError("junction inductance must be positive")
    z = impedance_function(obj)(s)
    return 1.0 / (s * lj) + 1.0 / z


def _y_and_dy(obj, lj: float, s: complex):
    """Total admittance and its s-derivative at a complex point."""
    if isinstance(obj, PoleResidueModel):
        z = evaluate(obj, s)
        dz = evaluate_derivative(obj, s)
        y = 1 / (s * lj) + 1 / z
        dy = -1 / (s * s * lj) - dz / (z * z)
        return y, dy
    if isinstance(obj, (BruneCircuit, FosterCircuit)):
        zd = ladder_impedance(obj, _Dual(s, 1.0))
        y = 1 / (s * lj) + 1 / zd.a
        dy = -1 / (s * s * lj) - zd.b / (zd.a * zd.a)
        return y, dy
    fn = impedance_function(obj)
    h = 1e-7 * max(abs(s), 1.0)
    z = fn(s)
    dz = (fn(s + h) - fn(s - h)) / (2 * h)
    y = 1 / (s * lj) + 1 / z
    dy = -1 / (s * s * lj) - dz / (z * z)
    return y, dy


def find_qubit_pole(
    obj,
    lj: float,
    f_guess_ghz: Optional[float] = None,
    rel_tol: float = 1e-12,
    max_iter: int = 100,
    known_cavity_freqs_ghz: Sequence[float] = (),
    band_ghz: tuple = (3.0, 15.0),
) -> QubitPole:
    """Locate the complex zero of the shunted admittance near the seed.

    Without an explicit seed, candidate resonances are found from sign
    changes of Im Y on the band and the junction-dominated one is selected
    (largest frequency shift under a small L_J perturbation).  A converged
    pole within 50 MHz of any entry of ``known_cavity_freqs_ghz`` raises a
    CavityPoleWarning.
    """
    if f_guess_ghz is None:
        pole = _auto_qubit_pole(obj, lj, band_ghz, rel_tol, max_iter)
    else:
        s = _newton_pole(obj, lj, 1j * TWO_PI * f_guess_ghz, rel_tol, max_iter)
        pole = QubitPole(s)
    for fc in known_cavity_freqs_ghz:
        if abs(abs(pole.f_ghz) - fc) < 0.050:
            warnings.warn(
                "converged pole at %.4f GHz lies within 50 MHz of the cavity "
                "resonance at %.4f GHz; it may be mislabeled" % (pole.f_ghz, fc),
                CavityPoleWarning,
                stacklevel=2,
            )
    return pole


def _newton_pole(obj, lj, s0: complex, rel_tol: float, max_iter: int) -> complex:
    s = complex(s0)
    trajectory = [s]
    prev_abs = math.inf
    stall = 0
    for _ in range(max_iter):
        y, dy = _y_and_dy(obj, lj, s)
        if dy == 0:
            break
        step = y / dy
        s = s - step
        trajectory.append(s)
        if abs(step) < rel_tol * abs(s):
            return s
        ay = abs(y)
        stall = stall + 1 if ay >= 0.5 * prev_abs else 0
        prev_abs = ay
        if stall >= 8:
            break
    # Muller fallback on stall or exhaustion
    s = _muller_pole(obj, lj, trajectory[-1], rel_tol, max_iter, trajectory)
    return s


def _muller_pole(obj, lj, s0, rel_tol, max_iter, trajectory):
    h = 1e-4 * max(abs(s0), 1.0)
    pts = [s0 - h, s0 + 1j * h, s0]
    fs = [_y_and_dy(obj, lj, p)[0] for p in pts]
    for _ in range(max_iter):
        p0, p1, p2 = pts[-3:]
        f0, f1, f2 = fs[-3:]
        h1, h2 = p1 - p0, p2 - p1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        rad = cmath.sqrt(b * b - 4 * f2 * a) if a != 0 else 0.0
        den1, den2 = b + rad, b - rad
        den = den1 if abs(den1) >= abs(den2) else den2
        if den == 0:
            raise PoleSearchError("Muller fallback degenerated", trajectory)
        step = -2 * f2 / den
        p3 = p2 + step
        pts.append(p3)
        fs.append(_y_and_dy(obj, lj, p3)[0])
        trajectory.append(p3)
        if abs(step) < rel_tol * abs(p3):
            return p3
    raise PoleSearchError(
        "pole search failed to converge in %d iterations" % max_iter, trajectory
    )


def _auto_qubit_pole(obj, lj, band_ghz, rel_tol, max_iter) -> QubitPole:
    import numpy as np

    fn = impedance_function(obj)
    f = np.linspace(band_ghz[0], band_ghz[1], 2001)
    w = TWO_PI * f
    y = np.array([1 / (1j * wi * lj) + 1 / fn(1j * wi) for wi in w])
    sign = np.sign(y.imag)
    crossings = [i for i in range(len(w) - 1) if sign[i] < 0 <= sign[i + 1]]
    if not crossings:
        crossings = list(np.argsort(np.abs(y))[:3])
    candidates = []
    for i in crossings[:8]:
        try:
            s = _newton_pole(obj, lj, 1j * w[i], rel_tol, max_iter)
        except PoleSearchError:
            continue
        if s.imag < 0:
            s = s.conjugate()
        if not any(abs(s - c) < 1e-6 * abs(s) for c in candidates):
            candidates.append(s)
    if not candidates:
        raise PoleSearchError("no admittance zero found in the band")
    # junction participation: frequency sensitivity to L_J
    best, best_part = None, -1.0
    for s in candidates:
        part = _junction_participation(obj, lj, s, rel_tol, max_iter)
        if part > best_part:
            best, best_part = s, part
    return QubitPole(best)


def _junction_participation(obj, lj, s, rel_tol, max_iter):
    eps = 1e-3
    try:
        up = _newton_pole(obj, lj * (1 + eps), s, rel_tol, max_iter)
        dn = _newton_pole(obj, lj * (1 - eps), s, rel_tol, max_iter)
    except PoleSearchError:
        return -math.inf
    return abs((up - dn).imag) / (2 * eps) / max(abs(s.imag), 1e-30)


def sweep_lj(
    obj,
    lj_values: Iterable[float],
    f_guess_ghz: Optional[float] = None,
    rel_tol: float = 1e-12,
    max_iter: int = 100,
    branch_jump_ghz: float = 0.5,
) -> list:
    """Track the qubit pole across a sorted junction-inductance sweep.

    Each solve is seeded by the previous pole (continuation); the first
    point uses ``f_guess_ghz`` or the automatic junction-dominated-pole
    selection.  Rows where the frequency jumps by more than
    ``branch_jump_ghz`` between adjacent points are flagged.
    """
    lj_list = list(lj_values)
    if not lj_list:
        raise ValueError("sweep needs at least one inductance value")
    diffs = [lj_list[i + 1] - lj_list[i] for i in range(len(lj_list) - 1)]
    if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise ValueError("sweep inductances must be sorted")
    rows = []
    seed = None
    for lj in lj_list:
        if seed is None:
            pole = find_qubit_pole(obj, lj, f_guess_ghz, rel_tol, max_iter)
        else:
            s = _newton_pole(obj, lj, seed, rel_tol, max_iter)
            pole = QubitPole(s)
        jump = bool(rows) and abs(pole.f_ghz - rows[-1].pole.f_ghz) > branch_jump_ghz
        rows.append(SweepRow(lj=float(lj), pole=pole, branch_jump=jump))
        seed = pole.s
    return rows


def ladder_impedance_mp(circuit, s, precision_bits: int = 256):
    """Extended-precision ladder evaluation (T-equivalent path)."""
    with mp.workprec(precision_bits):
        return ladder_impedance(circuit, mpc(s))
