"""Pole/residue impedance models, rational-function form, and the
positive-real (PR) property check.

Unit conventions used throughout the package
--------------------------------------------
* The Laplace variable ``s`` is in rad/ns (= 1e9 rad/s).  A frequency of
  ``f`` GHz corresponds to ``s = 1j * 2*pi * f``.
* Impedances are in ohms, inductances in nH (``Z_L = s*L``), capacitances
  in nF (``Y_C = s*C``).
* ``PoleResidueModel.poles`` stores the *listing* value ``s_k / (2*pi)`` in
  GHz; the actual complex frequency is ``2*pi*poles[k]`` (see
  :meth:`PoleResidueModel.poles_rad`).  Residues, ``d`` and ``e`` are stored
  directly in internal units (ohm * rad/ns, ohm, ohm * ns) so that

      Z(s) = sum_k residues[k] / (s - 2*pi*poles[k]) + d + e*s

  is in ohms.  This matches the JSON schema with ``freq_unit = "GHz_2pi"``
  and keeps file round-trips exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from mpmath import mp, mpf

from ._poly import (
    even_part,
    horner_np,
    padd,
    pderiv,
    peval,
    peval_real,
    pmul,
    pscale,
    to_float_array,
)

TWO_PI = 2.0 * math.pi

DEFAULT_PRECISION_BITS = 256

__all__ = [
    "TWO_PI",
    "DEFAULT_PRECISION_BITS",
    "PoleResidueModel",
    "RationalFunction",
    "ScanSpec",
    "PrViolationKind",
    "PrViolation",
    "PrReport",
    "EvaluationAtPoleError",
    "ModelInvariantError",
    "evaluate",
    "evaluate_derivative",
    "to_rational",
    "from_rational",
    "check_pr",
]


class ModelInvariantError(ValueError):
    """The pole/residue data violates a structural invariant."""


class EvaluationAtPoleError(ValueError):
    """Impedance evaluation requested exactly at a model pole."""

    def __init__(self, pole_index: int):
        self.pole_index = pole_index
        super().__init__(f"evaluation at pole index {pole_index}")


@dataclass(frozen=True)
class PoleResidueModel:
    """Partial-fraction impedance Z(s) = sum R_k/(s - s_k) + d + e*s.

    ``poles`` holds s_k/(2*pi) in GHz; everything else is in internal units
    (see module docstring).  Poles must be simple and either real or in
    conjugate pairs with conjugate residues.
    """

    poles: tuple
    residues: tuple
    d: float
    e: float = 0.0

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        residues = tuple(complex(r) for r in self.residues)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        if len(poles) != len(residues):
            raise ModelInvariantError("pole and residue counts differ")
        if self.e < 0:
            raise ModelInvariantError("super-linear coefficient e must be >= 0")
        scale = max([abs(p) for p in poles], default=1.0) or 1.0
        for i, p in enumerate(poles):
            for j in range(i + 1, len(poles)):
                if abs(p - poles[j]) <= 1e-12 * scale:
                    raise ModelInvariantError(
                        f"poles {i} and {j} coincide (simple poles required)"
                    )
        self._check_pairing()

    def _check_pairing(self):
        unmatched = {}
        for i, (p, r) in enumerate(zip(self.poles, self.residues)):
            if p.imag == 0.0:
                if r.imag != 0.0:
                    raise ModelInvariantError(
                        f"real pole {i} carries a complex residue"
                    )
                continue
            key = (p.real, abs(p.imag))
            if key in unmatched:
                j, pj, rj = unmatched.pop(key)
                if pj != p.conjugate() or rj != r.conjugate():
                    raise ModelInvariantError(
                        f"poles {j} and {i} are not an exact conjugate pair"
                    )
            else:
                unmatched[key] = (i, p, r)
        if unmatched:
            i = next(iter(unmatched.values()))[0]
            raise ModelInvariantError(f"complex pole {i} has no conjugate partner")

    # -- structure helpers -------------------------------------------------

    @property
    def num_poles(self) -> int:
        return len(self.poles)

    def poles_rad(self) -> tuple:
        """Actual complex pole frequencies in rad/ns."""
        return tuple(TWO_PI * p for p in self.poles)

    def conjugate_pairs(self):
        """Return (pairs, reals): pairs as (i_plus, i_minus) index tuples with
        Im s > 0 first, reals as bare indices."""
        pairs, reals, used = [], [], set()
        for i, p in enumerate(self.poles):
            if i in used:
                continue
            if p.imag == 0.0:
                reals.append(i)
                continue
            for j in range(i + 1, len(self.poles)):
                if j not in used and self.poles[j] == p.conjugate():
                    used.update((i, j))
                    pairs.append((i, j) if p.imag > 0 else (j, i))
                    break
        return pairs, reals


def evaluate(model: PoleResidueModel, s):
    """Evaluate Z(s) for complex scalar or ndarray s (rad/ns) -> ohms."""
    poles = np.asarray(model.poles_rad(), dtype=complex)
    res = np.asarray(model.residues, dtype=complex)
    s_arr = np.asarray(s, dtype=complex)
    if poles.size:
        dist = np.abs(s_arr[..., None] - poles)
        tol = 1e-15 * (np.abs(s_arr[..., None]) + np.abs(poles) + 1.0)
        hits = dist <= tol
        if hits.any():
            raise EvaluationAtPoleError(int(np.argwhere(hits)[0][-1]))
        z = (res / (s_arr[..., None] - poles)).sum(axis=-1)
    else:
        z = np.zeros_like(s_arr)
    z = z + model.d + model.e * s_arr
    return complex(z) if np.isscalar(s) or s_arr.ndim == 0 else z


def evaluate_derivative(model: PoleResidueModel, s):
    """dZ/ds at complex s (analytic)."""
    poles = np.asarray(model.poles_rad(), dtype=complex)
    res = np.asarray(model.residues, dtype=complex)
    s_arr = np.asarray(s, dtype=complex)
    if poles.size:
        dz = (-res / (s_arr[..., None] - poles) ** 2).sum(axis=-1)
    else:
        dz = np.zeros_like(s_arr)
    dz = dz + model.e
    return complex(dz) if np.isscalar(s) or s_arr.ndim == 0 else dz


@dataclass(frozen=True)
class RationalFunction:
    """Real-coefficient rational function n(s)/d(s), coefficients ascending,
    stored as mpmath mpf with the denominator monic."""

    num: tuple
    den: tuple

    @staticmethod
    def from_coeffs(num: Sequence, den: Sequence) -> "RationalFunction":
        num = [mpf(c) if not isinstance(c, mpf) else c for c in num]
        den = [mpf(c) if not isinstance(c, mpf) else c for c in den]
        while len(den) > 1 and den[-1] == 0:
            den.pop()
        while len(num) > 1 and num[-1] == 0:
            num.pop()
        lead = den[-1]
        if lead == 0:
            raise ZeroDivisionError("zero denominator polynomial")
        return RationalFunction(
            tuple(c / lead for c in num), tuple(c / lead for c in den)
        )

    @property
    def degree(self) -> tuple:
        return len(self.num) - 1, len(self.den) - 1

    def eval_mp(self, s):
        return peval(self.num, s) / peval(self.den, s)

    def eval_complex(self, s):
        nf = to_float_array(self.num)
        df = to_float_array(self.den)
        sc = max(np.abs(nf).max(), np.abs(df).max(), 1e-300)
        s_arr = np.asarray(s, dtype=complex)
        val = horner_np(nf / sc, s_arr) / horner_np(df / sc, s_arr)
        return complex(val) if np.isscalar(s) or s_arr.ndim == 0 else val

    def as_float_coeffs(self):
        return to_float_array(self.num), to_float_array(self.den)


def to_rational(
    model: PoleResidueModel, precision_bits: int = DEFAULT_PRECISION_BITS
) -> RationalFunction:
    """Combine the partial fractions over a common denominator.

    Conjugate pairs are merged into real quadratic factors first, so all
    coefficients are exactly real; degree(den) equals the number of poles.
    """
    with mp.workprec(precision_bits):
        terms = []
        pairs, reals = model.conjugate_pairs()
        for i in reals:
            p = mpf(TWO_PI) * mpf(model.poles[i].real)
            r = mpf(model.residues[i].real)
            terms.append(([r], [-p, mpf(1)]))
        for i, _ in pairs:
            xi = mpf(TWO_PI) * mpf(model.poles[i].real)
            om = mpf(TWO_PI) * mpf(model.poles[i].imag)
            a = mpf(model.residues[i].real)
            b = mpf(model.residues[i].imag)
            terms.append(
                (
                    [-2 * (a * xi + b * om), 2 * a],
                    [xi * xi + om * om, -2 * xi, mpf(1)],
                )
            )
        num, den = [mpf(model.d)], [mpf(1)]
        if model.e:
            num = padd(num, [mpf(0), mpf(model.e)])
        for tn, td in terms:
            num = padd(pmul(num, td), pmul(tn, den))
            den = pmul(den, td)
        return RationalFunction.from_coeffs(num, den)


def from_rational(
    rf: RationalFunction, precision_bits: int = DEFAULT_PRECISION_BITS
) -> PoleResidueModel:
    """Exact partial-fraction decomposition of a strictly-proper-or-equal
    rational function back into a pole/residue model (simple poles only)."""
    with mp.workprec(precision_bits):
        degn, degd = rf.degree
        if degn > degd + 1:
            raise ModelInvariantError("numerator degree exceeds denominator + 1")
        nf, df = rf.as_float_coeffs()
        roots = np.roots(df[::-1] / df[-1])
        dd = pderiv(list(rf.den))
        poles, residues = [], []
        with mp.workprec(precision_bits + 64):
            for r0 in roots:
                r = mp.mpc(r0)
                for _ in range(64):  # Newton polish of the double-precision seed
                    fv = peval(rf.den, r)
                    dv = peval(dd, r)
                    if dv == 0:
                        break
                    step = fv / dv
                    r -= step
                    if abs(step) <= mpf("1e-60") * (1 + abs(r)):
                        break
                res = peval(rf.num, r) / peval(dd, r)
                poles.append(complex(r) / TWO_PI)
                residues.append(complex(res))
        d = e = 0.0
        if degn == degd + 1:
            e = float(rf.num[-1] / rf.den[-1])
        if degn >= degd:
            # constant term: limit of Z - e*s at infinity
            rem = padd(list(rf.num), pscale([mpf(0)] + list(rf.den), -mpf(e)))
            if len(rem) > degd + 1:
                rem = rem[: degd + 1]
            d = float(rem[-1] / rf.den[-1]) if len(rem) == degd + 1 else 0.0
        poles, residues = _symmetrize_pairs(poles, residues)
        return PoleResidueModel(tuple(poles), tuple(residues), d, e)


def _symmetrize_pairs(poles, residues, tol=1e-8):
    """Force exact conjugate structure on numerically-paired roots."""
    out_p, out_r, used = [], [], set()
    scale = max([abs(p) for p in poles], default=1.0) or 1.0
    for i, p in enumerate(poles):
        if i in used:
            continue
        if abs(p.imag) <= tol * max(abs(p), 1e-30):
            out_p.append(complex(p.real, 0.0))
            out_r.append(complex(residues[i].real, 0.0))
            used.add(i)
            continue
        partner = None
        for j in range(i + 1, len(poles)):
            if j in used:
                continue
            if abs(poles[j] - p.conjugate()) <= tol * scale:
                partner = j
                break
        if partner is None:
            raise ModelInvariantError("unpaired complex root in decomposition")
        used.update((i, partner))
        pp = complex(p.real / 2 + poles[partner].real / 2,
                     (p.imag - poles[partner].imag) / 2)
        rr = complex(
            (residues[i].real + residues[partner].real) / 2,
            (residues[i].imag - residues[partner].imag) / 2,
        )
        out_p.extend([pp, pp.conjugate()])
        out_r.extend([rr, rr.conjugate()])
    return out_p, out_r


# ---------------------------------------------------------------------------
# PR checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanSpec:
    """Frequency grid for Re Z minimization: log-spaced points plus
    golden-section refinement of every local minimum."""

    f_lo_ghz: float = 0.01
    f_hi_ghz: float = 100.0
    points: int = 20000
    refine_rel_width: float = 1e-12

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("scan grid needs at least 2 points")
        if not (0 < self.f_lo_ghz < self.f_hi_ghz):
            raise ValueError("scan band must satisfy 0 < f_lo < f_hi")

    def omegas(self):
        return TWO_PI * np.logspace(
            math.log10(self.f_lo_ghz), math.log10(self.f_hi_ghz), self.points
        )


class PrViolationKind(Enum):
    RHP_POLE = "RHP_POLE"
    JAXIS_RESIDUE = "JAXIS_RESIDUE"
    NEGATIVE_REAL_PART = "NEGATIVE_REAL_PART"
    NON_SIMPLE_POLE = "NON_SIMPLE_POLE"


@dataclass(frozen=True)
class PrViolation:
    kind: PrViolationKind
    location: complex
    magnitude: float


@dataclass(frozen=True)
class PrReport:
    is_pr: bool
    violations: tuple
    min_re_z: float = math.nan
    min_re_z_omega: float = math.nan

    def __post_init__(self):
        assert self.is_pr == (len(self.violations) == 0)


def check_pr(
    model: PoleResidueModel,
    scan: ScanSpec | None = None,
    jaxis_rel_tol: float = 1e-6,
    re_rel_tol: float = 1e-5,
    re_abs_tol: float = 1e-9,
) -> PrReport:
    """Classify the model against the positive-real conditions.

    Checks: right-half-plane poles, j-axis poles with non-positive-real
    residues, non-simple poles, and the global minimum of Re Z(jw) over the
    scan grid with golden-section refinement plus the analytic w=0 and
    w->inf limits.  A minimum below ``-(re_rel_tol*|Z| + re_abs_tol)`` is a
    NEGATIVE_REAL_PART violation; the relative term absorbs the noise floor
    of finitely-printed fit data.
    """
    if scan is None:
        scan = ScanSpec()
    violations = []
    poles_rad = model.poles_rad()
    scale_floor = TWO_PI * scan.f_lo_ghz
    jaxis = []
    for i, p in enumerate(poles_rad):
        axis_scale = max(abs(p.imag), scale_floor)
        if p.real > jaxis_rel_tol * axis_scale:
            violations.append(
                PrViolation(PrViolationKind.RHP_POLE, p, float(p.real))
            )
        elif abs(p.real) <= jaxis_rel_tol * axis_scale:
            jaxis.append(i)
    for i in jaxis:
        r = model.residues[i]
        if r.real <= 0 or abs(r.imag) > 1e-9 * abs(r):
            violations.append(
                PrViolation(
                    PrViolationKind.JAXIS_RESIDUE,
                    poles_rad[i],
                    float(abs(r.imag) if r.real > 0 else abs(r)),
                )
            )
    scale = max([abs(p) for p in poles_rad], default=1.0) or 1.0
    for i in range(len(poles_rad)):
        for j in range(i + 1, len(poles_rad)):
            if abs(poles_rad[i] - poles_rad[j]) <= 1e-9 * scale:
                violations.append(
                    PrViolation(
                        PrViolationKind.NON_SIMPLE_POLE,
                        poles_rad[i],
                        float(abs(poles_rad[i] - poles_rad[j])),
                    )
                )
    min_re, min_w = _min_re_on_axis(model, scan)
    z_at_min = abs(evaluate(model, 1j * min_w)) if math.isfinite(min_w) and min_w > 0 else abs(model.d)
    if min_re < -(re_rel_tol * z_at_min + re_abs_tol):
        violations.append(
            PrViolation(
                PrViolationKind.NEGATIVE_REAL_PART, 1j * min_w, float(-min_re)
            )
        )
    return PrReport(
        is_pr=not violations,
        violations=tuple(violations),
        min_re_z=float(min_re),
        min_re_z_omega=float(min_w),
    )


def _min_re_on_axis(model: PoleResidueModel, scan: ScanSpec):
    """Grid + refinement minimum of Re Z(jw), including w=0 and w=inf."""
    w = scan.omegas()
    poles = np.asarray(model.poles_rad(), dtype=complex)
    res = np.asarray(model.residues, dtype=complex)

    def re_z(wv):
        wv = np.asarray(wv, dtype=float)
        if poles.size:
            z = (res / (1j * wv[..., None] - poles)).sum(axis=-1)
        else:
            z = np.zeros_like(wv, dtype=complex)
        return (z + model.d).real  # e*s is purely imaginary on the axis

    vals = re_z(w)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    candidates = [
        i
        for i in range(1, len(w) - 1)
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]
    ]
    candidates.sort(key=lambda i: vals[i])
    best_val, best_w = math.inf, math.nan
    for i in candidates[:32]:
        lo, hi = w[i - 1], w[i + 1]
        vm, wm = _golden_min(lambda x: float(re_z(x)), lo, hi, scan.refine_rel_width)
        if vm < best_val:
            best_val, best_w = vm, wm
    # boundary values
    on_axis_pole = any(abs(p.real) < 1e-14 * max(abs(p), 1.0) for p in poles)
    if not on_axis_pole or all(p.imag != 0 or p.real != 0 for p in poles):
        try:
            z0 = float(evaluate(model, 0.0 + 0.0j).real)
            if z0 < best_val:
                best_val, best_w = z0, 0.0
        except EvaluationAtPoleError:
            pass
    zinf = model.d  # residues vanish; e*s stays imaginary on the axis
    if zinf < best_val:
        best_val, best_w = float(zinf), math.inf
    return best_val, best_w


def _golden_min(f, a, b, rel_width):
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_width * abs(b):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = f(d)
    wm = 0.5 * (a + b)
    return f(wm), wm
