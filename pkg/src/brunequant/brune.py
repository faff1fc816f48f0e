"""Exact lumped-circuit synthesis of a positive-real impedance.

The cascade alternates a series resistor with a tightly coupled inductor
pair and stage capacitor; each extraction lowers both polynomial degrees by
two.  When the minimum of Re Z(jw) sits at w = inf the stage degenerates to
a series R / shunt C pair (degrees drop by one); at w = 0 the dual
(series R / shunt L) is produced and flagged, since no Hamiltonian recipe
exists for it downstream.

All polynomial work runs in extended precision (default 256-bit mantissa);
element values are rounded to double only when stored on the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from mpmath import mp, mpc, mpf

from ._poly import (
    CancellationError,
    drop_top,
    even_part,
    horner_np,
    padd,
    pderiv,
    pdivmod,
    peval,
    peval_real,
    pmul_s,
    pscale,
    to_float_array,
)
from .ratmodel import (
    DEFAULT_PRECISION_BITS,
    TWO_PI,
    PoleResidueModel,
    RationalFunction,
    ScanSpec,
    to_rational,
)

__all__ = [
    "BruneStage",
    "PreambleKind",
    "PreambleElement",
    "BruneCircuit",
    "SynthesisState",
    "SynthesisOptions",
    "ExtractionRecord",
    "NotPositiveRealError",
    "ConditioningError",
    "SynthesisDivergenceError",
    "remove_jaxis_poles",
    "find_min_real_part",
    "extract_stage",
    "extract_degenerate_stage",
    "synthesize",
]


class NotPositiveRealError(ValueError):
    """Input impedance violates the positive-real conditions."""


class ConditioningError(ArithmeticError):
    """Mid-synthesis failure (remainder PR screen or cancellation); carries
    the extraction log for diagnosis."""

    def __init__(self, message, log=()):
        super().__init__(message)
        self.log = tuple(log)


class SynthesisDivergenceError(ConditioningError):
    """Stage count exceeded the iteration cap."""


@dataclass(frozen=True)
class BruneStage:
    """One cascade stage.

    Non-degenerate stages store the coupled-inductor values (L11, L22, M,
    t = sqrt(L11/L22)) plus the raw T-triple (L1, L2, L3), where L1 or L3
    may be negative.  Capacitive degenerate stages carry R and C only;
    inductive-degenerate ones carry R and a shunt inductance.
    """

    R: float
    C: float
    L11: float = 0.0
    L22: float = 0.0
    M: float = 0.0
    t: float = 0.0
    degenerate: bool = False
    inductive: bool = False
    L_shunt: Optional[float] = None
    t_triple: Optional[tuple] = None

    def __post_init__(self):
        if self.degenerate:
            if self.inductive:
                if self.L_shunt is None or self.L_shunt <= 0:
                    raise ValueError("inductive-degenerate stage needs L_shunt > 0")
            elif self.C <= 0:
                raise ValueError("degenerate stage needs C > 0")
            if self.L11 or self.L22 or self.M or self.t:
                raise ValueError("degenerate stage must carry no coupled inductor")
        else:
            if min(self.L11, self.L22, self.C) <= 0:
                raise ValueError("stage L11, L22, C must be positive")
            if abs(self.M - math.sqrt(self.L11 * self.L22)) > 1e-9 * self.M:
                raise ValueError("coupling is not tight: M != sqrt(L11*L22)")
            if self.t_triple is not None:
                l1, l2, l3 = self.t_triple
                if l2 <= 0:
                    raise ValueError("T-triple requires L2 > 0")
                if abs(l3 + l1 * l2 / (l1 + l2)) > 1e-6 * max(abs(l3), 1e-300):
                    raise ValueError("T-triple inconsistent with tight coupling")


class PreambleKind(Enum):
    SERIES_PARALLEL_LC = "SERIES_PARALLEL_LC"
    SHUNT_SERIES_LC = "SHUNT_SERIES_LC"
    SERIES_L = "SERIES_L"
    SERIES_C = "SERIES_C"
    SHUNT_L = "SHUNT_L"
    SHUNT_C = "SHUNT_C"


@dataclass(frozen=True)
class PreambleElement:
    kind: PreambleKind
    L: Optional[float] = None
    C: Optional[float] = None
    omega0: Optional[float] = None


@dataclass(frozen=True)
class ExtractionRecord:
    kind: str  # "stage" | "degenerate" | "inductive_degenerate"
    omega1: float
    r1: float
    deg_before: tuple
    deg_after: tuple
    L1: Optional[float] = None
    L2: Optional[float] = None
    C2: Optional[float] = None
    L3: Optional[float] = None
    residuals: tuple = ()


@dataclass(frozen=True)
class BruneCircuit:
    stages: tuple
    r_terminal: float
    preamble: tuple = ()
    log: tuple = ()
    notes: tuple = ()

    def __post_init__(self):
        if self.r_terminal < -1e-9:
            raise ValueError("terminal resistance must be non-negative")

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    @property
    def degenerate_indices(self) -> tuple:
        return tuple(i for i, st in enumerate(self.stages) if st.degenerate)


@dataclass
class SynthesisState:
    """Mutable remainder + log carried through the extraction loop."""

    z: RationalFunction
    log: list = field(default_factory=list)
    options: "SynthesisOptions" = None
    omega1: Optional[mpf] = None  # stashed by the dispatcher for the extractors
    r1: Optional[mpf] = None


@dataclass(frozen=True)
class SynthesisOptions:
    precision_bits: int = DEFAULT_PRECISION_BITS
    scan: ScanSpec = field(default_factory=ScanSpec)
    cancel_tol: float = 1e-10
    max_stages: int = 64
    jaxis_rel_tol: float = 1e-6
    force_preamble: bool = False
    force_preamble_rel_tol: float = 1e-3
    re_rel_tol: float = 1e-5
    re_abs_tol: float = 1e-9


# ---------------------------------------------------------------------------
# minimum of Re Z(jw) for a rational remainder
# ---------------------------------------------------------------------------


def _find_min_mp(z: RationalFunction, options: SynthesisOptions):
    """Return (kind, omega1, r1) in mp precision.

    kind is "interior", "zero" (w=0), "inf", or "constant".  The coarse
    scan runs in double on the even-part rational; every local minimum is
    re-refined with golden-section + Newton polish in extended precision,
    so double-precision noise near sharp resonances cannot fake a minimum.
    """
    degn, degd = z.degree
    if degn == 0 and degd == 0:
        return "constant", mpf(0), z.num[0] / z.den[0]
    p, q = even_part(list(z.num), list(z.den))
    scan = options.scan

    pf = to_float_array(p)
    qf = to_float_array(q)
    pf /= max(np.abs(pf).max(), 1e-300)
    qf /= max(np.abs(qf).max(), 1e-300)
    w = scan.omegas()
    x = -w * w
    vals = horner_np(pf, x) / horner_np(qf, x)
    vals = np.where(np.isfinite(vals), vals, np.inf)

    def re_mp(wv):
        xv = -wv * wv
        return peval_real(p, xv) / peval_real(q, xv)

    candidates = [
        i
        for i in range(1, len(w) - 1)
        if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]
    ]
    candidates.sort(key=lambda i: vals[i])
    gr = (mp.sqrt(5) - 1) / 2
    best_val, best_w = mp.inf, None
    dp, dq = pderiv(p), pderiv(q)
    for i in candidates[:32]:
        a, b = mpf(w[i - 1]), mpf(w[i + 1])
        c = b - gr * (b - a)
        d = a + gr * (b - a)
        fc, fd = re_mp(c), re_mp(d)
        while (b - a) > mpf(scan.refine_rel_width) * b:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - gr * (b - a)
                fc = re_mp(c)
            else:
                a, c, fc = c, d, fd
                d = a + gr * (b - a)
                fd = re_mp(d)
        wm = (a + b) / 2
        # Newton polish on d/dx [p/q] = 0, x = -w^2
        xv = -wm * wm
        for _ in range(6):
            h = peval_real(dp, xv) * peval_real(q, xv) - peval_real(p, xv) * peval_real(dq, xv)
            dh = (
                peval_real(pderiv(dp), xv) * peval_real(q, xv)
                - peval_real(p, xv) * peval_real(pderiv(dq), xv)
            )
            if dh == 0:
                break
            step = h / dh
            xv -= step
            if abs(step) <= mpf("1e-40") * (1 + abs(xv)):
                break
        if xv < 0:
            wn = mp.sqrt(-xv)
            if w[i - 1] * 0.5 <= wn <= w[i + 1] * 2.0 and re_mp(wn) <= re_mp(wm):
                wm = wn
        rm = re_mp(wm)
        if rm < best_val:
            best_val, best_w = rm, wm
    kind = "interior"
    # analytic boundaries
    if q[0] != 0:
        r0 = peval_real(p, mpf(0)) / peval_real(q, mpf(0))
        if r0 < best_val:
            best_val, best_w, kind = r0, mpf(0), "zero"
    if len(p) == len(q):
        rinf = p[-1] / q[-1]
    elif len(p) < len(q):
        rinf = mpf(0)
    else:
        rinf = mp.inf
    if rinf < best_val:
        best_val, best_w, kind = rinf, mp.inf, "inf"
    if best_w is None:
        raise ConditioningError("no minimum candidate found on the scan grid")
    return kind, best_w, best_val


def find_min_real_part(
    z: RationalFunction,
    scan: ScanSpec | None = None,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    re_rel_tol: float = 1e-5,
    re_abs_tol: float = 1e-9,
):
    """Global minimum of Re Z(jw): returns (omega1, r1) as floats.

    omega1 is math.inf when the minimum sits at w -> inf and 0.0 when at
    w = 0 (or when z is constant).  Raises NotPositiveRealError when the
    minimum is negative beyond tolerance.
    """
    options = SynthesisOptions(
        precision_bits=precision_bits,
        scan=scan or ScanSpec(),
        re_rel_tol=re_rel_tol,
        re_abs_tol=re_abs_tol,
    )
    with mp.workprec(precision_bits):
        kind, w1, r1 = _find_min_mp(z, options)
        _screen_min(z, kind, w1, r1, options)
        if kind == "inf":
            return math.inf, float(r1)
        return float(w1), float(r1)


def _screen_min(z, kind, w1, r1, options):
    if r1 >= 0:
        return
    if kind == "interior":
        zmag = abs(z.eval_mp(mpc(0, w1)))
    else:
        zmag = abs(r1)
    if -r1 > options.re_rel_tol * zmag + options.re_abs_tol:
        raise NotPositiveRealError(
            "min Re Z(jw) = %.3e at w = %s is negative beyond tolerance"
            % (float(r1), ("inf" if kind == "inf" else "%.6g" % float(w1)))
        )


# ---------------------------------------------------------------------------
# j-axis pole removal (preamble)
# ---------------------------------------------------------------------------


def remove_jaxis_poles(
    z: RationalFunction,
    tol: float = 1e-6,
    precision_bits: int = DEFAULT_PRECISION_BITS,
    omega_floor: float = TWO_PI * 0.01,
):
    """Strip j-axis poles of Z and of Y = 1/Z, returning
    (preamble elements, reduced function).

    Z-poles at +-jw0 become series parallel-LC blocks (L = 2r/w0^2,
    C = 1/(2r)); at s=0 a series capacitor; at infinity a series inductor.
    Y-poles become the dual shunt elements.  A j-axis pole whose residue is
    not positive real raises NotPositiveRealError.
    """
    elements = []
    with mp.workprec(precision_bits):
        zc = z
        for _ in range(2 * (sum(z.degree) + 2)):
            changed, zc = _strip_one_jaxis(zc, elements, tol, omega_floor)
            if not changed:
                break
        return elements, zc


def _poly_roots(coeffs):
    desc = [c for c in reversed(coeffs)]
    if len(desc) <= 1:
        return []
    return mp.polyroots(desc, maxsteps=200, extraprec=mp.prec // 2)


def _strip_one_jaxis(z, elements, tol, omega_floor):
    num, den = list(z.num), list(z.den)
    degn, degd = len(num) - 1, len(den) - 1
    cancel = mpf("1e-10")
    # poles at infinity
    if degn == degd + 1:
        L = num[-1] / den[-1]
        if L <= 0:
            raise NotPositiveRealError("pole of Z at infinity with e <= 0")
        num = drop_top(
            padd(num, pscale(pmul_s(den), -L)),
            abs(num[-1]) + abs(L * den[-1]),
            cancel,
            "series-L removal",
        )
        elements.append(PreambleElement(PreambleKind.SERIES_L, L=float(L)))
        return True, RationalFunction.from_coeffs(num, den)
    if degd == degn + 1:
        C = den[-1] / num[-1]
        if C <= 0:
            raise NotPositiveRealError("pole of Y at infinity with negative weight")
        den = drop_top(
            padd(den, pscale(pmul_s(num), -C)),
            abs(den[-1]) + abs(C * num[-1]),
            cancel,
            "shunt-C removal",
        )
        elements.append(PreambleElement(PreambleKind.SHUNT_C, C=float(C)))
        return True, RationalFunction.from_coeffs(num, den)
    if abs(degn - degd) > 1:
        raise NotPositiveRealError("degree gap exceeds one; not positive-real")
    # finite j-axis poles of Z, then of Y
    for which in ("Z", "Y"):
        poly = den if which == "Z" else num
        other = num if which == "Z" else den
        if len(poly) - 1 < 1:
            continue
        roots = _poly_roots(poly)
        dpoly = pderiv(poly)
        for r in roots:
            axis_scale = max(abs(r.imag), omega_floor)
            if abs(r.real) > tol * axis_scale:
                continue
            if abs(r.imag) <= tol * axis_scale:  # pole at s = 0
                rho = peval(other, mpc(0)) / peval(dpoly, mpc(0))
                rho_r = rho.real
                if rho_r <= 0 or abs(rho.imag) > 1e-9 * abs(rho):
                    raise NotPositiveRealError(
                        f"{which}-pole at s=0 has non-positive-real residue"
                    )
                qpoly, rem = pdivmod(poly, [mpf(0), mpf(1)])
                newother = padd(other, pscale(qpoly, -rho_r))
                newother, rem2 = pdivmod(newother, [mpf(0), mpf(1)])
                if which == "Z":
                    elements.append(
                        PreambleElement(PreambleKind.SERIES_C, C=float(1 / rho_r))
                    )
                    return True, RationalFunction.from_coeffs(newother, qpoly)
                elements.append(
                    PreambleElement(PreambleKind.SHUNT_L, L=float(1 / rho_r))
                )
                return True, RationalFunction.from_coeffs(qpoly, newother)
            if r.imag < 0:
                continue
            w0 = mpf(r.imag)
            rho = peval(other, mpc(0, w0)) / peval(dpoly, mpc(0, w0))
            rho_r = rho.real
            if rho_r <= 0 or abs(rho.imag) > 1e-6 * abs(rho):
                raise NotPositiveRealError(
                    f"{which}-pole at +-j{float(w0):.6g} has non-positive-real residue"
                )
            quad = [w0 * w0, mpf(0), mpf(1)]
            qpoly, rem = pdivmod(poly, quad)
            scale = sum(abs(c) * w0 ** i for i, c in enumerate(poly))
            if (abs(rem[0]) + abs(rem[1]) * w0) > cancel * scale:
                continue  # root was not accurately on the axis after all
            newother = padd(other, pscale(pmul_s(qpoly), -2 * rho_r))
            newother, rem2 = pdivmod(newother, quad)
            if which == "Z":
                elements.append(
                    PreambleElement(
                        PreambleKind.SERIES_PARALLEL_LC,
                        L=float(2 * rho_r / (w0 * w0)),
                        C=float(1 / (2 * rho_r)),
                        omega0=float(w0),
                    )
                )
                return True, RationalFunction.from_coeffs(newother, qpoly)
            elements.append(
                PreambleElement(
                    PreambleKind.SHUNT_SERIES_LC,
                    L=float(1 / (2 * rho_r)),
                    C=float(2 * rho_r / (w0 * w0)),
                    omega0=float(w0),
                )
            )
            return True, RationalFunction.from_coeffs(qpoly, newother)
    return False, z


# ---------------------------------------------------------------------------
# stage extraction
# ---------------------------------------------------------------------------


def extract_stage(state: SynthesisState):
    """One full extraction at a finite, nonzero minimum frequency.

    Computes R1 = Re Z(jw1), L1 = Im Z(jw1)/w1, splits off the shunt
    L2-C2 branch from the admittance pole at +-jw1, removes L3, and
    converts the T-triple to the tightly coupled pair.  Both degrees drop
    by exactly two, enforced through targeted leading-coefficient drops.
    """
    options = state.options or SynthesisOptions()
    cancel = mpf(options.cancel_tol)
    z = state.z
    num, den = list(z.num), list(z.den)
    deg_before = z.degree
    with mp.workprec(options.precision_bits):
        if state.omega1 is None:
            kind, w1, r1 = _find_min_mp(z, options)
            if kind != "interior":
                raise ConditioningError(
                    "extract_stage requires a finite nonzero minimum frequency",
                    state.log,
                )
            _screen_min(z, kind, w1, r1, options)
        else:
            w1 = state.omega1
        zj = z.eval_mp(mpc(0, w1))
        r1 = zj.real
        l1 = zj.imag / w1
        quad = [w1 * w1, mpf(0), mpf(1)]
        na = padd(padd(num, pscale(den, -r1)), pscale(pmul_s(den), -l1))
        nb, rem = pdivmod(na, quad)
        scale = sum(abs(c) * w1 ** i for i, c in enumerate(na))
        res_a = (abs(rem[0]) + abs(rem[1]) * w1) / scale
        if res_a > cancel:
            raise CancellationError(
                "admittance pole at jw1 fails to cancel (rel %.2e); degree "
                "reduction != 2" % float(res_a)
            )
        l2c = mpc(0, w1) * peval(nb, mpc(0, w1)) / peval(den, mpc(0, w1))
        l2 = l2c.real
        if l2 <= 0:
            raise ConditioningError(
                "shunt-branch inductance is non-positive; remainder not PR",
                state.log,
            )
        if abs(l2c.imag) > 1e-6 * abs(l2):
            raise ConditioningError(
                "admittance residue at jw1 is not real (rel imag %.2e)"
                % float(abs(l2c.imag) / abs(l2)),
                state.log,
            )
        c2 = 1 / (l2 * w1 * w1)
        d2 = padd(den, pscale(pmul_s(nb), -1 / l2))
        hh, rem2 = pdivmod(d2, quad)
        scale2 = sum(abs(c) * w1 ** i for i, c in enumerate(d2))
        res_b = (abs(rem2[0]) + abs(rem2[1]) * w1) / scale2
        if res_b > cancel:
            raise CancellationError(
                "remainder denominator fails quadratic division (rel %.2e)"
                % float(res_b)
            )
        if l1 + l2 <= 0:
            raise ConditioningError(
                "L1 + L2 <= 0: negative stage self-inductance", state.log
            )
        l3 = -l1 * l2 / (l1 + l2)
        n2 = drop_top(
            padd(nb, pscale(pmul_s(hh), -l3)),
            abs(nb[-1]) + abs(l3 * hh[-1]),
            cancel,
            "stage remainder numerator",
        )
        z2 = RationalFunction.from_coeffs(n2, hh)
        _screen_remainder(z2, state)
        l11, l22, mm = l1 + l2, l3 + l2, l2
        stage = BruneStage(
            R=float(r1),
            C=float(c2),
            L11=float(l11),
            L22=float(l22),
            M=float(mm),
            t=float(mp.sqrt(l11 / l22)),
            t_triple=(float(l1), float(l2), float(l3)),
        )
        record = ExtractionRecord(
            kind="stage",
            omega1=float(w1),
            r1=float(r1),
            deg_before=deg_before,
            deg_after=z2.degree,
            L1=float(l1),
            L2=float(l2),
            C2=float(c2),
            L3=float(l3),
            residuals=(float(res_a), float(res_b)),
        )
        new_state = SynthesisState(
            z=z2, log=state.log + [record], options=state.options
        )
        return stage, new_state


def extract_degenerate_stage(state: SynthesisState):
    """Extraction at w1 = inf: series R plus shunt C, degrees drop by one."""
    options = state.options or SynthesisOptions()
    cancel = mpf(options.cancel_tol)
    z = state.z
    num, den = list(z.num), list(z.den)
    deg_before = z.degree
    with mp.workprec(options.precision_bits):
        degn, degd = z.degree
        r1 = num[-1] / den[-1] if degn == degd else mpf(0)
        if degn == degd:
            npr = drop_top(
                padd(num, pscale(den, -r1)),
                abs(num[-1]) + abs(r1 * den[-1]),
                cancel,
                "degenerate numerator",
            )
        else:
            npr = num
        cval = den[-1] / npr[-1]
        if cval <= 0:
            raise NotPositiveRealError(
                "limit 1/(s(Z - R)) at infinity is non-positive"
            )
        d2 = drop_top(
            padd(den, pscale(pmul_s(npr), -cval)),
            abs(den[-1]) + abs(cval * npr[-1]),
            cancel,
            "degenerate denominator",
        )
        z2 = RationalFunction.from_coeffs(npr, d2)
        _screen_remainder(z2, state)
        stage = BruneStage(R=float(r1), C=float(cval), degenerate=True)
        record = ExtractionRecord(
            kind="degenerate",
            omega1=math.inf,
            r1=float(r1),
            deg_before=deg_before,
            deg_after=z2.degree,
            C2=float(cval),
        )
        return stage, SynthesisState(z=z2, log=state.log + [record], options=state.options)


def _extract_inductive_degenerate(state: SynthesisState):
    """Extraction at w1 = 0: series R plus shunt L (dual of the capacitive
    degenerate case).  Flagged; the quantization chain rejects it."""
    options = state.options or SynthesisOptions()
    cancel = mpf(options.cancel_tol)
    z = state.z
    num, den = list(z.num), list(z.den)
    deg_before = z.degree
    with mp.workprec(options.precision_bits):
        r1 = peval_real(num, mpf(0)) / peval_real(den, mpf(0))
        npr = padd(num, pscale(den, -r1))
        ntil, rem = pdivmod(npr, [mpf(0), mpf(1)])
        scale = sum(abs(c) for c in npr) or mpf(1)
        if abs(rem[0]) / scale > cancel:
            raise CancellationError(
                "Z - R does not vanish at s=0 (rel %.2e)" % float(abs(rem[0]) / scale)
            )
        g = peval_real(den, mpf(0)) / peval_real(ntil, mpf(0))
        if g <= 0:
            raise NotPositiveRealError("shunt inductance at w1=0 is non-positive")
        dd = padd(den, pscale(ntil, -g))
        d2, rem2 = pdivmod(dd, [mpf(0), mpf(1)])
        scale2 = sum(abs(c) for c in dd) or mpf(1)
        if abs(rem2[0]) / scale2 > cancel:
            raise CancellationError(
                "admittance residue at s=0 fails to cancel (rel %.2e)"
                % float(abs(rem2[0]) / scale2)
            )
        z2 = RationalFunction.from_coeffs(ntil, d2)
        _screen_remainder(z2, state)
        stage = BruneStage(
            R=float(r1), C=0.0, degenerate=True, inductive=True, L_shunt=float(1 / g)
        )
        record = ExtractionRecord(
            kind="inductive_degenerate",
            omega1=0.0,
            r1=float(r1),
            deg_before=deg_before,
            deg_after=z2.degree,
        )
        return stage, SynthesisState(z=z2, log=state.log + [record], options=state.options)


def _screen_remainder(z2: RationalFunction, state: SynthesisState):
    """Cheap PR screen: a positive-real remainder has Hurwitz numerator and
    denominator, whose coefficients cannot be significantly negative."""
    for name, coeffs in (("numerator", z2.num), ("denominator", z2.den)):
        mx = max(abs(c) for c in coeffs)
        if mx == 0:
            continue
        for c in coeffs:
            if c < -mpf("1e-6") * mx:
                raise ConditioningError(
                    f"remainder {name} has a significantly negative coefficient; "
                    "remainder failed the PR screen",
                    state.log if state else (),
                )


# ---------------------------------------------------------------------------
# full synthesis
# ---------------------------------------------------------------------------


def synthesize(
    model: PoleResidueModel, options: SynthesisOptions | None = None
) -> BruneCircuit:
    """Run preamble extraction plus the stage loop until the remainder is a
    constant resistance."""
    options = options or SynthesisOptions()
    notes = []
    with mp.workprec(options.precision_bits):
        z = to_rational(model, options.precision_bits)
        preamble_tol = (
            options.force_preamble_rel_tol
            if options.force_preamble
            else options.jaxis_rel_tol
        )
        near_axis = _near_axis_poles(model, options)
        if near_axis and not options.force_preamble:
            notes.append(
                "near-axis poles at indices %s kept in the cascade "
                "(force_preamble to extract them)" % (near_axis,)
            )
        preamble, z = remove_jaxis_poles(
            z,
            tol=preamble_tol,
            precision_bits=options.precision_bits,
            omega_floor=TWO_PI * options.scan.f_lo_ghz,
        )
        state = SynthesisState(z=z, options=options)
        stages = []
        while True:
            degn, degd = state.z.degree
            if degn == 0 and degd == 0:
                r_term = float(state.z.num[0] / state.z.den[0])
                break
            if len(stages) >= options.max_stages:
                raise SynthesisDivergenceError(
                    f"stage count exceeded the cap of {options.max_stages}",
                    state.log,
                )
            kind, w1, r1 = _find_min_mp(state.z, options)
            try:
                _screen_min(state.z, kind, w1, r1, options)
            except NotPositiveRealError as exc:
                raise ConditioningError(str(exc), state.log) from exc
            if kind == "constant":
                r_term = float(r1)
                break
            if kind == "inf":
                stage, state = extract_degenerate_stage(state)
            elif kind == "zero":
                stage, state = _extract_inductive_degenerate(state)
                notes.append(
                    "stage %d is inductive-degenerate (w1 = 0); it cannot be "
                    "quantized downstream" % (len(stages) + 1)
                )
            else:
                state.omega1, state.r1 = w1, r1
                stage, state = extract_stage(state)
            stages.append(stage)
        if r_term < 0 and -r_term <= options.re_abs_tol:
            r_term = 0.0
        if any(st.R < 0 for st in stages):
            notes.append(
                "negative stage resistance(s) within the PR tolerance: the "
                "input impedance dips below Re Z = 0 at the noise level"
            )
        return BruneCircuit(
            stages=tuple(stages),
            r_terminal=r_term,
            preamble=tuple(preamble),
            log=tuple(state.log),
            notes=tuple(notes),
        )


def _near_axis_poles(model: PoleResidueModel, options: SynthesisOptions):
    floor = TWO_PI * options.scan.f_lo_ghz
    out = []
    for i, p in enumerate(model.poles_rad()):
        axis_scale = max(abs(p.imag), floor)
        if abs(p.real) <= options.force_preamble_rel_tol * axis_scale and not (
            abs(p.real) <= options.jaxis_rel_tol * axis_scale
        ):
            out.append(i)
    return tuple(out)
