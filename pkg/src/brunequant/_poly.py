"""Extended-precision polynomial arithmetic on ascending coefficient lists.

Coefficients are mpmath mpf values; the working precision is whatever the
caller sets via ``mp.workprec``.  Synthesis of high-degree rationals cancels
nearly equal quantities, so every routine that discards a coefficient does it
explicitly with a scale-aware tolerance instead of blanket trimming.
"""

from __future__ import annotations

import numpy as np
from mpmath import mp, mpc, mpf

__all__ = [
    "padd",
    "pscale",
    "pmul",
    "pmul_s",
    "peval",
    "peval_real",
    "pderiv",
    "pdivmod",
    "drop_top",
    "even_part",
    "to_float_array",
    "horner_np",
]


def padd(a, b):
    n = max(len(a), len(b))
    return [
        (a[i] if i < len(a) else mpf(0)) + (b[i] if i < len(b) else mpf(0))
        for i in range(n)
    ]


def pscale(a, k):
    return [x * k for x in a]


def pmul(a, b):
    out = [mpf(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def pmul_s(a):
    """Multiply by the independent variable."""
    return [mpf(0)] + list(a)


def peval(c, s):
    """Horner evaluation at a complex point."""
    acc = mpc(0)
    for x in reversed(c):
        acc = acc * s + x
    return acc


def peval_real(c, x):
    """Horner evaluation at a real point, staying in mpf."""
    acc = mpf(0)
    for cc in reversed(c):
        acc = acc * x + cc
    return acc


def pderiv(c):
    return [i * c[i] for i in range(1, len(c))] or [mpf(0)]


def pdivmod(a, b):
    """Polynomial division; returns (quotient, remainder)."""
    a = list(a)
    b = list(b)
    if len(b) > len(a):
        return [mpf(0)], a
    q = [mpf(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coef = a[i + len(b) - 1] / lead
        q[i] = coef
        for j, y in enumerate(b):
            a[i + j] -= coef * y
    return q, a[: len(b) - 1] if len(b) > 1 else [mpf(0)]


def drop_top(c, expected_scale, tol, context):
    """Remove the leading coefficient, which the calling algebra says must
    cancel; raise if it is not small against the scale of the cancellation."""
    c = list(c)
    top = c.pop()
    scale = expected_scale if expected_scale > 0 else mpf(1)
    if abs(top) / scale > tol:
        raise CancellationError(
            "%s: leading coefficient fails to cancel (relative size %.3e)"
            % (context, float(abs(top) / scale))
        )
    return c


def even_part(n, d):
    """Return (p, q) with Re[n(jw)/d(jw)] = p(x)/q(x) at x = -w**2.

    Both n and d must have real coefficients.
    """
    dneg = [(-1) ** i * x for i, x in enumerate(d)]
    nneg = [(-1) ** i * x for i, x in enumerate(n)]
    num = pscale(padd(pmul(n, dneg), pmul(nneg, d)), mpf(1) / 2)
    den = pmul(d, dneg)
    p = [num[i] for i in range(0, len(num), 2)]
    q = [den[i] for i in range(0, len(den), 2)]
    return p, q


def to_float_array(c):
    return np.array([float(x) for x in c], dtype=float)


def horner_np(coeffs, x):
    """Vectorized Horner on a numpy array; coeffs ascending floats."""
    acc = np.zeros_like(x)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


class CancellationError(ArithmeticError):
    """A coefficient that the synthesis algebra requires to vanish did not."""
