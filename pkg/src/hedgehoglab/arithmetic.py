"""Rotation angles, continued fractions and truncated Brjuno sums.

Angles are stored as exact rational intervals ``[lo, hi]`` (``fractions.Fraction``
endpoints).  A declared-exact angle has ``lo == hi``; an angle known only to
finite precision carries a positive-width interval.  The continued-fraction
expansion runs the Gauss map on the interval and emits a partial quotient only
while both endpoints agree on it, so a quotient is never corrupted by the
stored precision: once the interval becomes ambiguous the expansion refuses to
continue instead of guessing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt

from .errors import ConfigError, PrecisionExhausted

BRJUNO_INCREMENT_TOL = 1e-8   # "stopped moving" threshold on the last increments
BRJUNO_TAIL_COUNT = 10        # how many trailing increments must be below it


@dataclass(frozen=True)
class RotationAngle:
    """An angle in [0, 1) known exactly or to an explicit precision.

    ``lo`` and ``hi`` bracket the angle; ``digits`` records the nominal decimal
    precision (used for reporting only, the interval is authoritative).
    """

    lo: Fraction
    hi: Fraction
    digits: int
    declared_form: str | None = None

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi < 1):
            raise ConfigError(f"angle interval [{self.lo}, {self.hi}] not inside [0, 1)")

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def value(self) -> float:
        return float(self.lo)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __repr__(self):
        form = f" {self.declared_form!r}" if self.declared_form else ""
        return f"RotationAngle({float(self.lo):.15g}{form})"

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_fraction(p: int, q: int) -> "RotationAngle":
        if q <= 0:
            raise ConfigError("denominator must be positive")
        v = Fraction(p, q) % 1
        return RotationAngle(v, v, digits=0, declared_form=f"{v.numerator}/{v.denominator}")

    @staticmethod
    def from_decimal(text: str, extra_slack: bool = True) -> "RotationAngle":
        """Angle from a decimal literal; uncertain in its last digit unless
        the literal is marked exact with a trailing '!'."""
        text = text.strip()
        exact = text.endswith("!")
        if exact:
            text = text[:-1]
        if not re.fullmatch(r"0?\.\d+|0|1", text):
            raise ConfigError(f"cannot parse decimal angle {text!r}")
        frac_digits = len(text.split(".")[1]) if "." in text else 0
        v = Fraction(text) % 1
        if exact or frac_digits == 0 or not extra_slack:
            return RotationAngle(v, v, digits=frac_digits, declared_form=text)
        ulp = Fraction(1, 10**frac_digits)
        hi = min(v + ulp, Fraction(1) - Fraction(1, 10 ** (frac_digits + 2)))
        return RotationAngle(v, hi, digits=frac_digits, declared_form=text)

    @staticmethod
    def golden(digits: int = 80) -> "RotationAngle":
        """(sqrt(5) - 1) / 2 bracketed to ``digits`` decimal digits."""
        scale = 10**digits
        s = isqrt(5 * scale * scale)          # floor(sqrt(5) * 10^digits)
        lo = Fraction(s - scale, 2 * scale)
        hi = Fraction(s + 1 - scale, 2 * scale)
        return RotationAngle(lo, hi, digits=digits, declared_form="golden")

    @staticmethod
    def from_float(x: float) -> "RotationAngle":
        """Angle measured in double precision; 1-ulp interval around it."""
        v = Fraction(x % 1.0)
        ulp = Fraction(max(abs(x), 1.0) * 2.3e-16)
        lo = max(v - ulp, Fraction(0))
        hi = min(v + ulp, Fraction(1) - Fraction(1, 10**20))
        return RotationAngle(lo, hi, digits=15)


def liouville_angle(depth: int) -> RotationAngle:
    """Partial sum of sum_k 10^(-k!), bracketed against the infinite tail.

    The stored value is the exact truncation at ``depth`` terms; the interval
    upper bound absorbs the remaining series, so expansions follow the full
    digit series for as long as the precision 10^(-(depth+1)!) supports.
    """
    if depth < 2:
        raise ConfigError("liouville depth must be >= 2")
    v = sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, depth + 1))
    tail = 2 * Fraction(1, 10 ** math.factorial(depth + 1))
    return RotationAngle(v, v + tail, digits=math.factorial(depth + 1),
                         declared_form=f"liouville:{depth}")


def parse_angle(spec: str, digits: int = 80) -> RotationAngle:
    """Accepts 'golden', 'liouville:<k>', 'p/q', or a decimal string."""
    spec = spec.strip()
    if spec == "golden":
        return RotationAngle.golden(digits)
    if spec.startswith("liouville:"):
        return liouville_angle(int(spec.split(":", 1)[1]))
    if "/" in spec:
        p, q = spec.split("/")
        return RotationAngle.from_fraction(int(p), int(q))
    return RotationAngle.from_decimal(spec)


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    terminated: bool
    angle: RotationAngle = field(repr=False, default=None)

    def __len__(self):
        return len(self.partial_quotients)

    def convergent(self, n: int) -> tuple[int, int]:
        """n-th convergent, 1-based; (0, 1) for n = 0."""
        if n == 0:
            return (0, 1)
        if not (1 <= n <= len(self.convergents)):
            from .errors import IndexOutOfRange
            raise IndexOutOfRange(f"convergent index {n} outside 1..{len(self.convergents)}")
        return self.convergents[n - 1]

    def as_fraction(self) -> Fraction:
        """Value of the finite continued fraction (last convergent)."""
        if not self.convergents:
            return Fraction(0)
        p, q = self.convergents[-1]
        return Fraction(p, q)


@dataclass(frozen=True)
class BrjunoReport:
    partial_sums: tuple[float, ...]
    verdict: str                      # rational | brjuno-likely | non-brjuno-likely | undecided
    divergence_bound_hit: int | None
    increments: tuple[float, ...] = ()


def continued_fraction_expand(alpha: RotationAngle, n_terms: int) -> ContinuedFractionExpansion:
    """First ``n_terms`` partial quotients and convergents of ``alpha``.

    Uses the convention alpha in [0, 1) with a_0 = 0 omitted, so the first
    convergent is 1/a_1.  Terminates early (``terminated=True``) only when the
    remainder is exactly zero, which on an exact rational input reproduces the
    Euclidean algorithm.  On an interval input, a remainder interval that
    straddles zero or whose endpoints disagree on the next quotient raises
    :class:`PrecisionExhausted`.
    """
    if n_terms < 1:
        raise ConfigError("need n_terms >= 1")
    quotients: list[int] = []
    convs: list[tuple[int, int]] = []
    p_prev, q_prev, p_cur, q_cur = 1, 0, 0, 1
    lo, hi = alpha.lo, alpha.hi
    terminated = False
    for _ in range(n_terms):
        if lo == hi == 0:
            terminated = True
            break
        if lo <= 0 < hi:
            # cannot distinguish "exactly rational here" from "continues"
            raise PrecisionExhausted(
                f"remainder interval [{lo}, {hi}] straddles 0 after "
                f"{len(quotients)} quotients", emitted=len(quotients))
        inv_hi = 1 / lo
        inv_lo = 1 / hi
        a_lo = inv_lo.numerator // inv_lo.denominator
        a_hi = inv_hi.numerator // inv_hi.denominator
        if a_lo != a_hi:
            raise PrecisionExhausted(
                f"quotient ambiguous ({a_lo} vs {a_hi}) after "
                f"{len(quotients)} quotients", emitted=len(quotients))
        a = a_lo
        quotients.append(a)
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, a * p_cur + p_prev, a * q_cur + q_prev
        convs.append((p_cur, q_cur))
        lo, hi = inv_lo - a, inv_hi - a
    else:
        return ContinuedFractionExpansion(tuple(quotients), tuple(convs), False, alpha)
    return ContinuedFractionExpansion(tuple(quotients), tuple(convs), terminated, alpha)


def evaluate_continued_fraction(quotients) -> Fraction:
    """[0; a_1, ..., a_N] as an exact fraction."""
    x = Fraction(0)
    for a in reversed(list(quotients)):
        x = 1 / (a + x)
    return x


def brjuno_sum(alpha: RotationAngle, n_terms: int,
               divergence_bound: float = 1e6) -> BrjunoReport:
    """Partial sums of sum_n log(q_{n+1}) / q_n over the convergent denominators.

    ``partial_sums[k]`` covers n = 0..k with q_0 = 1, so it consumes the first
    k+1 expansion terms.  The verdict is a statement about the truncation, not
    the limit: 'brjuno-likely' requires the last ``BRJUNO_TAIL_COUNT``
    increments to fall below ``BRJUNO_INCREMENT_TOL`` with the divergence
    bound never hit; 'non-brjuno-likely' means a partial sum exceeded the
    bound; anything else is 'undecided'.
    """
    if n_terms < 2:
        raise ConfigError("need n_terms >= 2")
    cfe = continued_fraction_expand(alpha, n_terms)
    if cfe.terminated:
        return BrjunoReport((), "rational", None)
    sums: list[float] = []
    incs: list[float] = []
    total = 0.0
    q_prev = 1
    hit = None
    for _, q in cfe.convergents:
        try:
            denom = float(q_prev)
        except OverflowError:       # denominators beyond float range: the
            denom = math.inf        # increment underflows to zero anyway
        inc = math.log(q) / denom
        total += inc
        sums.append(total)
        incs.append(inc)
        if hit is None and total > divergence_bound:
            hit = len(sums) - 1
        q_prev = q
    if hit is not None:
        verdict = "non-brjuno-likely"
    elif (len(incs) >= BRJUNO_TAIL_COUNT
          and all(v < BRJUNO_INCREMENT_TOL for v in incs[-BRJUNO_TAIL_COUNT:])):
        verdict = "brjuno-likely"
    else:
        verdict = "undecided"
    return BrjunoReport(tuple(sums), verdict, hit, tuple(incs))


def best_rational_in(lo: Fraction, hi: Fraction) -> tuple[int, int]:
    """Smallest-denominator fraction in the closed interval (Stern-Brocot walk)."""
    pl, ql, pr, qr = 0, 1, 1, 0
    while True:
        m = (pl + pr, ql + qr)
        v = Fraction(*m)
        if v < lo:
            pl, ql = m
        elif v > hi:
            pr, qr = m
        else:
            return m


def angle_of_unit_complex(value: complex, snap_tol: float = 1e-9,
                          max_q: int = 512) -> RotationAngle:
    """Rotation angle of a unit-modulus complex number.

    Constructed eigenvalues are usually exact roots of unity; if the measured
    angle lies within ``snap_tol`` of p/q with q <= ``max_q`` the exact
    rational is returned, otherwise a double-precision interval angle.
    """
    theta = (math.atan2(value.imag, value.real) / (2 * math.pi)) % 1.0
    if theta <= snap_tol or theta >= 1.0 - snap_tol:
        return RotationAngle.from_fraction(0, 1)
    lo = Fraction(theta) - Fraction(snap_tol)
    hi = Fraction(theta) + Fraction(snap_tol)
    p, q = best_rational_in(lo, min(hi, Fraction(1)))
    if q <= max_q and gcd(p, q) == 1:
        snapped = Fraction(p, q) % 1
        if abs(snapped - Fraction(theta)) <= snap_tol:
            return RotationAngle.from_fraction(snapped.numerator, snapped.denominator)
    return RotationAngle.from_float(theta)
