import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hedgehoglab.arithmetic import (RotationAngle, brjuno_sum, continued_fraction_expand,
                                    evaluate_continued_fraction, liouville_angle,
                                    parse_angle)
from hedgehoglab.errors import ConfigError, PrecisionExhausted


# ---------------------------------------------------------------------------
# exact quadratic-surd arithmetic: the independent oracle for golden-mean
# expansions.  Elements a + b*sqrt(5) with rational a, b.
# ---------------------------------------------------------------------------

class Surd5:
    def __init__(self, a, b):
        self.a = Fraction(a)
        self.b = Fraction(b)

    def __sub__(self, other):
        o = other if isinstance(other, Surd5) else Surd5(other, 0)
        return Surd5(self.a - o.a, self.b - o.b)

    def inverse(self):
        den = self.a * self.a - 5 * self.b * self.b
        return Surd5(self.a / den, -self.b / den)

    def floor(self):
        lo, hi = 0, 10**40
        # b*sqrt(5) bracketed by rational squaring
        while hi - lo > 1:
            mid = (lo + hi) // 2
            val = Fraction(mid) - self.a
            if (val <= 0 and self.b >= 0) or \
               (val * abs(val) <= 5 * self.b * abs(self.b)):
                lo = mid
            else:
                hi = mid
        return lo

    def is_zero(self):
        return self.a == 0 and self.b == 0


def surd_cf(x: Surd5, n):
    out = []
    for _ in range(n):
        if x.is_zero():
            break
        inv = x.inverse()
        a = inv.floor()
        out.append(a)
        x = inv - a
    return out


def test_golden_cf_matches_surd_oracle(golden):
    # oracle: exact arithmetic in Q(sqrt(5)) on (sqrt(5) - 1)/2
    oracle = surd_cf(Surd5(Fraction(-1, 2), Fraction(1, 2)), 12)
    cfe = continued_fraction_expand(golden, 12)
    assert list(cfe.partial_quotients) == oracle == [1] * 12


def test_golden_convergents_are_fibonacci(golden):
    cfe = continued_fraction_expand(golden, 5)
    assert cfe.convergents == ((1, 1), (1, 2), (2, 3), (3, 5), (5, 8))
    assert not cfe.terminated
    # Fibonacci recurrence
    p, q = zip(*cfe.convergents)
    for k in range(2, 5):
        assert q[k] == q[k - 1] + q[k - 2]


def test_rational_examples_terminate():
    for p, q, quots in ((1, 3, [3]), (1, 2, [2])):
        cfe = continued_fraction_expand(RotationAngle.from_fraction(p, q), 5)
        assert list(cfe.partial_quotients) == quots
        assert cfe.convergents == ((p, q),)
        assert cfe.terminated


def test_zero_angle():
    cfe = continued_fraction_expand(RotationAngle.from_fraction(0, 1), 3)
    assert cfe.terminated and cfe.partial_quotients == ()


def test_convergent_invariants(golden):
    cfe = continued_fraction_expand(golden, 30)
    alpha = golden.lo
    for k, (p, q) in enumerate(cfe.convergents):
        assert math.gcd(p, q) == 1
        if k + 1 < len(cfe.convergents):
            q_next = cfe.convergents[k + 1][1]
            assert abs(alpha - Fraction(p, q)) < Fraction(1, q * q_next)
    qs = [q for _, q in cfe.convergents]
    assert all(b > a for a, b in zip(qs, qs[1:] )) or qs[0] == 1  # q_1 may equal 1


def test_best_approximation_monotonicity(golden):
    cfe = continued_fraction_expand(golden, 25)
    alpha = golden.lo
    errs = [abs(alpha * q - p) for p, q in cfe.convergents]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_reconstruction_accuracy(golden):
    n = 18
    cfe = continued_fraction_expand(golden, n)
    val = evaluate_continued_fraction(cfe.partial_quotients)
    q_n = cfe.convergents[-1][1]
    assert abs(val - golden.lo) < Fraction(1, q_n * q_n)


def test_precision_exhaustion_reported():
    shallow = RotationAngle.golden(12)
    with pytest.raises(PrecisionExhausted):
        continued_fraction_expand(shallow, 60)


@given(st.integers(1, 999), st.integers(2, 1000))
@settings(max_examples=60, deadline=None)
def test_rational_cf_roundtrip(p, q):
    angle = RotationAngle.from_fraction(p % q, q)
    cfe = continued_fraction_expand(angle, 64)
    assert cfe.terminated
    assert evaluate_continued_fraction(cfe.partial_quotients) == angle.lo


@given(st.integers(2, 60), st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_partial_quotient_prefix_stability(digits_extra, n_terms):
    # refining the golden bracket never changes already-emitted quotients
    coarse = RotationAngle.golden(40)
    fine = RotationAngle.golden(40 + digits_extra)
    a = continued_fraction_expand(coarse, n_terms).partial_quotients
    b = continued_fraction_expand(fine, n_terms).partial_quotients
    assert a == b


# ---------------------------------------------------------------------------
# Brjuno sums
# ---------------------------------------------------------------------------

def brjuno_oracle(qs, n):
    """Independent evaluation of the partial sums from a denominator list."""
    out, total, qp = [], 0.0, 1
    for q in qs[:n]:
        total += math.log(q) / qp
        qp = q
        out.append(total)
    return out


def test_golden_brjuno_against_fibonacci_oracle(golden):
    rep = brjuno_sum(golden, 60)
    fib = [1, 2]
    while len(fib) < 60:
        fib.append(fib[-1] + fib[-2])
    oracle = brjuno_oracle(fib, 60)
    assert rep.partial_sums == pytest.approx(oracle, rel=1e-12)


def test_golden_brjuno_values(golden):
    # frozen from the oracle above: the tail decays geometrically (ratio ~ 1/phi)
    rep = brjuno_sum(golden, 60)
    assert rep.partial_sums[39] - rep.partial_sums[19] == pytest.approx(2.5255259612e-3, rel=1e-6)
    assert rep.partial_sums[59] - rep.partial_sums[39] == pytest.approx(3.19116287e-7, rel=1e-6)
    assert rep.partial_sums[59] - rep.partial_sums[39] < 1e-6
    assert rep.verdict == "brjuno-likely"
    assert rep.divergence_bound_hit is None


def test_golden_brjuno_at_forty_terms_is_undecided(golden):
    # increments near n = 40 sit around 1e-7..7e-6, above the 1e-8 rule
    rep = brjuno_sum(golden, 40)
    assert rep.verdict == "undecided"


def test_brjuno_sums_nondecreasing(golden):
    rep = brjuno_sum(golden, 50)
    sums = rep.partial_sums
    assert all(b >= a for a, b in zip(sums, sums[1:]))


def test_rational_angle_reports_rational():
    rep = brjuno_sum(RotationAngle.from_fraction(1, 3), 10)
    assert rep.verdict == "rational"
    assert rep.partial_sums == ()


def test_liouville_series_is_actually_summable():
    # the partial Brjuno sums of sum 10^-k! stay bounded: log q_{n+1} grows
    # like (k+1)! while q_n ~ 10^{k!}, so the terms vanish doubly fast
    rep = brjuno_sum(liouville_angle(5), 8, divergence_bound=1e3)
    assert rep.divergence_bound_hit is None
    assert rep.partial_sums[-1] < 3.0
    assert rep.partial_sums[-1] == pytest.approx(2.8032, abs=2e-4)


def test_divergence_bound_detection():
    # an angle whose first quotient is astronomically large front-loads the
    # sum: log(q_1)/q_0 = 500 log 10 > 1000 at once.  The interval keeps the
    # expansion from terminating, so the divergence verdict fires.
    v = evaluate_continued_fraction([10**500, 10, 10, 10, 10])
    angle = RotationAngle(v, v + Fraction(1, 10**1020), digits=1020)
    rep = brjuno_sum(angle, 4, divergence_bound=1e3)
    assert rep.verdict == "non-brjuno-likely"
    assert rep.divergence_bound_hit == 0
    assert rep.partial_sums[0] == pytest.approx(500 * math.log(10), rel=1e-12)


# ---------------------------------------------------------------------------
# liouville angles
# ---------------------------------------------------------------------------

def test_liouville_shallow_values_exact():
    assert liouville_angle(2).lo == Fraction(11, 100)
    assert liouville_angle(3).lo == Fraction(110001, 10**6)


def test_liouville_depth_agreement():
    # the depth-5 value extends the depth-4 one by a 10^-120 term
    a4 = liouville_angle(4).lo
    a5 = liouville_angle(5).lo
    assert a4 != a5
    assert abs(a5 - a4) < Fraction(1, 10**119)
    # agreement in the first 24 (indeed 119) decimal digits
    s4 = f"{float(a4):.24f}"
    s5 = f"{float(a5):.24f}"
    assert s4 == s5


def test_liouville_depth_guard():
    with pytest.raises(ConfigError):
        liouville_angle(1)


def test_liouville_first_quotients():
    cfe = continued_fraction_expand(liouville_angle(4), 7)
    assert list(cfe.partial_quotients) == [9, 11, 99, 1, 10, 9, 999999999999]
    assert [q for _, q in cfe.convergents][:6] == [9, 100, 9909, 10009, 109999, 1000000]


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_angle_forms():
    assert parse_angle("golden").declared_form == "golden"
    assert parse_angle("2/5").lo == Fraction(2, 5)
    assert parse_angle("liouville:3").lo == Fraction(110001, 10**6)
    a = parse_angle("0.25")
    assert a.lo == Fraction(1, 4)


def test_parse_angle_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_angle("one half")
