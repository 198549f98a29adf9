import cmath
import math

import numpy as np
import pytest

from hedgehoglab import _poly as P
from hedgehoglab.arithmetic import RotationAngle, continued_fraction_expand
from hedgehoglab.errors import (DegenerateDifferential, IndexOutOfRange,
                                JetDegreeInsufficient, PreconditionError)
from hedgehoglab.germs import (Classification, Germ, PolyMap, approximating_sequence,
                               classify, henon_germ, henon_raw, normalize_fixed_point,
                               partial_normal_form, quadratic1d_germ,
                               semiparabolic_multiplicity, with_classification)

LAM3 = cmath.exp(2j * math.pi / 3)


def test_linear_diagonal_map_unchanged():
    c1 = P.p2_zeros(1, 0); c1[1, 0] = LAM3
    c2 = P.p2_zeros(0, 1); c2[0, 1] = 0.1
    g, fp = normalize_fixed_point(PolyMap((c1, c2)), (0j, 0j))
    assert fp.eigenvalue_neutral == pytest.approx(LAM3)
    assert fp.eigenvalue_dissipative == pytest.approx(0.1)
    L = g.fwd.linear_part()
    assert np.allclose(L, np.diag([LAM3, 0.1]))


def test_one_dim_parabolic_normalization():
    fwd = PolyMap.one_dim([0.0, 1.0, 1.0])   # z + z^2
    g, fp = normalize_fixed_point(fwd, 0.01)
    assert abs(fp.eigenvalue_neutral - 1.0) < 1e-12
    cls = classify(fp, None)
    assert cls == Classification("semi-parabolic", 0, 1)


def test_henon_eigenvalue_oracle():
    """Trace/determinant solve: the differential [[2 x_f, b], [1, 0]] must
    have the prescribed eigenvalues."""
    lam, mu = LAM3, 0.1
    b = -lam * mu
    xf = (lam + mu) / 2
    J = np.array([[2 * xf, b], [1, 0]])
    ev = np.linalg.eigvals(J)
    ev = sorted(ev, key=lambda e: -abs(e))
    assert ev[0] == pytest.approx(lam, abs=1e-13)
    assert ev[1] == pytest.approx(mu, abs=1e-13)


def test_henon_normalization(henon_desk):
    g, fp = henon_desk
    assert fp.eigenvalue_neutral == pytest.approx(LAM3, abs=1e-12)
    assert fp.eigenvalue_dissipative == pytest.approx(0.1, abs=1e-12)
    L = g.fwd.linear_part()
    assert abs(L[0, 1]) < 1e-12 and abs(L[1, 0]) < 1e-12
    assert str(fp.classification) == "semi-parabolic(1,3)"


def test_henon_inverse_identity(henon_desk):
    g, _ = henon_desk
    assert g.inverse_defect(n_samples=100) < 1e-10


def test_normalization_idempotent(henon_desk):
    g, _ = henon_desk
    g2, _ = normalize_fixed_point(g.fwd, (0j, 0j), raw_inverse=g.inv,
                                  domain_radius=g.domain_radius)
    assert np.allclose(g2.fwd.c1, g.fwd.c1, atol=1e-12)
    assert np.allclose(g2.fwd.c2, g.fwd.c2, atol=1e-12)


def test_degenerate_differential_rejected():
    c1 = P.p2_zeros(1, 0); c1[1, 0] = 0.5
    c2 = P.p2_zeros(0, 1); c2[0, 1] = 0.5
    with pytest.raises(DegenerateDifferential):
        normalize_fixed_point(PolyMap((c1, c2)), (0j, 0j))


def test_classify_branches(golden):
    from hedgehoglab.arithmetic import brjuno_sum
    _, fp = quadratic1d_germ(golden)
    rep = brjuno_sum(golden, 60)
    assert classify(fp, rep).kind == "semi-siegel-candidate"
    rep40 = brjuno_sum(golden, 40)
    assert classify(fp, rep40).kind == "undecided"
    # off the unit circle
    fwd = PolyMap.one_dim([0.0, 0.9, 1.0])
    g, fp2 = normalize_fixed_point(fwd, 0j)
    assert classify(fp2, None).kind == "not-semi-indifferent"


# ---------------------------------------------------------------------------
# multiplicity
# ---------------------------------------------------------------------------

def test_multiplicity_quadratic():
    g, fp = quadratic1d_germ(RotationAngle.from_fraction(0, 1))
    fp = with_classification(fp, classify(fp, None))
    nf = semiparabolic_multiplicity(g, fp, 8)
    assert (nf.q, nf.nu) == (1, 1)
    assert nf.leading_coefficient == pytest.approx(1.0)


def test_multiplicity_cubic():
    fwd = PolyMap.one_dim([0.0, 1.0, 0.0, 1.0])   # z + z^3
    g, fp = normalize_fixed_point(fwd, 0j)
    fp = with_classification(fp, classify(fp, None))
    nf = semiparabolic_multiplicity(g, fp, 8)
    assert (nf.q, nf.nu) == (1, 2)


def test_multiplicity_requires_resonant_term():
    fwd = PolyMap.one_dim([0.0, 1.0])   # identity jet: no nonlinear term
    g, fp = normalize_fixed_point(fwd, 0j)
    fp = with_classification(fp, classify(fp, None))
    with pytest.raises(JetDegreeInsufficient):
        semiparabolic_multiplicity(g, fp, 8)


def test_henon_multiplicity_oracle(henon_desk, henon_desk_nf):
    """Oracle: the degree-8 center jet substituted into the first component,
    composed three times symbolically (via the shared jet algebra but at a
    higher truncation), must show its first resonant term at order 4."""
    g, fp = henon_desk
    nf = henon_desk_nf
    assert (nf.q, nf.nu) == (3, 1)
    from hedgehoglab.germs import center_restricted_jet
    jet = center_restricted_jet(g, 12)
    G = jet.copy()
    for _ in range(2):
        G = P.p1_compose(jet, G, 12)
    assert abs(G[2]) < 1e-12 and abs(G[3]) < 1e-12
    assert abs(G[4]) > 1e-3
    assert nf.leading_coefficient == pytest.approx(complex(G[4]), rel=1e-9)


def test_multiplicity_rejects_nonparabolic(golden):
    g, fp = quadratic1d_germ(golden)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    with pytest.raises(PreconditionError):
        semiparabolic_multiplicity(g, fp, 8)


def test_partial_normal_form_kills_nonresonant(henon_desk):
    from hedgehoglab.germs import center_restricted_jet
    g, _ = henon_desk
    jet = center_restricted_jet(g, 10)
    gt, h, hinv = partial_normal_form(jet, 3, 7)
    # conjugation identity holds through the normalized order
    res = P.p1_compose(jet, h, 10) - P.p1_compose(h, gt, 10)
    assert np.abs(res[:8]).max() < 1e-12
    # non-resonant orders vanish, resonant ones survive
    assert abs(gt[2]) == 0 and abs(gt[3]) == 0 and abs(gt[5]) == 0
    assert abs(gt[4]) > 1e-3
    # h and hinv are compositional inverses
    comp = P.p1_compose(h, hinv, 10)
    ident = np.zeros(11, dtype=complex); ident[1] = 1
    assert np.abs(comp - ident).max() < 1e-10


# ---------------------------------------------------------------------------
# approximating sequence
# ---------------------------------------------------------------------------

def test_eigenvalue_substitution_examples(golden):
    g, fp = quadratic1d_germ(golden)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    cfe = continued_fraction_expand(golden, 8)
    g2, fp2 = approximating_sequence(g, fp, cfe, 2)
    assert fp2.eigenvalue_neutral == pytest.approx(cmath.exp(2j * math.pi / 2))
    g4, fp4 = approximating_sequence(g, fp, cfe, 4)
    assert fp4.eigenvalue_neutral == pytest.approx(cmath.exp(2j * math.pi * 3 / 5))
    assert str(fp4.classification) == "semi-parabolic(3,5)"
    with pytest.raises(IndexOutOfRange):
        approximating_sequence(g, fp, cfe, 9)


def test_sup_distance_identity(golden, rng):
    """The substitution changes only the linear term, so the sup distance
    over the ball is |lambda_n - lambda| r exactly; checked against a sampled
    sup over 10^4 points."""
    g, fp = henon_germ(golden, 0.1, domain_radius=0.3)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    cfe = continued_fraction_expand(golden, 8)
    g5, fp5 = approximating_sequence(g, fp, cfe, 5)
    dlam = abs(fp5.eigenvalue_neutral - fp.eigenvalue_neutral)
    r = g.domain_radius
    v = rng.normal(size=(10_000, 4))
    v *= (r / np.linalg.norm(v, axis=1))[:, None]   # boundary sphere
    x, y = v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]
    fx, fy = g.fwd(x, y)
    gx, gy = g5.fwd(x, y)
    sup = np.hypot(np.abs(gx - fx), np.abs(gy - fy)).max()
    assert sup <= dlam * r * (1 + 1e-12)
    assert sup == pytest.approx(dlam * r, rel=1e-3)   # attained near the equator


def test_substitution_convergence_monotone(golden):
    g, fp = quadratic1d_germ(golden)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    cfe = continued_fraction_expand(golden, 10)
    lam = fp.eigenvalue_neutral
    dists = []
    for n in range(1, 11):
        _, fpn = approximating_sequence(g, fp, cfe, n)
        dists.append(abs(fpn.eigenvalue_neutral - lam))
    assert all(b <= a + 1e-15 for a, b in zip(dists, dists[1:]))


def test_stage_multiplicity_is_one(golden):
    g, fp = quadratic1d_germ(golden)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    cfe = continued_fraction_expand(golden, 6)
    for n in (1, 2, 3, 4):
        gn, fpn = approximating_sequence(g, fp, cfe, n)
        q = fpn.classification.q
        nf = semiparabolic_multiplicity(gn, fpn, jet_degree=2 * q + 2)
        assert nf.nu == 1


def test_perturbed_inverse_newton(golden):
    g, fp = henon_germ(golden, 0.1, domain_radius=0.3)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    cfe = continued_fraction_expand(golden, 8)
    g5, _ = approximating_sequence(g, fp, cfe, 5)
    assert g5.inv is None
    assert g5.inverse_defect(n_samples=60) < 1e-10
