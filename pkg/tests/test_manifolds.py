import cmath
import math

import numpy as np
import pytest

from hedgehoglab import _poly as P
from hedgehoglab.errors import PreconditionError
from hedgehoglab.germs import Germ, PolyMap
from hedgehoglab.manifolds import (center_manifold_jet, shadowing_check,
                                   strong_stable_disc)

LAM = cmath.exp(2j * math.pi * 0.23)
MU = 0.3


def _skew_x2():
    """f(x, y) = (lam x, mu y + x^2): center graph x^2/(lam^2 - mu)."""
    c1 = P.p2_zeros(1, 0); c1[1, 0] = LAM
    c2 = P.p2_zeros(2, 1); c2[0, 1] = MU; c2[2, 0] = 1.0
    return Germ(2, PolyMap((c1, c2)), None, 0.4)


def _skew_y2():
    """f(x, y) = (lam x + y^2, mu y): stable graph y^2/(mu^2 - lam)."""
    c1 = P.p2_zeros(1, 2); c1[1, 0] = LAM; c1[0, 2] = 1.0
    c2 = P.p2_zeros(0, 1); c2[0, 1] = MU
    return Germ(2, PolyMap((c1, c2)), None, 0.4)


def test_linear_map_graphs_vanish():
    c1 = P.p2_zeros(1, 0); c1[1, 0] = LAM
    c2 = P.p2_zeros(0, 1); c2[0, 1] = MU
    g = Germ(2, PolyMap((c1, c2)), None, 0.4)
    cj = center_manifold_jet(g, 8)
    sj = strong_stable_disc(g, 8)
    assert np.abs(cj.coefficients).max() == 0
    assert np.abs(sj.coefficients).max() == 0


def test_center_jet_closed_form():
    g = _skew_x2()
    cj = center_manifold_jet(g, 8)
    assert cj.coefficients[2] == pytest.approx(1.0 / (LAM**2 - MU), abs=1e-12)
    assert np.abs(cj.coefficients[3:]).max() < 1e-12


def test_stable_jet_closed_form():
    g = _skew_y2()
    sj = strong_stable_disc(g, 8)
    assert sj.coefficients[2] == pytest.approx(1.0 / (MU**2 - LAM), abs=1e-12)
    assert np.abs(sj.coefficients[3:]).max() < 1e-12


def test_jets_have_no_linear_terms(henon_desk):
    g, _ = henon_desk
    cj = center_manifold_jet(g, 8)
    sj = strong_stable_disc(g, 8)
    for jet in (cj, sj):
        assert jet.coefficients[0] == 0 and jet.coefficients[1] == 0


def test_henon_center_jet_validity(henon_desk):
    g, _ = henon_desk
    cj = center_manifold_jet(g, 8)
    assert cj.validity_radius >= 0.05
    assert cj.residual < 1e-10


def test_residual_decreases_with_degree(henon_desk):
    """The invariance defect at a fixed radius shrinks as the jet degree
    grows; the defect evaluation is its own oracle."""
    g, _ = henon_desk
    from hedgehoglab.manifolds import _center_invariance_residual
    res = [_center_invariance_residual(
        g, center_manifold_jet(g, d, check_validity=False).coefficients, 0.05)
        for d in (4, 6, 8)]
    assert res[0] > res[1] > res[2]


def test_stage_jets_converge_to_target(golden):
    """Center jets of the eigenvalue-substituted germs approach the target's."""
    from hedgehoglab.arithmetic import continued_fraction_expand
    from hedgehoglab.germs import (Classification, approximating_sequence, henon_germ,
                                   with_classification)
    g, fp = henon_germ(golden, 0.1, domain_radius=0.3)
    fp = with_classification(fp, Classification("semi-siegel-candidate"))
    cfe = continued_fraction_expand(golden, 9)
    target = center_manifold_jet(g, 8, check_validity=False).coefficients
    zs = 0.03 * np.exp(2j * np.pi * np.arange(64) / 64)
    gaps = []
    for n in (3, 6, 9):
        gn, _ = approximating_sequence(g, fp, cfe, n)
        jn = center_manifold_jet(gn, 8, check_validity=False).coefficients
        gaps.append(np.abs(P.p1_val(jn, zs) - P.p1_val(target, zs)).max())
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 1e-4


def test_stable_disc_contraction_rate(henon_desk):
    """Points on the computed stable graph are attracted at the certified
    rate: dist(f^n, 0) <= C 0.3^n with C fitted at n = 5 (direct orbits)."""
    g, _ = henon_desk
    sj = strong_stable_disc(g, 8)
    rng = np.random.default_rng(5)
    y = 0.04 * np.sqrt(rng.uniform(0.1, 1, 50)) * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
    x = P.p1_val(sj.coefficients, y)
    dist5 = None
    for n in range(1, 41):
        x, y = g.fwd(x, y)
        d = np.hypot(np.abs(x), np.abs(y))
        if n == 5:
            C = (d / 0.3**5).max() * (1 + 1e-9)
        elif n > 5:
            assert (d <= C * 0.3**n + 1e-15).all()


def test_shadowing_on_graph(henon_desk):
    g, _ = henon_desk
    cj = center_manifold_jet(g, 8)
    pt = (0.02, complex(cj(0.02)))
    rep = shadowing_check(g, cj, pt, horizon=30)
    assert rep.passed
    assert max(rep.ratios) < 1e-10


def test_shadowing_skew_example():
    g = _skew_x2()
    cj = center_manifold_jet(g, 8)
    rep = shadowing_check(g, cj, (0.01, 0.02), horizon=40, mubar=MU + 0.05)
    assert rep.passed


def test_shadowing_stable_point(henon_desk):
    """A point on the strong stable curve is shadowed by the fixed point."""
    g, _ = henon_desk
    cj = center_manifold_jet(g, 8)
    sj = strong_stable_disc(g, 8)
    y0 = 0.03 + 0.01j
    pt = (complex(P.p1_val(sj.coefficients, y0)), y0)
    rep = shadowing_check(g, cj, pt, horizon=30)
    assert rep.passed
    assert abs(rep.companion) < 1e-6


def test_shadowing_needs_2d(cauliflower):
    g, _ = cauliflower
    with pytest.raises(PreconditionError):
        shadowing_check(g, None, 0.1)
