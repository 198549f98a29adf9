import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hedgehoglab import _poly as P
from hedgehoglab.arithmetic import RotationAngle
from hedgehoglab.errors import PreconditionError
from hedgehoglab.germs import (classify, quadratic1d_germ, semiparabolic_multiplicity,
                               with_classification)
from hedgehoglab.manifolds import strong_stable_disc
from hedgehoglab.petals import (DeltaRegion, asymptotic_curve_sample, build_chart,
                                delta_contains, delta_two_disc_contains,
                                local_attracting_petals, local_repelling_petals,
                                maximal_petals, petal_cycle, petal_touches_boundary)


# ---------------------------------------------------------------------------
# lobe regions
# ---------------------------------------------------------------------------

def test_delta_membership_examples():
    plus = DeltaRegion(0.1, +1)
    minus = DeltaRegion(0.1, -1)
    assert delta_contains(plus, -0.1 + 0j)
    assert not delta_contains(plus, 0j)            # the origin is a boundary point
    assert delta_contains(minus, 0.1 + 0j)         # mirror symmetry


def test_delta_mirror_symmetry(rng):
    z = rng.normal(size=500) + 1j * rng.normal(size=500)
    z *= 0.3
    plus = DeltaRegion(0.1, +1)
    minus = DeltaRegion(0.1, -1)
    assert np.array_equal(delta_contains(plus, z), delta_contains(minus, -z))


def test_delta_equals_two_discs(rng):
    """Quadratic-form membership agrees with the two-disc description on
    10^5 random points exactly."""
    for sign in (+1, -1):
        region = DeltaRegion(0.07, sign)
        z = (rng.normal(size=100_000) + 1j * rng.normal(size=100_000)) * 0.2
        assert np.array_equal(delta_contains(region, z),
                              delta_two_disc_contains(region, z))


@given(st.floats(0.01, 0.5), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
@settings(max_examples=200, deadline=None)
def test_delta_two_disc_property(r, x, y):
    region = DeltaRegion(r, +1)
    z = complex(x, y)
    assert delta_contains(region, z) == delta_two_disc_contains(region, z)


# ---------------------------------------------------------------------------
# local families
# ---------------------------------------------------------------------------

def test_cauliflower_attracting_is_delta_itself(cauliflower, cauliflower_nf):
    """For z + z^2 the sector coordinate is the identity, so the single
    attracting petal is the lobe pair itself; forward trapping holds on
    10^4 samples."""
    g, _ = cauliflower
    fam = local_attracting_petals(g, cauliflower_nf, 0.05,
                                  samples_per_sector=10_000)
    assert fam.q == 1 and len(fam.components) == 1
    assert fam.r_delta == 0.05        # no halving needed
    chart = fam.chart
    assert np.abs(chart.trap_poly[1] - 1.0) < 1e-12   # u = z exactly
    pts = fam.components[0].samples
    img = g.fwd(pts)
    region = DeltaRegion(0.05, +1)
    assert delta_contains(region, img).all()


def test_cauliflower_repelling_sector(cauliflower, cauliflower_nf):
    g, _ = cauliflower
    fam = local_repelling_petals(g, cauliflower_nf, 0.05)
    assert len(fam.components) == 1
    # backward orbits of sector samples stay in the sector
    pts = fam.components[0].samples
    img = fam.chart.backward(pts)
    region = DeltaRegion(0.05, -1)
    assert (delta_contains(region, img) | (np.abs(img) < 1e-8)).all()


def test_henon_attracting_family(henon_desk, henon_desk_nf):
    g, _ = henon_desk
    sj = strong_stable_disc(g, 8)
    fam = local_attracting_petals(g, henon_desk_nf, 1e-4, stable_jet=sj)
    assert fam.q == 3 and len(fam.components) == 3
    # components are ordered by centroid argument and mapped cyclically
    perm, rot = petal_cycle(g, fam)
    assert sorted(perm) == [0, 1, 2]
    assert rot == Fraction(1, 3)


def test_henon_repelling_graphs(henon_desk, henon_desk_nf):
    """Each repelling sector carries a graph with small fixed-point residual,
    and the graph agrees with the center jet on the sector (both describe the
    unique backward-invariant curve)."""
    g, _ = henon_desk
    fam = local_repelling_petals(g, henon_desk_nf, 1e-4)
    assert len(fam.components) == 3
    assert max(fam.extras["graph_residuals"]) < 1e-10
    from hedgehoglab.manifolds import center_manifold_jet
    cj = center_manifold_jet(g, 10, check_validity=False)
    for comp in fam.components:
        xs = comp.samples[:100]
        gap = np.abs(P.p1_val(comp.graph_coeffs, xs) - cj(xs)).max()
        assert gap < 1e-7


def test_nonparabolic_rejected(golden, cauliflower_nf):
    g, fp = quadratic1d_germ(golden)
    with pytest.raises(PreconditionError):
        # normal-form data for a different germ cannot be forged; the guard
        # is the multiplicity precondition itself
        semiparabolic_multiplicity(g, with_classification(
            fp, classify(fp, None)), 8)


# ---------------------------------------------------------------------------
# asymptotic curve
# ---------------------------------------------------------------------------

def test_cauliflower_asymptotic_real_segment(cauliflower, cauliflower_nf):
    """Backward orbits along the positive real axis converge to 0, so the
    retained set contains real points filling out toward the ball radius.
    Oracle: direct real iteration."""
    g, _ = cauliflower
    rep = local_repelling_petals(g, cauliflower_nf, 0.05)
    sample = asymptotic_curve_sample(g, rep, 0.3, density=200, orbit_cap=4000)
    real = np.sort(sample.points[np.abs(sample.points.imag) < 1e-13].real)
    assert real.size > 50
    assert real[0] < 0.02 and real[-1] > 0.25
    # oracle: those real points iterate forward along the axis monotonically
    z = real[real > 0][0]
    for _ in range(50):
        z2 = z + z * z
        assert z2 > z
        z = z2


def test_asymptotic_empty_at_zero_density(cauliflower, cauliflower_nf):
    g, _ = cauliflower
    rep = local_repelling_petals(g, cauliflower_nf, 0.05)
    sample = asymptotic_curve_sample(g, rep, 0.3, density=0)
    assert sample.points.size == 0


def test_henon_asymptotic_horizontal(henon_desk, henon_desk_nf):
    """All retained points carry tangents inside the horizontal cone."""
    g, _ = henon_desk
    rep = local_repelling_petals(g, henon_desk_nf, 1e-4)
    sample = asymptotic_curve_sample(g, rep, 0.05, density=60, orbit_cap=3000,
                                     cone_tangent=0.18)
    assert sample.points.size > 100
    assert sample.horizontal_flags.all()


# ---------------------------------------------------------------------------
# maximal petals
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def cauliflower_maximal(cauliflower, cauliflower_nf):
    g, _ = cauliflower
    return maximal_petals(g, cauliflower_nf, 0.4, resolution=512,
                          orbit_cap=100_000)


def test_cauliflower_two_components(cauliflower_maximal):
    fam = cauliflower_maximal
    assert len(fam.components) == 2
    signs = sorted(c.im_sign for c in fam.components)
    assert signs == [-1, 1]


def test_cauliflower_conjugation_symmetry(cauliflower_maximal):
    """Real coefficients: the two petals are complex-conjugate images."""
    up = next(c for c in cauliflower_maximal.components if c.im_sign > 0)
    dn = next(c for c in cauliflower_maximal.components if c.im_sign < 0)
    assert np.array_equal(up.compact.occupancy, dn.compact.occupancy[:, ::-1])


def test_cauliflower_origin_adherence(cauliflower_maximal):
    for c in cauliflower_maximal.components:
        assert c.min_dist_to_zero <= 2 * c.compact.resolution


def test_cauliflower_boundary_contact(cauliflower_maximal):
    assert all(petal_touches_boundary(cauliflower_maximal, 0.4, tol_cells=2.0))


def test_cauliflower_no_interior_holes(cauliflower_maximal):
    """Components are simply connected at grid scale: the complement within
    the bounding box has a single component touching the box edge."""
    from scipy import ndimage
    for c in cauliflower_maximal.components:
        occ = c.compact.occupancy
        idx = np.argwhere(occ)
        i0, j0 = idx.min(axis=0)
        i1, j1 = idx.max(axis=0) + 1
        box = occ[i0:i1, j0:j1]
        _, nhole = ndimage.label(~box)
        # every complement component must touch the box border
        lab, n = ndimage.label(~box)
        edge = np.unique(np.concatenate([lab[0, :], lab[-1, :], lab[:, 0], lab[:, -1]]))
        interior_only = set(range(1, n + 1)) - set(edge.tolist())
        assert not interior_only


def test_cauliflower_identity_cycle(cauliflower, cauliflower_maximal):
    g, _ = cauliflower
    perm, rot = petal_cycle(g, cauliflower_maximal)
    assert perm == (0, 1)
    assert rot == Fraction(0, 1)


def test_cauliflower_avoids_axis(cauliflower_maximal):
    """The maximal petal never meets the real axis away from 0 (positive
    reals escape forward, negative reals backward).  The gap between a petal
    and the axis scales like |z|^2 / B, so it is sub-cell inside radius
    ~ sqrt(h B) and the check applies beyond that."""
    B = cauliflower_maximal.ball_radius
    for c in cauliflower_maximal.components:
        h = c.compact.resolution
        pts = c.compact.cell_centers()
        off_axis = np.abs(pts.imag) > 2.5 * h
        near_zero = np.abs(pts) <= math.sqrt(8 * h * B)
        assert (off_axis | near_zero).all()


def test_two_fifths_cycle(two_fifths_germ):
    """lambda = e^{2 pi i 2/5}: five petals advancing by two positions."""
    g, fp = two_fifths_germ
    nf = semiparabolic_multiplicity(g, fp, jet_degree=12)
    fam = local_attracting_petals(g, nf, 0.3 * abs(nf.trap_coefficient) * 0.3 ** 5)
    assert len(fam.components) == 5
    perm, rot = petal_cycle(g, fam)
    assert rot == Fraction(2, 5)


def test_maximal_report_statuses(cauliflower_maximal):
    rep = cauliflower_maximal.extras["report"]
    assert rep.members > 0
    assert set(rep.forward_status) <= {"converged", "escaped", "cap", "too-slow",
                                       "inverse-failed"}
    assert cauliflower_maximal.extras["fq_invariance_frac_over_one_cell"] <= 0.005


def test_local_not_maximal_misses_boundary(cauliflower, cauliflower_nf):
    """A small attracting petal stays far from the ball sphere."""
    g, _ = cauliflower
    fam = local_attracting_petals(g, cauliflower_nf, 0.02)
    comp = fam.components[0]
    # its own grid only extends to the lobe scale << 0.4
    assert comp.compact.half_width < 0.1
    flags = petal_touches_boundary(fam, 0.4, tol_cells=2.0)
    assert flags == [False]
