import math

import numpy as np
import pytest

from rotor.covers import (AnnulusMapSpec, KleinMapSpec, annulus_term,
                          apply_annulus_batch, check_sigma_commute,
                          compose_annulus, constant_rotation, double_annulus,
                          double_annulus_family, klein_symmetrize, rho_bar,
                          sigma_apply, sigma_pushforward)
from rotor.errors import (BoundaryViolation, NotIsotopicToIdentity,
                          NotSigmaEquivariant, RotorError)
from rotor.maps import (Generator, LiftedWord, MapGroup, apply_torus_batch,
                        compose, constant_term, translate_lift, trig_term)
from rotor.measures import (EmpiricalMeasure, estimate_rotation_set,
                            invariance_defect, rotation_vector)
from rotor.mcg import MCGClass

ID = MCGClass.identity()


def build_group():
    gens = [
        Generator("trx", ID, disp_x=[constant_term(0.3)]),
        Generator("trq", ID, disp_x=[constant_term(0.25)]),
        Generator("try", ID, disp_y=[constant_term(0.3)]),
        Generator("half", ID, disp_y=[constant_term(0.5)]),
        Generator("skew1", ID, disp_y=[trig_term(0.1, 1, 0)]),
        Generator("skew2", ID, disp_y=[trig_term(0.1, 2, 0)]),
        Generator("refl", -ID),
    ]
    return MapGroup(gens)


G = build_group()


def test_sigma_is_an_involution_on_atoms():
    pts = np.array([(0.1, 0.2), (0.6, 0.0), (0.3, 0.85)])
    back = sigma_apply(sigma_apply(pts))
    assert np.abs(back - pts).max() < 1e-15


def test_x_translation_commutes():
    # dyadic shift: every intermediate sum is exact, defect comes out 0.0
    assert check_sigma_commute(G.by_name("trq")) == 0.0
    # nondyadic shift: addition order costs one ulp, nothing more
    assert check_sigma_commute(G.by_name("trx")) < 1e-15


def test_y_translation_fails_by_wrapped_2b():
    d = check_sigma_commute(G.by_name("try"))
    assert abs(d - 0.4) < 1e-15
    # b = 1/2 is the deck translation T2 composed in; that one commutes
    assert check_sigma_commute(G.by_name("half")) == 0.0


def test_frequency_one_skew_commutes():
    # sigma negates the y displacement AND shifts x by 1/2, which flips
    # sin(2 pi x) right back: the two signs cancel and the defect is
    # noise-level, not 2*epsilon
    assert check_sigma_commute(G.by_name("skew1")) < 1e-14


def test_frequency_two_skew_defect_is_2eps():
    # sin(4 pi x) survives the half shift unchanged, so only the y flip
    # acts and the grid sees the full 2*epsilon at |sin| = 1
    d = check_sigma_commute(G.by_name("skew2"), 64)
    assert abs(d - 0.2) < 1e-14


def test_klein_spec_certifies_and_refuses():
    ks = KleinMapSpec(G.by_name("skew1"), grid_n=64, tol=1e-9)
    assert ks.equivariance_defect < 1e-14
    with pytest.raises(NotSigmaEquivariant):
        KleinMapSpec(G.by_name("skew2"), grid_n=64, tol=1e-9)


def test_rho_bar_identity():
    assert rho_bar(EmpiricalMeasure.uniform_grid(8), G.identity()) == (0.0, 0.0)


def test_rho_bar_translation_closed_form():
    mu = EmpiricalMeasure.uniform_grid(16)
    a, b = rho_bar(mu, G.by_name("trq"))
    assert (a, b) == (0.25, 0.0)
    a, b = rho_bar(mu, G.by_name("trx"))
    assert abs(a - 0.3) < 1e-15 and b == 0.0


def test_rho_bar_ignores_horizontal_deck_shift_bitwise():
    mu = EmpiricalMeasure.uniform_grid(16)
    lw = LiftedWord(G.by_name("trx"))
    base = rho_bar(mu, lw)
    for m in (1, -3, 7):
        assert rho_bar(mu, translate_lift(lw, (m, 0))) == base


def test_rho_bar_vertical_deck_shift_moves_b():
    mu = EmpiricalMeasure.uniform_grid(16)
    lw = LiftedWord(G.by_name("trx"))
    assert rho_bar(mu, translate_lift(lw, (0, 2)))[1] == 2.0
    assert rho_bar(mu, translate_lift(lw, (0, -1)))[1] == 1.0


def test_rho_bar_error_paths():
    mu = EmpiricalMeasure.uniform_grid(8)
    with pytest.raises(NotSigmaEquivariant):
        rho_bar(mu, G.by_name("skew2"))
    # the point reflection commutes with sigma exactly but has linear
    # part -Id, so the rotation vector itself is undefined
    with pytest.raises(NotIsotopicToIdentity):
        rho_bar(mu, G.by_name("refl"))


def circle_measure(x0):
    return EmpiricalMeasure([(x0, j / 16) for j in range(16)])


def test_sigma_conjugate_measure_flips_b():
    mu = circle_measure(0.25)
    lw = LiftedWord(G.by_name("skew1"))
    a, b = rotation_vector(mu, lw)
    a2, b2 = rotation_vector(sigma_pushforward(mu), lw)
    assert abs(a2 - a) < 1e-8 and abs(b2 + b) < 1e-8
    assert abs(b - 0.1) < 1e-12


def test_symmetrization_kills_second_coordinate():
    nu = circle_measure(0.25)
    tau = klein_symmetrize(nu)
    assert len(tau) == 32
    assert invariance_defect(G.by_name("skew1"), tau) < 1e-12
    rho = rotation_vector(tau, LiftedWord(G.by_name("skew1")))
    assert abs(rho[1]) < 1e-8
    # rho_bar of the symmetrized measure is the honest Klein invariant
    assert rho_bar(tau, G.by_name("skew1")) == (0.0, 0.0)


def test_rho_bar_zero_iff_rotation_vector_integral():
    mu = EmpiricalMeasure.uniform_grid(8)
    group = MapGroup([
        Generator("a0", ID),
        Generator("a1", ID, disp_x=[constant_term(0.25)]),
        Generator("a2", ID, disp_x=[constant_term(0.5)]),
        Generator("a3", ID, disp_x=[constant_term(1.0)]),
    ])
    for name in ("a0", "a1", "a2", "a3"):
        w = group.by_name(name)
        a, b = rho_bar(mu, w)
        bar_zero = b < 1e-9 and min(a, 1.0 - a) < 1e-9
        rv = rotation_vector(mu, LiftedWord(w))
        vec_zero = np.abs(rv - np.round(rv)).max() < 1e-9
        assert bar_zero == vec_zero, name


# --- annulus doubling


def twist_spec(beta):
    return AnnulusMapSpec(a_terms=[annulus_term(beta, 0, math.pi / 2, 1),
                                   annulus_term(-beta, 0, math.pi / 2, 2)])


def test_boundary_validation():
    with pytest.raises(BoundaryViolation):
        AnnulusMapSpec(b_terms=[annulus_term(0.1, 0, math.pi / 2, 0)])
    with pytest.raises(BoundaryViolation):
        AnnulusMapSpec(b_terms=[annulus_term(0.1, 0, math.pi / 2, 1)])
    with pytest.raises(BoundaryViolation):
        AnnulusMapSpec(b_terms=[annulus_term(0.1, 1, 0.0, 1)])
    ok = AnnulusMapSpec(b_terms=[annulus_term(0.1, 0, math.pi / 2, 1),
                                 annulus_term(-0.1, 0, math.pi / 2, 2)])
    assert not ok.is_fiber_preserving()


def test_doubling_rejects_vertical_displacement():
    spec = AnnulusMapSpec(b_terms=[annulus_term(0.1, 0, math.pi / 2, 1),
                                   annulus_term(-0.1, 0, math.pi / 2, 2)])
    with pytest.raises(RotorError):
        double_annulus(spec)


def test_double_identity_and_rigid_rotation():
    rng = np.random.default_rng(3)
    pts = rng.random((60, 2))
    wid = double_annulus(AnnulusMapSpec(), "id")
    assert np.abs(apply_torus_batch(wid, pts) - pts).max() == 0.0
    wr = double_annulus(AnnulusMapSpec(a_terms=[constant_rotation(0.25)]), "r")
    img = apply_torus_batch(wr, pts)
    want = np.column_stack([(pts[:, 0] + 0.25) % 1.0, pts[:, 1]])
    assert np.abs(img - want).max() < 1e-15


def test_double_restricts_to_the_annulus_map():
    spec = twist_spec(0.4)
    w = double_annulus(spec, "tw")
    ys = np.linspace(0.0, 0.5, 21)
    pts = np.column_stack([np.full_like(ys, 0.13), ys])
    img = apply_torus_batch(w, pts)
    t = np.sin(math.pi * ys) ** 2
    ann = apply_annulus_batch(spec, np.column_stack([pts[:, 0], t]))
    assert np.abs(img[:, 0] - ann[:, 0]).max() < 1e-14
    assert np.abs(img[:, 1] - pts[:, 1]).max() == 0.0


def test_double_commutes_with_mirror():
    w = double_annulus(twist_spec(0.4), "tw")
    rng = np.random.default_rng(5)
    pts = rng.random((100, 2))
    mirrored = np.column_stack([pts[:, 0], (1.0 - pts[:, 1]) % 1.0])
    left = apply_torus_batch(w, mirrored)
    right = apply_torus_batch(w, pts)
    right = np.column_stack([right[:, 0], (1.0 - right[:, 1]) % 1.0])
    assert np.abs(left - right).max() < 1e-14


def test_doubled_twist_fixes_boundary_circles():
    from rotor.fixed_points import find_fixed_points
    w = double_annulus(twist_spec(0.4), "tw")
    r = find_fixed_points(w, 32, 1e-9)
    assert sorted(c.points[0][1] for c in r.chains) == [0.0, 0.5]
    assert all(c.cell_count == 32 for c in r.chains)


def test_doubled_twist_rotation_segment():
    # fiberwise rotation beta*t*(1-t) sweeps [0, beta/4]; the doubled
    # map's rotation set is that segment on the x axis
    w = double_annulus(twist_spec(0.4), "tw")
    seeds = np.array([(0.0, j / 64) for j in range(64)])
    est = estimate_rotation_set(w, seeds, 2000)
    xs = est.hull[:, 0]
    assert np.abs(est.hull[:, 1]).max() < 1e-12
    assert abs(xs.min()) < 1e-12
    assert abs(xs.max() - 0.1) < 1e-12


def test_doubling_functoriality():
    rng = np.random.default_rng(11)
    pts = rng.random((100, 2))
    tw, rot = twist_spec(0.4), AnnulusMapSpec(a_terms=[constant_rotation(0.3)])
    xdep = AnnulusMapSpec(a_terms=[annulus_term(0.03, 1, 0.0, 1)])
    for f, g in [(tw, rot), (rot, tw), (tw, tw), (xdep, rot)]:
        wf = double_annulus(f, "f")
        wg = double_annulus(g, "g")
        wfg = double_annulus(compose_annulus(f, g), "fg")
        lhs = apply_torus_batch(wfg, pts)
        rhs = apply_torus_batch(wf, apply_torus_batch(wg, pts))
        assert np.abs(lhs - rhs).max() < 1e-10


def test_compose_annulus_rejects_nonrepresentable():
    xdep = AnnulusMapSpec(a_terms=[annulus_term(0.03, 1, 0.0, 1)])
    with pytest.raises(RotorError):
        compose_annulus(xdep, xdep)


def test_family_doubles_into_one_group():
    grp = double_annulus_family([
        ("tw", twist_spec(0.4)),
        ("rot", AnnulusMapSpec(a_terms=[constant_rotation(0.3)])),
    ])
    w = compose(grp.by_name("tw"), grp.by_name("rot"))
    rng = np.random.default_rng(7)
    pts = rng.random((40, 2))
    step = apply_torus_batch(grp.by_name("rot"), pts)
    want = apply_torus_batch(grp.by_name("tw"), step)
    assert np.abs(apply_torus_batch(w, pts) - want).max() < 1e-14
