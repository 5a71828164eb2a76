import math

import numpy as np
import pytest

from rotor.errors import NotIsotopicToIdentity
from rotor.geometry import hausdorff_distance
from rotor.maps import (Generator, LiftedWord, MapGroup, compose,
                        constant_term, inverse, linear_part, translate_lift,
                        trig_term)
from rotor.mcg import MCGClass
from rotor.measures import (BirkhoffRecord, EmpiricalMeasure,
                            birkhoff_mean, distortion_ratio,
                            estimate_rotation_set, invariance_defect,
                            irrotational_lift, krylov_bogolyubov,
                            pushforward, rotation_vector)

ID = MCGClass.identity()
ALPHA = math.sqrt(2.0) - 1.0


def build_group():
    gens = [
        Generator("half", ID, disp_x=[constant_term(0.5)]),
        Generator("irr", ID, disp_x=[constant_term(ALPHA)],
                  disp_y=[constant_term(0.3)]),
        Generator("skew", ID,
                  disp_x=[constant_term(ALPHA)],
                  disp_y=[constant_term(0.3), trig_term(0.05, 1, 0)]),
        Generator("skew0", ID, disp_y=[trig_term(0.05, 1, 0)]),
        Generator("dehn", MCGClass(1, 0, 1, 1)),
        Generator("flip", -ID),
        Generator("circ", ID, disp_y=[trig_term(0.1, 1, 0)]),
        Generator("shift", ID, disp_x=[constant_term(2.0)],
                  disp_y=[constant_term(-1.0)]),
    ]
    return MapGroup(gens)


G = build_group()


def grid_seeds(k):
    xs = np.arange(k) / k
    return np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)


def circle_measure(x=0.25, m=16):
    return EmpiricalMeasure([(x, j / m) for j in range(m)])


# --- the measure type


def test_atoms_are_canonicalized():
    m = EmpiricalMeasure([(1.3, -0.75), (0.3, 0.25)], [1.0, 3.0])
    assert m.atoms == [((0.3, 0.25), 1.0)]


def test_nearby_atoms_merge():
    m = EmpiricalMeasure([(0.1, 0.2), (0.1 + 4e-13, 0.2), (0.9, 0.9)],
                         [0.25, 0.25, 0.5])
    assert len(m) == 2
    assert m.atoms[0] == ((0.1, 0.2), 0.5)


def test_wraparound_atoms_merge():
    m = EmpiricalMeasure([(0.0, 0.5), (1.0 - 1e-13, 0.5)])
    assert len(m) == 1
    assert m.atoms[0][0] == (0.0, 0.5)


def test_weights_normalized_and_sorted():
    m = EmpiricalMeasure([(0.7, 0.1), (0.2, 0.9)], [3.0, 1.0])
    assert [a for a, _ in m.atoms] == [(0.2, 0.9), (0.7, 0.1)]
    assert m.weights.sum() == 1.0
    assert m.atoms[0][1] == 0.25


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        EmpiricalMeasure([], [])
    with pytest.raises(ValueError):
        EmpiricalMeasure([(0.1, 0.1)], [-1.0])
    with pytest.raises(ValueError):
        EmpiricalMeasure([(0.1, 0.1)], [0.0])
    with pytest.raises(AttributeError):
        EmpiricalMeasure.dirac((0, 0)).weights = None


def test_uniform_grid():
    m = EmpiricalMeasure.uniform_grid(8)
    assert len(m) == 64
    assert abs(m.weights.sum() - 1.0) < 1e-12
    assert m.weights.max() == m.weights.min()


def test_csv_round_trip(tmp_path):
    m = EmpiricalMeasure([(0.1, 0.2), (0.9, 0.37)], [0.25, 0.75])
    path = tmp_path / "m.csv"
    m.to_csv(path)
    back = EmpiricalMeasure.from_csv(path)
    assert np.array_equal(back.points, m.points)
    assert np.allclose(back.weights, m.weights, rtol=0, atol=1e-15)


# --- pushforward


def test_pushforward_identity():
    m = EmpiricalMeasure([(0.1, 0.2), (0.9, 0.9)], [0.5, 0.5])
    p = pushforward(G.identity(), m)
    assert np.array_equal(p.points, m.points)
    assert np.allclose(p.weights, m.weights, rtol=1e-12)


def test_pushforward_moves_dirac():
    p = pushforward(G.by_name("half"), EmpiricalMeasure.dirac((0.0, 0.0)))
    assert p.atoms == [((0.5, 0.0), 1.0)]


def test_pushforward_point_reflection_moves_circle():
    # (x,y) -> (-x,-y) sends the circle x=1/4 to the circle x=3/4
    img = pushforward(G.by_name("flip"), circle_measure(0.25, 16))
    assert np.allclose(img.points[:, 0], 0.75, atol=1e-12)
    assert len(img) == 16
    assert np.allclose(img.weights, 1.0 / 16, rtol=1e-12)


def test_pushforward_mass_and_functoriality():
    rng = np.random.default_rng(3)
    m = EmpiricalMeasure(rng.uniform(0, 1, size=(10, 2)))
    a, b = G.by_name("skew"), G.by_name("half")
    lhs = pushforward(compose(a, b), m)
    rhs = pushforward(a, pushforward(b, m))
    assert abs(lhs.weights.sum() - 1.0) < 1e-12
    assert len(lhs) == len(rhs)
    assert np.abs(lhs.points - rhs.points).max() < 1e-10
    assert np.abs(lhs.weights - rhs.weights).max() < 1e-10


# --- rotation vectors


def test_rotation_vector_of_translation():
    m = EmpiricalMeasure([(0.1, 0.2), (0.9, 0.9)], [0.5, 0.5])
    rv = rotation_vector(m, LiftedWord(G.by_name("irr")))
    assert abs(rv[0] - ALPHA) < 1e-15 and abs(rv[1] - 0.3) < 1e-15


def test_rotation_vector_of_deck_translation():
    m = EmpiricalMeasure.dirac((0.37, 0.61))
    rv = rotation_vector(m, LiftedWord(G.identity(), (1, 0)))
    assert rv.tolist() == [1.0, 0.0]


def test_rotation_vector_on_invariant_circle():
    # (x, y + 0.1 sin 2 pi x) on the circle x=1/4: constant displacement
    rv = rotation_vector(circle_measure(0.25, 16), LiftedWord(G.by_name("circ")))
    assert abs(rv[0]) < 1e-15
    assert abs(rv[1] - 0.1) < 1e-12


def test_rotation_vector_requires_identity_linear_part():
    with pytest.raises(NotIsotopicToIdentity):
        rotation_vector(EmpiricalMeasure.dirac((0, 0)),
                        LiftedWord(G.by_name("dehn")))


def test_lift_shift_is_exact():
    m = EmpiricalMeasure([(0.1, 0.2), (0.9, 0.9)], [0.5, 0.5])
    base = LiftedWord(G.by_name("irr"))
    rv0 = rotation_vector(m, base)
    for v in [(3, -2), (1, 0), (-5, 7)]:
        rv = rotation_vector(m, translate_lift(base, v))
        assert np.array_equal(rv, rv0 + np.array(v, dtype=float))


def test_rho_additivity_for_measure_preserving_pair():
    # both maps leave the uniform grid invariant up to fp noise
    mu = EmpiricalMeasure.uniform_grid(64)
    f, g = G.by_name("irr"), G.by_name("skew0")
    assert invariance_defect(f, mu) < 1e-9
    assert invariance_defect(g, mu) < 1e-9
    lhs = rotation_vector(mu, LiftedWord(compose(f, g)))
    rhs = rotation_vector(mu, LiftedWord(f)) + rotation_vector(mu, LiftedWord(g))
    assert np.abs(lhs - rhs).max() < 1e-8


@pytest.mark.parametrize("psi_name", ["dehn", "flip"])
def test_conjugation_identity(psi_name):
    # [psi](rho_mu(phi)) = rho_{psi_* mu}(psi phi psi^-1)
    mu = EmpiricalMeasure.uniform_grid(64)
    phi = G.by_name("irr")
    psi = G.by_name(psi_name)
    conj = compose(compose(psi, phi), inverse(psi))
    vec = rotation_vector(mu, LiftedWord(phi))
    lhs = np.array(linear_part(psi).apply((vec[0], vec[1])), dtype=float)
    rhs = rotation_vector(pushforward(psi, mu), LiftedWord(conj))
    assert np.abs(lhs - rhs).max() < 1e-8


# --- invariance defect


def test_defect_identity_word():
    m = EmpiricalMeasure([(0.15, 0.85), (0.4, 0.3)], [0.5, 0.5])
    assert invariance_defect(G.identity(), m) == 0.0


def test_defect_half_translation_of_dirac():
    # worst function is cos 2 pi x: |cos(pi) - cos(0)| = 2
    d = invariance_defect(G.by_name("half"), EmpiricalMeasure.dirac((0.0, 0.0)))
    assert d == 2.0


def test_defect_irrational_translation_of_fine_grid():
    d = invariance_defect(G.by_name("irr"), EmpiricalMeasure.uniform_grid(256))
    assert d < 1e-2


# --- Birkhoff means


def test_birkhoff_identity():
    r = birkhoff_mean(LiftedWord(G.identity()), (0.3, 0.7), 100)
    assert r.mean == (0.0, 0.0)
    assert r.tail_spread == 0.0
    assert r.n == 100 and r.seed == (0.3, 0.7)


def test_birkhoff_translation_exact():
    # constant displacement: exact up to one rounding of (p+a)-p per step,
    # which the compensated summation caps at a single ulp overall
    for n in (7, 1234, 10 ** 4):
        r = birkhoff_mean(LiftedWord(G.by_name("irr")), (0.2, 0.9), n)
        assert abs(r.mean[0] - ALPHA) < 1e-15
        assert abs(r.mean[1] - 0.3) < 1e-15


def test_birkhoff_skew_equidistributes():
    r = birkhoff_mean(LiftedWord(G.by_name("skew")), (0.123, 0.456), 10 ** 5)
    assert math.hypot(r.mean[0] - ALPHA, r.mean[1] - 0.3) < 5e-3
    assert r.tail_spread < 5e-3


def test_birkhoff_rejects_bad_n():
    with pytest.raises(ValueError):
        birkhoff_mean(LiftedWord(G.identity()), (0.0, 0.0), 0)


# --- rotation set estimates


def test_rotation_set_of_translation_is_a_point():
    est = estimate_rotation_set(LiftedWord(G.by_name("irr")),
                                [(0.1, 0.2), (0.7, 0.7), (0.3, 0.9)], 50)
    assert est.diameter() < 1e-12
    assert np.abs(est.hull[0] - (ALPHA, 0.3)).max() < 1e-12


def test_rotation_set_of_dehn_twist_is_a_segment():
    est = estimate_rotation_set(G.by_name("dehn").lift(), grid_seeds(64), 1000)
    seg = [(0.0, 0.0), (0.0, 1.0)]
    assert hausdorff_distance(est.hull, seg) < 2e-2


def test_rotation_set_of_circle_skew_contains_both_extremes():
    est = estimate_rotation_set(LiftedWord(G.by_name("circ")),
                                grid_seeds(16), 1000)
    assert est.distance_to((0.0, 0.0)) < 2e-2
    assert est.distance_to((0.0, 0.1)) < 2e-2


def test_hull_vertices_are_samples():
    est = estimate_rotation_set(LiftedWord(G.by_name("circ")),
                                grid_seeds(8), 100)
    pool = {(float(x), float(y)) for x, y in est.samples}
    for v in est.hull:
        assert (float(v[0]), float(v[1])) in pool


def test_adding_seeds_never_shrinks_the_hull():
    lw = LiftedWord(G.by_name("circ"))
    few = estimate_rotation_set(lw, grid_seeds(4), 200)
    more = estimate_rotation_set(lw, np.vstack([grid_seeds(4), grid_seeds(6)]),
                                 200)
    for v in few.hull:
        assert more.distance_to(v) <= 1e-12


def test_rotation_set_csv(tmp_path):
    est = estimate_rotation_set(LiftedWord(G.by_name("irr")), [(0.0, 0.0)], 10)
    path = tmp_path / "rs.csv"
    est.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "kind,x,y"
    kinds = {r.split(",")[0] for r in rows[1:]}
    assert kinds == {"sample", "hull"}


# --- Cesaro orbit measures


def test_krylov_identity_gives_dirac():
    mu = krylov_bogolyubov(G.identity(), (0.3, 0.7), 10, 1)
    assert mu.atoms == [((0.3, 0.7), 1.0)]
    assert invariance_defect(G.identity(), mu) == 0.0


def test_krylov_periodic_orbit():
    mu = krylov_bogolyubov(G.by_name("half"), (0.0, 0.0), 8, 4)
    assert mu.atoms == [((0.0, 0.0), 0.5), ((0.5, 0.0), 0.5)]
    assert invariance_defect(G.by_name("half"), mu) < 1e-12


def test_krylov_irrational_translation_near_invariant():
    mu = krylov_bogolyubov(G.by_name("irr"), (0.0, 0.0), 10 ** 5, 10 ** 5)
    assert invariance_defect(G.by_name("irr"), mu) < 1e-2


def test_krylov_rejects_bad_window():
    with pytest.raises(ValueError):
        krylov_bogolyubov(G.identity(), (0.0, 0.0), 5, 6)
    with pytest.raises(ValueError):
        krylov_bogolyubov(G.identity(), (0.0, 0.0), 5, 0)


# --- irrotational lifts


def test_irrotational_lift_of_identity():
    lw = irrotational_lift(G.identity(), [(0.1, 0.1)], 10, 1e-6)
    assert lw is not None
    assert lw.extra_translation == (0, 0)


def test_irrotational_lift_undoes_deck_translation():
    # rotation vector (2,-1) comes entirely from the constant displacement
    lw = irrotational_lift(G.by_name("shift"), [(0.1, 0.1), (0.6, 0.3)],
                           50, 1e-6)
    assert lw is not None
    assert lw.extra_translation == (-2, 1)


def test_irrotational_lift_spread_rotation_set_gives_none():
    assert irrotational_lift(G.by_name("circ"), grid_seeds(8), 200,
                             1e-3) is None


def test_irrotational_lift_requires_identity_linear_part():
    with pytest.raises(NotIsotopicToIdentity):
        irrotational_lift(G.by_name("dehn"), [(0.0, 0.0)], 10, 1e-6)


# --- distortion


def test_distortion_identity_and_translation_vanish():
    assert distortion_ratio(LiftedWord(G.identity()), 100,
                            [((0.0, 0.0), (0.3, 0.4))]) == 0.0
    assert distortion_ratio(LiftedWord(G.by_name("irr")), 100,
                            [((0.0, 0.0), (0.3, 0.4))]) == 0.0


def test_distortion_of_skew_is_the_amplitude():
    # displacement (0, 0.05 sin 2 pi x); x=0 vs x=1/4 differ by 0.05 each step
    r = distortion_ratio(LiftedWord(G.by_name("skew0")), 1000,
                         [((0.0, 0.0), (0.25, 0.0))])
    assert abs(r - 0.05) < 1e-12


def test_distortion_requires_identity_linear_part():
    with pytest.raises(NotIsotopicToIdentity):
        distortion_ratio(LiftedWord(G.by_name("dehn")), 10,
                         [((0.0, 0.0), (0.5, 0.5))])
