import math

import numpy as np
import pytest

from romgcn.descriptor import (
    DirectionalNode,
    DnpQuadruplet,
    distance_only,
    distance_theta,
    dnp,
    frame_points,
    pair_angles,
    ppf,
    reconstruct_canonical_pair,
    source_target,
)
from romgcn.errors import CoincidentNodes, DegenerateVector, MissingDirection
from romgcn.geometry import kabsch_rmsd, mirror_xy, random_transform

PI = math.pi


def node(pos, direction=None):
    return DirectionalNode(np.array(pos, dtype=float), direction)


def random_pair(rng, scale=5.0):
    a = node(rng.normal(size=3) * scale, rng.normal(size=3))
    b = node(rng.normal(size=3) * scale, rng.normal(size=3))
    return a, b


def oracle_quadruplet(a, b):
    """Matrix-based reference: rotate the pair into canonical pose, read angles.

    Independent of the dot-product implementation path in the package: the
    source frame is built by explicit orthonormalization and applied as an
    inverse rotation, then the angles come from the spherical coordinates of
    the transformed target direction.
    """
    fr = source_target(a, b)
    basis = np.stack([fr.v, fr.w, fr.u])  # rows: maps world -> frame coords
    disp = fr.target.position - fr.source.position
    d = np.linalg.norm(disp)
    disp_f = basis @ (disp / d)
    ut_f = basis @ fr.target.direction
    alpha = math.atan2(math.hypot(disp_f[0], disp_f[1]), disp_f[2])
    beta = math.atan2(math.hypot(ut_f[1], ut_f[2]), ut_f[0])
    gamma = math.atan2(ut_f[1], ut_f[2])
    return alpha, beta, gamma, d


# --- pair angles ---

def test_pair_angles_collinear():
    th = pair_angles(node([0, 0, 0], [1, 0, 0]), node([2, 0, 0], [1, 0, 0]))
    assert th.theta_i == pytest.approx(0.0, abs=1e-12)
    assert th.theta_j == pytest.approx(PI, abs=1e-12)


def test_pair_angles_orthogonal():
    th = pair_angles(node([0, 0, 0], [0, 0, 1]), node([2, 0, 0], [1, 2, 3]))
    assert th.theta_i == pytest.approx(PI / 2, abs=1e-12)


def test_pair_angles_missing_direction():
    th = pair_angles(node([0, 0, 0]), node([1, 0, 0], [0, 1, 0]))
    assert th.theta_i is None
    assert th.theta_j == pytest.approx(PI / 2, abs=1e-12)


def test_pair_angles_coincident_positions():
    with pytest.raises(CoincidentNodes):
        pair_angles(node([0, 0, 0]), node([0, 0, 0]))


# --- corner cases ---

def test_dnp_no_directions():
    q = dnp(node([0, 0, 0]), node([3.7, 0, 0]))
    assert q.as_tuple() == (0.0, 0.0, 0.0, 3.7)


def test_dnp_single_direction():
    q = dnp(node([0, 0, 0], [0, 0, 1]), node([2, 0, 0]))
    assert q.as_tuple() == (pytest.approx(PI / 2, abs=1e-12), 0.0, 0.0, 2.0)
    # symmetric: direction on the other node, angle measured from that node
    q2 = dnp(node([0, 0, 0]), node([2, 0, 0], [0, 0, 1]))
    assert q2.as_tuple() == (pytest.approx(PI / 2, abs=1e-12), 0.0, 0.0, 2.0)


def test_dnp_both_parallel_outgoing():
    # theta_i = theta_j = 0: both directions point away from each other
    q = dnp(node([0, 0, 0], [1, 0, 0]), node([2, 0, 0], [-1, 0, 0]))
    assert q.as_tuple() == (0.0, PI / 2, PI, 2.0)


def test_dnp_both_antiparallel_incoming():
    # theta_i = theta_j = pi: both directions point at each other
    q = dnp(node([0, 0, 0], [-1, 0, 0]), node([2, 0, 0], [1, 0, 0]))
    assert q.as_tuple() == (PI, PI / 2, PI, 2.0)


def test_dnp_aligned_corner_case():
    # theta_i = 0, theta_j = pi: both directions along +x on the x axis
    q = dnp(node([0, 0, 0], [1, 0, 0]), node([2, 0, 0], [1, 0, 0]))
    assert q.as_tuple() == (0.0, PI / 2, 0.0, 2.0)


def test_dnp_mixed_axial_source():
    # smaller angle is exactly 0, the other interior: frame anchors at the
    # non-degenerate node and the beta-degeneracy rule pins gamma
    q = dnp(node([0, 0, 0], [1, 0, 0]), node([2, 0, 0], [0, 1, 1]))
    assert q.alpha == pytest.approx(PI / 2, abs=1e-12)
    assert q.beta == pytest.approx(PI, abs=1e-12)
    assert q.gamma == PI / 2
    t = random_transform(3)
    qt = dnp(node([0, 0, 0], [1, 0, 0]).transformed(t), node([2, 0, 0], [0, 1, 1]).transformed(t))
    assert max(abs(x - y) for x, y in zip(q.as_tuple(), qt.as_tuple())) < 1e-9


def test_dnp_coincident_positions():
    with pytest.raises(CoincidentNodes):
        dnp(node([0, 0, 0], [1, 0, 0]), node([0, 0, 0], [0, 1, 0]))


# --- general case ---

def test_dnp_worked_example():
    # frozen via the matrix-based oracle (see oracle_quadruplet below);
    # alpha, beta, d as derived by hand, gamma = +pi/2 in this frame
    a = node([0, 0, 0], [0, 0, 1])
    b = node([2, 0, 0], np.array([1.0, 1.0, 0.0]) / math.sqrt(2))
    q = dnp(a, b)
    assert q.alpha == pytest.approx(PI / 2, abs=1e-12)
    assert q.beta == pytest.approx(PI / 4, abs=1e-12)
    assert q.gamma == pytest.approx(PI / 2, abs=1e-12)
    assert q.d == pytest.approx(2.0, abs=1e-15)
    assert oracle_quadruplet(a, b) == pytest.approx(q.as_tuple(), abs=1e-12)


def test_dnp_matches_matrix_oracle():
    rng = np.random.default_rng(100)
    for _ in range(500):
        a, b = random_pair(rng)
        q = dnp(a, b)
        if q.beta < 1e-6 or q.beta > PI - 1e-6:
            continue  # oracle gamma is meaningless where the rule pins pi/2
        assert oracle_quadruplet(a, b) == pytest.approx(q.as_tuple(), abs=1e-9)


def test_dnp_permutation_exact():
    rng = np.random.default_rng(101)
    for _ in range(300):
        a, b = random_pair(rng)
        assert dnp(a, b).as_tuple() == dnp(b, a).as_tuple()


def test_dnp_permutation_exact_on_ties():
    # equal section angles by construction
    a = node([0, 0, 0], [1, 1, 0])
    b = node([2, 0, 0], [-1, 0, 1])
    th = pair_angles(a, b)
    assert th.theta_i == th.theta_j
    assert dnp(a, b).as_tuple() == dnp(b, a).as_tuple()


def test_dnp_rigid_invariance():
    rng = np.random.default_rng(102)
    for trial in range(300):
        a, b = random_pair(rng)
        t = random_transform(trial)
        q0 = dnp(a, b)
        q1 = dnp(a.transformed(t), b.transformed(t))
        assert max(abs(x - y) for x, y in zip(q0.as_tuple(), q1.as_tuple())) < 1e-9


def test_dnp_gamma_flips_under_mirror():
    rng = np.random.default_rng(103)
    m = mirror_xy()
    checked = 0
    while checked < 200:
        a, b = random_pair(rng)
        q = dnp(a, b)
        if min(q.beta, PI - q.beta) < 1e-6 or min(abs(q.gamma), PI - abs(q.gamma)) < 1e-6:
            continue
        qm = dnp(a.transformed(m), b.transformed(m))
        assert qm.alpha == pytest.approx(q.alpha, abs=1e-9)
        assert qm.beta == pytest.approx(q.beta, abs=1e-9)
        assert qm.gamma == pytest.approx(-q.gamma, abs=1e-9)
        assert qm.d == pytest.approx(q.d, abs=1e-12)
        checked += 1


def test_general_case_never_collides_with_single_direction_rows():
    # beta ~ 0 forces gamma = pi/2, so (x, 0, 0) stays reserved for corner rows
    rng = np.random.default_rng(104)
    for _ in range(500):
        a, b = random_pair(rng)
        q = dnp(a, b)
        if q.beta <= 1e-9:
            assert q.gamma == PI / 2


def test_quadruplet_validation():
    with pytest.raises(ValueError):
        DnpQuadruplet(alpha=-0.5, beta=0.0, gamma=0.0, d=1.0)
    with pytest.raises(ValueError):
        DnpQuadruplet(alpha=0.5, beta=4.0, gamma=0.0, d=1.0)
    with pytest.raises(ValueError):
        DnpQuadruplet(alpha=0.5, beta=0.5, gamma=0.0, d=0.0)


def test_directional_node_rejects_zero_direction():
    with pytest.raises(DegenerateVector):
        node([0, 0, 0], [0, 0, 0])


# --- reconstruction ---

def test_reconstruct_spec_quadruplets():
    for q in [
        DnpQuadruplet(PI / 2, PI / 4, -PI / 2, 2.0),
        DnpQuadruplet(PI / 2, PI / 2, 0.0, 1.0),
    ]:
        s, t = reconstruct_canonical_pair(q)
        q2 = dnp(s, t)
        assert q2.as_tuple() == pytest.approx(q.as_tuple(), abs=1e-9)


def test_reconstruct_round_trip_random():
    rng = np.random.default_rng(105)
    done = 0
    while done < 300:
        a, b = random_pair(rng)
        q = dnp(a, b)
        if min(q.alpha, PI - q.alpha, q.beta, PI - q.beta) < 1e-6:
            continue
        s, t = reconstruct_canonical_pair(q)
        q2 = dnp(s, t)
        assert max(abs(x - y) for x, y in zip(q.as_tuple(), q2.as_tuple())) < 1e-9
        fr = source_target(a, b)
        rmsd = kabsch_rmsd(frame_points(fr.source, fr.target), frame_points(s, t))
        assert rmsd < 1e-6
        done += 1


def test_reconstruct_transformed_pair_same_quadruplet():
    q = DnpQuadruplet(PI / 2, PI / 4, -PI / 2, 2.0)
    s, t = reconstruct_canonical_pair(q)
    tr = random_transform(8)
    q2 = dnp(s.transformed(tr), t.transformed(tr))
    assert q2.as_tuple() == pytest.approx(q.as_tuple(), abs=1e-9)


def test_reconstruct_rejects_boundary_quadruplets():
    with pytest.raises(ValueError):
        reconstruct_canonical_pair(DnpQuadruplet(0.0, PI / 4, 0.0, 1.0))
    with pytest.raises(ValueError):
        reconstruct_canonical_pair(DnpQuadruplet(PI / 4, PI, PI / 2, 1.0))


def test_source_target_frame_invariants():
    rng = np.random.default_rng(106)
    for _ in range(100):
        a, b = random_pair(rng)
        fr = source_target(a, b)
        assert np.array_equal(fr.u, fr.source.direction)
        assert abs(np.dot(fr.u, fr.v)) < 1e-9
        assert np.abs(np.cross(fr.u, fr.v) - fr.w).max() < 1e-12
        for axis in (fr.u, fr.v, fr.w):
            assert abs(np.linalg.norm(axis) - 1.0) < 1e-9
        # the source has the smaller (or tie-broken) section angle
        th = pair_angles(fr.source, fr.target)
        assert th.theta_i <= th.theta_j + 1e-9


# --- baselines ---

def test_ppf_perpendicular_parallel_directions():
    f = ppf(node([0, 0, 0], [0, 0, 1]), node([2, 0, 0], [0, 0, 1]))
    assert f == pytest.approx((2.0, PI / 2, PI / 2, 0.0), abs=1e-12)


def test_ppf_mirror_identical():
    rng = np.random.default_rng(107)
    m = mirror_xy()
    for _ in range(100):
        a, b = random_pair(rng)
        assert ppf(a.transformed(m), b.transformed(m)) == ppf(a, b)


def test_ppf_swap_relation():
    # under the printed definition (d = m2 - m1 in both middle slots), a swap
    # maps components 2,3 to their pi-complements in exchanged order
    a = node([0, 0, 0], [0, 0, 1])
    b = node([2, 0, 0], np.array([1.0, 2.0, 0.5]))
    f_ab = ppf(a, b)
    f_ba = ppf(b, a)
    assert f_ba[0] == f_ab[0]
    assert f_ba[1] == pytest.approx(PI - f_ab[2], abs=1e-12)
    assert f_ba[2] == pytest.approx(PI - f_ab[1], abs=1e-12)
    assert f_ba[3] == f_ab[3]


def test_ppf_missing_direction():
    with pytest.raises(MissingDirection):
        ppf(node([0, 0, 0]), node([1, 0, 0], [0, 1, 0]))


def test_distance_theta_parallel_and_opposite():
    assert distance_theta(node([0, 0, 0], [0, 1, 0]), node([2, 0, 0], [0, 1, 0]))[1] == 0.0
    assert distance_theta(node([0, 0, 0], [0, 1, 0]), node([2, 0, 0], [0, -1, 0]))[1] == pytest.approx(
        PI, abs=1e-12
    )


def test_distance_theta_not_injective_where_dnp_is():
    # same d and theta, different torsion: theta = pi/2 both, but the target
    # direction points along vs across the segment
    a1 = node([0, 0, 0], [0, 0, 1])
    b1 = node([2, 0, 0], [1, 0, 0])
    a2 = node([0, 0, 0], [0, 0, 1])
    b2 = node([2, 0, 0], [0, 1, 0])
    assert distance_theta(a1, b1) == pytest.approx(distance_theta(a2, b2), abs=1e-12)
    q1 = dnp(a1, b1)
    q2 = dnp(a2, b2)
    assert max(abs(x - y) for x, y in zip(q1.as_tuple(), q2.as_tuple())) > 0.1


def test_distance_only():
    assert distance_only(node([0, 0, 0]), node([3, 4, 0])) == 5.0
    t = random_transform(4)
    a, b = node([1, 2, 3]), node([4, 5, 6])
    assert abs(distance_only(a.transformed(t), b.transformed(t)) - distance_only(a, b)) < 1e-12
    assert distance_only(a, b) == distance_only(b, a)
