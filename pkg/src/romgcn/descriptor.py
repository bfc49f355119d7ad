"""Directional node pair descriptors.

A directional node is a 3D position with an optional unit direction vector.
The main export, :func:`dnp`, maps an unordered pair of directional nodes to
the quadruplet <alpha, beta, gamma, d>:

* ``d`` — Euclidean distance between the positions.
* ``alpha`` — angle between the source direction and the source-to-target
  segment, in [0, pi].
* ``beta`` — angle between the target direction and the in-plane transverse
  axis of the source frame, in [0, pi].
* ``gamma`` — signed azimuth of the target direction around that axis, in
  (-pi, pi]. This is the only component that changes (sign-flips) under
  mirror reflection, so it carries the pair's chirality.

The source node is the one whose direction makes the smaller angle with the
connecting segment; ties are broken by evaluating both assignments and
keeping the lexicographically smaller (alpha, beta, gamma), which keeps the
descriptor exactly symmetric in its arguments.

Degenerate configurations (missing directions, directions collinear with
the segment) take fixed corner-case values instead of the frame
construction; see :func:`dnp`.

Also provided are the three weaker baseline descriptors used for ablation:
:func:`ppf`, :func:`distance_theta`, and :func:`distance_only`. ``ppf`` is
rigid-invariant but maps a pair and its mirror image to identical features,
which is exactly the failure mode the chirality test suites exercise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CoincidentNodes, MissingDirection
from .geometry import (
    EPS_GEOM,
    as_vec3,
    clamp_unit,
    cross,
    dot,
    norm,
    normalize,
)

PI = math.pi


@dataclass(frozen=True)
class DirectionalNode:
    """A 3D position with an optional unit direction.

    The direction is normalized at construction; a near-zero direction
    raises DegenerateVector rather than being silently treated as absent.
    """

    position: np.ndarray
    direction: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        if self.direction is not None:
            d = as_vec3(self.direction)
            # already-unit vectors are kept bit-for-bit so that exact mirror
            # arithmetic (z negation) stays exact through transformed()
            if abs(norm(d) - 1.0) > 1e-12:
                d = normalize(d)
            object.__setattr__(self, "direction", d)

    @property
    def has_direction(self) -> bool:
        return self.direction is not None

    def transformed(self, t) -> "DirectionalNode":
        """The node under a rigid transform (direction rotates only)."""
        from .geometry import apply_transform

        d = None if self.direction is None else apply_transform(t, self.direction, is_direction=True)
        return DirectionalNode(apply_transform(t, self.position), d)


@dataclass(frozen=True)
class DnpQuadruplet:
    alpha: float
    beta: float
    gamma: float
    d: float

    def __post_init__(self):
        if not (-1e-12 <= self.alpha <= PI + 1e-12):
            raise ValueError(f"alpha out of [0, pi]: {self.alpha}")
        if not (-1e-12 <= self.beta <= PI + 1e-12):
            raise ValueError(f"beta out of [0, pi]: {self.beta}")
        if not (-PI - 1e-12 < self.gamma <= PI + 1e-12):
            raise ValueError(f"gamma out of (-pi, pi]: {self.gamma}")
        if not self.d > 0.0:
            raise ValueError(f"d must be positive: {self.d}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.d)


@dataclass(frozen=True)
class PairAngles:
    """Angles between each node's direction and the segment toward the other.

    A field is None exactly when the corresponding node has no direction.
    """

    theta_i: float | None
    theta_j: float | None


@dataclass(frozen=True)
class SourceTargetAssignment:
    """Canonical source/target order plus the source-anchored frame (u, v, w).

    u is the source direction; v is the unit transverse axis in the
    u/segment plane; w = u x v completes the triple and carries the
    pair's handedness.
    """

    source: DirectionalNode
    target: DirectionalNode
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


def _distance(a: DirectionalNode, b: DirectionalNode) -> float:
    d = norm(a.position - b.position)
    if d <= EPS_GEOM:
        raise CoincidentNodes(f"nodes coincide (distance {d:g})")
    return d


def pair_angles(a: DirectionalNode, b: DirectionalNode) -> PairAngles:
    """theta_i/theta_j between each direction and the normalized segment."""
    d = _distance(a, b)
    v_ba = (b.position - a.position) / d
    theta_i = None
    theta_j = None
    if a.direction is not None:
        theta_i = math.acos(clamp_unit(dot(a.direction, v_ba)))
    if b.direction is not None:
        theta_j = math.acos(clamp_unit(dot(b.direction, -v_ba)))
    return PairAngles(theta_i=theta_i, theta_j=theta_j)


def _axial(theta: float) -> bool:
    """Is the angle within EPS_GEOM of 0 or pi (direction along the segment)?"""
    return theta <= EPS_GEOM or theta >= PI - EPS_GEOM


def _frame(source: DirectionalNode, target: DirectionalNode) -> SourceTargetAssignment:
    d = norm(target.position - source.position)
    D = (target.position - source.position) / d
    u = source.direction
    v = normalize(D - dot(u, D) * u)
    w = cross(u, v)
    return SourceTargetAssignment(source=source, target=target, u=u, v=v, w=w)


def _general_case(source: DirectionalNode, target: DirectionalNode) -> tuple[float, float, float]:
    fr = _frame(source, target)
    d = norm(target.position - source.position)
    D = (target.position - source.position) / d
    ut = target.direction
    alpha = math.acos(clamp_unit(dot(fr.u, D)))
    beta = math.acos(clamp_unit(dot(fr.v, ut)))
    if beta <= EPS_GEOM or beta >= PI - EPS_GEOM:
        # azimuth undefined when the target direction sits on the v axis
        gamma = PI / 2
    else:
        gamma = math.atan2(dot(fr.w, ut), dot(fr.u, ut))
        if gamma <= -PI + EPS_GEOM or gamma >= PI - EPS_GEOM:
            gamma = PI  # single representative for the +-pi branch point
    return alpha, beta, gamma


def dnp(a: DirectionalNode, b: DirectionalNode) -> DnpQuadruplet:
    """The <alpha, beta, gamma, d> descriptor of an unordered node pair.

    Corner cases, classified with EPS_GEOM:

    * no directions                 -> (0, 0, 0)
    * one direction, angle theta_k  -> (theta_k, 0, 0)
    * theta_i = theta_j = 0         -> (0, pi/2, pi)
    * theta_i = theta_j = pi        -> (pi, pi/2, pi)
    * {theta_i, theta_j} = {0, pi}  -> (0, pi/2, 0)

    If exactly one direction is collinear with the segment but the other is
    not, the frame is anchored at the non-collinear node (the collinear one
    cannot define a transverse axis) and the general formula applies.
    """
    d = _distance(a, b)
    th = pair_angles(a, b)

    if th.theta_i is None and th.theta_j is None:
        return DnpQuadruplet(0.0, 0.0, 0.0, d)
    if th.theta_i is None or th.theta_j is None:
        theta_k = th.theta_i if th.theta_i is not None else th.theta_j
        return DnpQuadruplet(theta_k, 0.0, 0.0, d)

    ti, tj = th.theta_i, th.theta_j
    if _axial(ti) and _axial(tj):
        if ti <= EPS_GEOM and tj <= EPS_GEOM:
            return DnpQuadruplet(0.0, PI / 2, PI, d)
        if ti >= PI - EPS_GEOM and tj >= PI - EPS_GEOM:
            return DnpQuadruplet(PI, PI / 2, PI, d)
        return DnpQuadruplet(0.0, PI / 2, 0.0, d)

    if _axial(ti):
        alpha, beta, gamma = _general_case(b, a)
    elif _axial(tj):
        alpha, beta, gamma = _general_case(a, b)
    elif abs(ti - tj) <= EPS_GEOM:
        cand_ab = _general_case(a, b)
        cand_ba = _general_case(b, a)
        alpha, beta, gamma = min(cand_ab, cand_ba)
    elif ti < tj:
        alpha, beta, gamma = _general_case(a, b)
    else:
        alpha, beta, gamma = _general_case(b, a)
    return DnpQuadruplet(alpha, beta, gamma, d)


def source_target(a: DirectionalNode, b: DirectionalNode) -> SourceTargetAssignment:
    """The canonical assignment and frame for a general-case pair.

    Raises MissingDirection unless both nodes carry directions, and
    CoincidentNodes / DegenerateVector for unusable geometry. For exact
    theta ties this returns the assignment the tie-break selects.
    """
    if a.direction is None or b.direction is None:
        raise MissingDirection("source/target assignment needs both directions")
    th = pair_angles(a, b)
    ti, tj = th.theta_i, th.theta_j
    if _axial(ti) and _axial(tj):
        raise ValueError("no frame exists for fully axial configurations")
    if _axial(ti):
        return _frame(b, a)
    if _axial(tj):
        return _frame(a, b)
    if abs(ti - tj) <= EPS_GEOM:
        if _general_case(a, b) <= _general_case(b, a):
            return _frame(a, b)
        return _frame(b, a)
    if ti < tj:
        return _frame(a, b)
    return _frame(b, a)


def reconstruct_canonical_pair(q: DnpQuadruplet) -> tuple[DirectionalNode, DirectionalNode]:
    """A representative pair whose descriptor is ``q`` (general case only).

    The source sits at the origin with direction +z; the segment lies in the
    xz half-plane at angle alpha from +z; the target direction is placed so
    the frame reads back (beta, gamma). Only valid away from the alpha/beta
    boundary degeneracies, where the azimuth is meaningful.
    """
    margin = EPS_GEOM
    if not (margin < q.alpha < PI - margin):
        raise ValueError(f"alpha too close to a boundary for reconstruction: {q.alpha}")
    if not (margin < q.beta < PI - margin):
        raise ValueError(f"beta too close to a boundary for reconstruction: {q.beta}")
    u = np.array([0.0, 0.0, 1.0])
    D = np.array([math.sin(q.alpha), 0.0, math.cos(q.alpha)])
    v = np.array([1.0, 0.0, 0.0])
    w = cross(u, v)  # +y
    ut = math.cos(q.beta) * v + math.sin(q.beta) * (math.cos(q.gamma) * u + math.sin(q.gamma) * w)
    source = DirectionalNode(np.zeros(3), u)
    target = DirectionalNode(q.d * D, ut)
    return source, target


def frame_points(source: DirectionalNode, target: DirectionalNode) -> np.ndarray:
    """The 4 defining points {n_s, n_s+u_s, n_t, n_t+u_t} as a (4, 3) array."""
    if source.direction is None or target.direction is None:
        raise MissingDirection("frame points need both directions")
    return np.stack(
        [
            source.position,
            source.position + source.direction,
            target.position,
            target.position + target.direction,
        ]
    )


def ppf(a: DirectionalNode, b: DirectionalNode) -> tuple[float, float, float, float]:
    """Point-pair feature (||d||, ang(u_a, d), ang(u_b, d), ang(u_a, u_b)).

    d points from a to b and is used for both middle components, so the
    feature is order-sensitive; all angles are unsigned, so mirror images
    produce identical output.
    """
    if a.direction is None or b.direction is None:
        raise MissingDirection("ppf needs both directions")
    dist = _distance(a, b)
    dvec = (b.position - a.position) / dist
    ang1 = math.acos(clamp_unit(dot(a.direction, dvec)))
    ang2 = math.acos(clamp_unit(dot(b.direction, dvec)))
    ang3 = math.acos(clamp_unit(dot(a.direction, b.direction)))
    return (dist, ang1, ang2, ang3)


def distance_theta(a: DirectionalNode, b: DirectionalNode) -> tuple[float, float]:
    """Distance plus the angle between the two direction vectors."""
    if a.direction is None or b.direction is None:
        raise MissingDirection("distance_theta needs both directions")
    dist = _distance(a, b)
    theta = math.acos(clamp_unit(dot(a.direction, b.direction)))
    return (dist, theta)


def distance_only(a: DirectionalNode, b: DirectionalNode) -> float:
    """Euclidean distance between the node positions."""
    return _distance(a, b)
