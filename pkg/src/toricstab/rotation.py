"""Rotation numbers and fixed-ray structure of PL circle homeomorphisms.

A homeomorphic :class:`~toricstab.tropical.PLIntegralMap` acts on rays,
i.e. on the circle.  Rational rotation numbers are certified by an exact
periodic orbit; :func:`numeric_rotation` gives a floating-point estimate
for everything else.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import List, Optional, Sequence, Tuple

from .errors import OrientationError, PreconditionError, SingularMatrixError
from .lattice import (
    Direction,
    IntMatrix,
    QuadraticNumber,
    ccw_between,
    ccw_compare,
    det2,
    eigen_directions,
    in_closed_arc,
    primitive,
    same_direction,
)
from .tropical import PLIntegralMap, compose, require_homeomorphism

DEFAULT_MAX_PERIOD = 24


@dataclass(frozen=True)
class FixedComponent:
    """A connected component of the set of fixed rays.

    Points carry their ``direction`` and eigenvalue; arcs carry rational
    endpoints ``start`` -> ``end`` (counterclockwise) and the scalar by which
    the map multiplies them.  The whole circle is an arc with no endpoints.
    """

    kind: str  # "point" | "arc"
    stability: str  # "attracting" | "repelling" | "semistable" | "neutral"
    rational: bool
    eigenvalue: QuadraticNumber
    direction: Optional[Direction] = None
    start: Optional[tuple] = None
    end: Optional[tuple] = None

    @property
    def full_circle(self) -> bool:
        return self.kind == "arc" and self.start is None

    def contains(self, v) -> bool:
        if self.kind == "point":
            return self.direction == Direction.of(v)
        if self.full_circle:
            return True
        return in_closed_arc(self.start, Direction.of(v).vec, self.end)

    def rational_ray(self):
        """A rational fixed ray belonging to this component, if any."""
        if self.kind == "point":
            return self.direction.ray
        if self.full_circle:
            return (1, 0)
        return self.start

    def to_json(self):
        out = {
            "kind": self.kind,
            "stability": self.stability,
            "rational": self.rational,
            "eigenvalue": str(self.eigenvalue),
        }
        if self.kind == "point":
            out["direction"] = (
                list(self.direction.ray) if self.rational else [str(c) for c in self.direction.vec]
            )
            out["angle"] = round(self.direction.angle(), 12)
        elif self.full_circle:
            out["full_circle"] = True
        else:
            out["start"] = list(self.start)
            out["end"] = list(self.end)
        return out


def _positive_scalar(M: IntMatrix) -> bool:
    return M.is_scalar() and M.a > 0


def _side_motion(T: PLIntegralMap, j: int, e, side: int) -> str:
    """How rays just to one side of the fixed ray ``e`` move under piece ``j``.

    ``side`` is +1 for the counterclockwise side and -1 for the clockwise one.
    Returns ``"A"`` (pulled toward ``e``), ``"R"`` (pushed away) or ``"F"``.

    The motion sign of a linear piece is the sign of the quadratic form
    ``det(x, M x)``, which only changes at eigen-lines; probing between
    ``e`` and the nearest eigen-line or cone boundary is therefore exact.
    """
    M = T.pieces[j]
    if _positive_scalar(M):
        return "F"
    a, b = T.fan.rays[j], T.fan.rays[(j + 1) % len(T.fan)]
    ev = e.vec
    lines = [] if M.is_scalar() else eigen_directions(M).all_directions
    if side > 0:
        cands = [x.vec for x in lines if ccw_between(ev, x.vec, b)] + [b]
        near = min(cands, key=cmp_to_key(lambda x, y: ccw_compare(ev, x, y)))
    else:
        cands = [x.vec for x in lines if ccw_between(a, x.vec, ev)] + [a]
        near = max(cands, key=cmp_to_key(lambda x, y: ccw_compare(a, x, y)))
    probe = (ev[0] + near[0], ev[1] + near[1])
    s = M.motion_sign(probe)
    if s == 0:
        return "F"
    toward = (s < 0) if side > 0 else (s > 0)
    return "A" if toward else "R"


def _combine(cw: str, ccw: str) -> str:
    if cw == "A" and ccw == "A":
        return "attracting"
    if cw == "R" and ccw == "R":
        return "repelling"
    return "semistable"


def _sort_components(comps):
    def key(c):
        if c.kind == "point":
            return c.direction.vec
        return c.start if c.start is not None else (1, 0)

    return sorted(comps, key=cmp_to_key(lambda x, y: ccw_compare((1, 0), key(x), key(y))))


def fixed_components(T: PLIntegralMap) -> List[FixedComponent]:
    """Connected components of the fixed-ray set of a homeomorphic ``T``.

    Components are listed counterclockwise starting from the direction (1, 0).
    """
    orientation = require_homeomorphism(T)
    rays, pieces = T.fan.rays, T.pieces
    n = len(pieces)
    scalar = [_positive_scalar(M) for M in pieces]
    if all(scalar):
        return [FixedComponent("arc", "neutral", True, QuadraticNumber(pieces[0].a))]

    arcs = []
    for j in range(n):
        if scalar[j] and not scalar[j - 1]:
            k = j
            while scalar[(k + 1) % n]:
                k += 1
            arcs.append((j, k % n))
    endpoints = set()
    for j, k in arcs:
        endpoints.add(rays[j])
        endpoints.add(rays[(k + 1) % n])

    points = {}
    for j, M in enumerate(pieces):
        if scalar[j] or M.is_scalar():
            continue
        a, b = rays[j], rays[(j + 1) % n]
        for e, lam in eigen_directions(M).fixed:
            if in_closed_arc(a, e.vec, b) and e not in points:
                if e.rational and e.ray in endpoints:
                    continue
                points[e] = lam

    if orientation == "reversing":
        square = fixed_components(compose(T, T))

    comps = []
    for j, k in arcs:
        s, t = rays[j], rays[(k + 1) % n]
        cw = _side_motion(T, j - 1, Direction(*s), -1)
        ccw = _side_motion(T, (k + 1) % n, Direction(*t), +1)
        comps.append(
            FixedComponent("arc", _combine(cw, ccw), True, QuadraticNumber(pieces[j].a), start=s, end=t)
        )
    for e, lam in points.items():
        if orientation == "reversing":
            stab = next(c.stability for c in square if c.contains(e))
        else:
            i = T.fan.cone_index(e.vec)
            left = i - 1 if same_direction(rays[i], e.vec) else i
            stab = _combine(_side_motion(T, left, e, -1), _side_motion(T, i, e, +1))
        comps.append(FixedComponent("point", stab, e.rational, lam, direction=e))
    return _sort_components(comps)


# ---------------------------------------------------------------------------
# numeric estimate


class _Lift:
    """A continuous lift of the circle map, evaluated in floating point."""

    def __init__(self, T: PLIntegralMap):
        self.mats = [tuple(float(c) for c in (M.a, M.b, M.c, M.d)) for M in T.pieces]
        rays = T.fan.rays
        n = len(rays)
        th0 = math.atan2(rays[0][1], rays[0][0]) % (2 * math.pi)
        self.theta = [th0]
        for i in range(n - 1):
            a, b = rays[i], rays[i + 1]
            self.theta.append(self.theta[-1] + math.atan2(det2(a, b), a[0] * b[0] + a[1] * b[1]))
        imgs = [M.apply(u) for M, u in zip(T.pieces, rays)]
        self.img = [(float(x), float(y)) for x, y in imgs]
        L0 = math.atan2(self.img[0][1], self.img[0][0])
        self.lift = [L0]
        for i in range(n - 1):
            self.lift.append(self.lift[-1] + _angle(self.img[i], self.img[i + 1]))

    def step(self, x):
        """Return ``(next_unit_vector, angular_displacement)`` for unit vector ``x``."""
        phi = math.atan2(x[1], x[0])
        phi = self.theta[0] + ((phi - self.theta[0]) % (2 * math.pi))
        i = max(0, bisect.bisect_right(self.theta, phi) - 1)
        a, b, c, d = self.mats[i]
        y = (a * x[0] + b * x[1], c * x[0] + d * x[1])
        F = self.lift[i] + _angle(self.img[i], y)
        norm = math.hypot(*y)
        return (y[0] / norm, y[1] / norm), F - phi


def _angle(u, v) -> float:
    return math.atan2(u[0] * v[1] - u[1] * v[0], u[0] * v[0] + u[1] * v[1])


def _unit(seed):
    x, y = float(seed[0]), float(seed[1])
    n = math.hypot(x, y)
    return (x / n, y / n)


def numeric_rotation(T: PLIntegralMap, iterations: int = 10_000, seed=(1, 0)) -> float:
    """Birkhoff average of the lift displacement, reduced to ``[0, 1)``."""
    if require_homeomorphism(T) != "preserving":
        raise OrientationError(
            "map reverses orientation; its rotation number is 0 (use exact_rotation)"
        )
    if iterations < 1:
        raise PreconditionError("iterations must be >= 1")
    lift = _Lift(T)
    x = _unit(seed)
    total = 0.0
    for _ in range(iterations):
        x, disp = lift.step(x)
        total += disp
    return (total / (2 * math.pi * iterations)) % 1.0


def numeric_orbit_angles(T: PLIntegralMap, iterations: int, seed=(1, 0)) -> List[float]:
    """Angles in ``[0, 2*pi)`` of the floating-point orbit of ``seed``."""
    lift = _Lift(T)
    x = _unit(seed)
    out = [math.atan2(x[1], x[0]) % (2 * math.pi)]
    for _ in range(iterations):
        x, _ = lift.step(x)
        out.append(math.atan2(x[1], x[0]) % (2 * math.pi))
    return out


# ---------------------------------------------------------------------------
# exact certificates


@dataclass(frozen=True)
class RotationCertificate:
    kind: str  # "rational" | "reversing" | "undetermined"
    orientation: str
    m: Optional[int] = None
    n: Optional[int] = None
    orbit: Optional[Tuple[tuple, ...]] = None
    witness: Optional[FixedComponent] = None
    witness_orbit: Optional[Tuple[Direction, ...]] = None
    fixed: Tuple[FixedComponent, ...] = ()
    period_two: Tuple[FixedComponent, ...] = ()
    searched_up_to: Optional[int] = None
    numeric_estimate: Optional[float] = None

    @property
    def rho(self) -> Optional[Fraction]:
        if self.kind == "undetermined":
            return None
        return Fraction(self.m, self.n)

    @property
    def is_rational(self) -> bool:
        return self.kind in ("rational", "reversing")

    def to_json(self):
        if self.kind == "undetermined":
            return {
                "verdict": "undetermined",
                "searched": self.searched_up_to,
                "estimate": round(self.numeric_estimate, 12),
                "orientation": self.orientation,
            }
        out = {"rho": {"m": self.m, "n": self.n}, "orientation": self.orientation}
        if self.orbit is not None:
            out["orbit"] = [list(r) for r in self.orbit]
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
            out["witness_orbit"] = [[str(c) for c in d.vec] for d in self.witness_orbit]
        if self.kind == "reversing":
            out["fixed_components"] = [c.to_json() for c in self.fixed]
            out["period_two"] = [c.to_json() for c in self.period_two]
        return out


def _cyclic_step(orbit_vecs) -> int:
    n = len(orbit_vecs)
    order = sorted(range(n), key=cmp_to_key(lambda i, j: ccw_compare((1, 0), orbit_vecs[i], orbit_vecs[j])))
    pos = {k: p for p, k in enumerate(order)}
    steps = {(pos[(k + 1) % n] - pos[k]) % n for k in range(n)}
    if len(steps) != 1:
        raise AssertionError(f"orbit does not rotate rigidly in cyclic order: steps {sorted(steps)}")
    return steps.pop()


def _rational_certificate(T: PLIntegralMap, n: int, comps) -> RotationCertificate:
    ray = next((c.rational_ray() for c in comps if c.rational_ray() is not None), None)
    if ray is not None:
        orbit = [ray]
        for _ in range(n - 1):
            orbit.append(T.image_ray(orbit[-1]))
        if T.image_ray(orbit[-1]) != ray:
            raise AssertionError("periodic ray failed to close up")
        s = _cyclic_step(orbit)
        return RotationCertificate("rational", "preserving", s % n if n > 1 else 0, n, tuple(orbit))
    witness = comps[0]
    dirs = [witness.direction]
    for _ in range(n - 1):
        dirs.append(Direction(*T(dirs[-1].vec)))
    if Direction(*T(dirs[-1].vec)) != dirs[0]:
        raise AssertionError("irrational periodic direction failed to close up")
    s = _cyclic_step([d.vec for d in dirs])
    return RotationCertificate(
        "rational", "preserving", s % n if n > 1 else 0, n,
        witness=witness, witness_orbit=tuple(dirs),
    )


def exact_rotation(T: PLIntegralMap, max_period: int = DEFAULT_MAX_PERIOD) -> RotationCertificate:
    """Certify the rotation number by searching for a periodic ray of period <= max_period."""
    if max_period < 1:
        raise PreconditionError("max_period must be >= 1")
    orientation = require_homeomorphism(T)
    if orientation == "reversing":
        fixed = fixed_components(T)
        square = fixed_components(compose(T, T))
        period_two = tuple(
            c for c in square
            if not (c.kind == "point" and any(f.direction == c.direction for f in fixed))
        )
        return RotationCertificate("reversing", "reversing", 0, 1, fixed=tuple(fixed), period_two=period_two)
    U = T
    for n in range(1, max_period + 1):
        if n > 1:
            U = compose(T, U)
        comps = fixed_components(U)
        if comps:
            return _rational_certificate(T, n, comps)
    return RotationCertificate(
        "undetermined", "preserving",
        searched_up_to=max_period, numeric_estimate=numeric_rotation(T, 10_000),
    )


def monomial_rationality_test(A: IntMatrix) -> bool:
    """True iff some power of ``A`` has a real eigenvalue, i.e. rho(T_A) is rational.

    The ratio of conjugate complex eigenvalues of an integer matrix is a root
    of unity of order 1, 2, 3, 4 or 6 whenever it is one at all, so the
    twelfth power decides.
    """
    if A.det == 0:
        raise SingularMatrixError(f"monomial matrix {A} is singular")
    return (A ** 12).discriminant >= 0


@dataclass(frozen=True)
class DensityReport:
    estimate: float
    checkpoints: Tuple[int, ...]
    gaps: Tuple[float, ...]

    @property
    def shrinking(self) -> bool:
        return all(b <= a for a, b in zip(self.gaps, self.gaps[1:]))

    @property
    def max_gap(self) -> float:
        return self.gaps[-1]

    def to_json(self):
        return {
            "estimate": self.estimate,
            "checkpoints": list(self.checkpoints),
            "max_gaps": list(self.gaps),
            "shrinking": self.shrinking,
            "note": "empirical density evidence, not a proof",
        }


def _max_gap(angles: Sequence[float]) -> float:
    a = sorted(angles)
    gaps = [b - x for x, b in zip(a, a[1:])]
    gaps.append(a[0] + 2 * math.pi - a[-1])
    return max(gaps)


def denjoy_statement_check(
    T: PLIntegralMap, max_period: int = DEFAULT_MAX_PERIOD, iterations: int = 10_000, seed=(1, 0)
) -> DensityReport:
    """Largest angular gap of a long orbit, for maps with presumed irrational rotation."""
    cert = exact_rotation(T, max_period)
    if cert.kind != "undetermined":
        raise PreconditionError(f"rotation number certified rational ({cert.m}/{cert.n})")
    est = cert.numeric_estimate
    for q in range(1, max_period + 1):
        p = round(est * q)
        if abs(est - p / q) <= 1e-3:
            raise PreconditionError(f"estimate {est:.6f} is within 1e-3 of {p}/{q}")
    angles = numeric_orbit_angles(T, iterations, seed)
    checkpoints = []
    k = 10
    while k < iterations:
        checkpoints.append(k)
        k *= 10
    checkpoints.append(iterations)
    gaps = tuple(_max_gap(angles[: c + 1]) for c in checkpoints)
    return DensityReport(est, tuple(checkpoints), gaps)
