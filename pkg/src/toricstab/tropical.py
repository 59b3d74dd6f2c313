"""Piecewise-linear integral maps of the plane and their construction from supports.

A rational map ``(P1/P3, P2/P3)`` sends the one-parameter subgroup of
direction ``u`` to one of direction ``T(u)``, where each coordinate of
``T(u)`` is a difference of min-of-linear-forms over monomial supports.
:func:`tropicalize` reads that map off as a :class:`PLIntegralMap`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from .errors import NotHomeomorphismError, RayCollapsedError, SingularMatrixError
from .fan import P2_FAN, Fan, fan_validate
from .lattice import (
    IntMatrix,
    LatticeVector,
    RationalRay,
    as_vector,
    ccw_between,
    content,
    det2,
    dot2,
    primitive,
)

_AXES = [(1, 0), (0, 1), (-1, 0), (0, -1)]


@dataclass(frozen=True)
class MonomialSupport:
    """Exponent vectors of the monomials of a polynomial."""

    exponents: FrozenSet[LatticeVector]

    def __init__(self, exponents: Iterable[Sequence[int]]):
        exps = frozenset((int(e[0]), int(e[1])) for e in exponents)
        if not exps:
            raise ValueError("monomial support must be nonempty")
        if any(x < 0 or y < 0 for x, y in exps):
            raise ValueError("exponents must be non-negative")
        object.__setattr__(self, "exponents", exps)

    def sorted(self):
        return sorted(self.exponents)


def nu_eval(s: MonomialSupport, u: Sequence[int]) -> int:
    """``min <e, u>`` over the exponents ``e`` of the support."""
    return min(dot2(e, u) for e in s.exponents)


def _active(s: MonomialSupport, u) -> LatticeVector:
    return min(s.exponents, key=lambda e: (dot2(e, u), e))


def _break_rays(s: MonomialSupport) -> List[RationalRay]:
    """Rays of the normal fan of the Newton polygon (where the min has a tie)."""
    out = set()
    exps = sorted(s.exponents)
    for i, e in enumerate(exps):
        for f in exps[i + 1:]:
            n = primitive((f[1] - e[1], e[0] - f[0]))
            for cand in (n, (-n[0], -n[1])):
                m = nu_eval(s, cand)
                hits = sum(1 for g in exps if dot2(g, cand) == m)
                if hits >= 2:
                    out.add(cand)
    return sorted(out)


@dataclass(frozen=True)
class RationalMapData:
    """Supports of ``P1, P2, P3`` for the map ``(P1/P3, P2/P3)``.

    ``generic`` records whether coefficients are assumed general; the
    tropical map only sees supports.
    """

    p1: MonomialSupport
    p2: MonomialSupport
    p3: MonomialSupport
    generic: bool = True

    @classmethod
    def from_monomial(cls, A: IntMatrix) -> "RationalMapData":
        """Support triple of ``(x^a y^b, x^c y^d)`` with denominators cleared."""
        sx = max(0, -A.a, -A.c)
        sy = max(0, -A.b, -A.d)
        return cls(
            MonomialSupport([(A.a + sx, A.b + sy)]),
            MonomialSupport([(A.c + sx, A.d + sy)]),
            MonomialSupport([(sx, sy)]),
        )

    def to_json(self):
        return {
            "p1": [list(e) for e in self.p1.sorted()],
            "p2": [list(e) for e in self.p2.sorted()],
            "p3": [list(e) for e in self.p3.sorted()],
            "generic": self.generic,
        }


@dataclass(frozen=True)
class PLIntegralMap:
    """Continuous map linear on each cone of ``fan``, with integer pieces.

    ``pieces[i]`` acts on the cone from ``fan.rays[i]`` to
    ``fan.rays[i+1]``.  Adjacent pieces must agree on the shared ray.
    """

    fan: Fan
    pieces: Tuple[IntMatrix, ...]
    generic: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if len(pieces) != len(self.fan):
            raise ValueError("need exactly one piece per cone of the domain fan")
        n = len(pieces)
        for i, u in enumerate(self.fan.rays):
            left, right = pieces[i - 1], pieces[i]
            if left.apply(u) != right.apply(u):
                raise ValueError(
                    f"pieces {left} and {right} disagree on the shared ray {u}"
                )

    # -- evaluation ---------------------------------------------------------

    def piece_at(self, v) -> IntMatrix:
        return self.pieces[self.fan.cone_index(v)]

    def __call__(self, v):
        v = as_vector(v)
        return self.piece_at(v).apply(v)

    def evaluate_ray(self, r) -> Tuple[RationalRay, int]:
        img = self(r)
        if img == (0, 0):
            raise RayCollapsedError(f"ray collapsed: {tuple(r)} maps to the origin")
        return primitive(img), content(img)

    def image_ray(self, r) -> RationalRay:
        return self.evaluate_ray(r)[0]

    # -- structure ----------------------------------------------------------

    @property
    def degenerate(self) -> bool:
        return any(M.det == 0 for M in self.pieces)

    def linear_pieces(self) -> int:
        """Number of maximal cyclic runs of equal adjacent pieces."""
        n = len(self.pieces)
        breaks = sum(1 for i in range(n) if self.pieces[i - 1] != self.pieces[i])
        return max(1, breaks)

    def linear_matrix(self) -> Optional[IntMatrix]:
        """The single matrix when the map is globally linear, else ``None``."""
        if all(M == self.pieces[0] for M in self.pieces):
            return self.pieces[0]
        return None

    def simplified(self) -> "PLIntegralMap":
        """Drop domain rays across which the map is linear, keeping cones convex."""
        rays = list(self.fan.rays)
        pieces = list(self.pieces)
        changed = True
        while changed and len(rays) > 3:
            changed = False
            i = 0
            while i < len(rays) and len(rays) > 3:
                n = len(rays)
                prev_r, next_r = rays[i - 1], rays[(i + 1) % n]
                if pieces[i - 1] == pieces[i] and det2(prev_r, next_r) > 0:
                    del rays[i]
                    del pieces[i]
                    changed = True
                else:
                    i += 1
        if len(rays) == len(self.fan.rays):
            return self
        fan = fan_validate(rays)
        by_start = {r: pieces[k] for k, r in enumerate(rays)}
        return PLIntegralMap(fan, tuple(by_start[r] for r in fan.rays), self.generic)

    def homeomorphism(self) -> "HomeomorphismVerdict":
        v = self._cache.get("homeo")
        if v is None:
            v = is_homeomorphism(self)
            self._cache["homeo"] = v
        return v

    @property
    def orientation(self) -> Optional[str]:
        return self.homeomorphism().orientation

    def to_json(self):
        return {
            "fan": self.fan.to_json(),
            "pieces": [M.rows() for M in self.pieces],
            "linear_pieces": self.linear_pieces(),
            "degenerate": self.degenerate,
            "generic": self.generic,
        }


def _pieces_from_supports(fan: Fan, d: RationalMapData) -> List[IntMatrix]:
    pieces = []
    for c in fan.cones():
        w = (c.start[0] + c.end[0], c.start[1] + c.end[1])
        e1, e2, e3 = _active(d.p1, w), _active(d.p2, w), _active(d.p3, w)
        pieces.append(
            IntMatrix(e1[0] - e3[0], e1[1] - e3[1], e2[0] - e3[0], e2[1] - e3[1])
        )
    return pieces


def tropicalize(d: RationalMapData) -> PLIntegralMap:
    """The map ``u -> (nu(P1,u) - nu(P3,u), nu(P2,u) - nu(P3,u))``."""
    rays = set(_AXES)
    for s in (d.p1, d.p2, d.p3):
        rays.update(_break_rays(s))
    fan = fan_validate(rays)
    return PLIntegralMap(fan, tuple(_pieces_from_supports(fan, d)), d.generic).simplified()


def tropical_formula(d: RationalMapData, u) -> LatticeVector:
    """Direct double-min evaluation, independent of any piece table."""
    n3 = nu_eval(d.p3, u)
    return (nu_eval(d.p1, u) - n3, nu_eval(d.p2, u) - n3)


def from_monomial(A: IntMatrix) -> PLIntegralMap:
    if A.det == 0:
        raise SingularMatrixError(f"monomial matrix {A} is singular")
    return PLIntegralMap(P2_FAN, (A, A, A))


def evaluate_ray(T: PLIntegralMap, r) -> Tuple[RationalRay, int]:
    return T.evaluate_ray(r)


def compose(T: PLIntegralMap, S: PLIntegralMap) -> PLIntegralMap:
    """``T o S`` on a refinement of ``S``'s domain fan."""
    rays = set(S.fan.rays)
    for c, M in zip(S.fan.cones(), S.pieces):
        if M.det == 0:
            # a rank-one piece folds its cone along the kernel line
            k = (M.b, -M.a) if (M.a, M.b) != (0, 0) else (M.d, -M.c)
            for p in (k, (-k[0], -k[1])):
                if k != (0, 0) and ccw_between(c.start, p, c.end):
                    rays.add(primitive(p))
            continue
        for r in T.fan.rays:
            p = M.inverse_direction(r)
            if ccw_between(c.start, p, c.end):
                rays.add(primitive(p))
    fan = fan_validate(rays) if len(rays) != len(S.fan) else S.fan
    pieces = []
    for c in fan.cones():
        w = (c.start[0] + c.end[0], c.start[1] + c.end[1])
        M = S.piece_at(w)
        img = M.apply(w)
        N = T.piece_at(img) if img != (0, 0) else T.pieces[0]
        pieces.append(N @ M)
    return PLIntegralMap(fan, tuple(pieces), T.generic and S.generic).simplified()


def iterate(T: PLIntegralMap, n: int) -> PLIntegralMap:
    if n < 1:
        raise ValueError("iteration count must be >= 1")
    U = T
    for _ in range(n - 1):
        U = compose(T, U)
    return U


def conjugate(L: IntMatrix, T: PLIntegralMap) -> PLIntegralMap:
    """``L o T o L^-1`` for ``L`` in GL2(Z)."""
    if abs(L.det) != 1:
        raise ValueError("conjugating matrix must be unimodular")
    Linv = L.adjugate() if L.det == 1 else IntMatrix(-L.d, L.b, L.c, -L.a)
    return compose(from_monomial(L), compose(T, from_monomial(Linv)))


@dataclass(frozen=True)
class HomeomorphismVerdict:
    accepted: bool
    orientation: Optional[str]  # "preserving" | "reversing"
    reason: str = ""

    def __bool__(self):
        return self.accepted


def is_homeomorphism(T: PLIntegralMap) -> HomeomorphismVerdict:
    """Accept iff pieces are nonsingular, equally oriented, and images wind once."""
    dets = [M.det for M in T.pieces]
    if any(d == 0 for d in dets):
        i = dets.index(0)
        return HomeomorphismVerdict(False, None, f"singular piece {T.pieces[i]} on cone {i}")
    if all(d > 0 for d in dets):
        orientation = "preserving"
    elif all(d < 0 for d in dets):
        orientation = "reversing"
    else:
        return HomeomorphismVerdict(False, None, "piece determinants have mixed signs")
    imgs = [M.apply(u) for M, u in zip(T.pieces, T.fan.rays)]
    if orientation == "reversing":
        imgs = imgs[::-1]
    n = len(imgs)
    ref = (1, 0)
    winding = 0
    for i in range(n):
        a, b = imgs[i], imgs[(i + 1) % n]
        if (det2(a, ref) == 0 and dot2(a, ref) > 0) or ccw_between(a, ref, b):
            winding += 1
    if winding != 1:
        return HomeomorphismVerdict(
            False, None, f"ray images wind {winding} times (covering degree {winding})"
        )
    return HomeomorphismVerdict(True, orientation)


def require_homeomorphism(T: PLIntegralMap) -> str:
    v = T.homeomorphism()
    if not v:
        raise NotHomeomorphismError(v.reason)
    return v.orientation


def ray_equivalent(T: PLIntegralMap, S: PLIntegralMap) -> bool:
    """Same action on every ray of both domain fans and one witness per cone."""
    rays = set(T.fan.rays) | set(S.fan.rays)
    test = fan_validate(rays)
    probes = list(test.rays) + [c.witness for c in test.cones()]
    return all(T.image_ray(r) == S.image_ray(r) for r in probes)


# ---------------------------------------------------------------------------
# JSON input


def map_data_from_json(obj) -> RationalMapData:
    if "monomial" in obj:
        return RationalMapData.from_monomial(IntMatrix.from_rows(obj["monomial"]))
    missing = [k for k in ("p1", "p2", "p3") if k not in obj]
    if missing:
        raise KeyError(f"map JSON is missing field(s): {', '.join(missing)}")
    return RationalMapData(
        MonomialSupport(obj["p1"]),
        MonomialSupport(obj["p2"]),
        MonomialSupport(obj["p3"]),
        bool(obj.get("generic", True)),
    )


def map_from_json(obj) -> PLIntegralMap:
    if "monomial" in obj:
        return from_monomial(IntMatrix.from_rows(obj["monomial"]))
    return tropicalize(map_data_from_json(obj))


def load_map(text: str) -> PLIntegralMap:
    return map_from_json(json.loads(text))
