"""Complete two-dimensional fans, cones and angular sectors.

A fan is stored as a counterclockwise tuple of primitive rays, rotated so
the lexicographically smallest generator comes first.  Two fans are equal
exactly when their ray sets agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

from .errors import FanError
from .lattice import (
    RationalRay,
    as_vector,
    ccw_between,
    ccw_compare,
    ccw_sorted,
    det2,
    in_closed_arc,
    primitive,
    same_direction,
)


@dataclass(frozen=True)
class Cone:
    """Strictly convex cone spanned counterclockwise from ``start`` to ``end``."""

    start: RationalRay
    end: RationalRay

    def __post_init__(self):
        if det2(self.start, self.end) <= 0:
            raise FanError(f"cone {self.start}->{self.end} is not strictly convex")

    @property
    def det(self) -> int:
        return det2(self.start, self.end)

    @property
    def witness(self) -> RationalRay:
        return primitive((self.start[0] + self.end[0], self.start[1] + self.end[1]))

    def contains(self, v) -> bool:
        """Strict interior containment."""
        return ccw_between(self.start, as_vector(v), self.end)

    def contains_closed(self, v) -> bool:
        return in_closed_arc(self.start, as_vector(v), self.end)

    def as_list(self):
        return [list(self.start), list(self.end)]


@dataclass(frozen=True)
class RayHit:
    ray: RationalRay


@dataclass(frozen=True)
class ConeHit:
    cone: Cone


def _canonical(rays: Sequence[RationalRay]) -> Tuple[RationalRay, ...]:
    rays = tuple(rays)
    i = rays.index(min(rays))
    return rays[i:] + rays[:i]


def _cone_index(rays: Sequence[RationalRay], v) -> int:
    # largest i with angle(u_i) <= angle(v), angles measured from u_0
    base = rays[0]
    lo, hi = 0, len(rays) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ccw_compare(base, rays[mid], v) <= 0:
            lo = mid
        else:
            hi = mid - 1
    return lo


@dataclass(frozen=True)
class Fan:
    rays: Tuple[RationalRay, ...]

    def __len__(self):
        return len(self.rays)

    def __iter__(self):
        return iter(self.rays)

    def __contains__(self, ray):
        return tuple(ray) in self._ray_set

    @property
    def _ray_set(self):
        s = self.__dict__.get("_rs")
        if s is None:
            s = frozenset(self.rays)
            object.__setattr__(self, "_rs", s)
        return s

    def cones(self) -> List[Cone]:
        n = len(self.rays)
        return [Cone(self.rays[i], self.rays[(i + 1) % n]) for i in range(n)]

    def cone(self, i: int) -> Cone:
        return Cone(self.rays[i % len(self.rays)], self.rays[(i + 1) % len(self.rays)])

    def determinants(self) -> List[int]:
        return [c.det for c in self.cones()]

    def is_smooth(self) -> bool:
        return all(d == 1 for d in self.determinants())

    def cone_index(self, v) -> int:
        """Index ``i`` of the half-open cone ``[u_i, u_{i+1})`` containing ``v``."""
        return _cone_index(self.rays, as_vector(v))

    def locate(self, v) -> Union[RayHit, ConeHit]:
        i = self.cone_index(v)
        if same_direction(self.rays[i], as_vector(v)):
            return RayHit(self.rays[i])
        return ConeHit(self.cone(i))

    def index_of_cone(self, cone: Cone) -> int:
        n = len(self.rays)
        for i in range(n):
            if self.rays[i] == cone.start and self.rays[(i + 1) % n] == cone.end:
                return i
        raise FanError(f"cone {cone.start}->{cone.end} is not a cone of the fan")

    def with_rays(self, extra: Iterable[Sequence[int]]) -> "Fan":
        # a ray strictly inside a strictly convex cone splits it into two
        # strictly convex cones, so insertion by binary search stays valid
        present = self._ray_set
        new = []
        for r in extra:
            r = primitive(r)
            if r not in present and r not in new:
                new.append(r)
        if not new:
            return self
        rays = list(self.rays)
        for r in new:
            rays.insert(_cone_index(rays, r) + 1, r)
        f = Fan(_canonical(rays))
        object.__setattr__(f, "_rs", present.union(new))
        return f

    def to_json(self):
        return [list(r) for r in self.rays]

    def to_text(self) -> str:
        return "  ".join(f"{x} {y}" for x, y in self.rays)


def fan_validate(rays: Iterable[Sequence[int]], ordered: bool = False) -> Fan:
    """Build a :class:`Fan`, raising :class:`FanError` with the offending pair.

    With ``ordered=True`` the given order must already be counterclockwise and
    wind once around the origin; otherwise the rays are sorted first.
    """
    given = [primitive(tuple(int(c) for c in r)) for r in rays]
    seen = set()
    for r in given:
        if r in seen:
            raise FanError(f"duplicate ray {r}")
        seen.add(r)
    if len(given) < 3:
        if len(given) == 2:
            a, b = ccw_sorted(given)
            if det2(a, b) <= 0 or det2(b, a) <= 0:
                raise FanError(f"consecutive det <= 0 between {a} and {b}")
        raise FanError("a complete fan needs at least 3 rays")
    if ordered:
        lst = given
        n = len(lst)
        for i in range(n):
            if det2(lst[i], lst[(i + 1) % n]) <= 0:
                raise FanError(
                    f"consecutive det <= 0 between {lst[i]} and {lst[(i + 1) % n]}"
                )
        # each step turns by less than pi, so winding = number of times the
        # half-open arcs [u_i, u_{i+1}) cover the reference direction
        ref = lst[0]
        winding = sum(
            1 for i in range(n) if ccw_between(lst[i], ref, lst[(i + 1) % n]) or lst[i] == ref
        )
        if winding != 1:
            raise FanError(f"rays wind {winding} times around the origin, between {lst[-1]} and {lst[0]}")
    else:
        lst = ccw_sorted(given, base=(1, 0))
        n = len(lst)
        for i in range(n):
            if det2(lst[i], lst[(i + 1) % n]) <= 0:
                raise FanError(
                    f"consecutive det <= 0 between {lst[i]} and {lst[(i + 1) % n]}"
                )
    return Fan(_canonical(lst))


P2_FAN = fan_validate([(1, 0), (0, 1), (-1, -1)])
P1XP1_FAN = fan_validate([(1, 0), (0, 1), (-1, 0), (0, -1)])

NAMED_FANS = {"p2": P2_FAN, "p1xp1": P1XP1_FAN}


def is_regular(c: Cone) -> bool:
    return c.det == 1


def blowup(f: Fan, c: Cone) -> Fan:
    """Insert ``primitive(start + end)`` into the cone ``c`` of ``f``."""
    f.index_of_cone(c)
    return f.with_rays([c.witness])


def _ext_gcd(a: int, b: int):
    """Return ``(g, s, t)`` with ``s*a + t*b == g == gcd(a, b) >= 0``."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def regularize_cone(c: Cone) -> List[RationalRay]:
    """Interior rays of the Hirzebruch-Jung subdivision of ``c``, ccw order.

    Each step takes the lattice vector at unit height over the current ray
    that lies nearest the far boundary; these are the vertices of the
    boundary of the convex hull of the nonzero lattice points in ``c``.
    """
    out = []
    v0, end = c.start, c.end
    while True:
        d = det2(v0, end)
        if d == 1:
            return out
        _, s, t = _ext_gcd(v0[0], v0[1])
        w = (-t, s)  # det2(v0, w) == 1
        alpha = det2(end, w)
        k = -((-alpha) // d)
        v1 = (w[0] + k * v0[0], w[1] + k * v0[1])
        out.append(v1)
        v0 = v1


def regularize(f: Fan) -> Fan:
    extra = []
    for c in f.cones():
        if c.det != 1:
            extra.extend(regularize_cone(c))
    return f.with_rays(extra) if extra else f


def merge_fans(f: Fan, g: Fan) -> Fan:
    """Union of the rays, then Hirzebruch-Jung regularization of every cone."""
    return regularize(f.with_rays(g.rays))


def locate(f: Fan, r) -> Union[RayHit, ConeHit]:
    return f.locate(r)


@dataclass(frozen=True)
class Sector:
    """Open arc of rays from ``start`` counterclockwise to ``end``.

    ``witness`` is a ray strictly inside the arc; it pins down which of the
    two arcs between the endpoints is meant, so sectors wider than a half
    turn are representable without angles.
    """

    start: RationalRay
    end: RationalRay
    witness: RationalRay

    def __post_init__(self):
        if self.start == self.end:
            raise FanError("sector endpoints must differ")
        if not ccw_between(self.start, self.witness, self.end):
            raise FanError("sector witness must lie inside the ccw arc start->end")

    @classmethod
    def through(cls, a, w, b) -> "Sector":
        """The arc between ``a`` and ``b`` that contains ``w``, in either direction."""
        a, w, b = primitive(a), primitive(w), primitive(b)
        if ccw_between(a, w, b):
            return cls(a, b, w)
        return cls(b, a, w)

    @classmethod
    def of_cone(cls, c: Cone) -> "Sector":
        return cls(c.start, c.end, c.witness)

    def contains(self, r) -> bool:
        return ccw_between(self.start, as_vector(r), self.end)

    def within(self, c: Cone) -> bool:
        """True iff the closed sector lies in the closed cone ``c``."""
        return (
            c.contains_closed(self.start)
            and c.contains_closed(self.end)
            and det2(self.start, self.end) > 0
            and c.contains_closed(self.witness)
        )

    def as_dict(self):
        return {
            "start": list(self.start),
            "end": list(self.end),
            "witness": list(self.witness),
        }


def sector_contains_ray(s: Sector, r) -> bool:
    return s.contains(r)


# ---------------------------------------------------------------------------
# serialization


def parse_fan(text: str) -> Fan:
    """Parse a fan from JSON (``[[x, y], ...]``), whitespace pairs, or a name."""
    text = text.strip()
    if text.lower() in NAMED_FANS:
        return NAMED_FANS[text.lower()]
    if text.startswith("["):
        data = json.loads(text)
        return fan_validate([tuple(p) for p in data], ordered=True)
    nums = [int(t) for t in text.replace(",", " ").split()]
    if len(nums) % 2:
        raise FanError("fan text must contain an even number of integers")
    return fan_validate(list(zip(nums[0::2], nums[1::2])), ordered=True)
