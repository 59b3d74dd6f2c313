"""Stability along the polar divisor for toric models, and fan stabilization.

A fan ray whose image falls strictly inside a cone corresponds to a polar
curve contracted to that cone's double point.  It destabilizes the map when
some later image of that cone swallows a fan ray (the double point then lies
in the indeterminacy locus).  :func:`stabilize` refines a fan until no such
orbit exists for a suitable iterate.

All verdicts refer to stability *along the polar divisor* only: they certify
the combinatorial condition on poles of dx^dy/xy.  Behaviour of non-polar
curves is not visible from ray dynamics.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Dict, List, Optional, Tuple, Union

from .errors import (
    NotStabilizable,
    PreconditionError,
    SingularMatrixError,
    StabilizationError,
    UndeterminedRotation,
)
from .fan import P2_FAN, Cone, ConeHit, Fan, RayHit, Sector, regularize_cone
from .lattice import (
    Direction,
    IntMatrix,
    QuadraticNumber,
    ccw_compare,
    in_closed_arc,
    rational_between,
)
from .rotation import (
    DEFAULT_MAX_PERIOD,
    FixedComponent,
    RotationCertificate,
    exact_rotation,
    fixed_components,
    monomial_rationality_test,
)
from .tropical import PLIntegralMap, iterate, require_homeomorphism

log = logging.getLogger(__name__)

DEFAULT_BOUND = 64
ALONG_ETA_NOTE = (
    "verdict concerns stability along the polar divisor of dx^dy/xy only; "
    "full algebraic stability also needs conditions on non-polar curves"
)


@dataclass(frozen=True)
class ToricModel:
    fan: Fan
    map: PLIntegralMap

    def __post_init__(self):
        require_homeomorphism(self.map)


@dataclass(frozen=True)
class RayStatus:
    ray: tuple
    verdict: str  # "maps_to_ray" | "fixed" | "contracted"
    target: Optional[tuple] = None
    cone: Optional[Cone] = None

    def to_json(self):
        out = {"ray": list(self.ray), "verdict": self.verdict}
        if self.target is not None:
            out["target"] = list(self.target)
        if self.cone is not None:
            out["cone"] = self.cone.as_list()
        return out


def ray_status(model: ToricModel, ray) -> RayStatus:
    ray = tuple(ray)
    if ray not in model.fan:
        raise PreconditionError(f"{ray} is not a ray of the fan")
    img = model.map.image_ray(ray)
    hit = model.fan.locate(img)
    if isinstance(hit, RayHit):
        if hit.ray == ray:
            return RayStatus(ray, "fixed", target=ray)
        return RayStatus(ray, "maps_to_ray", target=hit.ray)
    return RayStatus(ray, "contracted", cone=hit.cone)


def image_sector(T: PLIntegralMap, s: Sector) -> Sector:
    return Sector.through(T.image_ray(s.start), T.image_ray(s.witness), T.image_ray(s.end))


def is_contracted(T: PLIntegralMap, cone: Cone) -> bool:
    """``T(cone)`` lies inside ``cone``."""
    return image_sector(T, Sector.of_cone(cone)).within(cone)


def is_expanded(T: PLIntegralMap, cone: Cone) -> bool:
    """``T(cone)`` contains ``cone``."""
    img = image_sector(T, Sector.of_cone(cone))
    return (
        in_closed_arc(img.start, cone.start, img.end)
        and in_closed_arc(img.start, cone.end, img.end)
        and in_closed_arc(img.start, cone.witness, img.end)
    )


@dataclass(frozen=True)
class OrbitHit:
    k: int
    hit_ray: tuple
    trace: Tuple[Sector, ...]


@dataclass(frozen=True)
class OrbitSafe:
    reason: str  # "absorbed" | "periodic, no hit"
    steps: int


@dataclass(frozen=True)
class OrbitUnknown:
    steps: int


def _first_ray_inside(fan: Fan, s: Sector):
    """First fan ray counterclockwise from ``s.start`` if it lies inside ``s``."""
    i = fan.cone_index(s.start)
    cand = fan.rays[(i + 1) % len(fan)]
    return cand if s.contains(cand) else None


def cone_orbit_hits_ray(
    model: ToricModel, cone: Cone, bound: int = DEFAULT_BOUND
) -> Union[OrbitHit, OrbitSafe, OrbitUnknown]:
    """Follow ``T^k(cone)`` for ``k = 1..bound`` looking for a swallowed fan ray."""
    if bound < 1:
        raise PreconditionError("bound must be >= 1")
    T, fan = model.map, model.fan
    s = Sector.of_cone(cone)
    trace = []
    seen = set()
    for k in range(1, bound + 1):
        s = image_sector(T, s)
        trace.append(s)
        hit = _first_ray_inside(fan, s)
        if hit is not None:
            return OrbitHit(k, hit, tuple(trace))
        home = fan.locate(s.witness).cone
        if is_contracted(T, home):
            return OrbitSafe("absorbed", k)
        key = (home, s.start, s.end)
        if key in seen:
            return OrbitSafe("periodic, no hit", k)
        seen.add(key)
    return OrbitUnknown(bound)


@dataclass(frozen=True)
class DestabilizingOrbit:
    ray: tuple
    cone: Cone
    k: int
    hit_ray: tuple
    sector_trace: Tuple[Sector, ...]
    steps_to_contraction: int = 0

    def replay(self, model: ToricModel) -> bool:
        """Recompute the sector trace from scratch and confirm the hit."""
        st = ray_status(model, self.ray)
        if st.verdict != "contracted" or st.cone != self.cone:
            return False
        s = Sector.of_cone(self.cone)
        for expected in self.sector_trace:
            s = image_sector(model.map, s)
            if s != expected:
                return False
        return len(self.sector_trace) == self.k and self.sector_trace[-1].contains(self.hit_ray)

    def to_json(self):
        return {
            "ray": list(self.ray),
            "cone": self.cone.as_list(),
            "k": self.k,
            "hit_ray": list(self.hit_ray),
            "steps_to_contraction": self.steps_to_contraction,
            "sector_trace": [s.as_dict() for s in self.sector_trace],
        }


@dataclass(frozen=True)
class StabilityReport:
    verdict: str  # "stable" | "destabilized" | "unknown"
    orbits: Tuple[DestabilizingOrbit, ...] = ()
    statuses: Tuple[RayStatus, ...] = ()
    unknown: Tuple[Tuple[tuple, Cone, int], ...] = ()

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"

    def to_json(self):
        return {
            "verdict": {
                "stable": "StableAlongEta",
                "destabilized": "Destabilized",
                "unknown": "Unknown",
            }[self.verdict],
            "orbits": [o.to_json() for o in self.orbits],
            "rays": [s.to_json() for s in self.statuses],
            "unknown": [
                {"ray": list(r), "cone": c.as_list(), "bound": b} for r, c, b in self.unknown
            ],
            "note": ALONG_ETA_NOTE,
        }


def find_destabilizing_orbits(model: ToricModel, bound: int = DEFAULT_BOUND) -> StabilityReport:
    statuses, orbits, unknown = [], [], []
    for r in model.fan.rays:
        st = ray_status(model, r)
        statuses.append(st)
        if st.verdict != "contracted":
            continue
        res = cone_orbit_hits_ray(model, st.cone, bound)
        if isinstance(res, OrbitHit):
            orbits.append(DestabilizingOrbit(r, st.cone, res.k, res.hit_ray, res.trace))
        elif isinstance(res, OrbitUnknown):
            unknown.append((r, st.cone, res.steps))
    if orbits:
        verdict = "destabilized"
    elif unknown:
        verdict = "unknown"
    else:
        verdict = "stable"
    return StabilityReport(verdict, tuple(orbits), tuple(statuses), tuple(unknown))


# ---------------------------------------------------------------------------
# stabilization


@dataclass(frozen=True)
class StabilizationResult:
    iterate_used: int
    fan: Fan
    start_fan: Fan
    log: Tuple[dict, ...]
    final_report: StabilityReport
    certificate: RotationCertificate
    orientation: str
    components: Tuple[FixedComponent, ...] = ()
    empirical: Tuple[Tuple[int, str], ...] = ()

    def to_json(self):
        out = {
            "iterate_used": self.iterate_used,
            "orientation": self.orientation,
            "rotation": self.certificate.to_json(),
            "fan_before": self.start_fan.to_json(),
            "fan_after": self.fan.to_json(),
            "determinants": self.fan.determinants(),
            "fixed_components": [c.to_json() for c in self.components],
            "log": list(self.log),
            "final_report": self.final_report.to_json(),
        }
        if self.empirical:
            out["empirical_smaller_iterates"] = [
                {"iterate": k, "verdict": v, "label": "empirical"} for k, v in self.empirical
            ]
        return out


class _Refiner:
    """Mutable state of one stabilization run (fan plus log)."""

    def __init__(self, U: PLIntegralMap, fan: Fan, max_rays: int, max_orbit: int):
        self.U = U
        self.fan = fan
        self.log: List[dict] = []
        self.max_rays = max_rays
        self.max_orbit = max_orbit
        self._contracted: Dict[Cone, bool] = {}
        self.processed = set()

    def contracted(self, cone: Cone) -> bool:
        v = self._contracted.get(cone)
        if v is None:
            v = is_contracted(self.U, cone)
            self._contracted[cone] = v
        return v

    def insert(self, rays, step: str, **info):
        new = [tuple(r) for r in rays if tuple(r) not in self.fan]
        if not new:
            return
        self.fan = self.fan.with_rays(new)
        entry = {"step": step, "rays": [list(r) for r in new]}
        entry.update(info)
        where = "".join(f", {k} {v}" for k, v in info.items())
        entry["text"] = f"{step}: inserted {' '.join(map(str, new))}{where}"
        self.log.append(entry)
        if len(self.fan) > self.max_rays:
            raise StabilizationError(
                f"fan exceeded {self.max_rays} rays during {step}", self.log
            )

    def regularize_all(self, step: str):
        for c in self.fan.cones():
            if c.det != 1:
                self.insert(regularize_cone(c), step, cone=c.as_list())

    def close_orbit(self, ray):
        """Insert forward images of ``ray`` until one lands in a contracted cone."""
        cur = ray
        for _ in range(self.max_orbit):
            img = self.U.image_ray(cur)
            if img == cur:
                return
            hit = self.fan.locate(img)
            if isinstance(hit, RayHit):
                if img in self.processed:
                    return
            elif self.contracted(hit.cone):
                return
            else:
                self.insert([img], "orbit", source=list(cur))
            self.processed.add(img)
            cur = img
        raise StabilizationError(
            f"orbit of {ray} not absorbed after {self.max_orbit} steps", self.log
        )

    def close_all_orbits(self, rays):
        for r in rays:
            if r not in self.processed:
                self.processed.add(r)
                self.close_orbit(r)

    def depth(self, cone: Cone) -> int:
        w = cone.witness
        for k in range(1, self.max_orbit + 1):
            w = self.U.image_ray(w)
            hit = self.fan.locate(w)
            if isinstance(hit, ConeHit) and self.contracted(hit.cone):
                return k
        return self.max_orbit


def _superscript(n: int) -> str:
    return str(n).translate(str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹"))


def stabilize(
    T: PLIntegralMap,
    start_fan: Fan = P2_FAN,
    max_period: int = DEFAULT_MAX_PERIOD,
    bound: int = DEFAULT_BOUND,
    max_rays: int = 20_000,
    empirical: bool = False,
) -> StabilizationResult:
    """Refine ``start_fan`` to a smooth fan on which ``T^n`` is stable along the poles.

    ``n`` is 2 for orientation-reversing ``T`` and the denominator of the
    rotation number otherwise.  The returned report is recomputed from the
    final fan, never inferred from the construction.
    """
    orientation = require_homeomorphism(T)
    require_stabilizable(T)
    cert = exact_rotation(T, max_period)
    if cert.kind == "undetermined":
        raise UndeterminedRotation(
            f"no periodic ray up to period {max_period}; increase max_period"
        )
    n = 2 if orientation == "reversing" else cert.n
    U = iterate(T, n) if n > 1 else T
    comps = fixed_components(U)
    ref = _Refiner(U, start_fan, max_rays, max_orbit=max(1000, 16 * bound))
    log.debug("stabilizing with iterate %d, %d fixed components", n, len(comps))

    # rational fixed rays and arc endpoints become fan rays
    fixed_rays = []
    for c in comps:
        if c.kind == "arc" and not c.full_circle:
            fixed_rays += [c.start, c.end]
        elif c.kind == "point" and c.rational:
            fixed_rays.append(c.direction.ray)
    ref.insert(fixed_rays, "fixed-rays")

    # each irrational fixed ray gets a cone of its own
    irrational = [c for c in comps if c.kind == "point" and not c.rational]
    by_cone: Dict[Cone, List[FixedComponent]] = {}
    for c in irrational:
        by_cone.setdefault(ref.fan.locate(c.direction.vec).cone, []).append(c)
    seps = []
    for cone, members in by_cone.items():
        members.sort(key=cmp_to_key(lambda x, y: ccw_compare(cone.start, x.direction.vec, y.direction.vec)))
        for x, y in zip(members, members[1:]):
            seps.append(rational_between(x.direction, y.direction))
    ref.insert(seps, "separate")
    ref.regularize_all("regularize")

    # attracting cones must be contracted, repelling ones expanded
    for _ in range(64):
        extra = []
        for c in irrational:
            cone = ref.fan.locate(c.direction.vec).cone
            ok = is_contracted(U, cone) if c.stability == "attracting" else is_expanded(U, cone)
            if not ok:
                extra += [
                    rational_between(cone.start, c.direction),
                    rational_between(c.direction, cone.end),
                ]
        if not extra:
            break
        ref.insert(extra, "shrink")
        ref.regularize_all("regularize")
    else:
        raise StabilizationError("could not isolate irrational fixed rays", ref.log)

    ref.close_all_orbits(ref.fan.rays)
    # rounds of regularization, most upstream cones first so that orbit
    # insertions land in cones not yet regularized
    while True:
        irregular = [c for c in ref.fan.cones() if c.det != 1]
        if not irregular:
            break
        ranked = sorted(irregular, key=ref.depth, reverse=True)
        for cone in ranked:
            if cone.start not in ref.fan or cone.end not in ref.fan:
                continue
            i = ref.fan.cone_index(cone.witness)
            if ref.fan.cone(i) != cone:
                continue  # split by an earlier insertion this round
            new = regularize_cone(cone)
            ref.insert(new, "regularize", cone=cone.as_list())
            ref.close_all_orbits(new)

    model = ToricModel(ref.fan, U)
    report = find_destabilizing_orbits(model, bound)
    if not report.stable:
        raise StabilizationError(
            f"refined fan failed the recomputed check ({report.verdict})", ref.log
        )
    emp = ()
    if empirical and n > 1:
        emp = tuple(
            (k, find_destabilizing_orbits(ToricModel(ref.fan, iterate(T, k)), bound).verdict)
            for k in range(1, n)
        )
    return StabilizationResult(
        n, ref.fan, start_fan, tuple(ref.log), report, cert, orientation, tuple(comps), emp
    )


@dataclass(frozen=True)
class CorrigibilityVerdict:
    kind: str  # "corrigible" | "not_stabilizable" | "undetermined"
    text: str
    iterate: Optional[int] = None
    certificate: Optional[RotationCertificate] = None
    stabilization: Optional[StabilizationResult] = None
    numeric_estimate: Optional[float] = None

    @property
    def exit_code(self) -> int:
        return {"corrigible": 0, "not_stabilizable": 2, "undetermined": 3}[self.kind]

    def to_json(self):
        out = {"verdict": self.text, "kind": self.kind, "note": ALONG_ETA_NOTE}
        if self.iterate is not None:
            out["iterate"] = self.iterate
        if self.certificate is not None:
            out["rotation"] = self.certificate.to_json()
        if self.stabilization is not None:
            out["stabilization"] = self.stabilization.to_json()
        if self.numeric_estimate is not None:
            out["estimate"] = round(self.numeric_estimate, 12)
        return out


def corrigibility_verdict(
    T: PLIntegralMap,
    max_period: int = DEFAULT_MAX_PERIOD,
    bound: int = DEFAULT_BOUND,
    start_fan: Fan = P2_FAN,
) -> CorrigibilityVerdict:
    require_homeomorphism(T)
    A = T.linear_matrix()
    if A is not None and not monomial_rationality_test(A):
        from .rotation import numeric_rotation

        est = numeric_rotation(T, 10_000) if A.det > 0 else None
        return CorrigibilityVerdict(
            "not_stabilizable", "no iterate stabilizable", numeric_estimate=est
        )
    cert = exact_rotation(T, max_period)
    if cert.kind == "undetermined":
        return CorrigibilityVerdict(
            "undetermined",
            f"unknown up to period {max_period}",
            certificate=cert,
            numeric_estimate=cert.numeric_estimate,
        )
    result = stabilize(T, start_fan, max_period, bound)
    n = result.iterate_used
    return CorrigibilityVerdict(
        "corrigible", f"f{_superscript(n)} corrigible (along η)", n, cert, result
    )


def require_stabilizable(T: PLIntegralMap, max_period: int = DEFAULT_MAX_PERIOD):
    """Raise :class:`NotStabilizable` for linear maps with irrational rotation."""
    A = T.linear_matrix()
    if A is not None and not monomial_rationality_test(A):
        raise NotStabilizable("rotation number is irrational; no iterate is stabilizable")


@dataclass(frozen=True)
class DegreeReport:
    delta: int
    lambda2: int
    lambda1: QuadraticNumber
    note: str = (
        "lambda1 is the spectral radius of the exponent matrix, a root of its "
        "characteristic polynomial and hence an algebraic integer"
    )

    @property
    def lambda1_is_algebraic_integer(self) -> bool:
        return True

    def to_json(self):
        return {
            "delta": self.delta,
            "lambda2": self.lambda2,
            "lambda1": str(self.lambda1),
            "lambda1_float": float(self.lambda1),
            "lambda1_is_algebraic_integer": True,
            "note": self.note,
        }


def monomial_degrees(A: IntMatrix) -> DegreeReport:
    if A.det == 0:
        raise SingularMatrixError(f"monomial matrix {A} is singular")
    disc = A.discriminant
    if disc >= 0:
        lam = QuadraticNumber(abs(A.trace), 1, disc, 2)
    else:
        # conjugate pair: |lambda|^2 = det
        lam = QuadraticNumber(0, 1, A.det, 1)
    return DegreeReport(A.det, abs(A.det), lam)
