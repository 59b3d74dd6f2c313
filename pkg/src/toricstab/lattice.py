"""Exact integer linear algebra in the plane.

Vectors are plain ``(x, y)`` tuples.  Their entries are Python ints, or
:class:`QuadraticNumber` values when a vector points along an irrational
eigen-direction.  Every predicate in this module accepts both kinds and
decides its answer without floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Optional, Sequence, Tuple, Union

from .errors import CoefficientGrowthError, SingularMatrixError, ZeroVectorError

LatticeVector = Tuple[int, int]
RationalRay = Tuple[int, int]  # primitive LatticeVector

_SQUAREFREE_TRIAL_LIMIT = 10**6

_max_bits: Optional[int] = None


def set_max_bits(bits: Optional[int]) -> None:
    """Abort with :class:`CoefficientGrowthError` once an integer exceeds ``bits``.

    ``None`` disables the check (the library default).
    """
    global _max_bits
    _max_bits = bits


def check_bits(*values: int) -> None:
    if _max_bits is None:
        return
    for v in values:
        if v.bit_length() > _max_bits:
            raise CoefficientGrowthError(
                f"integer of {v.bit_length()} bits exceeds limit of {_max_bits}"
            )


def _sgn(v) -> int:
    if isinstance(v, QuadraticNumber):
        return v.sign()
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# quadratic surds


def _squarefree(d: int) -> Tuple[int, int]:
    """Return ``(k, s)`` with ``d == k*k*s``; squares are stripped by trial division."""
    k = 1
    i = 2
    while i * i <= d and i <= _SQUAREFREE_TRIAL_LIMIT:
        sq = i * i
        while d % sq == 0:
            d //= sq
            k *= i
        i += 1
    r = math.isqrt(d)
    if r * r == d:
        return k * r, 1
    return k, d


def _sign2(a: int, b: int, m: int) -> int:
    """Sign of ``a + b*sqrt(m)``."""
    sa = (a > 0) - (a < 0)
    if b == 0 or m == 0:
        return sa
    sb = (b > 0) - (b < 0)
    if sa == 0 or sa == sb:
        return sb
    d = a * a - b * b * m
    return sa * ((d > 0) - (d < 0))


def _sign3(a: int, b: int, m: int, c: int, n: int) -> int:
    """Sign of ``a + b*sqrt(m) + c*sqrt(n)``."""
    if c == 0 or n == 0:
        return _sign2(a, b, m)
    if b == 0 or m == 0:
        return _sign2(a, c, n)
    sb = (b > 0) - (b < 0)
    sc = (c > 0) - (c < 0)
    if sb == sc:
        s = sb
    else:
        e = b * b * m - c * c * n
        s = sb * ((e > 0) - (e < 0))
    sa = (a > 0) - (a < 0)
    if sa == 0:
        return s
    if s == 0 or s == sa:
        return sa
    # a and the radical part have opposite signs: compare squares
    t = _sign2(a * a - b * b * m - c * c * n, -2 * b * c, m * n)
    if t > 0:
        return sa
    if t < 0:
        return s
    return 0


class QuadraticNumber:
    """The real number ``(p + q*sqrt(D)) / r`` with integer data.

    ``D`` is reduced to its square-free part on construction (by trial
    division up to 10**6, the remainder kept as is) and ``D == 0`` marks a
    rational value.  Arithmetic is closed within one field Q(sqrt D);
    comparisons work across fields.
    """

    __slots__ = ("p", "q", "D", "r")

    def __init__(self, p: int, q: int = 0, D: int = 0, r: int = 1):
        if r == 0:
            raise ZeroDivisionError("denominator r must be nonzero")
        if D < 0:
            raise ValueError("D must be non-negative")
        if q != 0 and D != 0:
            k, D = _squarefree(D)
            q *= k
            if D == 1:
                p, q, D = p + q, 0, 0
        if q == 0 or D == 0:
            q, D = 0, 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        self.p, self.q, self.D, self.r = p, q, D, r

    @classmethod
    def coerce(cls, v) -> "QuadraticNumber":
        if isinstance(v, QuadraticNumber):
            return v
        return cls(int(v))

    def is_rational(self) -> bool:
        return self.q == 0

    def sign(self) -> int:
        return _sign2(self.p, self.q, self.D)

    def _field(self, other: "QuadraticNumber") -> int:
        if self.D == other.D or other.D == 0:
            return self.D
        if self.D == 0:
            return other.D
        raise TypeError(
            f"cannot combine numbers from Q(sqrt {self.D}) and Q(sqrt {other.D})"
        )

    def __add__(self, other):
        if not isinstance(other, (QuadraticNumber, int)):
            return NotImplemented
        o = QuadraticNumber.coerce(other)
        D = self._field(o)
        return QuadraticNumber(
            self.p * o.r + o.p * self.r, self.q * o.r + o.q * self.r, D, self.r * o.r
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.p, -self.q, self.D, self.r)

    def __sub__(self, other):
        if not isinstance(other, (QuadraticNumber, int)):
            return NotImplemented
        return self + (-QuadraticNumber.coerce(other))

    def __rsub__(self, other):
        if not isinstance(other, (QuadraticNumber, int)):
            return NotImplemented
        return QuadraticNumber.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return QuadraticNumber(self.p * other, self.q * other, self.D, self.r)
        if not isinstance(other, QuadraticNumber):
            return NotImplemented
        D = self._field(other)
        return QuadraticNumber(
            self.p * other.p + self.q * other.q * D,
            self.p * other.q + self.q * other.p,
            D,
            self.r * other.r,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.p, -self.q, self.D, self.r)

    def __truediv__(self, other):
        if isinstance(other, int):
            if other == 0:
                raise ZeroDivisionError
            return QuadraticNumber(self.p, self.q, self.D, self.r * other)
        if not isinstance(other, QuadraticNumber):
            return NotImplemented
        if other.sign() == 0:
            raise ZeroDivisionError
        # multiply through by the conjugate of the denominator
        norm = other.p * other.p - other.q * other.q * other.D
        num = self * QuadraticNumber(other.p, -other.q, other.D, 1)
        return QuadraticNumber(num.p * other.r, num.q * other.r, num.D, num.r * norm)

    def _cmp(self, other) -> int:
        o = QuadraticNumber.coerce(other)
        return _sign3(
            self.p * o.r - o.p * self.r, self.q * o.r, self.D, -o.q * self.r, o.D
        )

    def __eq__(self, other):
        if not isinstance(other, (QuadraticNumber, int)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.q == 0:
            return hash((self.p, self.r))
        return hash((self.p, self.q, self.D, self.r))

    def __float__(self):
        return (self.p + self.q * math.sqrt(self.D)) / self.r

    def floor_scaled(self, k: int) -> int:
        """``floor(k * self)`` computed exactly, for positive integer ``k``."""
        if self.q == 0:
            return (k * self.p) // self.r
        root = math.isqrt(k * k * self.q * self.q * self.D)
        num = k * self.p + root if self.q > 0 else k * self.p - root - 1
        return num // self.r

    def __repr__(self):
        return f"QuadraticNumber({self.p}, {self.q}, {self.D}, {self.r})"

    def __str__(self):
        if self.q == 0:
            return str(self.p) if self.r == 1 else f"{self.p}/{self.r}"
        rad = f"sqrt({self.D})" if abs(self.q) == 1 else f"{abs(self.q)}*sqrt({self.D})"
        if self.p == 0:
            body = rad if self.q > 0 else f"-{rad}"
        else:
            body = f"{self.p}{'+' if self.q > 0 else '-'}{rad}"
        if self.r == 1:
            return body
        return f"({body})/{self.r}"


# ---------------------------------------------------------------------------
# integer vectors


def content(v: Sequence[int]) -> int:
    """Gcd of the absolute values of the coordinates."""
    x, y = v
    if x == 0 and y == 0:
        raise ZeroVectorError("zero vector has no direction")
    return math.gcd(x, y)


def primitive(v: Sequence[int]) -> RationalRay:
    """Divide ``v`` by its content, keeping the signs of both coordinates."""
    g = content(v)
    x, y = v
    check_bits(x, y)
    return (x // g, y // g)


def det2(u, v):
    """``u.x*v.y - u.y*v.x``; exact for int or surd entries."""
    return u[0] * v[1] - u[1] * v[0]


def det2_sign(u, v) -> int:
    """Sign of ``det2(u, v)``, also for surds from two different fields.

    Across fields the determinant is rewritten through slopes,
    ``u.x*v.x*(v.y/v.x - u.y/u.x)``, which compares two single-field surds.
    """
    try:
        return _sgn(det2(u, v))
    except TypeError:
        pass
    u0, u1 = (QuadraticNumber.coerce(c) for c in u)
    v0, v1 = (QuadraticNumber.coerce(c) for c in v)
    su, sv = u0.sign(), v0.sign()
    if su == 0:
        return -u1.sign() * sv
    if sv == 0:
        return su * v1.sign()
    return su * sv * (v1 / v0)._cmp(u1 / u0)


def dot2(u, v):
    return u[0] * v[0] + u[1] * v[1]


def same_direction(u, v) -> bool:
    return det2_sign(u, v) == 0 and _sgn(dot2(u, v)) > 0


def _half(base, v) -> int:
    c = det2_sign(base, v)
    if c > 0 or (c == 0 and _sgn(dot2(base, v)) > 0):
        return 0
    return 1


def ccw_compare(base, u, v) -> int:
    """Compare counterclockwise angles of ``u`` and ``v`` measured from ``base``.

    Returns -1, 0 or 1.  Angles live in ``[0, 2*pi)``; ``base`` itself has
    angle 0.
    """
    hu, hv = _half(base, u), _half(base, v)
    if hu != hv:
        return -1 if hu < hv else 1
    return -det2_sign(u, v)


def ccw_sorted(vectors, base=(1, 0)):
    return sorted(vectors, key=cmp_to_key(lambda u, v: ccw_compare(base, u, v)))


def ccw_between(a, x, b) -> bool:
    """True iff ``x`` lies strictly inside the counterclockwise arc from ``a`` to ``b``.

    The arc may exceed a half turn.  Endpoints are excluded.
    """
    if same_direction(a, x):
        return False
    return ccw_compare(a, x, b) < 0


def in_closed_arc(a, x, b) -> bool:
    return same_direction(a, x) or same_direction(b, x) or ccw_between(a, x, b)


# ---------------------------------------------------------------------------
# 2x2 integer matrices


@dataclass(frozen=True)
class IntMatrix:
    """Row-major 2x2 integer matrix ``[[a, b], [c, d]]``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        check_bits(self.a, self.b, self.c, self.d)

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls) -> "IntMatrix":
        return cls(1, 0, 0, 1)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def discriminant(self) -> int:
        return self.trace**2 - 4 * self.det

    def is_scalar(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def apply(self, v):
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __pow__(self, n: int) -> "IntMatrix":
        if n < 0:
            raise ValueError("negative powers are not integral in general")
        result, base = IntMatrix.identity(), self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def adjugate(self) -> "IntMatrix":
        return IntMatrix(self.d, -self.b, -self.c, self.a)

    def inverse_direction(self, v):
        """A vector ``w`` with ``self @ w`` a positive multiple of ``v``."""
        if self.det == 0:
            raise SingularMatrixError("singular matrix has no inverse")
        w = self.adjugate().apply(v)
        return w if self.det > 0 else (-w[0], -w[1])

    def motion_sign(self, v) -> int:
        """Sign of ``det2(v, M v)``: +1 when ``M`` turns ``v`` counterclockwise."""
        return _sgn(det2(v, self.apply(v)))

    def __str__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


# ---------------------------------------------------------------------------
# directions and eigen-directions


class Direction:
    """A ray from the origin, possibly with irrational slope.

    Rational directions are stored as primitive integer vectors; irrational
    ones as a pair of surds from a single real quadratic field.
    """

    __slots__ = ("vec", "_key")

    def __init__(self, x, y):
        xs, ys = QuadraticNumber.coerce(x), QuadraticNumber.coerce(y)
        if xs.sign() == 0 and ys.sign() == 0:
            raise ZeroVectorError("zero vector has no direction")
        if xs.is_rational() and ys.is_rational():
            den = xs.r * ys.r // math.gcd(xs.r, ys.r)
            self.vec = primitive((xs.p * (den // xs.r), ys.p * (den // ys.r)))
            self._key = self.vec
        else:
            self.vec = (xs, ys)
            if xs.sign() != 0:
                self._key = (xs.sign(), ys / xs)
            else:
                self._key = (0, ys.sign())

    @classmethod
    def of(cls, v) -> "Direction":
        if isinstance(v, Direction):
            return v
        return cls(v[0], v[1])

    @property
    def rational(self) -> bool:
        return isinstance(self.vec[0], int)

    @property
    def ray(self) -> Optional[RationalRay]:
        return self.vec if self.rational else None

    def __getitem__(self, i):
        return self.vec[i]

    def __len__(self):
        return 2

    def __iter__(self):
        return iter(self.vec)

    def __neg__(self):
        return Direction(-QuadraticNumber.coerce(self.vec[0]), -QuadraticNumber.coerce(self.vec[1]))

    def __eq__(self, other):
        if isinstance(other, Direction):
            return same_direction(self.vec, other.vec)
        if isinstance(other, tuple) and len(other) == 2:
            return same_direction(self.vec, other)
        return NotImplemented

    def __hash__(self):
        return hash(self._key)

    def floats(self) -> Tuple[float, float]:
        return float(self.vec[0]), float(self.vec[1])

    def angle(self) -> float:
        x, y = self.floats()
        return math.atan2(y, x) % (2 * math.pi)

    def approximate(self, k: int) -> LatticeVector:
        """Integer vector ``floor(k * v)`` for this direction's vector ``v``."""
        return tuple(QuadraticNumber.coerce(c).floor_scaled(k) for c in self.vec)

    def __repr__(self):
        if self.rational:
            return f"Direction{self.vec}"
        return f"Direction({self.vec[0]}, {self.vec[1]})"

    def __str__(self):
        return f"({self.vec[0]}, {self.vec[1]})"


def as_vector(v):
    return v.vec if isinstance(v, Direction) else v


@dataclass(frozen=True)
class EigenData:
    """Real eigen-directions of an integer matrix.

    ``fixed`` holds ``(direction, eigenvalue)`` pairs with positive
    eigenvalue (rays mapped to themselves); ``flipped`` holds those with
    negative eigenvalue (rays sent to their opposite).  ``scalar`` is set
    when the matrix is a multiple of the identity, in which case every
    direction is an eigen-direction with eigenvalue ``scalar_value``.
    """

    fixed: tuple
    flipped: tuple
    scalar: bool
    scalar_value: Optional[int] = None

    @property
    def all_directions(self):
        return [d for d, _ in self.fixed] + [d for d, _ in self.flipped]


def eigenvalues(M: IntMatrix):
    """Real eigenvalues of ``M`` as surds (empty when the spectrum is complex)."""
    disc = M.discriminant
    if disc < 0:
        return []
    if disc == 0:
        return [QuadraticNumber(M.trace, 0, 0, 2)]
    return [QuadraticNumber(M.trace, 1, disc, 2), QuadraticNumber(M.trace, -1, disc, 2)]


def _eigenvector(M: IntMatrix, lam: QuadraticNumber):
    if M.b != 0:
        return (QuadraticNumber(M.b), lam - M.a)
    if M.c != 0:
        return (lam - M.d, QuadraticNumber(M.c))
    return (1, 0) if lam == M.a else (0, 1)


def eigen_directions(M: IntMatrix) -> EigenData:
    """Rays ``u`` with ``M u = lam u``, each real eigen-line giving ``u`` and ``-u``."""
    if M.det == 0:
        raise SingularMatrixError(f"singular matrix {M}")
    if M.is_scalar():
        return EigenData((), (), True, M.a)
    fixed, flipped = [], []
    for lam in eigenvalues(M):
        u = Direction(*_eigenvector(M, lam))
        target = fixed if lam.sign() > 0 else flipped
        target.append((u, lam))
        target.append((-u, lam))
    return EigenData(tuple(fixed), tuple(flipped), False)


def rational_between(a, b) -> RationalRay:
    """A primitive integer ray strictly inside the ccw arc from ``a`` to ``b``.

    ``a`` and ``b`` may be irrational; the arc must be shorter than a half
    turn.
    """
    da, db = Direction.of(a), Direction.of(b)
    if det2_sign(da.vec, db.vec) <= 0:
        raise ValueError("arc must be strictly convex")
    if da.rational and db.rational:
        return primitive((da.vec[0] + db.vec[0], da.vec[1] + db.vec[1]))
    # normalize magnitudes so the sum points near the bisector
    ax, ay = da.floats()
    bx, by = db.floats()
    na, nb = math.hypot(ax, ay), math.hypot(bx, by)
    k = 4
    while True:
        va = da.approximate(max(1, round(k / na)) if na < 1e300 else 1)
        vb = db.approximate(max(1, round(k / nb)) if nb < 1e300 else 1)
        cand = (va[0] + vb[0], va[1] + vb[1])
        if cand != (0, 0) and ccw_between(da.vec, cand, db.vec):
            return primitive(cand)
        k *= 4
