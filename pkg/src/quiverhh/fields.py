"""Coefficient fields: arbitrary-precision rationals and prime fields.

Scalars are plain Python objects (Fraction for the rationals, int in [0, p)
for GF(p)); a Field instance bundles the arithmetic so matrix code stays
field-generic.  All computations are exact, floats are never accepted.
"""

from fractions import Fraction

from .errors import InputError

_MAX_PRIME = 2**31


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class Field:
    """Exact coefficient field.  kind is 'rationals' or 'fp'."""

    def __init__(self, kind: str, p: int | None = None):
        if kind == "rationals":
            self.p = None
        elif kind == "fp":
            if p is None or not (2 <= p < _MAX_PRIME) or not _is_prime(p):
                raise InputError(f"prime field modulus must be a prime below 2^31, got {p}")
            self.p = p
        else:
            raise InputError(f"unknown field kind {kind!r}")
        self.kind = kind

    # -- scalar construction -------------------------------------------------

    @property
    def zero(self):
        return Fraction(0) if self.p is None else 0

    @property
    def one(self):
        return Fraction(1) if self.p is None else 1

    def of(self, value):
        """Coerce an int, Fraction or exact ratio string into a field scalar."""
        if isinstance(value, bool):
            raise InputError("booleans are not scalars")
        if isinstance(value, float):
            raise InputError(f"floats are not exact scalars: {value}")
        if isinstance(value, str):
            value = parse_rational(value)
        if isinstance(value, int):
            value = Fraction(value)
        if not isinstance(value, Fraction):
            raise InputError(f"cannot coerce {value!r} to a scalar")
        if self.p is None:
            return value
        den = value.denominator % self.p
        if den == 0:
            raise InputError(f"denominator of {value} vanishes mod {self.p}")
        return value.numerator * pow(den, -1, self.p) % self.p

    # -- arithmetic ----------------------------------------------------------

    def add(self, a, b):
        return (a + b) if self.p is None else (a + b) % self.p

    def sub(self, a, b):
        return (a - b) if self.p is None else (a - b) % self.p

    def mul(self, a, b):
        return (a * b) if self.p is None else (a * b) % self.p

    def neg(self, a):
        return -a if self.p is None else (-a) % self.p

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a if self.p is None else pow(a, -1, self.p)

    def is_zero(self, a):
        return not a

    def __eq__(self, other):
        return isinstance(other, Field) and self.kind == other.kind and self.p == other.p

    def __hash__(self):
        return hash((self.kind, self.p))

    def __repr__(self):
        return "QQ" if self.p is None else f"GF({self.p})"

    def describe(self) -> str:
        return "rationals" if self.p is None else f"fp:{self.p}"


QQ = Field("rationals")


def GF(p: int) -> Field:
    return Field("fp", p)


def parse_field(text: str) -> Field:
    """Parse a field descriptor: 'rationals' or 'fp:P'."""
    if text == "rationals":
        return QQ
    if text.startswith("fp:"):
        body = text[3:]
        if not body.isdigit():
            raise InputError(f"bad prime field descriptor {text!r}")
        return GF(int(body))
    raise InputError(f"unknown field {text!r} (expected 'rationals' or 'fp:P')")


def parse_rational(text: str) -> Fraction:
    """Parse an exact rational literal like '5', '-2/3'."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational literal {text!r}: {exc}") from None


def parse_coefficient(text, q=None) -> Fraction:
    """Parse a coefficient that may mention the parameter q.

    Accepted shapes: rational literals, 'q', '-q', 'q^K', 'C*q', 'C*q^K'.
    The parameter must already have a concrete rational value.
    """
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise InputError(f"floats are not exact scalars: {text}")
    text = str(text).strip()
    if "q" not in text:
        return parse_rational(text)
    if q is None:
        raise InputError(f"coefficient {text!r} mentions q but no q value was supplied")
    q = Fraction(q)
    coeff, _, tail = text.rpartition("*")
    scale = parse_rational(coeff) if coeff else Fraction(1)
    tail = tail.strip()
    if tail.startswith("-"):
        scale = -scale
        tail = tail[1:].strip()
    if tail == "q":
        power = 1
    elif tail.startswith("q^"):
        try:
            power = int(tail[2:])
        except ValueError:
            raise InputError(f"bad q power in coefficient {text!r}") from None
    else:
        raise InputError(f"cannot parse coefficient {text!r}")
    return scale * q**power


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x)
