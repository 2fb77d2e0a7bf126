"""Exact rational arithmetic and certified continued-fraction expansion.

Rationals are stdlib ``fractions.Fraction`` throughout; integers are Python
bigints, so every identity in this module is checked exactly, never in
floating point.

Input conventions for theta:

* ``"m/n"`` (or a ``Fraction``/``int``) is exact.
* A decimal string like ``"0.61803398874989484820"`` stands for an unknown
  real in the interval [v - u, v + u], u = one unit in the last written
  decimal place.  Digits of the expansion are emitted only while every real
  in that interval shares them; otherwise the expansion aborts with
  ``PrecisionExhausted`` instead of guessing.  The one exception is a clean
  termination: if the written value itself is exactly rational and its own
  expansion ends at the ambiguous step (e.g. "0.5"), the terminating
  expansion is returned.
"""

from __future__ import annotations

import decimal
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import InvalidInput, PrecisionExhausted

ThetaLike = Union[str, int, Fraction]


def parse_theta(text: ThetaLike) -> tuple[Fraction, Fraction]:
    """Parse theta into (value, radius).

    radius = 0 means the value is exact; otherwise the input stands for any
    real within +-radius of value.
    """
    if isinstance(text, (int, Fraction)):
        return Fraction(text), Fraction(0)
    if not isinstance(text, str):
        raise InvalidInput(f"cannot parse theta from {type(text).__name__}")
    s = text.strip()
    if not s:
        raise InvalidInput("empty theta")
    if "/" in s:
        num, _, den = s.partition("/")
        try:
            value = Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"bad rational {text!r}") from exc
        return value, Fraction(0)
    try:
        value = Fraction(s)
    except ValueError as exc:
        raise InvalidInput(f"bad decimal {text!r}") from exc
    if "." in s:
        frac_digits = len(s.split(".", 1)[1].rstrip())
        radius = Fraction(1, 10**frac_digits)
    else:
        radius = Fraction(0)  # bare integer literal is exact
    return value, radius


def golden_string(ndigits: int = 60) -> str:
    """(sqrt(5) - 1)/2 as a decimal string with ndigits fractional digits."""
    if ndigits < 1:
        raise InvalidInput("ndigits must be >= 1")
    with decimal.localcontext() as ctx:
        ctx.prec = ndigits + 10
        v = (decimal.Decimal(5).sqrt() - 1) / 2
        quantum = decimal.Decimal(1).scaleb(-ndigits)
        v = v.quantize(quantum, rounding=decimal.ROUND_HALF_EVEN)
    return format(v, "f")


@dataclass(frozen=True)
class CFExpansion:
    """A continued fraction [a0; a1, a2, ...].

    ``terminated`` is True when the expansion is the complete (canonical)
    expansion of a rational; then the final digit is >= 2 whenever there is
    one.
    """

    a0: int
    digits: tuple[int, ...]
    terminated: bool = False

    def __post_init__(self) -> None:
        for a in self.digits:
            if a < 1:
                raise InvalidInput(f"continued-fraction digit {a} < 1")
        if self.terminated and self.digits and self.digits[-1] < 2:
            raise InvalidInput("terminating expansion must end with a digit >= 2")

    def __len__(self) -> int:
        return len(self.digits)

    def value(self) -> Fraction:
        """Exact value of the finite expansion (fold from the right)."""
        acc = Fraction(self.digits[-1]) if self.digits else None
        for a in reversed(self.digits[:-1]):
            acc = a + 1 / acc
        return Fraction(self.a0) if acc is None else self.a0 + 1 / acc

    def __str__(self) -> str:
        inner = ", ".join(str(a) for a in self.digits)
        return f"[{self.a0}; {inner}]" if inner else f"[{self.a0}]"


def cf_expand(theta: ThetaLike, depth: int) -> CFExpansion:
    """Expand theta to at most ``depth`` digits past a0.

    Rational inputs may terminate earlier; decimal inputs either certify all
    emitted digits or raise PrecisionExhausted.
    """
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    value, radius = parse_theta(theta)
    lo: Fraction = value - radius
    hi: Optional[Fraction] = value + radius  # None = unbounded above
    x = value
    a0 = 0
    digits: list[int] = []
    for step in range(depth + 1):
        if hi is None or _floor(lo) != _floor(hi):
            # The interval straddles an integer boundary: only a clean
            # termination of the written value itself is still certifiable.
            if x.denominator == 1:
                a = int(x)
                if step == 0:
                    return CFExpansion(a, (), terminated=True)
                digits.append(a)
                return CFExpansion(a0, tuple(digits), terminated=True)
            raise PrecisionExhausted(
                f"digit {step} of {theta!r} is not determined by the stated precision"
            )
        a = _floor(lo)
        frac = x - a
        if step == 0:
            a0 = a
        else:
            digits.append(a)
        if frac == 0:
            return CFExpansion(a0, tuple(digits), terminated=True)
        if step == depth:
            return CFExpansion(a0, tuple(digits), terminated=False)
        flo, fhi = lo - a, (None if hi is None else hi - a)
        # invert: [flo, fhi] -> [1/fhi, 1/flo], 1/0+ = unbounded
        lo = Fraction(0) if fhi is None else 1 / fhi
        hi = None if flo == 0 else 1 / flo
        x = 1 / frac
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class ConvergentTable:
    """Rows (n, p_n, q_n) of a continued fraction, exact integers.

    Internally keeps the seed row (p_-1, q_-1) = (1, 0) so the classical
    recursion and determinant identity can be checked for every row.
    """

    rows: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise InvalidInput("empty convergent table")
        qs = [q for (_, _, q) in self.rows]
        for i in range(2, len(qs)):
            if qs[i] <= qs[i - 1]:
                raise InvalidInput("q_n not strictly increasing for n >= 1")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def last_index(self) -> int:
        return self.rows[-1][0]

    def p(self, n: int) -> int:
        if n == -1:
            return 1
        return self.rows[n][1]

    def q(self, n: int) -> int:
        if n == -1:
            return 0
        return self.rows[n][2]

    def convergent(self, n: int) -> Fraction:
        return Fraction(self.p(n), self.q(n))

    def error_bound(self, n: int) -> Fraction:
        """1/(q_n q_{n+1}); row n+1 must exist."""
        return Fraction(1, self.q(n) * self.q(n + 1))

    def determinant_identity_holds(self) -> bool:
        """p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}, exactly, for every row."""
        for n in range(len(self.rows)):
            lhs = self.p(n) * self.q(n - 1) - self.p(n - 1) * self.q(n)
            if lhs != (-1) ** (n - 1):
                return False
        return True

    def to_json_obj(self) -> list[dict]:
        return [
            {"n": n, "p": str(p), "q": str(q)} for (n, p, q) in self.rows
        ]


def convergents(cf: CFExpansion) -> ConvergentTable:
    """Convergent table p_n/q_n of the expansion.

    Seeds p_0 = a0, q_0 = 1 and p_1 = a0*a1 + 1, q_1 = a1 come out of the
    standard two-term recursion with the internal row (1, 0).
    """
    p_prev, q_prev = 1, 0
    p, q = cf.a0, 1
    rows = [(0, p, q)]
    for n, a in enumerate(cf.digits, start=1):
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        rows.append((n, p, q))
    return ConvergentTable(tuple(rows))


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator
