"""Matrix realizations of the rotation algebra and the Rieffel projection.

Conventions, used consistently across the package:

* the defining relation is V U = lambda U V with lambda = exp(2 pi i theta);
* clock-shift representation on C^q (theta = m/q): U is the cyclic shift
  e_j -> e_{j+1 mod q}, V = diag(1, lambda, ..., lambda^{q-1});
* single-index truncations live on basis e_k, |k| <= N; the "z1" variant
  shifts with U (U e_k = e_{k+1}, V e_k = lambda^k e_k), the "z1prime"
  variant shifts with V (U e_k = lambda^{-k} e_k, V e_k = e_{k+1});
* the two-index box rep lives on e_{m,n}, |m|,|n| <= N, with
  U e_{m,n} = e_{m+1,n}, V e_{m,n} = lambda^m e_{m,n+1} and the diagonal
  phase F0 e_{m,n} = (m+in)/sqrt(m^2+n^2) e_{m,n}, F0 e_{0,0} = e_{0,0}.

Shift generators are truncated (the outgoing boundary column is zero); the
defective generator is recorded so index computations can stay away from
the edge.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import (
    InvalidInput,
    NotCoprime,
    RepresentationTooSmall,
    ThetaOutOfRange,
    UnsupportedForm,
)
from .exact_arith import parse_theta

ThetaLike = Union[str, int, float, Fraction]

#: global sign convention for the symmetry F = diag(sign(k)): sign(0) = +1
SIGN_AT_ZERO = +1


def theta_to_float(theta: ThetaLike) -> float:
    if isinstance(theta, float):
        return theta
    value, _ = parse_theta(theta)
    return float(value)


def _op_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


# --- representations ---------------------------------------------------------

@dataclass(frozen=True)
class ClockShiftRep:
    """Exact finite-dimensional representation at rational theta = m/q."""

    m: int
    q: int
    U: np.ndarray
    V: np.ndarray

    @property
    def lam(self) -> complex:
        return cmath.exp(2j * math.pi * self.m / self.q)

    @property
    def theta(self) -> float:
        return (self.m % self.q) / self.q

    @property
    def dim(self) -> int:
        return self.q

    def relation_defect(self) -> float:
        return _op_norm(self.V @ self.U - self.lam * self.U @ self.V)


def clock_shift(m: int, q: int) -> ClockShiftRep:
    """Clock-and-shift pair on C^q for theta = m/q, gcd(m, q) = 1."""
    if q < 1:
        raise InvalidInput("q must be positive")
    if math.gcd(m, q) != 1:
        raise NotCoprime(f"gcd({m}, {q}) != 1")
    u = np.zeros((q, q), dtype=complex)
    for j in range(q):
        u[(j + 1) % q, j] = 1.0
    lam = cmath.exp(2j * math.pi * m / q)
    v = np.diag([lam**j for j in range(q)]).astype(complex)
    return ClockShiftRep(m, q, u, v)


@dataclass(frozen=True)
class TruncatedZRep:
    """Truncation to span(e_{-N..N}) of a singly generated shift rep."""

    theta_input: ThetaLike
    theta: float
    N: int
    variant: str  # "z1" | "z1prime"
    U: np.ndarray
    V: np.ndarray
    defective_generator: str  # which generator lost its boundary column

    @property
    def dim(self) -> int:
        return 2 * self.N + 1

    def basis_index(self, k: int) -> int:
        if abs(k) > self.N:
            raise InvalidInput(f"|k| = {abs(k)} exceeds N = {self.N}")
        return k + self.N

    def interior_defect(self) -> float:
        """Commutation defect of VU - lambda UV on columns |k| <= N-1."""
        lam = cmath.exp(2j * math.pi * self.theta)
        d = self.V @ self.U - lam * self.U @ self.V
        return _op_norm(d[:, 1:-1])


def truncated_rep(theta: ThetaLike, N: int, variant: str = "z1") -> TruncatedZRep:
    if N < 1:
        raise InvalidInput("N must be >= 1")
    th = theta_to_float(theta)
    lam = cmath.exp(2j * math.pi * th)
    dim = 2 * N + 1
    shift = np.zeros((dim, dim), dtype=complex)
    for k in range(-N, N):
        shift[k + 1 + N, k + N] = 1.0  # e_k -> e_{k+1}, e_N -> 0
    if variant == "z1":
        u = shift
        v = np.diag([lam**k for k in range(-N, N + 1)]).astype(complex)
        defective = "U"
    elif variant == "z1prime":
        u = np.diag([lam**(-k) for k in range(-N, N + 1)]).astype(complex)
        v = shift
        defective = "V"
    else:
        raise InvalidInput(f"unknown variant {variant!r}")
    return TruncatedZRep(theta, th, N, variant, u, v, defective)


@dataclass(frozen=True)
class TruncatedZ2Rep:
    """Box truncation |m|,|n| <= N of the two-index rep, with the phase F0."""

    theta_input: ThetaLike
    theta: float
    N: int
    U: np.ndarray
    V: np.ndarray
    F0_diag: np.ndarray  # unit-modulus entries, ordered like the basis

    @property
    def dim(self) -> int:
        return (2 * self.N + 1) ** 2

    def site_index(self, m: int, n: int) -> int:
        if abs(m) > self.N or abs(n) > self.N:
            raise InvalidInput(f"site ({m},{n}) outside the box N = {self.N}")
        w = 2 * self.N + 1
        return (m + self.N) * w + (n + self.N)

    def sites(self) -> list[tuple[int, int]]:
        rng = range(-self.N, self.N + 1)
        return [(m, n) for m in rng for n in rng]


def dirac_data(theta: ThetaLike, N: int) -> TruncatedZ2Rep:
    """Box matrices for U, V and the diagonal phase operator F0."""
    if N < 1:
        raise InvalidInput("N must be >= 1")
    th = theta_to_float(theta)
    lam = cmath.exp(2j * math.pi * th)
    w = 2 * N + 1
    dim = w * w

    def idx(m, n):
        return (m + N) * w + (n + N)

    u = np.zeros((dim, dim), dtype=complex)
    v = np.zeros((dim, dim), dtype=complex)
    f0 = np.empty(dim, dtype=complex)
    for m in range(-N, N + 1):
        for n in range(-N, N + 1):
            if m < N:
                u[idx(m + 1, n), idx(m, n)] = 1.0
            if n < N:
                v[idx(m, n + 1), idx(m, n)] = lam**m
            if m == 0 and n == 0:
                f0[idx(m, n)] = 1.0
            else:
                f0[idx(m, n)] = complex(m, n) / math.hypot(m, n)
    return TruncatedZ2Rep(theta, th, N, u, v, f0)


# --- polynomial elements of the algebra ---------------------------------------

@dataclass(frozen=True)
class TorusPolynomial:
    """Finite sum  sum a_{m,n} U^m V^n  at a fixed theta.

    Multiplication uses V^n U^m = lambda^{nm} U^m V^n; the adjoint of
    c U^m V^n is conj(c) lambda^{mn} U^{-m} V^{-n}.
    """

    theta: float
    coeffs: tuple[tuple[tuple[int, int], complex], ...]

    @classmethod
    def from_dict(cls, theta: float, d: dict) -> "TorusPolynomial":
        items = tuple(sorted((k, complex(v)) for k, v in d.items() if v != 0))
        return cls(float(theta), items)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    @property
    def lam(self) -> complex:
        return cmath.exp(2j * math.pi * self.theta)

    def __add__(self, other: "TorusPolynomial") -> "TorusPolynomial":
        d = dict(self.coeffs)
        for k, v in other.coeffs:
            d[k] = d.get(k, 0) + v
        return TorusPolynomial.from_dict(self.theta, d)

    def __mul__(self, other: "TorusPolynomial") -> "TorusPolynomial":
        lam = self.lam
        d: dict = {}
        for (m1, n1), c1 in self.coeffs:
            for (m2, n2), c2 in other.coeffs:
                key = (m1 + m2, n1 + n2)
                d[key] = d.get(key, 0) + c1 * c2 * lam ** (n1 * m2)
        return TorusPolynomial.from_dict(self.theta, d)

    def scale(self, c: complex) -> "TorusPolynomial":
        return TorusPolynomial.from_dict(
            self.theta, {k: c * v for k, v in self.coeffs})

    def adjoint(self) -> "TorusPolynomial":
        d = {}
        for (m, n), c in self.coeffs:
            d[(-m, -n)] = d.get((-m, -n), 0) + c.conjugate() * self.lam ** (m * n)
        return TorusPolynomial.from_dict(self.theta, d)

    def a00(self) -> complex:
        return dict(self.coeffs).get((0, 0), 0j)

    def degree(self) -> tuple[int, int]:
        """Max |m|, max |n| over the support."""
        if not self.coeffs:
            return (0, 0)
        return (max(abs(m) for (m, _), _ in self.coeffs),
                max(abs(n) for (_, n), _ in self.coeffs))

    def realize_box(self, rep: TruncatedZ2Rep) -> np.ndarray:
        """Exact compression of the polynomial to the box basis.

        Matrix elements are those of the untruncated operator between box
        sites, so interior columns carry no truncation error at all.
        """
        lam = cmath.exp(2j * math.pi * rep.theta)
        out = np.zeros((rep.dim, rep.dim), dtype=complex)
        w = 2 * rep.N + 1
        base = np.arange(-rep.N, rep.N + 1)
        for (a, b), c in self.coeffs:
            ms = base[(base + a >= -rep.N) & (base + a <= rep.N)]
            ns = base[(base + b >= -rep.N) & (base + b <= rep.N)]
            if ms.size == 0 or ns.size == 0:
                continue
            rows = ((ms + a + rep.N) * w)[:, None] + (ns + b + rep.N)[None, :]
            cols = ((ms + rep.N) * w)[:, None] + (ns + rep.N)[None, :]
            vals = c * lam ** (ms * b)
            out[rows, cols] += np.broadcast_to(vals[:, None], rows.shape)
        return out

    def realize(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Evaluate with explicit generator matrices (adjoint for inverses)."""
        dim = U.shape[0]
        out = np.zeros((dim, dim), dtype=complex)
        for (m, n), c in self.coeffs:
            um = np.linalg.matrix_power(U, m) if m >= 0 else \
                np.linalg.matrix_power(U.conj().T, -m)
            vn = np.linalg.matrix_power(V, n) if n >= 0 else \
                np.linalg.matrix_power(V.conj().T, -n)
            out += c * (um @ vn)
        return out


# --- canonical trace -----------------------------------------------------------

def canonical_trace(element, rep: Optional[ClockShiftRep] = None) -> complex:
    """tau(sum a_{m,n} U^m V^n) = a_{0,0}; matrices get the normalized trace."""
    if isinstance(element, TorusPolynomial):
        return element.a00()
    if isinstance(element, np.ndarray):
        if element.ndim != 2 or element.shape[0] != element.shape[1]:
            raise UnsupportedForm("matrix form must be square")
        if rep is not None and element.shape[0] != rep.dim:
            raise UnsupportedForm("matrix does not live in the given representation")
        return complex(np.trace(element)) / element.shape[0]
    raise UnsupportedForm(f"cannot take the trace of {type(element).__name__}")


# --- Rieffel projection ---------------------------------------------------------

def _bump_pair(theta: float, profile: str):
    """The classical (f, g) pair on the circle for a trace-theta projection.

    f rises 0 -> 1 on [0, delta], is 1 on [delta, theta], falls back to 0 on
    [theta, theta + delta] and vanishes after; g = sqrt(f - f^2) on the
    falling ramp only.  These supports make  f(x) + f(x + theta) = 1  where
    g(x + theta) != 0  and keep g(x) g(x + theta) = 0, which together force
    p^2 = p for p = f(U) + V g(U) + g(U)* V*.
    """
    delta = min(theta, 1.0 - theta) / 4.0
    if profile == "piecewise-linear":
        ramp = lambda t: t
    elif profile == "smooth":
        def sigma(t):
            return math.exp(-1.0 / t) if t > 0 else 0.0

        def ramp(t):
            if t <= 0:
                return 0.0
            if t >= 1:
                return 1.0
            a, b = sigma(t), sigma(1.0 - t)
            return a / (a + b)
    else:
        raise InvalidInput(f"unknown profile {profile!r}")

    def f(x):
        x = x % 1.0
        if x < delta:
            return ramp(x / delta)
        if x <= theta:
            return 1.0
        if x < theta + delta:
            return ramp((theta + delta - x) / delta)
        return 0.0

    def g(x):
        x = x % 1.0
        if theta < x < theta + delta:
            fx = f(x)
            return math.sqrt(max(fx - fx * fx, 0.0))
        return 0.0

    return f, g, delta


@dataclass(frozen=True)
class RieffelProjectionSpec:
    """An assembled trace-theta projection p = f(U) + V g(U) + g(U)* V*."""

    theta: float
    delta: float
    profile: str
    rep_kind: str  # "clock" | "box"
    matrix: np.ndarray
    trace: float
    defect_idempotent: float
    defect_adjoint: float
    poly: Optional[TorusPolynomial] = None  # set for box builds
    degree: int = 0  # Fourier cutoff of the box build

    def fourier_a00(self) -> float:
        """Integral of f = the exact trace of the untruncated element."""
        return self.theta


def _fourier_coeffs(fn, K: int, samples: int = 1 << 13) -> np.ndarray:
    xs = np.arange(samples) / samples
    vals = np.array([fn(x) for x in xs])
    spec = np.fft.fft(vals) / samples
    out = np.empty(2 * K + 1, dtype=complex)
    for k in range(-K, K + 1):
        out[k + K] = spec[k % samples]
    return out


def rieffel_projection(theta: ThetaLike, rep, profile: str = "auto",
                       cutoff: Optional[int] = None) -> RieffelProjectionSpec:
    """Build the trace-theta projection inside the given representation.

    Clock-shift reps use exact functional calculus of the shift generator
    (piecewise-linear profile by default); box reps use a Fourier cutoff of
    a smooth profile so the truncated series stays close to a projection.
    """
    th = theta_to_float(theta)
    if not 0.0 < th < 1.0:
        raise ThetaOutOfRange(f"theta = {th} outside (0, 1)")
    if isinstance(rep, ClockShiftRep):
        if abs(rep.theta - th) > 1e-12:
            raise InvalidInput(
                f"theta = {th} does not match the representation's {rep.theta}")
        if profile == "auto":
            profile = "piecewise-linear"
        f, g, delta = _bump_pair(th, profile)
        q = rep.q
        # eigenbasis of the cyclic shift: column j has eigenvalue
        # exp(-2 pi i j / q), i.e. circle coordinate x_j = -j/q mod 1
        j = np.arange(q)
        w = np.exp(2j * math.pi * np.outer(j, j) / q) / math.sqrt(q)
        xs = (-j / q) % 1.0
        fu = w @ np.diag([f(x) for x in xs]) @ w.conj().T
        gu = w @ np.diag([g(x) for x in xs]) @ w.conj().T
        vg = rep.V @ gu
        p = fu + vg + vg.conj().T
        idem = _op_norm(p @ p - p)
        adj = _op_norm(p - p.conj().T)
        tr = float(np.trace(p).real) / q
        if idem > 1e-8:
            raise RepresentationTooSmall(
                f"projection defect {idem:.2e} above 1e-8 at q = {q}")
        return RieffelProjectionSpec(th, delta, profile, "clock", p, tr, idem, adj)
    if isinstance(rep, TruncatedZ2Rep):
        if abs(rep.theta - th) > 1e-12:
            raise InvalidInput(
                f"theta = {th} does not match the representation's {rep.theta}")
        if profile == "auto":
            profile = "smooth"
        f, g, delta = _bump_pair(th, profile)
        # tail quality wants K large, the exactness margin wants 2K <= N
        K = cutoff if cutoff is not None else min(max(6, rep.N // 3), rep.N // 2)
        fhat = _fourier_coeffs(f, K)
        ghat = _fourier_coeffs(g, K)
        lam = cmath.exp(2j * math.pi * th)
        f_poly = TorusPolynomial.from_dict(
            th, {(k, 0): fhat[k + K] for k in range(-K, K + 1)})
        # V g(U) = sum_k ghat_k lambda^k U^k V, then add its adjoint
        vg_poly = TorusPolynomial.from_dict(
            th, {(k, 1): ghat[k + K] * lam**k for k in range(-K, K + 1)})
        poly = f_poly + vg_poly + vg_poly.adjoint()
        p = poly.realize_box(rep)
        adj = _op_norm(p - p.conj().T)
        # idempotency measured away from the boundary: columns whose image
        # under p^2 cannot touch the truncation edge
        margin_m, margin_n = 2 * K, 2
        w_ = 2 * rep.N + 1
        cols = [
            (m + rep.N) * w_ + (n + rep.N)
            for m in range(-rep.N + margin_m, rep.N - margin_m + 1)
            for n in range(-rep.N + margin_n, rep.N - margin_n + 1)
        ]
        if not cols:
            raise RepresentationTooSmall(
                f"box N = {rep.N} too small for Fourier cutoff K = {K}")
        resid = p @ p[:, cols] - p[:, cols]
        # worst defect over interior basis vectors (operator norm is too
        # expensive at these dimensions and gates nothing downstream)
        idem = float(np.sqrt((np.abs(resid) ** 2).sum(axis=0)).max())
        tr = float(np.trace(p).real) / rep.dim
        return RieffelProjectionSpec(th, delta, profile, "box", p, tr, idem, adj,
                                     poly=poly, degree=K)
    raise UnsupportedForm(f"no Rieffel construction for {type(rep).__name__}")
