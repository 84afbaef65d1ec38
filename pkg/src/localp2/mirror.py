"""B-model of local P2: periods, mirror map, and the polynomial ring of
generators S, X, I11.

Large-volume Frobenius data is built from the hypergeometric closed form of
the degree-one period and a second-order recursion for the log-companion
period.  The conifold flat coordinate is the unique power-series solution
(in u = 1 + 27q) of the third-order operator

    theta^3 + 3 q theta (3 theta + 1)(3 theta + 2),    theta = q d/dq,

with expansion u + O(u^2); the sqrt(3) relating it to the standard
normalization is kept out of the arithmetic and restored only in gap
targets.

Variable tags: "q" (algebraic coordinate), "Q" (flat coordinate), "cQ"
(level-3 nome), "cQt" (its cube), "u" (conifold coordinate), "that"
(conifold flat coordinate).  For the nome tags, a log slot is read as the
coefficient of log(-nome); combined with the sign of the nome expansion
this keeps every stored number rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .quasimod import QModElement
from .series import RatSeries, SeriesError

F = Fraction


# -- Frobenius data at large volume ---------------------------------------------

def _ibar1(order: int) -> RatSeries:
    coeffs = [F(0)] * (order + 1)
    for k in range(1, order + 1):
        coeffs[k] = 3 * F(factorial(3 * k - 1), factorial(k) ** 3) * (-1) ** k
    return RatSeries("q", 0, coeffs)


def _pf_apply(f: RatSeries) -> RatSeries:
    """(1 + 27q) theta^2 + 27 q theta + 6 q, acting on a q-series."""
    one27 = RatSeries.from_pairs("q", {0: 1, 1: 27}, f.trunc_order)
    q = RatSeries.gen("q", f.trunc_order)
    t1 = f.theta().theta()
    return one27 * t1 + 27 * (q * f.theta()) + 6 * (q * f)


def _solve_log_companion(i11: RatSeries, order: int) -> RatSeries:
    """The unique J with J(0) = 0 such that I11*log q + J is annihilated by
    the second-order operator above.

    Writing L(I11 log q) = log q * L(I11) + 2 (1+27q) theta(I11) + 27 q I11
    and using L(I11) = 0, J solves L(J) = -(2 (1+27q) theta I11 + 27 q I11)
    by a nondegenerate coefficient recursion.
    """
    res = _pf_apply(i11)
    if any(res.coeff(k) for k in range(0, order - 1)):
        raise SeriesError("degree-one period fails its differential equation")
    one27 = RatSeries.from_pairs("q", {0: 1, 1: 27}, order)
    q = RatSeries.gen("q", order)
    rhs = -(2 * (one27 * i11.theta()) + 27 * (q * i11))
    j = [F(0)] * (order + 1)
    for k in range(1, order + 1):
        acc = rhs.coeff(k)
        if k >= 2:
            acc -= (27 * (k - 1) ** 2 + 27 * (k - 1) + 6) * j[k - 1]
        elif k == 1:
            acc -= 6 * j[0]
        j[k] = acc / (k * k)
    return RatSeries("q", 0, j)


# -- conifold flat coordinate ----------------------------------------------------

def _theta_u(f: RatSeries) -> RatSeries:
    """theta = q d/dq = (u - 1) d/du on u-series (Laurent allowed)."""
    n = f.trunc_order
    lo = f.min_exp
    d = {k - 1: k * f.coeff(k) for k in range(lo, n + 1) if k}
    deriv = RatSeries.from_pairs("u", d or {0: 0}, n - 1)
    u_minus_1 = RatSeries.from_pairs("u", {0: -1, 1: 1}, n)
    return u_minus_1 * deriv


def _mirror_op_u(f: RatSeries) -> RatSeries:
    """theta^3 + 3 q theta (3 theta + 1)(3 theta + 2) on u-series, q = (u-1)/27."""
    t = _theta_u
    w = t(f)
    part1 = t(t(w))
    inner = 9 * t(t(w)) + 9 * t(w) + 2 * w
    qse = RatSeries.from_pairs("u", {0: F(-1, 27), 1: F(1, 27)}, f.trunc_order)
    return part1 + 3 * (qse * inner)


def _conifold_flat(order: int) -> RatSeries:
    """Solve for u + sum_{k>=2} c_k u^k term by term, asserting each pivot."""
    ops = []
    for k in range(1, order + 1):
        mono = RatSeries.from_pairs("u", {k: 1}, order + 2)
        ops.append(_mirror_op_u(mono))
    c = [F(0)] * (order + 1)
    c[1] = F(1)
    # residual of the current partial solution, updated as coefficients appear
    for m in range(0, order - 1):
        acc = F(0)
        for k in range(1, m + 2):
            acc += c[k] * ops[k - 1].coeff(m)
        piv = ops[m + 1].coeff(m)
        if piv == 0:
            raise SeriesError(f"conifold recursion degenerate at order {m + 2}")
        c[m + 2] = -acc / piv
    t = RatSeries("u", 0, c)
    res = _mirror_op_u(t)
    if any(res.coeff(k) for k in range(0, order - 2)):
        raise SeriesError("conifold flat coordinate fails its equation")
    return t


# -- the assembled mirror data ----------------------------------------------------

@dataclass(frozen=True)
class MirrorData:
    order: int
    ibar1: RatSeries      # q-series, no log
    I11: RatSeries        # theta of log q + ibar1
    J: RatSeries          # log-free part of the second period derivative
    X: RatSeries          # 1/(1 + 27q)
    S: RatSeries          # propagator theta log I11 - (X - 1)/3
    Qofq: RatSeries       # mirror map
    qofQ: RatSeries       # its reversion
    cQofq: RatSeries      # nome as q-series: -q exp(J/I11)
    that: RatSeries       # conifold flat coordinate in u


@lru_cache(maxsize=None)
def build_mirror_data(order: int, u_order: int | None = None) -> MirrorData:
    if order < 5:
        raise SeriesError("mirror data needs order >= 5")
    if u_order is None:
        u_order = order
    ibar1 = _ibar1(order)
    i11 = RatSeries.one("q", order) + ibar1.theta()
    j = _solve_log_companion(i11, order)
    one27 = RatSeries.from_pairs("q", {0: 1, 1: 27}, order)
    x = RatSeries.one("q", order) / one27
    s = i11.theta() / i11 - (x - RatSeries.one("q", order)) / 3
    q_with_log = RatSeries("q", 0, ibar1.coeffs, log_coeff=1)
    qofq = q_with_log.exp()          # q * exp(ibar1)
    qof_q = qofq.revert("Q")
    j_over_i11 = j / i11
    cqofq = -(RatSeries("q", j_over_i11.min_exp, j_over_i11.coeffs,
                        log_coeff=1).exp())
    that = _conifold_flat(u_order)
    return MirrorData(order=order, ibar1=ibar1, I11=i11, J=j, X=x, S=s,
                      Qofq=qofq, qofQ=qof_q, cQofq=cqofq, that=that)


# -- variable changes --------------------------------------------------------------

def cq_change(series: RatSeries, md: MirrorData) -> RatSeries:
    """Convert a series in the nome ("cQ") or its cube ("cQt") to a q-series.

    A log slot is the coefficient of log(-nome); since -cQ = q exp(J/I11)
    and -cQt = q^3 exp(3 J/I11), it contributes a rational log q slot plus
    an honest power series.
    """
    if series.var == "cQ":
        inner = md.cQofq
        log_q_mult = 1
        log_series = md.J / md.I11
    elif series.var == "cQt":
        inner = md.cQofq ** 3
        log_q_mult = 3
        log_series = 3 * (md.J / md.I11)
    else:
        raise SeriesError(f"cq_change expects a cQ or cQt series, got {series.var}")
    power = RatSeries(series.var, series.min_exp, series.coeffs)
    out = power.compose(inner)
    if series.log_coeff:
        out = out + series.log_coeff * log_series
        return RatSeries("q", out.min_exp, out.coeffs,
                         series.log_coeff * log_q_mult)
    return out


def q_to_Q(series: RatSeries, md: MirrorData) -> RatSeries:
    """Convert a q-series (optional log q slot) to the flat coordinate:
    log q = log Q - ibar1."""
    power = RatSeries("q", series.min_exp, series.coeffs)
    if series.log_coeff:
        power = power - series.log_coeff * md.ibar1
    out = power.compose(md.qofQ)
    if series.log_coeff:
        return RatSeries("Q", out.min_exp, out.coeffs, series.log_coeff)
    return out


# -- the polynomial B-model ring ----------------------------------------------------

class BModError(ValueError):
    pass


class BModElement:
    """I11^(-i11_degree) times a Laurent polynomial in X and polynomial in S."""

    __slots__ = ("i11_degree", "terms")

    def __init__(self, i11_degree: int, terms: dict):
        self.i11_degree = int(i11_degree)
        self.terms: dict[tuple, Fraction] = {}
        for (s, x), v in terms.items():
            v = Fraction(v)
            if s < 0:
                raise BModError("negative S exponent")
            if v:
                self.terms[(s, x)] = v

    @staticmethod
    def zero() -> "BModElement":
        return BModElement(0, {})

    @staticmethod
    def const(v, i11_degree: int = 0) -> "BModElement":
        return BModElement(i11_degree, {(0, 0): Fraction(v)})

    @staticmethod
    def monomial(v, s: int = 0, x: int = 0, i11_degree: int = 0) -> "BModElement":
        return BModElement(i11_degree, {(s, x): Fraction(v)})

    def is_zero(self) -> bool:
        return not self.terms

    def deg_S(self) -> int:
        return max((s for s, _ in self.terms), default=0)

    def __repr__(self):
        mono = " + ".join(f"({v})*S^{s}X^{x}"
                          for (s, x), v in sorted(self.terms.items()))
        return f"I11^-{self.i11_degree} * [{mono or '0'}]"

    def __eq__(self, other):
        if not isinstance(other, BModElement):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return (self.i11_degree == other.i11_degree
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.i11_degree, tuple(sorted(self.terms.items()))))

    def _check_degree(self, other: "BModElement"):
        if self.is_zero() or other.is_zero():
            return
        if self.i11_degree != other.i11_degree:
            raise BModError(
                f"I11-degree mismatch: {self.i11_degree} vs {other.i11_degree}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BModElement.const(other, self.i11_degree)
        self._check_degree(other)
        deg = other.i11_degree if self.is_zero() else self.i11_degree
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, F(0)) + v
        return BModElement(deg, t)

    __radd__ = __add__

    def __neg__(self):
        return BModElement(self.i11_degree, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BModElement.const(other, self.i11_degree)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return BModElement(self.i11_degree,
                               {k: v * Fraction(other) for k, v in self.terms.items()})
        t: dict = {}
        for (s1, x1), v1 in self.terms.items():
            for (s2, x2), v2 in other.terms.items():
                k = (s1 + s2, x1 + x2)
                t[k] = t.get(k, F(0)) + v1 * v2
        return BModElement(self.i11_degree + other.i11_degree, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def partial_S(self) -> "BModElement":
        return BModElement(self.i11_degree,
                           {(s - 1, x): s * v for (s, x), v in self.terms.items()
                            if s >= 1})

    def mul_X_power(self, k: int) -> "BModElement":
        return BModElement(self.i11_degree,
                           {(s, x + k): v for (s, x), v in self.terms.items()})


# theta acting on the generators:
#   theta S = -S^2 + (X-1) S / 3 - X(X-1)/9
#   theta X = X(X-1)
#   theta log I11 = S + (X-1)/3
_THETA_S = BModElement(0, {(2, 0): -1, (1, 1): F(1, 3), (1, 0): F(-1, 3),
                           (0, 2): F(-1, 9), (0, 1): F(1, 9)})
_THETA_X = BModElement(0, {(0, 2): 1, (0, 1): -1})
_THETA_LOG_I11 = BModElement(0, {(1, 0): 1, (0, 1): F(1, 3), (0, 0): F(-1, 3)})


def bm_theta(e: BModElement) -> BModElement:
    """q d/dq via the closed derivation rules; preserves i11_degree."""
    out = BModElement.zero()
    for (s, x), v in e.terms.items():
        if s:
            out = out + BModElement(0, {(s - 1, x): s * v}) * _THETA_S
        if x:
            out = out + BModElement(0, {(s, x - 1): x * v}) * _THETA_X
    if e.i11_degree:
        out = out + BModElement(0, dict(e.terms)) * (_THETA_LOG_I11
                                                     * (-e.i11_degree))
    return BModElement(e.i11_degree, out.terms)


def bm_derive_D(e: BModElement) -> BModElement:
    """D = 3 Q d/dQ = 3 I11^{-1} q d/dq; raises i11_degree by 1."""
    t = bm_theta(e)
    return BModElement(e.i11_degree + 1, {k: 3 * v for k, v in t.terms.items()})


def bm_derive_QdQ(e: BModElement) -> BModElement:
    """Q d/dQ = D/3."""
    t = bm_theta(e)
    return BModElement(e.i11_degree + 1, dict(t.terms))


def bm_eval(e: BModElement, md: MirrorData, target: str = "q") -> RatSeries:
    """Expand in q (or the flat coordinate Q) by substituting the series."""
    order = md.order
    out = RatSeries.zero("q", order)
    s_pows = {0: RatSeries.one("q", order)}
    for (s, x), v in e.terms.items():
        if s not in s_pows:
            s_pows[s] = md.S ** s
        term = s_pows[s] * v
        if x:
            term = term * md.X ** x if x > 0 else term / md.X ** (-x)
        out = out + term
    if e.i11_degree:
        k = e.i11_degree
        out = out / md.I11 ** k if k > 0 else out * md.I11 ** (-k)
    if target == "q":
        return out
    if target == "Q":
        return q_to_Q(out, md)
    raise BModError(f"unknown target {target!r}")


def bm_to_qmod(e: BModElement) -> QModElement:
    """Rewrite via X = A^3/C, S = (AB - A^3)/(6C), I11 = A.

    Negative intermediate A-exponents must cancel; a surviving one means the
    element is not regular at the orbifold point.
    """
    from math import comb

    acc: dict[tuple, Fraction] = {}
    # common denominator C^P; term: v (AB - A^3)^s / 6^s * A^{3x - deg} * C^{P-s-x}
    P = max((s + max(x, 0) for (s, x) in e.terms), default=0)
    for (s, x), v in e.terms.items():
        cpow = P - s - x
        for i in range(s + 1):
            w = comb(s, i) * (-1) ** (s - i)  # (AB)^i (-A^3)^(s-i)
            key = (i + 3 * (s - i) + 3 * x - e.i11_degree, i, cpow)
            acc[key] = acc.get(key, F(0)) + w * v * F(1, 6 ** s)
    acc = {k: v for k, v in acc.items() if v}
    if any(a < 0 for a, _, _ in acc):
        bad = {k: v for k, v in acc.items() if k[0] < 0}
        raise BModError(f"element not regular at the orbifold point: {bad}")
    return QModElement(P, acc)


def qmod_to_bmod(e: QModElement) -> BModElement:
    """Inverse dictionary: A -> I11, B -> I11^2 (X + 6S)/X, C -> I11^3/X."""
    out = BModElement.zero()
    b_elt = BModElement(-2, {(1, 0): 6, (0, 1): 1})  # I11^2 (X + 6S), X-divided below
    for (a, b, c), v in e.terms.items():
        term = BModElement.const(v, -(a + 3 * c))
        if b:
            t = b_elt
            for _ in range(b - 1):
                t = t * b_elt
            term = term * t.mul_X_power(-b)
        term = term.mul_X_power(-c)
        out = out + term
    if e.c_pole:
        # multiply by C^-pole = X / I11^3 each
        out = BModElement(out.i11_degree + 3 * e.c_pole,
                          {(s, x + e.c_pole): v for (s, x), v in out.terms.items()})
    return out
