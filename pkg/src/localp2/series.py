"""Truncated univariate Laurent series and bounded multivariate polynomials
over exact rationals.

A :class:`RatSeries` stores coefficients for exponents ``min_exp..trunc_order``
inclusive.  ``trunc_order`` is the last exponent at which the value is fully
determined; every arithmetic operation recomputes the largest order at which
its result is exact and truncates there.  No floating point is used anywhere.

An optional ``log_coeff`` slot holds a single rational multiple of the formal
symbol log(variable).  It participates in addition, scalar multiplication,
the theta derivative (theta log v = 1) and exponentiation with integer
log_coeff (a monomial shift); everything else rejects it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


class SeriesError(ValueError):
    pass


class RatSeries:
    """Truncated Laurent series with exact rational coefficients."""

    __slots__ = ("var", "min_exp", "coeffs", "log_coeff")

    def __init__(self, var: str, min_exp: int, coeffs: Iterable, log_coeff=0):
        self.var = var
        self.min_exp = int(min_exp)
        self.coeffs = tuple(_frac(c) for c in coeffs)
        self.log_coeff = _frac(log_coeff)
        if not self.coeffs:
            raise SeriesError("series needs at least one stored coefficient")

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def zero(var: str, order: int) -> "RatSeries":
        return RatSeries(var, 0, [_ZERO] * (order + 1))

    @staticmethod
    def const(var: str, value, order: int) -> "RatSeries":
        return RatSeries(var, 0, [_frac(value)] + [_ZERO] * order)

    @staticmethod
    def one(var: str, order: int) -> "RatSeries":
        return RatSeries.const(var, 1, order)

    @staticmethod
    def gen(var: str, order: int) -> "RatSeries":
        """The series ``v`` itself, known through ``order``."""
        c = [_ZERO] * (order + 1)
        if order >= 1:
            c[1] = _ONE
        return RatSeries(var, 0, c)

    @staticmethod
    def from_pairs(var: str, pairs, trunc_order: int, log_coeff=0) -> "RatSeries":
        pairs = dict(pairs)
        lo = min(list(pairs) + [0])
        c = [_ZERO] * (trunc_order - lo + 1)
        for e, v in pairs.items():
            if e > trunc_order:
                raise SeriesError("exponent beyond truncation order")
            c[e - lo] = _frac(v)
        return RatSeries(var, lo, c, log_coeff)

    # -- basic accessors -------------------------------------------------------

    @property
    def trunc_order(self) -> int:
        return self.min_exp + len(self.coeffs) - 1

    def coeff(self, k: int) -> Fraction:
        if k < self.min_exp:
            return _ZERO
        if k > self.trunc_order:
            raise SeriesError(f"coefficient of {self.var}^{k} beyond truncation "
                              f"order {self.trunc_order}")
        return self.coeffs[k - self.min_exp]

    def coeff_list(self, lo: int, hi: int) -> list:
        return [self.coeff(k) for k in range(lo, hi + 1)]

    def valuation(self) -> int | None:
        """Exponent of the first nonzero coefficient, or None for zero series."""
        for i, c in enumerate(self.coeffs):
            if c:
                return self.min_exp + i
        return None

    def is_zero(self) -> bool:
        return self.valuation() is None and self.log_coeff == 0

    def constant_term(self) -> Fraction:
        return self.coeff(0) if self.min_exp <= 0 <= self.trunc_order else _ZERO

    def truncate(self, order: int) -> "RatSeries":
        if order > self.trunc_order:
            raise SeriesError("cannot extend truncation order")
        if order < self.min_exp:
            return RatSeries(self.var, order, [_ZERO], self.log_coeff)
        return RatSeries(self.var, self.min_exp,
                         self.coeffs[: order - self.min_exp + 1], self.log_coeff)

    def trim(self) -> "RatSeries":
        """Drop leading zero coefficients (raises the declared floor)."""
        v = self.valuation()
        if v is None or v == self.min_exp:
            return self
        return RatSeries(self.var, v, self.coeffs[v - self.min_exp:], self.log_coeff)

    def retag(self, var: str) -> "RatSeries":
        return RatSeries(var, self.min_exp, self.coeffs, self.log_coeff)

    def shift(self, k: int) -> "RatSeries":
        """Multiply by variable**k."""
        if self.log_coeff:
            raise SeriesError("cannot shift a log-extended series")
        return RatSeries(self.var, self.min_exp + k, self.coeffs)

    # -- representation --------------------------------------------------------

    def __repr__(self):
        bits = []
        if self.log_coeff:
            bits.append(f"({self.log_coeff})*log({self.var})")
        shown = 0
        for i, c in enumerate(self.coeffs):
            if c and shown < 8:
                e = self.min_exp + i
                bits.append(f"({c})*{self.var}^{e}" if e else f"({c})")
                shown += 1
        if not bits:
            bits.append("0")
        return " + ".join(bits) + f" + O({self.var}^{self.trunc_order + 1})"

    def __eq__(self, other):
        if not isinstance(other, RatSeries):
            return NotImplemented
        if self.var != other.var or self.log_coeff != other.log_coeff:
            return False
        if self.trunc_order != other.trunc_order:
            return False
        lo = min(self.min_exp, other.min_exp)
        return (self.coeff_list(lo, self.trunc_order)
                == other.coeff_list(lo, other.trunc_order))

    def __hash__(self):
        return hash((self.var, self.min_exp, self.coeffs, self.log_coeff))

    def agrees_with(self, other: "RatSeries", through: int) -> bool:
        """Exact coefficient equality through the given order (log slots too)."""
        if self.var != other.var or self.log_coeff != other.log_coeff:
            return False
        lo = min(self.min_exp, other.min_exp)
        return self.coeff_list(lo, through) == other.coeff_list(lo, through)

    # -- ring operations -------------------------------------------------------

    def _check_var(self, other: "RatSeries"):
        if self.var != other.var:
            raise SeriesError(f"variable mismatch: {self.var} vs {other.var}")

    def __neg__(self):
        return RatSeries(self.var, self.min_exp, [-c for c in self.coeffs],
                         -self.log_coeff)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RatSeries.const(self.var, other, max(self.trunc_order, 0))
        if not isinstance(other, RatSeries):
            return NotImplemented
        self._check_var(other)
        order = min(self.trunc_order, other.trunc_order)
        lo = min(self.min_exp, other.min_exp)
        c = [self.coeff(k) + other.coeff(k) for k in range(lo, order + 1)]
        return RatSeries(self.var, lo, c, self.log_coeff + other.log_coeff)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-_frac(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            s = _frac(other)
            return RatSeries(self.var, self.min_exp, [c * s for c in self.coeffs],
                             self.log_coeff * s)
        if not isinstance(other, RatSeries):
            return NotImplemented
        self._check_var(other)
        a, b = self, other
        if a.log_coeff or b.log_coeff:
            # Only scalar-like factors may multiply a log-extended series.
            if a.log_coeff and b.log_coeff:
                raise SeriesError("unsupported log_coeff combination in mul")
            if b.log_coeff:
                a, b = b, a
            if not (b.min_exp <= 0 and all(c == 0 for i, c in enumerate(b.coeffs)
                                           if b.min_exp + i != 0)):
                raise SeriesError("unsupported log_coeff combination in mul")
            return a * b.constant_term() + RatSeries.zero(a.var, min(a.trunc_order,
                                                                     b.trunc_order))
        order = min(a.trunc_order + b.min_exp, b.trunc_order + a.min_exp)
        lo = a.min_exp + b.min_exp
        n = order - lo + 1
        if n <= 0:
            return RatSeries(a.var, lo, [_ZERO])
        out = [_ZERO] * n
        bc = b.coeffs
        for i, ca in enumerate(a.coeffs):
            if not ca:
                continue
            base = i  # exponent offset relative to lo
            top = min(len(bc), n - base)
            for j in range(top):
                cb = bc[j]
                if cb:
                    out[base + j] += ca * cb
        return RatSeries(a.var, lo, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            s = _frac(other)
            if s == 0:
                raise ZeroDivisionError("division by zero scalar")
            return self * (1 / s)
        if not isinstance(other, RatSeries):
            return NotImplemented
        self._check_var(other)
        if other.log_coeff:
            raise SeriesError("cannot divide by a log-extended series")
        if self.log_coeff:
            raise SeriesError("cannot divide a log-extended series")
        vb = other.valuation()
        if vb is None:
            raise SeriesError("division by series with zero leading coefficient")
        b0 = other.coeff(vb)
        self = self.trim()
        va = self.min_exp
        lo = va - vb
        order = min(self.trunc_order - vb, other.trunc_order - 2 * vb + va)
        n = order - lo + 1
        if n <= 0:
            return RatSeries(self.var, lo, [_ZERO])
        out = [_ZERO] * n
        for k in range(n):
            acc = self.coeff(lo + k + vb)
            for j in range(k):
                cb = other.coeff(vb + k - j)
                if cb and out[j]:
                    acc -= out[j] * cb
            out[k] = acc / b0
        return RatSeries(self.var, lo, out)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise SeriesError("only integer powers supported")
        if n < 0:
            return RatSeries.one(self.var, self.trunc_order - self.min_exp) / self ** (-n)
        result = RatSeries.one(self.var, self.trunc_order - min(self.min_exp, 0))
        base = self
        e = n
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # -- transcendental-style operations (exact on units) ----------------------

    def log(self) -> "RatSeries":
        """log of a series with constant term 1 (unit, no log slot)."""
        if self.log_coeff:
            raise SeriesError("log of a log-extended series")
        if self.valuation() != 0 or self.coeff(0) != 1:
            raise SeriesError("log requires constant term 1")
        n = self.trunc_order
        f = [self.coeff(k) for k in range(n + 1)]
        out = [_ZERO] * (n + 1)
        for k in range(1, n + 1):
            acc = k * f[k]
            for j in range(1, k):
                if out[j] and f[k - j]:
                    acc -= j * out[j] * f[k - j]
            out[k] = acc / k
        return RatSeries(self.var, 0, out)

    def exp(self) -> "RatSeries":
        """exp of a series with zero constant term; an integer log slot
        contributes a monomial shift (exp(c log v) = v**c)."""
        shift = 0
        if self.log_coeff:
            if self.log_coeff.denominator != 1:
                raise SeriesError("exp needs an integer log_coeff")
            shift = int(self.log_coeff)
        v = self.valuation()
        if v is not None and v < 0:
            raise SeriesError("exp of a Laurent series")
        if self.constant_term() != 0:
            raise SeriesError("exp requires zero constant term")
        n = self.trunc_order
        f = [self.coeff(k) for k in range(n + 1)]
        out = [_ZERO] * (n + 1)
        out[0] = _ONE
        for k in range(1, n + 1):
            acc = _ZERO
            for j in range(1, k + 1):
                if f[j] and out[k - j]:
                    acc += j * f[j] * out[k - j]
            out[k] = acc / k
        return RatSeries(self.var, shift, out)

    def nth_root(self, n: int) -> "RatSeries":
        """n-th root of a series with constant term 1, exact over Q."""
        if n <= 0:
            raise SeriesError("root index must be positive")
        return (self.log() / n).exp()

    def theta(self) -> "RatSeries":
        """theta = v d/dv; a log slot contributes its coefficient at v^0."""
        c = [k * self.coeffs[k - self.min_exp]
             for k in range(self.min_exp, self.trunc_order + 1)]
        out = RatSeries(self.var, self.min_exp, c)
        if self.log_coeff:
            out = out + RatSeries.const(self.var, self.log_coeff,
                                        max(out.trunc_order, 0))
        return out

    def compose(self, inner: "RatSeries") -> "RatSeries":
        """Substitute ``inner`` (zero constant term) for the variable.

        If the outer series has a log slot, ``inner`` must be
        variable*(unit with constant term 1) and the slot expands as
        log(inner) = log v + log(unit).
        """
        if self.min_exp < 0:
            raise SeriesError("compose with Laurent outer unsupported")
        v = inner.valuation()
        if inner.constant_term() != 0 or (v is not None and v < 1):
            raise SeriesError("inner series must have zero constant term")
        log_part = None
        if self.log_coeff:
            unit = inner.shift(-1)
            if unit.constant_term() != 1:
                raise SeriesError("log slot composition needs inner = v*(1+O(v))")
            log_part = unit.log() * self.log_coeff
        if v is None:
            out = RatSeries.const(inner.var, self.coeff(0), inner.trunc_order)
        else:
            bound = min(inner.trunc_order, (self.trunc_order + 1) * v - 1)
            out = RatSeries.const(inner.var, self.coeff(self.trunc_order), bound)
            for k in range(self.trunc_order - 1, -1, -1):
                out = (out * inner.truncate(bound)).truncate(bound) + self.coeff(k)
        if log_part is not None:
            out = out + log_part
            return RatSeries(out.var, out.min_exp, out.coeffs, self.log_coeff)
        return out

    def revert(self, new_var: str | None = None) -> "RatSeries":
        """Compositional inverse of c1*v + O(v^2), c1 nonzero."""
        if self.log_coeff:
            raise SeriesError("revert of a log-extended series")
        if self.valuation() != 1:
            raise SeriesError("revert needs valuation exactly 1")
        c1 = self.coeff(1)
        n = self.trunc_order
        var = new_var or self.var
        f = self.retag(var)
        g = RatSeries(var, 0, [_ZERO, 1 / c1] + [_ZERO] * (n - 1))
        for m in range(2, n + 1):
            res = f.compose(g).coeff(m)
            cs = list(g.coeffs)
            cs[m] -= res / c1
            g = RatSeries(var, 0, cs)
        return g


# -- JSON serialization --------------------------------------------------------

def _frac_json(x: Fraction) -> dict:
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _frac_from_json(d) -> Fraction:
    return Fraction(int(d["num"]), int(d["den"]))


def series_to_json(s: RatSeries) -> dict:
    return {
        "variable": s.var,
        "min_exp": s.min_exp,
        "trunc_order": s.trunc_order,
        "log_coeff": _frac_json(s.log_coeff),
        "coeffs": [{"exp": k, **_frac_json(s.coeff(k))}
                   for k in range(s.min_exp, s.trunc_order + 1) if s.coeff(k)],
    }


def series_from_json(d) -> RatSeries:
    pairs = {int(c["exp"]): _frac_from_json(c) for c in d["coeffs"]}
    lo = min(list(pairs) + [int(d["min_exp"])])
    n = int(d["trunc_order"]) - lo + 1
    coeffs = [_ZERO] * n
    for e, v in pairs.items():
        coeffs[e - lo] = v
    return RatSeries(d["variable"], lo, coeffs, _frac_from_json(d["log_coeff"]))


# -- bounded multivariate polynomials with series coefficients ------------------

class ZPoly:
    """Polynomial in z_1..z_n, exponents >= -1, truncated at a total-degree
    bound, with RatSeries coefficients sharing one variable and order."""

    __slots__ = ("n", "bound", "terms")

    def __init__(self, n: int, bound: int, terms: dict | None = None):
        self.n = n
        self.bound = bound
        self.terms: dict[tuple, RatSeries] = {}
        if terms:
            for e, s in terms.items():
                self._set(tuple(e), s)

    def _set(self, e: tuple, s: RatSeries):
        if len(e) != self.n:
            raise SeriesError("exponent tuple of wrong length")
        if any(x < -1 for x in e):
            raise SeriesError(f"exponent below -1 in {e}: uncancelled pole")
        if sum(e) > self.bound:
            return
        if not s.is_zero():
            self.terms[e] = s

    @staticmethod
    def from_const(n: int, bound: int, s: RatSeries) -> "ZPoly":
        return ZPoly(n, bound, {(0,) * n: s})

    def copy(self) -> "ZPoly":
        out = ZPoly(self.n, self.bound)
        out.terms = dict(self.terms)
        return out

    def coefficient(self, e: Sequence[int]) -> RatSeries | None:
        return self.terms.get(tuple(e))

    def min_exponent(self, i: int) -> int:
        return min((e[i] for e in self.terms), default=0)

    def total_degrees(self) -> tuple[int, int]:
        degs = [sum(e) for e in self.terms] or [0]
        return min(degs), max(degs)

    def __add__(self, other: "ZPoly") -> "ZPoly":
        if self.n != other.n:
            raise SeriesError("mixed variable counts")
        out = ZPoly(self.n, min(self.bound, other.bound))
        for e, s in self.terms.items():
            if sum(e) <= out.bound:
                out.terms[e] = s
        for e, s in other.terms.items():
            if sum(e) > out.bound:
                continue
            cur = out.terms.get(e)
            t = s if cur is None else cur + s
            if t.is_zero():
                out.terms.pop(e, None)
            else:
                out.terms[e] = t
        return out

    def __neg__(self) -> "ZPoly":
        out = ZPoly(self.n, self.bound)
        out.terms = {e: -s for e, s in self.terms.items()}
        return out

    def __sub__(self, other: "ZPoly") -> "ZPoly":
        return self + (-other)

    def scale(self, c) -> "ZPoly":
        out = ZPoly(self.n, self.bound)
        if _frac(c):
            out.terms = {e: s * c for e, s in self.terms.items()}
        return out

    def mul(self, other: "ZPoly", bound: int | None = None) -> "ZPoly":
        """Product truncated at ``bound`` (default: validity-tracking bound)."""
        if self.n != other.n:
            raise SeriesError("mixed variable counts")
        if bound is None:
            m1, _ = self.total_degrees()
            m2, _ = other.total_degrees()
            bound = min(self.bound + m2, other.bound + m1)
        out = ZPoly(self.n, bound)
        acc: dict[tuple, RatSeries] = {}
        for e1, s1 in self.terms.items():
            for e2, s2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if sum(e) > bound:
                    continue
                if any(x < -1 for x in e):
                    raise SeriesError(f"exponent below -1 in product at {e}")
                p = s1 * s2
                cur = acc.get(e)
                acc[e] = p if cur is None else cur + p
        out.terms = {e: s for e, s in acc.items() if not s.is_zero()}
        return out

    def linear_substitute(self, matrix: Sequence[Sequence[int]]) -> "ZPoly":
        """Replace z_i by sum_j matrix[i][j] * y_j (invertible integer matrix).

        A -1 exponent passes through only when the variable's image is
        +/- a single variable.
        """
        m = [list(row) for row in matrix]
        if len(m) != self.n or any(len(r) != self.n for r in m):
            raise SeriesError("substitution matrix of wrong shape")
        if _int_det(m) == 0:
            raise SeriesError("substitution matrix not invertible")
        base = next(iter(self.terms.values()), None)
        cvar = base.var if base is not None else "q"
        corder = base.trunc_order if base is not None else 0

        def monomial(j: int, exp: int, c) -> "ZPoly":
            e = [0] * self.n
            e[j] = exp
            z = ZPoly(self.n, self.bound)
            z.terms[tuple(e)] = RatSeries.const(cvar, c, corder)
            return z

        images = []
        for i in range(self.n):
            img = ZPoly(self.n, self.bound)
            for j, c in enumerate(m[i]):
                if c:
                    img = img + monomial(j, 1, c)
            images.append(img)
        out = ZPoly(self.n, self.bound)
        cache: dict[tuple, ZPoly] = {}
        for e, s in self.terms.items():
            piece = ZPoly.from_const(self.n, self.bound, s)
            for i, x in enumerate(e):
                if x == 0:
                    continue
                if x < 0:
                    nz = [(j, c) for j, c in enumerate(m[i]) if c]
                    if len(nz) != 1 or abs(nz[0][1]) != 1:
                        raise SeriesError("negative exponent under non-monomial "
                                          "substitution")
                    j, c = nz[0]
                    piece = piece.mul(monomial(j, -1, c), bound=self.bound)
                    continue
                key = (i, x)
                if key not in cache:
                    r = images[i]
                    for _ in range(x - 1):
                        r = r.mul(images[i], bound=self.bound)
                    cache[key] = r
                piece = piece.mul(cache[key], bound=self.bound)
            out = out + piece
        out.bound = self.bound
        return out

    def permute_vars(self, perm: Sequence[int]) -> "ZPoly":
        """Relabel variables: new exponent of z_perm[i] is old exponent of z_i."""
        out = ZPoly(self.n, self.bound)
        for e, s in self.terms.items():
            ne = [0] * self.n
            for i, x in enumerate(e):
                ne[perm[i]] = x
            out.terms[tuple(ne)] = s
        return out

    def divide_linear(self, support: Sequence[int]) -> "ZPoly":
        """Exact division by the linear form sum of z_i over ``support``.

        Long division in the first support variable; raises if a remainder
        survives (an uncancelled hyperplane pole)."""
        support = sorted(support)
        piv = support[0]
        rest = support[1:]
        work = dict(self.terms)
        out = ZPoly(self.n, self.bound - 1)
        # peel by descending pivot exponent
        while work:
            d = max(e[piv] for e in work)
            if d <= 0:
                if any(not s.is_zero() for s in work.values()):
                    raise SeriesError("non-exact division by linear form: "
                                      "uncancelled pole")
                break
            layer = {e: s for e, s in work.items() if e[piv] == d}
            for e, s in layer.items():
                q = list(e)
                q[piv] -= 1
                qt = tuple(q)
                cur = out.terms.get(qt)
                out.terms[qt] = s if cur is None else cur + s
                del work[e]
                # subtract q * (rest of form)
                for j in rest:
                    ee = list(q)
                    ee[j] += 1
                    et = tuple(ee)
                    curw = work.get(et)
                    t = (-s) if curw is None else curw - s
                    if t.is_zero():
                        work.pop(et, None)
                    else:
                        work[et] = t
        out.terms = {e: s for e, s in out.terms.items() if not s.is_zero()}
        return out

    def divide_var(self, i: int) -> "ZPoly":
        """Exact division by z_i (floor at -1)."""
        out = ZPoly(self.n, self.bound - 1)
        for e, s in self.terms.items():
            ne = list(e)
            ne[i] -= 1
            if ne[i] < -1:
                raise SeriesError("pole of order >= 2 in a z variable")
            out.terms[tuple(ne)] = s
        return out


def _int_det(m) -> int:
    n = len(m)
    m = [row[:] for row in m]
    det = 1
    for i in range(n):
        piv = None
        for r in range(i, n):
            if m[r][i]:
                piv = r
                break
        if piv is None:
            return 0
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            f = Fraction(m[r][i], m[i][i])
            m[r] = [a - f * b for a, b in zip(m[r], m[i])]
    return int(det)
