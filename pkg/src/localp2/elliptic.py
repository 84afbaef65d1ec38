"""Stationary Gromov-Witten theory of the elliptic curve.

The disconnected n-point functions are assembled from the Bloch-Okounkov
theta function by the Okounkov-Pandharipande permutation-determinant
formula.  Each permutation term is built in its triangular coordinates
y_k = z_{s(1)} + ... + z_{s(k)}, where every denominator is y_k * unit.
Individual terms have simple poles along partial-sum hyperplanes that only
cancel in the permutation sum; to keep all arithmetic polynomial-exact we
multiply through by the product of *all* partial-sum linear forms, sum the
(variable-permuted) terms, and then peel the forms off by exact long
division.  A division remainder or a pole of order two is a loud failure.

Connected functions follow by Moebius inversion over set partitions, and
coefficients are recognized in the weight-graded ring Q[E2, E4, E6].
All expansions here live in the curve's nome, tagged "cQt"; a log slot on
that tag is the coefficient of log of the *signed* nome (-1)^(E.E) * nome.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial

from .linalg import LinearSystemError, solve_unique
from .quasimod import DEFAULT_MARGIN, bernoulli, eisenstein_series
from .series import RatSeries, ZPoly

F = Fraction

CQT = "cQt"  # nome of the elliptic curve

MAX_NPOINT = 6


class EllipticError(ValueError):
    pass


# -- labels ----------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryLabel:
    """Genus h and descendent exponents a (weakly decreasing)."""
    h: int
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(sorted(self.parts, reverse=True)))
        if self.h < 0 or any(a < 0 for a in self.parts):
            raise EllipticError("negative genus or descendent exponent")

    def check_dimension(self):
        if sum(self.parts) != 2 * self.h - 2:
            raise EllipticError(
                f"dimension constraint fails: sum {self.parts} != {2 * self.h - 2}")

    @property
    def weight(self) -> int:
        return sum(a + 2 for a in self.parts)


# -- the ring Q[E2, E4, E6] --------------------------------------------------------

class EPoly:
    """Polynomial in E2, E4, E6 homogeneous for the weight 2a+4b+6c."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = {tuple(k): F(v) for k, v in terms.items() if F(v)}
        ws = {2 * a + 4 * b + 6 * c for a, b, c in self.terms}
        if len(ws) > 1:
            raise EllipticError(f"mixed weights: {sorted(ws)}")

    @staticmethod
    def zero() -> "EPoly":
        return EPoly({})

    @staticmethod
    def const(v) -> "EPoly":
        return EPoly({(0, 0, 0): v})

    @staticmethod
    def gen(k: int) -> "EPoly":
        return EPoly({{2: (1, 0, 0), 4: (0, 1, 0), 6: (0, 0, 1)}[k]: 1})

    @property
    def weight(self) -> int:
        for a, b, c in self.terms:
            return 2 * a + 4 * b + 6 * c
        return 0

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, EPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        return " + ".join(f"({v})*E2^{a}E4^{b}E6^{c}"
                          for (a, b, c), v in sorted(self.terms.items())) or "0"

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = EPoly.const(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, F(0)) + v
        return EPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return EPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = EPoly.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return EPoly({k: v * F(other) for k, v in self.terms.items()})
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                t[k] = t.get(k, F(0)) + v1 * v2
        return EPoly(t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / F(other))

    def __pow__(self, n: int):
        out = EPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def d_e2(self) -> "EPoly":
        """Formal partial derivative with respect to E2."""
        return EPoly({(a - 1, b, c): a * v
                      for (a, b, c), v in self.terms.items() if a})

    def to_qseries(self, order: int) -> RatSeries:
        out = RatSeries.zero(CQT, order)
        for (a, b, c), v in self.terms.items():
            term = RatSeries.const(CQT, v, order)
            for k, e in ((2, a), (4, b), (6, c)):
                for _ in range(e):
                    term = term * eisenstein_series(k, 1, order, var=CQT)
            out = out + term
        return out


def e_weight_monomials(w: int):
    out = []
    for c in range(w // 6 + 1):
        for b in range((w - 6 * c) // 4 + 1):
            rem = w - 6 * c - 4 * b
            if rem % 2 == 0:
                out.append((rem // 2, b, c))
    return out


def recognize_E(series: RatSeries, weight: int,
                margin: int = DEFAULT_MARGIN) -> EPoly:
    monos = e_weight_monomials(weight)
    need = len(monos) + margin
    if series.trunc_order < need - 1:
        raise EllipticError(f"insufficient nome order: need {need}, "
                            f"have {series.trunc_order + 1}")
    cols = [EPoly({m: 1}).to_qseries(need) for m in monos]
    rows = [[col.coeff(k) for col in cols] for k in range(need)]
    rhs = [series.coeff(k) for k in range(need)]
    try:
        sol = solve_unique(rows, rhs)
    except LinearSystemError as exc:
        raise EllipticError(f"series not quasimodular of weight {weight}: "
                            f"{exc}") from exc
    return EPoly({m: v for m, v in zip(monos, sol)})


# -- theta function and its derivatives --------------------------------------------

def _zlist_mul(a, b, zdeg, qorder):
    out = [RatSeries.zero(CQT, qorder) for _ in range(zdeg + 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if i + j > zdeg:
                break
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


@lru_cache(maxsize=None)
def theta_z(zdeg: int, qorder: int):
    """Coefficients of the Bloch-Okounkov Theta(z): a list of nome series,
    index = z-exponent.

    Theta(z) = z exp( sum_{k>=1} B_{2k}/(2k (2k)!) E_{2k} z^{2k} ).
    """
    if zdeg < 1:
        raise EllipticError("need z-degree >= 1")
    zero = RatSeries.zero(CQT, qorder)
    expo = [zero] * (zdeg + 1)
    for k in range(1, zdeg // 2 + 1):
        coef = bernoulli(2 * k) / (2 * k * factorial(2 * k))
        expo[2 * k] = eisenstein_series(2 * k, 1, qorder, var=CQT) * coef
    # exp of an even series with zero constant term, truncated at zdeg
    result = [zero] * (zdeg + 1)
    result[0] = RatSeries.one(CQT, qorder)
    power = result[:]
    kfac = 1
    for k in range(1, zdeg // 2 + 1):
        power = _zlist_mul(power, expo, zdeg, qorder)
        kfac *= k
        if all(p.is_zero() for p in power):
            break
        for j in range(zdeg + 1):
            if not power[j].is_zero():
                result[j] = result[j] + power[j] / kfac
    # multiply by z: shift by one
    return tuple([zero] + result[:zdeg])


def theta_deriv_scaled(theta, m: int, zdeg: int, qorder: int):
    """Theta^(m)(z)/m! as a z-coefficient list (binomial reindexing)."""
    zero = RatSeries.zero(CQT, qorder)
    out = [zero] * (zdeg + 1)
    for j in range(m, min(len(theta), zdeg + 1 + m)):
        if j - m <= zdeg:
            out[j - m] = theta[j] * comb(j, m)
    return out


def _unit_inverse(units, zdeg, qorder):
    """Inverse of a z-list with constant coefficient exactly 1."""
    zero = RatSeries.zero(CQT, qorder)
    inv = [zero] * (zdeg + 1)
    inv[0] = RatSeries.one(CQT, qorder)
    for k in range(1, zdeg + 1):
        acc = zero
        for j in range(k):
            if not (inv[j].is_zero() or units[k - j].is_zero()):
                acc = acc + inv[j] * units[k - j]
        inv[k] = -acc
    return inv


# -- disconnected n-point functions -------------------------------------------------

def _subsets(n: int):
    out = []
    for mask in range(1, 1 << n):
        out.append(tuple(i for i in range(n) if mask >> i & 1))
    return out


def _zpoly_from_zlist(zlist, var_index: int, n: int, bound: int) -> ZPoly:
    terms = {}
    for e, s in enumerate(zlist):
        if e > bound:
            break
        if not s.is_zero():
            key = [0] * n
            key[var_index] = e
            terms[tuple(key)] = s
    z = ZPoly(n, bound)
    z.terms = terms
    return z


@lru_cache(maxsize=None)
def npoint_disconnected(n: int, zdeg_bound: int, qorder: int) -> ZPoly:
    """The disconnected n-point function as a ZPoly, exact through total
    z-degree ``zdeg_bound``; per-variable exponents are >= -1."""
    if not 1 <= n <= MAX_NPOINT:
        raise EllipticError(f"n-point sum supported for 1 <= n <= {MAX_NPOINT}")
    B = zdeg_bound
    y_deg = B + n                       # degree needed before form division
    theta = theta_z(y_deg + n + 1, qorder)

    # identity-permutation term, in triangular coordinates y_1..y_n
    # (ZPoly index k-1 holds y_k); the determinant column j depends on
    # y_{n-j} only, with y_0 = 0 a scalar.
    one = RatSeries.one(CQT, qorder)
    columns = []
    for j in range(1, n + 1):
        col = []
        for i in range(1, n + 1):
            m = j - i + 1
            if m < 0:
                col.append(None)
            elif j == n:
                col.append(theta[m] if m < len(theta) else RatSeries.zero(CQT, qorder))
            else:
                col.append(theta_deriv_scaled(theta, m, y_deg, qorder))
        columns.append(col)

    det = ZPoly(n, y_deg)
    for perm in permutations(range(n)):
        sign = _perm_sign(perm)
        piece = ZPoly.from_const(n, y_deg, one * sign)
        ok = True
        for j in range(n):
            entry = columns[j][perm[j]]
            if entry is None:
                ok = False
                break
            if j == n - 1:  # scalar column
                if entry.is_zero():
                    ok = False
                    break
                piece = piece.mul(ZPoly.from_const(n, y_deg, entry), bound=y_deg)
            else:
                zp = _zpoly_from_zlist(entry, n - 2 - j, n, y_deg)
                if not zp.terms:
                    ok = False
                    break
                piece = piece.mul(zp, bound=y_deg)
        if ok:
            det = det + piece

    # divide by Theta(y_k) = y_k * unit: invert the units now, the monomials
    # only after transforming back and clearing hyperplane forms
    unit = [theta[j + 1] for j in range(y_deg + 1)]
    unit_inv = _unit_inverse(unit, y_deg, qorder)
    term = det
    for k in range(n):
        term = term.mul(_zpoly_from_zlist(unit_inv, k, n, y_deg), bound=y_deg)

    # back to z: y_k = z_1 + ... + z_k
    matrix = [[1 if j <= i else 0 for j in range(n)] for i in range(n)]
    term_z = term.linear_substitute(matrix)

    # multiply by all partial-sum forms that are not identity prefixes
    prefixes = {tuple(range(k + 1)) for k in range(n)}
    all_supports = _subsets(n)
    bound_full = B + len(all_supports)
    term_z.bound = bound_full
    for sup in all_supports:
        if sup in prefixes:
            continue
        form = ZPoly(n, bound_full)
        for i in sup:
            e = [0] * n
            e[i] = 1
            form.terms[tuple(e)] = one
        term_z = term_z.mul(form, bound=bound_full)

    # sum the variable-permuted copies
    total = ZPoly(n, bound_full)
    for perm in permutations(range(n)):
        total = total + term_z.permute_vars(perm)

    # peel off the forms: first hyperplanes (exact), then simple z poles
    for sup in all_supports:
        if len(sup) >= 2:
            total = total.divide_linear(sup)
    for i in range(n):
        total = total.divide_var(i)
    total.bound = B
    total.terms = {e: s for e, s in total.terms.items() if sum(e) <= B}
    return total


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        clen = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def npoint_connected(n: int, zdeg_bound: int, qorder: int) -> ZPoly:
    """Connected n-point function by Moebius inversion over set partitions."""
    total = ZPoly(n, zdeg_bound)
    for part in set_partitions(range(n)):
        k = len(part)
        coef = F((-1) ** (k - 1) * factorial(k - 1))
        piece = ZPoly.from_const(n, zdeg_bound + n,
                                 RatSeries.const(CQT, coef, qorder))
        blocks = sorted(part, key=len)
        done = 0
        for block in blocks:
            # blocks not yet multiplied in can still lower the total degree
            # by their size, so keep that much headroom past the target
            done += len(block)
            running_bound = zdeg_bound + (n - done)
            sub = npoint_disconnected(len(block),
                                      zdeg_bound + (n - len(block)), qorder)
            emb = ZPoly(n, running_bound + len(block))
            for e, s in sub.terms.items():
                key = [0] * n
                for pos, expo in zip(sorted(block), e):
                    key[pos] = expo
                emb.terms[tuple(key)] = s
            piece = piece.mul(emb, bound=running_bound)
        total = total + piece
    return total


def _dim_weight(w: int) -> int:
    return len(e_weight_monomials(w))


def default_qorder(weight: int, margin: int = DEFAULT_MARGIN) -> int:
    return _dim_weight(weight) + margin


@dataclass(frozen=True)
class EllipticSeries:
    label: StationaryLabel
    series: RatSeries        # nome expansion
    value: EPoly             # recognized form


@lru_cache(maxsize=None)
def _disconnected_coefficient(exps: tuple, qorder: int) -> RatSeries:
    zp = npoint_disconnected(len(exps), sum(exps), qorder)
    got = zp.coefficient(exps)
    return got if got is not None else RatSeries.zero(CQT, qorder)


def connected_coefficient(exps: tuple, qorder: int) -> RatSeries:
    """Coefficient of prod z_j^{e_j} in the connected n-point function."""
    total = RatSeries.zero(CQT, qorder)
    for part in set_partitions(range(len(exps))):
        k = len(part)
        coef = F((-1) ** (k - 1) * factorial(k - 1))
        prod = RatSeries.const(CQT, coef, qorder)
        for block in part:
            sub = tuple(sorted((exps[i] for i in block), reverse=True))
            prod = prod * _disconnected_coefficient(sub, qorder)
            if prod.is_zero():
                break
        total = total + prod
    return total


def connected_extract(label: StationaryLabel, qorder: int | None = None,
                      margin: int = DEFAULT_MARGIN) -> EllipticSeries:
    """The stationary series for the label, recognized in Q[E2,E4,E6] of
    weight sum(a_j + 2).  Labels violating the dimension constraint are
    rejected; use :func:`stationary_value` for the vanishing-aware wrapper.
    """
    label.check_dimension()
    if not label.parts:
        raise EllipticError("empty labels are handled by f1_empty")
    w = label.weight
    if qorder is None:
        qorder = default_qorder(w, margin)
    exps = tuple(a + 1 for a in label.parts)
    series = connected_coefficient(exps, qorder)
    value = recognize_E(series, w, margin=min(margin, qorder - _dim_weight(w)))
    return EllipticSeries(label=label, series=series, value=value)


def stationary_value(h: int, parts, qorder: int | None = None) -> EPoly:
    """connected_extract value, or zero when the label violates the
    dimension constraint or has a negative entry."""
    parts = tuple(sorted(parts, reverse=True))
    if h < 0 or any(a < 0 for a in parts) or sum(parts) != 2 * h - 2:
        return EPoly.zero()
    if not parts:
        raise EllipticError("empty label has no quasimodular value")
    return connected_extract(StationaryLabel(h, parts), qorder).value


# -- the genus-one unmarked series ---------------------------------------------------

def f1_empty(qorder: int) -> RatSeries:
    """Genus-one unmarked generating series,
    -(1/24) log((-1)^(E.E) nome) - sum_{n>=1} log(1 - nome^n).

    The log slot on the "cQt" tag is the coefficient of the signed-nome log.
    """
    if qorder < 1:
        raise EllipticError("need at least one nome order")
    coeffs = [F(0)] * (qorder + 1)
    for nn in range(1, qorder + 1):
        coeffs[nn] = F(_sigma1(nn), nn)
    return RatSeries(CQT, 0, coeffs, log_coeff=F(-1, 24))


def _sigma1(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


# -- holomorphic anomaly equation for the curve --------------------------------------

def _remove(parts: tuple, idx) -> list:
    return [a for i, a in enumerate(parts) if i not in idx]


def elliptic_hae_check(label: StationaryLabel, qorder: int | None = None) -> dict:
    """Verify -24 d/dE2 F_{h,a} against the loop + splitting - gluing
    combination dictated by the anomaly equation, in Q[E2,E4,E6].

    Returns a report dict; report["ok"] is the verdict.
    """
    label.check_dimension()
    h, parts = label.h, label.parts
    n = len(parts)
    if 2 * h - 2 + n <= 0:
        raise EllipticError("unstable label")
    lhs = connected_extract(label, qorder).value.d_e2() * (-24)

    loop = EPoly.zero()
    for i in range(n):
        for j in range(n):
            if i == j:
                new = _remove(parts, {i}) + [parts[i] - 2]
            else:
                new = _remove(parts, {i, j}) + [parts[i] - 1, parts[j] - 1]
            loop = loop + stationary_value(h - 1, new, qorder)
    if (h, parts) == (1, (0,)):
        # the unstable genus-zero three-point value survives the string
        # equation reduction and contributes exactly 1
        loop = loop + 1

    split = EPoly.zero()
    for mask in range(1 << n):
        I = [i for i in range(n) if mask >> i & 1]
        Ic = [i for i in range(n) if not mask >> i & 1]
        if not I or not Ic:
            continue
        for i in I:
            s1 = sum(parts[k] for k in I) - 1
            if s1 % 2:
                continue
            h1 = s1 // 2 + 1
            h2 = h - h1
            left = stationary_value(h1, [parts[k] - (1 if k == i else 0)
                                         for k in I], qorder)
            if left.is_zero():
                continue
            for j in Ic:
                right = stationary_value(h2, [parts[k] - (1 if k == j else 0)
                                              for k in Ic], qorder)
                split = split + left * right

    glue = EPoly.zero()
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            coef = comb(parts[i] + parts[j] + 1, parts[i])
            glue = glue + coef * stationary_value(
                h, _remove(parts, {i, j}) + [parts[i] + parts[j]], qorder)

    rhs = loop + split - 2 * glue
    return {
        "label": (h, parts),
        "lhs": lhs,
        "rhs": rhs,
        "loop": loop,
        "split": split,
        "glue": glue,
        "ok": lhs == rhs,
    }
