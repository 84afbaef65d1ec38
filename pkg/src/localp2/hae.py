"""Holomorphic anomaly solver.

At each genus g >= 2 the anomaly equation

    (X / 3 I11^2) dF_g/dS = 1/2 sum_{g1+g2=g} F_{g1,1} F_{g2,1}
                            (+ 1/2 F_{g-1,2} on the local side)

with F_{g,n} = (Q d/dQ)^n F_g fixes the S-dependence; the remaining
ambiguity lives in the (2g-1)-dimensional span of X^0..X^{2g-2}.  It is
fixed by the conifold gap: re-expanded in the conifold flat coordinate
t (normalized rationally; the standard coordinate is t/sqrt(3)), the
solution must have vanishing 1/t^j coefficients for j = 1..2g-3, a
prescribed 1/t^(2g-2) coefficient, and no constant term in its flat
Q-expansion.

The conifold frame replaces the propagator S by its conifold counterpart,
built from the conifold flat coordinate by the same recipe that builds S
from the degree-one period at large volume; X = 1/u stays an honest
coordinate.  The frame is validated against the genus-2 closed forms
before being trusted at higher genus.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .linalg import solve_unique
from .locrel import Correspondence, DTower
from .mirror import (
    BModElement,
    BModError,
    MirrorData,
    _theta_u,
    bm_eval,
)
from .quasimod import bernoulli
from .series import RatSeries

F = Fraction


class GapError(ValueError):
    pass


# -- boundary-condition constants ----------------------------------------------------

def gamma_local(g: int) -> Fraction:
    """Gap coefficient of 1/t^(2g-2) for the local series (standard t)."""
    return bernoulli(2 * g) / (2 * g * (2 * g - 2))


def gamma_relative(g: int) -> Fraction:
    """Gap coefficient of 1/t^(2g-2) for the relative series (standard t)."""
    b = abs(bernoulli(2 * g))
    return -F(2 ** (2 * g - 1) - 1, 2 ** (2 * g - 1)) * b / \
        (2 * g * (2 * g - 1) * (2 * g - 2))


def gap_target(g: int, kind: str) -> Fraction:
    """Target coefficient of t^-(2g-2) in the rational normalization,
    which rescales the standard one by 3^(g-1)."""
    gamma = gamma_local(g) if kind == "local" else gamma_relative(g)
    return 3 ** (g - 1) * gamma


# -- anomaly right side ----------------------------------------------------------------

def hae_rhs(g: int, kind: str, tower: DTower) -> BModElement:
    """Right side of the genus-g anomaly equation at zero insertions."""
    if g < 2:
        raise BModError("anomaly solving starts at genus 2")
    total = BModElement.zero()
    for g1 in range(1, g):
        g2 = g - g1
        total = total + tower.QdQ(g1, 1) * tower.QdQ(g2, 1)
    total = total * F(1, 2)
    if kind == "local":
        total = total + tower.QdQ(g - 1, 2) * F(1, 2)
    elif kind != "relative":
        raise ValueError(f"unknown kind {kind!r}")
    return total


@dataclass(frozen=True)
class AmbiguitySpace:
    g: int

    @property
    def dimension(self) -> int:
        return 2 * self.g - 1

    @property
    def basis(self):
        return tuple(BModElement.monomial(1, 0, j) for j in range(2 * self.g - 1))


def integrate_S(rhs: BModElement, g: int):
    """S-antiderivative of (3 I11^2 / X) * rhs, plus the ambiguity space."""
    if not rhs.is_zero() and rhs.i11_degree != 2:
        raise BModError("anomaly right side must be I11-degree 2")
    integrand = BModElement(0, {(s, x - 1): 3 * v
                                for (s, x), v in rhs.terms.items()})
    particular = BModElement(0, {(s + 1, x): v / (s + 1)
                                 for (s, x), v in integrand.terms.items()})
    return particular, AmbiguitySpace(g)


# -- conifold frame ---------------------------------------------------------------------

@dataclass(frozen=True)
class ConifoldFrame:
    that: RatSeries     # flat coordinate, u + O(u^2)
    s_con: RatSeries    # frame propagator, Laurent in u from u^-1
    u_inverse: RatSeries  # reversion: u as a series in the flat coordinate


def build_conifold_frame(md: MirrorData) -> ConifoldFrame:
    """Propagator from the conifold flat coordinate by the large-volume
    recipe: theta log(theta t) - (X - 1)/3, all in the coordinate u."""
    that = md.that
    order = that.trunc_order
    theta_t = _theta_u(that)
    if theta_t.constant_term() == 0:
        raise GapError("degenerate conifold frame: theta t vanishes at u = 0")
    s_con = _theta_u(theta_t) / theta_t
    x_minus_1_over_3 = RatSeries.from_pairs("u", {-1: F(1, 3), 0: F(-1, 3)},
                                            order)
    s_con = s_con - x_minus_1_over_3
    u_inv = that.revert("that")
    return ConifoldFrame(that=that, s_con=s_con, u_inverse=u_inv)


def conifold_expand(elt: BModElement, frame: ConifoldFrame,
                    max_pole: int) -> RatSeries:
    """Laurent expansion in the flat conifold coordinate of a weight-zero
    element with S -> frame propagator and X -> 1/u."""
    if elt.i11_degree != 0:
        raise BModError("conifold expansion needs a weight-zero element")
    order = frame.that.trunc_order
    total = RatSeries.zero("u", order)
    s_pows = {0: RatSeries.one("u", order)}
    smax = elt.deg_S()
    for s in range(1, smax + 1):
        s_pows[s] = s_pows[s - 1] * frame.s_con
    for (s, x), v in elt.terms.items():
        term = s_pows[s] * v
        term = term.shift(-x)  # X^x -> u^-x
        total = total + term
    total = total.trim()
    v = total.valuation()
    if v is None:
        return RatSeries.zero("that", order - max_pole)
    if v < -max_pole:
        raise GapError(f"conifold pole exceeds order {max_pole}")
    regular = total.shift(max_pole).trim()
    num = regular.compose(frame.u_inverse)
    den = frame.u_inverse ** max_pole
    return num / den


def q_constant_term(elt: BModElement, md: MirrorData) -> Fraction:
    return bm_eval(elt, md).constant_term()


def gap_fix(g: int, kind: str, particular: BModElement,
            ambiguity: AmbiguitySpace, frame: ConifoldFrame,
            md: MirrorData) -> BModElement:
    """Fix the holomorphic ambiguity from the gap and the vanishing flat
    constant term; the (2g-1)-square system must be uniquely solvable."""
    if g < 2:
        raise GapError("gap conditions exist for 2g - 2 >= 2")
    M = 2 * g - 2
    basis = ambiguity.basis

    def functionals(e: BModElement):
        con = conifold_expand(e, frame, M)
        vals = [con.coeff(-j) for j in range(1, M + 1)]
        vals.append(q_constant_term(e, md))
        return vals

    part_vals = functionals(particular)
    basis_vals = [functionals(b) for b in basis]
    targets = [F(0)] * (M - 1) + [gap_target(g, kind), F(0)]
    rows = [[basis_vals[j][i] for j in range(len(basis))]
            for i in range(M + 1)]
    rhs = [targets[i] - part_vals[i] for i in range(M + 1)]
    try:
        sol = solve_unique(rows, rhs)
    except Exception as exc:
        raise GapError(f"gap boundary system not uniquely solvable: {exc}") from exc
    out = particular
    for alpha, b in zip(sol, basis):
        out = out + b * alpha
    return out


# -- degree-bound assertions --------------------------------------------------------------

def assert_finite_generation(elt: BModElement, g: int, kind: str):
    """Membership in the orbifold-regular span X^-(g-1) * R_{3g-3}, plus the
    relative S-degree bound."""
    for (s, x) in elt.terms:
        if x < -(g - 1):
            raise BModError(f"X-pole too deep at {(s, x)}")
        if s + x + (g - 1) > 3 * g - 3:
            raise BModError(f"total degree exceeds 3g-3 at {(s, x)}")
        if 3 * x + s < 0:
            raise BModError(f"orbifold regularity fails at {(s, x)}")
    if elt.deg_S() > (3 * g - 3 if kind == "local" else 2 * g - 3):
        raise BModError("S-degree bound violated")


def solve_genus(g: int, kind: str, md: MirrorData,
                corr: Correspondence | None = None) -> BModElement:
    """Anomaly + gap determination of the genus-g series; lower genera are
    solved recursively and registered in the corresponding tower."""
    if corr is None:
        corr = Correspondence(md)
    tower = corr.local if kind == "local" else corr.relative
    for gp in range(2, g):
        if gp not in tower.elements:
            solve_genus(gp, kind, md, corr)
    rhs = hae_rhs(g, kind, tower)
    particular, amb = integrate_S(rhs, g)
    frame = build_conifold_frame(md)
    sol = gap_fix(g, kind, particular, amb, frame, md)
    assert_finite_generation(sol, g, kind)
    tower.set_genus(g, sol)
    return sol


def verify_hae(g: int, kind: str, tower: DTower) -> dict:
    """Check the anomaly identity on an already-solved genus."""
    lhs = tower.D(g, 0).partial_S()
    lhs = BModElement(2, {(s, x + 1): v / 3 for (s, x), v in lhs.terms.items()})
    rhs = hae_rhs(g, kind, tower)
    return {"genus": g, "kind": kind, "lhs": lhs, "rhs": rhs,
            "ok": lhs == rhs}
