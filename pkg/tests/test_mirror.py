from fractions import Fraction

import pytest

from localp2.mirror import (
    BModElement,
    BModError,
    MirrorData,
    bm_derive_D,
    bm_derive_QdQ,
    bm_eval,
    bm_theta,
    bm_to_qmod,
    build_mirror_data,
    cq_change,
    q_to_Q,
    qmod_to_bmod,
    _conifold_flat,
    _mirror_op_u,
)
from localp2.quasimod import QModElement, generator_series, qm_derive, qm_to_qseries
from localp2.series import RatSeries

from oracles import ibar1_coeff

F = Fraction

ORDER = 32


@pytest.fixture(scope="module")
def md() -> MirrorData:
    return build_mirror_data(ORDER)


class TestFrobenius:
    def test_ibar1_closed_form(self, md):
        assert md.ibar1.coeff(1) == ibar1_coeff(1) == -6
        assert md.ibar1.coeff(2) == ibar1_coeff(2) == 45

    def test_i11(self, md):
        assert md.I11.coeff_list(0, 2) == [1, -6, 90]

    def test_mirror_map(self, md):
        assert md.Qofq.coeff_list(1, 6) == [1, -6, 63, -866, 13899, -246366]
        assert md.qofQ.coeff_list(1, 6) == [1, 6, 9, 56, -300, 3942]

    def test_round_trip(self, md):
        comp = md.Qofq.retag("t").compose(md.qofQ)
        assert comp.coeff_list(1, ORDER - 1) == [1] + [0] * (ORDER - 2)

    def test_propagator_first_order(self, md):
        # by hand: theta log I11 = -6q + ..., (X-1)/3 = -9q + ...
        assert md.S.coeff_list(0, 1) == [0, 3]

    def test_propagator_definition(self, md):
        lhs = md.I11.log().theta()
        rhs = md.S + (md.X - RatSeries.one("q", ORDER)) / 3
        assert lhs.agrees_with(rhs, ORDER - 1)

    def test_second_period_identity(self, md):
        # theta(J/I11) = X/I11^2 - 1, the classical special-geometry relation
        lhs = (md.J / md.I11).theta()
        rhs = md.X / md.I11 ** 2 - RatSeries.one("q", ORDER)
        assert lhs.agrees_with(rhs, ORDER - 2)


class TestNomeBridge:
    def test_a_pulls_back_to_i11(self, md):
        a = generator_series("A", 30)
        got = cq_change(a, md)
        assert got.agrees_with(md.I11, 30)

    def test_b_pulls_back(self, md):
        b = generator_series("B", 30)
        got = cq_change(b, md)
        rhs = md.I11 ** 2 * (md.X + 6 * md.S) / md.X
        assert got.agrees_with(rhs, 30)

    def test_c_pulls_back(self, md):
        c = generator_series("C", 30)
        got = cq_change(c, md)
        rhs = md.I11 ** 3 / md.X
        assert got.agrees_with(rhs, 30)

    def test_hauptmodul(self, md):
        # A^3 / C pulled back is the geometric series of 1/(1+27q)
        order = 30
        a3c = qm_to_qseries(QModElement(1, {(3, 0, 0): 1}), order)
        got = cq_change(a3c, md)
        assert got.agrees_with(md.X, order)

    def test_constant_series(self, md):
        c = RatSeries.const("cQ", F(5, 7), 10)
        assert cq_change(c, md).constant_term() == F(5, 7)

    def test_tag_mismatch(self, md):
        with pytest.raises(Exception):
            cq_change(RatSeries.one("q", 5), md)

    def test_cq_cube_consistency(self, md):
        # a cQt-series equals the same series in cQ^3
        s_t = RatSeries.from_pairs("cQt", {1: 1, 2: -2}, 8)
        s_c = RatSeries.from_pairs("cQ", {3: 1, 6: -2}, 24)
        assert cq_change(s_t, md).agrees_with(cq_change(s_c, md), 20)


class TestDerivationRules:
    def test_theta_x(self, md):
        e = BModElement.monomial(1, 0, 1)  # X
        got = bm_theta(e)
        assert got == BModElement(0, {(0, 2): 1, (0, 1): -1})
        lhs = bm_eval(got, md)
        assert lhs.agrees_with(md.X.theta(), ORDER - 2)

    def test_theta_s_riccati(self, md):
        e = BModElement.monomial(1, 1, 0)  # S
        lhs = bm_eval(bm_theta(e), md)
        assert lhs.agrees_with(md.S.theta(), ORDER - 2)

    def test_D_of_D3F0(self, md):
        d3 = BModElement.monomial(-9, 0, 1, i11_degree=3)  # -9X/I11^3
        d4 = bm_derive_D(d3)
        assert d4 == BModElement.monomial(81, 1, 1, i11_degree=4)

    def test_D_of_constant(self):
        assert bm_derive_D(BModElement.const(1)).is_zero()

    def test_D2_F1_relative(self):
        df1 = BModElement.monomial(F(-1, 8), 0, 1, i11_degree=1)
        d2f1 = bm_derive_D(df1)
        expect = BModElement(2, {(1, 1): F(3, 8), (0, 2): F(-1, 4), (0, 1): F(1, 4)})
        assert d2f1 == expect

    def test_D_bridge_on_series(self, md):
        # evaluate-then-derive equals derive-then-evaluate (in Q)
        e = BModElement(1, {(2, 1): F(5, 3), (0, -1): 2})
        lhs = bm_eval(bm_derive_D(e), md, target="Q")
        rhs = q_to_Q(bm_eval(e, md), md).theta() * 3
        assert lhs.agrees_with(rhs, 20)

    def test_D_matches_nome_derivative(self, md):
        # D = 3 C^{-1} * (nome d/d nome) on the quasimodular side
        order = 28
        e = BModElement(2, {(1, 1): F(3, 8), (0, 2): F(-1, 4), (0, 1): F(1, 4)})
        qm = bm_to_qmod(e)
        lhs = qm_to_qseries(bm_to_qmod(bm_derive_D(e)), order)
        c = generator_series("C", order)
        rhs = 3 * (qm_to_qseries(qm, order).theta() / c)
        assert lhs.agrees_with(rhs, order - 4)

    def test_QdQ_is_D_over_3(self):
        e = BModElement(0, {(1, 0): 1, (0, 2): F(1, 5)})
        a = bm_derive_QdQ(e)
        b = bm_derive_D(e)
        assert b == BModElement(a.i11_degree, {k: 3 * v for k, v in a.terms.items()})


class TestQuasimodDictionary:
    def test_x(self):
        assert bm_to_qmod(BModElement.monomial(1, 0, 1)) == \
            QModElement(1, {(3, 0, 0): 1})

    def test_s(self):
        got = bm_to_qmod(BModElement.monomial(1, 1, 0))
        expect = QModElement(1, {(1, 1, 0): F(1, 6), (3, 0, 0): F(-1, 6)})
        assert got == expect

    def test_f2_relative_form(self):
        e = BModElement(0, {(1, 1): F(1, 384), (0, 2): F(-1, 360),
                            (0, 1): F(1, 240), (0, 0): F(-1, 720)})
        got = bm_to_qmod(e)
        expect = QModElement(2, {(6, 0, 0): F(-37, 11520), (4, 1, 0): F(5, 11520),
                                 (3, 0, 1): F(48, 11520), (0, 0, 2): F(-16, 11520)})
        assert got == expect

    def test_irregular_element_rejected(self):
        with pytest.raises(BModError):
            bm_to_qmod(BModElement.monomial(1, 0, -1))  # 1/X alone

    def test_roundtrip(self):
        e = BModElement(0, {(3, -1): F(5, 8), (2, 0): F(1, 8),
                            (1, 1): F(1, 96), (0, 2): F(1, 4320),
                            (0, 1): F(1, 4320), (0, 0): F(-1, 2160)})
        back = qmod_to_bmod(bm_to_qmod(e))
        assert back == e

    def test_derivation_commutes_with_dictionary(self, md):
        # qm_derive(bm_to_qmod(e)) = bm_to_qmod(theta e) since theta = nome-deriv * C/...
        # via expansions: nome theta of the image equals image of bm_theta
        order = 26
        e = BModElement(0, {(1, 0): 1, (0, 1): F(2, 3)})
        lhs = qm_to_qseries(qm_derive(bm_to_qmod(e)), order)
        rhs = qm_to_qseries(bm_to_qmod(e), order).theta()
        assert lhs.agrees_with(rhs, order - 4)


class TestEval:
    def test_x_eval(self, md):
        got = bm_eval(BModElement.monomial(1, 0, 1), md)
        assert got.coeff_list(0, 2) == [1, -27, 729]

    def test_genus2_correction_eval(self, md):
        # (X/384) S - X^2/360 + X/240 - 1/720 has the pinned flat expansion
        e = BModElement(0, {(1, 1): F(1, 384), (0, 2): F(-1, 360),
                            (0, 1): F(1, 240), (0, 0): F(-1, 720)})
        got = bm_eval(e, md, target="Q")
        assert got.coeff_list(0, 4) == [0, F(29, 640), F(-207, 64),
                                        F(18447, 160), F(-526859, 160)]


class TestRingProperties:
    from hypothesis import given, settings
    from hypothesis import strategies as st

    bmod_elements = st.builds(
        lambda pairs: BModElement(
            0, {(s, x): v for (s, x), v in pairs}),
        st.lists(st.tuples(
            st.tuples(st.integers(0, 4), st.integers(-1, 3)).filter(
                lambda sx: sx[0] + 3 * sx[1] >= 0),
            st.integers(-6, 6)), min_size=1, max_size=5),
    )

    @given(bmod_elements, bmod_elements)
    @settings(max_examples=50, deadline=None)
    def test_theta_leibniz(self, a, b):
        lhs = bm_theta(a * b)
        rhs = bm_theta(a) * b + a * bm_theta(b)
        assert lhs == rhs

    @given(bmod_elements)
    @settings(max_examples=50, deadline=None)
    def test_dictionary_roundtrip(self, e):
        assert qmod_to_bmod(bm_to_qmod(e)) == e


class TestConifoldCoordinate:
    def test_linear_coefficient(self, md):
        assert md.that.coeff_list(0, 1) == [0, 1]
        assert md.that.coeff(2) == F(11, 18)

    def test_solves_equation(self, md):
        res = _mirror_op_u(md.that)
        assert all(res.coeff(k) == 0 for k in range(0, ORDER - 2))

    def test_unique_pivots(self):
        # recursion must run without degenerate pivots at higher order too
        t = _conifold_flat(40)
        assert t.coeff(1) == 1
