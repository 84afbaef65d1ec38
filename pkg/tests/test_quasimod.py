import random
from fractions import Fraction

import pytest

from localp2.quasimod import (
    CQ,
    QModElement,
    QModError,
    bernoulli,
    eisenstein_series,
    eta_quotient_series,
    generator_series,
    qm_derive,
    qm_to_qseries,
    qmod_from_json,
    qmod_to_json,
    recognize,
    sl2_embed,
    weight_monomials,
)
from localp2.series import RatSeries

from oracles import bernoulli_list, eisenstein_oracle, sigma

F = Fraction

A = QModElement.gen("A")
B = QModElement.gen("B")
C = QModElement.gen("C")


class TestBernoulliEisenstein:
    def test_bernoulli_against_recurrence_oracle(self):
        expect = bernoulli_list(14)
        got = [bernoulli(n) for n in range(15)]
        assert got == expect
        assert bernoulli(4) == F(-1, 30)
        assert bernoulli(6) == F(1, 42)

    def test_e2_against_divisor_oracle(self):
        got = eisenstein_series(2, 1, 8)
        expect = eisenstein_oracle(2, 8)
        assert got.coeff_list(0, 8) == expect
        assert got.coeff_list(0, 4) == [1, -24, -72, -96, -168]

    def test_e4_against_divisor_oracle(self):
        got = eisenstein_series(4, 1, 8)
        assert got.coeff_list(0, 8) == eisenstein_oracle(4, 8)
        assert got.coeff_list(0, 2) == [1, 240, 2160]

    def test_level_multiplier(self):
        got = eisenstein_series(2, 3, 9)
        assert got.coeff_list(0, 9) == [1, 0, 0, -24, 0, 0, -72, 0, 0, -96]

    def test_order_zero(self):
        for k in (2, 4, 6, 8):
            assert eisenstein_series(k, 1, 0).coeff_list(0, 0) == [1]

    def test_odd_weight_rejected(self):
        with pytest.raises(Exception):
            eisenstein_series(3, 1, 5)


class TestEtaQuotients:
    def test_weight_three_modular_form(self):
        got = eta_quotient_series(((1, 9), (3, -3)), 7)
        assert got.coeff_list(0, 7) == [1, -9, 27, -9, -117, 216, 27, -450]

    def test_weight_three_cusp_form(self):
        got = eta_quotient_series(((3, 9), (1, -3)), 7)
        assert got.coeff_list(0, 7) == [0, 1, 3, 9, 13, 24, 27, 50]

    def test_empty_spec(self):
        assert eta_quotient_series((), 4).coeff_list(0, 4) == [1, 0, 0, 0, 0]

    def test_fractional_prefactor_rejected(self):
        with pytest.raises(Exception):
            eta_quotient_series(((1, 1),), 4)


class TestGenerators:
    def test_a_expansion(self):
        a = generator_series("A", 9)
        assert a.coeff_list(0, 9) == [1, 6, 0, 6, 6, 0, 0, 12, 0, 6]

    def test_b_expansion_from_definition(self):
        # oracle: (E2(tau) + 3 E2(3tau))/4 assembled from divisor sums
        b = generator_series("B", 4)
        e2 = eisenstein_oracle(2, 4)
        e2_3 = [F(0)] * 5
        e2_3[0] = F(1)
        e2_3[3] = -24 * F(sigma(1, 1))
        expect = [(e2[n] + 3 * e2_3[n]) / 4 for n in range(5)]
        assert b.coeff_list(0, 4) == expect == [1, -6, -18, -42, -42]

    def test_c_expansion(self):
        c = generator_series("C", 7)
        assert c.coeff_list(0, 7) == [1, -9, 27, -9, -117, 216, 27, -450]

    def test_cusp_combination(self):
        order = 7
        a3 = generator_series("A", order) ** 3
        c = generator_series("C", order)
        cusp = (a3 - c) / 27
        assert cusp.coeff_list(0, 7) == [0, 1, 3, 9, 13, 24, 27, 50]


class TestDerivation:
    def test_derive_a(self):
        got = qm_derive(A)
        expect = (A * B + A ** 3 - 2 * C) / 6
        assert got == expect

    def test_derive_constant(self):
        assert qm_derive(QModElement.const(1)).is_zero()

    def test_ramanujan_closure_series(self):
        order = 50
        for g in (A, B, C):
            lhs = qm_to_qseries(qm_derive(g), order)
            rhs = qm_to_qseries(g, order).theta()
            assert lhs.agrees_with(rhs, order)

    def test_derive_weight_and_pole(self):
        e = QModElement(1, {(3, 0, 0): 1})  # A^3/C, weight 0
        d = qm_derive(e)
        assert d.weight == 2
        assert d.c_pole <= 2
        # nome-series cross-check against theta of the expansion
        order = 30
        lhs = qm_to_qseries(d, order)
        rhs = qm_to_qseries(e, order).theta()
        assert lhs.agrees_with(rhs, order - 3)

    def test_leibniz(self):
        e1 = QModElement(0, {(1, 1, 0): 2})
        e2 = QModElement(1, {(0, 0, 2): 3, (3, 0, 1): F(1, 2)})
        lhs = qm_derive(e1 * e2)
        rhs = qm_derive(e1) * e2 + e1 * qm_derive(e2)
        assert lhs == rhs


class TestRecognize:
    def test_recognize_e2_level3(self):
        order = 20
        s = eisenstein_series(2, 3, order) * 3
        got = recognize(s, 2, 0, margin=6)
        assert got == 2 * B + A ** 2

    def test_recognize_one(self):
        got = recognize(RatSeries.one(CQ, 15), 0, 0, margin=5)
        assert got == QModElement.const(1)

    def test_recognize_with_pole(self):
        order = 40
        e = QModElement(2, {(6, 0, 0): F(-37, 11520), (4, 1, 0): F(5, 11520),
                            (3, 0, 1): F(48, 11520), (0, 0, 2): F(-16, 11520)})
        s = qm_to_qseries(e, order)
        got = recognize(s, 0, 2)
        assert got == e

    def test_random_roundtrip_and_rejection(self):
        rng = random.Random(7)
        for weight in (4, 7, 10):
            monos = weight_monomials(weight)
            e = QModElement(0, {m: rng.randint(-5, 5) for m in monos})
            order = len(monos) + 12
            s = qm_to_qseries(e, order)
            assert recognize(s, weight, 0) == e
            # perturb one coefficient inside the verification margin: rejected
            bad = s + RatSeries.from_pairs(CQ, {len(monos) + 5: 1}, order)
            with pytest.raises(QModError):
                recognize(bad, weight, 0)

    def test_insufficient_coefficients(self):
        with pytest.raises(QModError):
            recognize(RatSeries.one(CQ, 3), 6, 0)


class TestSl2Embed:
    @pytest.mark.parametrize("k,expect", [
        (2, (2 * B + A ** 2) / 3),
        (4, (A ** 4 + 8 * A * C) / 9),
        (6, (-(A ** 6) + 20 * A ** 3 * C + 8 * C ** 2) / 27),
    ])
    def test_embedding_elements(self, k, expect):
        assert sl2_embed(k) == expect

    @pytest.mark.parametrize("k", [2, 4, 6])
    def test_embedding_expansions(self, k):
        order = 50
        lhs = qm_to_qseries(sl2_embed(k), order)
        rhs = eisenstein_series(k, 3, order)
        assert lhs.agrees_with(rhs, order)

    def test_bad_weight(self):
        with pytest.raises(QModError):
            sl2_embed(8)


class TestGradingLaws:
    def test_product_grades(self):
        e1 = QModElement(1, {(0, 0, 2): 1})   # weight 3, pole 1
        e2 = QModElement(2, {(1, 1, 0): 1})   # weight -3, pole 2
        p = e1 * e2
        assert p.weight == 0
        assert p.c_pole <= 3

    def test_derive_raises_weight_two(self):
        for e in (A * B, C, QModElement(1, {(4, 1, 0): 1})):
            assert qm_derive(e).weight == e.weight + 2

    def test_dimension_counts(self):
        # dim Q[A,B,C]_w: coefficients of 1/((1-t)(1-t^2)(1-t^3)), w <= 30
        from oracles import pl_long_division, pl_mul
        from fractions import Fraction as Fr
        order = 30
        den = [Fr(1)]
        for k in (1, 2, 3):
            factor = [Fr(0)] * (order + 1)
            factor[0], factor[k] = Fr(1), Fr(-1)
            den = pl_mul(den, factor, order)
        expect = pl_long_division([Fr(1)], den, order)
        got = [len(weight_monomials(w)) for w in range(order + 1)]
        assert got == expect
        assert got[:11] == [1, 1, 2, 3, 4, 5, 7, 8, 10, 12, 14]


class TestJson:
    def test_roundtrip(self):
        e = QModElement(2, {(6, 0, 0): F(-37, 11520), (0, 0, 2): F(-16, 11520)})
        d = qmod_to_json(e)
        assert d["c_pole"] == 2 and d["weight"] == 0
        assert qmod_from_json(d) == e
