from fractions import Fraction

import pytest

from localp2.elliptic import (
    EPoly,
    EllipticError,
    StationaryLabel,
    connected_coefficient,
    connected_extract,
    default_qorder,
    e_weight_monomials,
    elliptic_hae_check,
    f1_empty,
    npoint_connected,
    npoint_disconnected,
    recognize_E,
    theta_z,
)
from localp2.series import RatSeries

from oracles import bloch_okounkov_npoint_oracle

F = Fraction

E2 = EPoly.gen(2)
E4 = EPoly.gen(4)
E6 = EPoly.gen(6)

QORDER = 14


class TestTheta:
    def test_normalization(self):
        th = theta_z(5, 6)
        assert th[0].is_zero()
        assert th[1].coeff_list(0, 6) == [1, 0, 0, 0, 0, 0, 0]
        assert th[2].is_zero()

    def test_z3_coefficient_is_e2_over_24(self):
        th = theta_z(5, 8)
        expect = EPoly({(1, 0, 0): F(1, 24)}).to_qseries(8)
        assert th[3].agrees_with(expect, 8)

    def test_odd_function(self):
        th = theta_z(9, 4)
        assert all(th[k].is_zero() for k in range(0, 10, 2))


class TestDisconnected:
    def test_one_point_is_inverse_theta(self):
        zp = npoint_disconnected(1, 5, QORDER)
        assert zp.coefficient((-1,)).constant_term() == 1
        got_z1 = zp.coefficient((1,))
        expect = (EPoly({(1, 0, 0): F(-1, 24)})).to_qseries(QORDER)
        assert got_z1.agrees_with(expect, QORDER)
        got_z3 = zp.coefficient((3,))
        expect3 = EPoly({(0, 1, 0): F(1, 2880), (2, 0, 0): F(1, 1152)}).to_qseries(QORDER)
        assert got_z3.agrees_with(expect3, QORDER)

    def test_one_point_z5(self):
        zp = npoint_disconnected(1, 5, QORDER)
        expect5 = EPoly({(0, 0, 1): F(-1, 181440), (1, 1, 0): F(-1, 69120),
                         (3, 0, 0): F(-1, 82944)}).to_qseries(QORDER)
        assert zp.coefficient((5,)).agrees_with(expect5, QORDER)

    def test_one_point_parity(self):
        zp = npoint_disconnected(1, 6, 6)
        for e, _ in zp.terms.items():
            assert e[0] % 2 == 1

    @pytest.mark.parametrize("exps", [(1,), (3,), (5,)])
    def test_against_partition_sum_oracle(self, exps):
        qorder = 8
        zp = npoint_disconnected(len(exps), sum(exps), qorder)
        got = zp.coefficient(exps)
        expect = bloch_okounkov_npoint_oracle(exps, qorder)
        assert got.coeff_list(0, qorder) == expect

    @pytest.mark.parametrize("exps", [(1, 1), (2, 2), (3, 1), (2, 1)])
    def test_two_point_against_partition_sum_oracle(self, exps):
        qorder = 7
        zp = npoint_disconnected(2, sum(exps), qorder)
        got = zp.coefficient(exps)
        expect = bloch_okounkov_npoint_oracle(exps, qorder)
        if got is None:
            assert all(v == 0 for v in expect)
        else:
            assert got.coeff_list(0, qorder) == expect

    def test_determinant_trivial_case(self):
        # the 1x1 determinant entry is Theta'(0) = 1
        zp = npoint_disconnected(1, 1, 5)
        inv_theta_lead = zp.coefficient((-1,))
        assert inv_theta_lead.coeff_list(0, 5) == [1, 0, 0, 0, 0, 0]


class TestConnected:
    def test_two_point_z1z1(self):
        zp = npoint_connected(2, 4, QORDER)
        got = zp.coefficient((1, 1))
        expect = (E2 * E2 - E4).to_qseries(QORDER) * F(-1, 288)
        assert got.agrees_with(expect, QORDER)

    def test_two_point_z2z2(self):
        zp = npoint_connected(2, 4, QORDER)
        got = zp.coefficient((2, 2))
        expect = (5 * E2 ** 3 - 3 * E2 * E4 - 2 * E6).to_qseries(QORDER) / 25920
        assert got.agrees_with(expect, QORDER)

    def test_two_point_z1z3(self):
        zp = npoint_connected(2, 4, QORDER)
        got = zp.coefficient((1, 3))
        expect = (5 * E2 ** 3 - E2 * E4 - 4 * E6).to_qseries(QORDER) / 34560
        assert got.agrees_with(expect, QORDER)
        assert zp.coefficient((3, 1)).agrees_with(expect, QORDER)

    def test_pole_cancellation(self):
        zp = npoint_connected(2, 4, 6)
        assert all(min(e) >= 0 for e in zp.terms)
        zp3 = npoint_connected(3, 5, 6)
        assert all(min(e) >= 0 for e in zp3.terms)


class TestExtract:
    def test_f_1_0(self):
        got = connected_extract(StationaryLabel(1, (0,)))
        assert got.value == E2 * F(-1, 24)

    def test_f_1_00(self):
        got = connected_extract(StationaryLabel(1, (0, 0)))
        assert got.value == (E2 * E2 - E4) * F(-1, 288)

    def test_f_2_2(self):
        got = connected_extract(StationaryLabel(2, (2,)))
        assert got.value == (2 * E4 + 5 * E2 ** 2) / 5760

    def test_f_2_11(self):
        got = connected_extract(StationaryLabel(2, (1, 1)))
        assert got.value == (2 * E6 + 3 * E2 * E4 - 5 * E2 ** 3) * F(-1, 25920)

    def test_symmetry_under_part_order(self):
        a = connected_coefficient((2, 1, 1), 8)
        b = connected_coefficient((1, 2, 1), 8)
        c = connected_coefficient((1, 1, 2), 8)
        assert a.coeff_list(0, 8) == b.coeff_list(0, 8) == c.coeff_list(0, 8)

    def test_dimension_constraint_enforced(self):
        with pytest.raises(EllipticError):
            connected_extract(StationaryLabel(1, (1,)))

    def test_weight_law_small(self):
        for h, parts in [(1, (0,)), (2, (2,)), (2, (1, 1)), (3, (4,)),
                         (2, (2, 0)), (2, (1, 1, 0))]:
            lbl = StationaryLabel(h, parts)
            got = connected_extract(lbl)
            if not got.value.is_zero():
                assert got.value.weight == lbl.weight

    def test_margin_coefficients_verified(self):
        # recognition re-checks margin coefficients; a corrupted series fails
        lbl = StationaryLabel(1, (0,))
        qorder = default_qorder(lbl.weight)
        series = connected_coefficient((1,), qorder)
        bad = series + RatSeries.from_pairs("cQt", {qorder - 1: 1}, qorder)
        with pytest.raises(EllipticError):
            recognize_E(bad, 2, margin=qorder - len(e_weight_monomials(2)))


class TestF1Empty:
    def test_leading_terms(self):
        s = f1_empty(6)
        assert s.log_coeff == F(-1, 24)
        assert s.coeff_list(0, 4) == [0, 1, F(3, 2), F(4, 3), F(7, 4)]

    def test_nome_coefficient_one(self):
        # from -log(1 - nome)
        assert f1_empty(3).coeff(1) == 1


class TestEllipticHae:
    def test_genus2_pair_label(self):
        rep = elliptic_hae_check(StationaryLabel(2, (1, 1)))
        assert rep["ok"]
        # -12 dE2 F = F_{1,(0,0)} + F_{1,(0)}^2 - 6 F_{2,(2)}
        lhs12 = connected_extract(StationaryLabel(2, (1, 1))).value.d_e2() * (-12)
        rhs = (connected_extract(StationaryLabel(1, (0, 0))).value
               + connected_extract(StationaryLabel(1, (0,))).value ** 2
               - 6 * connected_extract(StationaryLabel(2, (2,))).value)
        assert lhs12 == rhs

    def test_genus2_single_label(self):
        rep = elliptic_hae_check(StationaryLabel(2, (2,)))
        assert rep["ok"]
        lhs = connected_extract(StationaryLabel(2, (2,))).value.d_e2() * (-24)
        assert lhs == connected_extract(StationaryLabel(1, (0,))).value

    def test_degenerate_genus_one(self):
        rep = elliptic_hae_check(StationaryLabel(1, (0,)))
        assert rep["ok"]
        assert rep["lhs"] == EPoly.const(1)

    def test_three_point_label(self):
        rep = elliptic_hae_check(StationaryLabel(2, (1, 1, 0)))
        assert rep["ok"]

    def test_genus3_single_label(self):
        # here the loop term is the only survivor on the right side
        rep = elliptic_hae_check(StationaryLabel(3, (4,)))
        assert rep["ok"]
        assert rep["split"].is_zero()
        assert rep["glue"].is_zero()
        assert rep["loop"] == connected_extract(StationaryLabel(2, (2,))).value


class TestDisconnectedParity:
    def test_two_point_total_parity(self):
        zp = npoint_disconnected(2, 4, 6)
        assert all(sum(e) % 2 == 0 for e in zp.terms)
