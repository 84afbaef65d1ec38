"""Free energy in the Nekrasov-Shatashvili limit from refined sheaf
invariants.

For each degree d, the input is a palindromic Laurent polynomial in the
half-integer variable y^(1/2) whose value at y = 1 is the genus-0 BPS
number.  The degree-D column of the free energy is

    sum over k*d = D of  (1/k^2) * Omega_d(e^{i k hbar / 2}) / (2 sin(k hbar / 2)),

an odd Laurent series in hbar with a first-order pole, expanded exactly
over the rationals (the palindromic symmetry turns every evaluation into a
cosine sum).  The multicover weight 1/k^2 is forced by the genus-0
specialization: the hbar^(-1) row must reproduce the 1/k^3 Aspinwall-
Morrison structure of the flat genus-0 expansion.  Genus rows follow from

    F = sum_g (-1)^g F_g hbar^(2g-1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from pathlib import Path

from .series import RatSeries

F = Fraction

HBAR = "hbar"


class OmegaError(ValueError):
    pass


@dataclass(frozen=True)
class OmegaTable:
    """Map degree -> {exponent in half-units -> integer coefficient}."""
    entries: dict

    def degrees(self):
        return sorted(self.entries)

    def polynomial(self, d: int) -> dict:
        if d not in self.entries:
            raise OmegaError(f"no sheaf invariants for degree {d}")
        return self.entries[d]

    def at_one(self, d: int) -> int:
        return sum(self.polynomial(d).values())


def _validate_entry(d: int, coeffs: dict) -> dict:
    out = {int(e): int(c) for e, c in coeffs.items() if int(c)}
    for e, c in out.items():
        if out.get(-e) != c:
            raise OmegaError(f"degree {d} invariants are not palindromic at "
                             f"half-exponent {e}")
    return out


def omega_from_entries(raw: dict) -> OmegaTable:
    return OmegaTable({int(d): _validate_entry(int(d), cs)
                       for d, cs in raw.items()})


def load_omega(path) -> OmegaTable:
    """Read the JSON table; per-chi sub-entries are averaged over the d
    residues if present."""
    data = json.loads(Path(path).read_text())
    entries: dict = {}
    for item in data["entries"]:
        d = int(item["degree"])
        if "chi_classes" in item:
            acc: dict = {}
            classes = item["chi_classes"]
            if len(classes) != d:
                raise OmegaError(f"degree {d} needs {d} chi classes")
            for cls in classes:
                for c in cls["coeffs"]:
                    e = int(c["exp2"])
                    acc[e] = acc.get(e, 0) + int(c["c"])
            pairs = {}
            for e, v in acc.items():
                q, r = divmod(v, d)
                if r:
                    raise OmegaError(f"degree {d} average is not integral")
                pairs[e] = q
        else:
            pairs = {int(c["exp2"]): int(c["c"]) for c in item["coeffs"]}
        entries[d] = _validate_entry(d, pairs)
    return OmegaTable(entries)


def default_omega_path() -> Path:
    return Path(__file__).parent / "data" / "omega_p2.json"


# -- exact trigonometric series -------------------------------------------------------

def _cos_series(a: Fraction, order: int) -> RatSeries:
    coeffs = [F(0)] * (order + 1)
    for m in range(0, order // 2 + 1):
        coeffs[2 * m] = (-1) ** m * a ** (2 * m) / factorial(2 * m)
    return RatSeries(HBAR, 0, coeffs)


def _inv_2sin_half(k: int, order: int) -> RatSeries:
    """1/(2 sin(k hbar / 2)) as an exact Laurent series."""
    coeffs = [F(0)] * (order + 2)
    for m in range(0, (order + 1) // 2 + 1):
        e = 2 * m + 1
        if e <= order + 1:
            coeffs[e] = 2 * (-1) ** m * F(k, 2) ** e / factorial(e)
    s = RatSeries(HBAR, 0, coeffs).trim()
    return RatSeries.one(HBAR, order + 1) / s


def omega_cosine_sum(poly: dict, k: int, order: int) -> RatSeries:
    """Omega_d evaluated at e^{i k hbar / 2}: the palindromic pairs become
    2 cos(e k hbar / 2)."""
    out = RatSeries.zero(HBAR, order)
    if 0 in poly:
        out = out + RatSeries.const(HBAR, poly[0], order)
    for e in sorted(x for x in poly if x > 0):
        out = out + 2 * poly[e] * _cos_series(F(e * k, 2), order)
    return out


def ns_free_energy(table: OmegaTable, dmax: int, hbar_order: int) -> dict:
    """Degree columns of the free energy, exact odd Laurent series."""
    out: dict[int, RatSeries] = {}
    for D in range(1, dmax + 1):
        col = RatSeries(HBAR, -1, [F(0)] * (hbar_order + 2))
        for k in range(1, D + 1):
            if D % k:
                continue
            d = D // k
            if d not in table.entries:
                raise OmegaError(f"degree {d} missing from the sheaf table")
            term = omega_cosine_sum(table.polynomial(d), k, hbar_order + 1) \
                * _inv_2sin_half(k, hbar_order) * F(1, k * k)
            col = col + term
        out[D] = col
    return out


def ns_genus(table: OmegaTable, g: int, dmax: int,
             hbar_order: int | None = None) -> RatSeries:
    """(-1)^g-normalized coefficient of hbar^(2g-1) as a flat-degree series."""
    if hbar_order is None:
        hbar_order = 2 * g + 1
    if hbar_order < 2 * g - 1:
        raise OmegaError("hbar order too small for the requested genus")
    cols = ns_free_energy(table, dmax, hbar_order)
    coeffs = [F(0)] * (dmax + 1)
    for D, col in cols.items():
        coeffs[D] = (-1) ** g * col.coeff(2 * g - 1)
    return RatSeries("Q", 0, coeffs)


def compare_ns_relative(table: OmegaTable, gmax: int, dmax: int,
                        relative_flat: dict,
                        hbar_order: int | None = None) -> dict:
    """Per-(g, d) equality verdicts against the log-free flat expansions of
    the relative tower (a dict g -> RatSeries in Q)."""
    verdicts = {}
    ok = True
    for g in range(0, gmax + 1):
        ns_row = ns_genus(table, g, dmax,
                          hbar_order=max(hbar_order or 0, 2 * g + 1))
        flat = relative_flat[g]
        for d in range(1, dmax + 1):
            lhs = ns_row.coeff(d)
            rhs = flat.coeff(d)
            verdicts[(g, d)] = {"ns": lhs, "gw": rhs, "equal": lhs == rhs}
            ok = ok and lhs == rhs
    return {"ok": ok, "cells": verdicts}
