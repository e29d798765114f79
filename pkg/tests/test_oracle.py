"""Euclidean reference models: exact spectra, traces, and gas laws."""

import math

import numpy as np
import pytest

from carpetgas.errors import CapExceededError, DIVERGED, DomainError
from carpetgas.oracle import (
    BoxSpec,
    box_model,
    box_spectrum,
    box_trace_exact,
    cube_photon_energy_density,
    euclid_bec_critical,
    euclid_blackbody,
    interval_casimir_energy,
    interval_trace_exact,
    sum_of_three_squares_counts,
    unit_box,
)
from carpetgas.specfun import riemann_zeta


class TestBoxSpec:
    def test_unit_box(self):
        box = unit_box(3, bc="neumann")
        assert box.dimension == 3
        assert box.sides == (1.0, 1.0, 1.0)
        assert box.bc == "neumann"

    def test_validation(self):
        with pytest.raises(DomainError):
            BoxSpec(0, ())
        with pytest.raises(DomainError):
            BoxSpec(2, (1.0,))
        with pytest.raises(DomainError):
            BoxSpec(1, (-1.0,))
        with pytest.raises(DomainError):
            BoxSpec(1, (1.0,), bc="periodic")


class TestBoxSpectrum:
    def test_interval_dirichlet_exact(self):
        spec = box_spectrum(unit_box(1), cutoff=26.0 * math.pi**2)
        expect = np.array([math.pi**2 * (j * j) for j in range(1, 6)])
        assert np.array_equal(spec.eigenvalues, expect)

    def test_interval_neumann_includes_zero(self):
        spec = box_spectrum(unit_box(1, bc="neumann"), cutoff=10.0)
        assert np.array_equal(spec.eigenvalues, [0.0, math.pi**2])

    def test_square_matches_brute_force(self):
        cutoff = 200.0
        spec = box_spectrum(unit_box(2), cutoff)
        brute = sorted(
            math.pi**2 * (a * a + b * b)
            for a in range(1, 15)
            for b in range(1, 15)
            if math.pi**2 * (a * a + b * b) <= cutoff
        )
        assert spec.n == len(brute)
        assert np.allclose(spec.eigenvalues, brute, rtol=0, atol=1e-12)

    def test_anisotropic_sides(self):
        box = BoxSpec(2, (1.0, 0.5))
        spec = box_spectrum(box, cutoff=60.0)
        brute = sorted(
            math.pi**2 * (a * a + 4.0 * b * b)
            for a in range(1, 4)
            for b in range(1, 3)
            if math.pi**2 * (a * a + 4.0 * b * b) <= 60.0
        )
        assert np.allclose(spec.eigenvalues, brute, rtol=1e-15)

    def test_empty_below_first_mode(self):
        spec = box_spectrum(unit_box(1), cutoff=5.0)
        assert spec.n == 0

    def test_cutoff_validation(self):
        with pytest.raises(DomainError):
            box_spectrum(unit_box(1), 0.0)

    def test_enumeration_cap(self):
        with pytest.raises(CapExceededError):
            box_spectrum(unit_box(3), cutoff=(400.0 * math.pi) ** 2)


class TestIntervalTrace:
    def test_crossover_continuity(self):
        below = interval_trace_exact(1.0 - 1e-12)
        above = interval_trace_exact(1.0 + 1e-12)
        assert abs(below - above) < 1e-13

    def test_poisson_form_matches_direct_sum(self):
        for tau in (0.05, 0.2, 0.7):
            direct = sum(
                math.exp(-j * j * math.pi * math.pi * tau) for j in range(1, 2000)
            )
            assert interval_trace_exact(tau) == pytest.approx(direct, rel=1e-13)

    def test_neumann_adds_constant_mode(self):
        for tau in (0.1, 2.0):
            d = interval_trace_exact(tau, bc="dirichlet")
            n = interval_trace_exact(tau, bc="neumann")
            assert n == pytest.approx(d + 1.0, rel=1e-15)

    def test_short_time_asymptote(self):
        tau = 1e-4
        lead = 1.0 / math.sqrt(4.0 * math.pi * tau) - 0.5
        assert interval_trace_exact(tau) == pytest.approx(lead, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            interval_trace_exact(0.0)


class TestBoxTrace:
    def test_cube_trace_matches_spectrum_sum(self):
        box = unit_box(3)
        spec = box_spectrum(box, cutoff=3000.0)
        t = 0.05
        direct = float(np.sum(np.exp(-spec.eigenvalues * t)))
        assert box_trace_exact(box, t) == pytest.approx(direct, rel=1e-10)

    def test_anisotropic_trace_matches_spectrum_sum(self):
        box = BoxSpec(2, (2.0, 1.0))
        spec = box_spectrum(box, cutoff=2000.0)
        t = 0.05
        direct = float(np.sum(np.exp(-spec.eigenvalues * t)))
        assert box_trace_exact(box, t) == pytest.approx(direct, rel=1e-12)


class TestBoxModel:
    def test_interval_model_short_time(self):
        model = box_model(1, bc="dirichlet")
        t = 0.02
        assert model.evaluate(t).real == pytest.approx(
            interval_trace_exact(t), rel=1e-12
        )

    def test_cube_neumann_model_short_time(self):
        model = box_model(3, bc="neumann")
        t = 0.03
        assert model.evaluate(t).real == pytest.approx(
            box_trace_exact(unit_box(3, bc="neumann"), t), rel=1e-12
        )

    def test_coefficient_tower(self):
        model = box_model(2, bc="dirichlet")
        # volume, perimeter, corner coefficients of the unit square
        assert model.coefficient(0, 0) == pytest.approx(1.0 / (4.0 * math.pi))
        assert model.coefficient(1, 0) == pytest.approx(
            -1.0 / math.sqrt(4.0 * math.pi)
        )
        assert model.coefficient(2, 0) == pytest.approx(0.25)

    def test_dimension_validation(self):
        with pytest.raises(DomainError):
            box_model(0)


class TestGasLaws:
    def test_bec_critical_diverges_low_dimension(self):
        assert euclid_bec_critical(2, 1.0) is DIVERGED
        assert euclid_bec_critical(1, 0.5) is DIVERGED
        assert not euclid_bec_critical(2, 1.0)

    def test_bec_critical_finite_3d(self):
        beta = 0.7
        got = euclid_bec_critical(3, beta)
        expect = riemann_zeta(complex(1.5)).real / (4.0 * math.pi * beta) ** 1.5
        assert got == pytest.approx(expect, rel=1e-14)
        assert got > 0

    def test_blackbody_3d_constant(self):
        beta = 0.3
        assert euclid_blackbody(3, beta) == pytest.approx(
            math.pi**2 / (30.0 * beta**4), rel=1e-12
        )

    def test_blackbody_1d_constant(self):
        beta = 2.0
        assert euclid_blackbody(1, beta) == pytest.approx(
            math.pi / (6.0 * beta**2), rel=1e-12
        )

    def test_domain(self):
        with pytest.raises(DomainError):
            euclid_bec_critical(3, 0.0)
        with pytest.raises(DomainError):
            euclid_blackbody(0, 1.0)
        with pytest.raises(DomainError):
            euclid_blackbody(3, -1.0)


class TestThreeSquares:
    def test_matches_brute_force(self):
        jmax = 400
        counts = sum_of_three_squares_counts(jmax)
        brute = np.zeros(jmax + 1, dtype=np.int64)
        top = int(math.isqrt(jmax))
        for a in range(1, top + 1):
            for b in range(1, top + 1):
                for c in range(1, top + 1):
                    s = a * a + b * b + c * c
                    if s <= jmax:
                        brute[s] += 1
        assert np.array_equal(counts, brute)

    def test_small_values(self):
        counts = sum_of_three_squares_counts(12)
        assert counts[3] == 1  # (1,1,1)
        assert counts[6] == 3  # permutations of (1,1,2)
        assert np.all(counts[:3] == 0)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            sum_of_three_squares_counts(60_000_000)


class TestPhotonCube:
    def test_approaches_infinite_volume_law(self):
        # finite-size deficit shrinks as the cube grows against beta
        target = math.pi**2 / 30.0
        coarse = cube_photon_energy_density(1.0, 0.05) * 0.05**4
        fine = cube_photon_energy_density(1.0, 0.02) * 0.02**4
        assert abs(fine - target) < abs(coarse - target)
        assert abs(fine - target) / target < 0.05

    def test_domain(self):
        with pytest.raises(DomainError):
            cube_photon_energy_density(0.0, 1.0)
        with pytest.raises(DomainError):
            cube_photon_energy_density(1.0, 0.0)


class TestCasimir:
    def test_interval_constant(self):
        assert interval_casimir_energy() == -math.pi / 24.0
