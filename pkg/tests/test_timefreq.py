"""Tests for the sampled time-frequency layer.

The session fixtures in conftest build the default grid (period 16, 512
samples), the tight window, and a 78-member Wilson family once.
"""

import io
import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from traceblocks import bases, operators, timefreq
from traceblocks.errors import (DomainError, NumericalError, ParameterError,
                                UsageError)


def random_function(grid, seed, complex_valued=True):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(grid.samples)
    if complex_valued:
        values = values + 1j * rng.standard_normal(grid.samples)
    return timefreq.SampledFunction(grid, values)


class TestGrid:
    def test_rejects_bad_samples(self):
        with pytest.raises(ParameterError):
            timefreq.SampleGrid(16.0, 510)
        with pytest.raises(ParameterError):
            timefreq.SampleGrid(16.0, 0)

    def test_rejects_short_period(self):
        with pytest.raises(ParameterError):
            timefreq.SampleGrid(4.0, 512)

    def test_step(self, grid512):
        assert grid512.step == pytest.approx(1.0 / 32.0)

    def test_function_shape_checked(self, grid512):
        with pytest.raises(DomainError):
            timefreq.SampledFunction(grid512, np.zeros(100))
        with pytest.raises(DomainError, match="non-finite"):
            timefreq.SampledFunction(grid512, np.full(512, np.nan))


class TestGaussian:
    def test_unit_norm(self, gaussian512):
        assert gaussian512.norm() == pytest.approx(1.0, abs=1e-12)

    def test_even_symmetry(self, gaussian512):
        v = gaussian512.values
        assert np.abs(v - np.roll(v[::-1], 1)).max() <= 1e-14

    def test_periodization_negligible(self, grid512):
        x = grid512.points
        main = np.exp(-np.pi * x ** 2) + np.exp(-np.pi * (x - grid512.period) ** 2)
        images = np.zeros(grid512.samples)
        for r in (-2, -1, 2):
            images += np.exp(-np.pi * (x - r * grid512.period) ** 2)
        # everything beyond the two nearest images is far below the peak
        assert images.max() / main.max() < 1e-15


class TestStft:
    def test_requires_same_grid(self, gaussian512):
        other = timefreq.sample_gaussian(timefreq.SampleGrid(16.0, 256))
        with pytest.raises(UsageError, match="different grids"):
            timefreq.stft(gaussian512, other)

    def test_autocorrelation_peak_at_origin(self, gaussian512):
        V = timefreq.stft(gaussian512, gaussian512).coefficients
        assert np.unravel_index(np.argmax(np.abs(V)), V.shape) == (0, 0)

    def test_energy_identity(self, grid512, gaussian512):
        for seed in range(20):
            f = random_function(grid512, seed)
            energy = timefreq.stft_energy(timefreq.stft(f, gaussian512))
            expected = (f.norm() * gaussian512.norm()) ** 2
            assert abs(energy - expected) / expected <= 1e-8

    def test_orthogonal_lattice_samples_vanish(self, grid512, gaussian512):
        # remove the component of f along one lattice atom; the matching
        # STFT sample must vanish
        na, mb = 3, 5
        shift = na * 16  # a = 1/2 is 16 samples
        atom_values = np.roll(gaussian512.values, shift) * np.exp(
            2j * np.pi * mb * grid512.points)
        atom = timefreq.SampledFunction(grid512, atom_values)
        f = random_function(grid512, 42)
        coeff = f.inner(atom) / atom.inner(atom)
        f_perp = timefreq.SampledFunction(grid512, f.values - coeff * atom.values)
        V = timefreq.stft(f_perp, gaussian512).coefficients
        assert abs(V[shift, mb * 16]) <= 1e-10  # b = 1 is 16 bins


class TestModulationNorms:
    def test_rejects_bad_p(self, gaussian512):
        with pytest.raises(ParameterError):
            timefreq.mp_norm_stft(gaussian512, gaussian512, 3)

    def test_p2_isometry(self, grid512, gaussian512):
        for seed in range(5):
            f = random_function(grid512, seed)
            value = timefreq.mp_norm_stft(f, gaussian512, 2)
            assert value == pytest.approx(f.norm() * gaussian512.norm(), rel=1e-6)

    def test_p1_gaussian_stable_under_refinement(self, grid512, gaussian512):
        coarse = timefreq.mp_norm_stft(gaussian512, gaussian512, 1)
        fine_grid = timefreq.SampleGrid(16.0, 1024)
        fine = timefreq.sample_gaussian(fine_grid)
        refined = timefreq.mp_norm_stft(fine, fine, 1)
        assert abs(refined - coarse) / coarse <= 0.01

    def test_p1_spike_doubles_under_refinement(self, grid512, gaussian512):
        def riemann_delta(grid):
            values = np.zeros(grid.samples)
            values[0] = 1.0 / grid.step
            return timefreq.SampledFunction(grid, values)

        coarse = timefreq.mp_norm_stft(riemann_delta(grid512), gaussian512, 1)
        fine_grid = timefreq.SampleGrid(16.0, 1024)
        fine = timefreq.mp_norm_stft(riemann_delta(fine_grid),
                                     timefreq.sample_gaussian(fine_grid), 1)
        assert fine >= 2.0 * coarse * (1.0 - 1e-9)


class TestTightWindow:
    def test_lattice_validation(self, gaussian512):
        with pytest.raises(ParameterError, match="redundancy"):
            timefreq.tight_window(gaussian512, 0.5, 0.5)
        with pytest.raises(UsageError):
            timefreq.tight_window(gaussian512, 0.3, 0.5 / 0.3)

    def test_output_frame_operator_is_identity(self, tight512):
        assert timefreq.frame_operator_deviation(tight512, 0.5, 1.0) <= 1e-8

    def test_idempotent_on_tight_input(self, tight512):
        again = timefreq.tight_window(tight512, 0.5, 1.0)
        assert np.abs(again.values - tight512.values).max() <= 1e-10

    def test_apply_route_matches_matrix_route(self, grid512, gaussian512, tight512):
        # independent application: sum of <f, atom> atom over the lattice
        atoms = timefreq.gabor_atoms(tight512, 0.5, 1.0)
        f = random_function(grid512, 3)
        coeffs = grid512.step * (atoms.conj().T @ f.values)
        applied = atoms @ coeffs
        assert np.abs(applied - f.values).max() <= 1e-8

    def test_real_even_window(self, tight512):
        assert np.isrealobj(tight512.values)
        v = tight512.values
        assert np.abs(v - np.roll(v[::-1], 1)).max() <= 1e-12

    def test_singular_frame_operator_raises(self, grid512):
        spike = np.zeros(512)
        spike[0] = 1.0 / math.sqrt(grid512.step)
        with pytest.raises(NumericalError, match="singular"):
            timefreq.tight_window(timefreq.SampledFunction(grid512, spike), 0.5, 1.0)


class TestWilsonFamily:
    def test_single_member(self, tight512):
        family = timefreq.wilson_family(tight512, 1)
        assert len(family.members) == 1
        assert family.members[0].norm() == pytest.approx(1.0, abs=1e-10)
        assert family.labels[0] == timefreq.WilsonLabel(0, 0)

    def test_count_guard(self, tight512):
        with pytest.raises(UsageError, match="capacity"):
            timefreq.wilson_family(tight512, 300)

    def test_gram_32(self, tight512):
        family = timefreq.wilson_family(tight512, 32)
        assert family.gram_deviation <= 1e-8

    def test_gram_78(self, family78):
        assert family78.gram_deviation <= 1e-8

    def test_enumeration_prefix(self, family78):
        prefix = [(lab.shift, lab.mod, lab.flavor) for lab in family78.labels[:6]]
        assert prefix == [
            (0, 0, "translate"),
            (-1, 0, "translate"),
            (1, 0, "translate"),
            (0, 1, "sine"),
            (-2, 0, "translate"),
            (2, 0, "translate"),
        ]

    def test_parseval_in_span(self, grid512, family78):
        rng = np.random.default_rng(11)
        weights = rng.standard_normal(len(family78.members))
        f = timefreq.SampledFunction(grid512, weights @ family78.member_matrix)
        coeffs = family78.coefficients(f)
        assert (np.abs(coeffs) ** 2).sum() == pytest.approx(f.norm() ** 2, rel=1e-8)

    def test_manifest_export(self, family78):
        out = io.StringIO()
        timefreq.write_family_manifest(family78, out)
        doc = json.loads(out.getvalue())
        assert doc["count"] == 78
        assert doc["grid"]["samples"] == 512
        assert doc["lattice"] == {"a": 0.5, "b": 1.0}
        assert doc["enumeration"][0] == {
            "index": 1, "shift": 0, "mod": 0, "flavor": "translate"}

    def test_members_csv(self, tight512):
        family = timefreq.wilson_family(tight512, 2)
        out = io.StringIO()
        timefreq.write_members_csv(family, out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "member,sample,value"
        assert len(lines) == 1 + 2 * 512


class TestBlockEigenfunctions:
    def test_h_1_0_is_first_member(self, family78):
        h = timefreq.build_h_nk(family78, 1, 0)
        assert_allclose(h.values, family78.member(1).values, atol=1e-14)

    def test_h_4_1_combination(self, family78):
        h = timefreq.build_h_nk(family78, 4, 1)
        w = [family78.member(i).values for i in (7, 8, 9, 10)]
        expected = 0.5 * (w[0] + w[1] - w[2] - w[3])
        assert_allclose(h.values, expected, atol=1e-13)

    def test_family_too_small(self, tight512):
        family = timefreq.wilson_family(tight512, 3)
        with pytest.raises(UsageError, match="needs 6"):
            timefreq.build_h_nk(family, 3, 0)

    def test_orthonormal_to_n5(self, grid512, family78):
        rows = []
        for n in range(1, 6):
            for k in range(n):
                rows.append(timefreq.build_h_nk(family78, n, k).values)
        rows = np.stack(rows)
        gram = grid512.step * (rows @ rows.T)
        assert np.abs(gram - np.eye(len(rows))).max() <= 1e-8


class TestM1CoefficientNorm:
    def test_member_has_unit_norm(self, family78):
        assert timefreq.m1_coefficient_norm(family78.member(3), family78) == \
            pytest.approx(1.0, abs=1e-10)

    def test_h41_equals_hartley_l1(self, family78):
        value = timefreq.m1_coefficient_norm(
            timefreq.build_h_nk(family78, 4, 1), family78)
        assert value == pytest.approx(2.0, abs=1e-8)
        assert value == pytest.approx(
            bases.l1_norm(bases.hartley_vector(4, 1)), abs=1e-8)

    def test_bounds_to_n5(self, family78):
        for n in range(1, 6):
            for k in range(n):
                value = timefreq.m1_coefficient_norm(
                    timefreq.build_h_nk(family78, n, k), family78)
                assert math.sqrt(n / 2.0) - 1e-8 <= value <= math.sqrt(n) + 1e-8

    def test_out_of_span_rejected(self, grid512, family78):
        f = random_function(grid512, 5, complex_valued=False)
        with pytest.raises(DomainError, match="residual"):
            timefreq.m1_coefficient_norm(f, family78)


class TestKernelExpand:
    def test_single_rank_one(self, family78):
        spec = operators.EigenSpec(1, 0, 2.0, 1.0)
        kernel = timefreq.kernel_expand([spec], family78)
        assert kernel.coefficients.shape == (1, 1)
        assert kernel.coefficients[0, 0] == pytest.approx(1.0, abs=1e-10)

    def test_blocks_to_3_match_assembled_operator(self, family78):
        kernel = timefreq.kernel_expand(operators.block_specs(3, 2.0), family78)
        global_matrix = operators.global_matrix(operators.assemble(3, 2.0, "hartley"))
        assert np.abs(kernel.coefficients - global_matrix).max() <= 1e-8

    def test_abs_sum_matches_operator_bookkeeping(self, family78):
        kernel = timefreq.kernel_expand(operators.block_specs(3, 2.0), family78)
        op = operators.assemble(3, 2.0, "hartley")
        assert timefreq.kernel_abs_sum(kernel) == pytest.approx(
            operators.entrywise_abs_sum(op), abs=1e-8)

    def test_requires_enough_members(self, tight512):
        family = timefreq.wilson_family(tight512, 3)
        with pytest.raises(UsageError, match="needs 6"):
            timefreq.kernel_expand(operators.block_specs(3, 2.0), family)

    def test_empty_specs_rejected(self, family78):
        with pytest.raises(ParameterError):
            timefreq.kernel_expand([], family78)

    def test_kernel_csv(self, family78):
        kernel = timefreq.kernel_expand([operators.EigenSpec(1, 0, 2.0, 1.0)],
                                        family78)
        out = io.StringIO()
        timefreq.write_kernel_csv(kernel, out)
        lines = out.getvalue().splitlines()
        assert lines[0] == "m,n,real,imag"
        assert len(lines) == 2


def test_per_term_l1_bound(family78):
    # lambda * m1(h_{n,k}) <= lambda * sqrt(n) termwise
    for n in range(1, 6):
        lam = operators.block_eigenvalues(n, 2.0)
        for k in range(n):
            value = timefreq.m1_coefficient_norm(
                timefreq.build_h_nk(family78, n, k), family78)
            assert lam[k] * value <= lam[k] * math.sqrt(n) + 1e-8
