import numpy as np
import pytest

from atomristor.device import (DefectSpec, DefectState, DeviceSpec,
                               GeometryError, LrsShape, MaterialParams,
                               build_grid, hrs_profile, lrs_profile,
                               profile_for_state, with_defect_state)


def make_spec(**overrides):
    base = dict(
        metal=MaterialParams(effective_mass_ratio=1.1),
        insulator=MaterialParams(effective_mass_ratio=1.0, onset_potential=1.0),
        metal_length=1.5,
        insulator_length=1.5,
        grid_spacing=0.05,
    )
    base.update(overrides)
    return DeviceSpec(**base)


class TestValidation:
    def test_mass_must_be_positive(self):
        with pytest.raises(ValueError):
            MaterialParams(effective_mass_ratio=0.0)

    def test_onset_must_be_finite(self):
        with pytest.raises(ValueError):
            MaterialParams(effective_mass_ratio=1.0, onset_potential=np.inf)

    def test_negative_depth_rejected(self):
        with pytest.raises(ValueError):
            DefectSpec(location=0.5, depth=-0.1)

    def test_zero_width_rejected(self):
        with pytest.raises(ValueError):
            DefectSpec(location=0.5, depth=0.1, width=0.0)

    def test_defect_outside_insulator_rejected(self):
        with pytest.raises(ValueError):
            make_spec(defects=(DefectSpec(location=2.0, depth=0.1),))

    def test_defect_width_below_spacing_rejected(self):
        with pytest.raises(ValueError):
            make_spec(defects=(DefectSpec(location=0.5, depth=0.1, width=0.01),))

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(ValueError):
            make_spec(temperature=0.0)

    def test_nonpositive_fermi_level_rejected(self):
        with pytest.raises(ValueError):
            make_spec(fermi_level=-1.0)


class TestGrid:
    def test_reference_geometry_point_counts(self):
        grid = build_grid(make_spec())
        assert grid.metal_points == 30
        assert grid.insulator_points == 30
        assert grid.n_points == 90

    def test_positions_uniformly_spaced(self):
        grid = build_grid(make_spec())
        steps = np.diff(grid.positions)
        assert np.allclose(steps, 0.05, rtol=0, atol=1e-12)

    def test_rounded_stack_length(self):
        # a 0.35 + 0.32 + 0.35 nm stack resolves to 1.0 nm on the 0.05 grid
        grid = build_grid(make_spec(insulator_length=1.02))
        assert grid.insulator_points == 20

    def test_too_few_points_rejected(self):
        with pytest.raises(GeometryError):
            build_grid(make_spec(insulator_length=0.10))

    def test_junction_labels(self):
        grid = build_grid(make_spec())
        x, y = grid.metal_points, grid.insulator_points
        expected = {x - 2, x - 1, x, x + y - 2, x + y - 1, x + y}
        got = {i for i, lab in enumerate(grid.labels) if lab == "junction"}
        assert got == expected

    def test_insulator_offsets_half_cell_convention(self):
        grid = build_grid(make_spec())
        assert grid.insulator_offsets[0] == pytest.approx(0.025)
        # mirror of offset d is exactly (span - d)
        span = grid.insulator_points * grid.spacing
        mirrored = span - grid.insulator_offsets[::-1]
        assert np.allclose(grid.insulator_offsets, mirrored, atol=1e-12)


class TestHrsProfile:
    def test_rectangular_barrier_at_zero_bias(self):
        spec = make_spec()
        prof = hrs_profile(spec, 0.0)
        grid = build_grid(spec)
        assert len(prof.values) == grid.n_points
        assert np.all(prof.values[:grid.metal_points] == 0.0)
        assert np.all(prof.values[grid.insulator_slice] == 1.0)
        assert np.all(prof.values[grid.metal_points + 30:] == 0.0)

    def test_lead_levels_under_bias(self):
        prof = hrs_profile(make_spec(), 1.0)
        assert prof.values[0] == 0.0
        assert prof.values[-1] == -1.0

    def test_barrier_tilts_linearly(self):
        spec = make_spec()
        grid = build_grid(spec)
        prof = hrs_profile(spec, 1.0)
        ins = prof.values[grid.insulator_slice]
        frac = (np.arange(30) + 0.5) / 30
        assert np.allclose(ins, 1.0 - frac, atol=1e-12)

    def test_zero_bias_no_defect_profile_symmetric(self):
        prof = hrs_profile(make_spec(), 0.0)
        assert np.allclose(prof.values, prof.values[::-1], atol=1e-15)

    def test_vacancy_well_dips_by_depth(self):
        spec = make_spec(defects=(DefectSpec(location=0.75, depth=0.10),))
        grid = build_grid(spec)
        prof = hrs_profile(spec, 0.0)
        ins = prof.values[grid.insulator_slice]
        mask = np.abs(grid.insulator_offsets - 0.75) < 0.05
        assert np.all(ins[mask] == pytest.approx(0.90))
        assert np.all(ins[~mask] == 1.0)

    def test_well_clips_at_lead_level(self):
        spec = make_spec(defects=(DefectSpec(location=0.75, depth=5.0),))
        prof = hrs_profile(spec, 0.0)
        assert prof.values.min() == pytest.approx(0.0)

    def test_overlapping_wells_take_pointwise_minimum(self):
        d1 = DefectSpec(location=0.70, depth=0.10)
        d2 = DefectSpec(location=0.75, depth=0.30)
        spec = make_spec(defects=(d1, d2))
        grid = build_grid(spec)
        ins = hrs_profile(spec, 0.0).values[grid.insulator_slice]
        overlap = np.abs(grid.insulator_offsets - 0.725) <= 0.026
        assert np.all(ins[overlap] == pytest.approx(0.70))

    def test_edge_defect_keeps_full_width(self):
        # a window overhanging the interface shifts inward instead of shrinking
        spec = make_spec(defects=(DefectSpec(location=0.0, depth=0.10),))
        grid = build_grid(spec)
        ins = hrs_profile(spec, 0.0).values[grid.insulator_slice]
        assert np.sum(ins < 1.0) == 2

    def test_substituted_defect_rejected(self):
        d = DefectSpec(location=0.75, depth=0.10,
                       state=DefectState.METAL_SUBSTITUTED)
        with pytest.raises(ValueError):
            hrs_profile(make_spec(defects=(d,)), 0.0)

    def test_deterministic(self):
        spec = make_spec(defects=(DefectSpec(location=0.75, depth=0.10),))
        a = hrs_profile(spec, 0.3).values
        b = hrs_profile(spec, 0.3).values
        assert np.array_equal(a, b)


class TestLrsProfile:
    def substituted(self, shape=LrsShape.DEEPENED, loc=0.75, width=0.10,
                    **overrides):
        d = DefectSpec(location=loc, depth=0.10, width=width,
                       state=DefectState.METAL_SUBSTITUTED, lrs_shape=shape)
        return make_spec(defects=(d,), **overrides)

    def test_deepened_floor_at_lead_level(self):
        spec = self.substituted()
        grid = build_grid(spec)
        ins = lrs_profile(spec, 0.0).values[grid.insulator_slice]
        mask = np.abs(grid.insulator_offsets - 0.75) < 0.05
        assert np.all(ins[mask] == pytest.approx(0.0))

    def test_widened_doubles_the_well(self):
        deep = self.substituted(LrsShape.DEEPENED)
        wide = self.substituted(LrsShape.WIDENED)
        grid = build_grid(deep)
        n_deep = np.sum(lrs_profile(deep, 0.0).values[grid.insulator_slice] < 0.5)
        n_wide = np.sum(lrs_profile(wide, 0.0).values[grid.insulator_slice] < 0.5)
        assert n_wide == 2 * n_deep

    def test_coulomb_site_pinned_with_decaying_tail(self):
        spec = self.substituted(LrsShape.COULOMB, coulomb_constant=0.016)
        grid = build_grid(spec)
        ins = lrs_profile(spec, 0.0).values[grid.insulator_slice]
        site = np.argmin(np.abs(grid.insulator_offsets - 0.75))
        assert ins[site] == pytest.approx(0.0)
        # tail rises monotonically back toward the barrier on both sides
        assert ins[site] < ins[site + 1] < ins[site + 2] <= 1.0
        assert ins[site] < ins[site - 1] < ins[site - 2] <= 1.0

    def test_coulomb_default_constant_rule(self):
        # default C makes the distortion decay to 5% of the barrier at 0.3 nm
        spec = self.substituted(LrsShape.COULOMB, loc=0.78)
        grid = build_grid(spec)
        ins = lrs_profile(spec, 0.0).values[grid.insulator_slice]
        site = grid.insulator_offsets[
            np.argmin(np.abs(grid.insulator_offsets - 0.78))]
        r = np.abs(grid.insulator_offsets - site)
        far = ins[np.isclose(r, 0.30)]
        assert far.size > 0
        assert np.all(1.0 - far <= 0.05 * 1.0 + 1e-9)

    def test_no_substitution_equals_hrs(self):
        spec = make_spec(defects=(DefectSpec(location=0.75, depth=0.10),))
        assert np.array_equal(lrs_profile(spec, 0.5).values,
                              hrs_profile(spec, 0.5).values)

    @pytest.mark.parametrize("shape", list(LrsShape))
    def test_lrs_never_above_hrs(self, shape):
        spec = self.substituted(shape)
        for bias in (0.0, 0.4, 1.0):
            lrs = lrs_profile(spec, bias).values
            hrs = hrs_profile(with_defect_state(spec, DefectState.VACANCY),
                              bias).values
            assert np.all(lrs <= hrs + 1e-15)

    def test_profile_for_state_forces_states(self):
        spec = make_spec(defects=(DefectSpec(location=0.75, depth=0.10),))
        hrs = profile_for_state(spec, "HRS", 0.4)
        lrs = profile_for_state(spec, "LRS", 0.4)
        assert hrs.state_label == "HRS"
        assert lrs.state_label == "LRS"
        grid = build_grid(spec)
        assert lrs.values[grid.insulator_slice].sum() < \
            hrs.values[grid.insulator_slice].sum()

    def test_unknown_state_rejected(self):
        with pytest.raises(ValueError):
            profile_for_state(make_spec(), "XRS", 0.0)

    def test_mirror_pair_profiles_are_reflections(self):
        left = self.substituted(loc=0.30)
        right = self.substituted(loc=1.20)
        a = lrs_profile(left, 0.0).values
        b = lrs_profile(right, 0.0).values
        assert np.allclose(a, b[::-1], atol=1e-12)
