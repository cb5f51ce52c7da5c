"""Label-augmented lifting of solution data."""

import numpy as np
import pytest

from cutop.errors import UsageError
from cutop.extraction import (
    extract_jumps,
    extract_sharp_transition,
    filter_smeared,
)
from cutop.lifting import (
    build_disc_dataset,
    build_lifted_dataset,
    region_label,
    region_labels,
)
from cutop.problems import (
    AdvectionIC,
    RiemannIC,
    StimulusParams,
    advection_exact,
    burgers_godunov,
    parsimonious_simulate,
)


def advection_setup(nx=200, nt=5):
    ic = AdvectionIC(h=0.5, w=0.25, s_mid=0.18)
    fld = advection_exact(ic, nx=nx, nt=nt)
    disc = extract_jumps(fld, dis_n=2)
    return ic, fld, disc


class TestRegionLabel:
    def test_counting(self):
        fronts = [0.3, 0.6]
        assert region_label(0.1, fronts) == 0
        assert region_label(0.45, fronts) == 1
        assert region_label(0.9, fronts) == 2

    def test_half_open_on_front(self):
        # a point exactly on a front belongs to the right region
        assert region_label(0.3, [0.3, 0.6]) == 1
        assert region_label(0.6, [0.3, 0.6]) == 2

    def test_vectorized_matches_scalar(self):
        fronts = [-0.2, 0.5]
        xs = np.linspace(-1, 1, 17)
        vec = region_labels(xs, fronts)
        scal = [region_label(x, fronts) for x in xs]
        np.testing.assert_array_equal(vec, scal)

    def test_monotone_along_coordinate(self):
        xs = np.linspace(0, 1, 101)
        labels = region_labels(xs, [0.25, 0.7])
        assert np.all(np.diff(labels) >= 0)


class TestLiftedDataset:
    def test_value_preservation_exact(self):
        _, fld, disc = advection_setup()
        lifted = build_lifted_dataset([fld], [disc])
        sample = lifted.samples[0]
        nt, nx = fld.values.shape
        assert sample.targets.shape == (nt * nx,)
        np.testing.assert_array_equal(sample.targets, fld.values.ravel())

    def test_label_completeness(self):
        # every region index 0..dis_n appears somewhere
        _, fld, disc = advection_setup()
        lifted = build_lifted_dataset([fld], [disc])
        assert lifted.region_count == 3
        assert set(np.unique(lifted.samples[0].labels)) == {0, 1, 2}

    def test_labels_match_pulse_geometry(self):
        ic, fld, disc = advection_setup(nx=500, nt=6)
        lifted = build_lifted_dataset([fld], [disc])
        s = lifted.samples[0]
        # points labeled 1 are inside the pulse, so their target is h;
        # stay one cell away from the fronts to avoid extraction rounding
        for coords, label, target in zip(s.coords, s.labels, s.targets):
            x, t = coords
            fronts = ic.fronts_at(t)
            if np.min(np.abs(fronts - x)) <= fld.dx:
                continue
            assert target == (ic.h if label == 1 else 0.0)

    def test_mask_removes_points(self):
        ic = RiemannIC(u_left=1.5, x_d=-0.5)
        fld = burgers_godunov(ic, nx=200, nt=4)
        disc = extract_jumps(fld, dis_n=1)
        mask = filter_smeared(fld, disc, band_cells=3)
        full = build_lifted_dataset([fld], [disc])
        masked = build_lifted_dataset([fld], [disc], [mask])
        dropped = int(mask.mask.sum())
        assert dropped > 0
        assert len(masked.samples[0].targets) == \
            len(full.samples[0].targets) - dropped
        # none of the surviving points sit in the masked band
        for coords in masked.samples[0].coords:
            x, t = coords
            j = int(np.argmin(np.abs(fld.t - t)))
            assert abs(x - disc.locations[j, 0]) > 3 * fld.dx

    def test_trace_lifting(self):
        stim = StimulusParams(a_stim=40.0, t_stim=20.0, d_stim=1.25)
        trace = parsimonious_simulate(stim, dt=0.01)
        disc = extract_sharp_transition(trace)
        lifted = build_lifted_dataset([trace], [disc])
        s = lifted.samples[0]
        assert lifted.coord_dim == 1
        assert lifted.region_count == 3
        np.testing.assert_array_equal(s.targets, trace.values)
        # labels step up at the two transition times
        t_a, t_b = disc.locations
        np.testing.assert_array_equal(
            s.labels, (trace.t >= t_a).astype(int) + (trace.t >= t_b))

    def test_pairing_guards(self):
        _, fld, disc = advection_setup(nx=50, nt=3)
        with pytest.raises(UsageError):
            build_lifted_dataset([fld], [])
        with pytest.raises(UsageError):
            build_lifted_dataset([fld], [disc], [])


class TestDiscDataset:
    def test_2d_layout(self):
        _, fld, disc = advection_setup(nx=100, nt=4)
        ds = build_disc_dataset([fld], [disc])
        assert ds.with_time
        assert ds.dis_n == 2
        assert ds.domain == (float(fld.x[0]), float(fld.x[-1]))
        np.testing.assert_array_equal(ds.samples[0].times, fld.t)
        np.testing.assert_array_equal(ds.samples[0].locations, disc.locations)

    def test_trace_layout(self):
        stim = StimulusParams(a_stim=40.0, t_stim=20.0, d_stim=1.25)
        trace = parsimonious_simulate(stim, dt=0.01)
        disc = extract_sharp_transition(trace)
        ds = build_disc_dataset([trace], [disc])
        assert not ds.with_time
        assert ds.samples[0].times is None
        assert ds.domain == (0.0, 400.0)
