"""Qualitative behaviour of the Kn = 0.1 runs at the default resolution.

Bounds are read off the described figures: the |u2| peak time, density and
temperature becoming uniform, u1 dying out.  Each run takes of order a minute.
"""
import numpy as np
import pytest

from viscous_heating.bgk_solver import BgkConfig, run

S2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def strong():
    cfg = BgkConfig(kn=0.1, f0=2.0, t_end=30 / S2, sample_interval=0.05 / S2,
                    snapshot_times=(0.5 / S2, 1.5 / S2, 10 / S2, 30 / S2))
    return run(cfg)


@pytest.fixture(scope="module")
def weak():
    return run(BgkConfig(kn=0.1, f0=0.2, t_end=8 / S2, sample_interval=0.05 / S2))


def peak_time(series):
    return series.times[int(np.argmax(series.u2_av))]


def test_strong_force_u2_peaks_near_1_5_over_sqrt2(strong):
    assert 1.0 / S2 <= peak_time(strong) <= 2.0 / S2
    assert strong.u2_av[-1] < 0.5 * max(strong.u2_av)


def test_weak_force_u2_peaks_near_4_over_sqrt2(weak, strong):
    assert 3.0 / S2 <= peak_time(weak) <= 5.0 / S2
    # an order of magnitude slower flow than with f0 = 2
    assert 0.05 < max(weak.u2_av) / max(strong.u2_av) < 0.2


def test_density_uniform_by_30_over_sqrt2(strong):
    early, late = strong.snapshots[1], strong.snapshots[3]
    assert np.max(np.abs(early.rho - 1)) > 5e-3
    assert np.max(np.abs(late.rho - 1)) < 1e-2


def test_u1_practically_vanishes_by_10_over_sqrt2(strong):
    early = np.max(np.abs(strong.snapshots[0].u1))
    assert np.max(np.abs(strong.snapshots[2].u1)) < 0.02 * early
    # wall-adjacent cells in particular
    late = strong.snapshots[3]
    assert abs(late.u1[0]) < 1e-3 and abs(late.u1[-1]) < 1e-3


def test_temperature_evens_out_after_early_stage(strong):
    spread = [np.ptp(m.theta) / np.mean(m.theta) for m in strong.snapshots]
    assert spread[3] < spread[1]


def test_parity_of_profiles(strong):
    for m in strong.snapshots:
        assert np.max(np.abs(m.u2 + m.u2[::-1])) < 1e-8
        assert np.max(np.abs(m.theta - m.theta[::-1])) < 1e-8 * m.theta.max()


def test_average_temperature_increases_monotonically(strong):
    assert np.all(np.diff(strong.theta_av) > 0)
