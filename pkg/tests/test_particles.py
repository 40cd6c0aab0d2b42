import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from consensus_kinetics.errors import EmptyEnsemble, InvalidParameter, InvalidTimeStep
from consensus_kinetics.kinetic.distribution import (
    GridDistribution,
    ParticleEnsemble,
    lognormal_density,
    lognormal_ensemble,
    make_grid,
    moments_of,
    write_snapshot,
)
from consensus_kinetics.kinetic.moments import sentiment_closed_form, variance_solve
from consensus_kinetics.kinetic.params import KineticParams
from consensus_kinetics.kinetic.particles import jump_schedule, particle_simulate
from consensus_kinetics.kinetic.paths import ForcingPath
from consensus_kinetics.timeseries import synth_gbm

REF = KineticParams.reference()
T2 = np.arange(5041) / 2520.0


def test_invariant_ensemble_at_target():
    Y = 2000.0 * 1.143
    e = ParticleEnsemble(np.full(1000, Y))
    run = particle_simulate(KineticParams.reference(alpha=0.7), ForcingPath.constant(2000.0, 1.0), e, T2[:2521], seed=1)
    assert_allclose(run.final.positions, Y, rtol=1e-14)
    assert_allclose(run.variance, 0.0, atol=1e-18 * Y * Y)


def test_same_seed_is_bit_identical_and_seeds_differ():
    e = lognormal_ensemble(2000, 1800.0, seed=4)
    X = ForcingPath.constant(2000.0, 1.0)
    a = particle_simulate(REF, X, e, T2[:1261], seed=9)
    b = particle_simulate(REF, X, e, T2[:1261], seed=9)
    c = particle_simulate(REF, X, e, T2[:1261], seed=10)
    assert np.array_equal(a.final.positions, b.final.positions)
    assert np.array_equal(a.mean, b.mean)
    assert not np.array_equal(a.final.positions, c.final.positions)


def test_count_conserved_and_positions_nonnegative():
    e = lognormal_ensemble(5000, 50.0, rel_width=1.5, seed=2)
    X = ForcingPath.from_series(synth_gbm(100.0, 0.0, 0.6, 253, seed=8))
    run = particle_simulate(KineticParams(0.6, 10.0, -0.4, alpha=3.0), X, e, np.arange(253) / 252, seed=3, keep_snapshots=True)
    assert len(run.final) == len(e)
    assert all(len(s) == len(e) and np.all(s.positions >= 0) for s in run.snapshots)


def test_jump_schedule_counts_are_poisson():
    steps, who = jump_schedule(20000, 100, 0.01, 6.0, seed=5)
    assert np.all(np.diff(steps) >= 0)
    assert steps.min() >= 1 and steps.max() <= 100
    counts = np.bincount(who, minlength=20000)
    # total rate 6 per unit time over horizon 1
    assert abs(counts.mean() - 6.0) < 4 * math.sqrt(6.0 / 20000)
    assert abs(counts.var() - 6.0) < 0.3


def test_mean_tracks_closed_form_alpha_zero():
    X = ForcingPath.constant(2000.0, 2.0)
    e = lognormal_ensemble(100_000, 1800.0, seed=1)
    run = particle_simulate(REF, X, e, T2, seed=3, record_every=126)
    s = sentiment_closed_form(REF, X, moments_of(e).mean, run.times).s_values
    z = np.abs(run.mean - s) / np.maximum(run.mean_se, 1e-12)
    assert z.max() < 3.0


def test_mean_alpha_independent_within_seed_spread():
    """alpha > 0: error against the closed form compared with the spread across seeds."""
    X = ForcingPath.constant(2000.0, 2.0)
    p = KineticParams.reference(alpha=1.0)
    e = lognormal_ensemble(20_000, 1800.0, seed=1)
    t = np.arange(1261) / 630.0
    finals = np.array([particle_simulate(p, X, e, t, seed=s, record_every=1260).mean[-1] for s in range(12)])
    s_exact = sentiment_closed_form(p, X, moments_of(e).mean, [0.0, 2.0]).s_values[-1]
    spread = finals.std(ddof=1)
    assert abs(finals.mean() - s_exact) < 4 * spread / math.sqrt(finals.size)


@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_variance_matches_corrected_solution(alpha):
    p = KineticParams.reference(alpha=alpha)
    X = ForcingPath.constant(2000.0, 2.0)
    e = lognormal_ensemble(100_000, 1800.0, seed=6)
    run = particle_simulate(p, X, e, T2, seed=11, record_every=252)
    m = moments_of(e)
    s = sentiment_closed_form(p, X, m.mean, T2)
    v = variance_solve(p, s, X, m.variance).v_values[::252]
    z = np.abs(run.variance - v) / run.variance_se
    assert z.max() < 3.0
    if alpha > 0:
        published = variance_solve(p, s, X, m.variance, variant="paper").v_values[::252]
        assert np.max(np.abs(run.variance - published) / run.variance_se) > 10.0


def test_particle_input_errors():
    e = lognormal_ensemble(10, 1.0)
    X = ForcingPath.constant(1.0, 1.0)
    with pytest.raises(InvalidTimeStep):
        particle_simulate(REF, X, e, [0.0])
    with pytest.raises(InvalidTimeStep):
        particle_simulate(REF, X, e, [0.0, 0.1, 0.3])
    with pytest.raises(EmptyEnsemble):
        ParticleEnsemble(np.array([]))
    with pytest.raises(InvalidParameter):
        ParticleEnsemble(np.array([1.0, -1.0]))


def test_coarse_step_warns(caplog):
    e = lognormal_ensemble(10, 1.0)
    particle_simulate(REF, ForcingPath.constant(1.0, 1.0), e, [0.0, 0.5, 1.0])
    assert "beta*dt" in caplog.text


# -- moments ------------------------------------------------------------------


def test_moments_examples():
    m = moments_of(ParticleEnsemble(np.full(7, 3.5)))
    assert (m.mean, m.variance, m.m0) == (3.5, 0.0, 7.0)
    m = moments_of(ParticleEnsemble(np.array([0.0, 2.0])))
    assert (m.mean, m.variance) == (1.0, 1.0)


def test_grid_gaussian_moments():
    x = make_grid(10.0, 2048)
    mu, sd = 4.0, 0.7
    f = np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    m = moments_of(GridDistribution(x, f))
    assert abs(m.m0 - 1) < 1e-4
    assert abs(m.mean - mu) < 1e-4
    assert abs(m.variance - sd**2) < 1e-4
    assert abs(m.m2 - (mu**2 + sd**2)) < 1e-4


def test_lognormal_helpers_match_requested_moments():
    x = make_grid(8000.0, 4096)
    m = moments_of(lognormal_density(x, 2000.0, 0.1))
    assert m.mean == pytest.approx(2000.0, rel=1e-5)
    assert math.sqrt(m.variance) == pytest.approx(200.0, rel=1e-4)
    e = moments_of(lognormal_ensemble(200_000, 2000.0, 0.1, seed=0))
    assert e.mean == pytest.approx(2000.0, rel=3e-3)


def test_grid_errors():
    with pytest.raises(InvalidParameter):
        GridDistribution(np.array([1.0, 2.0, 3.0]), np.ones(3))
    with pytest.raises(EmptyEnsemble):
        moments_of(GridDistribution(make_grid(1.0, 5), np.zeros(5)))


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=50))
@settings(max_examples=50)
def test_ensemble_moments_match_numpy(xs):
    m = moments_of(ParticleEnsemble(np.array(xs)))
    assert m.mean == pytest.approx(np.mean(xs), rel=1e-12, abs=1e-9)
    assert m.variance == pytest.approx(np.var(xs), rel=1e-9, abs=1e-6)


def test_snapshot_sidecar(tmp_path):
    path = write_snapshot(tmp_path / "s.csv", np.array([1.5, 2.5]), np.arange(2), "particle", {"time": 0.5, "seed": 3})
    assert path.read_text().splitlines() == ["particle,value", "0,1.5", "1,2.5"]
    assert json.loads((tmp_path / "s.csv.json").read_text()) == {"time": 0.5, "seed": 3}
