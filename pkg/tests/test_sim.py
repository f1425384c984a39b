import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from containment_ref import (
    AgentState,
    Gains,
    LeaderModel,
    NonFiniteStateError,
    Pose,
    StationaryTrajectory,
    SystemModel,
    ValidationFailedError,
    build_graph,
    convergence_time,
    default_initial,
    limit_target,
    partition,
    run,
    step,
    validate,
)
from containment_ref.sim import ScenarioConfig, array_to_states, states_to_array

TRIANGLE = (Pose(2.0, 0.0, 0.2), Pose(-1.0, 1.5, -0.1), Pose(-1.0, -1.5, 0.1))


def _single_agent_system(g4=0.1):
    g = build_graph(1, 1, [(2, 1)])
    model = LeaderModel(StationaryTrajectory(Pose(0, 0, 0)), (Pose(1.0, 0.0, 0.1),), 0.5)
    gains = Gains(1.0, 1.0, 1.0, g4, 1.0, 1.0)
    return SystemModel(g, model, gains)


def _reference_config(**overrides):
    g = build_graph(4, 3, [(1, 2), (2, 3), (3, 4), (5, 1), (6, 2), (7, 4)])
    model = LeaderModel(StationaryTrajectory(Pose(0, 0, 0)), TRIANGLE, 0.5)
    gains = Gains(1.0, 1.0, 1.0, 0.0005, 1.0, 1.0)
    defaults = dict(
        graph=g, leaders=model, gains=gains, dt=1e-3, t_final=40.0, log_every=10, seed=7
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


def test_step_requires_positive_dt():
    system = _single_agent_system()
    states = [AgentState(Pose(0, 0, 0), Pose(0, 0, 0), Pose(0, 0, 0))]
    with pytest.raises(ValueError):
        step(states, 0.0, 0.0, system)
    with pytest.raises(ValueError):
        step(states, 0.0, -1e-3, system)


def test_step_consensus_is_fixed_point():
    """At the exact limit with zero velocity the field vanishes."""
    system = _single_agent_system()
    target = AgentState(Pose(0.5, 0.0, 0.05), Pose(0, 0, 0), Pose(0, 0, 0))
    out = step([target], 0.0, 1e-3, system)[0]
    assert_allclose(states_to_array(out if isinstance(out, list) else [out]),
                    states_to_array([target]), atol=1e-15)


def test_step_monotone_approach_matches_fine_oracle():
    """Position climbs toward the scaled target; a dt=1e-5 run is the oracle."""
    system = _single_agent_system(g4=0.1)
    start = [AgentState(Pose(0, 0, 0), Pose(0, 0, 0), Pose(0, 0, 0))]
    coarse = [start[0]]
    states = start
    for k in range(100):
        states = step(states, k * 1e-3, 1e-3, system)
        coarse.append(states[0])
    xs = [s.eta.x for s in coarse]
    assert all(b >= a for a, b in zip(xs, xs[1:]))
    assert xs[-1] <= 0.5  # scaled target x

    fine = start
    for k in range(10000):
        fine = step(fine, k * 1e-5, 1e-5, system)
    assert_allclose(states_to_array(states), states_to_array(fine), atol=1e-8)


def test_run_final_state_matches_limit():
    config = _reference_config()
    r = run(config)
    part = partition(config.graph)
    target = limit_target(part, config.leaders, float(r.times[-1]))
    final = r.states[-1][:, 0:3].ravel()
    assert np.linalg.norm(final - target) < 1e-3


def test_run_validation_failure_aborts():
    config = _reference_config(
        gains=Gains(1.0, 1.0, -1.0, 0.1, 1.0, 1.0)
    )
    with pytest.raises(ValidationFailedError) as info:
        run(config)
    assert "g3" in str(info.value)


def test_run_override_validation_integrates():
    bad = _reference_config(
        gains=Gains(1.0, 1.0, 1.0, 0.1, 1.0, -1.0), t_final=0.05, log_every=1
    )
    with pytest.raises(ValidationFailedError):
        run(bad)
    r = run(bad, override_validation=True)
    assert len(r.times) > 1


def test_run_blowup_carries_partial_logs():
    config = _reference_config(
        gains=Gains(-8.0, -8.0, 1.0, 0.1, 1.0, 1.0), t_final=40.0, log_every=10
    )
    with pytest.raises(NonFiniteStateError) as info:
        run(config, override_validation=True)
    assert info.value.time > 0.0
    partial = info.value.partial_run
    assert partial is not None
    assert len(partial.times) >= 1


def test_run_log_every_does_not_change_dynamics():
    base = _reference_config(t_final=1.0, log_every=1)
    sparse = _reference_config(t_final=1.0, log_every=25)
    r1, r2 = run(base), run(sparse)
    shared = set(np.round(r1.times, 12)) & set(np.round(r2.times, 12))
    assert len(shared) > 10
    for t in sorted(shared):
        i1 = int(np.argmin(np.abs(r1.times - t)))
        i2 = int(np.argmin(np.abs(r2.times - t)))
        assert np.array_equal(r1.states[i1], r2.states[i2])


def test_run_deterministic_bit_identical():
    config = _reference_config(t_final=2.0)
    r1, r2 = run(config), run(config)
    assert np.array_equal(r1.states, r2.states)
    assert np.array_equal(r1.times, r2.times)
    assert all(
        f1.lyapunov == f2.lyapunov and np.array_equal(f1.coupling, f2.coupling)
        for f1, f2 in zip(r1.frames, r2.frames)
    )


def test_run_final_frame_always_logged():
    config = _reference_config(t_final=1.0, log_every=7)  # 1000 % 7 != 0
    r = run(config)
    assert r.times[-1] == pytest.approx(1.0)


def test_exact_consensus_stays_put():
    """Consensus initial condition drifts below 1e-12 per step."""
    config = _reference_config(t_final=0.5, log_every=1)
    part = partition(config.graph)
    target = limit_target(part, config.leaders, 0.0).reshape(4, 3)
    init = np.zeros((4, 9))
    init[:, 0:3] = target
    config = dataclasses.replace(config, initial=init)
    r = run(config)
    drift = np.abs(r.states[-1][:, 0:3] - target).max()
    assert drift < 1e-12 * len(r.times)


def test_default_initial_reproducible_and_centered():
    config = _reference_config(seed=123)
    a = default_initial(config)
    b = default_initial(config)
    assert np.array_equal(a, b)
    assert np.all(a[:, 3:] == 0.0)
    centroid = np.mean([[o.x, o.y, o.theta] for o in TRIANGLE], axis=0)
    assert np.all(np.abs(a[:, 0:3] - centroid) <= config.init_halfwidth)


def test_richardson_order_at_least_3p5():
    """Halving dt shrinks the state difference at fourth-order rate.

    Uses the transient window where the field is smooth; at the late-time
    floor the sign feedback is effectively discontinuous and no fixed-step
    method shows its nominal order there.
    """
    g = build_graph(4, 3, [(1, 2), (2, 3), (3, 4), (5, 1), (6, 2), (7, 4)])
    from containment_ref import CircleTrajectory

    model = LeaderModel(CircleTrajectory(2.0, 0.5, 0.0), TRIANGLE, 0.5)
    gains = Gains(1.0, 1.0, 1.0, 4.0, 1.0, 1.0)
    finals = []
    for dt in (5e-3, 2.5e-3, 1.25e-3):
        config = ScenarioConfig(
            graph=g, leaders=model, gains=gains, dt=dt, t_final=1.5,
            log_every=10**6, seed=7,
        )
        finals.append(run(config).states[-1].ravel())
    e1 = np.linalg.norm(finals[0] - finals[1])
    e2 = np.linalg.norm(finals[1] - finals[2])
    order = np.log2(e1 / e2)
    assert order >= 3.5


def test_convergence_time_started_at_limit():
    config = _reference_config(t_final=0.5, log_every=1)
    part = partition(config.graph)
    init = np.zeros((4, 9))
    init[:, 0:3] = limit_target(part, config.leaders, 0.0).reshape(4, 3)
    r = run(dataclasses.replace(config, initial=init))
    assert convergence_time(r, 1e-9) == 0.0


def test_convergence_time_zero_tol_not_reached():
    config = _reference_config(t_final=1.0)
    r = run(config)
    assert convergence_time(r, 0.0) is None


def test_convergence_time_reference_regression(stationary_run):
    """Frozen from the first recorded run of the bundled scenario."""
    r, _ = stationary_run
    assert convergence_time(r, 1e-3) == pytest.approx(16.45, abs=1e-9)


def test_monotone_tail_after_convergence(stationary_run):
    r, _ = stationary_run
    norms = r.containment_norms()
    for tol in (1e-2, 1e-3, 1e-6):
        t_conv = convergence_time(r, tol)
        assert t_conv is not None
        tail = norms[r.times >= t_conv]
        assert np.all(tail <= 2 * tol)


def test_states_array_round_trip():
    rng = np.random.default_rng(0)
    arr = rng.uniform(-1, 1, size=(3, 9))
    assert np.array_equal(states_to_array(array_to_states(arr)), arr)


def test_step_agrees_with_run_loop():
    """The public single-step API reproduces the run loop exactly."""
    config = _reference_config(t_final=0.02, log_every=1)
    r = run(config)
    system = SystemModel(config.graph, config.leaders, config.gains)
    states = array_to_states(r.states[0])
    for k in range(len(r.times) - 1):
        states = step(states, float(r.times[k]), config.dt, system)
        assert np.array_equal(states_to_array(states), r.states[k + 1])


def test_system_model_rejects_leader_count_mismatch():
    g = build_graph(2, 2, [(1, 2), (3, 1), (4, 2)])
    model = LeaderModel(
        StationaryTrajectory(Pose(0, 0, 0)), (Pose(1.0, 0.0, 0.1),), 0.5
    )
    with pytest.raises(ValueError):
        SystemModel(g, model, Gains(1, 1, 1, 1, 1, 1))


def test_run_arrays_read_only(stationary_run):
    r, _ = stationary_run
    with pytest.raises(ValueError):
        r.times[0] = -1.0
    with pytest.raises(ValueError):
        r.states[0, 0, 0] = 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        _reference_config(dt=0.0)
    with pytest.raises(ValueError):
        _reference_config(t_final=1e-9)
    with pytest.raises(ValueError):
        _reference_config(log_every=0)
    with pytest.raises(ValueError):
        _reference_config(initial=np.zeros((2, 9)))
    with pytest.raises(ValueError):
        _reference_config(initial=np.full((4, 9), np.nan))


def test_validate_report_structure():
    rep = validate(_reference_config())
    assert rep.ok
    assert rep.drive_bound == 0.0
    rep_bad = validate(
        _reference_config(gains=Gains(1.0, 1.0, 1.0, -0.1, 1.0, 1.0))
    )
    assert not rep_bad.ok and not rep_bad.gains_ok
