import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from spectral_flow import (
    CouplingTensor,
    DivergenceError,
    EigenBasis,
    FlowParams,
    InvalidArgumentError,
    PhasePoint,
    ShapeError,
    SpectralState,
    StabilityError,
    Trajectory,
    build_tensor,
    deviation_norm,
    energy,
    energy_cubic,
    evolve,
    exact_trajectory,
    gronwall_report,
    hamiltonian,
    leapfrog,
    leapfrog_step,
    linear_flow_exact,
    make_constants,
    rhs_centered,
    rhs_linear,
    rhs_nonlinear,
    weighted_norm,
    write_trajectory_csv,
)

PI = math.pi


def ramp_state(n_max, norm=0.1):
    d = np.arange(1, n_max + 2, dtype=float)
    return SpectralState.from_deviations(norm * d / np.linalg.norm(d))


def fd_gradient(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


# --- exact linear flow -------------------------------------------------------


def test_exact_flow_identity_at_zero():
    s = SpectralState(np.array([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(linear_flow_exact(s, [1, 2, 3], 0.0).amplitudes, s.amplitudes)


def test_exact_flow_single_mode_value():
    s = SpectralState.from_deviations([1.0])
    assert linear_flow_exact(s, [1.0], 1.0).amplitudes[0] == pytest.approx(PI + math.exp(-1), abs=1e-15)
    assert linear_flow_exact(s, [1.0], 1.0).amplitudes[0] == pytest.approx(3.50947, abs=1e-5)


def test_exact_flow_long_time():
    d0 = np.array([1.0, -2.0, 0.5])
    out = linear_flow_exact(SpectralState.from_deviations(d0), [1.0, 1.5, 3.0], 50.0)
    assert np.all(np.abs(out.deviations) <= 2e-22 * np.abs(d0))


def test_exact_flow_rejects_negative_tau():
    with pytest.raises(InvalidArgumentError):
        linear_flow_exact(SpectralState([PI]), [1.0], -1.0)


# --- right-hand sides --------------------------------------------------------


def test_rhs_linear_values():
    assert np.all(rhs_linear(SpectralState.fixed_point(5), np.ones(5)) == 0)
    assert rhs_linear(SpectralState([PI + 2, PI]), [3.0, 1.0])[0] == pytest.approx(-6.0)


def test_rhs_linear_shape_error():
    with pytest.raises(ShapeError):
        rhs_linear(SpectralState([1.0, 2.0]), [1.0])


def test_rhs_nonlinear_zero_coupling_is_linear():
    b = EigenBasis(n_max=6)
    s = ramp_state(6, 0.5)
    a = np.arange(1, 8.0)
    np.testing.assert_array_equal(rhs_nonlinear(s, a, build_tensor(b, 0.0)), rhs_linear(s, a))


def test_rhs_nonlinear_single_entry():
    g = CouplingTensor(2, {(0, 0, 0): 1.0})
    C = np.array([2.0, PI, PI])
    out = rhs_nonlinear(SpectralState(C), np.ones(3), g)
    assert out[0] - rhs_linear(C, np.ones(3))[0] == pytest.approx(4.0)


def test_rhs_nonlinear_against_triple_loop():
    rng = np.random.default_rng(3)
    b = EigenBasis(n_max=6)
    t = build_tensor(b, 0.2)
    C = PI + 0.1 * rng.normal(size=7)
    a = rng.uniform(1, 5, 7)
    brute = np.zeros(7)
    for n in range(7):
        for k in range(7):
            for m in range(7):
                brute[n] += t[n, k, m] * C[k] * C[m]
    np.testing.assert_allclose(rhs_nonlinear(C, a, t), -a * (C - PI) + brute, atol=1e-12)


def test_raw_flow_source_at_fixed_point():
    t = build_tensor(EigenBasis(n_max=5), 0.1)
    out = rhs_nonlinear(SpectralState.fixed_point(6), np.ones(6), t)
    expected = PI**2 * t.dense.sum(axis=(1, 2))
    np.testing.assert_allclose(out, expected, rtol=1e-13)
    assert np.any(np.abs(out) > 0.01)


def test_centered_flow_fixed_point_is_exact():
    t = build_tensor(EigenBasis(n_max=5), 0.1)
    assert np.all(rhs_centered(SpectralState.fixed_point(6), np.ones(6), t) == 0)


# --- energies and gradients --------------------------------------------------


def test_energy_values():
    assert energy(SpectralState.fixed_point(4), np.ones(4)) == 0.0
    assert energy(SpectralState.from_deviations([2.0]), [1.0]) == pytest.approx(2.0)


def test_energy_cubic_values():
    assert energy_cubic([PI + 1, PI], [1.0, 2.0], None) == energy([PI + 1, PI], [1.0, 2.0])
    g = CouplingTensor(0, {(0, 0, 0): 1.0})
    assert energy_cubic([3.0], [1.0], g) == pytest.approx(energy([3.0], [1.0]) - 9.0)


@pytest.mark.parametrize("centered", [False, True])
def test_rhs_is_negative_energy_gradient(centered):
    rng = np.random.default_rng(11)
    t = build_tensor(EigenBasis(n_max=8), 0.05)
    rhs = rhs_centered if centered else rhs_nonlinear
    for _ in range(20):
        C = rng.uniform(PI - 1, PI + 1, 9)
        a = rng.uniform(0.5, 4, 9)
        grad = fd_gradient(lambda x: energy_cubic(x, a, t, centered), C)
        np.testing.assert_allclose(rhs(C, a, t), -grad, rtol=1e-6, atol=1e-8)


def test_energy_bound_along_exact_flow():
    a = np.array([1.0, 2.0, 4.0, 9.0])
    s0 = SpectralState.from_deviations([0.3, -1.0, 2.0, 0.5])
    e0 = energy(s0, a)
    for tau in (0.5, 1.0, 2.0):
        assert energy(linear_flow_exact(s0, a, tau), a) <= e0 * math.exp(-2 * a.min() * tau)


def test_linear_energy_dissipation_identity():
    a = np.array([1.0, 3.0, 5.0])
    s = SpectralState.from_deviations([0.4, -0.2, 0.1])
    h = 1e-6
    dE = (energy(linear_flow_exact(s, a, h), a) - energy(s, a)) / h
    assert dE == pytest.approx(-np.sum(a**2 * s.deviations**2), rel=1e-5)


# --- RK4 ---------------------------------------------------------------------


def test_rk4_matches_exact_solution():
    a = np.arange(1, 18.0)
    s0 = ramp_state(16, 1.0)
    traj = evolve(s0, FlowParams(a, dt=1e-3, t_end=5.0))
    assert traj.times[-1] == 5.0
    ref = exact_trajectory(s0, a, traj.times)
    assert np.max(np.abs(traj.deviations - ref.deviations)) <= 1e-8


def test_rk4_fourth_order():
    a = np.array([1.0, 2.0, 5.0])
    s0 = SpectralState.from_deviations([1.0, -1.0, 0.5])
    errs = []
    for dt in (0.04, 0.02):
        traj = evolve(s0, FlowParams(a, dt=dt, t_end=1.0))
        errs.append(np.max(np.abs(traj.final.deviations - linear_flow_exact(s0, a, 1.0).deviations)))
    assert 12 <= errs[0] / errs[1] <= 20


def test_nonlinear_zero_coupling_matches_linear():
    b = EigenBasis(n_max=6)
    a = np.arange(1, 8.0)
    s0 = ramp_state(6)
    lin = evolve(s0, FlowParams(a, dt=1e-3, t_end=1.0))
    non = evolve(s0, FlowParams(a, build_tensor(b, 0.0), dt=1e-3, t_end=1.0), "nonlinear")
    assert np.max(np.abs(lin.deviations - non.deviations)) <= 1e-12


@pytest.mark.parametrize("kind", ["nonlinear", "centered"])
def test_nonlinear_rk4_against_solve_ivp(kind):
    b = EigenBasis(n_max=8)
    t = build_tensor(b, 0.05)
    a = (np.arange(9) + 1.0) ** 2
    s0 = ramp_state(8, 0.3)
    traj = evolve(s0, FlowParams(a, t, dt=1e-3, t_end=2.0), kind)
    rhs = rhs_nonlinear if kind == "nonlinear" else rhs_centered
    ref = solve_ivp(lambda _t, C: rhs(C, a, t), (0, 2.0), s0.amplitudes, method="DOP853", rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(traj.final.amplitudes, ref.y[:, -1], atol=1e-10)


def test_raw_flow_settles_off_pi():
    b = EigenBasis(n_max=8)
    t = build_tensor(b, 0.01)
    a = (np.arange(9) + 1.0) ** 2
    traj = evolve(ramp_state(8), FlowParams(a, t, dt=1e-3, t_end=20.0, record_every=100), "nonlinear")
    final = traj.final
    assert np.max(np.abs(rhs_nonlinear(final, a, t))) < 1e-8
    assert deviation_norm(final) > 1e-3


def test_centered_small_data_decays_monotonically():
    b = EigenBasis(make_constants(1.0), 16)
    t = build_tensor(b, 0.01)
    a = (np.arange(17) + 1.0) ** 2
    traj = evolve(ramp_state(16), FlowParams(a, t, dt=1e-3, t_end=10.0, record_every=10), "centered")
    norms = traj.norms()
    late = norms[traj.times >= 0.1]
    assert np.all(np.diff(late) < 0)
    assert norms[-1] <= 1e-6
    w = [weighted_norm(s, 2) for s in traj.states]
    assert max(w) <= 2 * w[0]


def test_energy_nonincreasing_along_flows():
    b = EigenBasis(n_max=8)
    t = build_tensor(b, 0.01)
    a = (np.arange(9) + 1.0) ** 2
    for kind, centered in (("linear", False), ("nonlinear", False), ("centered", True)):
        traj = evolve(ramp_state(8), FlowParams(a, t, dt=1e-3, t_end=2.0, record_every=5), kind)
        coupling = None if kind == "linear" else t
        E = np.array([energy_cubic(s, a, coupling, centered) for s in traj.states])
        assert np.all(np.diff(E) <= 1e-9 * (1 + abs(E[0])))


def test_stability_guard():
    with pytest.raises(StabilityError):
        evolve(SpectralState.fixed_point(3), FlowParams(np.array([1.0, 10.0, 100.0]), dt=0.01))


def test_nonlinear_requires_coupling():
    with pytest.raises(InvalidArgumentError):
        evolve(SpectralState.fixed_point(2), FlowParams(np.ones(2)), "nonlinear")


def test_divergence_reports_time():
    g = CouplingTensor(0, {(0, 0, 0): 10.0})
    with pytest.raises(DivergenceError) as info:
        evolve(SpectralState.from_deviations([5.0]), FlowParams([1.0], g, dt=1e-3, t_end=10.0), "centered")
    assert 0 < info.value.time < 10.0


def test_final_time_lands_on_t_end():
    traj = evolve(SpectralState.from_deviations([1.0]), FlowParams([1.0], dt=0.03, t_end=1.0, record_every=7))
    assert traj.times[-1] == 1.0
    assert traj.final.deviations[0] == pytest.approx(math.exp(-1.0), abs=1e-8)


def test_trajectory_validation():
    with pytest.raises(InvalidArgumentError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 1)))
    with pytest.raises(InvalidArgumentError):
        Trajectory(np.array([0.1, 0.2]), np.zeros((2, 1)))


def test_trajectory_csv(tmp_path):
    traj = evolve(ramp_state(2), FlowParams(np.ones(3), dt=0.1, t_end=0.3))
    text = write_trajectory_csv(traj, tmp_path / "t.csv").read_text()
    lines = text.split("\n")
    assert lines[0] == "tau,C_0,C_1,C_2"
    assert len([l for l in lines if l]) == 1 + len(traj)
    assert "\r" not in text


# --- Gronwall ----------------------------------------------------------------


def test_gronwall_equal_rates_is_tight():
    s0 = SpectralState.from_deviations(np.full(4, 0.5))
    traj = exact_trajectory(s0, np.ones(4), np.linspace(0, 3, 50))
    rep = gronwall_report(traj, np.ones(4))
    assert rep.delta == 1.0
    assert abs(rep.max_violation) <= 1e-15


def test_gronwall_mixed_rates_strict():
    s0 = SpectralState.from_deviations(np.ones(5))
    traj = exact_trajectory(s0, np.arange(1, 6.0), np.linspace(0, 2, 100))
    rep = gronwall_report(traj, np.arange(1, 6.0))
    assert rep.max_violation <= 1e-12
    norms = traj.norms()[1:]
    bound = norms[0] * 0 + np.linalg.norm(s0.deviations) * np.exp(-traj.times[1:])
    assert np.all(norms < bound)


def test_gronwall_needs_alphas_or_params():
    traj = exact_trajectory(SpectralState([PI + 1]), [1.0], [0.0, 1.0])
    with pytest.raises(InvalidArgumentError):
        gronwall_report(traj)


def test_weighted_norm_values():
    s = SpectralState.from_deviations([0.0, 1.0, 0.0])
    assert weighted_norm(s, 2) == pytest.approx(4.0)
    s = SpectralState.from_deviations([0.3, -0.4])
    assert weighted_norm(s, 0) == pytest.approx(deviation_norm(s))


# --- Hamiltonian flow --------------------------------------------------------


def test_leapfrog_fixed_point():
    p = PhasePoint([PI, PI], [0.0, 0.0])
    out = leapfrog_step(p, [1.0, 4.0], 0.1)
    np.testing.assert_array_equal(out.q, p.q)
    np.testing.assert_array_equal(out.p, p.p)


def test_leapfrog_period_and_drift():
    dt = 2 * math.pi / round(2 * math.pi / 1e-3)
    n = round(2 * math.pi / dt)
    times, q, p = leapfrog(PhasePoint([PI + 1], [0.0]), [1.0], dt, n, record_every=n)
    assert abs(q[-1, 0] - (PI + 1)) <= 1e-5 and abs(p[-1, 0]) <= 1e-5


def test_leapfrog_tracks_cosine():
    dt = 1e-3
    times, q, p = leapfrog(PhasePoint([PI + 1], [0.0]), [1.0], dt, 3000, record_every=100)
    np.testing.assert_allclose(q[:, 0], PI + np.cos(times), atol=1e-6)


def test_leapfrog_reversibility():
    rng = np.random.default_rng(5)
    p0 = PhasePoint(PI + rng.normal(size=6), rng.normal(size=6))
    a = rng.uniform(0.5, 5, 6)
    back = leapfrog_step(leapfrog_step(p0, a, 0.01), a, -0.01)
    assert np.max(np.abs(back.q - p0.q)) <= 1e-12
    assert np.max(np.abs(back.p - p0.p)) <= 1e-12


def test_hamiltonian_value():
    assert hamiltonian(PhasePoint([PI + 2], [3.0]), [1.0]) == pytest.approx(4.5 + 2.0)


@settings(max_examples=40, deadline=None)
@given(
    d=st.lists(st.floats(-2, 2), min_size=1, max_size=8),
    tau=st.floats(0, 5),
    scale=st.floats(0.1, 5),
)
def test_exact_flow_contracts_and_bounds(d, tau, scale):
    a = scale * np.arange(1, len(d) + 1.0)
    s0 = SpectralState.from_deviations(d)
    s = linear_flow_exact(s0, a, tau)
    # amplitudes are stored as pi + d, so allow a few ulps of pi in each entry
    slack = 4 * np.spacing(PI) * math.sqrt(len(d))
    bound = deviation_norm(s0) * math.exp(-a.min() * tau)
    assert deviation_norm(s) <= bound + slack
    assert energy(s, a) <= energy(s0, a) * math.exp(-2 * a.min() * tau) + a.max() * (bound + slack) * slack
