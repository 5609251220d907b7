import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import stats

from spectral_flow import (
    EigenBasis,
    FlowParams,
    InsufficientDataError,
    InvalidArgumentError,
    SpectralState,
    UndefinedError,
    amplitude_entropy,
    build_tensor,
    deviation_entropy,
    effective_mode_count,
    entropy_report,
    entropy_scaling_curve,
    entropy_scaling_experiment,
    evolve,
    exact_trajectory,
    fit_decay_rate,
    shannon_entropy,
    write_entropy_csv,
)

PI = math.pi


def dev(*d):
    return SpectralState.from_deviations(np.array(d, dtype=float))


# --- entropies ---------------------------------------------------------------


def test_point_mass_has_zero_entropy():
    assert deviation_entropy(dev(0, 0, 0, 0.7, 0)) == 0.0
    assert amplitude_entropy(SpectralState([0.0, 2.0, 0.0])) == 0.0


def test_uniform_deviations():
    assert deviation_entropy(dev(*([0.3] * 8))) == pytest.approx(math.log(8), rel=1e-14)


def test_three_term_hand_value():
    assert deviation_entropy(dev(2, 1, 1, 0, 0)) == pytest.approx(0.8675, abs=1e-4)
    p = np.array([4, 1, 1]) / 6
    assert deviation_entropy(dev(2, 1, 1, 0, 0)) == pytest.approx(-np.sum(p * np.log(p)), rel=1e-14)


def test_amplitude_entropy_hand_value():
    assert amplitude_entropy(SpectralState([PI, PI / 2, 0.0])) == pytest.approx(0.5004, abs=1e-4)
    assert amplitude_entropy(SpectralState.fixed_point(12)) == pytest.approx(math.log(12), rel=1e-14)


def test_amplitude_entropy_undefined_for_zero_state():
    with pytest.raises(UndefinedError):
        amplitude_entropy(SpectralState(np.zeros(4)))


def test_zero_deviation_entropy_is_zero():
    assert deviation_entropy(SpectralState.fixed_point(5)) == 0.0


def test_tiny_deviations_do_not_underflow():
    assert deviation_entropy(np.array([1e-200, 1e-200])) == pytest.approx(math.log(2))


def test_multiplicity_matches_materialized_copies():
    w = np.array([0.5, 0.2, 0.05, 0.0])
    g = np.array([1, 3, 7, 2])
    copies = np.repeat(w, g)
    assert shannon_entropy(w, g) == pytest.approx(stats.entropy(copies), rel=1e-13)


# --- effective modes ---------------------------------------------------------


def test_effective_mode_counts():
    assert effective_mode_count(SpectralState.fixed_point(6)) == 0
    assert effective_mode_count(dev(1, 0.5, 1e-6), 1e-3) == 2


def test_effective_mode_count_rejects_bad_epsilon():
    with pytest.raises(InvalidArgumentError):
        effective_mode_count(dev(1.0), 0.0)


def test_effective_modes_nonincreasing_along_linear_flow():
    n = np.arange(17)
    a = (n + 1.0) ** 2
    s0 = SpectralState.from_deviations(0.5 * (1 + n) ** -1.0)
    counts = [effective_mode_count(linear_flow_state, 1e-3) for linear_flow_state in exact_trajectory(s0, a, np.linspace(0, 5, 60)).states]
    assert all(x >= y for x, y in zip(counts, counts[1:]))
    assert counts[0] == 17 and counts[-1] == 1


def test_entropy_report_fields():
    r = entropy_report(dev(0.1, 0.0, 0.002), epsilon=1e-3)
    assert r.effective_modes == 2
    assert r.epsilon == 1e-3
    assert r.deviation_entropy >= 0 and r.amplitude_entropy >= 0


def test_entropy_csv(tmp_path):
    traj = exact_trajectory(dev(0.3, 0.2, 0.1), [1.0, 2.0, 3.0], np.linspace(0, 1, 5))
    text = write_entropy_csv(traj, tmp_path / "e.csv").read_text()
    lines = text.strip("\n").split("\n")
    assert lines[0] == "tau,deviation_entropy,amplitude_entropy,effective_modes"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(deviation_entropy(dev(0.3, 0.2, 0.1)))


# --- late-time concentration -------------------------------------------------


def test_late_time_concentration():
    n_max = 12
    n = np.arange(n_max + 1)
    a = 1.0 + 0.5 * n
    d0 = np.cos(n + 0.3)
    tau_star = math.log(n_max * np.max(np.abs(d0)) / abs(d0[0])) / (a[1] - a[0]) + 5
    for tau in (tau_star, tau_star + 2):
        s = exact_trajectory(SpectralState.from_deviations(d0), a, [0.0, tau]).final
        assert deviation_entropy(s) <= 0.01
        p = s.deviations**2 / np.sum(s.deviations**2)
        assert p[0] > 0.99


# --- decay-rate fit ----------------------------------------------------------


def test_fit_uniform_rate():
    traj = exact_trajectory(dev(1, -2, 0.5), [2.0, 2.0, 2.0], np.linspace(0, 5, 200))
    assert fit_decay_rate(traj) == pytest.approx(2.0, abs=1e-6)


def test_fit_mixed_rates_picks_slowest():
    traj = exact_trajectory(dev(*np.ones(8)), np.arange(1, 9.0), np.linspace(0, 20, 400))
    assert fit_decay_rate(traj) == pytest.approx(1.0, abs=0.05)


def test_fit_truncates_at_underflow():
    times = np.linspace(0, 100, 201)
    traj = exact_trajectory(dev(1.0), [1.0], times)
    # beyond tau ~ 30 the norm sits below the floor and is dropped
    assert fit_decay_rate(traj) == pytest.approx(1.0, abs=1e-6)


def test_fit_needs_enough_points():
    traj = exact_trajectory(dev(1.0), [1.0], np.linspace(0, 1, 5))
    with pytest.raises(InsufficientDataError):
        fit_decay_rate(traj)


def test_fit_on_nonlinear_small_data_run():
    b = EigenBasis(n_max=10)
    a = (np.arange(11) + 1.0) ** 2
    d0 = np.arange(1, 12.0)
    s0 = SpectralState.from_deviations(0.1 * d0 / np.linalg.norm(d0))
    traj = evolve(s0, FlowParams(a, build_tensor(b, 0.01), dt=1e-3, t_end=8.0, record_every=20), "centered")
    assert fit_decay_rate(traj) >= 0.9 * a.min()


# --- scaling model -----------------------------------------------------------


def test_scaling_curve_matches_materialized_copies():
    d, beta, c = 3, 2.0, 1.0
    tau = 0.05
    n = np.arange(1, 40)
    dev2 = (n ** -beta * np.exp(-c * n**2 * tau)) ** 2
    copies = np.repeat(dev2, n ** (d - 1))
    ref = stats.entropy(copies)
    assert entropy_scaling_curve(d, beta, c, [tau], n_modes=39)[0] == pytest.approx(ref, rel=1e-12)


def test_scaling_curve_grows_as_tau_shrinks():
    S = entropy_scaling_curve(4, 2.5, 1.0, np.geomspace(1e-5, 1e-3, 12))
    assert np.all(np.diff(S) < 0)


def test_scaling_slope_increases_with_dimension():
    taus = np.geomspace(1e-5, 1e-3, 25)
    assert entropy_scaling_experiment(5, 3.0, 1.0, taus) > entropy_scaling_experiment(3, 2.0, 1.0, taus)


def test_scaling_slope_stays_below_half_dimension():
    # log-spread of the weighted distribution is at most d/2 log(1/tau)
    taus = np.geomspace(1e-5, 1e-3, 25)
    for d in (3, 4, 5):
        for beta in ((d - 1) / 2 + 0.05, (d + 1) / 2, d):
            assert 0 < entropy_scaling_experiment(d, beta, 1.0, taus) < d / 2


def test_scaling_rejects_beta_hypothesis():
    with pytest.raises(InvalidArgumentError):
        entropy_scaling_experiment(3, 0.5, 1.0, [1e-4, 1e-3])
    with pytest.raises(InvalidArgumentError):
        entropy_scaling_experiment(2, 2.0, 1.0, [1e-4, 1e-3])


# --- properties --------------------------------------------------------------

amplitudes = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=12)


@settings(max_examples=80, deadline=None)
@given(d=amplitudes)
def test_deviation_entropy_bounds(d):
    d = np.array(d)
    S = deviation_entropy(d + PI)
    support = np.count_nonzero(np.abs(d) > 0)
    assert S >= 0
    if support:
        assert S <= math.log(support) + 1e-12


@settings(max_examples=60, deadline=None)
@given(d=amplitudes, seed=st.integers(0, 2**32 - 1))
def test_entropies_permutation_invariant(d, seed):
    C = PI + np.array(d)
    perm = np.random.default_rng(seed).permutation(C.size)
    assert deviation_entropy(C[perm]) == pytest.approx(deviation_entropy(C), abs=1e-12)
    if np.any(C != 0):
        assert amplitude_entropy(C[perm]) == pytest.approx(amplitude_entropy(C), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(d=amplitudes, k=st.floats(1e-3, 1e3).flatmap(lambda x: st.sampled_from([x, -x])))
def test_entropies_scale_invariant(d, k):
    d = np.array(d)
    assume(np.any(np.abs(d) > 1e-6))
    assert deviation_entropy(PI + k * d) == pytest.approx(deviation_entropy(PI + d), abs=1e-9)
    assert amplitude_entropy(k * d) == pytest.approx(amplitude_entropy(d), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(w=st.lists(st.floats(0, 1e3), min_size=1, max_size=10), g=st.data())
def test_shannon_matches_scipy(w, g):
    w = np.array(w)
    mult = np.array(g.draw(st.lists(st.integers(1, 5), min_size=w.size, max_size=w.size)))
    assume(w.sum() > 0)
    assert shannon_entropy(w, mult) == pytest.approx(stats.entropy(np.repeat(w, mult)), abs=1e-10)
