"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``)."""

import math
from dataclasses import replace

import numpy as np
import pytest

from cavityheat import chain, cli
from cavityheat.closedform import (
    current_general,
    current_resonant_with_atom,
    peak_rate,
    rectification,
)
from cavityheat.fockspace import FockConfig, g2_zero, oracle_currents, steady_rho, thermal_fidelity
from cavityheat.model import ArraySystem, AtomSpec, ReservoirSpec, TwoCavitySystem
from cavityheat.moments import currents_from_moments, steady_state


def two_cavity(omega_right=1.0, coupling=0.02, chi=0.05, sigma_z=1.0,
               gamma_left=0.064, gamma_right=0.064, nbar_left=0.5, nbar_right=0.0, atom=True):
    return TwoCavitySystem(
        omega_left=1.0,
        omega_right=omega_right,
        coupling=coupling,
        left=ReservoirSpec(gamma_left, nbar_left),
        right=ReservoirSpec(gamma_right, nbar_right),
        atom=AtomSpec(dispersive_strength=chi, sigma_z=sigma_z) if atom else None,
    )


def chain_template(chi, sigma_z=-1.0):
    atom = AtomSpec(dispersive_strength=chi, sigma_z=sigma_z, host_index=2) if chi else None
    return ArraySystem(
        n_sites=2,
        omega=1.0,
        coupling=0.05,
        left=ReservoirSpec(0.15, 0.5),
        right=ReservoirSpec(0.15, 0.0),
        atom=atom,
    )


def moments_current(system):
    return currents_from_moments(system, steady_state(system))


def rel_dev(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0


def report(number, passed, text):
    print(f"[criterion {number:02d}] {'PASS' if passed else 'FAIL'}: {text}")
    return passed


def test_criterion_01_peak_current_condition(tmp_path):
    out = tmp_path / "gamma.csv"
    spec = cli.SweepSpec(
        experiment="gamma_sweep",
        params={
            "coupling": "0.02", "chi": "0.05", "sigma_z": "1.0",
            "nbar_left": "0.5", "nbar_right": "0.0",
            "sweep_start": "0.03", "sweep_stop": "0.1", "sweep_step": "0.001",
        },
        output=out,
    )
    rows = cli.run_experiment(spec)
    values = np.array([row["value"] for row in rows])
    currents = np.array([row["i_left"] for row in rows])
    peak = peak_rate(two_cavity(gamma_left=1.0, gamma_right=1.0))
    argmax_ok = abs(values[np.argmax(currents)] - peak) <= 0.001

    expected = 0.02**2 * (1.0 + 0.05 / 2) * 0.5 / math.sqrt(4 * 0.02**2 + 0.05**2)
    at_peak = two_cavity(gamma_left=peak, gamma_right=peak)
    dev_analytic = rel_dev(current_resonant_with_atom(at_peak), expected)
    dev_general = rel_dev(current_general(at_peak).i_left, expected)
    dev_moments = rel_dev(moments_current(at_peak).i_left, expected)
    oracle = oracle_currents(at_peak, steady_rho(at_peak, FockConfig(n_max=16)))
    dev_oracle = rel_dev(oracle.i_left, expected)

    passed = (
        argmax_ok
        and peak == pytest.approx(0.06403, abs=5e-6)
        and dev_analytic < 1e-10
        and dev_general < 1e-10
        and dev_moments < 1e-10
        and dev_oracle < 1e-6
    )
    report(1, passed, (
        f"argmax at {values[np.argmax(currents)]:.4f} (target {peak:.5f}), peak current deviations: "
        f"analytic {dev_analytic:.1e}, moments {dev_moments:.1e}, oracle {dev_oracle:.1e}"
    ))
    assert argmax_ok
    assert dev_analytic < 1e-10 and dev_general < 1e-10 and dev_moments < 1e-10
    assert dev_oracle < 1e-6


def test_criterion_02_thermal_switch_insulation():
    blocked = two_cavity(
        omega_right=0.8, coupling=0.05, chi=1.1, sigma_z=-1.0, gamma_left=0.1, gamma_right=0.03
    )
    i_analytic = current_general(blocked).i_left
    i_moments = moments_current(blocked).i_left
    cfg = FockConfig(n_max=12, tail_bound=1e-6)
    i_oracle = oracle_currents(blocked, steady_rho(blocked, cfg)).i_left
    conducting = replace(blocked, atom=replace(blocked.atom, sigma_z=1.0))
    i_flipped = current_general(conducting).i_left
    i_flipped_moments = moments_current(conducting).i_left

    passed = (
        abs(i_analytic) < 1e-12
        and abs(i_moments) < 1e-12
        and abs(i_oracle) < 1e-6
        and i_flipped > 0
        and i_flipped_moments > 0
    )
    report(2, passed, (
        f"blocked currents: analytic {i_analytic:.1e}, moments {i_moments:.1e}, "
        f"oracle {i_oracle:.1e}; excited-state current {i_flipped:.3e}"
    ))
    assert abs(i_analytic) < 1e-12
    assert abs(i_moments) < 1e-12
    assert abs(i_oracle) < 1e-6
    assert i_flipped > 0 and i_flipped_moments > 0


def test_criterion_03_current_reversal(tmp_path):
    params = {
        "coupling": "0.05", "omega_right": "0.8", "chi": "0.9", "sigma_z": "-1.0",
        "gamma_left": "0.1", "gamma_right": "0.03",
        "nbar_left": "0.5", "nbar_right": "0.0",
        "sweep_start": "0.9", "sweep_stop": "1.3", "sweep_step": "0.005",
    }
    rows = cli.run_experiment(
        cli.SweepSpec("chi_sweep", params, tmp_path / "chi.csv")
    )
    values = np.array([row["value"] for row in rows])
    currents = np.array([row["i_left"] for row in rows])
    crossings = np.nonzero(np.diff(np.sign(currents)))[0]
    crossing_ok = len(crossings) == 1 and abs(values[crossings[0]] - 1.1) <= 0.005 + 1e-12
    negative_past = np.all(currents[values > 1.1 + 0.005] < 0)

    inset = cli.run_experiment(
        cli.SweepSpec("chi_sweep", dict(params, sigma_z="1.0"), tmp_path / "chi_up.csv")
    )
    always_positive = np.all(np.array([row["i_left"] for row in inset]) > 0)

    passed = crossing_ok and negative_past and always_positive
    report(3, passed, (
        f"zero crossing bracketed at chi = {values[crossings[0]] if len(crossings) else float('nan'):.3f} "
        f"(target 1.1); reversed beyond it: {bool(negative_past)}; excited state all positive: {bool(always_positive)}"
    ))
    assert crossing_ok and negative_past and always_positive


def test_criterion_04_coherence_decomposition(tmp_path):
    params = {
        "coupling": "0.05", "chi": "1.0", "sigma_z": "-1.0",
        "gamma_left": "0.1", "gamma_right": "0.03",
        "nbar_left": "0.5", "nbar_right": "0.0",
        "sweep_start": "1.0", "sweep_stop": "1.6", "sweep_step": "0.005",
    }
    rows = cli.run_experiment(
        cli.SweepSpec("current_decomposition", params, tmp_path / "decomp.csv")
    )
    values = np.array([row["value"] for row in rows])
    i_left = np.array([row["i_left"] for row in rows])
    i_occ = np.array([row["i_occupation"] for row in rows])
    i_coh = np.array([row["i_coherence"] for row in rows])
    identity_gap = np.max(np.abs(i_left - 0.1 * (i_occ - i_coh)))

    current_cross = np.nonzero(np.diff(np.sign(i_left)))[0]
    parts_cross = np.nonzero(np.diff(np.sign(i_occ - i_coh)))[0]
    crossings_ok = (
        len(current_cross) == 1
        and len(parts_cross) == 1
        and abs(values[current_cross[0]] - values[parts_cross[0]]) <= 0.005 + 1e-12
    )

    passed = identity_gap < 1e-12 and crossings_ok
    report(4, passed, (
        f"max |I_L - Gamma_L(I_nd - I_coh)| = {identity_gap:.1e}; current zero and "
        f"decomposition crossing coincide: {bool(crossings_ok)}"
    ))
    assert identity_gap < 1e-12
    assert crossings_ok


def test_criterion_05_rectification():
    equal_rates = two_cavity(coupling=0.05, chi=1.5, sigma_z=-1.0, gamma_left=0.2, gamma_right=0.2)
    r_equal = rectification(equal_rates).ratio
    matched = two_cavity(
        omega_right=1.5, coupling=0.05, chi=0.5, sigma_z=-1.0, gamma_left=0.1, gamma_right=0.03
    )
    r_matched = rectification(matched).ratio

    def r_at(gamma_left):
        system = two_cavity(
            coupling=0.05, chi=1.5, sigma_z=-1.0, gamma_left=gamma_left, gamma_right=0.2
        )
        return rectification(system).ratio

    window = [r_at(g) for g in (0.099, 0.0995, 0.1005, 0.101)]
    window_ok = all(abs(r) > 100 for r in window)
    sign_flip = r_at(0.099) < 0 < r_at(0.101)
    divergent = rectification(
        two_cavity(coupling=0.05, chi=1.5, sigma_z=-1.0, gamma_left=0.1, gamma_right=0.2)
    )

    passed = (
        abs(r_equal - 1.0) < 1e-12
        and abs(r_matched - 1.0) < 1e-12
        and window_ok
        and sign_flip
        and divergent.divergent
    )
    report(5, passed, (
        f"R(equal rates) = {r_equal}, R(matched frequencies) = {r_matched}, "
        f"|R| in the divergence window: {[f'{r:.0f}' for r in window]}, sign change: {bool(sign_flip)}"
    ))
    assert abs(r_equal - 1.0) < 1e-12
    assert abs(r_matched - 1.0) < 1e-12
    assert window_ok and sign_flip
    assert divergent.divergent and math.isinf(divergent.ratio)


def test_criterion_06_array_ballistic_baseline():
    template = chain_template(chi=0.0)
    baseline = chain.ballistic_current(template)
    worst_current_gap = 0.0
    worst_real_part = 0.0
    for n in range(2, 11):
        system = replace(template, n_sites=n)
        g = chain.steady_state_matrix(system)
        worst_current_gap = max(worst_current_gap, abs(chain.array_current(system, g) - baseline))
        field = g.field_block
        worst_real_part = max(
            worst_real_part, max(abs(field[j, j + 1].real) for j in range(n - 1))
        )
    passed = (
        baseline == pytest.approx(0.0115385, abs=5e-8)
        and worst_current_gap < 1e-8
        and worst_real_part < 1e-10
    )
    report(6, passed, (
        f"I(N) - I0 within {worst_current_gap:.1e} of zero for N = 2..10 "
        f"(I0 = {baseline:.7f}); max |Re <a_j+ a_j+1>| = {worst_real_part:.1e}"
    ))
    assert worst_current_gap < 1e-8
    assert worst_real_part < 1e-10


def test_criterion_07_array_size_dependence():
    scans = {
        chi: chain.size_scan(chain_template(chi=chi), range(2, 11)) for chi in (0.1, 0.15)
    }
    decreasing_ok, saturation_ok = True, True
    for points in scans.values():
        ratios = [p.ratio for p in points]
        decreasing_ok &= all(b < a for a, b in zip(ratios[:4], ratios[1:5]))
        increments = np.abs(np.diff([p.current for p in points]))
        # increments indexed from N=3; saturation applies beyond N=6
        beyond = increments[4:]
        saturation_ok &= bool(np.all(np.diff(beyond) < 0))
    ordering_ok = all(
        strong.ratio < weak.ratio for weak, strong in zip(scans[0.1], scans[0.15])
    )
    passed = decreasing_ok and saturation_ok and ordering_ok
    report(7, passed, (
        f"ratios strictly decreasing for N=2..6: {bool(decreasing_ok)}; increments shrink beyond N=6: "
        f"{bool(saturation_ok)}; chi=0.15 curve below chi=0.1: {bool(ordering_ok)}"
    ))
    assert decreasing_ok and saturation_ok and ordering_ok


def test_criterion_08_occupation_profiles():
    profiles = {}
    for n in (6, 12):
        template = chain_template(chi=0.1)
        system = replace(template, n_sites=n, atom=replace(template.atom, host_index=n))
        profiles[n] = chain.occupation_profile(system, chain.steady_state_matrix(system))
    interior6 = profiles[6][1:-1]
    interior12 = profiles[12][1:-1]
    monotone = bool(np.all(np.diff(interior6) < 0))
    drop6 = interior6[0] - interior6[-1]
    drop12 = interior12[0] - interior12[-1]
    passed = monotone and drop6 > 10 * drop12
    report(8, passed, (
        f"N=6 interior strictly monotone: {monotone}; interior drop N=6 = {drop6:.4e} "
        f"vs 10x N=12 = {10 * drop12:.4e}"
    ))
    assert monotone
    assert drop6 > 10 * drop12, (
        "the total interior occupation drop is size-independent "
        f"({drop6:.4e} at N=6 vs {drop12:.4e} at N=12); only the per-bond interior "
        "gradient collapses with N (see tests/test_chain.py::test_interior_gradient_collapses_for_longer_chain)"
    )


def test_criterion_09_equilibrium_diagnostics():
    system = two_cavity(
        coupling=0.05, gamma_left=0.15, gamma_right=0.15, nbar_left=0.5, nbar_right=0.5, atom=False
    )
    rho = steady_rho(system, FockConfig(n_max=16))
    fidelity_left = thermal_fidelity(rho.reduced_left(), 0.5)
    fidelity_right = thermal_fidelity(rho.reduced_right(), 0.5)
    g2_left = g2_zero(rho.reduced_left())
    g2_right = g2_zero(rho.reduced_right())
    passed = (
        fidelity_left > 1 - 1e-6
        and fidelity_right > 1 - 1e-6
        and abs(g2_left - 2.0) < 1e-3
        and abs(g2_right - 2.0) < 1e-3
    )
    report(9, passed, (
        f"fidelities ({fidelity_left:.8f}, {fidelity_right:.8f}); "
        f"g2 ({g2_left:.5f}, {g2_right:.5f})"
    ))
    assert fidelity_left > 1 - 1e-6 and fidelity_right > 1 - 1e-6
    assert abs(g2_left - 2.0) < 1e-3 and abs(g2_right - 2.0) < 1e-3


def test_criterion_10_three_path_equivalence():
    rng = np.random.default_rng(2026)
    worst_closed_moments = 0.0
    worst_moments_fock = 0.0
    worst_balance = 0.0
    for _ in range(50):
        with_atom = rng.random() < 0.75
        system = two_cavity(
            omega_right=rng.uniform(0.8, 1.2),
            coupling=rng.uniform(0.03, 0.08),
            chi=rng.uniform(0.0, 0.5) if with_atom else 0.0,
            sigma_z=float(rng.choice([-1.0, 1.0])) if with_atom else 0.0,
            gamma_left=rng.uniform(0.05, 0.2),
            gamma_right=rng.uniform(0.05, 0.2),
            nbar_left=rng.uniform(0.3, 0.5),
            nbar_right=rng.uniform(0.0, 0.2),
            atom=with_atom,
        )
        closed = current_general(system)
        from_moments = moments_current(system)
        from_oracle = oracle_currents(system, steady_rho(system, FockConfig(n_max=16)))
        worst_closed_moments = max(worst_closed_moments, rel_dev(closed.i_left, from_moments.i_left))
        worst_moments_fock = max(worst_moments_fock, rel_dev(from_moments.i_left, from_oracle.i_left))
        worst_balance = max(
            worst_balance,
            abs(closed.i_left + closed.i_right),
            abs(from_moments.i_left + from_moments.i_right),
            abs(from_oracle.i_left + from_oracle.i_right),
        )
    passed = worst_closed_moments < 1e-10 and worst_moments_fock < 1e-6 and worst_balance < 1e-10
    report(10, passed, (
        f"50-point grid: closedform-vs-moments {worst_closed_moments:.1e} (tol 1e-10), "
        f"moments-vs-oracle {worst_moments_fock:.1e} (tol 1e-6), |I_L + I_R| {worst_balance:.1e} (tol 1e-10)"
    ))
    assert worst_closed_moments < 1e-10
    assert worst_moments_fock < 1e-6
    assert worst_balance < 1e-10
