"""Acceptance criteria C1 to C11.

Each test prints one ``[PASS]`` or ``[FAIL]`` line through the ``verdict``
fixture; the lines are repeated in the pytest terminal summary.
"""
import subprocess
import sys
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

from qinterp.filters import (dual_tone_sweep, is_resolved, q_extrapolate, q_metrics,
                             sampling_limits, significant_minima)
from qinterp.planner import (HardwareGrid, brute_force_best_plan, half_sample_infidelity,
                             optimal_plan, trapezium_error)
from qinterp.reference import instrument_rows, proton_frequency, significant
from qinterp.spin import (SpinCoupling, lineshape_first_order, linewidth,
                          linewidth_time_estimate, peak_signal, signal_at_angle,
                          signal_at_deviation)

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2


def hamiltonian_signal(alpha, theta, n):
    """Signal from explicit spin-1/2 Hamiltonians and matrix exponentials.

    With ``omega_L = 1`` the half-spacing is ``tau = theta/2``, the free
    Hamiltonian is ``H0 = Iz`` in one probe manifold and
    ``H1 = Iz + tan(alpha) Ix`` in the other, and a CPMG block is
    ``tau - pi - 2 tau - pi - tau``.
    """
    tau = 0.5 * theta
    h0, h1 = SZ, SZ + np.tan(alpha) * SX
    e0h, e0 = expm(-1j * tau * h0), expm(-2j * tau * h0)
    e1h, e1 = expm(-1j * tau * h1), expm(-2j * tau * h1)
    # the probe flips between manifolds at each pi pulse
    m0 = e0h @ e1 @ e0h
    m1 = e1h @ e0 @ e1h
    u0 = np.linalg.matrix_power(m0, n)
    u1 = np.linalg.matrix_power(m1, n)
    return 0.5 * (1 + 0.5 * np.trace(u0 @ u1.conj().T).real)


def test_c1_oracle_equivalence(verdict):
    rng = np.random.default_rng(20261015)
    worst = 0.0
    for _ in range(1000):
        alpha = rng.uniform(0, 0.3)
        theta = rng.uniform(0, 2 * np.pi)
        n = int(rng.integers(1, 21))
        c = SpinCoupling.from_tilt(1.0, alpha)
        got = signal_at_angle(c, theta, n)
        worst = max(worst, abs(got - hamiltonian_signal(alpha, theta, n)))
    verdict("C1", worst < 1e-9, f"oracle equivalence: max |dS| = {worst:.2e} over 1000 cases (< 1e-9)")


def test_c2_peak_signal(verdict):
    worst = 0.0
    for alpha in np.linspace(0.0, 0.3, 16):
        c = SpinCoupling.from_tilt(1.0, alpha)
        for n in range(1, 51):
            worst = max(worst, abs(signal_at_angle(c, np.pi, n, eta=1.0) - peak_signal(alpha, n)))
    verdict("C2", worst < 1e-9, f"peak signal 1 - sin^2(Na)cos^2(a/2): max |dS| = {worst:.2e} (< 1e-9)")


def test_c3_second_order_scaling(verdict):
    c = SpinCoupling.from_tilt(1.0, 0.1)
    dts = np.geomspace(np.pi / 200, np.pi / 20, 10)
    inf = np.array([half_sample_infidelity(c, d) for d in dts])
    slope = np.polyfit(np.log(dts), np.log(inf), 1)[0]
    verdict("C3", abs(slope - 2.0) <= 0.15, f"half-sample infidelity log-log slope = {slope:.3f} (2.0 +- 0.15)")


def test_c4_optimality_certification(verdict):
    c = SpinCoupling.from_tilt(1.0, 0.1)
    dtheta, k = np.pi / 20, 10
    # U0 sits on the peak, offsets then span [-2 dtheta, 2 dtheta] around it
    grid = HardwareGrid.from_angle(dtheta, k, 1.0, np.pi / 2 - k * dtheta)
    misses = []
    for j in range(10):
        plan = optimal_plan(Fraction(j, 9), 9)
        best, _ = brute_force_best_plan(plan.fraction, 9, grid, c, n_offsets=9)
        if plan not in best:
            misses.append(f"{j}/9")
    detail = "all 10 fractions j/9 in the brute-force minimal set" if not misses else f"missed {misses}"
    verdict("C4", not misses, f"optimality certification N=9: {detail}")


def test_c5_error_uniformity(verdict):
    grid = HardwareGrid(1.0, 25)
    half = trapezium_error(optimal_plan("1/2", 16), grid)
    worst16 = max(trapezium_error(optimal_plan(Fraction(j, 16), 16), grid) for j in range(17))
    ok = worst16 <= half + 1e-12
    ratios = []
    for kk in range(1, 6):
        n = 2 ** kk
        bound = 2 ** (kk - 1) * 4 * grid.delta_tau
        worst = max(trapezium_error(optimal_plan(Fraction(j, n), n), grid) for j in range(n + 1))
        ratios.append(worst / bound)
        ok = ok and worst <= bound + 1e-12
    verdict("C5", ok, f"N=16 max error {worst16:g} vs half {half:g}; dyadic error/bound max {max(ratios):.3f}")


def test_c6_linewidth_law(verdict):
    c = SpinCoupling.from_tilt(1.0, 0.02)
    ns = (8, 16, 32, 64)
    products = np.array([linewidth_time_estimate(c, n) * n for n in ns])
    drift = products.max() / products.min() - 1
    exact = np.array([linewidth(c, n)[1] * n for n in ns])
    exact_drift = exact.max() / exact.min() - 1
    verdict("C6", drift < 0.03,
            f"w_time*N drift {100 * drift:.2f}% (< 3%); first-zero form drifts {100 * exact_drift:.1f}%")


def test_c7_published_numbers(verdict):
    c = SpinCoupling.from_tilt(2 * np.pi * proton_frequency(0.5), 0.05)
    lim = sampling_limits(c, 1e-9, 1e-3)
    checks = {
        "N_max": abs(lim.n_max_exact - 12) <= 1,
        "dtau_req": abs(lim.delta_tau_required / 15.83e-12 - 1) <= 0.02,
    }
    q_bare = q_metrics(5e6, 1e-9, 1e-3, 2 * np.pi * 5e6).q_bare
    checks["Q_bare"] = abs(q_bare - 100) < 1e-9
    q_ss = q_extrapolate(1000.0, 115.2e-6, 1e-3, 2 * np.pi * 5e6)
    checks["Q_supersample"] = abs(q_ss / 8680 - 1) <= 0.02
    rows = instrument_rows()
    checks["table"] = all(significant(r["q_bare_computed"]) == significant(r["q_bare_published"])
                          for r in rows)
    failed = [k for k, ok in checks.items() if not ok]
    table = ", ".join(f"{r['q_bare_computed']:.2f}" for r in rows)
    detail = (f"N_max={lim.n_max_exact:.2f}, dtau_req={lim.delta_tau_required * 1e12:.2f} ps "
              f"(target 15.83), Q_bare={q_bare:g}, Q_ss={q_ss:.1f}, table=[{table}]")
    if failed:
        detail += f"; failing: {', '.join(failed)}"
    verdict("C7", not failed, f"published numbers: {detail}")


def test_c8_dual_tone(verdict):
    _, y128 = dual_tone_sweep(2.5e6, 6.2e3, 128)
    _, y672 = dual_tone_sweep(2.5e6, 6.2e3, 672)
    n128, n672 = len(significant_minima(y128)), len(significant_minima(y672))
    ok = not is_resolved(y128) and is_resolved(y672) and n672 == 2
    verdict("C8", ok, f"6.2 kHz dual tone: {n128} minimum at N=128, {n672} minima at N=672")


def test_c9_contrast_growth(verdict):
    alpha = 0.01
    ns = np.arange(2, 31)  # N alpha <= 0.3
    c = SpinCoupling.from_tilt(1.0, alpha)
    contrast = np.array([1 - signal_at_angle(c, np.pi, int(n)) for n in ns])
    slope = np.polyfit(np.log(ns), np.log(contrast), 1)[0]
    verdict("C9", abs(slope - 2.0) <= 0.05, f"(1 - S) vs N exponent = {slope:.3f} (2.00 +- 0.05)")


def test_c10_lineshape_asymmetry(verdict):
    alpha, n, d = 0.1, 10, 0.05
    c = SpinCoupling.from_tilt(1.0, alpha)
    exact_asym = signal_at_deviation(c, d, n) - signal_at_deviation(c, -d, n)
    # sign of the odd term -2 delta sin^2(a)(1 + cos a) at delta > 0
    linear_sign = np.sign(-2 * d * np.sin(alpha) ** 2 * (1 + np.cos(alpha)))
    w, _ = linewidth(c, n)
    grid = np.linspace(-0.5 * w, 0.5 * w, 201)
    err = np.max(np.abs(lineshape_first_order(c, n, grid) - signal_at_deviation(c, grid, n, eta=1.0)))
    ok = exact_asym != 0 and np.sign(exact_asym) == linear_sign and err < 0.02
    verdict("C10", ok, f"S(+d)-S(-d) = {exact_asym:.2e} (sign {int(linear_sign)}); "
                       f"first-order vs exact max |dS| = {err:.2e} inside |d| <= w/2")


CONFIGS = {
    "plan": "fraction = 3/8\nn_cycles = 8\nfamily = XY8\ndelta_tau_ns = 1\ntau_k_ns = 100\n"
            "larmor_mhz = 2.5\ntilt_rad = 0.05\n",
    "simulate": "model = spin\nlarmor_mhz = 1\ntilt_rad = 0.1\nn_cycles = 10\n"
                "delta_min = -0.2\ndelta_max = 0.2\nn_points = 41\n",
    "certify": "n_blocks = 6\ntilt_rad = 0.1\ndtheta_rad = 0.15707963267948966\nk = 10\n",
    "qvalue": "f_mhz = 5\ndelta_tau_ns = 1\nt2_ms = 1\nlarmor_mhz = 5\nreference = true\n",
}


def test_c11_determinism(verdict, tmp_path):
    mismatched = []
    for command, text in CONFIGS.items():
        cfg = tmp_path / f"{command}.cfg"
        cfg.write_text(text)
        for fmt in ("csv", "json"):
            outs = []
            for run in (0, 1):
                dest = tmp_path / f"{command}-{fmt}-{run}"
                res = subprocess.run([sys.executable, "-m", "qinterp", command, "--config", str(cfg),
                                      "--format", fmt, "--out", str(dest)],
                                     capture_output=True, text=True, check=False)
                assert res.returncode == 0, res.stderr
                outs.append(dest.read_bytes())
            if outs[0] != outs[1]:
                mismatched.append(f"{command}/{fmt}")
    detail = "8 command/format pairs byte-identical" if not mismatched else f"differ: {mismatched}"
    verdict("C11", not mismatched, f"determinism: {detail}")
