"""
Supersampling a proton sensing dip
==================================

A 1 ns timing grid is too coarse to trace the dip of a proton at 0.5 T once
the sequence is long. Interleaving the two nearest hardware blocks fills in
N samples per grid step. This script compares the bare grid with the
interpolated sweep and prints a small text plot.
"""
import numpy as np

from qinterp import SpinCoupling, linewidth, supersampled_sweep
from qinterp.reference import proton_frequency
from qinterp.spin import signal_at_angle

f_L = proton_frequency(0.5)
c = SpinCoupling.from_tilt(2 * np.pi * f_L, 0.05)
n_blocks = 12
delta_tau = 1e-9

# The dip sits where 2 tau omega_L = pi, i.e. tau = 1 / (4 f_L)
tau0 = 0.25 / f_L
w_angle, w_time = linewidth(c, n_blocks)
print(f"proton Larmor frequency   {f_L / 1e6:.3f} MHz")
print(f"dip position              {tau0 * 1e9:.3f} ns")
print(f"first-order half width    {w_time * 1e12:.1f} ps")

###############################################################################
# Bare grid: only whole nanoseconds are available.

taus_bare = np.arange(np.floor(tau0 / delta_tau) - 1, np.ceil(tau0 / delta_tau) + 2) * delta_tau
bare = [signal_at_angle(c, 2 * t * c.omega_L, n_blocks) for t in taus_bare]

###############################################################################
# Interpolated sweep: N supersamples per grid step, each the optimal word
# for its fraction.

taus, sig, words = supersampled_sweep(c, taus_bare[0], taus_bare[-1], delta_tau, n_blocks)

print("\n tau (ns)   signal   word")
for t, s, w in zip(taus, sig, words):
    bar = "#" * int(round(40 * (1 - s)))
    print(f"{t * 1e9:9.4f}  {s:7.4f}  {w}  {bar}")

print("\nbare grid minimum        ", f"{taus_bare[np.argmin(bare)] * 1e9:.4f} ns")
print("supersampled minimum     ", f"{taus[np.argmin(sig)] * 1e9:.4f} ns")
