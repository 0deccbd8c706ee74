"""
Resolving two close tones
=========================

Two AC tones 6.2 kHz apart near 2.5 MHz sit inside one filter passband for
a short pulse train. Lengthening the train narrows the passband until the
sweep shows two separate dips. The smallest resolvable separation then
gives a Q value that grows linearly with the pulse count.
"""
import numpy as np

from qinterp.filters import dual_tone_sweep, is_resolved, min_resolvable_separation, significant_minima

f0 = 2.5e6
for n in (128, 256, 512, 672):
    s, y = dual_tone_sweep(f0, 6.2e3, n)
    mins = significant_minima(y)
    print(f"N = {n:4d}: {len(mins)} dip(s), resolved = {is_resolved(y)}")

###############################################################################
# Q = f0 / (smallest separation). A uniform train has a main lobe of width
# about f0 pi / (2N), so Q should be close to 2N/pi.

print("\n   N   Q      Q / (2N/pi)")
for n in (64, 128, 256):
    q = f0 / min_resolvable_separation(f0, n)
    print(f"{n:4d}  {q:6.1f}  {q / (2 * n / np.pi):.3f}")
