"""
Nuclear-spin sensing with CPMG/XY-type sequences.

The nuclear spin precesses about ``n0 = z`` while the probe is in one
state and about the tilted axis ``n1`` in the other. One sequence block
(two pi-pulses) is the symmetric product ``R(theta/2) R(theta) R(theta/2)``
with the outer and inner rotations swapped between the two probe
manifolds, and ``theta = 2 * tau * omega_L``. The sensing signal is the
overlap of the two N-fold block propagators.

Deviations from the sensing peak (``delta``) are measured on the scale
``omega_L * tau``: a block at deviation ``delta`` has flip angle
``theta = pi + 2 * delta``, so ``delta / omega_L`` is directly the timing
offset of ``tau``.

All angular frequencies are in rad/s, all angles in radians. Counts named
``n_blocks`` are numbers of two-pulse blocks: CPMG-N has N blocks, XY8-N
has 4N and XY16-N has 8N.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import LinewidthUndefinedError, SingularModelError
from .su2 import compose3, overlap_signal, power

__all__ = [
    "SpinCoupling", "SequenceSpec", "Nitrogen14Model", "FAMILIES",
    "block_propagators", "signal_at_angle", "signal_at_deviation", "sensing_signal", "peak_signal",
    "exact_peak_signal", "lineshape_first_order", "first_order_valid",
    "linewidth", "linewidth_time_estimate", "nitrogen14_signal",
    "ExtrapolationWarning",
]

# blocks (pi-pulse pairs) per cycle and the phase of each pi pulse in a cycle
FAMILIES = {
    "CPMG": (1, ("X", "X")),
    "XY8": (4, ("X", "Y", "X", "Y", "Y", "X", "Y", "X")),
    # standard XY16: XY8 followed by its phase-inverted copy
    "XY16": (8, ("X", "Y", "X", "Y", "Y", "X", "Y", "X",
                 "-X", "-Y", "-X", "-Y", "-Y", "-X", "-Y", "-X")),
}


def _family(name):
    key = str(name).upper()
    if key not in FAMILIES:
        raise ValueError(f"unknown sequence family {name!r}; expected one of {sorted(FAMILIES)}")
    return key


class ExtrapolationWarning(UserWarning):
    """First-order lineshape evaluated outside its validity window."""


@dataclass(frozen=True)
class SpinCoupling:
    """Larmor frequency and hyperfine couplings of one nuclear spin (rad/s).

    ``A`` is the parallel coupling, ``B`` and ``C`` the transverse ones.
    """

    omega_L: float
    A: float = 0.0
    B: float = 0.0
    C: float = 0.0

    def __post_init__(self):
        if not self.omega_L > 0:
            raise ValueError(f"omega_L must be positive, got {self.omega_L!r}")

    @classmethod
    def from_tilt(cls, omega_L, alpha, A=0.0):
        """Coupling whose tilt angle is ``alpha`` (transverse part along x)."""
        return cls(omega_L, A, (omega_L + A) * np.tan(alpha), 0.0)

    @property
    def transverse(self):
        return float(np.hypot(self.B, self.C))

    @property
    def tilt(self):
        """Angle between the two precession axes."""
        return float(np.arctan2(self.transverse, self.omega_L + self.A))

    @property
    def azimuth(self):
        return float(np.arctan2(self.C, self.B))

    @property
    def eta(self):
        """Ratio of the precession rates in the two manifolds."""
        return float(np.hypot(1 + self.A / self.omega_L, self.transverse / self.omega_L))

    @property
    def tilted_axis(self):
        a, phi = self.tilt, self.azimuth
        return np.array([np.sin(a) * np.cos(phi), np.sin(a) * np.sin(phi), np.cos(a)])


@dataclass(frozen=True)
class SequenceSpec:
    """``n_cycles`` repetitions of a decoupling cycle with half-spacing ``tau``."""

    n_cycles: int
    tau: float
    family: str = "CPMG"

    def __post_init__(self):
        if int(self.n_cycles) != self.n_cycles or self.n_cycles < 1:
            raise ValueError(f"n_cycles must be a positive integer, got {self.n_cycles!r}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        object.__setattr__(self, "family", _family(self.family))

    @property
    def n_blocks(self):
        return FAMILIES[self.family][0] * int(self.n_cycles)

    @property
    def n_pulses(self):
        return 2 * self.n_blocks

    @property
    def total_time(self):
        return 2 * self.n_pulses * self.tau

    def theta(self, omega_L):
        return 2 * self.tau * omega_L


def block_propagators(c, theta, eta=None):
    """Single-block nuclear propagators in the two probe manifolds.

    Parameters
    ----------
    c : SpinCoupling
    theta : float
        ``2 * tau * omega_L``; the free precession angle over ``2 tau``.
    eta : float, optional
        Override of ``c.eta``. ``eta=1`` gives the weak-coupling model in
        which both manifolds precess at the same rate.

    Returns
    -------
    u0, u1 : Rotation
        ``R(theta/2, z) R(eta*theta, n1) R(theta/2, z)`` and
        ``R(eta*theta/2, n1) R(theta, z) R(eta*theta/2, n1)``.
    """
    eta = c.eta if eta is None else eta
    n0 = np.array([0.0, 0.0, 1.0])
    n1 = c.tilted_axis
    u0 = compose3(0.5 * theta, n0, eta * theta, n1)
    u1 = compose3(0.5 * eta * theta, n1, theta, n0)
    return u0, u1


def signal_at_angle(c, theta, n_blocks, eta=None):
    """Sensing signal of ``n_blocks`` blocks at precession angle ``theta``.

    ``theta`` may be an array; the result then has the same shape.
    """
    def one(t):
        u0, u1 = block_propagators(c, t, eta)
        return overlap_signal(power(u0, n_blocks), power(u1, n_blocks))

    if np.ndim(theta) == 0:
        return one(float(theta))
    return np.array([one(t) for t in np.ravel(theta)]).reshape(np.shape(theta))


def signal_at_deviation(c, delta, n_blocks, eta=None):
    """Signal at deviation ``delta`` from the peak (``theta = pi + 2 delta``)."""
    return signal_at_angle(c, np.pi + 2 * np.asarray(delta, dtype=float), n_blocks, eta)


def sensing_signal(c, s, eta=None):
    """Signal of sequence ``s`` for coupling ``c``, in [0, 1] (1 = no dip)."""
    return signal_at_angle(c, s.theta(c.omega_L), s.n_blocks, eta)


def peak_signal(alpha, n_blocks):
    """Weak-coupling signal at ``theta = pi``: ``1 - sin^2(N a) cos^2(a/2)``."""
    return 1.0 - np.sin(n_blocks * alpha) ** 2 * np.cos(0.5 * alpha) ** 2


def exact_peak_signal(alpha, eta, n_blocks):
    """Closed form of the signal at ``theta = pi`` for unequal rates ``eta``.

    Both block propagators then share the half-angle ``a~`` with
    ``cos(a~) = cos(alpha) sin(eta*pi/2)``, so that

    ``Tr/2 = cos^2(N a~) + sin^2(N a~)/sin^2(a~) * (v0 . v1)``

    where ``v0 . v1 = ce - (1 - ce) cos(alpha) [se sin^2(alpha) + ce cos(alpha)]``
    with ``ce, se = cos, sin(eta*pi/2)``. At ``eta = 1`` this reduces to
    :func:`peak_signal`.
    """
    ce = np.cos(0.5 * eta * np.pi)
    se = np.sin(0.5 * eta * np.pi)
    ca, sa = np.cos(alpha), np.sin(alpha)
    a_t = np.arccos(ca * se)
    dot = ce - (1 - ce) * ca * (se * sa ** 2 + ce * ca)
    n = n_blocks
    half_trace = np.cos(n * a_t) ** 2 + np.sin(n * a_t) ** 2 / np.sin(a_t) ** 2 * dot
    return 0.5 * (1.0 + half_trace)


def _alpha_prime(alpha, delta):
    s2 = np.sin(alpha) ** 2 + delta ** 2 * (1 + np.cos(alpha)) ** 2
    return np.arcsin(np.sqrt(np.minimum(s2, 1.0)))


def first_order_valid(c, n_blocks, delta):
    """Whether ``|delta|`` lies inside twice the first-order linewidth."""
    try:
        w, _ = linewidth(c, n_blocks)
    except LinewidthUndefinedError:
        return np.zeros(np.shape(delta), dtype=bool) if np.ndim(delta) else False
    return np.abs(delta) <= 2 * w


def lineshape_first_order(c, n_blocks, delta, warn=True):
    """Signal at deviation ``delta`` from the peak, to first order in delta.

    Includes the odd ``-2 delta sin^2(a)(1 + cos a)`` term responsible for
    the asymmetric sidelobes. Outside ``|delta| <= 2w`` the expansion is
    still evaluated but an :class:`ExtrapolationWarning` is issued.
    """
    a = c.tilt
    delta = np.asarray(delta, dtype=float)
    ap = _alpha_prime(a, delta)
    n = n_blocks
    ca = np.cos(a)
    bracket = (-np.sin(a) ** 2 * ca
               + delta ** 2 * ca * (1 + ca) ** 2
               - 2 * delta * np.sin(a) ** 2 * (1 + ca))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(ap > 0, np.sin(n * ap) ** 2 / np.sin(ap) ** 2, float(n) ** 2)
    half_trace = np.cos(n * ap) ** 2 + ratio * bracket
    if warn and not np.all(first_order_valid(c, n_blocks, delta)):
        warnings.warn("first-order lineshape evaluated outside |delta| <= 2w",
                      ExtrapolationWarning, stacklevel=2)
    out = 0.5 * (1.0 + half_trace)
    return float(out) if out.ndim == 0 else out


def linewidth(c, n_blocks):
    """First zero of the first-order lineshape.

    Returns
    -------
    w_angle : float
        ``sqrt(sin^2(pi/N) - sin^2 a) / (2 cos^2(a/2))``, a deviation angle.
    w_time : float
        ``w_angle / omega_L``.

    Raises
    ------
    LinewidthUndefinedError
        If ``sin(pi/N) <= sin(a)``: the contrast never returns to zero.
    """
    a = c.tilt
    gap = np.sin(np.pi / n_blocks) ** 2 - np.sin(a) ** 2
    if n_blocks < 2 or gap <= 0:
        raise LinewidthUndefinedError(
            f"linewidth undefined at N={n_blocks}: sin(pi/N) <= sin(alpha)")
    w = np.sqrt(gap) / (2 * np.cos(0.5 * a) ** 2)
    return float(w), float(w / c.omega_L)


def linewidth_time_estimate(c, n_blocks):
    """Small-tilt linewidth in time, ``sin(pi/N) / (sqrt(2) omega_L cos(a/2))``."""
    return float(np.sin(np.pi / n_blocks) / (np.sqrt(2) * c.omega_L * np.cos(0.5 * c.tilt)))


@dataclass(frozen=True)
class Nitrogen14Model:
    """Intrinsic 14N spin near the excited-state level anti-crossing.

    Fields are in gauss, frequencies in Hz (not rad/s) and gyromagnetic
    ratios in Hz/G. A transverse field ``Bperp`` mixes the probe states and
    produces an effective transverse hyperfine coupling.
    """

    Bz: float
    Bperp: float
    P: float = -4.95e6
    A_par: float = -2.16e6
    A_xx: float = -2.62e6
    D0: float = 2.87e9
    gamma_e: float = 2.8e6
    gamma_n: float = 0.31e3

    @property
    def detuning(self):
        """Probe transition frequency ``D0 - gamma_e Bz`` (Hz)."""
        return self.D0 - self.gamma_e * self.Bz

    @property
    def nuclear_frequency(self):
        """``P - A_par/2 - gamma_n Bz`` (Hz)."""
        return self.P - 0.5 * self.A_par - self.gamma_n * self.Bz

    @property
    def tilt(self):
        if self.detuning == 0:
            raise SingularModelError(f"level anti-crossing at Bz={self.Bz} G: detuning is zero")
        if self.nuclear_frequency == 0:
            raise SingularModelError("nuclear frequency vanishes")
        return float(np.arctan(self.gamma_e * self.Bperp * self.A_xx
                               / (self.detuning * self.nuclear_frequency)))

    def coupling(self):
        """Equivalent :class:`SpinCoupling` (rad/s) with the model's tilt."""
        omega = 2 * np.pi * abs(self.nuclear_frequency)
        return SpinCoupling.from_tilt(omega, abs(self.tilt))


def nitrogen14_signal(m, n_cycles, delta):
    """XY8-``n_cycles`` signal of the 14N model at deviation ``delta``."""
    return signal_at_deviation(m.coupling(), delta, FAMILIES["XY8"][0] * n_cycles)
