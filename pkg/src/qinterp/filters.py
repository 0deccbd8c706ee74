"""
Semiclassical filter functions for AC magnetometry.

In the toggling frame every pi pulse flips the sign of the probe's coupling
to a classical field, so a pulse train is a +-1 modulation ``f(t)``. The
probe coherence decays as ``exp(-chi)`` with

    chi = sqrt(2 pi) |b|^2 / 2 * integral |F(w)|^2 S(w) dw,

where ``F(w) = integral f(t) exp(-i w t) dt`` is evaluated exactly, segment by
segment. The module also holds the Q-value figures of merit and the
finite-sampling limits, and the helpers that read dips out of sweeps.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import IntegrationError, UndefinedQError
from .spin import _family

__all__ = [
    "TimeFilter", "NoiseSpectrum", "QReport", "SamplingLimits",
    "uniform_filter", "filter_from_plan", "ideal_filter", "filter_difference_area",
    "frequency_response", "power_response", "main_lobe_fwhm", "coherence_decay",
    "ac_sweep", "interpolated_ac_sweep", "q_metrics", "q_from_linewidth",
    "q_extrapolate", "sampling_limits", "contrast_loss", "max_contrast",
    "find_minima", "significant_minima", "is_resolved", "fit_gaussian_dip",
    "CHI_PREFACTOR", "dual_tone_sweep", "min_resolvable_separation",
]

CHI_PREFACTOR = np.sqrt(2 * np.pi) / 2
_FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


@dataclass(frozen=True)
class TimeFilter:
    """Piecewise-constant +-1 modulation on ``[0, total_time]``."""

    switch_times: tuple
    total_time: float
    initial_sign: int = 1

    def __post_init__(self):
        t = np.asarray(self.switch_times, dtype=float).ravel()
        if not self.total_time > 0:
            raise ValueError(f"total_time must be positive, got {self.total_time!r}")
        if t.size and (np.any(np.diff(t) <= 0) or t[0] <= 0 or t[-1] >= self.total_time):
            raise ValueError("switch times must be strictly increasing inside (0, T)")
        if self.initial_sign not in (1, -1):
            raise ValueError(f"initial_sign must be +1 or -1, got {self.initial_sign!r}")
        object.__setattr__(self, "switch_times", tuple(float(x) for x in t))
        object.__setattr__(self, "total_time", float(self.total_time))

    @property
    def n_switches(self):
        return len(self.switch_times)

    @property
    def edges(self):
        return np.concatenate([[0.0], self.switch_times, [self.total_time]])

    @property
    def signs(self):
        n = self.n_switches + 1
        return self.initial_sign * (-1.0) ** np.arange(n)

    def __call__(self, t):
        """Value of ``f`` at times ``t`` (zero outside ``[0, T]``)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.switch_times, t, side="right")
        val = self.initial_sign * (-1.0) ** idx
        return np.where((t >= 0) & (t <= self.total_time), val, 0.0)

    def spacings(self):
        return np.diff(self.switch_times)


def uniform_filter(n_pulses, tau):
    """CPMG-type filter: pulses at ``tau, 3 tau, ...``; ``T = 2 n_pulses tau``."""
    if n_pulses < 1 or int(n_pulses) != n_pulses:
        raise ValueError(f"n_pulses must be a positive integer, got {n_pulses!r}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return TimeFilter(tuple((2 * np.arange(n_pulses) + 1) * tau), 2 * n_pulses * tau)


def _block_filter(taus):
    taus = np.asarray(taus, dtype=float)
    starts = np.concatenate([[0.0], np.cumsum(4 * taus)[:-1]])
    pulses = np.column_stack([starts + taus, starts + 3 * taus]).ravel()
    return TimeFilter(tuple(pulses), float(np.sum(4 * taus)))


def filter_from_plan(plan, grid, family="CPMG"):
    """Filter of the interpolated sequence.

    Each symbol is one two-pulse block ``tau - pi - 2 tau - pi - tau`` with
    ``tau = tau_k`` for U0 and ``tau_{k+1}`` for U1. The pulse phases of the
    family do not change ``f(t)``; the family is only validated.
    """
    _family(family)
    taus = [grid.tau_k + s * grid.delta_tau for s in plan.word]
    return _block_filter(taus)


def ideal_filter(plan, grid):
    """Uniform target filter at the off-grid spacing ``tau_k + f dtau``."""
    tau = grid.tau_k + float(plan.fraction) * grid.delta_tau
    return _block_filter([tau] * plan.n_blocks)


def filter_difference_area(a, b):
    """``integral |f_a - f_b| dt`` over the union of both supports (s)."""
    edges = np.unique(np.concatenate([a.edges, b.edges]))
    mid = 0.5 * (edges[1:] + edges[:-1])
    return float(np.sum(np.abs(a(mid) - b(mid)) * np.diff(edges)))


def frequency_response(tf, omega):
    """Exact ``F(w) = integral_0^T f(t) exp(-i w t) dt``.

    Each constant segment ``[t0, t1]`` contributes
    ``s (t1 - t0) exp(-i w (t0 + t1)/2) sinc(w (t1 - t0) / 2 pi)``.
    """
    omega = np.asarray(omega, dtype=float)
    edges = tf.edges
    lengths = np.diff(edges)
    mids = 0.5 * (edges[1:] + edges[:-1])
    w = omega.reshape(-1, 1)
    terms = tf.signs * lengths * np.exp(-1j * w * mids) * np.sinc(w * lengths / (2 * np.pi))
    return terms.sum(axis=1).reshape(omega.shape)


def power_response(tf, omega):
    """``|F(w)|^2``."""
    return np.abs(frequency_response(tf, omega)) ** 2


def main_lobe_fwhm(tf, omega_peak):
    """Full width at half maximum of ``|F|^2`` around ``omega_peak`` (rad/s).

    The half-maximum crossings are bracketed inside one first-zero width
    ``2 pi / T`` of the peak and refined with Brent's method.
    """
    peak = float(power_response(tf, omega_peak))
    half = lambda w: float(power_response(tf, w)) - 0.5 * peak
    span = 2 * np.pi / tf.total_time
    lo = optimize.brentq(half, omega_peak - span, omega_peak, xtol=1e-12 * omega_peak)
    hi = optimize.brentq(half, omega_peak, omega_peak + span, xtol=1e-12 * omega_peak)
    return hi - lo


@dataclass(frozen=True)
class NoiseSpectrum:
    """Classical field spectrum ``S(w)``, even in ``w``.

    Either a set of tones (frequencies in Hz, powers, Gaussian FWHM in Hz;
    zero FWHM means a delta line) or a table of ``(w, S)`` samples with
    ``w >= 0`` in rad/s, linearly interpolated and zero outside.
    A tone of power ``A`` at ``f`` contributes
    ``A/2 [g(w - 2 pi f) + g(w + 2 pi f)]`` with ``g`` unit-area.
    """

    frequencies: tuple = ()
    amplitudes: tuple = ()
    fwhm: tuple = ()
    table: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.table is not None:
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or len(tab) < 2:
                raise ValueError("table must be an (n >= 2, 2) array of (omega, S)")
            if not np.all(np.isfinite(tab)):
                raise IntegrationError("tabulated spectrum contains non-finite values")
            if np.any(tab[:, 1] < 0) or np.any(tab[:, 0] < 0):
                raise ValueError("tabulated spectrum needs omega >= 0 and S >= 0")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ValueError("tabulated omega must be strictly increasing")
            object.__setattr__(self, "table", tuple(map(tuple, tab)))
            return
        f = tuple(float(x) for x in np.atleast_1d(self.frequencies))
        a = tuple(float(x) for x in np.atleast_1d(self.amplitudes))
        w = tuple(float(x) for x in np.atleast_1d(self.fwhm)) if len(np.atleast_1d(self.fwhm)) else (0.0,) * len(f)
        if not (len(f) == len(a) == len(w)):
            raise ValueError("frequencies, amplitudes and fwhm must have equal length")
        if any(x < 0 for x in a) or any(x < 0 for x in w) or any(x <= 0 for x in f):
            raise ValueError("tones need positive frequency and non-negative power and width")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "fwhm", w)

    @classmethod
    def tones(cls, frequencies, amplitudes, fwhm=None):
        f = np.atleast_1d(frequencies)
        return cls(tuple(f), tuple(np.atleast_1d(amplitudes)),
                   tuple(np.zeros(len(f)) if fwhm is None else np.atleast_1d(fwhm)))

    @classmethod
    def zero(cls):
        return cls((), (), ())

    @classmethod
    def load(cls, path):
        """Read a two-column ``omega S`` text file; '#' starts a comment."""
        data = np.loadtxt(path, comments="#", ndmin=2)
        return cls(table=data)

    @property
    def is_table(self):
        return self.table is not None

    def __call__(self, omega):
        omega = np.abs(np.asarray(omega, dtype=float))
        if self.is_table:
            tab = np.asarray(self.table)
            return np.interp(omega, tab[:, 0], tab[:, 1], left=0.0, right=0.0)
        out = np.zeros_like(omega)
        for f, a, fw in zip(self.frequencies, self.amplitudes, self.fwhm):
            if fw == 0:
                continue  # delta lines carry no density
            sig = 2 * np.pi * fw * _FWHM_TO_SIGMA
            out += 0.5 * a * np.exp(-0.5 * ((omega - 2 * np.pi * f) / sig) ** 2) / (sig * np.sqrt(2 * np.pi))
        return out


def _overlap(tf, ns, rtol=1e-9):
    """``integral |F|^2 S dw`` over the whole real line."""
    total = 0.0
    if ns.is_table:
        tab = np.asarray(ns.table)
        # resolve |F|^2, which varies on the scale 2 pi / T
        step = 2 * np.pi / tf.total_time / 16
        n = int(np.ceil((tab[-1, 0] - tab[0, 0]) / step)) + 1
        if n > 2_000_000:
            raise IntegrationError("tabulated spectrum too wide for the filter's resolution")
        grid = np.union1d(np.linspace(tab[0, 0], tab[-1, 0], max(n, 2)), tab[:, 0])
        vals = power_response(tf, grid) * ns(grid)
        total = 2.0 * integrate.trapezoid(vals, grid)
    else:
        for f, a, fw in zip(ns.frequencies, ns.amplitudes, ns.fwhm):
            w0 = 2 * np.pi * f
            if a == 0:
                continue
            if fw == 0:
                total += a * float(power_response(tf, w0))
                continue
            sig = 2 * np.pi * fw * _FWHM_TO_SIGMA
            line = NoiseSpectrum.tones([f], [a], [fw])
            g = lambda w: float(power_response(tf, w) * line(w))
            lo, hi = w0 - 10 * sig, w0 + 10 * sig
            pts = np.linspace(lo, hi, 41)[1:-1]
            val, err = integrate.quad(g, lo, hi, points=pts, limit=2000,
                                      epsabs=0.0, epsrel=rtol)
            if not np.isfinite(val) or err > 1e-6 * max(abs(val), 1e-300):
                raise IntegrationError(f"overlap integral did not converge (err={err:.3g})")
            total += 2.0 * val  # the mirror line at -w0 has the same weight
    if not np.isfinite(total):
        raise IntegrationError("overlap integral is not finite")
    return total


def coherence_decay(tf, ns, b=1.0):
    """Decay exponent ``chi >= 0``; the probe signal is ``exp(-chi)``."""
    return CHI_PREFACTOR * abs(b) ** 2 * _overlap(tf, ns)


def ac_sweep(spacings, n_pulses, ns, b=1.0):
    """Signal ``exp(-chi)`` of uniform filters with pulse spacing ``2 tau``.

    Parameters
    ----------
    spacings : array
        Inter-pulse spacings ``2 tau`` (s).
    n_pulses : int
    ns : NoiseSpectrum
    """
    spacings = np.asarray(spacings, dtype=float)
    return np.array([np.exp(-coherence_decay(uniform_filter(n_pulses, 0.5 * s), ns, b))
                     for s in spacings])


def interpolated_ac_sweep(tau_start, tau_stop, n_blocks, delta_tau, ns, b=1.0):
    """Sweep through every supersample ``(k + j/N) delta_tau`` with optimal plans.

    Returns
    -------
    taus : array
        Effective half-spacings (s).
    signal : array
    """
    from .planner import HardwareGrid, optimal_plan  # local: planner imports spin only

    k0 = int(np.floor(tau_start / delta_tau))
    k1 = int(np.ceil(tau_stop / delta_tau))
    taus, sig = [], []
    for k in range(max(k0, 1), k1):
        grid = HardwareGrid(delta_tau, k)
        for j in range(n_blocks):
            tau = (k + j / n_blocks) * delta_tau
            if tau < tau_start or tau > tau_stop:
                continue
            tf = filter_from_plan(optimal_plan(f"{j}/{n_blocks}", n_blocks), grid)
            taus.append(tau)
            sig.append(np.exp(-coherence_decay(tf, ns, b)))
    return np.array(taus), np.array(sig)


# -- Q value ----------------------------------------------------------------

@dataclass(frozen=True)
class QReport:
    f: float
    delta_f: float
    q_bare: float
    q_supersample: float
    q_boost: float

    def as_dict(self):
        return {"f": self.f, "delta_f": self.delta_f, "q_bare": self.q_bare,
                "q_supersample": self.q_supersample, "q_boost": self.q_boost}


def q_from_linewidth(w_time, f):
    """``Q = 1 / (2 w f)`` for a dip of half-width ``w_time`` at frequency ``f``."""
    return 1.0 / (2.0 * w_time * f)


def _ss_argument(T2, omega_L):
    arg = 2 * np.pi ** 2 / (T2 * omega_L)
    if arg >= np.pi:
        raise UndefinedQError(
            f"T2*omega_L = {T2 * omega_L:.3g} is below 2*pi: fewer than one cycle fits in T2")
    return arg


def q_metrics(f, delta_tau, T2, omega_L, alpha=0.0):
    """Bare, supersampled and boost Q values.

    ``q_bare = 1/(2 f dtau)`` is the hardware limit and
    ``q_supersample = sqrt(2) cos(alpha/2) / sin(2 pi^2 / (T2 omega_L))`` is
    the linewidth limit at total time ``T2``.
    """
    for name, val in (("f", f), ("delta_tau", delta_tau), ("T2", T2), ("omega_L", omega_L)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val!r}")
    q_bare = 1.0 / (2.0 * f * delta_tau)
    q_ss = np.sqrt(2) * np.cos(0.5 * alpha) / np.sin(_ss_argument(T2, omega_L))
    return QReport(f=float(f), delta_f=float(f / q_ss), q_bare=float(q_bare),
                   q_supersample=float(q_ss), q_boost=float(q_ss / q_bare))


def q_extrapolate(q_measured, t_measured, T2, omega_L):
    """Carry a measured Q at total time ``t_measured`` to total time ``T2``.

    Scales by the ratio of the supersampled Q at the two times, so only the
    ``sin(2 pi^2 / (T omega_L))`` dependence of the closed form enters.
    """
    return float(q_measured * np.sin(_ss_argument(t_measured, omega_L))
                 / np.sin(_ss_argument(T2, omega_L)))


# -- finite sampling --------------------------------------------------------

def contrast_loss(alpha, n_blocks, delta0):
    """Contrast lost by sampling ``delta0`` away from the peak:
    ``(N alpha)^2 delta0^2 (2 - alpha^2/2)^2 / 4``."""
    return 0.25 * (n_blocks * alpha) ** 2 * np.asarray(delta0) ** 2 * (2 - 0.5 * alpha ** 2) ** 2


def max_contrast(alpha, delta0):
    """Largest attainable contrast at a sampling offset ``delta0``."""
    s2 = np.sin(alpha) ** 2
    d2 = np.asarray(delta0) ** 2 * (1 + np.cos(alpha)) ** 2
    return 1 + np.cos(alpha) * (s2 - d2) / (s2 + d2)


@dataclass(frozen=True)
class SamplingLimits:
    n_max: int
    n_max_exact: float
    delta_tau_required: float
    alpha: float

    def contrast_loss(self, delta0, n_blocks):
        return contrast_loss(self.alpha, n_blocks, delta0)


def sampling_limits(c, delta_tau, T2):
    """Finite-sampling limits for coupling ``c``.

    ``n_max = pi / sqrt((omega_L dtau)^2 (1 + cos a)^2 + sin^2 a)`` is the
    last cycle count whose linewidth still exceeds one grid step, and
    ``dtau_req = sin(2 pi^2/(T2 omega_L)) / (2 sqrt(2) omega_L cos(a/2))`` the
    timing resolution needed to sample the narrowest dip at ``T = T2``.
    """
    a, wl = c.tilt, c.omega_L
    n_exact = np.pi / np.sqrt((wl * delta_tau) ** 2 * (1 + np.cos(a)) ** 2 + np.sin(a) ** 2)
    req = np.sin(_ss_argument(T2, wl)) / (2 * np.sqrt(2) * wl * np.cos(0.5 * a))
    return SamplingLimits(int(round(n_exact)), float(n_exact), float(req), a)


# -- reading sweeps ---------------------------------------------------------

def find_minima(y):
    """Indices of interior local minima; a flat bottom reports its centre."""
    y = np.asarray(y, dtype=float)
    out, i, n = [], 1, len(y)
    while i < n - 1:
        if y[i] < y[i - 1]:
            j = i
            while j < n - 1 and y[j + 1] == y[i]:
                j += 1
            if j < n - 1 and y[j + 1] > y[i]:
                out.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return out


def significant_minima(y, rel_depth=0.5):
    """Minima at least ``rel_depth`` as deep as the deepest one.

    Depth is measured from the sweep maximum.
    """
    y = np.asarray(y, dtype=float)
    mins = find_minima(y)
    if not mins:
        return []
    depth = y.max() - y[mins]
    return [m for m, d in zip(mins, depth) if d >= rel_depth * depth.max() and d > 0]


def is_resolved(y, noise_floor=None, rel_depth=0.5):
    """Two significant minima separated by a clear maximum.

    The maximum between neighbouring significant minima must exceed both by
    at least three times ``noise_floor``. The default floor is
    ``1e-9 * (max - min)``, a margin above double-precision roundoff in
    the filter sums.
    """
    y = np.asarray(y, dtype=float)
    if noise_floor is None:
        noise_floor = 1e-9 * (y.max() - y.min())
    mins = significant_minima(y, rel_depth)
    for a, b in zip(mins[:-1], mins[1:]):
        peak = y[a:b + 1].max()
        if peak - max(y[a], y[b]) >= 3 * noise_floor:
            return True
    return False


def fit_gaussian_dip(x, y, window=None):
    """Least-squares Gaussian fit ``base - depth exp(-(x-x0)^2 / 2 s^2)``.

    Parameters
    ----------
    window : float, optional
        Only points within ``window`` of the deepest sample are fitted.

    Returns
    -------
    dict with ``center``, ``sigma``, ``fwhm``, ``depth``, ``baseline``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i0 = int(np.argmin(y))
    if window is not None:
        keep = np.abs(x - x[i0]) <= window
        x, y = x[keep], y[keep]
    base0 = float(y.max())
    depth0 = base0 - float(y.min())
    below = x[y < base0 - 0.5 * depth0]
    sig0 = max((below.max() - below.min()) / 2.355, np.min(np.diff(x))) if below.size else np.ptp(x) / 4

    def model(t, x0, s, d, base):
        return base - d * np.exp(-0.5 * ((t - x0) / s) ** 2)

    popt, _ = optimize.curve_fit(model, x, y, p0=[x[np.argmin(y)], sig0, depth0, base0], maxfev=20000)
    x0, s, d, base = popt
    return {"center": float(x0), "sigma": float(abs(s)), "fwhm": float(2.3548200450309493 * abs(s)),
            "depth": float(d), "baseline": float(base)}


# -- dual-tone resolution ---------------------------------------------------

def dual_tone_sweep(f0, separation, n_pulses, n_points=401, span=3.0, b=None):
    """Ideal sweep of two equal delta tones at ``f0 -+ separation/2``.

    The spacing window is ``s0 (1 -+ span / n_pulses)`` around the dip
    ``s0 = 1 / (2 f0)``, i.e. ``span`` main-lobe widths either side. With
    ``b=None`` the coupling is chosen so that ``chi`` is about 1 at the dip.

    Returns
    -------
    spacings : ndarray
        Pulse spacings ``2 tau`` (s).
    signal : ndarray
    """
    s0 = 0.5 / f0
    spacings = s0 * np.linspace(1 - span / n_pulses, 1 + span / n_pulses, n_points)
    if b is None:
        T = n_pulses * s0
        b = np.sqrt(1.0 / (CHI_PREFACTOR * 2 * T ** 2))
    ns = NoiseSpectrum.tones([f0 - 0.5 * separation, f0 + 0.5 * separation], [1.0, 1.0])
    return spacings, ac_sweep(spacings, n_pulses, ns, b)


def min_resolvable_separation(f0, n_pulses, lo=None, hi=None, rtol=1e-3, **kwargs):
    """Smallest tone separation (Hz) that :func:`is_resolved` accepts.

    Bisection between an unresolved ``lo`` and a resolved ``hi``, which
    default to a quarter and twice the main-lobe scale ``f0 / n_pulses``.
    """
    lo = 0.25 * f0 / n_pulses if lo is None else lo
    hi = 2.0 * f0 / n_pulses if hi is None else hi
    res = lambda s: is_resolved(dual_tone_sweep(f0, s, n_pulses, **kwargs)[1])
    if res(lo) or not res(hi):
        raise ValueError("need an unresolved lower and a resolved upper separation")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if res(mid):
            hi = mid
        else:
            lo = mid
    return hi
