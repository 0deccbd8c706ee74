"""
Quantum-interpolation plans.

Hardware can only set the half-spacing ``tau`` on a grid ``tau_k = k dtau``.
An interpolation plan orders N blocks, each built either at ``tau_k`` (U0)
or at ``tau_{k+1}`` (U1), so that the product approximates N blocks at the
off-grid spacing ``tau_k + f dtau`` with ``f = q/(p+q)``.

Angles follow the deviation scale ``phi = omega_L * tau``: the grid step is
``dtheta = omega_L * dtau`` and a block at ``phi`` has flip angle
``theta = 2 phi`` (the sensing peak sits at ``phi = pi/2``).
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .errors import EnumerationRefusedError, InvalidFractionError
from .spin import block_propagators
from .su2 import (Rotation, compose, overlap_signal, power, quaternion_product,
                  trace_fidelity)

__all__ = [
    "InterpolationPlan", "HardwareGrid", "optimal_plan", "naive_plan",
    "bresenham_trace", "trapezium_error", "relative_trapezium_error",
    "supersampled_propagator", "plan_fidelity", "brute_force_best_plan",
    "bch_zeroth_order", "half_sample_infidelity", "interpolated_signal",
    "supersampled_sweep", "as_fraction", "MAX_BRUTE_FORCE_BLOCKS",
]

MAX_BRUTE_FORCE_BLOCKS = 12


def as_fraction(value):
    """Exact rational from a Fraction, int, ``"q/n"`` string or float."""
    if isinstance(value, Fraction):
        f = value
    elif isinstance(value, float):
        f = Fraction(value).limit_denominator(10 ** 6)
    else:
        try:
            f = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidFractionError(f"cannot read fraction {value!r}") from exc
    if not 0 <= f <= 1:
        raise InvalidFractionError(f"fraction must lie in [0, 1], got {f}")
    return f


def _check(fraction, n_blocks):
    f = as_fraction(fraction)
    if int(n_blocks) != n_blocks or n_blocks < 1:
        raise InvalidFractionError(f"n_blocks must be a positive integer, got {n_blocks!r}")
    if (f * n_blocks).denominator != 1:
        raise InvalidFractionError(
            f"fraction {f} is not realizable with {n_blocks} blocks (N*f must be integral)")
    return f, int(n_blocks)


@dataclass(frozen=True)
class InterpolationPlan:
    """Ordered word over {0, 1}; symbol 0 is U0, symbol 1 is U1."""

    word: tuple

    def __post_init__(self):
        word = tuple(int(s) for s in self.word)
        if not word:
            raise ValueError("a plan needs at least one block")
        if any(s not in (0, 1) for s in word):
            raise ValueError(f"plan symbols must be 0 or 1, got {self.word!r}")
        object.__setattr__(self, "word", word)

    @property
    def n_blocks(self):
        return len(self.word)

    @property
    def q(self):
        return sum(self.word)

    @property
    def p(self):
        return self.n_blocks - self.q

    @property
    def fraction(self):
        return Fraction(self.q, self.n_blocks)

    def to_string(self):
        return "".join(str(s) for s in self.word)

    @classmethod
    def from_string(cls, text):
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"plan string must be a nonempty word over 0/1, got {text!r}")
        return cls(tuple(int(ch) for ch in text))

    def header(self):
        return {"p": self.p, "q": self.q, "N": self.n_blocks, "word": self.to_string()}

    def __str__(self):
        return self.to_string()


@dataclass(frozen=True)
class HardwareGrid:
    """Timing grid ``tau_j = j * delta_tau`` and offset ``delta0`` (radians).

    Sample ``j`` sits at deviation angle ``phi_j = j * omega_L * delta_tau +
    delta0``; U0 uses ``j = k`` and U1 uses ``j = k + 1``.
    """

    delta_tau: float
    k: int
    delta0: float = 0.0

    def __post_init__(self):
        if not self.delta_tau > 0:
            raise ValueError(f"delta_tau must be positive, got {self.delta_tau!r}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")

    @classmethod
    def from_angle(cls, dtheta, k, omega_L, delta0=0.0):
        """Grid whose angular step ``omega_L * delta_tau`` equals ``dtheta``."""
        return cls(dtheta / omega_L, k, delta0)

    @property
    def tau_k(self):
        return self.k * self.delta_tau

    def dtheta(self, omega_L):
        return omega_L * self.delta_tau

    def phi(self, position, omega_L):
        """Deviation angle at fractional grid position ``k + position``."""
        return (self.k + float(position)) * self.dtheta(omega_L) + self.delta0

    def with_offset(self, delta0):
        return HardwareGrid(self.delta_tau, self.k, delta0)


def bresenham_trace(fraction):
    """Symbols and accumulator values of the optimal construction.

    Runs ``m += f``; ``|m| <= 1/2`` appends U0, otherwise U1 with ``m -= 1``,
    until ``m`` returns to zero. Ties at exactly one half go to U0.

    Returns
    -------
    symbols : list of int
        One period of the word.
    accumulator : list of Fraction
        ``m`` after each symbol; every entry has ``|m| <= 1/2``.
    """
    f = as_fraction(fraction)
    symbols, acc = [], []
    m = Fraction(0)
    while True:
        m += f
        if abs(m) <= Fraction(1, 2):
            symbols.append(0)
        else:
            symbols.append(1)
            m -= 1
        acc.append(m)
        if m == 0:
            break
    return symbols, acc


def optimal_plan(fraction, n_blocks):
    """Error-minimizing ordering of U0 and U1 for ``fraction`` over N blocks."""
    f, n = _check(fraction, n_blocks)
    period, _ = bresenham_trace(f)
    reps = -(-n // len(period))
    return InterpolationPlan(tuple((period * reps)[:n]))


def naive_plan(fraction, n_blocks, period=None):
    """``(U0^p U1^q)`` repeated; the plain product construction.

    Parameters
    ----------
    period : int, optional
        Length ``p + q`` of the repeated unit. Defaults to the reduced
        denominator of ``fraction``; ``period=n_blocks`` gives the fully
        grouped word ``U0^(N-q) U1^q``.
    """
    f, n = _check(fraction, n_blocks)
    period = f.denominator if period is None else int(period)
    if period < 1 or n % period or (f * period).denominator != 1:
        raise InvalidFractionError(
            f"period {period} incompatible with fraction {f} and N={n}")
    q = int(f * period)
    unit = [0] * (period - q) + [1] * q
    return InterpolationPlan(tuple(unit * (n // period)))


def _deviations(plan, delta_tau):
    """Cumulative end-of-block timing deviations from the ideal sequence.

    Each block lasts ``4 tau``; relative to the ideal spacing
    ``tau_k + f delta_tau`` block ``j`` ends displaced by
    ``4 delta_tau (q_j - j f)``.
    """
    f = plan.fraction
    out, q = [0.0], 0
    for j, s in enumerate(plan.word, start=1):
        q += s
        out.append(float(4 * (q - j * f)) * delta_tau)
    return out


def trapezium_error(plan, grid):
    """Summed pulse-position error of ``plan`` against the ideal filter (s).

    For block ``j`` with entry/exit displacements ``a = D_{j-1}`` and
    ``b = D_j`` the two pulse centres move by ``3a/4 + b/4`` and
    ``a/4 + 3b/4``; the block error is the sum of their magnitudes.
    """
    d = _deviations(plan, grid.delta_tau)
    return float(sum(abs(0.75 * a + 0.25 * b) + abs(0.25 * a + 0.75 * b)
                     for a, b in zip(d[:-1], d[1:])))


def relative_trapezium_error(plan, grid):
    """Trapezium error divided by the ideal total sequence time."""
    tau_star = grid.tau_k + float(plan.fraction) * grid.delta_tau
    return trapezium_error(plan, grid) / (4 * plan.n_blocks * tau_star)


def supersampled_propagator(plan, u0, u1):
    """Matrix product of the word's blocks, first symbol leftmost."""
    blocks = (u0, u1)
    out = blocks[plan.word[0]]
    for s in plan.word[1:]:
        out = compose(out, blocks[s])
    return out


def _manifold_blocks(coupling, grid, position, eta=None):
    theta = 2 * grid.phi(position, coupling.omega_L)
    return block_propagators(coupling, theta, eta)


def plan_fidelity(plan, grid, coupling, eta=None):
    """Worst-manifold trace fidelity of the plan against its ideal target.

    The target is N blocks at ``phi* = (k + f) dtheta + delta0``.
    """
    a0, a1 = _manifold_blocks(coupling, grid, 0, eta)
    b0, b1 = _manifold_blocks(coupling, grid, 1, eta)
    t0, t1 = _manifold_blocks(coupling, grid, plan.fraction, eta)
    n = plan.n_blocks
    fid0 = trace_fidelity(supersampled_propagator(plan, a0, b0), power(t0, n))
    fid1 = trace_fidelity(supersampled_propagator(plan, a1, b1), power(t1, n))
    return min(fid0, fid1)


def interpolated_signal(plan, grid, coupling, eta=None):
    """Sensing signal produced by the interpolated sequence in both manifolds."""
    a0, a1 = _manifold_blocks(coupling, grid, 0, eta)
    b0, b1 = _manifold_blocks(coupling, grid, 1, eta)
    return overlap_signal(supersampled_propagator(plan, a0, b0),
                          supersampled_propagator(plan, a1, b1))


def supersampled_sweep(coupling, tau_start, tau_stop, delta_tau, n_blocks, eta=None):
    """Signal at every supersample ``(k + j/N) delta_tau`` in a tau window.

    Each point uses the optimal plan for ``j/N`` on the hardware grid, so the
    effective sampling step is ``delta_tau / N``.

    Returns
    -------
    taus : ndarray
        Effective half-spacings (s), ascending.
    signal : ndarray
    words : list of str
        Plan word used at each point.
    """
    if not 0 < tau_start < tau_stop:
        raise ValueError("need 0 < tau_start < tau_stop")
    k0 = max(1, int(np.floor(tau_start / delta_tau)))
    k1 = int(np.ceil(tau_stop / delta_tau))
    plans = [optimal_plan(Fraction(j, n_blocks), n_blocks) for j in range(n_blocks)]
    taus, sig, words = [], [], []
    for k in range(k0, k1 + 1):
        grid = HardwareGrid(delta_tau, k)
        for j, plan in enumerate(plans):
            tau = (k + j / n_blocks) * delta_tau
            if tau_start <= tau <= tau_stop:
                taus.append(tau)
                sig.append(interpolated_signal(plan, grid, coupling, eta))
                words.append(plan.to_string())
    return np.array(taus), np.array(sig), words


def half_sample_infidelity(coupling, dtheta, n_pairs=1, eta=None):
    """Infidelity of ``[U(pi - dtheta) U(pi + dtheta)]^n`` against ``U(pi)^(2n)``.

    ``dtheta`` is the grid step on the deviation scale, so the two blocks
    sit half a step either side of the peak. The worst NV manifold counts.
    """
    grid = HardwareGrid.from_angle(dtheta, 1, coupling.omega_L,
                                   delta0=0.5 * np.pi - 1.5 * dtheta)
    return 1.0 - plan_fidelity(InterpolationPlan((0, 1) * n_pairs), grid, coupling, eta)


def _word_quaternions(words, qa, qb):
    """Quaternion products of many words at once (``words``: int array)."""
    table = np.stack([qa, qb])
    out = table[words[:, 0]]
    for j in range(1, words.shape[1]):
        out = quaternion_product(out, table[words[:, j]])
    return out


def brute_force_best_plan(fraction, n_blocks, grid, coupling, n_offsets=9,
                          atol=1e-12, eta=None):
    """Score every ordering with the plan's symbol counts.

    Each word is scored by its infidelity ``1 - plan_fidelity`` averaged over
    ``n_offsets`` offsets spanning ``grid.delta0 +- 2 dtheta`` (a single
    offset means ``grid.delta0`` itself).

    Returns
    -------
    best : list of InterpolationPlan
        All words within ``atol`` of the minimal mean infidelity.
    table : dict
        Maps each word string to its mean infidelity.

    Raises
    ------
    EnumerationRefusedError
        For ``n_blocks`` above ``MAX_BRUTE_FORCE_BLOCKS``.
    """
    f, n = _check(fraction, n_blocks)
    if n > MAX_BRUTE_FORCE_BLOCKS:
        raise EnumerationRefusedError(
            f"refusing to enumerate {n} blocks (limit {MAX_BRUTE_FORCE_BLOCKS})")
    q = int(f * n)
    words = np.zeros((comb(n, q), n), dtype=int)
    for row, ones in enumerate(combinations(range(n), q)):
        words[row, list(ones)] = 1

    dtheta = grid.dtheta(coupling.omega_L)
    scores = np.zeros(len(words))
    offsets = np.linspace(-2 * dtheta, 2 * dtheta, n_offsets) if n_offsets > 1 else np.zeros(1)
    for d0 in grid.delta0 + offsets:
        g = grid.with_offset(d0)
        worst = np.ones(len(words))
        for manifold in (0, 1):
            qa = _manifold_blocks(coupling, g, 0, eta)[manifold].quaternion
            qb = _manifold_blocks(coupling, g, 1, eta)[manifold].quaternion
            qt = power(_manifold_blocks(coupling, g, f, eta)[manifold], n).quaternion
            fid = np.minimum(1.0, np.abs(_word_quaternions(words, qa, qb) @ qt))
            worst = np.minimum(worst, fid)
        scores += 1.0 - worst
    scores /= n_offsets

    best_score = scores.min()
    best = [InterpolationPlan(tuple(w)) for w, s in zip(words, scores)
            if s <= best_score + atol]
    table = {"".join(map(str, w)): float(s) for w, s in zip(words, scores)}
    return best, table


def bch_zeroth_order(coupling, dtheta, n_blocks):
    """Zeroth-order BCH estimate of ``[U(pi + dtheta/2) U(pi - dtheta/2)]^(N/2)``.

    Only the leading flip angle ``N a' cos(dtheta/2) sin(a)/sin(a')`` is
    kept (``a'`` from the first-order lineshape at ``delta = dtheta/2``), so
    all commutator terms are dropped. The axis is the one of the first
    manifold's block at the peak, where the estimate is exact.
    """
    a = coupling.tilt
    d = 0.5 * dtheta
    sin_ap = np.sqrt(min(1.0, np.sin(a) ** 2 + d ** 2 * (1 + np.cos(a)) ** 2))
    if sin_ap == 0.0:
        return Rotation.identity()
    ap = np.arcsin(sin_ap)
    angle = n_blocks * ap * np.cos(d) * np.sin(a) / sin_ap
    peak, _ = block_propagators(coupling, np.pi, eta=1.0)
    axis = np.asarray(peak.axis)
    if peak.theta > np.pi:
        axis = -axis
    return Rotation(2 * angle, axis)
