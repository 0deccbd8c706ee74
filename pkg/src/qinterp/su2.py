r"""
Axis-angle algebra of single-spin rotations.

A rotation is :math:`e^{i\phi} R(\theta, \hat n)` with
:math:`R(\theta, \hat n) = \exp(-i\theta\,\hat n\cdot\vec\sigma/2)`. The
global phase :math:`\phi` is bookkept but never enters a comparison.
Composition runs on unit quaternions :math:`(\cos\frac\theta2,
\sin\frac\theta2\,\hat n)`; dense 2x2 matrices (:func:`rotation_matrix`,
:func:`matrix_signal`) are kept only as an independent check of that path.

Canonical form: ``theta`` in [0, 2*pi) with the sign of the SU(2) element
moved into ``phase``; at ``theta == pi`` the axis is made lexicographically
positive. Every operation is exact on the SU(2) element, so
``to_matrix`` of any result is the true matrix product.
"""
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import expm

__all__ = [
    "Rotation", "compose", "compose3", "power", "overlap_signal",
    "trace_fidelity", "equivalent", "rotation_matrix", "matrix_signal",
    "quaternion_product", "IDENTITY_TOL",
]

IDENTITY_TOL = 1e-12
_TWO_PI = 2 * np.pi

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
Z_AXIS = (0.0, 0.0, 1.0)


def _wrap_phase(phase):
    return float(np.angle(np.exp(1j * phase)))


def _lex_positive(axis):
    for c in axis:
        if c != 0.0:
            return c > 0.0
    return True


@dataclass(frozen=True)
class Rotation:
    """SU(2) rotation by ``theta`` about unit ``axis`` times ``exp(i*phase)``.

    Parameters
    ----------
    theta : float
        Flip angle in radians. Any real value is accepted and reduced to
        [0, 2*pi); a reduction by 2*pi flips the SU(2) sign, which is
        absorbed into ``phase``.
    axis : sequence of 3 floats
        Rotation axis; renormalized on construction.
    phase : float
        Global phase, wrapped to (-pi, pi].
    """

    theta: float
    axis: tuple = Z_AXIS
    phase: float = 0.0

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        norm = np.linalg.norm(axis)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError(f"rotation axis must be a nonzero finite vector, got {self.axis!r}")
        axis = axis / norm
        theta = float(self.theta) % (2 * _TWO_PI)
        phase = float(self.phase)
        if theta >= _TWO_PI:
            theta -= _TWO_PI
            phase += np.pi
        if theta >= _TWO_PI:  # roundoff right below 4*pi: R(4 pi) is the identity
            theta = 0.0
            phase += np.pi
        if theta == np.pi and not _lex_positive(axis):
            axis = -axis
            phase += np.pi
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "axis", tuple(float(c) for c in axis))
        object.__setattr__(self, "phase", _wrap_phase(phase))

    @classmethod
    def identity(cls):
        return cls(0.0, Z_AXIS, 0.0)

    @classmethod
    def from_quaternion(cls, q, phase=0.0):
        """Build from ``(w, x, y, z)`` meaning ``w*1 - i*(x, y, z).sigma``."""
        q = np.asarray(q, dtype=float)
        q = q / np.linalg.norm(q)
        w, v = q[0], q[1:]
        s = np.linalg.norm(v)
        if s < IDENTITY_TOL:
            return cls(0.0, Z_AXIS, phase + (np.pi if w < 0 else 0.0))
        return cls(2.0 * np.arctan2(s, w), v / s, phase)

    @classmethod
    def from_matrix(cls, m):
        """Recover a rotation from a 2x2 unitary (any global phase)."""
        m = np.asarray(m, dtype=complex)
        phase = 0.5 * np.angle(np.linalg.det(m))
        u = m * np.exp(-1j * phase)
        w = 0.5 * np.trace(u).real
        v = [-0.5 * np.trace(p @ u).imag for p in PAULI]
        return cls.from_quaternion([w, *v], phase)

    @property
    def quaternion(self):
        """SU(2) part as ``(cos(theta/2), sin(theta/2) * axis)``."""
        half = 0.5 * self.theta
        return np.array([np.cos(half), *(np.sin(half) * np.asarray(self.axis))])

    def to_matrix(self):
        w, x, y, z = self.quaternion
        su2 = np.array([[w - 1j * z, -1j * x - y],
                        [-1j * x + y, w + 1j * z]])
        return np.exp(1j * self.phase) * su2

    def inverse(self):
        return Rotation(-self.theta, self.axis, -self.phase)

    def __matmul__(self, other):
        return compose(self, other)


def quaternion_product(p, q):
    """Product of rotation quaternions, broadcasting over leading axes.

    Uses the ``w - i v.sigma`` convention, so ``quaternion_product(a, b)``
    is the quaternion of the matrix product ``A @ B``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, pv = p[..., :1], p[..., 1:]
    qw, qv = q[..., :1], q[..., 1:]
    w = pw * qw - np.sum(pv * qv, axis=-1, keepdims=True)
    v = pw * qv + qw * pv + np.cross(pv, qv)
    return np.concatenate([w, v], axis=-1)


def compose(a, b):
    """Rotation equal to the matrix product ``a @ b`` (``b`` acts first)."""
    return Rotation.from_quaternion(quaternion_product(a.quaternion, b.quaternion),
                                    a.phase + b.phase)


def compose3(theta_a, n_a, theta_b, n_b):
    """Closed form of ``R(theta_a, n_a) R(theta_b, n_b) R(theta_a, n_a)``.

    The symmetric three-rotation block underlying CPMG-type sequences.
    With ``b = cos(a/2)cos(b/2) - (n_a.n_b) sin(a/2)sin(b/2)`` the block has
    quaternion ``(2b cos(a/2) - cos(b/2), 2b sin(a/2) n_a + sin(b/2) n_b)``.
    When the vector part vanishes (norm below ``IDENTITY_TOL``) the result
    is the identity about the z axis, with any sign kept in ``phase``.
    """
    n_a = np.asarray(n_a, dtype=float)
    n_b = np.asarray(n_b, dtype=float)
    n_a = n_a / np.linalg.norm(n_a)
    n_b = n_b / np.linalg.norm(n_b)
    ca, sa = np.cos(0.5 * theta_a), np.sin(0.5 * theta_a)
    cb, sb = np.cos(0.5 * theta_b), np.sin(0.5 * theta_b)
    b = ca * cb - float(n_a @ n_b) * sa * sb
    w = 2 * b * ca - cb
    v = 2 * b * sa * n_a + sb * n_b
    if np.linalg.norm(v) < IDENTITY_TOL:
        return Rotation(0.0, Z_AXIS, np.pi if w < 0 else 0.0)
    return Rotation.from_quaternion([w, *v])


def power(r, n):
    """``r`` applied ``n`` times: same axis, ``n`` times the angle."""
    if int(n) != n or n < 1:
        raise ValueError(f"power needs a positive integer, got {n!r}")
    return Rotation(n * r.theta, r.axis, n * r.phase)


def _half_trace(u0, u1):
    """Tr(R0 R1^dagger)/2 of the SU(2) parts, which is real."""
    return float(u0.quaternion @ u1.quaternion)


def overlap_signal(u0, u1):
    """Interferometric signal ``[1 + Re Tr(U0 U1^dagger)/2] / 2``.

    Equals 1 for identical evolutions and 0 for ``U1 = -U0``. Only the
    relative phase enters; for SU(2) inputs it is the relative sign that
    canonicalization moves into ``phase``.
    """
    rel = np.cos(u0.phase - u1.phase)
    return float(np.clip(0.5 * (1.0 + rel * _half_trace(u0, u1)), 0.0, 1.0))


def trace_fidelity(u, v):
    """``|Tr(U V^dagger)| / 2``, insensitive to global phase."""
    return float(min(1.0, abs(_half_trace(u, v))))


def equivalent(a, b, atol=1e-9):
    """True when ``a`` and ``b`` agree up to a global phase."""
    return 1.0 - trace_fidelity(a, b) <= atol


# -- dense-matrix oracle ---------------------------------------------------

def rotation_matrix(theta, axis):
    """``expm(-i theta n.sigma / 2)`` by direct exponentiation."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    generator = sum(c * p for c, p in zip(axis, PAULI))
    return expm(-0.5j * theta * generator)


def matrix_product(*mats):
    return reduce(np.matmul, mats)


def matrix_signal(m0, m1):
    """Dense counterpart of :func:`overlap_signal` for SU(2) matrices."""
    return 0.5 * (1.0 + 0.5 * np.trace(m0 @ m1.conj().T).real)
