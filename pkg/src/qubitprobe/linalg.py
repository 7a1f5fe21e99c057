"""Small dense complex linear algebra for one- and two-qubit operators.

Everything here works on plain ``numpy`` arrays of shape (2, 2) or (4, 4).
The two-qubit ordering is system (first factor) then probe (second factor),
so basis index ``2*s + p`` labels ``|s>_S |p>_P``.
"""
from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

HERMITIAN_TOL = 1e-10
_JACOBI_MAX_SWEEPS = 50


class ValidationError(ValueError):
    """Raised when an argument violates a documented precondition."""


def _as_square(a, dims=(2, 4), name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in dims:
        raise ValidationError(f"{name} must be square with dimension in {dims}, got shape {a.shape}")
    return a


def hermitian_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T)))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_defect(a) <= tol


def dagger(a) -> np.ndarray:
    return np.asarray(a).conj().T


def kron(a, b) -> np.ndarray:
    """Kronecker product of two single-qubit operators."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValidationError(f"kron expects two 2x2 operands, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def _eig2(h: np.ndarray):
    # h = a0*I + a.sigma; eigenvalues a0 -/+ |a|
    a0 = 0.5 * (h[0, 0] + h[1, 1]).real
    ax = h[0, 1].real
    ay = -h[0, 1].imag
    az = 0.5 * (h[0, 0] - h[1, 1]).real
    r = np.sqrt(ax * ax + ay * ay + az * az)
    if r == 0.0:
        return np.array([a0, a0]), np.eye(2, dtype=complex)
    theta = np.arctan2(np.hypot(ax, ay), az)
    phi = np.arctan2(ay, ax)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    up = np.array([c, s * e])
    down = np.array([-s, c * e])
    # column 0 belongs to the lower eigenvalue
    return np.array([a0 - r, a0 + r]), np.column_stack([down, up])


def _jacobi(h: np.ndarray):
    n = h.shape[0]
    a = h.copy()
    v = np.eye(n, dtype=complex)
    scale = max(np.max(np.abs(a)), 1e-300)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(_JACOBI_MAX_SWEEPS):
        if np.max(np.abs(a[offdiag])) <= 1e-17 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= 1e-18 * scale:
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = b / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) * real rotation, restricted to (p, q)
                g_pp, g_pq = c, s
                g_qp, g_qq = -s * phase.conjugate(), c * phase.conjugate()
                cols = a[:, [p, q]]
                a[:, p] = cols[:, 0] * g_pp + cols[:, 1] * g_qp
                a[:, q] = cols[:, 0] * g_pq + cols[:, 1] * g_qq
                rows = a[[p, q], :]
                a[p, :] = np.conj(g_pp) * rows[0] + np.conj(g_qp) * rows[1]
                a[q, :] = np.conj(g_pq) * rows[0] + np.conj(g_qq) * rows[1]
                a[p, q] = a[q, p] = 0.0
                vc = v[:, [p, q]]
                v[:, p] = vc[:, 0] * g_pp + vc[:, 1] * g_qp
                v[:, q] = vc[:, 0] * g_pq + vc[:, 1] * g_qq
    else:
        raise ArithmeticError("Jacobi eigensolver did not converge")
    return np.diag(a).real.copy(), v


def hermitian_eigensystem(h):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix.

    2x2 inputs use the closed form via the Bloch decomposition; 4x4 inputs use
    cyclic complex Jacobi rotations.
    """
    h = _as_square(h, name="h")
    if not is_hermitian(h):
        raise ValidationError(f"matrix is not Hermitian (defect {hermitian_defect(h):.3e})")
    h = 0.5 * (h + h.conj().T)
    if h.shape[0] == 2:
        return _eig2(h)
    w, v = _jacobi(h)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def propagator(h, t: float) -> np.ndarray:
    """exp(-i h t) with hbar = 1, built from the eigensystem of ``h``."""
    w, v = hermitian_eigensystem(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def propagators(h, times) -> np.ndarray:
    """Stack of exp(-i h t) for every t in ``times``; shape (len(times), d, d)."""
    w, v = hermitian_eigensystem(h)
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w))
    return np.einsum("ij,tj,kj->tik", v, phases, v.conj())


def partial_trace(rho, keep: str | int) -> np.ndarray:
    """Reduce a two-qubit density matrix to one subsystem.

    ``keep`` is ``"S"``/``0`` for the system (first factor) or ``"P"``/``1``
    for the probe. Also accepts a stack of shape (n, 4, 4).
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (4, 4):
        raise ValidationError(f"partial_trace expects 4x4 input, got {rho.shape}")
    r = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    if keep in ("S", "s", 0):
        return np.einsum("...ijkj->...ik", r)
    if keep in ("P", "p", 1):
        return np.einsum("...ijik->...jk", r)
    raise ValidationError(f"keep must select 'S' or 'P', got {keep!r}")


def bloch_vector(rho) -> np.ndarray:
    """Components Tr(rho sigma_i); works on a single 2x2 or a stack."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (2, 2):
        raise ValidationError(f"bloch_vector expects 2x2 input, got {rho.shape}")
    x = 2.0 * rho[..., 0, 1].real
    y = -2.0 * rho[..., 0, 1].imag
    z = (rho[..., 0, 0] - rho[..., 1, 1]).real
    return np.stack([x, y, z], axis=-1)


def bloch_to_density(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValidationError(f"Bloch vector must have 3 components, got shape {v.shape}")
    if np.linalg.norm(v) > 1 + 1e-9:
        raise ValidationError(f"Bloch vector norm {np.linalg.norm(v):.12g} exceeds 1")
    return 0.5 * (I2 + v[0] * SX + v[1] * SY + v[2] * SZ)


def purity(rho):
    """Weight of the dominant eigenstate of a qubit density matrix, (1 + |r|)/2.

    Equals 1 for pure states and 1/2 for the maximally mixed state. This is
    the purity figure quoted for the protective-measurement runs; the
    quadratic measure Tr(rho^2) is available as :func:`trace_purity`.
    Works on a single 2x2 matrix or a stack.
    """
    r = np.linalg.norm(bloch_vector(rho), axis=-1)
    return 0.5 * (1.0 + r)


def trace_purity(rho):
    """Tr(rho^2) for a single matrix or a stack."""
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("...ij,...ji->...", rho, rho).real


def ket_to_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def unit_vector(v, name: str = "vector", tol: float = 1e-6) -> np.ndarray:
    """Normalize a real 3-vector; rejects near-zero input."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} must be a finite 3-vector, got {v!r}")
    n = np.linalg.norm(v)
    if n < tol:
        raise ValidationError(f"{name} has near-zero length {n:.3g}")
    return v / n


def pauli_dot(u) -> np.ndarray:
    """sigma . u for a unit 3-vector ``u``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (3,) or abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValidationError(f"pauli_dot needs a unit 3-vector, got {u!r}")
    return u[0] * SX + u[1] * SY + u[2] * SZ
