"""Small dense linear algebra for qubit density matrices.

Everything here works on plain ``numpy`` arrays. Matrices are at most
16x16, so clarity wins over performance.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, NormalizationError, StateError

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


def _square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.kron's generality costs more than the product itself at these sizes
    da, db = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(da * db, da * db)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square matrices."""
    return _kron(_square(a, "a"), _square(b, "b"))


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def partial_trace(rho: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``keep`` must be sorted; the surviving subsystems keep their order.
    """
    rho = _square(rho, "rho")
    dims = [int(d) for d in dims]
    keep = [int(k) for k in keep]
    n = len(dims)
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionError(f"dims {dims} do not multiply to {rho.shape[0]}")
    if not keep or sorted(set(keep)) != keep or keep[0] < 0 or keep[-1] >= n:
        raise DimensionError(f"invalid keep list {keep} for {n} subsystems")
    t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace from the highest index down so axis numbers stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        cur = n - count
        t = np.trace(t, axis1=i, axis2=i + cur)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def embed(op: np.ndarray, qubit: int, num_qubits: int) -> np.ndarray:
    """Lift a single-qubit operator onto ``qubit`` of an ``num_qubits`` register."""
    if not 0 <= qubit < num_qubits:
        raise DimensionError(f"qubit {qubit} out of range for {num_qubits} qubits")
    left = np.eye(2**qubit, dtype=complex)
    right = np.eye(2 ** (num_qubits - qubit - 1), dtype=complex)
    return _kron(_kron(left, np.asarray(op, dtype=complex)), right)


def num_qubits(rho: np.ndarray) -> int:
    dim = rho.shape[0]
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def binary_entropy(p: float) -> float:
    """Shannon entropy of a biased coin in bits; 0 at the endpoints."""
    p = float(p)
    if p <= 0.0 or p >= 1.0:
        return 0.0
    q = 1.0 - p
    return float(-p * np.log2(p) - q * np.log2(q))


def entanglement_entropy(psi: np.ndarray) -> float:
    """Von Neumann entropy (bits) of either marginal of a two-qubit pure state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (4,):
        raise DimensionError(f"expected a 4-vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-10:
        raise NormalizationError(f"state has norm {norm}, expected 1")
    schmidt = np.linalg.svd(psi.reshape(2, 2), compute_uv=False) ** 2
    return binary_entropy(float(np.clip(schmidt[0], 0.0, 1.0)))


def check_density_matrix(rho: np.ndarray, *, normalized: bool = True) -> np.ndarray:
    rho = _square(rho, "rho")
    if np.max(np.abs(rho - dagger(rho))) > HERMITIAN_TOL:
        raise StateError("matrix is not Hermitian")
    tr = float(np.trace(rho).real)
    if normalized and abs(tr - 1.0) > TRACE_TOL:
        raise StateError(f"trace {tr} differs from 1")
    if not normalized and not 0.0 < tr <= 1.0 + TRACE_TOL:
        raise StateError(f"unnormalized branch has trace {tr} outside (0, 1]")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise StateError("matrix has a negative eigenvalue")
    return rho


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit state."""
    rho = check_density_matrix(rho)
    if rho.shape != (4, 4):
        raise DimensionError("concurrence is defined for two qubits")
    # The square roots of the eigenvalues of rho*rho_tilde are the singular values
    # of sqrt(rho)*sqrt(rho_tilde); the SVD keeps the small ones accurate.
    w, u = np.linalg.eigh(rho)
    root = (u * np.sqrt(np.clip(w, 0.0, None))) @ dagger(u)
    yy = np.kron(SY, SY)
    lam = np.linalg.svd(root @ yy @ root.conj() @ yy, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof(rho: np.ndarray) -> float:
    """Entanglement of formation (bits) of a two-qubit density matrix."""
    c = concurrence(rho)
    return binary_entropy((1.0 + np.sqrt(max(0.0, 1.0 - c * c))) / 2.0)
