"""Bob's joint bases and the unsharp single-qubit measurements of the outer parties."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import qmath
from .errors import DimensionError, ParamError

_S2 = np.sqrt(2.0)
_S3 = np.sqrt(3.0)

TETRAHEDRON = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)


class JointKind(str, enum.Enum):
    BSM = "bsm"
    EJM = "ejm"


class Party(str, enum.Enum):
    ALICE = "alice"
    CHARU = "charu"


@dataclass(frozen=True, eq=False)
class JointBasis:
    kind: JointKind
    vectors: np.ndarray  # rows are the four basis kets
    labels: tuple[tuple[int, ...], ...]
    theta: float | None = None
    projectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=complex)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "projectors", np.array([qmath.ket_to_dm(v) for v in vecs]))

    def label_str(self, index: int) -> str:
        lab = self.labels[index]
        if self.kind is JointKind.BSM:
            return "".join(str(b) for b in lab)
        return "".join("+" if b > 0 else "-" for b in lab)

    @property
    def label_strings(self) -> list[str]:
        return [self.label_str(i) for i in range(4)]

    def sign(self, index: int, y: int) -> int:
        """Value of Bob's y-th output variable (+1/-1) for outcome ``index``."""
        lab = self.labels[index]
        if self.kind is JointKind.BSM:
            return -1 if lab[y] else 1
        return int(lab[y])


BELL_VECTORS = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / _S2,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / _S2,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / _S2,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / _S2,
}
# b0 flips with ZZ parity, b1 flips with XX phase
BELL_LABELS = {"phi+": (0, 0), "phi-": (0, 1), "psi+": (1, 0), "psi-": (1, 1)}


def bell_basis(labels: dict[str, tuple[int, int]] | None = None) -> JointBasis:
    labels = labels or BELL_LABELS
    names = sorted(BELL_VECTORS, key=lambda k: labels[k])
    return JointBasis(
        JointKind.BSM,
        np.array([BELL_VECTORS[k] for k in names]),
        tuple(tuple(labels[k]) for k in names),
    )


def tetra_vertex(b_index: int) -> tuple[np.ndarray, float, float]:
    """Unit Bloch vector of tetrahedron vertex ``b_index`` (1..4) with its z-component and azimuth."""
    if b_index not in (1, 2, 3, 4):
        raise ParamError(f"vertex index {b_index} not in 1..4")
    m = TETRAHEDRON[b_index - 1] / _S3
    return m, float(m[2]), float(np.arctan2(m[1], m[0]))


def bloch_ket(r: float, phi: float, sign: int = 1) -> np.ndarray:
    """Pure qubit state pointing along (sign) times the Bloch vector with z=r, azimuth phi."""
    return np.array(
        [
            np.sqrt((1 + sign * r) / 2) * np.exp(-0.5j * phi),
            sign * np.sqrt((1 - sign * r) / 2) * np.exp(0.5j * phi),
        ]
    )


def ejm_basis(theta: float) -> JointBasis:
    theta = float(theta)
    if not -1e-12 <= theta <= np.pi / 2 + 1e-12:
        raise ParamError(f"EJM theta={theta} outside [0, pi/2]")
    c_plus = (_S3 + np.exp(1j * theta)) / (2 * _S2)
    c_minus = (_S3 - np.exp(1j * theta)) / (2 * _S2)
    vecs = []
    for b in range(1, 5):
        _, r, phi = tetra_vertex(b)
        up, down = bloch_ket(r, phi, 1), bloch_ket(r, phi, -1)
        vecs.append(c_plus * np.kron(up, down) + c_minus * np.kron(down, up))
    labels = tuple(tuple(int(s) for s in row) for row in TETRAHEDRON)
    return JointBasis(JointKind.EJM, np.array(vecs), labels, theta)


def joint_basis(kind: JointKind | str, theta: float = 0.0) -> JointBasis:
    kind = JointKind(kind)
    return bell_basis() if kind is JointKind.BSM else ejm_basis(theta)


def observable(angle: float, setting: int, party: Party | str) -> np.ndarray:
    """x-z plane observable; Alice tilts by -(-1)^x sin, Charu by +(-1)^z sin."""
    if setting not in (0, 1):
        raise ParamError(f"binary setting expected, got {setting}")
    sign = -1.0 if Party(party) is Party.ALICE else 1.0
    return np.cos(angle) * qmath.SZ + sign * (-1) ** setting * np.sin(angle) * qmath.SX


def pauli_observable(setting: int) -> np.ndarray:
    """Settings 0, 1, 2 measure X, Y, Z."""
    if setting not in (0, 1, 2):
        raise ParamError(f"ternary setting expected, got {setting}")
    return qmath.PAULIS[setting]


def _check_G(G: float) -> float:
    G = float(G)
    if not 0.0 < G <= 1.0:
        raise ParamError(f"sharpness G={G} outside (0, 1]")
    return G


@dataclass(frozen=True)
class RoundSpec:
    """One observer's measurement: precision ``G`` and x-z plane angle."""

    G: float = 1.0
    angle: float = np.pi / 4

    def __post_init__(self):
        object.__setattr__(self, "G", _check_G(self.G))
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def F(self) -> float:
        return float(np.sqrt(1.0 - self.G * self.G))


def spectral_projectors(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (qmath.I2 + direction) / 2, (qmath.I2 - direction) / 2


def povm_effects(direction: np.ndarray, G: float) -> tuple[np.ndarray, np.ndarray]:
    G = _check_G(G)
    p0, p1 = spectral_projectors(direction)
    noise = (1 - G) / 2 * qmath.I2
    return G * p0 + noise, G * p1 + noise


def _lifted_projectors(rho: np.ndarray, qubit: int, direction: np.ndarray):
    n = qmath.num_qubits(rho)
    if direction.shape != (2, 2):
        raise DimensionError("direction must be a 2x2 observable")
    p0, p1 = spectral_projectors(direction)
    return qmath.embed(p0, qubit, n), qmath.embed(p1, qubit, n)


def weak_map_unconditional(rho: np.ndarray, qubit: int, direction: np.ndarray, F: float) -> np.ndarray:
    """Outcome-averaged Lueders update F*rho + (1-F)*dephase(rho)."""
    if not 0.0 <= F <= 1.0:
        raise ParamError(f"quality factor F={F} outside [0, 1]")
    p0, p1 = _lifted_projectors(rho, qubit, direction)
    return F * rho + (1.0 - F) * (p0 @ rho @ p0 + p1 @ rho @ p1)


def weak_map_conditional(
    rho: np.ndarray, qubit: int, direction: np.ndarray, G: float, outcome: int
) -> np.ndarray:
    """Unnormalized post-measurement state for one outcome; its trace is the outcome probability."""
    G = _check_G(G)
    F = np.sqrt(1.0 - G * G)
    s = (-1) ** outcome
    p0, p1 = _lifted_projectors(rho, qubit, direction)
    return F / 2 * rho + (1 + s * G - F) / 2 * (p0 @ rho @ p0) + (1 - s * G - F) / 2 * (p1 @ rho @ p1)


def find_bell_label_maps(b_of: Callable[[JointBasis], float], target: float = np.sqrt(2.0), tol: float = 1e-9):
    """Return every assignment of bit pairs to Bell vectors whose basis makes ``b_of`` hit ``target``."""
    names = list(BELL_VECTORS)
    hits = []
    for perm in itertools.permutations([(0, 0), (0, 1), (1, 0), (1, 1)]):
        labels = dict(zip(names, perm))
        if abs(b_of(bell_basis(labels)) - target) < tol:
            hits.append(labels)
    return hits
