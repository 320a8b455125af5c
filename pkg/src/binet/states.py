"""Resource states emitted by the two independent sources."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import qmath
from .errors import ParamError


class Base(str, enum.Enum):
    PHI_PLUS = "phi_plus"
    PSI_MINUS = "psi_minus"


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or not np.isfinite(value):
        raise ParamError(f"{name}={value} outside [0, 1]")
    return value


@dataclass(frozen=True)
class SourceSpec:
    """A noisy non-maximally entangled two-qubit source.

    ``eta`` weights the first Schmidt component, ``visibility`` mixes in
    white noise. ``base`` picks the |00>,|11> family or the singlet family.
    """

    eta: float = 0.5
    visibility: float = 1.0
    base: Base = Base.PHI_PLUS

    def __post_init__(self):
        object.__setattr__(self, "eta", _check_unit("eta", self.eta))
        object.__setattr__(self, "visibility", _check_unit("visibility", self.visibility))
        object.__setattr__(self, "base", Base(self.base))

    @classmethod
    def werner(cls, v: float, base: Base = Base.PHI_PLUS) -> "SourceSpec":
        return cls(0.5, v, base)

    @classmethod
    def nme(cls, eta: float, base: Base = Base.PHI_PLUS) -> "SourceSpec":
        return cls(eta, 1.0, base)

    @property
    def correlations(self) -> tuple[float, float]:
        """(<ZZ>, <XX>) of the source state."""
        v, e = self.visibility, self.eta
        cross = 2.0 * np.sqrt(e * (1.0 - e))
        if self.base is Base.PHI_PLUS:
            return v, v * cross
        return -v, -v * cross


def nme_pure(eta: float, base: Base = Base.PHI_PLUS) -> np.ndarray:
    """sqrt(eta)|00> + sqrt(1-eta)|11>, or sqrt(eta)|01> - sqrt(1-eta)|10> for the singlet family."""
    eta = _check_unit("eta", eta)
    psi = np.zeros(4, dtype=complex)
    if Base(base) is Base.PHI_PLUS:
        psi[0], psi[3] = np.sqrt(eta), np.sqrt(1.0 - eta)
    else:
        psi[1], psi[2] = np.sqrt(eta), -np.sqrt(1.0 - eta)
    return psi


def source_state(spec: SourceSpec) -> np.ndarray:
    v = spec.visibility
    return v * qmath.ket_to_dm(nme_pure(spec.eta, spec.base)) + (1.0 - v) / 4.0 * np.eye(4)


def network_state(source1: SourceSpec, source2: SourceSpec) -> np.ndarray:
    """16x16 state of qubits (A, B1, B2, C) from two independent sources."""
    return qmath.kron(source_state(source1), source_state(source2))


def entanglement(spec: SourceSpec) -> float:
    """Entropy of entanglement for pure sources, entanglement of formation otherwise."""
    if spec.visibility == 1.0:
        return qmath.entanglement_entropy(nme_pure(spec.eta, spec.base))
    return qmath.eof(source_state(spec))
