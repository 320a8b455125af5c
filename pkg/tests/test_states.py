import numpy as np
import pytest
from hypothesis import given, strategies as st

from binet import qmath, states
from binet.errors import ParamError
from binet.states import Base, SourceSpec


def test_nme_examples():
    assert np.allclose(states.nme_pure(0.5), np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(states.nme_pure(1.0), [1, 0, 0, 0])
    assert qmath.entanglement_entropy(states.nme_pure(0.2)) == pytest.approx(0.72193, abs=1e-5)


def test_psi_minus_base_at_half_is_singlet():
    assert np.allclose(states.nme_pure(0.5, Base.PSI_MINUS), np.array([0, 1, -1, 0]) / np.sqrt(2))


@pytest.mark.parametrize("eta,v", [(-0.1, 1), (1.1, 1), (0.5, -0.01), (0.5, 1.2), (float("nan"), 1)])
def test_spec_rejects_out_of_range(eta, v):
    with pytest.raises(ParamError):
        SourceSpec(eta, v)


def test_nme_pure_rejects_out_of_range():
    with pytest.raises(ParamError):
        states.nme_pure(2.0)


def test_source_state_examples():
    bell = qmath.ket_to_dm(states.nme_pure(0.5))
    assert np.allclose(states.source_state(SourceSpec(0.5, 1.0)), bell)
    for base in Base:
        assert np.allclose(states.source_state(SourceSpec(0.5, 0.0, base)), np.eye(4) / 4)
    ev = np.linalg.eigvalsh(states.source_state(SourceSpec(0.5, 0.8)))
    assert np.allclose(sorted(ev), [0.05, 0.05, 0.05, 0.85])


def test_source_state_grid_valid():
    for eta in np.linspace(0, 1, 21):
        for v in np.linspace(0, 1, 21):
            for base in Base:
                rho = states.source_state(SourceSpec(eta, v, base))
                assert abs(np.trace(rho) - 1) < 1e-12
                assert np.linalg.eigvalsh(rho).min() > -1e-12


@given(st.floats(0, 1))
def test_pure_when_full_visibility(eta):
    rho = states.source_state(SourceSpec(eta, 1.0))
    assert abs(np.trace(rho @ rho).real - 1) < 1e-12


def test_werner_eof_onset():
    for v in np.linspace(0, 1 / 3, 12):
        assert qmath.eof(states.source_state(SourceSpec.werner(v))) == 0.0
    for v in np.linspace(0.34, 1, 12):
        assert qmath.eof(states.source_state(SourceSpec.werner(v))) > 0.0


def test_network_state_is_product():
    s1, s2 = SourceSpec(0.3, 0.9), SourceSpec(0.5, 0.7, Base.PSI_MINUS)
    rho = states.network_state(s1, s2)
    assert rho.shape == (16, 16)
    assert np.allclose(qmath.partial_trace(rho, [0, 1], [2] * 4), states.source_state(s1))
    assert np.allclose(qmath.partial_trace(rho, [2, 3], [2] * 4), states.source_state(s2))


def test_correlations_match_state():
    for spec in (SourceSpec(0.3, 0.9), SourceSpec(0.2, 0.6, Base.PSI_MINUS)):
        rho = states.source_state(spec)
        zz = np.trace(rho @ np.kron(qmath.SZ, qmath.SZ)).real
        xx = np.trace(rho @ np.kron(qmath.SX, qmath.SX)).real
        assert spec.correlations == pytest.approx((zz, xx), abs=1e-12)


def test_entanglement_measure_selection():
    assert states.entanglement(SourceSpec.nme(0.2)) == pytest.approx(0.72193, abs=1e-5)
    assert states.entanglement(SourceSpec.werner(1 / 3)) == 0.0
