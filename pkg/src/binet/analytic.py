"""Closed-form bilocal values for the strategies the brute-force engine simulates.

Conventions match ``protocol``: the last precision in a chain multiplies
the correlators directly, while each earlier observer contributes through
its quality factor ``F = sqrt(1 - G**2)``. Final precisions above 1 are
accepted so that critical roots beyond the physical range can be located.
"""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .errors import ParamError


def quality(G: float) -> float:
    if not 0.0 < G <= 1.0:
        raise ParamError(f"intermediate precision G={G} outside (0, 1]")
    return float(np.sqrt(1.0 - G * G))


def k_factor(F: float) -> float:
    """Per-round shrink of Pauli correlations after a three-setting unsharp round."""
    return (1.0 + 2.0 * F) / 3.0


def _check_resource(v1, v2, alpha, beta):
    for name, val in (("v1", v1), ("v2", v2), ("alpha", alpha), ("beta", beta)):
        if not 0.0 <= val <= 1.0:
            raise ParamError(f"{name}={val} outside [0, 1]")


def _check_final(name: str, G: float) -> float:
    if G < 0:
        raise ParamError(f"{name}={G} is negative")
    return float(G)


def resource_factor(v1: float = 1.0, v2: float = 1.0, alpha: float = 0.5, beta: float = 0.5) -> float:
    """sqrt(v1 v2) (1 + 2 (alpha(1-alpha) beta(1-beta))^(1/4)); equals 2 for two Bell pairs."""
    _check_resource(v1, v2, alpha, beta)
    return float(np.sqrt(v1 * v2) * (1.0 + 2.0 * (alpha * (1 - alpha) * beta * (1 - beta)) ** 0.25))


def _chain_sums(Fs: Sequence[float], angles: Sequence[float]) -> tuple[float, float]:
    """Averaged over earlier settings: sums over l in {0,1}^k of prod (1 + (-1)^l F)(cos 2t)^l, scaled by 2^-k."""
    plus = minus = 0.0
    for ls in itertools.product((0, 1), repeat=len(Fs)):
        p = m = 1.0
        for l, F, t in zip(ls, Fs, angles):
            term = (1 + (-1) ** l * F) * np.cos(2 * t) ** l
            p *= term
            m *= term * (-1) ** l
        plus += p
        minus += m
    scale = 2.0 ** -len(Fs)
    return plus * scale, minus * scale


def brgp_uni_general(
    charu_G: Sequence[float],
    thetas: Sequence[float],
    phi: float,
    alice_G: float = 1.0,
    v1: float = 1.0,
    v2: float = 1.0,
    alpha: float = 0.5,
    beta: float = 0.5,
) -> tuple[float, float, float]:
    """(I, J, B) for one Alice against the n-th Charu at arbitrary x-z plane angles."""
    n = len(charu_G)
    if n < 1 or len(thetas) != n:
        raise ParamError("need one angle per Charu round")
    _check_resource(v1, v2, alpha, beta)
    Fs = [quality(G) for G in charu_G[:-1]]
    plus, minus = _chain_sums(Fs, thetas[:-1])
    g = _check_final("alice_G", alice_G) * _check_final("charu_G", charu_G[-1])
    zz = v1 * v2
    xx = 4.0 * v1 * v2 * np.sqrt(alpha * (1 - alpha) * beta * (1 - beta))
    I = g * np.cos(thetas[-1]) * np.cos(phi) * zz * plus
    J = -g * np.sin(thetas[-1]) * np.sin(phi) * xx * minus
    return float(I), float(J), float(np.sqrt(abs(I)) + np.sqrt(abs(J)))


def brgp_explicit(n: int, charu_G: Sequence[float], thetas: Sequence[float], phi: float) -> tuple[float, float, float]:
    """Hand-expanded BRGP terms for n = 1, 2, 3 two-Bell-pair rounds.

    These carry no 1/2 per earlier round, so for n rounds they equal
    ``brgp_uni_general`` times 2^(n-1) in I and J.
    """
    if n not in (1, 2, 3) or len(charu_G) != n or len(thetas) != n:
        raise ParamError("explicit expansions exist for n = 1, 2, 3 only")
    G = charu_G[-1]
    t = thetas
    cc = np.cos(t[-1]) * np.cos(phi)
    ss = np.sin(t[-1]) * np.sin(phi)
    if n == 1:
        a = b = 1.0
    elif n == 2:
        F1 = quality(charu_G[0])
        a = (1 + F1) + (1 - F1) * np.cos(2 * t[0])
        b = (1 + F1) - (1 - F1) * np.cos(2 * t[0])
    else:
        F1, F2 = quality(charu_G[0]), quality(charu_G[1])
        c1, c2 = np.cos(2 * t[0]), np.cos(2 * t[1])
        a = (1 + F1) * (1 + F2) + (1 - F1) * (1 + F2) * c1 + (1 + F1) * (1 - F2) * c2 + (1 - F1) * (1 - F2) * c1 * c2
        b = (1 + F1) * (1 + F2) - (1 - F1) * (1 + F2) * c1 - (1 + F1) * (1 - F2) * c2 + (1 - F1) * (1 - F2) * c1 * c2
    I, J = G * cc * a, G * ss * b
    B = np.sqrt(G) * (np.sqrt(abs(cc * a)) + np.sqrt(abs(ss * b)))
    return float(I), float(J), float(B)


def brgp_optimal_form(F_list: Sequence[float], Fp_list: Sequence[float], G_m: float, Gp_n: float) -> float:
    """B(A^m, B, C^n) for two Bell pairs with every angle at pi/4."""
    m, n = len(F_list) + 1, len(Fp_list) + 1
    prod = np.prod([1 + F for F in F_list]) * np.prod([1 + F for F in Fp_list])
    g = _check_final("G_m", G_m) * _check_final("Gp_n", Gp_n)
    return float(2.0 * np.sqrt(2.0 ** -(n + m - 1) * prod * g))


def brgp_noisy_nme(
    alice_G: Sequence[float],
    charu_G: Sequence[float],
    v1: float = 1.0,
    v2: float = 1.0,
    alpha: float = 0.5,
    beta: float = 0.5,
) -> float:
    """B(A^m, B, C^n) at pi/4 angles for noisy non-maximally entangled sources."""
    if not alice_G or not charu_G:
        raise ParamError("each chain needs at least one precision")
    F = [quality(G) for G in alice_G[:-1]]
    Fp = [quality(G) for G in charu_G[:-1]]
    m, n = len(alice_G), len(charu_G)
    prod = np.prod([1 + f for f in F]) * np.prod([1 + f for f in Fp])
    g = _check_final("G_m", alice_G[-1]) * _check_final("Gp_n", charu_G[-1])
    return float(np.sqrt(2.0 ** -(n + m - 1) * prod * g) * resource_factor(v1, v2, alpha, beta))


def _k_product(Fp_list: Sequence[float]) -> float:
    return float(np.prod([k_factor(F) for F in Fp_list]))


def tgb_correlators(
    v1: float, v2: float, ejm_theta: float, Gp_n: float, Fp_list: Sequence[float] = ()
) -> dict[str, np.ndarray]:
    """Pauli-setting correlators for singlet Werner sources, laid out like ``protocol.tgb_terms``."""
    w = _check_final("Gp_n", Gp_n) * _k_product(Fp_list)
    c, s = np.cos(ejm_theta), np.sin(ejm_theta)
    eye = np.eye(3)
    abc = np.zeros((3, 3, 3))
    for p in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        abc[p] = -v1 * v2 / 2 * w * (1 + s)
    for p in ((0, 2, 1), (2, 1, 0), (1, 0, 2)):
        abc[p] = -v1 * v2 / 2 * w * (1 - s)
    return {
        "A": np.zeros(3),
        "B": np.zeros(3),
        "C": np.zeros(3),
        "AB": -v1 / 2 * c * eye,
        "BC": v2 / 2 * w * c * eye,
        "AC": np.zeros((3, 3)),
        "ABC": abc,
    }


def tgb_closed_form(v1: float, v2: float, ejm_theta: float, Gp_n: float, Fp_list: Sequence[float] = ()) -> float:
    """BE(A^1, B, C^n) with Pauli settings and singlet Werner sources."""
    _check_resource(v1, v2, 0.5, 0.5)
    w = _check_final("Gp_n", Gp_n) * _k_product(Fp_list)
    return float(np.cos(ejm_theta) / 2 * (v1 + v2 * w) + 3 * v1 * v2 * w)


def tgb_critical_G(v: float, ejm_theta: float, Kprod: float = 1.0) -> float:
    """Precision at which BE reaches 3 for v1 = v2 = v; +inf when no precision suffices."""
    c = np.cos(ejm_theta)
    den = (6 * v * v + v * c) * Kprod
    if den <= 0:
        return float("inf")
    return float((6 - v * c) / den)
