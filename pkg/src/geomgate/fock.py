"""Truncated Fock-space primitives for the oscillator mode.

All operators act on the number basis {|0>, ..., |N-1>}.  The truncation
rule `fock_dimension` keeps the tail of a coherent state |beta> (and of its
moderately displaced images during a gate) below ~1e-10.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError, TruncationOverflowError


def fock_dimension(beta: complex, margin: int = 0) -> int:
    """Truncation size N >= |beta|^2 + 6|beta| + 20 (+ margin).

    The base rule keeps the occupation tail of |beta> below 1e-10; `margin`
    buys headroom for the extra displacement accumulated during a drive.
    """
    b = abs(beta)
    return int(math.ceil(b * b + 6.0 * b + 20.0)) + int(margin)


def annihilation(n: int) -> np.ndarray:
    """Annihilation operator a with <m|a|m+1> = sqrt(m+1)."""
    if n < 2:
        raise InvalidParameterError(f"Fock truncation must be >= 2, got {n}")
    return np.diag(np.sqrt(np.arange(1.0, n)), 1).astype(complex)


def number_operator(n: int) -> np.ndarray:
    """Number operator a^dag a, diagonal in the Fock basis."""
    return np.diag(np.arange(n, dtype=float)).astype(complex)


def quadrature_x(n: int) -> np.ndarray:
    """Position quadrature x = (a + a^dag)/sqrt(2)."""
    a = annihilation(n)
    return (a + a.conj().T) / math.sqrt(2.0)


def quadrature_p(n: int) -> np.ndarray:
    """Momentum quadrature p = i (a^dag - a)/sqrt(2)."""
    a = annihilation(n)
    return 1j * (a.conj().T - a) / math.sqrt(2.0)


def coherent_state(beta: complex, n: int) -> np.ndarray:
    """Normalized coherent state |beta> truncated to n levels.

    Amplitudes follow the stable recursion c_k = c_{k-1} * beta / sqrt(k)
    with c_0 = exp(-|beta|^2/2).  Raises if the truncation clips more than
    1e-10 of the norm, i.e. if n violates `fock_dimension(beta)`.
    """
    if n < 2:
        raise InvalidParameterError(f"Fock truncation must be >= 2, got {n}")
    c = np.zeros(n, dtype=complex)
    c[0] = 1.0
    for k in range(1, n):
        c[k] = c[k - 1] * beta / math.sqrt(k)
    norm2 = float(np.sum(np.abs(c) ** 2))
    deficit = abs(math.exp(-abs(beta) ** 2) * norm2 - 1.0)
    if deficit > 1e-10:
        raise TruncationOverflowError(
            f"coherent state |beta|={abs(beta):.3f} needs N >= "
            f"{fock_dimension(beta)}, got {n} (norm deficit {deficit:.2e})"
        )
    return c * math.exp(-abs(beta) ** 2 / 2.0) / math.sqrt(math.exp(-abs(beta) ** 2) * norm2)


def coherent_projector(beta: complex, n: int) -> np.ndarray:
    """Density matrix |beta><beta| on the truncated space."""
    v = coherent_state(beta, n)
    return np.outer(v, v.conj())
