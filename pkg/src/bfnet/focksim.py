"""Brute-force Fock-space oracle for linear networks.

Independent of the series engine: each basis state |n> is rewritten as
prod_j (a_j^dag)^{n_j} / sqrt(n_j!) |vac>, every creation operator is replaced
by its image sum_k U[j, k] a_k^dag, and the products are expanded with
multinomial coefficients. Photon number is conserved, so no truncation error
enters at any layer.
"""

from __future__ import annotations

import math

import numpy as np

from .bfseries import MultivariateSeries, fock_amplitudes
from .fockvector import FockVector
from .network import NetworkUnitary

__all__ = ["FockVector", "apply_network_oracle", "from_bf", "norm_deficit"]


def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def _row_power(row, n: int, weights) -> tuple[np.ndarray, np.ndarray]:
    """(sum_k row[k] a_k^dag)^n as encoded exponent keys and coefficients."""
    keys, coeffs = [], []
    fn = math.factorial(n)
    for ks in _compositions(n, len(row)):
        c = fn
        for k in ks:
            c //= math.factorial(k)
        coeff = complex(c)
        for r, k in zip(row, ks):
            if k:
                coeff *= r**k
        if coeff != 0:
            keys.append(sum(k * w for k, w in zip(ks, weights)))
            coeffs.append(coeff)
    return np.array(keys, dtype=np.int64), np.array(coeffs, dtype=complex)


def _merge(keys: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inv = np.unique(keys, return_inverse=True)
    return uniq, np.bincount(inv, coeffs.real, len(uniq)) + 1j * np.bincount(inv, coeffs.imag, len(uniq))


def apply_network_oracle(psi: FockVector, u: NetworkUnitary) -> FockVector:
    """Apply the network to a truncated Fock vector amplitude by amplitude.

    Monomials are stored as integer keys in base ``max_degree + 1``; since no
    exponent reaches the base, multiplying monomials is adding keys.
    """
    if psi.num_modes != u.dim:
        raise ValueError(f"state has {psi.num_modes} modes but network has dimension {u.dim}")
    n_modes = psi.num_modes
    top = max((sum(n) for n in psi.amplitudes), default=0)
    base = top + 1
    weights = [base ** (n_modes - 1 - k) for k in range(n_modes)]
    rows = [tuple(complex(x) for x in u.matrix[j]) for j in range(n_modes)]
    memo: dict = {}

    def row_power(j, n):
        if (j, n) not in memo:
            memo[(j, n)] = _row_power(rows[j], n, weights)
        return memo[(j, n)]

    all_keys, all_coeffs = [], []
    for n, amp in psi.amplitudes.items():
        if amp == 0:
            continue
        keys = np.zeros(1, dtype=np.int64)
        coeffs = np.full(1, amp / math.sqrt(math.prod(math.factorial(x) for x in n)), dtype=complex)
        for j, nj in enumerate(n):
            if nj:
                rk, rc = row_power(j, nj)
                keys, coeffs = _merge((keys[:, None] + rk[None, :]).ravel(), (coeffs[:, None] * rc[None, :]).ravel())
        all_keys.append(keys)
        all_coeffs.append(coeffs)
    if not all_keys:
        return FockVector(n_modes, psi.cutoff, {})
    keys, coeffs = _merge(np.concatenate(all_keys), np.concatenate(all_coeffs))
    exps = (keys[:, None] // np.array(weights)[None, :]) % base
    out = {}
    for m, c in zip(map(tuple, exps.tolist()), coeffs):
        # (a^dag)^m |vac> = sqrt(m!) |m>
        out[m] = complex(c * math.sqrt(math.prod(math.factorial(x) for x in m)))
    return FockVector(n_modes, psi.cutoff, out)


def from_bf(b: MultivariateSeries) -> FockVector:
    return fock_amplitudes(b)


def norm_deficit(psi: FockVector) -> float:
    """Probability lost to truncation, ``1 - sum |amp|^2`` clamped at zero."""
    return max(0.0, 1.0 - psi.norm_sq())
