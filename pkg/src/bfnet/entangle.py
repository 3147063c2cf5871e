"""Entanglement diagnostics for pure multimode Fock vectors.

All quantities are computed on the renormalized state, so probability lost to
the photon cutoff does not read as entanglement; the lost mass is carried in
the report and folded into the default product tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fockvector import FockVector, format_float
from .focksim import norm_deficit

EIG_FLOOR = 1e-14
MIN_PRODUCT_TOL = 1e-9


def _normalized_dense(psi: FockVector) -> np.ndarray:
    t = psi.to_dense()
    norm = np.sqrt(psi.norm_sq())
    if norm == 0:
        raise ValueError("zero vector has no reduced states")
    return t / norm


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > EIG_FLOOR]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def single_mode_marginal(psi: FockVector, mode: int) -> np.ndarray:
    """Reduced density matrix of one mode over photon numbers 0..cutoff."""
    if not 0 <= mode < psi.num_modes:
        raise IndexError(f"mode {mode} out of range for {psi.num_modes} modes")
    t = np.moveaxis(_normalized_dense(psi), mode, 0).reshape(psi.cutoff + 1, -1)
    return t @ t.conj().T


def schmidt_entropy(psi: FockVector, partition) -> tuple[float, np.ndarray]:
    """Entanglement entropy (bits) across ``partition`` | complement, with Schmidt coefficients."""
    part = sorted(set(int(k) for k in partition))
    if not part or len(part) >= psi.num_modes:
        raise ValueError("partition must be a nonempty proper subset of modes")
    if part[0] < 0 or part[-1] >= psi.num_modes:
        raise IndexError("partition references a mode out of range")
    rest = [k for k in range(psi.num_modes) if k not in part]
    t = np.transpose(_normalized_dense(psi), part + rest)
    dim = (psi.cutoff + 1) ** len(part)
    sv = np.linalg.svd(t.reshape(dim, -1), compute_uv=False)
    p = sv**2 / np.sum(sv**2)
    return _entropy_bits(p), sv


@dataclass(frozen=True)
class EntanglementReport:
    per_mode_entropy: tuple
    per_mode_purity: tuple
    min_purity: float
    is_product: bool
    tolerance_used: float
    truncation_deficit: float

    @property
    def max_entropy(self) -> float:
        return max(self.per_mode_entropy)

    def to_text(self) -> str:
        """Flat ``key=value`` lines."""
        lines = [f"entropy_bits[{j}]={format_float(s)}" for j, s in enumerate(self.per_mode_entropy)]
        lines += [f"purity[{j}]={format_float(p)}" for j, p in enumerate(self.per_mode_purity)]
        lines += [
            f"min_purity={format_float(self.min_purity)}",
            f"max_entropy_bits={format_float(self.max_entropy)}",
            f"is_product={str(self.is_product).lower()}",
            f"tolerance={format_float(self.tolerance_used)}",
            f"deficit={format_float(self.truncation_deficit)}",
        ]
        return "\n".join(lines) + "\n"


def default_product_tol(deficit: float) -> float:
    return max(MIN_PRODUCT_TOL, 10.0 * deficit)


def product_test(psi: FockVector, tol: float | None = None) -> EntanglementReport:
    """Full product test: a pure state is a product iff every single-mode marginal is pure."""
    deficit = norm_deficit(psi)
    tol = default_product_tol(deficit) if tol is None else tol
    entropies, purities = [], []
    for j in range(psi.num_modes):
        rho = single_mode_marginal(psi, j)
        evals = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        purities.append(float(np.real(np.sum(rho * rho.T))))
        entropies.append(_entropy_bits(evals))
    min_purity = min(purities)
    return EntanglementReport(
        per_mode_entropy=tuple(entropies),
        per_mode_purity=tuple(purities),
        min_purity=min_purity,
        is_product=(1.0 - min_purity) <= tol,
        tolerance_used=tol,
        truncation_deficit=deficit,
    )
