"""Sparse amplitudes over a total-photon-truncated multimode Fock basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def format_float(x: float) -> str:
    return f"{x:.12g}"


@dataclass(frozen=True)
class FockVector:
    """Amplitudes ``<n_1, ..., n_N | psi>`` for ``sum(n) <= cutoff``.

    Absent keys are zero amplitudes.
    """

    num_modes: int
    cutoff: int
    amplitudes: dict

    def __post_init__(self):
        for n in self.amplitudes:
            if len(n) != self.num_modes:
                raise ValueError(f"index {n} does not have {self.num_modes} modes")
            if sum(n) > self.cutoff or min(n) < 0:
                raise ValueError(f"index {n} outside cutoff {self.cutoff}")

    @classmethod
    def basis_state(cls, occupations, cutoff: int | None = None) -> "FockVector":
        occ = tuple(int(n) for n in occupations)
        return cls(len(occ), sum(occ) if cutoff is None else cutoff, {occ: 1.0 + 0j})

    def __getitem__(self, n) -> complex:
        return self.amplitudes.get(tuple(n), 0j)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def layer_norms(self) -> np.ndarray:
        """Squared norm carried by each total photon number 0..cutoff."""
        out = np.zeros(self.cutoff + 1)
        for n, a in self.amplitudes.items():
            out[sum(n)] += abs(a) ** 2
        return out

    def to_dense(self) -> np.ndarray:
        """Dense tensor of shape ``(cutoff + 1,) * num_modes``."""
        t = np.zeros((self.cutoff + 1,) * self.num_modes, dtype=complex)
        for n, a in self.amplitudes.items():
            t[n] = a
        return t

    def max_abs_diff(self, other: "FockVector") -> float:
        keys = set(self.amplitudes) | set(other.amplitudes)
        if not keys:
            return 0.0
        return max(abs(self[k] - other[k]) for k in keys)

    def dump(self) -> str:
        """Text dump, one ``n1 ... nN re im`` line per stored amplitude."""
        lines = [f"# kind=fock-amplitudes modes={self.num_modes} cutoff={self.cutoff}"]
        keys = sorted(self.amplitudes, key=lambda n: (sum(n), tuple(-x for x in n)))
        for n in keys:
            a = self.amplitudes[n]
            lines.append(" ".join(map(str, n)) + f" {format_float(a.real)} {format_float(a.imag)}")
        return "\n".join(lines) + "\n"
