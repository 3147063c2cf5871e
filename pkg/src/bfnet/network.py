"""N-port linear-optical networks.

A network is stored as the N x N unitary ``U`` acting on creation operators,
``a_j^dag -> sum_k U[j, k] a_k^dag``. Rows index input modes, columns index
output modes. The global phase is fixed so that the vacuum is left invariant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-10
ZERO_THRESHOLD = 1e-12
PHASE_TOL = 1e-9


@dataclass(frozen=True)
class NetworkUnitary:
    """Validated network matrix.

    The stored array is a read-only copy; ``matrix`` may be handed out freely.
    """

    matrix: np.ndarray
    unitarity_tol: float = UNITARITY_TOL

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"network matrix must be square and non-empty, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("network matrix has non-finite entries")
        err = unitarity_error(m)
        if err > self.unitarity_tol:
            raise ValueError(f"matrix is not unitary: max|U^dag U - I| = {err:.3e} > {self.unitarity_tol:.1e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def elementwise_power(self, d: int) -> np.ndarray:
        return self.matrix**d

    def to_json(self) -> dict:
        return {"dim": self.dim, "entries": [[float(v.real), float(v.imag)] for v in self.matrix.ravel()]}

    @classmethod
    def from_json(cls, data: dict) -> "NetworkUnitary":
        n = int(data["dim"])
        entries = data["entries"]
        if len(entries) != n * n:
            raise ValueError(f"expected {n * n} entries for dim={n}, got {len(entries)}")
        vals = np.array([complex(re, im) for re, im in entries]).reshape(n, n)
        return cls(vals)


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def make_beamsplitter(theta: float, phi: float) -> NetworkUnitary:
    """Two-mode beamsplitter ``[[cos t, e^{-i phi} sin t], [-e^{i phi} sin t, cos t]]``.

    ``theta`` in [0, pi/2] sets the reflectivity, ``phi`` in [0, 2 pi) the
    relative output phase.
    """
    if not 0.0 <= theta <= np.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    if not 0.0 <= phi < 2 * np.pi:
        raise ValueError(f"phi must lie in [0, 2 pi), got {phi}")
    c, s = np.cos(theta), np.sin(theta)
    return NetworkUnitary(np.array([[c, np.exp(-1j * phi) * s], [-np.exp(1j * phi) * s, c]]))


def haar_random_unitary(n: int, seed: int) -> NetworkUnitary:
    """Haar-distributed n x n unitary, reproducible for a fixed seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return NetworkUnitary(q)


def haar_random_orthogonal(n: int, seed: int) -> NetworkUnitary:
    """Haar-distributed real orthogonal n x n matrix."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    return NetworkUnitary(q.astype(complex))


def dft_unitary(n: int) -> NetworkUnitary:
    k = np.arange(n)
    return NetworkUnitary(np.exp(2j * np.pi * np.outer(k, k) / n) / np.sqrt(n))


def permutation_unitary(perm) -> NetworkUnitary:
    perm = list(perm)
    m = np.zeros((len(perm), len(perm)), dtype=complex)
    m[np.arange(len(perm)), perm] = 1.0
    return NetworkUnitary(m)


def direct_sum(*blocks: NetworkUnitary) -> NetworkUnitary:
    n = sum(b.dim for b in blocks)
    m = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        m[i : i + b.dim, i : i + b.dim] = b.matrix
        i += b.dim
    return NetworkUnitary(m)


def rephase(u: NetworkUnitary, row_phases, col_phases) -> NetworkUnitary:
    """``diag(e^{i row}) U diag(e^{i col})``."""
    rows = np.exp(1j * np.asarray(row_phases, dtype=float))
    cols = np.exp(1j * np.asarray(col_phases, dtype=float))
    return NetworkUnitary(rows[:, None] * u.matrix * cols[None, :])


# ---------------------------------------------------------------------------
# structure


@dataclass(frozen=True)
class StructureReport:
    connected: bool
    nontrivial: bool
    zero_threshold: float
    max_modulus: float
    num_blocks: int


def connected_blocks(u: NetworkUnitary, zero_threshold: float = ZERO_THRESHOLD) -> list[tuple[list[int], list[int]]]:
    """Components of the bipartite support graph as ``(input modes, output modes)``.

    Blocks are ordered by their smallest input mode; indices inside each block
    are sorted.
    """
    support = np.abs(u.matrix) > zero_threshold
    n = u.dim
    row_seen = [False] * n
    col_seen = [False] * n
    blocks = []
    for start in range(n):
        if row_seen[start]:
            continue
        rows, cols = [], []
        row_seen[start] = True
        queue = deque([("r", start)])
        while queue:
            side, i = queue.popleft()
            if side == "r":
                rows.append(i)
                for j in np.flatnonzero(support[i]):
                    if not col_seen[j]:
                        col_seen[j] = True
                        queue.append(("c", int(j)))
            else:
                cols.append(i)
                for k in np.flatnonzero(support[:, i]):
                    if not row_seen[k]:
                        row_seen[k] = True
                        queue.append(("r", int(k)))
        blocks.append((sorted(rows), sorted(cols)))
    return blocks


def structure_report(u: NetworkUnitary, zero_threshold: float = ZERO_THRESHOLD) -> StructureReport:
    blocks = connected_blocks(u, zero_threshold)
    max_mod = float(np.max(np.abs(u.matrix)))
    return StructureReport(
        connected=len(blocks) == 1,
        nontrivial=max_mod < 1.0 - zero_threshold,
        zero_threshold=zero_threshold,
        max_modulus=max_mod,
        num_blocks=len(blocks),
    )


# ---------------------------------------------------------------------------
# rephasing to a real matrix


def _wrap_half(x):
    # phases only matter modulo pi here
    return (np.asarray(x) + np.pi / 2) % np.pi - np.pi / 2


def _dist_mod_pi(x):
    r = np.mod(x, np.pi)
    return np.minimum(r, np.pi - r)


@dataclass(frozen=True)
class RephasingWitness:
    feasible: bool
    row_phases: np.ndarray
    col_phases: np.ndarray
    residual: float

    def apply(self, u: NetworkUnitary) -> np.ndarray:
        rows = np.exp(1j * self.row_phases)
        cols = np.exp(1j * self.col_phases)
        return rows[:, None] * u.matrix * cols[None, :]


def _propagate_phases(u, support, row_phases, row_fixed):
    """Spanning-forest propagation of ``arg U_kj + a_k + b_j = 0``.

    Rows flagged in ``row_fixed`` keep their given phase; a component with no
    fixed row is anchored at its first row with phase 0.
    """
    n = u.shape[0]
    args = np.angle(u)
    a = np.array(row_phases, dtype=float)
    b = np.zeros(n)
    row_seen = np.zeros(n, bool)
    col_seen = np.zeros(n, bool)
    order = [k for k in range(n) if row_fixed[k]] + [k for k in range(n) if not row_fixed[k]]
    for start in order:
        if row_seen[start]:
            continue
        if not row_fixed[start]:
            a[start] = 0.0
        row_seen[start] = True
        queue = deque([("r", start)])
        while queue:
            side, i = queue.popleft()
            if side == "r":
                for j in np.flatnonzero(support[i]):
                    if not col_seen[j]:
                        col_seen[j] = True
                        b[j] = -args[i, j] - a[i]
                        queue.append(("c", j))
            else:
                for k in np.flatnonzero(support[:, i]):
                    if not row_seen[k]:
                        row_seen[k] = True
                        if not row_fixed[k]:
                            a[k] = -args[k, i] - b[i]
                        queue.append(("r", k))
    resid = _dist_mod_pi(args + a[:, None] + b[None, :])
    residual = float(np.max(resid[support])) if support.any() else 0.0
    return _wrap_half(a), _wrap_half(b), residual


def real_rephasing_witness(
    u: NetworkUnitary, phase_tol: float = PHASE_TOL, zero_threshold: float = ZERO_THRESHOLD
) -> RephasingWitness:
    """Find row/column phases making ``diag(e^{ia}) U diag(e^{ib})`` real.

    Works modulo pi, so negative real entries are allowed. Infeasibility is a
    normal outcome, reported through ``feasible``.
    """
    support = np.abs(u.matrix) > zero_threshold
    n = u.dim
    a, b, residual = _propagate_phases(u.matrix, support, np.zeros(n), np.zeros(n, bool))
    return RephasingWitness(residual <= phase_tol, a, b, residual)


def rephasing_with_fixed_rows(
    u: NetworkUnitary, row_phases, phase_tol: float = PHASE_TOL, zero_threshold: float = ZERO_THRESHOLD
) -> RephasingWitness:
    """As :func:`real_rephasing_witness` but with every row phase prescribed."""
    support = np.abs(u.matrix) > zero_threshold
    n = u.dim
    a, b, residual = _propagate_phases(u.matrix, support, row_phases, np.ones(n, bool))
    return RephasingWitness(residual <= phase_tol, a, b, residual)


# ---------------------------------------------------------------------------
# norms of element-wise powers


@dataclass(frozen=True)
class NormReport:
    degree: int
    one_norm: float
    one_norm_transpose: float
    spectral_norm: float


def elementwise_power_norms(u: NetworkUnitary, d: int) -> NormReport:
    """1-norms of ``U_d`` and ``U_d^T`` and the spectral norm of ``U_d^T``.

    ``U_d`` has entries ``U_kj**d``. The 1-norm is the maximum column sum of
    absolute values.
    """
    if d < 2:
        raise ValueError(f"degree must be >= 2, got {d}")
    ud = u.elementwise_power(d)
    absd = np.abs(ud)
    return NormReport(
        degree=d,
        one_norm=float(absd.sum(axis=0).max()),
        one_norm_transpose=float(absd.sum(axis=1).max()),
        spectral_norm=float(np.linalg.svd(ud.T, compute_uv=False)[0]),
    )
