"""Truncated multivariate power series for Bargmann-Fock functions.

A state |psi> on N modes maps to the holomorphic function

    B(z) = sum_n <n|psi> / sqrt(n_1! ... n_N!) * z_1^n_1 ... z_N^n_N .

Series are truncated by *total* degree D. A linear network acts by the
substitution z -> U z, which maps each homogeneous layer to itself, so every
identity used here holds layer by layer without truncation cross-talk.

Coefficients live in one flat array ordered graded-lexicographically: total
degree ascending, and inside a degree the exponent tuples in descending
lexicographic order, so ``(1, 0)`` precedes ``(0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fockvector import FockVector, format_float
from .network import NetworkUnitary

VACUUM_FLOOR = 1e-8
MAX_FOCK_CUTOFF = 34

# Vacuum-overlap search grid, tried in this order.
DISPLACEMENT_GRID = tuple(
    r * p for r in (0.5, 1.0, 1.5, 2.0) for p in (1.0, -1.0, 1j, -1j)
)
# Extra degrees kept while displacing single modes, then truncated away.
DISPLACEMENT_PAD = 16


def _compositions(d: int, n: int):
    """Exponent tuples of total degree d over n slots, lexicographically descending."""
    if n == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, n - 1):
            yield (first,) + rest


class Basis:
    """Multi-index bookkeeping shared by all series with the same (N, D)."""

    def __init__(self, num_modes: int, max_degree: int):
        if num_modes < 1:
            raise ValueError("num_modes must be >= 1")
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        self.num_modes = num_modes
        self.max_degree = max_degree
        rows, offsets = [], [0]
        for d in range(max_degree + 1):
            layer = list(_compositions(d, num_modes))
            rows.extend(layer)
            offsets.append(offsets[-1] + len(layer))
        self.exps = np.array(rows, dtype=np.int64).reshape(-1, num_modes)
        self.exps.setflags(write=False)
        self.offsets = tuple(offsets)
        self.size = offsets[-1]
        self._radix = np.int64(max_degree + 2)
        codes = self._encode(self.exps)
        self._order = np.argsort(codes)
        self._sorted_codes = codes[self._order]
        self._products: dict = {}
        self._raises: dict = {}
        self._cross_mask = None

    def _encode(self, exps: np.ndarray) -> np.ndarray:
        weights = self._radix ** np.arange(self.num_modes, dtype=np.int64)
        return exps @ weights

    def dim(self, d: int) -> int:
        return self.offsets[d + 1] - self.offsets[d]

    def layer_slice(self, d: int) -> slice:
        return slice(self.offsets[d], self.offsets[d + 1])

    def layer_exps(self, d: int) -> np.ndarray:
        return self.exps[self.layer_slice(d)]

    def positions(self, exps) -> np.ndarray:
        """Global positions of exponent rows (all must have degree <= D)."""
        exps = np.asarray(exps, dtype=np.int64)
        codes = self._encode(exps)
        idx = np.searchsorted(self._sorted_codes, codes)
        idx = np.minimum(idx, self.size - 1)
        if np.any(self._sorted_codes[idx] != codes):
            raise KeyError("multi-index outside the truncated basis")
        return self._order[idx]

    def position(self, n) -> int:
        n = tuple(n)
        if len(n) != self.num_modes or min(n) < 0 or sum(n) > self.max_degree:
            raise KeyError(f"multi-index {n} outside basis (N={self.num_modes}, D={self.max_degree})")
        return int(self.positions(np.array([n]))[0])

    def product_table(self, a: int, b: int) -> np.ndarray:
        """Local positions in layer a+b of every (layer-a, layer-b) exponent sum."""
        key = (a, b)
        if key not in self._products:
            s = self.layer_exps(a)[:, None, :] + self.layer_exps(b)[None, :, :]
            pos = self.positions(s.reshape(-1, self.num_modes)) - self.offsets[a + b]
            self._products[key] = pos.reshape(self.dim(a), self.dim(b))
        return self._products[key]

    def raise_map(self, d: int, k: int) -> np.ndarray:
        """Local positions in layer d+1 of ``n + e_k`` for each n in layer d."""
        key = (d, k)
        if key not in self._raises:
            e = np.zeros(self.num_modes, dtype=np.int64)
            e[k] = 1
            self._raises[key] = self.positions(self.layer_exps(d) + e) - self.offsets[d + 1]
        return self._raises[key]

    @property
    def cross_mask(self) -> np.ndarray:
        """True where a multi-index involves two or more modes."""
        if self._cross_mask is None:
            self._cross_mask = np.count_nonzero(self.exps, axis=1) >= 2
        return self._cross_mask

    def sqrt_factorials(self) -> np.ndarray:
        if self.max_degree > MAX_FOCK_CUTOFF:
            raise ValueError(f"Fock conversion limited to cutoff <= {MAX_FOCK_CUTOFF}")
        sf = np.sqrt([float(math.factorial(k)) for k in range(self.max_degree + 1)])
        return np.prod(sf[self.exps], axis=1)


@lru_cache(maxsize=64)
def get_basis(num_modes: int, max_degree: int) -> Basis:
    return Basis(num_modes, max_degree)


@dataclass(frozen=True)
class MultivariateSeries:
    """Truncated series in N variables, total degree <= ``max_degree``."""

    num_modes: int
    max_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.basis.size,):
            raise ValueError(f"expected {self.basis.size} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def basis(self) -> Basis:
        return get_basis(self.num_modes, self.max_degree)

    @classmethod
    def zeros(cls, num_modes: int, max_degree: int) -> "MultivariateSeries":
        return cls(num_modes, max_degree, np.zeros(get_basis(num_modes, max_degree).size, dtype=complex))

    @classmethod
    def from_dict(cls, num_modes: int, max_degree: int, coeffs: dict) -> "MultivariateSeries":
        basis = get_basis(num_modes, max_degree)
        c = np.zeros(basis.size, dtype=complex)
        for n, v in coeffs.items():
            c[basis.position(n)] += v
        return cls(num_modes, max_degree, c)

    def __getitem__(self, n) -> complex:
        n = tuple(n)
        if sum(n) > self.max_degree:
            return 0j
        return complex(self.coeffs[self.basis.position(n)])

    def layer(self, d: int) -> np.ndarray:
        return self.coeffs[self.basis.layer_slice(d)]

    def items(self, threshold: float = 0.0):
        for n, v in zip(self.basis.exps, self.coeffs):
            if abs(v) > threshold:
                yield tuple(int(x) for x in n), complex(v)

    def to_dict(self, threshold: float = 0.0) -> dict:
        return dict(self.items(threshold))

    def _check(self, other: "MultivariateSeries"):
        if (self.num_modes, self.max_degree) != (other.num_modes, other.max_degree):
            raise ValueError("series have different modes or cutoff")

    def __add__(self, other):
        self._check(other)
        return MultivariateSeries(self.num_modes, self.max_degree, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return MultivariateSeries(self.num_modes, self.max_degree, self.coeffs - other.coeffs)

    def scale(self, factor: complex) -> "MultivariateSeries":
        return MultivariateSeries(self.num_modes, self.max_degree, self.coeffs * factor)

    def __mul__(self, other):
        if isinstance(other, MultivariateSeries):
            return series_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def truncate(self, max_degree: int) -> "MultivariateSeries":
        if max_degree > self.max_degree:
            raise ValueError("cannot raise the cutoff of a truncated series")
        n = get_basis(self.num_modes, max_degree).size
        return MultivariateSeries(self.num_modes, max_degree, self.coeffs[:n])

    def evaluate(self, z) -> complex:
        z = np.asarray(z, dtype=complex)
        if z.shape != (self.num_modes,):
            raise ValueError("point has wrong dimension")
        return complex(np.sum(self.coeffs * np.prod(z[None, :] ** self.basis.exps, axis=1)))

    def max_abs_diff(self, other: "MultivariateSeries") -> float:
        self._check(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs)))

    def dump(self) -> str:
        lines = [f"# kind=bf-coefficients modes={self.num_modes} cutoff={self.max_degree}"]
        for n, v in zip(self.basis.exps, self.coeffs):
            lines.append(" ".join(str(int(x)) for x in n) + f" {format_float(v.real)} {format_float(v.imag)}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SingleModeSeries:
    """BF series of one mode: ``coeffs[n] = <n|psi> / sqrt(n!)``."""

    max_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.max_degree + 1,):
            raise ValueError(f"expected {self.max_degree + 1} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def amplitudes(self) -> np.ndarray:
        n = np.arange(self.max_degree + 1)
        return self.coeffs * np.sqrt([float(math.factorial(k)) for k in n])

    def norm_deficit(self) -> float:
        return max(0.0, 1.0 - float(np.sum(np.abs(self.amplitudes()) ** 2)))

    def truncate(self, max_degree: int) -> "SingleModeSeries":
        if max_degree > self.max_degree:
            raise ValueError("cannot raise the cutoff of a truncated series")
        return SingleModeSeries(max_degree, self.coeffs[: max_degree + 1])

    def as_multivariate(self) -> MultivariateSeries:
        return MultivariateSeries(1, self.max_degree, self.coeffs)


# ---------------------------------------------------------------------------
# arithmetic


def _layer_mul(basis: Basis, fa: np.ndarray, a: int, gb: np.ndarray, b: int) -> np.ndarray:
    if a == 0:
        return fa[0] * gb
    if b == 0:
        return gb[0] * fa
    table = basis.product_table(a, b).ravel()
    w = np.outer(fa, gb).ravel()
    dim = basis.dim(a + b)
    return np.bincount(table, w.real, dim) + 1j * np.bincount(table, w.imag, dim)


def series_mul(f: MultivariateSeries, g: MultivariateSeries) -> MultivariateSeries:
    """Product truncated to the common total degree."""
    f._check(g)
    basis = f.basis
    out = np.zeros(basis.size, dtype=complex)
    layers_f = [f.layer(d) for d in range(f.max_degree + 1)]
    layers_g = [g.layer(d) for d in range(g.max_degree + 1)]
    for d in range(f.max_degree + 1):
        acc = np.zeros(basis.dim(d), dtype=complex)
        for a in range(d + 1):
            fa, gb = layers_f[a], layers_g[d - a]
            if fa.any() and gb.any():
                acc += _layer_mul(basis, fa, a, gb, d - a)
        out[basis.layer_slice(d)] = acc
    return MultivariateSeries(f.num_modes, f.max_degree, out)


def series_exp(g: MultivariateSeries) -> MultivariateSeries:
    """exp of a truncated series.

    Uses ``d B_d = sum_{k=1}^{d} k G_k B_{d-k}``, which follows from applying
    the Euler operator sum_j z_j d/dz_j to B = exp(G).
    """
    basis = g.basis
    gl = [g.layer(d) for d in range(g.max_degree + 1)]
    bl = [np.array([np.exp(gl[0][0])], dtype=complex)]
    for d in range(1, g.max_degree + 1):
        acc = np.zeros(basis.dim(d), dtype=complex)
        for k in range(1, d + 1):
            if gl[k].any():
                acc += k * _layer_mul(basis, gl[k], k, bl[d - k], d - k)
        bl.append(acc / d)
    return MultivariateSeries(g.num_modes, g.max_degree, np.concatenate(bl))


class VacuumOverlapError(ValueError):
    """The series has (numerically) no constant term, so its log is undefined."""


def series_log(b: MultivariateSeries, vacuum_floor: float = VACUUM_FLOOR) -> MultivariateSeries:
    """Logarithm G with exp(G) = B as truncated series.

    ``vacuum_floor`` is relative to the coefficient norm of ``b``. Displace
    the state first (see :func:`ensure_vacuum_overlap`) if this raises.
    """
    basis = b.basis
    b0 = complex(b.coeffs[0])
    scale = float(np.linalg.norm(b.coeffs))
    if abs(b0) <= vacuum_floor * max(scale, 1e-300):
        raise VacuumOverlapError(
            f"vacuum coefficient |B(0)| = {abs(b0):.3e} is below the floor; displace the state first"
        )
    bl = [b.layer(d) for d in range(b.max_degree + 1)]
    gl = [np.array([np.log(b0)], dtype=complex)]
    for d in range(1, b.max_degree + 1):
        acc = d * bl[d].astype(complex)
        for k in range(1, d):
            if gl[k].any() and bl[d - k].any():
                acc = acc - k * _layer_mul(basis, gl[k], k, bl[d - k], d - k)
        gl.append(acc / (d * b0))
    return MultivariateSeries(b.num_modes, b.max_degree, np.concatenate(gl))


# ---------------------------------------------------------------------------
# state-level operations


def product_series(modes) -> MultivariateSeries:
    """B(z) = prod_j B_j(z_j), truncated to total degree D."""
    modes = list(modes)
    if not modes:
        raise ValueError("need at least one mode")
    D = modes[0].max_degree
    if any(m.max_degree != D for m in modes):
        raise ValueError("all modes must share max_degree")
    basis = get_basis(len(modes), D)
    c = np.ones(basis.size, dtype=complex)
    for j, m in enumerate(modes):
        c *= m.coeffs[basis.exps[:, j]]
    return MultivariateSeries(len(modes), D, c)


def substitution_matrices(u: NetworkUnitary, max_degree: int) -> list[np.ndarray]:
    """Per-layer matrices S_d with ``layer_d(B(Uz)) = S_d @ layer_d(B)``.

    Column m of S_d holds the coefficients of prod_j ((Uz)_j)^{m_j}. Columns
    of layer d+1 are built from layer d by multiplying with one linear form.
    """
    n = u.dim
    basis = get_basis(n, max_degree)
    U = u.matrix
    mats = [np.ones((1, 1), dtype=complex)]
    for d in range(max_degree):
        exps1 = basis.layer_exps(d + 1)
        first = np.argmax(exps1 > 0, axis=1)
        parent_exps = exps1.copy()
        parent_exps[np.arange(len(exps1)), first] -= 1
        parents = basis.positions(parent_exps) - basis.offsets[d]
        xp = mats[d][:, parents]
        nxt = np.zeros((basis.dim(d + 1), basis.dim(d + 1)), dtype=complex)
        for k in range(n):
            nxt[basis.raise_map(d, k), :] += xp * U[first, k][None, :]
        mats.append(nxt)
    return mats


def substitute_linear(b: MultivariateSeries, u: NetworkUnitary) -> MultivariateSeries:
    """B(z) -> B(U z): the action of the network on a BF series."""
    if b.num_modes != u.dim:
        raise ValueError(f"series has {b.num_modes} modes but network has dimension {u.dim}")
    mats = substitution_matrices(u, b.max_degree)
    out = np.concatenate([mats[d] @ b.layer(d) for d in range(b.max_degree + 1)])
    return MultivariateSeries(b.num_modes, b.max_degree, out)


def _to_dense(b: MultivariateSeries) -> np.ndarray:
    t = np.zeros((b.max_degree + 1,) * b.num_modes, dtype=complex)
    t[tuple(b.basis.exps.T)] = b.coeffs
    return t


def _shift_matrix(c: complex, D: int) -> np.ndarray:
    """T[m, n] = C(n, m) c^(n-m): coefficients of (z + c)^n."""
    t = np.zeros((D + 1, D + 1), dtype=complex)
    for n in range(D + 1):
        for m in range(n + 1):
            t[m, n] = math.comb(n, m) * c ** (n - m)
    return t


def exp_linear(y, max_degree: int) -> MultivariateSeries:
    """Truncated exp(y^T z)."""
    y = np.asarray(y, dtype=complex)
    basis = get_basis(len(y), max_degree)
    inv_fact = np.array([1.0 / math.factorial(k) for k in range(max_degree + 1)])
    c = np.prod(y[None, :] ** basis.exps * inv_fact[basis.exps], axis=1)
    return MultivariateSeries(len(y), max_degree, c)


def apply_displacement(b: MultivariateSeries, y) -> MultivariateSeries:
    """BF series of D(y)|psi>: ``B(z - conj(y)) exp(y^T z) exp(-|y|^2 / 2)``.

    The shifted factor only sees the stored coefficients, so terms above the
    cutoff of ``b`` are lost; pad the cutoff when accuracy matters.
    """
    y = np.asarray(y, dtype=complex).ravel()
    if y.shape != (b.num_modes,):
        raise ValueError(f"displacement has length {y.size}, series has {b.num_modes} modes")
    if not y.any():
        return b
    D = b.max_degree
    t = _to_dense(b)
    for j, yj in enumerate(y):
        if yj != 0:
            t = np.moveaxis(np.tensordot(_shift_matrix(-np.conj(yj), D), t, axes=([1], [j])), 0, j)
    shifted = MultivariateSeries(b.num_modes, D, t[tuple(b.basis.exps.T)])
    out = series_mul(shifted, exp_linear(y, D))
    return out.scale(np.exp(-0.5 * float(np.vdot(y, y).real)))


def displace_mode(s: SingleModeSeries, y: complex) -> SingleModeSeries:
    out = apply_displacement(s.as_multivariate(), [y])
    return SingleModeSeries(s.max_degree, out.coeffs)


def is_additively_separable(g: MultivariateSeries, tol: float) -> tuple[bool, float]:
    """Whether G(z) = sum_j G_j(z_j): no coefficient couples two modes.

    Returns the verdict and the largest cross-term magnitude.
    """
    mask = g.basis.cross_mask
    max_cross = float(np.max(np.abs(g.coeffs[mask]))) if mask.any() else 0.0
    return max_cross <= tol, max_cross


def fock_amplitudes(b: MultivariateSeries) -> FockVector:
    """amplitude(n) = coefficient(n) * sqrt(n_1! ... n_N!)."""
    amps = b.coeffs * b.basis.sqrt_factorials()
    data = {tuple(int(x) for x in n): complex(a) for n, a in zip(b.basis.exps, amps) if a != 0}
    return FockVector(b.num_modes, b.max_degree, data)


def from_fock(psi: FockVector) -> MultivariateSeries:
    basis = get_basis(psi.num_modes, psi.cutoff)
    sf = basis.sqrt_factorials()
    c = np.zeros(basis.size, dtype=complex)
    for n, a in psi.amplitudes.items():
        p = basis.position(n)
        c[p] = a / sf[p]
    return MultivariateSeries(psi.num_modes, psi.cutoff, c)


def ensure_vacuum_overlap(modes, max_degree: int, vacuum_floor: float = VACUUM_FLOOR):
    """Displace modes lacking a vacuum component.

    ``modes`` are state specs (see :mod:`bfnet.states`). Each mode whose
    series has ``|B_j(0)| <= vacuum_floor`` is displaced by the first grid
    value in :data:`DISPLACEMENT_GRID` that restores a vacuum component.
    Displacement happens at a padded cutoff before truncating to
    ``max_degree``. Returns the displacement vector and the series list.
    """
    from .states import mode_series

    ys, out = [], []
    for spec in modes:
        s = mode_series(spec, max_degree)
        if abs(s.coeffs[0]) > vacuum_floor:
            ys.append(0j)
            out.append(s)
            continue
        wide = mode_series(spec, max_degree + DISPLACEMENT_PAD)
        for y in DISPLACEMENT_GRID:
            shifted = displace_mode(wide, y)
            if abs(shifted.coeffs[0]) > vacuum_floor:
                ys.append(complex(y))
                out.append(shifted.truncate(max_degree))
                break
        else:
            raise VacuumOverlapError(f"no grid displacement gives a vacuum component for {spec!r}")
    return np.array(ys, dtype=complex), out
