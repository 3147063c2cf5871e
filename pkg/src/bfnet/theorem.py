"""Analytic decision procedure for modal entanglement at a network output.

For a pure product input and a connected network, the output is a product
state only in two cases:

* every mode is coherent (log of the BF function has no term above degree 1);
* every mode is Gaussian with the same squeezing strength, and the input and
  output modes can be rephased so that the quadratic log coefficients and the
  network matrix are all real.

Any term of degree >= 3 in the log of an input mode forces entanglement,
because the element-wise power ``U_d`` of a nontrivial unitary has 1-norm
strictly below one for d >= 3.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .bfseries import ensure_vacuum_overlap
from .network import (
    PHASE_TOL,
    ZERO_THRESHOLD,
    NetworkUnitary,
    NormReport,
    RephasingWitness,
    connected_blocks,
    elementwise_power_norms,
    rephasing_with_fixed_rows,
    structure_report,
)
from .states import ModeStateSpec, g_coefficients, series_g_coefficients

LAMBDA_TOL = 1e-10
DEFAULT_CUTOFF = 20


class Prediction(str, enum.Enum):
    PRODUCT = "Product"
    ENTANGLED = "Entangled"


class Reason(str, enum.Enum):
    ALL_COHERENT = "AllCoherent"
    EQUAL_SQUEEZING = "EqualSqueezingRealRephasableU"
    HIGHER_ORDER = "HigherOrderTermsPresent"
    QUADRATIC_VIOLATED = "QuadraticConditionViolated"
    TRIVIAL_OR_DISCONNECTED = "NetworkTrivialOrDisconnected"


@dataclass(frozen=True)
class TheoremVerdict:
    prediction: Prediction
    reason: Reason
    witness: dict = field(default_factory=dict)

    @property
    def is_product(self) -> bool:
        return self.prediction is Prediction.PRODUCT

    def to_line(self) -> str:
        parts = [self.prediction.value, self.reason.value]
        for k in sorted(self.witness):
            v = self.witness[k]
            if isinstance(v, (list, tuple, np.ndarray)):
                v = ",".join(f"{x:.12g}" if isinstance(x, float) else str(x) for x in np.asarray(v).tolist())
            elif isinstance(v, float):
                v = f"{v:.12g}"
            parts.append(f"{k}={v}")
        return " ".join(parts)


@dataclass(frozen=True)
class QuadraticCheck:
    holds: bool
    modulus_spread: float
    witness: RephasingWitness | None
    offdiag_residual: float


def check_quadratic_condition(
    lambda2, u: NetworkUnitary, tol: float = LAMBDA_TOL, phase_tol: float = PHASE_TOL
) -> QuadraticCheck:
    """Can quadratic log coefficients pass through ``u`` without coupling modes?

    Requires equal ``|lambda_k|`` and column phases ``b`` such that
    ``arg U_kj + arg(lambda_k) / 2 + b_j = 0 (mod pi)`` on every nonzero entry;
    then rephasing makes both the coefficients and ``U`` real. The direct
    residual ``max offdiag |U^T diag(lambda) U|`` is reported alongside.
    """
    lam = np.asarray(lambda2, dtype=complex)
    if lam.shape != (u.dim,):
        raise ValueError("need one quadratic coefficient per mode")
    U = u.matrix
    m = U.T @ np.diag(lam) @ U
    offdiag = float(np.max(np.abs(m - np.diag(np.diag(m))))) if u.dim > 1 else 0.0
    mods = np.abs(lam)
    scale = max(1.0, float(mods.max()))
    spread = float(mods.max() - mods.min())
    if mods.max() <= tol:
        zero = np.zeros(u.dim)
        return QuadraticCheck(True, spread, RephasingWitness(True, zero, zero, 0.0), offdiag)
    if spread > tol * scale:
        return QuadraticCheck(False, spread, None, offdiag)
    w = rephasing_with_fixed_rows(u, np.angle(lam) / 2, phase_tol=phase_tol)
    return QuadraticCheck(w.feasible, spread, w, offdiag)


def _lambda_table(specs, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode log coefficients after displacing modes lacking vacuum overlap."""
    ys, series = ensure_vacuum_overlap(specs, cutoff)
    rows = []
    for spec, y, s in zip(specs, ys, series):
        if spec.gaussian and y == 0:
            rows.append(g_coefficients(spec, cutoff).values)
        else:
            rows.append(series_g_coefficients(s).values)
    return ys, np.array(rows)


def _classify_connected(specs, u: NetworkUnitary, cutoff: int, lambda_tol: float, phase_tol: float):
    ys, lam = _lambda_table(specs, cutoff)
    top = max(3, cutoff - 2)
    offending = []
    for j in range(len(specs)):
        scale = max(1.0, float(np.max(np.abs(lam[j]))))
        high = np.flatnonzero(np.abs(lam[j, 3 : top + 1]) > lambda_tol * scale)
        if high.size:
            offending.append((j, int(high[0]) + 3))
    if offending:
        return TheoremVerdict(
            Prediction.ENTANGLED,
            Reason.HIGHER_ORDER,
            {"modes": [j for j, _ in offending], "degree": min(d for _, d in offending), "displacement_used": int(np.any(ys != 0))},
        )
    lam2 = lam[:, 2]
    if np.all(np.abs(lam2) <= lambda_tol):
        return TheoremVerdict(Prediction.PRODUCT, Reason.ALL_COHERENT)
    check = check_quadratic_condition(lam2, u, tol=lambda_tol, phase_tol=phase_tol)
    if check.holds:
        w = check.witness
        return TheoremVerdict(
            Prediction.PRODUCT,
            Reason.EQUAL_SQUEEZING,
            {"row_phases": w.row_phases, "col_phases": w.col_phases, "residual": w.residual},
        )
    witness = {"modulus_spread": check.modulus_spread}
    if check.witness is not None:
        witness["phase_residual"] = check.witness.residual
    return TheoremVerdict(Prediction.ENTANGLED, Reason.QUADRATIC_VIOLATED, witness)


def classify(
    specs,
    u: NetworkUnitary,
    cutoff: int = DEFAULT_CUTOFF,
    lambda_tol: float = LAMBDA_TOL,
    phase_tol: float = PHASE_TOL,
    allow_blocks: bool = True,
    zero_threshold: float = ZERO_THRESHOLD,
) -> TheoremVerdict:
    """Predict whether a pure product input leaves ``u`` as a product state.

    Disconnected networks are split into connected blocks and classified
    block by block (product iff every block is). Single-mode blocks only
    rephase a mode and never entangle. With ``allow_blocks=False`` a
    disconnected or trivial network is rejected.
    """
    specs = list(specs)
    if not all(isinstance(s, ModeStateSpec) for s in specs):
        raise TypeError("specs must be ModeStateSpec instances")
    if len(specs) != u.dim:
        raise ValueError(f"{len(specs)} mode specs for a {u.dim}-mode network")
    blocks = connected_blocks(u, zero_threshold)
    if len(blocks) == 1 and u.dim > 1:
        return _classify_connected(specs, u, cutoff, lambda_tol, phase_tol)
    if not allow_blocks:
        raise ValueError("network is disconnected or trivial; classify blocks separately")
    for rows, cols in blocks:
        if len(rows) < 2:
            continue
        sub = NetworkUnitary(u.matrix[np.ix_(rows, cols)])
        v = _classify_connected([specs[k] for k in rows], sub, cutoff, lambda_tol, phase_tol)
        if not v.is_product:
            return TheoremVerdict(v.prediction, v.reason, {**v.witness, "block_inputs": rows, "num_blocks": len(blocks)})
    return TheoremVerdict(Prediction.PRODUCT, Reason.TRIVIAL_OR_DISCONNECTED, {"num_blocks": len(blocks)})


@dataclass
class NormStrictnessReport:
    rows: list[NormReport]
    strict: list[bool]
    margins: list[float]
    probe_ratios: list[float]
    trivial: bool
    connected: bool

    @property
    def all_strict(self) -> bool:
        return all(self.strict)


def verify_norm_strictness(
    u: NetworkUnitary, d_max: int = 6, margin: float = 1e-12, probes: int = 16, seed: int = 0
) -> NormStrictnessReport:
    """Check ``||U_d||_1 < 1`` and ``||U_d^T||_1 < 1`` for d = 3..d_max.

    Also records the largest observed ``||U_d^T x|| / ||x||`` over random
    complex probes, which the strict bound caps below one. A trivial network
    is reported as non-strict rather than rejected.
    """
    if d_max < 3:
        raise ValueError("d_max must be >= 3")
    st = structure_report(u)
    rng = np.random.default_rng(seed)
    rows, strict, margins, ratios = [], [], [], []
    for d in range(3, d_max + 1):
        rep = elementwise_power_norms(u, d)
        worst = max(rep.one_norm, rep.one_norm_transpose)
        x = rng.standard_normal((u.dim, probes)) + 1j * rng.standard_normal((u.dim, probes))
        r = np.linalg.norm(u.elementwise_power(d).T @ x, axis=0) / np.linalg.norm(x, axis=0)
        rows.append(rep)
        margins.append(1.0 - worst)
        strict.append(worst < 1.0 - margin)
        ratios.append(float(r.max()))
    return NormStrictnessReport(rows, strict, margins, ratios, trivial=not st.nontrivial, connected=st.connected)
