"""Simulation pipeline and the randomized classifier-vs-numerics suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bfseries import VACUUM_FLOOR, is_additively_separable, product_series, series_log, substitute_linear
from .entangle import EntanglementReport, product_test
from .focksim import apply_network_oracle, from_bf
from .network import NetworkUnitary, haar_random_orthogonal, haar_random_unitary, make_beamsplitter
from .states import Cat, Coherent, DisplacedSqueezed, Fock, SqueezedVacuum, mode_series
from .theorem import TheoremVerdict, classify

SEPARABILITY_TOL = 1e-8

FAMILIES = (
    "coherent",
    "equal_squeezed",
    "equal_displaced_squeezed",
    "unequal_squeezed",
    "coherent_plus_squeezed",
    "fock",
    "cat",
)


@dataclass(frozen=True)
class Simulation:
    input_series: object
    output_series: object
    output: object  # FockVector from the series path


def simulate(specs, u: NetworkUnitary, cutoff: int) -> Simulation:
    b = product_series([mode_series(s, cutoff) for s in specs])
    out = substitute_linear(b, u)
    return Simulation(b, out, from_bf(out))


def simulate_oracle(specs, u: NetworkUnitary, cutoff: int):
    b = product_series([mode_series(s, cutoff) for s in specs])
    return apply_network_oracle(from_bf(b), u)


def log_separability(series, tol: float = SEPARABILITY_TOL, vacuum_floor: float = VACUUM_FLOOR):
    """Product test on the log of the BF series, or None without vacuum overlap.

    ``tol`` is relative to the largest log coefficient (at least 1).
    """
    if abs(series.coeffs[0]) <= vacuum_floor:
        return None
    g = series_log(series, vacuum_floor)
    scale = max(1.0, float(np.max(np.abs(g.coeffs))))
    ok, cross = is_additively_separable(g, tol * scale)
    return ok, cross


# ---------------------------------------------------------------------------
# case generation


def _random_network(rng, n: int):
    if n == 2:
        theta = float(rng.uniform(0.2, np.pi / 2 - 0.2))
        if rng.random() < 0.5:
            phi = float(rng.choice([0.0, np.pi]))
            return "real_bs", make_beamsplitter(theta, phi)
        phi = float(rng.uniform(0.5, np.pi - 0.5) + rng.choice([0.0, np.pi]))
        return "complex_bs", make_beamsplitter(theta, phi)
    sub = int(rng.integers(0, 2**31))
    if rng.random() < 0.5:
        return f"orthogonal{n}", haar_random_orthogonal(n, sub)
    return f"haar{n}", haar_random_unitary(n, sub)


def _distinct_gammas(rng, n: int, lo: float, hi: float, gap: float) -> list[float]:
    while True:
        g = np.sort(rng.uniform(lo, hi, n))
        if np.all(np.diff(g) >= gap):
            return [float(x) for x in rng.permutation(g)]


def _cplx(rng, r: float) -> complex:
    return complex(rng.uniform(-r, r), rng.uniform(-r, r))


def _random_specs(rng, family: str, n: int):
    gmax = 0.45 if n <= 3 else 0.3
    if family == "coherent":
        return [Coherent(_cplx(rng, 0.6)) for _ in range(n)]
    if family == "equal_squeezed":
        g = float(rng.uniform(0.15, gmax))
        return [SqueezedVacuum(g) for _ in range(n)]
    if family == "equal_displaced_squeezed":
        g = float(rng.uniform(0.15, gmax))
        return [DisplacedSqueezed(_cplx(rng, 0.4), g) for _ in range(n)]
    if family == "unequal_squeezed":
        return [SqueezedVacuum(g) for g in _distinct_gammas(rng, n, 0.05, gmax + 0.1, 0.1)]
    if family == "coherent_plus_squeezed":
        specs = [Coherent(_cplx(rng, 0.5)) for _ in range(n)]
        specs[int(rng.integers(n))] = SqueezedVacuum(float(rng.uniform(0.2, gmax)))
        return specs
    if family == "fock":
        ns = [int(x) for x in rng.integers(0, 3, n)]
        if not any(ns):
            ns[int(rng.integers(n))] = 1
        return [Fock(k) for k in ns]
    if family == "cat":
        specs = [Coherent(_cplx(rng, 0.4)) if rng.random() < 0.5 else Fock(0) for _ in range(n)]
        for k in rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False):
            alpha = rng.uniform(0.6, 1.2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            specs[int(k)] = Cat(complex(alpha), int(rng.choice([1, -1])))
        return specs
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class Case:
    seed: int
    family: str
    network_kind: str
    specs: list
    network: NetworkUnitary


def generate_case(case_seed: int, dims=(2, 3)) -> Case:
    rng = np.random.default_rng(case_seed)
    n = int(rng.choice(list(dims)))
    family = str(rng.choice(FAMILIES))
    kind, u = _random_network(rng, n)
    return Case(case_seed, family, kind, _random_specs(rng, family, n), u)


def case_seeds(seed: int, count: int) -> list[int]:
    return [seed * 100_000 + i for i in range(count)]


@dataclass(frozen=True)
class CaseResult:
    case: Case
    verdict: TheoremVerdict
    report: EntanglementReport
    separable: bool | None
    max_cross: float | None

    @property
    def agree(self) -> bool:
        return self.verdict.is_product == self.report.is_product

    @property
    def dual_agree(self) -> bool | None:
        if self.separable is None:
            return None
        return self.separable == self.report.is_product


def run_case(case: Case, cutoff: int, tol: float | None = None) -> CaseResult:
    verdict = classify(case.specs, case.network, cutoff=cutoff)
    sim = simulate(case.specs, case.network, cutoff)
    report = product_test(sim.output, tol)
    sep = log_separability(sim.output_series)
    return CaseResult(case, verdict, report, None if sep is None else sep[0], None if sep is None else sep[1])


@dataclass(frozen=True)
class SuiteSummary:
    results: list

    @property
    def count(self) -> int:
        return len(self.results)

    @property
    def agreed(self) -> int:
        return sum(r.agree for r in self.results)

    @property
    def mismatches(self) -> list:
        return [r for r in self.results if not r.agree]

    @property
    def dual_checked(self) -> int:
        return sum(r.dual_agree is not None for r in self.results)

    @property
    def dual_mismatches(self) -> list:
        return [r for r in self.results if r.dual_agree is False]


def random_suite(seed: int, count: int, dims=(2, 3), cutoff: int = 12, tol: float | None = None) -> SuiteSummary:
    if count < 1:
        raise ValueError("count must be >= 1")
    results = [run_case(generate_case(s, dims), cutoff, tol) for s in case_seeds(seed, count)]
    return SuiteSummary(results)
