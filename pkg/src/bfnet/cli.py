"""Command-line front end.

Job files are JSON::

    {
      "schema": 1,
      "modes": [{"type": "fock", "n": 1}, {"type": "fock", "n": 1}],
      "network": {"type": "beamsplitter", "theta": 0.7853981633974483, "phi": 0.0},
      "cutoff": 12,
      "tolerances": {"product_tol": 1e-9},
      "outputs": {"report": "hom.txt", "dump_series": "hom.series", "dump_fock": "hom.fock"}
    }

Network types: ``beamsplitter`` (theta, phi), ``haar`` (n, seed),
``orthogonal`` (n, seed), ``matrix`` (dim, entries as row-major [re, im]
pairs). Mode types: ``coherent`` (alpha), ``squeezed`` (gamma, axis_phase),
``displaced_squeezed`` (y, gamma, axis_phase), ``fock`` (n), ``cat`` (alpha,
parity); complex values are numbers or [re, im] pairs.

Exit codes: 0 on agreement, 1 on usage errors, 2 when the analytic verdict,
the numerical product test or the two simulation paths disagree.

Tolerance knobs can be overridden from the environment, which takes
precedence over the job file: BFNET_PRODUCT_TOL, BFNET_LAMBDA_TOL,
BFNET_ORACLE_TOL, BFNET_SEPARABILITY_TOL.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import os
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .bfseries import MAX_FOCK_CUTOFF
from .entangle import EntanglementReport, product_test
from .fockvector import format_float
from .network import NetworkUnitary, haar_random_orthogonal, haar_random_unitary, make_beamsplitter
from .states import spec_from_json
from .suite import SEPARABILITY_TOL, log_separability, random_suite, simulate, simulate_oracle
from .theorem import LAMBDA_TOL, TheoremVerdict, classify

SCHEMA_VERSION = 1
ORACLE_TOL = 1e-10
CSV_COLUMNS = ["param", "value", "min_purity", "max_entropy_bits", "deficit", "verdict", "reason", "agree"]
TOLERANCE_KEYS = {
    "product_tol": "BFNET_PRODUCT_TOL",
    "lambda_tol": "BFNET_LAMBDA_TOL",
    "oracle_tol": "BFNET_ORACLE_TOL",
    "separability_tol": "BFNET_SEPARABILITY_TOL",
}
OUTPUT_KEYS = {"report", "dump_series", "dump_fock"}


class JobError(ValueError):
    pass


@dataclass
class JobSpec:
    modes: list
    network: NetworkUnitary
    cutoff: int
    tolerances: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise JobError(f"{where}: missing field {key!r}")
    return data[key]


def _number(v, where: str, integer: bool = False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
        raise JobError(f"{where}: expected {'an integer' if integer else 'a number'}, got {v!r}")
    return v


def _parse_network(data) -> NetworkUnitary:
    if not isinstance(data, dict):
        raise JobError("network: expected an object")
    kind = _require(data, "type", "network")
    allowed = {
        "beamsplitter": {"theta", "phi"},
        "haar": {"n", "seed"},
        "orthogonal": {"n", "seed"},
        "matrix": {"dim", "entries"},
    }
    if kind not in allowed:
        raise JobError(f"network.type: unknown network type {kind!r}; expected one of {sorted(allowed)}")
    extra = set(data) - allowed[kind] - {"type"}
    if extra:
        raise JobError(f"network: unknown field(s) {sorted(extra)} for type {kind!r}")
    try:
        if kind == "beamsplitter":
            theta = _number(_require(data, "theta", "network"), "network.theta")
            phi = _number(data.get("phi", 0.0), "network.phi")
            return make_beamsplitter(float(theta), float(phi))
        if kind in ("haar", "orthogonal"):
            n = _number(_require(data, "n", "network"), "network.n", integer=True)
            seed = _number(_require(data, "seed", "network"), "network.seed", integer=True)
            gen = haar_random_unitary if kind == "haar" else haar_random_orthogonal
            return gen(n, seed)
        _number(_require(data, "dim", "network"), "network.dim", integer=True)
        _require(data, "entries", "network")
        return NetworkUnitary.from_json(data)
    except JobError:
        raise
    except (ValueError, TypeError) as exc:
        raise JobError(f"network: {exc}") from None


def _tolerance(tolerances: dict, key: str, default: float) -> float:
    env = os.environ.get(TOLERANCE_KEYS[key])
    if env is not None:
        try:
            return float(env)
        except ValueError:
            raise JobError(f"environment {TOLERANCE_KEYS[key]}: not a number: {env!r}") from None
    return float(tolerances.get(key, default))


def parse_job(data) -> JobSpec:
    if not isinstance(data, dict):
        raise JobError("job: top level must be an object")
    extra = set(data) - {"schema", "modes", "network", "cutoff", "tolerances", "outputs"}
    if extra:
        raise JobError(f"job: unknown field(s) {sorted(extra)}")
    schema = _require(data, "schema", "job")
    if schema != SCHEMA_VERSION:
        raise JobError(f"schema: unsupported version {schema!r} (expected {SCHEMA_VERSION})")
    modes_raw = _require(data, "modes", "job")
    if not isinstance(modes_raw, list) or not modes_raw:
        raise JobError("modes: expected a nonempty list")
    modes = []
    for i, m in enumerate(modes_raw):
        try:
            modes.append(spec_from_json(m))
        except (ValueError, TypeError) as exc:
            raise JobError(f"modes[{i}]: {exc}") from None
    network = _parse_network(_require(data, "network", "job"))
    if network.dim != len(modes):
        raise JobError(f"network: dimension {network.dim} does not match {len(modes)} modes")
    cutoff = _number(data.get("cutoff", 12), "cutoff", integer=True)
    if not 1 <= cutoff <= MAX_FOCK_CUTOFF:
        raise JobError(f"cutoff: must lie in 1..{MAX_FOCK_CUTOFF}, got {cutoff}")
    for i, m in enumerate(modes):
        if getattr(m, "n", 0) > cutoff:
            raise JobError(f"modes[{i}]: photon number exceeds cutoff {cutoff}")
    tolerances = data.get("tolerances", {})
    if not isinstance(tolerances, dict) or set(tolerances) - set(TOLERANCE_KEYS):
        raise JobError(f"tolerances: expected an object with keys from {sorted(TOLERANCE_KEYS)}")
    for k, v in tolerances.items():
        _number(v, f"tolerances.{k}")
    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict) or set(outputs) - OUTPUT_KEYS:
        raise JobError(f"outputs: expected an object with keys from {sorted(OUTPUT_KEYS)}")
    return JobSpec(modes, network, cutoff, dict(tolerances), dict(outputs), data)


def load_job(path: str) -> JobSpec:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise JobError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise JobError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_job(data)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class JobResult:
    report: EntanglementReport
    verdict: TheoremVerdict
    oracle_diff: float
    separable: bool | None
    sim: object
    oracle: object
    oracle_tol: float

    @property
    def verdict_agrees(self) -> bool:
        return self.verdict.is_product == self.report.is_product

    @property
    def paths_agree(self) -> bool:
        return self.oracle_diff <= self.oracle_tol

    @property
    def separability_agrees(self) -> bool:
        return self.separable is None or self.separable == self.report.is_product

    @property
    def agree(self) -> bool:
        return self.verdict_agrees and self.paths_agree and self.separability_agrees


def evaluate_job(job: JobSpec) -> JobResult:
    tols = job.tolerances
    product_tol = _tolerance(tols, "product_tol", float("nan"))
    sim = simulate(job.modes, job.network, job.cutoff)
    oracle = simulate_oracle(job.modes, job.network, job.cutoff)
    report = product_test(sim.output, None if np.isnan(product_tol) else product_tol)
    verdict = classify(job.modes, job.network, cutoff=job.cutoff, lambda_tol=_tolerance(tols, "lambda_tol", LAMBDA_TOL))
    sep = log_separability(sim.output_series, _tolerance(tols, "separability_tol", SEPARABILITY_TOL))
    return JobResult(
        report=report,
        verdict=verdict,
        oracle_diff=sim.output.max_abs_diff(oracle),
        separable=None if sep is None else sep[0],
        sim=sim,
        oracle=oracle,
        oracle_tol=_tolerance(tols, "oracle_tol", ORACLE_TOL),
    )


def _ok(flag: bool) -> str:
    return "OK" if flag else "MISMATCH"


def format_result(res: JobResult) -> str:
    sep = "n/a" if res.separable is None else ("product" if res.separable else "entangled")
    lines = [
        "[report]",
        res.report.to_text().rstrip("\n"),
        "[verdict]",
        res.verdict.to_line(),
        "[agreement]",
        f"bf_oracle_max_abs_diff={format_float(res.oracle_diff)}",
        f"paths={_ok(res.paths_agree)}",
        f"verdict_vs_numerics={_ok(res.verdict_agrees)}",
        f"log_separability={sep}",
        f"agreement={_ok(res.agree)}",
    ]
    return "\n".join(lines) + "\n"


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def cmd_run(args) -> int:
    job = load_job(args.job)
    outputs = dict(job.outputs)
    for key in ("report", "dump_series", "dump_fock"):
        if getattr(args, key) is not None:
            outputs[key] = getattr(args, key)
    res = evaluate_job(job)
    text = format_result(res)
    sys.stdout.write(text)
    if "report" in outputs:
        _write(outputs["report"], text)
    if "dump_series" in outputs:
        _write(outputs["dump_series"], res.sim.output_series.dump())
    if "dump_fock" in outputs:
        _write(outputs["dump_fock"], res.sim.output.dump())
    return 0 if res.agree else 2


def cmd_dump(args) -> int:
    job = load_job(args.job)
    sim = simulate(job.modes, job.network, job.cutoff)
    text = {
        "input-series": sim.input_series.dump,
        "series": sim.output_series.dump,
        "fock": sim.output.dump,
    }[args.what]()
    sys.stdout.write(text)
    return 0


_PATH_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?")


def set_path(data: dict, path: str, value) -> dict:
    """Copy of ``data`` with the value at e.g. ``modes[1].gamma`` replaced."""
    out = copy.deepcopy(data)
    parts = path.split(".")
    node = out
    for i, part in enumerate(parts):
        m = _PATH_TOKEN.fullmatch(part)
        if m is None:
            raise JobError(f"--param: malformed path component {part!r}")
        key, idx = m.group(1), m.group(2)
        last = i == len(parts) - 1
        if not isinstance(node, dict):
            raise JobError(f"--param: {path!r} does not address a job field")
        if idx is None:
            if last:
                node[key] = value
            else:
                if key not in node:
                    raise JobError(f"--param: unknown field {key!r} in {path!r}")
                node = node[key]
        else:
            seq = node.get(key)
            if not isinstance(seq, list) or int(idx) >= len(seq):
                raise JobError(f"--param: index {key}[{idx}] out of range in {path!r}")
            if last:
                seq[int(idx)] = value
            else:
                node = seq[int(idx)]
    return out


def parse_grid(text: str) -> list[float]:
    if not text.strip():
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise JobError(f"--grid: expected comma-separated numbers, got {text!r}") from None


def cmd_scan(args) -> int:
    base = load_job(args.job)
    grid = parse_grid(args.grid)
    jobs = []
    for v in grid:
        val = int(v) if args.param.endswith(("cutoff", ".n", ".seed")) and float(v).is_integer() else v
        try:
            jobs.append((v, parse_job(set_path(base.raw, args.param, val))))
        except JobError as exc:
            raise JobError(f"--param {args.param}={v}: {exc}") from None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    all_agree = True
    for v, job in jobs:
        res = evaluate_job(job)
        all_agree &= res.agree
        writer.writerow(
            [
                args.param,
                format_float(v),
                format_float(res.report.min_purity),
                format_float(res.report.max_entropy),
                format_float(res.report.truncation_deficit),
                res.verdict.prediction.value,
                res.verdict.reason.value,
                _ok(res.agree),
            ]
        )
    if args.out:
        _write(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0 if all_agree else 2


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise JobError(f"--dims: expected comma-separated integers, got {text!r}") from None
    if not dims or min(dims) < 2:
        raise JobError("--dims: every dimension must be >= 2")
    return dims


def cmd_suite(args) -> int:
    if args.count < 1:
        raise JobError("--count must be >= 1")
    dims = _parse_dims(args.dims)
    tol = args.tol
    if tol is None and os.environ.get("BFNET_PRODUCT_TOL"):
        tol = float(os.environ["BFNET_PRODUCT_TOL"])
    summary = random_suite(args.seed, args.count, dims, args.cutoff, tol)
    for r in summary.results:
        if args.verbose or not r.agree or r.dual_agree is False:
            c = r.case
            dual = "n/a" if r.dual_agree is None else _ok(r.dual_agree)
            print(
                f"case seed={c.seed} dim={c.network.dim} family={c.family} network={c.network_kind} "
                f"verdict={r.verdict.prediction.value} reason={r.verdict.reason.value} "
                f"numerics={'Product' if r.report.is_product else 'Entangled'} "
                f"min_purity={format_float(r.report.min_purity)} tol={format_float(r.report.tolerance_used)} "
                f"agree={_ok(r.agree)} dual={dual}"
            )
    dual_ok = summary.dual_checked - len(summary.dual_mismatches)
    print(f"{summary.agreed}/{summary.count} agree")
    print(f"dual product tests: {dual_ok}/{summary.dual_checked} agree")
    if summary.mismatches or summary.dual_mismatches:
        seeds = sorted({r.case.seed for r in summary.mismatches + summary.dual_mismatches})
        print("mismatched case seeds: " + " ".join(map(str, seeds)))
        return 2
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="bfnet",
        description="Simulate linear-optical networks on pure product inputs and test for modal entanglement.",
        epilog="Environment overrides: " + ", ".join(sorted(TOLERANCE_KEYS.values())),
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one job: both simulation paths, report, verdict and agreement")
    r.add_argument("job", help="JSON job file")
    r.add_argument("--report", help="also write the report to this path")
    r.add_argument("--dump-series", dest="dump_series", help="write the output BF coefficients to this path")
    r.add_argument("--dump-fock", dest="dump_fock", help="write the output Fock amplitudes to this path")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scan", help="sweep one job parameter and emit CSV")
    s.add_argument("job", help="JSON job file")
    s.add_argument("--param", required=True, help="parameter path, e.g. modes[1].gamma or network.theta")
    s.add_argument("--grid", required=True, help="comma-separated values (empty for header only)")
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_scan)

    q = sub.add_parser("suite", help="randomized classifier-vs-numerics suite")
    q.add_argument("--seed", type=int, default=7)
    q.add_argument("--count", type=int, default=100)
    q.add_argument("--dims", default="2,3", help="comma-separated mode counts (default 2,3)")
    q.add_argument("--cutoff", type=int, default=12)
    q.add_argument("--tol", type=float, default=None, help="fixed product-test tolerance (default: deficit-aware)")
    q.add_argument("--verbose", action="store_true", help="print every case, not only mismatches")
    q.set_defaults(func=cmd_suite)

    d = sub.add_parser("dump", help="print a series or Fock dump for a job")
    d.add_argument("job", help="JSON job file")
    d.add_argument("--what", choices=["series", "input-series", "fock"], default="series")
    d.set_defaults(func=cmd_dump)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except JobError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
