"""Command-line front end.

Every JSON report has the shape ``{version, subcommand, params, results}``.
Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists. Failures print ``{version, subcommand, params, error: {code, message,
span?}}`` and exit with 1 (validation) or 2 (numerical convergence).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import circuit_dsl, ctc, evaporation, geometry
from . import tensor_core as tc
from .errors import ConvergenceError, EvapCtcError, ParseError, ValidationError

SUBCOMMANDS = ("unruh", "finalstate", "ctc", "fixedpoint", "geometry")
INTERACTIONS = ("identity", "controlled-sum", "random")
SEED_ENV = "EVAPCTC_SEED"
DEFAULT_SEED = 42


@dataclass
class RunConfig:
    subcommand: str
    n: int = 2
    seed: int = DEFAULT_SEED
    interaction: str = "identity"
    s_matrix: str = "auto"
    circuit_path: str | None = None
    gate: str = "cnot"
    sigma: str = "1"
    m: float = 1.0
    deltas: list[float] = field(default_factory=lambda: [1.0, 0.1, 0.01])
    output_format: str = "json"
    tol: float = ctc.FIXED_POINT_TOL
    step_tol: float = 1e-12
    max_iter: int = 100_000

    def params(self) -> dict:
        if self.subcommand == "unruh":
            keys = ["n"]
        elif self.subcommand == "finalstate":
            keys = ["n", "seed", "interaction", "s_matrix"]
        elif self.subcommand == "ctc":
            keys = ["circuit_path"]
        elif self.subcommand == "fixedpoint":
            keys = ["gate", "sigma", "tol", "step_tol", "max_iter"]
        else:
            keys = ["m", "deltas"]
        return {k: getattr(self, k) for k in keys}


class UsageError(ValidationError):
    code = "usage"


# -- serialization ----------------------------------------------------------


def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x + 0.0


def _complex(z) -> list:
    return [_num(z.real), _num(z.imag)]


def _matrix(a) -> list:
    a = np.asarray(a)
    if a.ndim == 1:
        return [_complex(z) for z in a]
    return [[_complex(z) for z in row] for row in a]


def _bits(bits) -> str:
    return "".join(str(b) for b in bits)


# -- experiments ------------------------------------------------------------


def _unruh(cfg: RunConfig) -> tuple[dict, list[list]]:
    st = evaporation.unruh_state(cfg.n)
    mixed = np.eye(cfg.n) / cfg.n
    red_out, red_in = st.reduced("out"), st.reduced("in")
    results = {
        "n": cfg.n,
        "entropy": _num(st.entropy),
        "amplitudes": _matrix(st.state),
        "norm": _num(np.linalg.norm(st.state)),
        "reduced_out": _matrix(red_out),
        "reduced_in": _matrix(red_in),
        "reduced_out_deviation": _num(tc.frobenius_norm(red_out - mixed)),
        "reduced_in_deviation": _num(tc.frobenius_norm(red_in - mixed)),
    }
    rows = [["index", "re", "im"]] + [[i, _num(z.real), _num(z.imag)] for i, z in enumerate(st.state)]
    return results, rows


def _finalstate(cfg: RunConfig) -> tuple[dict, list[list]]:
    if cfg.interaction not in INTERACTIONS:
        raise UsageError(f"unknown interaction '{cfg.interaction}'")
    n = cfg.n
    evaporation._check_n(n)
    s_seed, u_seed = tc.task_seeds(cfg.seed, 2)
    s_kind = cfg.s_matrix
    if s_kind == "auto":
        s_kind = "identity" if cfg.interaction == "controlled-sum" else "random"
    if s_kind == "identity":
        s = tc.identity(n)
    elif s_kind == "random":
        s = tc.random_unitary(n, s_seed)
    else:
        raise UsageError(f"unknown S choice '{cfg.s_matrix}'")
    if cfg.interaction == "identity":
        u = tc.identity(n * n)
    elif cfg.interaction == "controlled-sum":
        u = evaporation.controlled_sum(n)
    else:
        u = tc.random_unitary(n * n, u_seed)
    t = evaporation.effective_transform(s, u, n, label=cfg.interaction)
    probs = [evaporation.postselect_probability(t, m) for m in range(n)]
    results = {
        "n": n,
        "s_kind": s_kind,
        "interaction_label": t.interaction_label,
        "s": _matrix(s),
        "t": _matrix(t.t),
        "n_times_t": _matrix(n * t.t),
        "unitarity_deviation": _num(evaporation.unitarity_deviation(t)),
        "postselect_probabilities": [_num(p) for p in probs],
        "stated_postselect_probability": _num(evaporation.stated_postselect_probability(n)),
        "output_gram": _matrix(evaporation.output_gram(t)),
    }
    rows = [["row", "col", "re", "im"]]
    rows += [[i, j, _num(t.t[i, j].real), _num(t.t[i, j].imag)] for i in range(n) for j in range(n)]
    return results, rows


def _load_circuit(path: str | None) -> circuit_dsl.ParsedCircuit:
    if not path:
        raise UsageError("--circuit is required")
    p = Path(path)
    if p.is_file():
        return circuit_dsl.parse(p.read_bytes())
    if p.name in circuit_dsl.BUNDLED and p.name == path:
        return circuit_dsl.load_bundled(p.name)
    raise UsageError(f"circuit file '{path}' not found")


def _ctc(cfg: RunConfig) -> tuple[dict, list[list]]:
    pc = _load_circuit(cfg.circuit_path)
    c = pc.circuit
    pf = ctc.induced_partial_function(c)
    reports = []
    rows = [["input", "verdict", "consistent_assignments"]]
    for x, value in pf.items():
        rep = ctc.solve_consistency(c, x)
        verdict = str(value) if isinstance(value, ctc.Verdict) else _bits(value)
        reports.append(
            {
                "input": _bits(x),
                "consistent_ctc_assignments": [_bits(a) for a in rep.consistent_ctc_assignments],
                "outputs": [_bits(o) for o in rep.outputs],
                "verdict": verdict,
            }
        )
        rows.append([_bits(x), verdict, len(rep.consistent_ctc_assignments)])
    results = {
        "name": pc.name,
        "inputs": list(c.inputs),
        "ctc_wires": list(c.ctc_wires),
        "outputs": list(c.outputs),
        "reports": reports,
        "partial_function": {r["input"]: r["verdict"] for r in reports},
    }
    return results, rows


FIXEDPOINT_GATES = {
    "cnot": ctc.CNOT,
    "bitflip": ctc.gate_unitary(ctc.LIAR),
    "swap": ctc.SWAP,
}
SIGMAS = {
    "0": np.diag([1.0, 0.0]).astype(np.complex128),
    "1": np.diag([0.0, 1.0]).astype(np.complex128),
    "mixed": np.eye(2, dtype=np.complex128) / 2,
}


def _fixedpoint(cfg: RunConfig) -> tuple[dict, list[list]]:
    if cfg.gate not in FIXEDPOINT_GATES:
        raise UsageError(f"unknown gate '{cfg.gate}'")
    if cfg.sigma not in SIGMAS:
        raise UsageError(f"unknown sigma '{cfg.sigma}'")
    u, sigma = FIXEDPOINT_GATES[cfg.gate], SIGMAS[cfg.sigma]
    res = ctc.solve_fixed_point(u, sigma, tol=cfg.tol, step_tol=cfg.step_tol, max_iter=cfg.max_iter)
    results = {
        "ctc_dim": res.dim,
        "fixed_space_dim": res.space_dim,
        "basis": [_matrix(b) for b in res.basis],
        "canonical": _matrix(res.canonical),
        "canonical_eigenvalues": [_num(v) for v in np.linalg.eigvalsh(res.canonical)],
        "forward_output": _matrix(res.forward_output),
        "residual": _num(res.residual),
        "iterations": res.iterations,
    }
    d = res.dim
    rows = [["row", "col", "re", "im"]]
    rows += [
        [i, j, _num(res.canonical[i, j].real), _num(res.canonical[i, j].imag)]
        for i in range(d)
        for j in range(d)
    ]
    return results, rows


def _geometry(cfg: RunConfig) -> tuple[dict, list[list]]:
    scan = geometry.horizon_scan(cfg.m, cfg.deltas)
    limit = geometry.horizon_limit_row(cfg.m)
    table = [[_num(v) for v in row] for row in scan + [limit]]
    results = {
        "columns": ["r", "g00", "grr", "K"],
        "rows": table[:-1],
        "limit_row": table[-1],
        "horizon_kretschmann": _num(geometry.horizon_kretschmann(cfg.m)),
    }
    return results, [["r", "g00", "grr", "K"]] + table


_RUNNERS = {
    "unruh": _unruh,
    "finalstate": _finalstate,
    "ctc": _ctc,
    "fixedpoint": _fixedpoint,
    "geometry": _geometry,
}


def _render_csv(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one experiment. Returns ``(exit_code, stdout_text)``."""
    envelope = {"version": __version__, "subcommand": cfg.subcommand, "params": cfg.params()}
    try:
        if cfg.subcommand not in _RUNNERS:
            raise UsageError(f"unknown subcommand '{cfg.subcommand}'")
        if cfg.output_format not in ("json", "csv"):
            raise UsageError(f"unknown format '{cfg.output_format}'")
        results, rows = _RUNNERS[cfg.subcommand](cfg)
    except EvapCtcError as exc:
        error = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, ParseError):
            error["message"] = exc.bare_message
            error["span"] = {"line": exc.span.line, "column": exc.span.column}
        if isinstance(exc, ConvergenceError):
            error["residual"] = _num(exc.residual)
        envelope["error"] = error
        code = 2 if isinstance(exc, ConvergenceError) else 1
        return code, json.dumps(envelope, sort_keys=True) + "\n"
    if cfg.output_format == "csv":
        return 0, _render_csv(rows)
    envelope["results"] = results
    return 0, json.dumps(envelope, sort_keys=True, indent=2) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _deltas(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid delta list '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    env_seed = os.environ.get(SEED_ENV)
    default_seed = int(env_seed) if env_seed not in (None, "") else DEFAULT_SEED

    common = _Parser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="evapctc", description="Final-state evaporation and CTC circuit experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("unruh", parents=[common], help="maximally entangled in/out state")
    p.add_argument("--n", type=int, default=2)

    p = sub.add_parser("finalstate", parents=[common], help="effective transform of the final-state channel")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--interaction", choices=INTERACTIONS, default="identity")
    p.add_argument(
        "--s-matrix",
        dest="s_matrix",
        choices=("auto", "random", "identity"),
        default="auto",
        help="S used in the final state; auto = identity for controlled-sum, random otherwise",
    )

    p = sub.add_parser("ctc", parents=[common], help="classical consistency solving of a .ctc circuit")
    p.add_argument("--circuit", dest="circuit_path", required=True)

    p = sub.add_parser("fixedpoint", parents=[common], help="Deutsch fixed points of a two-qubit gate")
    p.add_argument("--gate", choices=tuple(FIXEDPOINT_GATES), default="cnot")
    p.add_argument("--sigma", choices=tuple(SIGMAS), default="1")
    p.add_argument("--tol", type=float, default=ctc.FIXED_POINT_TOL)
    p.add_argument("--step-tol", dest="step_tol", type=float, default=1e-12)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=100_000)

    p = sub.add_parser("geometry", parents=[common], help="Schwarzschild horizon scan")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--deltas", type=_deltas, default=[1.0, 0.1, 0.01])
    return parser


def parse_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(**vars(ns))


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(json.dumps({"version": __version__, "error": {"code": exc.code, "message": str(exc)}}, sort_keys=True))
        print(f"evapctc: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # malformed EVAPCTC_SEED
        print(json.dumps({"version": __version__, "error": {"code": "usage", "message": str(exc)}}, sort_keys=True))
        return 1
    code, text = run(cfg)
    sys.stdout.write(text)
    if code:
        print(f"evapctc: {cfg.subcommand} failed (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
