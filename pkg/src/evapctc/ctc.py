"""Self-referential circuits: classical consistency and Deutsch fixed points.

Classical side
--------------
A :class:`Circuit` is an ordered list of nodes over named boolean wires.
Chronology-violating (CTC) wires carry a value back in time: each is read by
the ``ctc`` input slot of exactly one :class:`CtcGate` node, and the same
gate writes the value that must be sent back. An assignment of the CTC wires
is consistent when forward propagation reproduces it.

Gate tables map ``(forward_in, ctc_in) -> (ctc_out, forward_out)``.

Quantum side
------------
Unitaries act on ``forward (x) ctc`` with the forward system as the major
index. Superoperators use the column-stacking convention of
:mod:`evapctc.tensor_core`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import tensor_core as tc
from .errors import CapacityError, ConvergenceError, ShapeError, ValidationError

MAX_CTC_WIRES = 20
MAX_INPUT_WIDTH = 16
MAX_CTC_DIM = 8
FIXED_POINT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Classical circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CtcGate:
    """Two-bit gate with one forward slot and one CTC slot.

    ``table[2 * fwd + ctc] == (ctc_out, forward_out)``.
    """

    name: str
    table: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.table) != 4:
            raise ValidationError(f"gate {self.name}: truth table must have 4 rows")
        for row in self.table:
            if len(row) != 2 or any(b not in (0, 1) for b in row):
                raise ValidationError(f"gate {self.name}: truth table entries must be bit pairs")
        object.__setattr__(self, "table", tuple(tuple(int(b) for b in row) for row in self.table))

    @classmethod
    def from_mapping(cls, name: str, mapping) -> "CtcGate":
        """Build from ``{(fwd, ctc): (ctc_out, forward_out)}``."""
        missing = [k for k in ((0, 0), (0, 1), (1, 0), (1, 1)) if k not in mapping]
        if missing:
            raise ValidationError(f"gate {name}: truth table missing inputs {missing}")
        return cls(name, tuple(tuple(mapping[(f, c)]) for f in (0, 1) for c in (0, 1)))

    @property
    def truth_table(self) -> dict[tuple[int, int], tuple[int, int]]:
        return {(f, c): self.table[2 * f + c] for f in (0, 1) for c in (0, 1)}

    def __call__(self, fwd: int, ctc: int) -> tuple[int, int]:
        return self.table[2 * fwd + ctc]

    @property
    def is_reversible(self) -> bool:
        return len({(fo, co) for co, fo in self.table}) == 4


# x, y -> (x XOR y, y)
XORG = CtcGate("XORG", ((0, 0), (1, 1), (1, 0), (0, 1)))
# x, y -> (NOT y, x)
LIAR = CtcGate("LIAR", ((1, 0), (0, 0), (1, 1), (0, 1)))

BUILTIN_GATES = {"XORG": XORG, "LIAR": LIAR}


@dataclass(frozen=True)
class Fork:
    src: str
    outs: tuple[str, str]

    @property
    def reads(self):
        return (self.src,)

    @property
    def writes(self):
        return self.outs


@dataclass(frozen=True)
class And:
    a: str
    b: str
    out: str

    @property
    def reads(self):
        return (self.a, self.b)

    @property
    def writes(self):
        return (self.out,)


@dataclass(frozen=True)
class Not:
    src: str
    out: str

    @property
    def reads(self):
        return (self.src,)

    @property
    def writes(self):
        return (self.out,)


@dataclass(frozen=True)
class Const:
    bit: int
    out: str

    def __post_init__(self):
        if self.bit not in (0, 1):
            raise ValidationError(f"constant must be 0 or 1, got {self.bit!r}")

    @property
    def reads(self):
        return ()

    @property
    def writes(self):
        return (self.out,)


@dataclass(frozen=True)
class GateNode:
    gate: CtcGate
    fwd: str
    ctc: str
    out: str

    @property
    def reads(self):
        return (self.fwd,)

    @property
    def writes(self):
        return (self.out,)


Node = Union[Fork, And, Not, Const, GateNode]


class CircuitError(ValidationError):
    """Circuit invariant violation, pointing at a wire and optionally a node."""

    def __init__(self, message: str, wire: str | None = None, node_index: int | None = None):
        super().__init__(message)
        self.wire = wire
        self.node_index = node_index


@dataclass(frozen=True)
class Circuit:
    inputs: tuple[str, ...]
    ctc_wires: tuple[str, ...]
    nodes: tuple[Node, ...]
    outputs: tuple[str, ...]

    def validate(self) -> None:
        """Check acyclic forward ordering and one gate per CTC wire."""
        ctc = set(self.ctc_wires)
        if len(ctc) != len(self.ctc_wires):
            dup = _first_duplicate(self.ctc_wires)
            raise CircuitError(f"CTC wire '{dup}' declared twice", wire=dup)
        defined: set[str] = set()
        for name in self.inputs:
            if name in ctc:
                raise CircuitError(f"CTC wire '{name}' used as a plain input", wire=name)
            if name in defined:
                raise CircuitError(f"wire '{name}' defined twice", wire=name)
            defined.add(name)
        ctc_users: dict[str, int] = {}
        for i, node in enumerate(self.nodes):
            for w in node.reads:
                if w in ctc:
                    raise CircuitError(f"CTC wire '{w}' used as a plain wire", wire=w, node_index=i)
                if w not in defined:
                    raise CircuitError(
                        f"wire '{w}' is read before it is defined", wire=w, node_index=i
                    )
            if isinstance(node, GateNode):
                if node.ctc not in ctc:
                    raise CircuitError(
                        f"'{node.ctc}' is not a declared CTC wire", wire=node.ctc, node_index=i
                    )
                if node.ctc in ctc_users:
                    raise CircuitError(
                        f"CTC wire '{node.ctc}' is attached to more than one gate",
                        wire=node.ctc,
                        node_index=i,
                    )
                ctc_users[node.ctc] = i
            for w in node.writes:
                if w in ctc:
                    raise CircuitError(f"CTC wire '{w}' used as a plain wire", wire=w, node_index=i)
                if w in defined:
                    raise CircuitError(f"wire '{w}' defined twice", wire=w, node_index=i)
                defined.add(w)
        for w in self.ctc_wires:
            if w not in ctc_users:
                raise CircuitError(f"CTC wire '{w}' is not connected to any gate", wire=w)
        if not self.outputs:
            raise CircuitError("circuit has no outputs")
        for w in self.outputs:
            if w in ctc:
                raise CircuitError(f"CTC wire '{w}' used as a plain output", wire=w)
            if w not in defined:
                raise CircuitError(f"output wire '{w}' is never defined", wire=w)


def _first_duplicate(names):
    seen = set()
    for n in names:
        if n in seen:
            return n
        seen.add(n)
    return None


@dataclass(frozen=True)
class ConsistencyReport:
    input_assignment: tuple[int, ...]
    consistent_ctc_assignments: tuple[tuple[int, ...], ...]
    outputs: tuple[tuple[int, ...], ...]  # sorted, distinct


class Verdict(enum.Enum):
    UNDEFINED = "UNDEFINED"
    AMBIGUOUS = "AMBIGUOUS"

    def __str__(self) -> str:
        return self.value


def propagate(c: Circuit, inputs, ctc_values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the circuit forward for a batch of CTC assignments.

    ``ctc_values`` has shape ``(batch, len(c.ctc_wires))``. Returns the values
    written back to each CTC wire (same shape) and the outputs
    ``(batch, len(c.outputs))``, all as uint8.
    """
    ctc_values = np.asarray(ctc_values, dtype=np.uint8)
    batch = ctc_values.shape[0]
    wires = {name: np.full(batch, int(bit), dtype=np.uint8) for name, bit in zip(c.inputs, inputs)}
    ctc_col = {name: i for i, name in enumerate(c.ctc_wires)}
    written = np.zeros_like(ctc_values)
    for node in c.nodes:
        if isinstance(node, Fork):
            wires[node.outs[0]] = wires[node.src]
            wires[node.outs[1]] = wires[node.src]
        elif isinstance(node, And):
            wires[node.out] = wires[node.a] & wires[node.b]
        elif isinstance(node, Not):
            wires[node.out] = 1 - wires[node.src]
        elif isinstance(node, Const):
            wires[node.out] = np.full(batch, node.bit, dtype=np.uint8)
        else:
            col = ctc_col[node.ctc]
            table = np.asarray(node.gate.table, dtype=np.uint8)
            idx = 2 * wires[node.fwd] + ctc_values[:, col]
            written[:, col] = table[idx, 0]
            wires[node.out] = table[idx, 1]
    outs = np.stack([wires[w] for w in c.outputs], axis=1) if c.outputs else np.zeros((batch, 0), np.uint8)
    return written, outs


def _all_assignments(k: int) -> np.ndarray:
    # Row a holds the bits of a, first CTC wire most significant.
    a = np.arange(2**k, dtype=np.int64)[:, None]
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)[None, :]
    return ((a >> shifts) & 1).astype(np.uint8)


def solve_consistency(c: Circuit, inputs) -> ConsistencyReport:
    """Enumerate every CTC assignment and keep the self-reproducing ones."""
    c.validate()
    k = len(c.ctc_wires)
    if k > MAX_CTC_WIRES:
        raise CapacityError(f"{k} CTC wires exceeds the exhaustive limit of {MAX_CTC_WIRES}")
    inputs = tuple(int(b) for b in inputs)
    if len(inputs) != len(c.inputs):
        raise ValidationError(f"expected {len(c.inputs)} input bits, got {len(inputs)}")
    if any(b not in (0, 1) for b in inputs):
        raise ValidationError("input bits must be 0 or 1")
    candidates = _all_assignments(k)
    written, outs = propagate(c, inputs, candidates)
    ok = np.all(written == candidates, axis=1)
    consistent = tuple(tuple(int(b) for b in row) for row in candidates[ok])
    distinct = sorted({tuple(int(b) for b in row) for row in outs[ok]})
    return ConsistencyReport(inputs, consistent, tuple(distinct))


def induced_partial_function(c: Circuit) -> dict[tuple[int, ...], Union[tuple[int, ...], Verdict]]:
    """Input -> unique output, UNDEFINED (no consistent history) or AMBIGUOUS."""
    c.validate()
    width = len(c.inputs)
    if width > MAX_INPUT_WIDTH:
        raise CapacityError(f"input width {width} exceeds the limit of {MAX_INPUT_WIDTH}")
    result = {}
    for row in _all_assignments(width):
        x = tuple(int(b) for b in row)
        report = solve_consistency(c, x)
        if not report.outputs:
            result[x] = Verdict.UNDEFINED
        elif len(report.outputs) == 1:
            result[x] = report.outputs[0]
        else:
            result[x] = Verdict.AMBIGUOUS
    return result


# ---------------------------------------------------------------------------
# Quantum fixed points
# ---------------------------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)

#: sum_{x,y} |x XOR y, y><x, y| with the forward bit first.
CNOT = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128
)

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


def gate_unitary(gate: CtcGate) -> np.ndarray:
    """Permutation unitary on ``forward (x) ctc`` realizing a reversible gate.

    ``|f, c> -> |forward_out, ctc_out>``.
    """
    if not gate.is_reversible:
        raise ValidationError(f"gate {gate.name} is not reversible")
    u = np.zeros((4, 4), dtype=np.complex128)
    for f in (0, 1):
        for c in (0, 1):
            co, fo = gate(f, c)
            u[2 * fo + co, 2 * f + c] = 1.0
    return u


@dataclass(frozen=True)
class FixedPointResult:
    dim: int
    basis: tuple[np.ndarray, ...]
    canonical: np.ndarray
    forward_output: np.ndarray | None = None
    residual: float = 0.0
    iterations: int = 0

    @property
    def space_dim(self) -> int:
        """Dimension of the eigenvalue-1 subspace."""
        return len(self.basis)


def check_density(rho, name: str = "sigma", tol: float = FIXED_POINT_TOL) -> np.ndarray:
    rho = tc.as_matrix(rho, name)
    if rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"{name} must be square, got {rho.shape}")
    if tc.frobenius_norm(rho - rho.conj().T) > tol:
        raise ValidationError(f"{name} is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"{name} has trace {tr.real:.6g}, expected 1")
    low = float(np.min(np.linalg.eigvalsh(rho)))
    if low < -tol:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {low:.3e})")
    return rho


def _split_dims(u, sigma) -> tuple[np.ndarray, np.ndarray, int, int]:
    u = tc.as_matrix(u, "u")
    sigma = check_density(sigma, "sigma")
    if u.shape[0] != u.shape[1]:
        raise ShapeError(f"u must be square, got {u.shape}")
    err = tc.unitarity_error(u)
    if err > 1e-9:
        raise ValidationError(f"u is not unitary: ||u^dagger u - I||_F = {err:.3e}")
    df = sigma.shape[0]
    if u.shape[0] % df:
        raise ShapeError(f"u of size {u.shape[0]} does not factor over forward dimension {df}")
    return u, sigma, df, u.shape[0] // df


def apply_superoperator(superop, tau) -> np.ndarray:
    tau = tc.as_matrix(tau, "tau")
    d = tau.shape[0]
    return tc.devectorize(np.asarray(superop) @ tc.vectorize(tau), d, d)


def channel_superoperator(kraus) -> np.ndarray:
    """Superoperator of ``tau -> sum_k K tau K^dagger``."""
    return sum(np.kron(np.asarray(k).conj(), np.asarray(k)) for k in kraus)


def deutsch_map(u, sigma) -> np.ndarray:
    """Superoperator of ``tau -> Tr_forward[u (sigma (x) tau) u^dagger]``."""
    u, sigma, df, d = _split_dims(u, sigma)
    superop = np.zeros((d * d, d * d), dtype=np.complex128)
    for j in range(d):
        for i in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j] = 1.0
            out = u @ np.kron(sigma, e) @ u.conj().T
            superop[:, j * d + i] = tc.vectorize(tc.partial_trace(out, (df, d), keep=1))
    return superop


def forward_output(u, sigma, tau) -> np.ndarray:
    """``Tr_ctc[u (sigma (x) tau) u^dagger]`` on the forward system."""
    u, sigma, df, d = _split_dims(u, sigma)
    tau = check_density(tau, "tau")
    if tau.shape[0] != d:
        raise ShapeError(f"tau must be {d}x{d}, got {tau.shape}")
    out = u @ np.kron(sigma, tau) @ u.conj().T
    return tc.partial_trace(out, (df, d), keep=0)


def _hermitian_basis(vectors: list[np.ndarray], d: int, superop, tol: float) -> list[np.ndarray]:
    candidates = []
    for v in vectors:
        b = tc.devectorize(v, d, d)
        candidates.append((b + b.conj().T) / 2)
        candidates.append((b - b.conj().T) / 2j)
    basis: list[np.ndarray] = []
    for h in candidates:
        if tc.frobenius_norm(apply_superoperator(superop, h) - h) > tol * max(1.0, tc.frobenius_norm(h)):
            continue
        w = h.copy()
        for _ in range(2):
            for q in basis:
                w = w - np.real(np.vdot(q, w)) * q
        norm = tc.frobenius_norm(w)
        if norm > 1e-8:
            basis.append(w / norm)
    return basis


def fixed_point_space(
    superop, tol: float = FIXED_POINT_TOL, step_tol: float = 1e-12, max_iter: int = 100_000
) -> FixedPointResult:
    """Eigenvalue-1 subspace of a CTC map and one canonical density fixed point.

    The basis is Hermitian and orthonormal in the Frobenius inner product.
    The canonical fixed point is the limit of the lazy iteration
    ``tau <- (tau + map(tau)) / 2`` from ``I/D``; it has the same limit as the
    Cesaro averages of the plain iterates but converges geometrically.
    """
    superop = tc.as_matrix(superop, "map")
    n = superop.shape[0]
    d = int(round(np.sqrt(n)))
    if superop.shape != (n, n) or d * d != n:
        raise ShapeError(f"map must be D^2 x D^2, got {superop.shape}")
    if d > MAX_CTC_DIM:
        raise CapacityError(f"CTC dimension {d} exceeds the limit of {MAX_CTC_DIM}")

    vectors = tc.null_space(superop - np.eye(n), tol=tol)
    basis = _hermitian_basis(vectors, d, superop, tol)

    x = tc.vectorize(np.eye(d) / d)
    step = np.inf
    it = 0
    while it < max_iter:
        it += 1
        nxt = 0.5 * (x + superop @ x)
        step = float(np.linalg.norm(nxt - x))
        x = nxt
        if step <= step_tol:
            break
    canonical = tc.devectorize(x, d, d)
    canonical = (canonical + canonical.conj().T) / 2
    tr = np.trace(canonical).real
    if abs(tr) < 1e-300:
        raise ConvergenceError("iteration collapsed to a traceless operator", residual=float("nan"))
    canonical = canonical / tr
    residual = tc.frobenius_norm(apply_superoperator(superop, canonical) - canonical)
    if step > step_tol or residual > tol:
        raise ConvergenceError(
            f"fixed-point iteration did not converge after {it} steps (residual {residual:.3e})",
            residual=residual,
        )
    return FixedPointResult(dim=d, basis=tuple(basis), canonical=canonical, residual=residual, iterations=it)


def solve_fixed_point(u, sigma, **kwargs) -> FixedPointResult:
    """Fixed points of the Deutsch map of ``u`` plus the forward output."""
    result = fixed_point_space(deutsch_map(u, sigma), **kwargs)
    out = forward_output(u, sigma, result.canonical)
    return FixedPointResult(
        dim=result.dim,
        basis=result.basis,
        canonical=result.canonical,
        forward_output=out,
        residual=result.residual,
        iterations=result.iterations,
    )
