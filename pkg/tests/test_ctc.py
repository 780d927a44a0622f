import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evapctc import ctc
from evapctc.circuit_dsl import load_bundled
from evapctc.ctc import (
    CNOT,
    LIAR,
    PAULI_X,
    SWAP,
    XORG,
    And,
    Circuit,
    CircuitError,
    Const,
    CtcGate,
    Fork,
    GateNode,
    Not,
    Verdict,
)
from evapctc.errors import CapacityError, ConvergenceError, ShapeError, ValidationError
from oracles import (
    BITFLIP_SUPEROP,
    CNOT_SIGMA1_SUPEROP,
    brute_consistency,
    interpret,
    random_density,
)

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
MIXED = np.eye(2, dtype=complex) / 2
OFFDIAG = np.array([[0, 1], [1, 0]], dtype=complex)

FIG2 = Circuit(
    inputs=("x",),
    ctc_wires=("y",),
    nodes=(Fork("x", ("a", "b")), GateNode(XORG, "a", "y", "c"), And("b", "c", "z")),
    outputs=("z",),
)


class TestGates:
    def test_xorg_table(self):
        for x, y in itertools.product((0, 1), repeat=2):
            assert XORG(x, y) == (x ^ y, y)

    def test_liar_table(self):
        for x, y in itertools.product((0, 1), repeat=2):
            assert LIAR(x, y) == (y ^ 1, x)

    def test_from_mapping_requires_total_table(self):
        with pytest.raises(ValidationError):
            CtcGate.from_mapping("P", {(0, 0): (0, 0)})

    def test_bad_bits(self):
        with pytest.raises(ValidationError):
            CtcGate("B", ((0, 2), (0, 0), (0, 0), (0, 0)))

    def test_gate_unitary(self):
        np.testing.assert_array_equal(ctc.gate_unitary(LIAR), np.kron(np.eye(2), PAULI_X))
        u = ctc.gate_unitary(XORG)
        for f, c in itertools.product((0, 1), repeat=2):
            col = u[:, 2 * f + c]
            assert col[2 * c + (f ^ c)] == 1

    def test_irreversible(self):
        const = CtcGate("K", ((0, 0),) * 4)
        with pytest.raises(ValidationError):
            ctc.gate_unitary(const)


class TestConsistency:
    def test_fig2_x0(self):
        rep = ctc.solve_consistency(FIG2, (0,))
        assert rep.consistent_ctc_assignments == ((0,), (1,))
        assert rep.outputs == ((0,),)

    def test_fig2_x1(self):
        rep = ctc.solve_consistency(FIG2, (1,))
        assert rep.consistent_ctc_assignments == ()
        assert rep.outputs == ()

    @pytest.mark.parametrize("x", [0, 1])
    def test_liar_on_input(self, x):
        c = Circuit(("x",), ("y",), (GateNode(LIAR, "x", "y", "z"),), ("z",))
        assert ctc.solve_consistency(c, (x,)).consistent_ctc_assignments == ()

    def test_no_ctc_single_assignment(self):
        c = Circuit(("x",), (), (Not("x", "y"),), ("y",))
        for x in (0, 1):
            rep = ctc.solve_consistency(c, (x,))
            assert rep.consistent_ctc_assignments == ((),)
            assert rep.outputs == ((1 - x,),)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            ctc.solve_consistency(self._chain(ctc.MAX_CTC_WIRES + 1), ())

    @staticmethod
    def _chain(k):
        # gate i reads z_i forward and emits y_i as z_{i+1}; consistency forces
        # every z_i = 0, so y_0..y_{k-2} = 0 and the last CTC bit is free.
        nodes = [Const(0, "z0")]
        for i in range(k):
            nodes.append(GateNode(XORG, f"z{i}", f"y{i}", f"z{i + 1}"))
        return Circuit((), tuple(f"y{i}" for i in range(k)), tuple(nodes), (f"z{k}",))

    def test_chain_matches_brute_force(self):
        c = self._chain(10)
        consistent, outs = brute_consistency(c, ())
        rep = ctc.solve_consistency(c, ())
        assert list(rep.consistent_ctc_assignments) == consistent
        assert list(rep.outputs) == outs

    def test_twenty_wires(self):
        k = ctc.MAX_CTC_WIRES
        rep = ctc.solve_consistency(self._chain(k), ())
        assert rep.consistent_ctc_assignments == ((0,) * k, (0,) * (k - 1) + (1,))
        assert rep.outputs == ((0,), (1,))

    def test_input_width_checked(self):
        with pytest.raises(ValidationError):
            ctc.solve_consistency(FIG2, (0, 1))

    def test_unconnected_ctc_wire(self):
        c = Circuit(("x",), ("y",), (), ("x",))
        with pytest.raises(CircuitError):
            ctc.solve_consistency(c, (0,))

    def test_read_before_defined(self):
        c = Circuit(("x",), (), (Not("q", "r"), Not("x", "q")), ("r",))
        with pytest.raises(CircuitError, match="before"):
            c.validate()

    def test_ctc_as_plain(self):
        c = Circuit(("x",), ("y",), (GateNode(XORG, "x", "y", "c"), And("c", "y", "z")), ("z",))
        with pytest.raises(CircuitError, match="plain"):
            c.validate()

    def test_double_attachment(self):
        c = Circuit(
            ("x",),
            ("y",),
            (GateNode(XORG, "x", "y", "c"), GateNode(XORG, "c", "y", "d")),
            ("d",),
        )
        with pytest.raises(CircuitError, match="more than one"):
            c.validate()


def _random_circuit(draw_ops, n_inputs, n_ctc):
    """Build a random valid circuit from a list of op codes."""
    inputs = tuple(f"i{k}" for k in range(n_inputs))
    ctcs = tuple(f"y{k}" for k in range(n_ctc))
    avail = list(inputs)
    nodes = []
    fresh = itertools.count()
    gates = [XORG, LIAR, CtcGate("P", ((1, 1), (0, 0), (0, 1), (1, 0)))]
    pending = list(ctcs)
    for op, a, b in draw_ops:
        def pick(i):
            return avail[i % len(avail)]

        out = f"w{next(fresh)}"
        if op == 0 or not avail:
            nodes.append(Const(a % 2, out))
        elif op == 1:
            nodes.append(Not(pick(a), out))
        elif op == 2:
            nodes.append(And(pick(a), pick(b), out))
        elif op == 3:
            out2 = f"w{next(fresh)}"
            nodes.append(Fork(pick(a), (out, out2)))
            avail.append(out2)
        elif pending:
            nodes.append(GateNode(gates[b % 3], pick(a), pending.pop(), out))
        else:
            nodes.append(Not(pick(a), out))
        avail.append(out)
    for y in pending:
        out = f"w{next(fresh)}"
        src = avail[-1] if avail else None
        if src is None:
            nodes.append(Const(0, "c0"))
            avail.append("c0")
            src = "c0"
        nodes.append(GateNode(XORG, src, y, out))
        avail.append(out)
    if not avail:
        nodes.append(Const(1, "c1"))
        avail.append("c1")
    return Circuit(inputs, ctcs, tuple(nodes), (avail[-1],))


ops = st.lists(st.tuples(st.integers(0, 4), st.integers(0, 50), st.integers(0, 50)), max_size=12)


@settings(max_examples=150, deadline=None)
@given(ops, st.integers(0, 3), st.integers(0, 4))
def test_consistency_matches_brute_force(draw, n_inputs, n_ctc):
    c = _random_circuit(draw, n_inputs, n_ctc)
    c.validate()
    for x in itertools.product((0, 1), repeat=n_inputs):
        rep = ctc.solve_consistency(c, x)
        consistent, outs = brute_consistency(c, x)
        assert list(rep.consistent_ctc_assignments) == consistent
        assert list(rep.outputs) == outs
        # self-verification
        for assign in rep.consistent_ctc_assignments:
            written, _ = interpret(c, x, dict(zip(c.ctc_wires, assign)))
            assert tuple(written[w] for w in c.ctc_wires) == assign


class TestPartialFunction:
    def test_fig2(self):
        assert ctc.induced_partial_function(FIG2) == {(0,): (0,), (1,): Verdict.UNDEFINED}

    def test_not_circuit(self):
        c = Circuit(("x",), (), (Not("x", "y"),), ("y",))
        assert ctc.induced_partial_function(c) == {(0,): (1,), (1,): (0,)}

    def test_bare_h(self):
        c = Circuit(("x",), ("y",), (GateNode(XORG, "x", "y", "c"),), ("c",))
        pf = ctc.induced_partial_function(c)
        assert pf[(0,)] is Verdict.AMBIGUOUS
        assert pf[(1,)] is Verdict.UNDEFINED

    def test_bundled(self):
        assert ctc.induced_partial_function(load_bundled("fig2.ctc").circuit) == {
            (0,): (0,),
            (1,): Verdict.UNDEFINED,
        }


class TestDeutschMap:
    def test_identity_u(self):
        np.testing.assert_allclose(ctc.deutsch_map(np.eye(4), KET1), np.eye(4), atol=1e-15)

    def test_cnot_sigma1_hand_superop(self):
        np.testing.assert_allclose(ctc.deutsch_map(CNOT, KET1), CNOT_SIGMA1_SUPEROP, atol=1e-15)

    def test_swap_replaces(self):
        rng = np.random.default_rng(0)
        sigma = random_density(2, rng)
        m = ctc.deutsch_map(SWAP, sigma)
        for _ in range(5):
            tau = random_density(2, rng)
            np.testing.assert_allclose(ctc.apply_superoperator(m, tau), sigma, atol=1e-12)
        res = ctc.fixed_point_space(m)
        assert res.space_dim == 1
        np.testing.assert_allclose(res.canonical, sigma, atol=1e-12)

    def test_liar_gate_is_bitflip(self):
        np.testing.assert_allclose(ctc.deutsch_map(ctc.gate_unitary(LIAR), MIXED), BITFLIP_SUPEROP, atol=1e-15)
        np.testing.assert_allclose(ctc.channel_superoperator([PAULI_X]), BITFLIP_SUPEROP, atol=1e-15)

    @pytest.mark.parametrize("seed", range(4))
    def test_trace_and_positivity_preserving(self, seed):
        rng = np.random.default_rng(seed)
        df, d = 2, 3 if seed % 2 else 2
        from evapctc.tensor_core import random_unitary

        u = random_unitary(df * d, seed + 100)
        sigma = random_density(df, rng)
        m = ctc.deutsch_map(u, sigma)
        for _ in range(20):
            out = ctc.apply_superoperator(m, random_density(d, rng))
            assert abs(np.trace(out) - 1) < 1e-12
            assert np.min(np.linalg.eigvalsh((out + out.conj().T) / 2)) >= -1e-10

    def test_validation(self):
        with pytest.raises(ValidationError):
            ctc.deutsch_map(2 * np.eye(4), KET1)
        with pytest.raises(ValidationError):
            ctc.deutsch_map(np.eye(4), np.diag([2.0, -1.0]))
        with pytest.raises(ShapeError):
            ctc.deutsch_map(np.eye(5), KET1)


class TestFixedPoints:
    def test_bitflip(self):
        res = ctc.fixed_point_space(BITFLIP_SUPEROP)
        assert res.space_dim == 2
        np.testing.assert_allclose(res.canonical, np.eye(2) / 2, atol=1e-12)
        span = np.stack([b.flatten() for b in res.basis], axis=1)
        for target in (np.eye(2) / 2, OFFDIAG / 2):
            coeffs, *_ = np.linalg.lstsq(span, target.flatten(), rcond=None)
            np.testing.assert_allclose(span @ coeffs, target.flatten(), atol=1e-12)
        for zeta in (-1, -0.5, 0, 0.5, 1):
            rho = 0.5 * (np.eye(2) + zeta * OFFDIAG)
            residual = np.linalg.norm(ctc.apply_superoperator(BITFLIP_SUPEROP, rho) - rho)
            assert residual <= 1e-12

    def test_basis_hermitian_and_fixed(self):
        res = ctc.fixed_point_space(BITFLIP_SUPEROP)
        for b in res.basis:
            np.testing.assert_allclose(b, b.conj().T, atol=1e-15)
            assert np.linalg.norm(ctc.apply_superoperator(BITFLIP_SUPEROP, b) - b) <= 1e-10

    def test_identity_map(self):
        res = ctc.fixed_point_space(np.eye(4))
        assert res.space_dim == 4
        np.testing.assert_allclose(res.canonical, MIXED, atol=1e-12)

    def test_cnot(self):
        res = ctc.solve_fixed_point(CNOT, KET1)
        assert res.space_dim == 2
        for b in res.basis:
            np.testing.assert_allclose(b, np.diag(np.diag(b)), atol=1e-12)
        np.testing.assert_allclose(res.canonical, MIXED, atol=1e-12)

    def test_liar_forward_output_is_identity(self):
        u = ctc.gate_unitary(LIAR)
        rng = np.random.default_rng(5)
        for _ in range(5):
            sigma = random_density(2, rng)
            for zeta in (-1, 0, 0.3, 1):
                tau = 0.5 * (np.eye(2) + zeta * OFFDIAG)
                np.testing.assert_allclose(ctc.forward_output(u, sigma, tau), sigma, atol=1e-12)

    def test_forward_output_trivial(self):
        rng = np.random.default_rng(6)
        sigma, tau = random_density(2, rng), random_density(2, rng)
        np.testing.assert_allclose(ctc.forward_output(np.eye(4), sigma, tau), sigma, atol=1e-12)
        np.testing.assert_allclose(ctc.forward_output(CNOT, MIXED, MIXED), MIXED, atol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_random_maps(self, seed):
        from evapctc.tensor_core import random_unitary

        rng = np.random.default_rng(seed)
        d = 2 + seed % 2
        u = random_unitary(2 * d, seed)
        sigma = random_density(2, rng)
        res = ctc.solve_fixed_point(u, sigma)
        m = ctc.deutsch_map(u, sigma)
        c = res.canonical
        assert np.linalg.norm(ctc.apply_superoperator(m, c) - c) <= 1e-10
        assert abs(np.trace(c) - 1) <= 1e-12
        assert np.min(np.linalg.eigvalsh(c)) >= -1e-10
        assert res.space_dim >= 1
        assert abs(np.trace(res.forward_output) - 1) <= 1e-12

    def test_convergence_error(self):
        # Weak amplitude damping drifts from I/2 towards |0><0| far too slowly
        # for five steps.
        gamma = 1e-3
        k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
        k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
        m = ctc.channel_superoperator([k0, k1])
        with pytest.raises(ConvergenceError) as info:
            ctc.fixed_point_space(m, max_iter=5)
        assert info.value.residual >= 0

    def test_capacity(self):
        with pytest.raises(CapacityError):
            ctc.fixed_point_space(np.eye(81))

    def test_classical_quantum_agreement(self):
        # Fig. 2 gate at x = 0: classical consistent y values = diagonal support of
        # the quantum fixed space.
        rep = ctc.solve_consistency(Circuit(("x",), ("y",), (GateNode(XORG, "x", "y", "c"),), ("c",)), (0,))
        classical = {a[0] for a in rep.consistent_ctc_assignments}
        res = ctc.fixed_point_space(ctc.deutsch_map(ctc.gate_unitary(XORG), KET0))
        support = set()
        for b in res.basis:
            np.testing.assert_allclose(b, np.diag(np.diag(b)), atol=1e-12)
            support |= {i for i in range(2) if abs(b[i, i]) > 1e-9}
        assert classical == support == {0, 1}


@pytest.mark.parametrize("perm", list(itertools.permutations(range(4))))
def test_reversible_gates_classical_fixed_points(perm):
    # For any reversible gate and classical input x, |y><y| is a quantum fixed
    # point exactly when y is a classically consistent CTC value.
    table = tuple(((p & 1), (p >> 1)) for p in perm)  # (ctc_out, fwd_out)
    gate = CtcGate("P", table)
    u = ctc.gate_unitary(gate)
    c = Circuit(("x",), ("y",), (GateNode(gate, "x", "y", "o"),), ("o",))
    for x in (0, 1):
        sigma = KET1 if x else KET0
        m = ctc.deutsch_map(u, sigma)
        rep = ctc.solve_consistency(c, (x,))
        classical = {a[0] for a in rep.consistent_ctc_assignments}
        quantum = set()
        for y in (0, 1):
            proj = KET1 if y else KET0
            if np.linalg.norm(ctc.apply_superoperator(m, proj) - proj) < 1e-12:
                quantum.add(y)
        assert classical == quantum
