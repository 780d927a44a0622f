"""Brute-force reference computations used by the tests.

These deliberately avoid the library's code paths: explicit index loops
instead of kron/einsum, a scalar dict-based circuit interpreter instead of
the batched propagator.
"""

import itertools
import math

import numpy as np


def contraction_oracle(s, u, n):
    """T[k, m] by pushing |m>_M |Phi>_{in,out} through U, then S, then <Phi|_{M,in}."""
    t = np.zeros((n, n), dtype=complex)
    amp = 1 / math.sqrt(n)
    for m in range(n):
        # psi[M][in][out]
        psi = [[[0j] * n for _ in range(n)] for _ in range(n)]
        for j in range(n):
            psi[m][j][j] = amp
        psi2 = [[[0j] * n for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(n):
                for o in range(n):
                    acc = 0j
                    for c in range(n):
                        for d in range(n):
                            acc += u[a * n + b, c * n + d] * psi[c][d][o]
                    psi2[a][b][o] = acc
        psi3 = [[[0j] * n for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(n):
                for o in range(n):
                    psi3[a][b][o] = sum(s[a, c] * psi2[c][b][o] for c in range(n))
        for o in range(n):
            t[o, m] = sum(amp * psi3[j][j][o] for j in range(n))
    return t


def reduced_by_summation(state, n, keep):
    rho = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            for j in range(n):
                if keep == "out":
                    rho[a, b] += state[j * n + a] * np.conj(state[j * n + b])
                else:
                    rho[a, b] += state[a * n + j] * np.conj(state[b * n + j])
    return rho


def interpret(circuit, inputs, ctc_values):
    """Scalar interpreter. Returns (written ctc dict, output tuple)."""
    from evapctc.ctc import And, Const, Fork, Not

    w = dict(zip(circuit.inputs, inputs))
    written = {}
    for node in circuit.nodes:
        if isinstance(node, Fork):
            w[node.outs[0]] = w[node.outs[1]] = w[node.src]
        elif isinstance(node, And):
            w[node.out] = int(w[node.a] and w[node.b])
        elif isinstance(node, Not):
            w[node.out] = 1 - w[node.src]
        elif isinstance(node, Const):
            w[node.out] = node.bit
        else:
            ctc_out, fwd_out = node.gate.truth_table[(w[node.fwd], ctc_values[node.ctc])]
            written[node.ctc] = ctc_out
            w[node.out] = fwd_out
    return written, tuple(w[o] for o in circuit.outputs)


def brute_consistency(circuit, inputs):
    consistent, outs = [], set()
    for vals in itertools.product((0, 1), repeat=len(circuit.ctc_wires)):
        assign = dict(zip(circuit.ctc_wires, vals))
        written, out = interpret(circuit, inputs, assign)
        if written == assign:
            consistent.append(vals)
            outs.add(out)
    return consistent, sorted(outs)


# tau -> diag(tau), column-stacked: keeps vec entries 0 (tau_00) and 3 (tau_11).
CNOT_SIGMA1_SUPEROP = np.diag([1, 0, 0, 1]).astype(complex)

# tau -> X tau X swaps (0,0)<->(1,1) and (1,0)<->(0,1): vec 0<->3, 1<->2.
BITFLIP_SUPEROP = np.array(
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=complex
)


def random_density(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho)
