"""Black-hole final-state evaporation channel.

Hilbert spaces: ``M`` (collapsing matter), ``in`` and ``out`` (field modes
inside/outside the horizon), each of dimension ``n``. The Unruh state is
stored with ``in`` as the major index, and interactions ``u`` act on
``M (x) in`` with ``M`` as the major index.

The effective transform is kept unnormalized: for ``u = I`` it equals
``s / n``. Multiply by ``n`` to renormalize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor_core as tc
from .errors import DegenerateChannelError, ShapeError, SizeError, ValidationError

MAX_N = 64
UNITARY_TOL = 1e-9


@dataclass(frozen=True)
class UnruhState:
    n: int
    state: np.ndarray

    @property
    def entropy(self) -> float:
        """Entanglement entropy ``ln n`` of either half."""
        return float(np.log(self.n))

    def reduced(self, keep: str = "out") -> np.ndarray:
        rho = np.outer(self.state, self.state.conj())
        return tc.partial_trace(rho, (self.n, self.n), keep=1 if keep == "out" else 0)


@dataclass(frozen=True)
class FinalStateFunctional:
    n: int
    s_matrix: np.ndarray
    functional: np.ndarray


@dataclass(frozen=True)
class EffectiveTransform:
    n: int
    t: np.ndarray
    interaction_label: str = "custom"


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_N:
        raise SizeError(f"n must be an integer in [1, {MAX_N}], got {n!r}")


def _check_unitary(u, dim: int, name: str) -> np.ndarray:
    u = tc.as_matrix(u, name)
    if u.shape != (dim, dim):
        raise ShapeError(f"{name} must be {dim}x{dim}, got {u.shape[0]}x{u.shape[1]}")
    err = tc.unitarity_error(u)
    if err > UNITARY_TOL:
        raise ValidationError(f"{name} is not unitary: ||{name}^dagger {name} - I||_F = {err:.3e}")
    return u


def unruh_state(n: int) -> UnruhState:
    """Maximally entangled state ``n^{-1/2} sum_j |j>_in |j>_out``."""
    _check_n(n)
    state = np.zeros(n * n, dtype=np.complex128)
    state[np.arange(n) * (n + 1)] = 1.0 / np.sqrt(n)
    return UnruhState(n=n, state=state)


def final_state_functional(s, n: int) -> FinalStateFunctional:
    """Row vector of the bra ``<Phi|_{M+in} (S (x) I)``.

    Entry ``(a, b)`` (index ``a*n + b``) is ``S[b, a] / sqrt(n)``.
    """
    _check_n(n)
    s = _check_unitary(s, n, "S")
    phi = unruh_state(n).state
    functional = phi.conj() @ tc.kron(s, tc.identity(n))
    return FinalStateFunctional(n=n, s_matrix=s, functional=functional)


def controlled_sum(n: int) -> np.ndarray:
    """Permutation ``|j, k> -> |j, (j + k) mod n>`` on ``n^2`` dimensions."""
    _check_n(n)
    v = np.zeros((n * n, n * n), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            v[j * n + (j + k) % n, j * n + k] = 1.0
    return v


def effective_transform(s, u, n: int, label: str = "custom") -> EffectiveTransform:
    """Contract ``<Phi|_{M+in} (S (x) I) U |Phi>_{in+out}`` into a map M -> out.

    With ``V = (S (x) I) U``, the input ``|m>_M`` and the Unruh pair
    ``|k>_in |k>_out``, the two ``n^{-1/2}`` normalizations combine into

        T[k, m] = (1/n) sum_i V[i*n + i, m*n + k].
    """
    _check_n(n)
    s = _check_unitary(s, n, "S")
    u = _check_unitary(u, n * n, "U")
    v = tc.kron(s, tc.identity(n)) @ u
    t = np.einsum("iimk->km", v.reshape(n, n, n, n)) / n
    return EffectiveTransform(n=n, t=t, interaction_label=label)


def unitarity_deviation(t: EffectiveTransform) -> float:
    """``||(nT)^dagger (nT) - I||_F``; zero exactly when ``nT`` is unitary."""
    nt = t.n * t.t
    return tc.frobenius_norm(nt.conj().T @ nt - np.eye(t.n))


def postselect_probability(t: EffectiveTransform, m: int) -> float:
    """Born weight ``||T|m>||^2`` of the final-state projection for input ``|m>``."""
    if not 0 <= m < t.n:
        raise ValidationError(f"basis index {m} out of range [0, {t.n})")
    return float(np.sum(np.abs(t.t[:, m]) ** 2))


def stated_postselect_probability(n: int) -> float:
    """The success probability ``1/n`` quoted for the unmodified proposal."""
    return 1.0 / n


def output_gram(t: EffectiveTransform) -> np.ndarray:
    """Gram matrix of the normalized output states ``T|m> / ||T|m>||``.

    All-ones (up to phases) means every input lands on the same ray; the
    identity means outputs stay perfectly distinguishable.
    """
    norms = np.linalg.norm(t.t, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateChannelError(f"T annihilates basis input(s) {zero.tolist()}")
    cols = t.t / norms
    return cols.conj().T @ cols
