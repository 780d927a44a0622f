"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128`` (2-D), state
vectors are 1-D arrays. Functions never modify their arguments.

Basis ordering for tensor products is fixed throughout the package: the
composite index ``j * dim_b + k`` corresponds to ``|j> (x) |k>``, i.e. the
left factor is the major index. This is what ``numpy.kron`` produces.

Vectorization is column-stacking, so that
``vectorize(a @ x @ b) == kron(b.T, a) @ vectorize(x)``.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, SizeError

#: Largest composite dimension ``kron`` will build.
MAX_DIM = 4096

NULL_SPACE_TOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a 2-D complex128 array (a copy if conversion is needed)."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} has non-finite entries")
    return arr


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def basis_vector(n: int, index: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.complex128)
    v[index] = 1.0
    return v


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product with the left factor as major index."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise SizeError(f"kron result {rows}x{cols} exceeds the cap of {max_dim}")
    return np.kron(a, b)


def adjoint(a) -> np.ndarray:
    """Conjugate transpose. A 1-D ket becomes a 1xN bra."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 1:
        return arr.conj()[np.newaxis, :]
    return as_matrix(arr).conj().T


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def frobenius_norm(a) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(a, dtype=np.complex128)) ** 2)))


def vectorize(a) -> np.ndarray:
    """Column-stacking vectorization."""
    return as_matrix(a).flatten(order="F")


def devectorize(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size != rows * cols:
        raise ShapeError(f"cannot reshape vector of shape {v.shape} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F").copy()


def _orthonormalize(vectors: list[np.ndarray], tol: float) -> list[np.ndarray]:
    # Modified Gram-Schmidt, two passes.
    basis: list[np.ndarray] = []
    for v in vectors:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w = w - np.vdot(q, w) * q
        norm = np.linalg.norm(w)
        if norm > tol:
            basis.append(w / norm)
    return basis


def null_space(a, tol: float = NULL_SPACE_TOL) -> list[np.ndarray]:
    """Orthonormal basis of the null space of ``a``.

    Uses Gaussian elimination with partial pivoting to reduced row echelon
    form. A pivot candidate is treated as zero when its magnitude is at most
    ``tol * ||a||_F``. Returns an empty list for full column rank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_matrix(a).copy()
    rows, cols = m.shape
    scale = frobenius_norm(m)
    threshold = tol * scale
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[p, c]) <= threshold:
            m[r:, c] = 0.0
            continue
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = m[r] / m[r, c]
        others = np.arange(rows) != r
        m[others] -= np.outer(m[others, c], m[r])
        pivots.append(c)
        r += 1

    free = [c for c in range(cols) if c not in pivots]
    raw = []
    for f in free:
        v = np.zeros(cols, dtype=np.complex128)
        v[f] = 1.0
        for i, pc in enumerate(pivots):
            v[pc] = -m[i, f]
        raw.append(v)
    return _orthonormalize(raw, 1e-14)


def partial_trace(rho, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``dims[0] x dims[1]``.

    ``keep`` is 0 to keep the left factor, 1 to keep the right.
    """
    rho = as_matrix(rho, "rho")
    da, db = dims
    if rho.shape != (da * db, da * db):
        raise ShapeError(f"operator of shape {rho.shape} does not match dims {dims}")
    t = rho.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    if keep == 1:
        return np.einsum("jajb->ab", t)
    raise ValueError("keep must be 0 or 1")


def unitarity_error(u) -> float:
    """``||u^dagger u - I||_F`` (inf for non-square input)."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return float("inf")
    return frobenius_norm(u.conj().T @ u - np.eye(u.shape[0]))


def random_unitary(n: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary from a seeded PCG64 stream.

    A complex Gaussian matrix is QR-factored and each column of Q is
    multiplied by the phase of the matching diagonal entry of R.
    """
    if n < 1:
        raise SizeError("n must be at least 1")
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def task_seeds(seed: int, count: int) -> list[int]:
    """Split one 64-bit seed into ``count`` independent 64-bit task seeds."""
    children = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
