"""Dense complex linear algebra for small Hilbert spaces and their superoperators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

HERMITIAN_ATOL = 1e-12
EIG_CLIP = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def hermitianize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dag(a))


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    return bool(np.max(np.abs(a - dag(a)), initial=0.0) <= atol * scale)


def kron(*ops) -> np.ndarray:
    """Kronecker product of any number of matrices, left to right."""
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, as_matrix(op))
    return out


def embed(op, dims, index: int) -> np.ndarray:
    """Place a local operator on subsystem ``index`` of a tensor product space."""
    factors = [np.eye(d) for d in dims]
    factors[index] = op
    return kron(*factors)


def _phase_fix(vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        k = int(np.argmax(np.abs(col)))
        if abs(col[k]) > 0:
            vecs[:, j] = col * (abs(col[k]) / col[k])
    return vecs


def herm_eig(h, degeneracy_tol: float = 1e-10) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with deterministic output.

    Eigenvector phases are fixed so the largest-magnitude component is real and
    positive. Within a degenerate cluster, vectors are ordered by descending real
    part of their first nonzero component.
    """
    h = as_matrix(h)
    if not is_hermitian(h):
        raise ValueError("herm_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(hermitianize(h))
    v = _phase_fix(v)

    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    order = list(range(len(w)))
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[start] <= degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            block = order[start:stop]

            def key(j):
                col = v[:, j]
                nz = np.flatnonzero(np.abs(col) > 1e-12)
                return -col[nz[0]].real if len(nz) else 0.0

            order[start:stop] = sorted(block, key=key)
        start = stop
    return SpectralDecomposition(w[order], v[:, order])


def matrix_exp(m, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * m) by scaling and squaring with Pade approximants."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix_exp requires a square matrix")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(scale * m)
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(out)):
        raise OverflowError("matrix exponential overflowed")
    return out


def partial_trace(rho, dims, keep) -> np.ndarray:
    """Reduced state on the subsystem(s) ``keep`` of a tensor-product state."""
    rho = as_matrix(rho)
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0] or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dims {dims} do not match state of shape {rho.shape}")
    keep = [keep] if np.isscalar(keep) else sorted(keep)
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"subsystem index out of range: {keep}")
    t = rho.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for j in range(n):
        if j not in keep:
            col[j] = row[j]
    out = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(d, d)


def von_neumann_entropy(rho) -> float:
    """S = -sum(l ln l) in nats, eigenvalues below the clip floor count as zero."""
    lam = np.linalg.eigvalsh(hermitianize(as_matrix(rho)))
    lam = lam[lam > EIG_CLIP]
    return float(-np.sum(lam * np.log(lam)))


def trace_distance(a, b) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitianize(as_matrix(a) - as_matrix(b))))))


def check_density(rho, atol: float = 1e-12) -> None:
    """Raise ValueError unless rho is Hermitian, unit trace and PSD within atol."""
    rho = as_matrix(rho)
    if not is_hermitian(rho, atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > atol:
        raise ValueError(f"density matrix has trace {tr.real:.3g}")
    lmin = np.linalg.eigvalsh(hermitianize(rho))[0]
    if lmin < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {lmin:.3g}")


def gibbs_state(h, temperature: float) -> np.ndarray:
    spec = herm_eig(h)
    e = spec.eigenvalues
    w = np.exp(-(e - e[0]) / temperature)
    w /= w.sum()
    v = spec.eigenvectors
    return (v * w) @ dag(v)


def vec(rho: np.ndarray) -> np.ndarray:
    """Row-major vectorization, matching ``spre``/``spost`` below."""
    return np.asarray(rho).reshape(-1)


def unvec(x: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(x.size)))
    return x.reshape(d, d)


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho on row-major vectors."""
    return np.kron(a, np.eye(a.shape[0]))


def spost(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho @ a on row-major vectors."""
    return np.kron(np.eye(a.shape[0]), a.T)
