"""Normalized Laplacian, a cyclic Jacobi eigensolver, and harmonic eigenvectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ParameterError, ParseError, ValidationError
from .graph import Graph

__all__ = [
    "NormalizedLaplacian",
    "Spectrum",
    "build_laplacian",
    "jacobi_eigh",
    "eigendecompose",
    "harmonic_basis",
    "num_zero_eigenvalues",
    "spectrum_from_basis",
    "complete_graph_spectrum",
    "read_basis",
    "write_basis",
]

ZERO_TOL = 1e-8


@dataclass(frozen=True)
class NormalizedLaplacian:
    """``L = D^{-1/2} (D - A) D^{-1/2}`` with ``D^{-1/2}[u, u] = 0`` for isolated ``u``."""

    matrix: np.ndarray
    inv_sqrt_degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues with paired orthonormal eigenvectors (columns).

    May be partial: ``eigenvectors`` can hold fewer than ``n`` columns when a
    basis was injected rather than computed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    inv_sqrt_degrees: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def size(self) -> int:
        return self.eigenvectors.shape[1]

    @property
    def harmonic(self) -> np.ndarray:
        """Columns ``x_i = D^{-1/2} v_i``."""
        return self.inv_sqrt_degrees[:, None] * self.eigenvectors

    def harmonic_sup_norms(self) -> np.ndarray:
        return np.max(np.abs(self.harmonic), axis=0) if self.n else np.zeros(self.size)

    def residuals(self, laplacian: NormalizedLaplacian) -> np.ndarray:
        r = laplacian.matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return np.linalg.norm(r, axis=0)

    def orthonormality_error(self) -> float:
        gram = self.eigenvectors.T @ self.eigenvectors
        return float(np.max(np.abs(gram - np.eye(self.size)))) if self.size else 0.0


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def build_laplacian(g: Graph) -> NormalizedLaplacian:
    deg = np.asarray(g.degrees, dtype=float)
    inv_sqrt = np.zeros(g.n)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    mat = np.diag(nz.astype(float)) - inv_sqrt[:, None] * g.adjacency * inv_sqrt[None, :]
    return NormalizedLaplacian(_frozen(mat), _frozen(inv_sqrt))


def jacobi_eigh(a, max_sweeps: int = 100):
    """Cyclic Jacobi diagonalisation of a real symmetric matrix.

    Sweeps row-by-row over the strict upper triangle until the off-diagonal
    Frobenius norm drops below ``1e-12 * n``.  Returns unsorted
    ``(eigenvalues, eigenvectors)`` with eigenvectors as columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ParameterError("matrix must be square")
    if n <= _SMALL_N:
        w, v = _jacobi_lists(a.tolist(), n, max_sweeps)
        return np.array(w), np.array(v)
    v = np.eye(n)
    threshold = 1e-12 * n
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off < threshold:
            return np.diag(a).copy(), v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")


_SMALL_N = 16


def _jacobi_lists(a, n, max_sweeps):
    # Same rotation sequence as the array path, on nested lists (cheaper for tiny n).
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    threshold = 1e-12 * n
    for sweep in range(max_sweeps + 1):
        off = math.sqrt(2.0 * sum(a[p][q] * a[p][q] for p in range(n) for q in range(p + 1, n)))
        if off < threshold:
            return [a[i][i] for i in range(n)], v
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    arp, arq = a[r][p], a[r][q]
                    a[r][p] = c * arp - s * arq
                    a[r][q] = s * arp + c * arq
                row_p, row_q = a[p], a[q]
                for r in range(n):
                    apr, aqr = row_p[r], row_q[r]
                    row_p[r] = c * apr - s * aqr
                    row_q[r] = s * apr + c * aqr
                a[p][q] = a[q][p] = 0.0
                for r in range(n):
                    vrp, vrq = v[r][p], v[r][q]
                    v[r][p] = c * vrp - s * vrq
                    v[r][q] = s * vrp + c * vrq
    raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (lowest index on ties)."""
    out = vectors.copy()
    for i in range(out.shape[1]):
        col = out[:, i]
        mags = np.abs(col)
        top = np.max(mags) if mags.size else 0.0
        if top == 0.0:
            continue
        j = int(np.flatnonzero(mags >= top - 1e-12)[0])
        if col[j] < 0:
            out[:, i] = -col
    return out


def eigendecompose(laplacian: NormalizedLaplacian, max_sweeps: int = 100) -> Spectrum:
    if laplacian.n < 1:
        raise ParameterError("cannot decompose an empty matrix")
    w, v = jacobi_eigh(laplacian.matrix, max_sweeps=max_sweeps)
    order = np.argsort(w, kind="stable")
    return Spectrum(_frozen(w[order]), _frozen(_fix_signs(v[:, order])), laplacian.inv_sqrt_degrees)


def harmonic_basis(spectrum: Spectrum, g: Graph, k: int) -> np.ndarray:
    """First ``k`` harmonic eigenvectors as columns ``x_0 .. x_{k-1}``."""
    if k > g.n:
        raise ParameterError(f"k={k} exceeds n={g.n}")
    if k > spectrum.size:
        raise ParameterError(f"spectrum holds only {spectrum.size} eigenvectors, {k} requested")
    if spectrum.n != g.n:
        raise ParameterError("spectrum does not belong to this graph")
    return spectrum.harmonic[:, :k]


def num_zero_eigenvalues(spectrum: Spectrum, tol: float = ZERO_TOL) -> int:
    if tol <= 0:
        raise ParameterError("tol must be positive")
    return int(np.sum(spectrum.eigenvalues < tol))


def spectrum_from_basis(
    laplacian: NormalizedLaplacian,
    vectors,
    eigenvalues=None,
    tol: float = 1e-6,
) -> Spectrum:
    """Wrap user-supplied eigenvectors (rows of ``vectors``) as a partial spectrum.

    Eigenvalues default to Rayleigh quotients.  Vectors must be orthonormal and
    satisfy ``||L v - lambda v|| <= tol``; eigenvalues must be ascending.
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = laplacian.n
    if vecs.shape[1] != n:
        raise ValidationError(f"basis vectors have length {vecs.shape[1]}, expected {n}")
    cols = vecs.T
    gram_err = np.max(np.abs(cols.T @ cols - np.eye(cols.shape[1])))
    if gram_err > tol:
        raise ValidationError(f"basis is not orthonormal (max Gram error {gram_err:.3e})")
    lm = laplacian.matrix @ cols
    if eigenvalues is None:
        lam = np.einsum("ij,ij->j", cols, lm)
    else:
        lam = np.asarray(eigenvalues, dtype=float)
        if lam.shape != (cols.shape[1],):
            raise ValidationError("one eigenvalue per basis vector required")
    resid = np.linalg.norm(lm - cols * lam, axis=0)
    if np.any(resid > tol):
        i = int(np.argmax(resid))
        raise ValidationError(f"vector {i} is not an eigenvector (residual {resid[i]:.3e})")
    if np.any(np.diff(lam) < -tol):
        raise ValidationError("eigenvalues of injected basis must be ascending")
    return Spectrum(_frozen(lam), _frozen(cols), laplacian.inv_sqrt_degrees)


def complete_graph_spectrum(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form leading spectrum of ``K_n`` with the paired-vertex basis.

    Returns ``(eigenvalues, vectors)`` where ``vectors`` has rows
    ``v_0 = 1/sqrt(n)`` and ``v_i = (e_{2i-2} - e_{2i-1}) / sqrt(2)`` for
    ``i = 1..k-1``; this basis maximises the summed sup-norms of the harmonic
    vectors.  Needs ``2(k-1) <= n``.
    """
    if k < 1 or 2 * (k - 1) > n:
        raise ParameterError(f"paired basis needs 2(k-1) <= n, got n={n}, k={k}")
    vecs = np.zeros((k, n))
    vecs[0] = 1.0 / math.sqrt(n)
    for i in range(1, k):
        vecs[i, 2 * i - 2] = 1.0 / math.sqrt(2.0)
        vecs[i, 2 * i - 1] = -1.0 / math.sqrt(2.0)
    lam = np.full(k, n / (n - 1.0))
    lam[0] = 0.0
    return lam, vecs


# --- eigenbasis injection file --------------------------------------------------

def read_basis(text: str) -> tuple[int, np.ndarray]:
    """Parse ``n <n> k <k>`` followed by ``k`` rows of ``n`` reals."""
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ParseError("empty basis file")
    head = rows[0]
    if len(head) != 4 or head[0] != "n" or head[2] != "k":
        raise ParseError(f"expected header 'n <n> k <k>', got {' '.join(head)!r}", 1)
    try:
        n, k = int(head[1]), int(head[3])
    except ValueError:
        raise ParseError("header counts must be integers", 1) from None
    if len(rows) - 1 != k:
        raise ParseError(f"expected {k} vector rows, found {len(rows) - 1}")
    vecs = np.empty((k, n))
    for i, row in enumerate(rows[1:]):
        if len(row) != n:
            raise ParseError(f"vector {i} has {len(row)} entries, expected {n}", i + 2)
        try:
            vecs[i] = [float(x) for x in row]
        except ValueError:
            raise ParseError(f"vector {i} has a non-numeric entry", i + 2) from None
    return n, vecs


def write_basis(vectors) -> str:
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    k, n = vecs.shape
    lines = [f"n {n} k {k}"]
    lines.extend(" ".join(repr(float(x)) for x in row) for row in vecs)
    return "\n".join(lines) + "\n"
