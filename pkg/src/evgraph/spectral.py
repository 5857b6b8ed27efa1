"""Symmetric eigendecomposition (parallel-order cyclic Jacobi) and the graph Fourier transform."""

from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument, NumericFailure, UnsupportedGraph
from evgraph.graph import Graph, read_dense_csv, write_dense_csv

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in ascending order and the matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def num_nodes(self):
        return len(self.eigenvalues)

    def save(self, path):
        """CSV of ``N+1`` rows: eigenvalues first, then the rows of ``U``."""
        write_dense_csv(np.vstack((self.eigenvalues, self.eigenvectors)), path)

    @classmethod
    def load(cls, path):
        data = read_dense_csv(path)
        return cls(data[0].copy(), data[1:].copy())


def _round_robin(m):
    """Yield ``m - 1`` rounds of ``m // 2`` disjoint pairs covering every pair once (``m`` even)."""
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        players = [players[0], players[-1]] + players[1:-1]


def _off_norm(a):
    return np.linalg.norm(a - np.diag(a.diagonal()))


def jacobi_eigh(a, tol=1e-15, max_sweeps=60):
    """Eigenvalues and eigenvectors of a dense symmetric matrix by cyclic Jacobi rotations.

    Rotations are scheduled in round-robin order so each round annihilates
    ``N // 2`` disjoint off-diagonal pairs at once.

    Returns
    -------
    eigenvalues : ndarray, ascending (stable with respect to diagonal order)
    eigenvectors : ndarray, columns aligned with ``eigenvalues``
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        pairs = [(p, q) if p < q else (q, p) for p, q in pairs if max(p, q) < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    off = 0.0
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > np.finfo(float).tiny * scale
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            theta_safe = np.where(big, 1.0, theta)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta_safe) + np.sqrt(theta_safe * theta_safe + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        off = _off_norm(a)
        if off > 1e-12 * scale:
            raise NumericFailure(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})", residual=off)
    order = np.argsort(a.diagonal(), kind="stable")
    return a.diagonal()[order].copy(), v[:, order].copy()


def eigendecompose(g: Graph) -> Spectrum:
    s = g.to_dense()
    asym = np.max(np.abs(s - s.T)) if s.size else 0.0
    if asym > SYMMETRY_TOL:
        raise UnsupportedGraph(f"shift operator is not symmetric (max asymmetry {asym:.3e})")
    lam, u = jacobi_eigh((s + s.T) / 2.0)
    return Spectrum(lam, u)


def _check(sp: Spectrum, x):
    x = np.asarray(x, dtype=float)
    if x.shape[:1] != (sp.num_nodes,):
        raise InvalidArgument(f"signal has {x.shape[0] if x.ndim else 0} rows, spectrum has {sp.num_nodes}")
    return x


def gft(sp: Spectrum, x):
    """Fourier coefficients ``U.T @ x``."""
    x = _check(sp, x)
    return np.tensordot(sp.eigenvectors.T, x, axes=1)


def igft(sp: Spectrum, x_hat):
    x_hat = _check(sp, x_hat)
    return np.tensordot(sp.eigenvectors, x_hat, axes=1)
