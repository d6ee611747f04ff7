"""Eigen-analysis of the sector Hamiltonian and bound-state detection."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .basis import KIND_PHOTON_PAIR, BasisIndex
from .hamiltonian import SparseSymMatrix

log = logging.getLogger(__name__)

DENSE_THRESHOLD = 6000
BIC_FLOOR_FACTOR = 10.0
DEGENERACY_GAP = 1e-10
NORM_TOL = 1e-8
RESIDUAL_TOL = 1e-8


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BICNotFound(LookupError):
    pass


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    ipr: np.ndarray | None
    residuals: np.ndarray | None = None
    cluster: np.ndarray | None = None
    mode: str = "full"

    @property
    def degenerate(self) -> np.ndarray:
        """True for eigenpairs sharing a cluster with a neighbour."""
        if self.cluster is None:
            return np.zeros(len(self.eigenvalues), dtype=bool)
        counts = np.bincount(self.cluster)
        return counts[self.cluster] > 1


def fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    vecs = np.array(vecs, copy=True)
    if vecs.ndim == 1:
        return fix_phase(vecs[:, None])[:, 0]
    idx = np.argmax(np.abs(vecs), axis=0)
    pivot = vecs[idx, np.arange(vecs.shape[1])]
    phase = pivot / np.abs(pivot)
    return vecs / phase[None, :]


def _clusters(evals: np.ndarray, gap: float = DEGENERACY_GAP) -> np.ndarray:
    if len(evals) == 0:
        return np.zeros(0, dtype=int)
    breaks = np.diff(evals) >= gap
    return np.concatenate([[0], np.cumsum(breaks)])


def start_vector(dim: int) -> np.ndarray:
    """Fixed, symmetry-free Lanczos start vector (keeps runs reproducible)."""
    i = np.arange(dim)
    return 1.0 + 0.5 * np.sin(1.7 * i + 0.3) + 0.25 * np.cos(0.37 * i * i)


def ipr(v) -> float:
    """Inverse participation ratio sum_n |v_n|^4 of a unit vector."""
    v = np.asarray(v)
    p = np.abs(v) ** 2
    nrm = p.sum()
    if abs(nrm - 1.0) > NORM_TOL:
        raise ValueError(f"ipr needs a normalized vector (norm^2 = {nrm:.3g})")
    return float(np.sum(p * p))


def _ipr_columns(vecs: np.ndarray) -> np.ndarray:
    p = np.abs(vecs) ** 2
    return np.sum(p * p, axis=0)


def eigensolve(
    H: SparseSymMatrix,
    mode: str = "full",
    target: float | None = None,
    count: int = 20,
    dense_threshold: int = DENSE_THRESHOLD,
    vectors: bool = True,
    tol: float = 0.0,
    maxiter: int | None = None,
) -> SpectralResult:
    """Diagonalize ``H``.

    ``mode="full"`` uses dense LAPACK and is limited to ``dense_threshold``.
    ``mode="window"`` returns the ``count`` eigenpairs nearest ``target`` by
    shift-invert Lanczos.
    """
    if mode == "full":
        if H.dim > dense_threshold:
            raise ValueError(
                f"full diagonalization of D={H.dim} exceeds dense threshold {dense_threshold};"
                " use window mode"
            )
        A = H.toarray()
        if vectors:
            evals, evecs = np.linalg.eigh(A)
            evecs = fix_phase(evecs)
        else:
            evals, evecs = np.linalg.eigvalsh(A), None
    elif mode == "window":
        if target is None:
            raise ValueError("window mode needs a target energy")
        count = min(count, H.dim - 2)
        try:
            evals, evecs = spla.eigsh(
                H.csr, k=count, sigma=target, which="LM", tol=tol, maxiter=maxiter,
                v0=start_vector(H.dim),
            )
        except spla.ArpackNoConvergence as exc:
            res = None
            if len(exc.eigenvalues):
                r = H.csr @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues
                res = float(np.linalg.norm(r, axis=0).max())
            raise ConvergenceError(
                f"shift-invert did not converge ({len(exc.eigenvalues)}/{count} pairs,"
                f" residual {res})",
                residual=res,
            ) from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], fix_phase(evecs[:, order])
        if not vectors:
            evecs = None
    else:
        raise ValueError(f"unknown eigensolve mode {mode!r}")

    result = SpectralResult(eigenvalues=evals, eigenvectors=evecs, ipr=None, mode=mode)
    result.cluster = _clusters(evals)
    if evecs is not None:
        result.ipr = _ipr_columns(evecs)
        result.residuals = np.linalg.norm(H.csr @ evecs - evecs * evals, axis=0)
        scale = max(H.norm_bound(), 1.0)
        worst = float(result.residuals.max()) if len(evals) else 0.0
        if worst > RESIDUAL_TOL * scale:
            raise ConvergenceError(f"eigenpair residual {worst:.3g} above tolerance", worst)
    return result


@dataclass
class BoundStateProfile:
    """Two-photon content of an eigenstate.

    ``P[m, n]`` is the magnitude of the amplitude on the normalized photon
    pair state |m, n> (0-based sites), symmetric in (m, n).
    """

    P: np.ndarray
    eigenvalue: float
    ipr: float
    index: int = -1
    degenerate: bool = False
    atomic_weight: float = 0.0

    @property
    def N(self) -> int:
        return self.P.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.P).copy()

    def fock_overlap(self) -> np.ndarray:
        """|<vac| a_m a_n |psi>| with unnormalized a_m^+ a_n^+ |vac>; diagonal gains sqrt(2)."""
        F = self.P.copy()
        F[np.diag_indices_from(F)] *= np.sqrt(2.0)
        return F

    def photon_weight(self) -> float:
        return float(np.sum(np.triu(self.P) ** 2))

    def weight_outside(self, lo: int, hi: int) -> float:
        """Fraction of two-photon weight with a photon outside sites [lo, hi] (1-based)."""
        W = np.triu(self.P) ** 2
        sites = np.arange(1, self.N + 1)
        inside = (sites >= lo) & (sites <= hi)
        both_in = np.outer(inside, inside)
        total = W.sum()
        if total == 0:
            return 0.0
        return float(W[~both_in].sum() / total)

    def offdiag_ratio(self, site: int, convention: str = "normalized") -> float:
        """Mean of P(n, n+-1) / P(n, n) at a 1-based site.

        ``convention="fock"`` uses :meth:`fock_overlap` instead of the
        normalized-basis magnitudes.
        """
        F = self.fock_overlap() if convention == "fock" else self.P
        n = site - 1
        nb = [F[n, m] for m in (n - 1, n + 1) if 0 <= m < self.N]
        return float(np.mean(nb) / F[n, n])


def profile_from_vector(basis: BasisIndex, v: np.ndarray, eigenvalue: float = np.nan,
                        index: int = -1) -> BoundStateProfile:
    N = basis.N
    sel = basis.kind == KIND_PHOTON_PAIR
    j, k = basis.site1[sel], basis.site2[sel]
    P = np.zeros((N, N))
    mag = np.abs(v[sel])
    P[j, k] = mag
    P[k, j] = mag
    atomic = float(np.sum(np.abs(v[~sel]) ** 2))
    p = np.abs(v) ** 2
    return BoundStateProfile(P=P, eigenvalue=float(eigenvalue), ipr=float(np.sum(p * p)),
                             index=index, atomic_weight=atomic)


def find_bic(result: SpectralResult, basis: BasisIndex, target: float,
             floor_factor: float = BIC_FLOOR_FACTOR) -> tuple[int, BoundStateProfile]:
    """Pick the bound state among the two highest-IPR eigenstates.

    Of the top-two IPR candidates, the one whose eigenvalue is closest to
    ``target`` wins. Candidates at or below ``floor_factor / D`` are rejected.
    """
    if result.eigenvectors is None or result.ipr is None:
        raise ValueError("spectral result carries no eigenvectors")
    D = result.eigenvectors.shape[0]
    floor = floor_factor / D
    top = np.argsort(-result.ipr, kind="stable")[:2]
    top = [int(i) for i in top if result.ipr[i] > floor]
    if not top:
        raise BICNotFound(
            f"no eigenstate with IPR above floor {floor:.3g} (max {result.ipr.max():.3g})"
        )
    best = min(top, key=lambda i: (abs(result.eigenvalues[i] - target), i))
    prof = profile_from_vector(basis, result.eigenvectors[:, best],
                               result.eigenvalues[best], best)
    prof.degenerate = bool(result.degenerate[best])
    if prof.degenerate:
        warnings.warn(
            f"selected eigenstate {best} lies in a degenerate cluster; IPR is basis-dependent",
            stacklevel=2,
        )
    return best, prof
