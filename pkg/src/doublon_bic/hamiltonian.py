"""Sector Hamiltonian assembly.

Matrix elements are taken between the normalized basis states of
:mod:`doublon_bic.basis`; the factors of sqrt(2) come from the
double-occupancy normalization and from sigma^(2)+ |1> = sqrt(2) |2>.
"""
from __future__ import annotations

from functools import cached_property
from math import sqrt
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .basis import BasisIndex, pair_offset
from .model import CouplingVariant, SystemConfig

SQRT2 = sqrt(2.0)


class SparseSymMatrix:
    """Real symmetric sparse matrix stored as its upper triangle (row <= col)."""

    def __init__(self, dim: int, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if np.any(rows > cols):
            raise ValueError("entries must satisfy row <= col")
        upper = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
        upper.sum_duplicates()
        upper.eliminate_zeros()
        upper.sort_indices()
        self.dim = dim
        self.upper = upper

    @cached_property
    def csr(self) -> sp.csr_matrix:
        strict = sp.triu(self.upper, k=1)
        full = (self.upper + strict.T).tocsr()
        full.sort_indices()
        return full

    @property
    def nnz_upper(self) -> int:
        return self.upper.nnz

    def entries(self):
        """(row, col, value) triples of the stored triangle, row-major."""
        coo = self.upper.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def diagonal(self) -> np.ndarray:
        return self.upper.diagonal()

    def __matmul__(self, v):
        return self.csr @ v

    def matvec(self, v):
        return self.csr @ v

    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral radius."""
        return float(abs(self.csr).sum(axis=1).max())

    def dump(self, path) -> Path:
        """Write the stored triangle as whitespace-separated ``row col value`` lines."""
        path = Path(path)
        r, c, v = self.entries()
        with path.open("w") as fh:
            fh.write(f"# dim {self.dim} upper-triangle coordinate format, 0-based\n")
            for i, j, x in zip(r, c, v):
                fh.write(f"{i} {j} {float(x)!r}\n")
        return path

    @classmethod
    def load(cls, path) -> "SparseSymMatrix":
        path = Path(path)
        with path.open() as fh:
            header = fh.readline().split()
            dim = int(header[2])
            data = np.loadtxt(fh, ndmin=2)
        if data.size == 0:
            return cls(dim, [], [], [])
        return cls(dim, data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2])


class _Triplets:
    def __init__(self):
        self.r, self.c, self.v = [], [], []

    def add(self, i, j, x):
        if i <= j:
            self.r.append(i), self.c.append(j)
        else:
            self.r.append(j), self.c.append(i)
        self.v.append(x)

    def extend(self, i, j, x):
        i = np.asarray(i)
        j = np.asarray(j)
        x = np.broadcast_to(np.asarray(x, dtype=float), i.shape)
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        self.r.extend(lo.tolist()), self.c.extend(hi.tolist()), self.v.extend(x.tolist())


def _photon_block(t: _Triplets, N: int, J: float, U: float, offset: int):
    jj, kk = np.triu_indices(N)
    src = offset + pair_offset(jj, kk, N)
    double = jj == kk
    t.extend(src[double], src[double], U)

    # every hop is generated once, as a rightward move of one photon
    # move the right photon: (j, k) -> (j, k+1)
    ok = kk + 1 < N
    dst = offset + pair_offset(jj[ok], kk[ok] + 1, N)
    amp = np.where(double[ok], -SQRT2 * J, -J)
    t.extend(src[ok], dst, amp)
    # move the left photon of a distinct pair: (j, k) -> (j+1, k)
    ok = (~double) & (jj + 1 <= kk)
    j2, k2 = jj[ok] + 1, kk[ok]
    dst = offset + pair_offset(j2, k2, N)
    amp = np.where(j2 == k2, -SQRT2 * J, -J)
    t.extend(src[ok], dst, amp)


def build_hamiltonian(config: SystemConfig, basis: BasisIndex) -> SparseSymMatrix:
    if basis.config is not config and basis.config != config:
        raise ValueError("basis was built from a different config")
    N, J, U = config.N, config.waveguide.J, config.waveguide.U
    atoms = config.atoms
    Na = len(atoms)
    t = _Triplets()
    ph0 = basis.photon_offset

    if config.coupling_variant is CouplingVariant.TWO_PHOTON:
        for n, atom in enumerate(atoms):
            t.add(n, n, atom.delta1)
            for x in atom.coupling_points:
                x0 = x - 1
                # g sigma+ a_x a_x on (a_x^+)^2/sqrt2 |vac> gives sqrt2
                t.add(n, ph0 + pair_offset(x0, x0, N), SQRT2 * atom.g)
        _photon_block(t, N, J, U, ph0)
        return SparseSymMatrix(basis.dim, t.r, t.c, t.v)

    ap0 = basis.atom_block

    def ap(n, j):
        return ap0 + n * N + j

    def pp(j, k):
        if j > k:
            j, k = k, j
        return ph0 + pair_offset(j, k, N)

    for n, atom in enumerate(atoms):
        t.add(n, n, atom.delta1 + atom.delta2)
        for x in atom.coupling_points:
            t.add(n, ap(n, x - 1), SQRT2 * atom.g)

    idx = Na
    for n in range(Na):
        for m in range(n + 1, Na):
            t.add(idx, idx, atoms[n].delta1 + atoms[m].delta1)
            # de-excite atom n into a photon at one of its points (atom m stays in |1>)
            for x in atoms[n].coupling_points:
                t.add(idx, ap(m, x - 1), atoms[n].g)
            for x in atoms[m].coupling_points:
                t.add(idx, ap(n, x - 1), atoms[m].g)
            idx += 1

    sites = np.arange(N)
    for n, atom in enumerate(atoms):
        rows = ap(n, sites)
        t.extend(rows, rows, atom.delta1)
        t.extend(rows[:-1], rows[1:], -J)
        for x in atom.coupling_points:
            x0 = x - 1
            for j in range(N):
                t.add(ap(n, j), pp(j, x0), (SQRT2 if j == x0 else 1.0) * atom.g)

    _photon_block(t, N, J, U, ph0)
    return SparseSymMatrix(basis.dim, t.r, t.c, t.v)


def build_sector_hamiltonian(config: SystemConfig):
    """Convenience: (basis, H) for a config."""
    from .basis import build_basis

    basis = build_basis(config)
    return basis, build_hamiltonian(config, basis)
