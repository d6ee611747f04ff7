"""Brute-force reference Hamiltonian on the truncated tensor-product space.

Builds H from explicit operator products (Kronecker products of local
ladder operators) with no knowledge of the sector basis ordering, then
embeds the sector basis states by acting with creation operators on the
vacuum. Used only to validate :func:`doublon_bic.hamiltonian.build_hamiltonian`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .basis import (
    AtomDouble,
    AtomPair,
    AtomPhoton,
    AtomSingle,
    PhotonPair,
    build_basis,
)
from .model import CouplingVariant, SystemConfig

MAX_FULL_DIM = 400_000


@dataclass
class OracleResult:
    H: sp.csr_matrix          # full truncated-space Hamiltonian
    charge: sp.csr_matrix     # conserved excitation-charge operator
    embedding: sp.csr_matrix  # full_dim x D, columns are sector basis states
    local_dims: tuple[int, ...]

    @property
    def full_dim(self) -> int:
        return self.H.shape[0]

    def projected(self) -> np.ndarray:
        P = self.embedding
        return (P.conj().T @ self.H @ P).toarray()

    def commutator_norm(self) -> float:
        C = self.H @ self.charge - self.charge @ self.H
        return float(abs(C).max()) if C.nnz else 0.0


def _destroy(d: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), format="csr")


def _embed(op, site: int, dims) -> sp.csr_matrix:
    factors = [op if i == site else sp.identity(d, format="csr") for i, d in enumerate(dims)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def build_dense_oracle(config: SystemConfig, max_occupancy: int = 2) -> OracleResult:
    N, Na = config.N, config.n_atoms
    if N > 8:
        raise ValueError("oracle limited to N <= 8")
    if max_occupancy < 2:
        raise ValueError("occupancy cutoff must be >= 2 to hold a doublon")
    two_photon = config.coupling_variant is CouplingVariant.TWO_PHOTON
    d_atom = 2 if two_photon else 3
    d_cav = max_occupancy + 1
    dims = (d_atom,) * Na + (d_cav,) * N
    full_dim = int(np.prod(dims, dtype=np.int64))
    if full_dim > MAX_FULL_DIM:
        raise ValueError(f"oracle dimension {full_dim} exceeds guard {MAX_FULL_DIM}")

    # local atomic ladder: sigma1+ = |1><0|, sigma2+ = sqrt2 |2><1|
    s1p = sp.csr_matrix(([1.0], ([1], [0])), shape=(d_atom, d_atom))
    s2p = None
    if not two_photon:
        s2p = sp.csr_matrix(([np.sqrt(2.0)], ([2], [1])), shape=(d_atom, d_atom))
    a_loc = _destroy(d_cav)

    sig1 = [_embed(s1p, n, dims) for n in range(Na)]
    sig2 = [_embed(s2p, n, dims) for n in range(Na)] if s2p is not None else []
    a = [_embed(a_loc, Na + j, dims) for j in range(N)]
    adag = [op.T.tocsr() for op in a]

    J, U = config.waveguide.J, config.waveguide.U
    H = sp.csr_matrix((full_dim, full_dim))
    for n, atom in enumerate(config.atoms):
        H = H + atom.delta1 * (sig1[n] @ sig1[n].T)
        if not two_photon:
            H = H + (atom.delta1 + atom.delta2) * (sig2[n] @ sig2[n].T) / 2.0
    for j in range(N):
        H = H + (U / 2.0) * (adag[j] @ adag[j] @ a[j] @ a[j])
    for j in range(N - 1):
        hop = adag[j] @ a[j + 1]
        H = H - J * (hop + hop.T)
    for n, atom in enumerate(config.atoms):
        for x in atom.coupling_points:
            ax = a[x - 1]
            if two_photon:
                term = sig1[n] @ ax @ ax
            else:
                term = (sig1[n] + sig2[n]) @ ax
            H = H + atom.g * (term + term.T)
    H = H.tocsr()

    charge = sp.csr_matrix((full_dim, full_dim))
    for j in range(N):
        charge = charge + adag[j] @ a[j]
    for n in range(Na):
        if two_photon:
            charge = charge + 2.0 * (sig1[n] @ sig1[n].T)
        else:
            # level number diag(0, 1, 2); sigma2+ sigma2- = 2 |2><2|
            charge = charge + sig1[n] @ sig1[n].T + sig2[n] @ sig2[n].T
    charge = charge.tocsr()

    basis = build_basis(config)
    vac = sp.csr_matrix(([1.0], ([0], [0])), shape=(full_dim, 1))
    cols = [_sector_vector(basis.state_of(i), sig1, sig2, adag, vac) for i in range(basis.dim)]
    embedding = sp.hstack(cols, format="csr")
    return OracleResult(H=H, charge=charge, embedding=embedding, local_dims=dims)


def _sector_vector(state, sig1, sig2, adag, vac):
    if isinstance(state, AtomDouble):
        v = sig2[state.atom] @ (sig1[state.atom] @ vac)
    elif isinstance(state, AtomPair):
        v = sig1[state.atom1] @ (sig1[state.atom2] @ vac)
    elif isinstance(state, AtomPhoton):
        v = sig1[state.atom] @ (adag[state.site] @ vac)
    elif isinstance(state, AtomSingle):
        v = sig1[state.atom] @ vac
    elif isinstance(state, PhotonPair):
        v = adag[state.site1] @ (adag[state.site2] @ vac)
    else:
        raise TypeError(state)
    nrm = np.sqrt(abs(v.multiply(v.conj()).sum()))
    return v / nrm
