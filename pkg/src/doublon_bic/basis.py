"""Two-excitation sector basis and its index bijection.

Ordering (all indices 0-based):

single-photon coupling
    [AtomDouble(n) for n] + [AtomPair(n, m) for n < m]     -- atom block
    [AtomPhoton(n, j) for n for j]                          -- N per atom
    [PhotonPair(j, k) for j <= k]                           -- N(N+1)/2

two-photon coupling
    [AtomSingle(n) for n] + [PhotonPair(j, k) for j <= k]

PhotonPair(j, j) is the normalized double occupancy (a_j^+)^2 |vac> / sqrt(2).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Union

import numpy as np

from .model import CouplingVariant, SystemConfig


# frozen dataclasses rather than NamedTuples: equality must include the kind,
# otherwise PhotonPair(0, 0) == AtomPhoton(0, 0)

@dataclass(frozen=True)
class AtomDouble:
    atom: int


@dataclass(frozen=True)
class AtomPair:
    atom1: int
    atom2: int


@dataclass(frozen=True)
class AtomPhoton:
    atom: int
    site: int


@dataclass(frozen=True)
class PhotonPair:
    site1: int
    site2: int


@dataclass(frozen=True)
class AtomSingle:
    atom: int


BasisState = Union[AtomDouble, AtomPair, AtomPhoton, PhotonPair, AtomSingle]

# kind codes used in the vectorized tables
KIND_ATOM_DOUBLE = 0
KIND_ATOM_PAIR = 1
KIND_ATOM_PHOTON = 2
KIND_PHOTON_PAIR = 3
KIND_ATOM_SINGLE = 4

_KIND_OF = {
    AtomDouble: KIND_ATOM_DOUBLE,
    AtomPair: KIND_ATOM_PAIR,
    AtomPhoton: KIND_ATOM_PHOTON,
    PhotonPair: KIND_PHOTON_PAIR,
    AtomSingle: KIND_ATOM_SINGLE,
}


def pair_offset(j: int, k: int, N: int) -> int:
    """Position of the unordered pair j <= k in row-major upper-triangle order."""
    return j * N - j * (j - 1) // 2 + (k - j)


@dataclass(frozen=True, eq=False)
class BasisIndex:
    """Immutable bijection between sector basis states and integer indices.

    The arrays ``kind``, ``atom1``, ``atom2``, ``site1``, ``site2`` give the
    decoded state for every index (-1 where a slot is unused).
    """

    config: SystemConfig
    kind: np.ndarray
    atom1: np.ndarray
    atom2: np.ndarray
    site1: np.ndarray
    site2: np.ndarray
    atom_block: int
    photon_offset: int

    @property
    def dim(self) -> int:
        return len(self.kind)

    @property
    def variant(self) -> CouplingVariant:
        return self.config.coupling_variant

    @property
    def N(self) -> int:
        return self.config.N

    def __len__(self):
        return self.dim

    def index_of(self, state: BasisState) -> int:
        return index_of(self, state)

    def state_of(self, index: int) -> BasisState:
        return state_of(self, index)

    def states(self):
        return [self.state_of(i) for i in range(self.dim)]

    def photon_pair_indices(self) -> np.ndarray:
        return np.arange(self.photon_offset, self.dim)

    def charge(self) -> np.ndarray:
        """Conserved excitation charge of every basis state (always 2)."""
        n_ph = (self.site1 >= 0).astype(int) + (self.site2 >= 0).astype(int)
        atomic = np.select(
            [
                self.kind == KIND_ATOM_DOUBLE,
                self.kind == KIND_ATOM_PAIR,
                self.kind == KIND_ATOM_PHOTON,
                self.kind == KIND_ATOM_SINGLE,
            ],
            [2, 2, 1, 2],
            default=0,
        )
        return atomic + n_ph


def sector_dimension(N: int, n_atoms: int, variant: CouplingVariant) -> int:
    variant = CouplingVariant(variant)
    if variant is CouplingVariant.SINGLE_PHOTON:
        return comb(n_atoms + 1, 2) + n_atoms * N + N * (N + 1) // 2
    return n_atoms + N * (N + 1) // 2


def build_basis(config: SystemConfig) -> BasisIndex:
    N, Na = config.N, config.n_atoms
    kinds, a1, a2, s1, s2 = [], [], [], [], []

    def push(kd, x1=-1, x2=-1, y1=-1, y2=-1):
        kinds.append(kd)
        a1.append(x1)
        a2.append(x2)
        s1.append(y1)
        s2.append(y2)

    if config.coupling_variant is CouplingVariant.SINGLE_PHOTON:
        for n in range(Na):
            push(KIND_ATOM_DOUBLE, n)
        for n in range(Na):
            for m in range(n + 1, Na):
                push(KIND_ATOM_PAIR, n, m)
        atom_block = len(kinds)
        for n in range(Na):
            for j in range(N):
                push(KIND_ATOM_PHOTON, n, -1, j)
    else:
        for n in range(Na):
            push(KIND_ATOM_SINGLE, n)
        atom_block = len(kinds)
    photon_offset = len(kinds)
    jj, kk = np.triu_indices(N)
    kinds.extend([KIND_PHOTON_PAIR] * len(jj))
    a1.extend([-1] * len(jj))
    a2.extend([-1] * len(jj))
    s1.extend(jj.tolist())
    s2.extend(kk.tolist())

    basis = BasisIndex(
        config=config,
        kind=np.asarray(kinds, dtype=np.int8),
        atom1=np.asarray(a1, dtype=np.int64),
        atom2=np.asarray(a2, dtype=np.int64),
        site1=np.asarray(s1, dtype=np.int64),
        site2=np.asarray(s2, dtype=np.int64),
        atom_block=atom_block,
        photon_offset=photon_offset,
    )
    for arr in (basis.kind, basis.atom1, basis.atom2, basis.site1, basis.site2):
        arr.setflags(write=False)
    assert basis.dim == sector_dimension(N, Na, config.coupling_variant)
    return basis


def _check_atom(basis: BasisIndex, n: int):
    if not 0 <= n < basis.config.n_atoms:
        raise IndexError(f"atom index {n} out of range")


def _check_site(basis: BasisIndex, j: int):
    if not 0 <= j < basis.N:
        raise IndexError(f"cavity index {j} out of range [0, {basis.N})")


def index_of(basis: BasisIndex, state: BasisState) -> int:
    """Dense index of ``state``; raises for states outside this sector basis."""
    N, Na = basis.N, basis.config.n_atoms
    single = basis.variant is CouplingVariant.SINGLE_PHOTON
    kind = _KIND_OF.get(type(state))
    if kind is None:
        raise TypeError(f"not a basis state: {state!r}")
    if kind == KIND_PHOTON_PAIR:
        j, k = sorted((state.site1, state.site2))
        _check_site(basis, j)
        _check_site(basis, k)
        return basis.photon_offset + pair_offset(j, k, N)
    if single:
        if kind == KIND_ATOM_DOUBLE:
            _check_atom(basis, state.atom)
            return state.atom
        if kind == KIND_ATOM_PAIR:
            n, m = sorted((state.atom1, state.atom2))
            _check_atom(basis, n)
            _check_atom(basis, m)
            if n == m:
                raise ValueError("AtomPair needs two distinct atoms")
            # pairs (n, m>n) in lexicographic order after the Na doubles
            return Na + pair_offset(n, m, Na) - (n + 1)
        if kind == KIND_ATOM_PHOTON:
            _check_atom(basis, state.atom)
            _check_site(basis, state.site)
            return basis.atom_block + state.atom * N + state.site
    elif kind == KIND_ATOM_SINGLE:
        _check_atom(basis, state.atom)
        return state.atom
    raise ValueError(f"{type(state).__name__} is not part of the {basis.variant.value} basis")


def state_of(basis: BasisIndex, index: int) -> BasisState:
    if not 0 <= index < basis.dim:
        raise IndexError(f"basis index {index} out of range [0, {basis.dim})")
    kind = int(basis.kind[index])
    if kind == KIND_ATOM_DOUBLE:
        return AtomDouble(int(basis.atom1[index]))
    if kind == KIND_ATOM_PAIR:
        return AtomPair(int(basis.atom1[index]), int(basis.atom2[index]))
    if kind == KIND_ATOM_PHOTON:
        return AtomPhoton(int(basis.atom1[index]), int(basis.site1[index]))
    if kind == KIND_ATOM_SINGLE:
        return AtomSingle(int(basis.atom1[index]))
    return PhotonPair(int(basis.site1[index]), int(basis.site2[index]))
