"""Unitary time evolution in the two-excitation sector and its observables."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .basis import (
    KIND_ATOM_DOUBLE,
    KIND_ATOM_PAIR,
    KIND_ATOM_PHOTON,
    KIND_ATOM_SINGLE,
    KIND_PHOTON_PAIR,
    AtomDouble,
    AtomSingle,
    BasisIndex,
)
from .hamiltonian import SparseSymMatrix
from .model import CouplingVariant
from .spectral import DENSE_THRESHOLD

log = logging.getLogger(__name__)

KRYLOV_TOL = 1e-10
KRYLOV_DIM = 40
NORM_TOL = 1e-10


class PropagationError(RuntimeError):
    pass


# ---------------------------------------------------------------- states

PRESETS = ("atom1_level1", "atom1_level2")


def initial_state(basis: BasisIndex, preset="atom1_level2", amplitudes=None) -> np.ndarray:
    """Unit-norm initial vector.

    ``preset`` is ``"atom1_level1"`` (|1> on atom 1, two-photon coupling),
    ``"atom1_level2"`` (|2> on atom 1, single-photon coupling) or
    ``"custom"``, in which case ``amplitudes`` maps basis states (or
    indices) to amplitudes and the result is normalized.
    """
    v = np.zeros(basis.dim, dtype=complex)
    variant = basis.variant
    if preset == "atom1_level1":
        if variant is not CouplingVariant.TWO_PHOTON:
            raise ValueError("atom1_level1 preset requires the two-photon coupling variant")
        v[basis.index_of(AtomSingle(0))] = 1.0
    elif preset == "atom1_level2":
        if variant is not CouplingVariant.SINGLE_PHOTON:
            raise ValueError("atom1_level2 preset requires the single-photon coupling variant")
        v[basis.index_of(AtomDouble(0))] = 1.0
    elif preset == "custom":
        if not amplitudes:
            raise ValueError("custom preset needs amplitudes")
        for key, amp in dict(amplitudes).items():
            i = key if isinstance(key, (int, np.integer)) else basis.index_of(key)
            v[i] += amp
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("custom amplitudes sum to the zero vector")
        v /= nrm
    else:
        raise ValueError(f"unknown initial-state preset {preset!r}")
    return v


# ---------------------------------------------------------------- propagation


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be one-dimensional")
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    return times


class DensePropagator:
    """exp(-iHt) through a full eigendecomposition; reusable for many states."""

    def __init__(self, H: SparseSymMatrix):
        self.evals, self.evecs = np.linalg.eigh(H.toarray())

    def iter(self, v0, times, chunk: int = 64) -> Iterator[tuple[float, np.ndarray]]:
        c0 = self.evecs.T @ v0
        times = np.asarray(times, dtype=float)
        # one GEMM per chunk of sample times instead of one GEMV per time
        for s in range(0, len(times), chunk):
            ts = times[s:s + chunk]
            C = np.exp(-1j * np.outer(self.evals, ts)) * c0[:, None]
            # contiguous real operands keep numpy on the BLAS path
            V = self.evecs @ np.ascontiguousarray(C.real) \
                + 1j * (self.evecs @ np.ascontiguousarray(C.imag))
            for i, t in enumerate(ts):
                if t == 0:
                    yield t, np.array(v0, dtype=complex)
                else:
                    yield t, V[:, i]


def lanczos_expm_step(matvec, v, dt, m_max=KRYLOV_DIM, tol=KRYLOV_TOL):
    """Approximate exp(-i H dt) v in a Lanczos space of dimension <= m_max.

    Returns ``(w, err, converged)``; ``err`` is the a-posteriori estimate
    beta_m |[exp(-i T dt) e_1]_m| times ||v||.
    """
    beta0 = np.linalg.norm(v)
    n = v.shape[0]
    m_max = min(m_max, n)
    V = np.zeros((n, m_max + 1), dtype=complex)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    V[:, 0] = v / beta0
    err = np.inf
    for j in range(m_max):
        w = matvec(V[:, j])
        alpha[j] = np.vdot(V[:, j], w).real
        w = w - alpha[j] * V[:, j]
        if j > 0:
            w = w - beta[j - 1] * V[:, j - 1]
        # full reorthogonalization, twice is enough
        for _ in range(2):
            w = w - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        beta[j] = np.linalg.norm(w)
        if j == 0:
            theta, S = np.array([alpha[0]]), np.ones((1, 1))
        else:
            theta, S = sla.eigh_tridiagonal(alpha[: j + 1], beta[:j])
        y = S @ (np.exp(-1j * theta * dt) * S[0, :])
        invariant = beta[j] < 1e-13 * max(1.0, abs(alpha[j]))
        err = 0.0 if invariant else beta[j] * abs(y[j]) * beta0
        if err <= tol or invariant:
            return beta0 * (V[:, : j + 1] @ y), err, True
        V[:, j + 1] = w / beta[j]
    return None, err, False


class KrylovPropagator:
    """Adaptive Lanczos time stepping with a per-step error tolerance."""

    def __init__(self, H: SparseSymMatrix, tol: float = KRYLOV_TOL, m_max: int = KRYLOV_DIM,
                 dt_min: float = 1e-9):
        self.A = H.csr
        self.tol = tol
        self.m_max = m_max
        self.dt_min = dt_min
        self.dt = 2.0 * m_max / (3.0 * max(H.norm_bound(), 1e-12))
        self.steps = 0

    def _matvec(self, x):
        return self.A @ x

    def advance(self, v, span):
        t = 0.0
        while span - t > 1e-15 * max(1.0, span):
            dt = min(self.dt, span - t)
            w, err, ok = lanczos_expm_step(self._matvec, v, dt, self.m_max, self.tol)
            if not ok:
                self.dt = dt / 2.0
                if self.dt < self.dt_min:
                    raise PropagationError(
                        f"Krylov step size underflow at dt={dt:.3g} (error estimate {err:.3g})"
                    )
                continue
            v = w
            t += dt
            self.steps += 1
            if dt == self.dt:
                self.dt *= 1.25
        return v

    def iter(self, v0, times) -> Iterator[tuple[float, np.ndarray]]:
        v = np.array(v0, dtype=complex)
        t_prev = 0.0
        for t in times:
            if t > t_prev:
                v = self.advance(v, t - t_prev)
                t_prev = t
            yield t, v.copy()


def make_propagator(H: SparseSymMatrix, method: str = "auto",
                    dense_threshold: int = DENSE_THRESHOLD, tol: float = KRYLOV_TOL):
    if method == "auto":
        method = "dense" if H.dim <= dense_threshold else "krylov"
    if method == "dense":
        return DensePropagator(H)
    if method == "krylov":
        return KrylovPropagator(H, tol=tol)
    raise ValueError(f"unknown propagation method {method!r}")


def iter_propagate(H, v0, times, method="auto", dense_threshold=DENSE_THRESHOLD,
                   propagator=None):
    times = _check_times(times)
    if abs(np.linalg.norm(v0) - 1.0) > NORM_TOL:
        raise ValueError("initial state must be normalized")
    prop = propagator or make_propagator(H, method, dense_threshold)
    yield from prop.iter(v0, times)


def propagate(H, v0, times, method="auto", dense_threshold=DENSE_THRESHOLD,
              propagator=None) -> np.ndarray:
    """States exp(-iHt) v0 at each requested time, stacked as rows."""
    out = [v for _, v in iter_propagate(H, v0, times, method, dense_threshold, propagator)]
    return np.array(out)


# ---------------------------------------------------------------- observables


@dataclass
class TimeSeries:
    times: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)
    grids: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("TimeSeries times must be strictly increasing")

    def __getitem__(self, name):
        return self.channels[name] if name in self.channels else self.grids[name]


class ObservableSet:
    """Sparse weight matrices turning |amplitudes|^2 into observables."""

    def __init__(self, basis: BasisIndex):
        self.basis = basis
        D, N, Na = basis.dim, basis.N, basis.config.n_atoms
        kind, a1, a2 = basis.kind, basis.atom1, basis.atom2
        s1, s2 = basis.site1, basis.site2
        idx = np.arange(D)

        def rows(mask_list):
            r, c = [], []
            for row, mask in enumerate(mask_list):
                cols = idx[mask]
                r.extend([row] * len(cols))
                c.extend(cols.tolist())
            return sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(len(mask_list), D))

        if basis.variant is CouplingVariant.SINGLE_PHOTON:
            n1 = [
                ((kind == KIND_ATOM_PAIR) & ((a1 == n) | (a2 == n)))
                | ((kind == KIND_ATOM_PHOTON) & (a1 == n))
                for n in range(Na)
            ]
            n2 = [(kind == KIND_ATOM_DOUBLE) & (a1 == n) for n in range(Na)]
        else:
            n1 = [(kind == KIND_ATOM_SINGLE) & (a1 == n) for n in range(Na)]
            n2 = [np.zeros(D, dtype=bool) for _ in range(Na)]
        self.n1 = rows(n1)
        self.n2 = rows(n2)

        pp = kind == KIND_PHOTON_PAIR
        dbl = pp & (s1 == s2)
        self.doublon = sp.csr_matrix(
            (np.full(dbl.sum(), 2.0), (s1[dbl], idx[dbl])), shape=(N, D)
        )
        r, c, w = [], [], []
        for slot in (s1, s2):
            has = slot >= 0
            r.extend(slot[has].tolist())
            c.extend(idx[has].tolist())
            w.extend([1.0] * int(has.sum()))
        # a double occupancy is counted once per slot, i.e. twice: <n_j> = 2
        self.photon = sp.csr_matrix((w, (r, c)), shape=(N, D))
        self.charge = basis.charge().astype(float)

    def evaluate(self, probs: np.ndarray) -> dict:
        """``probs``: |v|^2 with shape (D,) or (T, D)."""
        P = np.atleast_2d(probs)
        n1 = (self.n1 @ P.T).T
        n2 = (self.n2 @ P.T).T
        out = {}
        for a in range(n1.shape[1]):
            out[f"n1_{a + 1}"] = n1[:, a]
        if self.basis.variant is CouplingVariant.SINGLE_PHOTON:
            for a in range(n2.shape[1]):
                out[f"n2_{a + 1}"] = n2[:, a]
        out["atomic_total"] = n1.sum(axis=1) + n2.sum(axis=1)
        out["charge"] = P @ self.charge
        out["norm"] = P.sum(axis=1)
        grids = {
            "doublon_density": (self.doublon @ P.T).T,
            "photon_density": (self.photon @ P.T).T,
        }
        return out, grids


def observables(basis: BasisIndex, states, times=None, H: SparseSymMatrix | None = None,
                obs: ObservableSet | None = None) -> TimeSeries:
    """Populations, doublon density P(n, t) = <a+ a+ a a>, photon density, charge."""
    states = np.atleast_2d(np.asarray(states))
    if times is None:
        times = np.arange(len(states), dtype=float)
    obs = obs or ObservableSet(basis)
    probs = np.abs(states) ** 2
    channels, grids = obs.evaluate(probs)
    if H is not None:
        HV = (H.csr @ states.T).T
        channels["energy"] = np.real(np.sum(states.conj() * HV, axis=1))
    return TimeSeries(times=times, channels=channels, grids=grids)


def evolve(basis: BasisIndex, H: SparseSymMatrix, v0, times, method="auto",
           dense_threshold=DENSE_THRESHOLD, propagator=None, energy=True) -> TimeSeries:
    """Propagate and record observables without holding every state in memory."""
    times = _check_times(times)
    obs = ObservableSet(basis)
    rows, energies = [], []
    for _, v in iter_propagate(H, v0, times, method, dense_threshold, propagator):
        rows.append(np.abs(v) ** 2)
        if energy:
            energies.append(float(np.real(np.vdot(v, H.csr @ v))))
    channels, grids = obs.evaluate(np.array(rows))
    if energy:
        channels["energy"] = np.array(energies)
    ts = TimeSeries(times=times, channels=channels, grids=grids)
    ts.metadata["propagator"] = type(propagator).__name__ if propagator else method
    return ts


def leakage_outside(ts: TimeSeries, lo: int, hi: int, grid: str = "doublon_density") -> np.ndarray:
    """Sum of a density grid over cavities outside [lo, hi] (1-based), per time."""
    G = ts.grids[grid]
    sites = np.arange(1, G.shape[1] + 1)
    outside = (sites < lo) | (sites > hi)
    return G[:, outside].sum(axis=1)
