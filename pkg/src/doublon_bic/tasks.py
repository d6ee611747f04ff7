"""Run kinds shared by the CLI subcommands and the figure scenarios.

Each task writes its data files under ``out`` and returns the paths.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from . import io
from .dynamics import evolve, initial_state, leakage_outside
from .hamiltonian import build_sector_hamiltonian
from .model import CouplingVariant, SystemConfig, doublon_dispersion
from .perturbation import PerturbationInputs, perturbation_report
from .spectral import (
    BIC_FLOOR_FACTOR,
    DENSE_THRESHOLD,
    eigensolve,
    find_bic,
)

log = logging.getLogger(__name__)


def system_to_dict(system: SystemConfig) -> dict:
    return {
        "waveguide": {"N": system.N, "J": system.waveguide.J, "U": system.waveguide.U},
        "coupling_variant": system.coupling_variant.value,
        "atoms": [
            {"delta1": a.delta1, "delta2": a.delta2, "g": a.g,
             "coupling_points": list(a.coupling_points)}
            for a in system.atoms
        ],
    }


def _meta(system: SystemConfig | None, extra: dict | None = None) -> dict:
    cfg = {"system": system_to_dict(system)} if system is not None else {}
    cfg.update(extra or {})
    return io.run_metadata(cfg)


def atom_energy(system: SystemConfig, atom: int = 0) -> float:
    """Bare energy of the initially excited atomic state."""
    a = system.atoms[atom]
    if system.coupling_variant is CouplingVariant.TWO_PHOTON:
        return a.delta1
    return a.delta1 + a.delta2


def solve_spectrum(system, mode="auto", target=None, count=40, dense_cutoff=DENSE_THRESHOLD):
    basis, H = build_sector_hamiltonian(system)
    if mode == "auto":
        mode = "full" if basis.dim <= dense_cutoff else "window"
    if target is None:
        target = atom_energy(system)
    res = eigensolve(H, mode, target=target, count=count, dense_threshold=dense_cutoff)
    return basis, H, res


def run_spectrum(system, out, mode="auto", target=None, count=20,
                 dense_cutoff=DENSE_THRESHOLD, meta_extra=None):
    out = Path(out)
    basis, H, res = solve_spectrum(system, mode, target, count, dense_cutoff)
    meta = _meta(system, {"run": "spectrum", "mode": res.mode, "target": target,
                          "count": count, "dense_cutoff": dense_cutoff, **(meta_extra or {})})
    paths = [
        io.write_json(out / "spectrum.json", {
            "dimension": basis.dim,
            "mode": res.mode,
            "eigenvalues": res.eigenvalues,
            "ipr": res.ipr,
            "degenerate": res.degenerate,
            "max_residual": float(res.residuals.max()),
        }, meta),
        io.write_csv(out / "spectrum.csv", ["index", "eigenvalue", "ipr"],
                     zip(range(len(res.eigenvalues)), res.eigenvalues, res.ipr), meta),
    ]
    return paths


def bic_summary(profile, system: SystemConfig) -> dict:
    a = system.atoms[0]
    lo, hi = a.coupling_points[0], a.coupling_points[-1]
    diag = profile.diagonal()
    peak = int(np.argmax(diag)) + 1
    return {
        "eigenvalue": profile.eigenvalue,
        "ipr": profile.ipr,
        "atomic_weight": profile.atomic_weight,
        "photon_weight": profile.photon_weight(),
        "peak_site": peak,
        "offdiag_ratio_peak": profile.offdiag_ratio(peak),
        "weight_outside_coupling_pm5": profile.weight_outside(lo - 5, hi + 5),
        "degenerate": profile.degenerate,
    }


def run_bic(system, out, target=None, mode="auto", count=40, dense_cutoff=DENSE_THRESHOLD,
            floor=BIC_FLOOR_FACTOR, meta_extra=None, prefix="bic"):
    out = Path(out)
    if target is None:
        target = atom_energy(system)
    basis, H, res = solve_spectrum(system, mode, target, count, dense_cutoff)
    idx, prof = find_bic(res, basis, target, floor)
    summary = bic_summary(prof, system)
    meta = _meta(system, {"run": "bic", "target": target, "mode": res.mode,
                          "bic_floor": floor, **(meta_extra or {})})
    N = basis.N
    paths = [
        io.write_json(out / f"{prefix}.json", {"bic": summary, "dimension": basis.dim,
                                                "eigen_index": idx}, meta),
        io.write_grid_csv(out / f"{prefix}_profile.csv", prof.P, np.arange(1, N + 1),
                          row_label="m", meta=meta),
        io.write_csv(out / f"{prefix}_diagonal.csv", ["n", "P_b_nn"],
                     zip(range(1, N + 1), prof.diagonal()), meta),
    ]
    return paths, prof, summary


def run_evolve(system, out, times, init="atom1_level2", dense_cutoff=DENSE_THRESHOLD,
               method="auto", meta_extra=None, prefix="evolve", leak_margin=10):
    out = Path(out)
    basis, H = build_sector_hamiltonian(system)
    if isinstance(init, dict):
        v0 = initial_state(basis, "custom", init)
        init_label = "custom"
    else:
        v0 = initial_state(basis, init)
        init_label = init
    ts = evolve(basis, H, v0, times, method=method, dense_threshold=dense_cutoff)
    pts = [p for a in system.atoms for p in a.coupling_points]
    lo, hi = min(pts) - leak_margin, max(pts) + leak_margin
    ts.channels["doublon_leakage"] = leakage_outside(ts, lo, hi)
    meta = _meta(system, {"run": "evolve", "initial_state": init_label,
                          "times": {"t_min": float(times[0]), "t_max": float(times[-1]),
                                    "samples": len(times)},
                          "method": method, "dense_cutoff": dense_cutoff,
                          "leakage_window": [lo, hi], **(meta_extra or {})})
    N = basis.N
    paths = [
        io.write_timeseries_csv(out / f"{prefix}_timeseries.csv", ts, meta),
        io.write_grid_csv(out / f"{prefix}_doublon_density.csv",
                          ts.grids["doublon_density"], ts.times, meta=meta),
        io.write_grid_csv(out / f"{prefix}_photon_density.csv",
                          ts.grids["photon_density"], ts.times, meta=meta),
        io.write_json(out / f"{prefix}.json", {
            "final": {k: float(v[-1]) for k, v in ts.channels.items()},
            "max_doublon_leakage": float(ts.channels["doublon_leakage"].max()),
            "dimension": basis.dim,
        }, meta),
    ]
    return paths, ts


def run_perturbation(inputs: PerturbationInputs, out, omega_df=None, meta_extra=None):
    out = Path(out)
    report = perturbation_report(inputs, omega_df)
    meta = io.run_metadata({"run": "perturbation", "inputs": vars(inputs), **(meta_extra or {})})
    return [io.write_json(out / "perturbation.json", report, meta)], report


def run_dispersion(U, J, out, samples=201, delta_x=2):
    out = Path(out)
    from .model import df_wavevector, doublon_band_edges, localization_length

    ks = np.linspace(-np.pi, np.pi, samples)
    omega = [doublon_dispersion(U, J, k) for k in ks]
    sig = [localization_length(U, J, k) if U > 0 else float("nan") for k in ks]
    meta = io.run_metadata({"run": "dispersion", "U": U, "J": J, "samples": samples,
                            "delta_x": delta_x})
    k_df = df_wavevector(delta_x)
    lo, hi = doublon_band_edges(U, J)
    summary = {
        "k_df": k_df,
        "omega_df": doublon_dispersion(U, J, k_df),
        "band_min": lo,
        "band_max": hi,
        "band_separated": abs(U) >= 4 * J,
    }
    if U > 0:
        summary["localization_length_kdf"] = localization_length(U, J, k_df)
    return [
        io.write_csv(out / "dispersion.csv", ["k", "omega_D", "localization_length"],
                     zip(ks, omega, sig), meta),
        io.write_json(out / "dispersion.json", summary, meta),
    ]
