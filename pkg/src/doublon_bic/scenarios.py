"""Preset runs that regenerate the data behind each figure panel.

Defaults are scaled down (N=59 spectra, N=99 dynamics) so a run takes
seconds to a minute; ``full=True`` uses N=199 throughout.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import io
from .model import (
    AtomSpec,
    CouplingVariant,
    SystemConfig,
    WaveguideParams,
    df_frequency,
    doublon_band_edges,
)
from .perturbation import PerturbationInputs, calibrate_df_shift, corrected_df_condition
from .tasks import run_bic, run_evolve, run_perturbation

log = logging.getLogger(__name__)

U, J = 10.0, 1.0
G_TWO_PHOTON = 0.04
G_SINGLE_PHOTON = 0.25
DELTA2 = 5.0
IN_BAND_DETUNING = 0.3
OUT_OF_BAND_OFFSET = 1.0
T_MAX, SAMPLES = 400.0, 401


@dataclass(frozen=True)
class ScenarioOptions:
    full: bool = False
    estimator: str = "analytic"         # or "calibrated"
    t_max: float = T_MAX
    samples: int = SAMPLES

    @property
    def n_spectrum(self) -> int:
        return 199 if self.full else 59

    @property
    def n_dynamics(self) -> int:
        return 199 if self.full else 99

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)


def layout(N: int, braided: bool):
    """Coupling points: atom 1 at (c-1, c+1), atom 2 at (c, c+2), c the centre cavity."""
    c = (N + 1) // 2
    pts = [(c - 1, c + 1)]
    if braided:
        pts.append((c, c + 2))
    return pts


def omega_df() -> float:
    return df_frequency(WaveguideParams(N=3, J=J, U=U), 2)


def out_of_band_energy() -> float:
    return doublon_band_edges(U, J)[1] + OUT_OF_BAND_OFFSET


def two_photon_system(N, delta1, braided=False) -> SystemConfig:
    atoms = tuple(AtomSpec(delta1=delta1, coupling_points=p, g=G_TWO_PHOTON)
                  for p in layout(N, braided))
    return SystemConfig(WaveguideParams(N=N, J=J, U=U), atoms, CouplingVariant.TWO_PHOTON)


def single_photon_system(N, delta1, braided=False, delta2=DELTA2) -> SystemConfig:
    atoms = tuple(AtomSpec(delta1=delta1, coupling_points=p, g=G_SINGLE_PHOTON, delta2=delta2)
                  for p in layout(N, braided))
    return SystemConfig(WaveguideParams(N=N, J=J, U=U), atoms, CouplingVariant.SINGLE_PHOTON)


def with_delta1(system: SystemConfig, delta1: float) -> SystemConfig:
    return replace(system, atoms=tuple(replace(a, delta1=float(delta1)) for a in system.atoms))


def perturbation_inputs(N, delta2=DELTA2) -> PerturbationInputs:
    x1, x2 = layout(N, False)[0]
    return PerturbationInputs(N=N, g=G_SINGLE_PHOTON, delta2=delta2, x1=x1, x2=x2, J=J, U=U)


def corrected_delta1(system: SystemConfig, estimator: str) -> tuple[float, dict]:
    """Corrected decoherence-free Delta1 for a single-photon system.

    ``analytic`` uses the second-order sums; ``calibrated`` maximizes the
    long-time atomic population of ``system`` itself.
    """
    a = system.atoms[0]
    inputs = PerturbationInputs(N=system.N, g=a.g, delta2=a.delta2, x1=a.coupling_points[0],
                                x2=a.coupling_points[-1], J=J, U=U)
    analytic = corrected_df_condition(inputs, omega_df())
    info = {"estimator": estimator, "delta1_analytic": analytic,
            "delta1_uncorrected": omega_df() - a.delta2}
    if estimator == "analytic":
        return analytic, info
    if estimator != "calibrated":
        raise ValueError(f"unknown estimator {estimator!r}")
    cal = calibrate_df_shift(system, omega_df(), center=analytic)
    info.update({"calibration_grid": cal.grid, "calibration_scores": cal.scores,
                 "net_shift": cal.shift})
    return cal.delta1, info


def _dynamics(out, runs, opts, init, meta):
    """Evolve several labelled systems and collect the main traces in one CSV."""
    times = opts.times()
    paths, traces = [], {}
    for label, system, extra in runs:
        p, ts = run_evolve(system, out, times, init=init, prefix=label,
                           meta_extra={**meta, **extra, "label": label})
        paths += p
        traces[f"atomic_total_{label}"] = ts.channels["atomic_total"]
        traces[f"doublon_leakage_{label}"] = ts.channels["doublon_leakage"]
    keys = sorted(traces)
    summary_meta = io.run_metadata({**meta, "labels": [r[0] for r in runs]})
    paths.append(io.write_csv(Path(out) / "traces.csv", ["t"] + keys,
                              zip(times, *(traces[k] for k in keys)), summary_meta))
    return paths


# scenarios --------------------------------------------------------------

def fig2a(out, opts):
    system = two_photon_system(opts.n_spectrum, omega_df())
    meta = {"scenario": "fig2a", "detuning": 0.0}
    return run_bic(system, out, meta_extra=meta)[0]


def fig2b(out, opts):
    w = omega_df()
    N = opts.n_dynamics
    runs = [
        ("df", two_photon_system(N, w), {"detuning": 0.0}),
        ("in_band", two_photon_system(N, w + IN_BAND_DETUNING), {"detuning": IN_BAND_DETUNING}),
        ("out_of_band", two_photon_system(N, out_of_band_energy()),
         {"detuning": out_of_band_energy() - w}),
    ]
    return _dynamics(out, runs, opts, "atom1_level1", {"scenario": "fig2b"})


def fig2cd(out, opts):
    runs = [("df", two_photon_system(opts.n_dynamics, omega_df(), braided=True),
             {"detuning": 0.0})]
    return _dynamics(out, runs, opts, "atom1_level1", {"scenario": "fig2cd"})


def fig2ef(out, opts):
    runs = [("detuned", two_photon_system(opts.n_dynamics, omega_df() + IN_BAND_DETUNING,
                                          braided=True), {"detuning": IN_BAND_DETUNING})]
    return _dynamics(out, runs, opts, "atom1_level1", {"scenario": "fig2ef"})


def fig3a(out, opts):
    base = single_photon_system(opts.n_spectrum, omega_df() - DELTA2)
    d1, info = corrected_delta1(base, opts.estimator)
    system = with_delta1(base, d1)
    meta = {"scenario": "fig3a", "detuning": 0.0, **_jsonable(info)}
    paths = run_bic(system, out, target=d1 + DELTA2, meta_extra=meta)[0]
    paths += run_perturbation(perturbation_inputs(opts.n_spectrum), out, omega_df(),
                              meta_extra={"scenario": "fig3a"})[0]
    return paths


def fig3b(out, opts):
    """Delta1 fixed at the corrected value; Delta2 moves the |2> level."""
    N = opts.n_dynamics
    base = single_photon_system(N, omega_df() - DELTA2)
    d1, info = corrected_delta1(base, opts.estimator)
    level2 = d1 + DELTA2
    out_d2 = DELTA2 + out_of_band_energy() - level2
    runs = [
        ("df", with_delta1(base, d1), {"detuning": 0.0, "delta2": DELTA2}),
        ("in_band", single_photon_system(N, d1, delta2=DELTA2 + IN_BAND_DETUNING),
         {"detuning": IN_BAND_DETUNING, "delta2": DELTA2 + IN_BAND_DETUNING}),
        ("out_of_band", single_photon_system(N, d1, delta2=out_d2),
         {"detuning": out_d2 - DELTA2, "delta2": out_d2}),
    ]
    return _dynamics(out, runs, opts, "atom1_level2", {"scenario": "fig3b", **_jsonable(info)})


def _braided_single_photon(opts):
    base = single_photon_system(opts.n_dynamics, omega_df() - DELTA2, braided=True)
    d1, info = corrected_delta1(base, opts.estimator)
    return base, d1, info


def fig3cd(out, opts):
    base, d1, info = _braided_single_photon(opts)
    runs = [("df", with_delta1(base, d1), {"detuning": 0.0})]
    return _dynamics(out, runs, opts, "atom1_level2", {"scenario": "fig3cd", **_jsonable(info)})


def fig3ef(out, opts):
    base, d1, info = _braided_single_photon(opts)
    runs = [("detuned", with_delta1(base, d1 + IN_BAND_DETUNING),
             {"detuning": IN_BAND_DETUNING})]
    return _dynamics(out, runs, opts, "atom1_level2", {"scenario": "fig3ef", **_jsonable(info)})


def figS1(out, opts):
    """Uncorrected condition Delta1 = omega_DF - Delta2 for comparison."""
    d1 = omega_df() - DELTA2
    meta = {"scenario": "figS1", "estimator": "uncorrected"}
    out = Path(out)
    paths = run_bic(single_photon_system(opts.n_spectrum, d1), out, target=d1 + DELTA2,
                    meta_extra=meta)[0]
    runs = [("uncorrected", single_photon_system(opts.n_dynamics, d1, braided=True),
             {"detuning": 0.0})]
    return paths + _dynamics(out, runs, opts, "atom1_level2", meta)


def _jsonable(info: dict) -> dict:
    return {k: (np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)
            for k, v in info.items()}


SCENARIOS = {
    "fig2a": fig2a,
    "fig2b": fig2b,
    "fig2cd": fig2cd,
    "fig2ef": fig2ef,
    "fig3a": fig3a,
    "fig3b": fig3b,
    "fig3cd": fig3cd,
    "fig3ef": fig3ef,
    "figS1": figS1,
}


def run_scenario(name: str, out, full: bool = False, estimator: str = "analytic",
                 **overrides) -> list[Path]:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    opts = ScenarioOptions(full=full, estimator=estimator, **overrides)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    log.info("scenario %s -> %s (full=%s)", name, out, full)
    return SCENARIOS[name](out, opts)


__all__ = ["SCENARIOS", "ScenarioOptions", "run_scenario", "layout", "omega_df",
           "two_photon_system", "single_photon_system", "corrected_delta1"]
