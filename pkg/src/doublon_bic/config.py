"""Experiment configuration files (YAML) and their validation.

Example::

    system:
      waveguide: {N: 59, J: 1.0, U: 10.0}
      coupling_variant: two_photon
      atoms:
        - {delta1: 10.392304845, g: 0.04, coupling_points: [29, 31]}
    run: bic
    output: out/fig2a

Cavity, atom and coupling-point indices are 1-based in files.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .basis import AtomDouble, AtomPair, AtomPhoton, AtomSingle, PhotonPair
from .model import AtomSpec, ConfigError, CouplingVariant, SystemConfig, WaveguideParams
from .spectral import BIC_FLOOR_FACTOR, DENSE_THRESHOLD

RUN_KINDS = ("spectrum", "bic", "evolve", "perturbation", "scenario")

DEFAULTS = {
    "run": "spectrum",
    "output": "out",
    "initial_state": None,
    "times": {"t_max": 400.0, "samples": 401},
    "spectrum": {"mode": "auto", "target": None, "count": 20},
    "bic": {"target": None},
    "thresholds": {"dense_cutoff": DENSE_THRESHOLD, "bic_floor": BIC_FLOOR_FACTOR},
}


class ConfigValidationError(ValueError):
    """Collects every problem found in a config, each with a field path and line."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class ExperimentConfig:
    system: SystemConfig | None
    run: str
    times: np.ndarray
    initial_state: object
    output: Path
    dense_cutoff: int = DENSE_THRESHOLD
    bic_floor: float = BIC_FLOOR_FACTOR
    spectrum: dict = field(default_factory=dict)
    bic_target: float | None = None
    scenario: str | None = None
    perturbation: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    resolved: dict = field(default_factory=dict)


def _line_map(node, prefix="", out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_map(v, path, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            path = f"{prefix}[{i}]"
            out[path] = v.start_mark.line + 1
            _line_map(v, path, out)
    return out


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


class _Collector:
    def __init__(self, lines):
        self.lines = lines
        self.errors = []

    def err(self, path, msg):
        line = self.lines.get(path)
        if line is None:
            # fall back to the closest enclosing node that has a line
            p = path
            while line is None and ("." in p or "[" in p):
                p = p.rsplit(".", 1)[0] if "." in p else p.rsplit("[", 1)[0]
                line = self.lines.get(p)
        where = f"line {line}: " if line else ""
        self.errors.append(f"{where}{path}: {msg}")

    def number(self, d, key, path, required=True, default=None, integer=False):
        if key not in d or d[key] is None:
            if required:
                self.err(path, "required field missing")
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.err(path, f"expected a number, got {v!r}")
            return default
        if integer and int(v) != v:
            self.err(path, f"expected an integer, got {v!r}")
            return default
        return int(v) if integer else float(v)


def _parse_system(raw, c: _Collector):
    if not isinstance(raw, dict):
        c.err("system", "required mapping missing")
        return None
    wg = raw.get("waveguide")
    if not isinstance(wg, dict):
        c.err("system.waveguide", "required mapping missing")
        return None
    N = c.number(wg, "N", "system.waveguide.N", integer=True)
    J = c.number(wg, "J", "system.waveguide.J", required=False, default=1.0)
    U = c.number(wg, "U", "system.waveguide.U", required=False, default=10.0)
    variant = raw.get("coupling_variant", "single_photon")
    try:
        variant = CouplingVariant(variant)
    except ValueError:
        c.err("system.coupling_variant",
              f"must be one of {[v.value for v in CouplingVariant]}, got {variant!r}")
        variant = None
    atoms_raw = raw.get("atoms")
    if not isinstance(atoms_raw, list) or not atoms_raw:
        c.err("system.atoms", "need a non-empty list of atoms")
        return None
    waveguide = None
    if N is not None:
        if N < 2:
            c.err("system.waveguide.N", "must be >= 2")
        if J is not None and J <= 0:
            c.err("system.waveguide.J", "must be positive")
        try:
            waveguide = WaveguideParams(N=N, J=J, U=U)
        except ConfigError:
            waveguide = None
    atoms, warns = [], []
    for i, a in enumerate(atoms_raw):
        p = f"system.atoms[{i}]"
        if not isinstance(a, dict):
            c.err(p, "atom must be a mapping")
            continue
        d1 = c.number(a, "delta1", f"{p}.delta1")
        g = c.number(a, "g", f"{p}.g")
        d2 = c.number(a, "delta2", f"{p}.delta2", required=False, default=0.0)
        if variant is CouplingVariant.TWO_PHOTON and a.get("delta2") not in (None, 0, 0.0):
            warns.append(f"{p}.delta2 is ignored for the two_photon coupling variant")
        pts = a.get("coupling_points")
        ok = True
        if not isinstance(pts, list) or not pts:
            c.err(f"{p}.coupling_points", "need a non-empty list of cavity indices")
            ok = False
        else:
            for j, x in enumerate(pts):
                if isinstance(x, bool) or not isinstance(x, int):
                    c.err(f"{p}.coupling_points[{j}]", f"expected an integer, got {x!r}")
                    ok = False
                elif N is not None and not 1 <= x <= N:
                    c.err(f"{p}.coupling_points[{j}]", f"cavity {x} outside [1, {N}]")
                    ok = False
            if ok and any(b <= a_ for a_, b in zip(pts, pts[1:])):
                c.err(f"{p}.coupling_points", "must be strictly increasing")
                ok = False
        if ok and d1 is not None and g is not None:
            atoms.append(AtomSpec(delta1=d1, delta2=d2, g=g, coupling_points=tuple(pts)))
    if c.errors or waveguide is None or variant is None:
        return None
    return SystemConfig(waveguide=waveguide, atoms=tuple(atoms), coupling_variant=variant,
                        warnings=tuple(warns))


_STATE_KINDS = {
    "atom_double": lambda s: AtomDouble(s["atom"] - 1),
    "atom_pair": lambda s: AtomPair(*sorted(x - 1 for x in s["atoms"])),
    "atom_photon": lambda s: AtomPhoton(s["atom"] - 1, s["site"] - 1),
    "photon_pair": lambda s: PhotonPair(*sorted(x - 1 for x in s["sites"])),
    "atom_single": lambda s: AtomSingle(s["atom"] - 1),
}


def parse_state_spec(spec) -> dict:
    """``[{kind: photon_pair, sites: [5, 5], amplitude: 1.0}, ...]`` -> {state: amplitude}."""
    out = {}
    for item in spec:
        state = _STATE_KINDS[item["kind"]](item)
        amp = item.get("amplitude", 1.0)
        if isinstance(amp, (list, tuple)):
            amp = complex(amp[0], amp[1])
        out[state] = out.get(state, 0.0) + amp
    return out


def _parse_times(t, c: _Collector):
    if isinstance(t, list):
        arr = np.asarray(t, dtype=float)
    elif isinstance(t, dict):
        t_max = c.number(t, "t_max", "times.t_max", default=400.0)
        samples = c.number(t, "samples", "times.samples", integer=True, default=401)
        t_min = c.number(t, "t_min", "times.t_min", required=False, default=0.0)
        if samples is None or samples < 1:
            c.err("times.samples", "must be >= 1")
            return None
        arr = np.linspace(t_min, t_max, samples)
    else:
        c.err("times", "expected a list of times or {t_max, samples}")
        return None
    if np.any(arr < 0) or np.any(np.diff(arr) <= 0):
        c.err("times", "times must be non-negative and strictly increasing")
        return None
    return arr


def validate_dict(raw: dict, lines: dict | None = None) -> ExperimentConfig:
    lines = lines or {}
    c = _Collector(lines)
    if not isinstance(raw, dict):
        raise ConfigValidationError(["line 1: <root>: config must be a mapping"])
    known = {"system", "run", "scenario", "output", "times", "initial_state",
             "spectrum", "bic", "thresholds", "perturbation"}
    for k in raw:
        if k not in known:
            c.err(k, "unknown field")
    cfg = _merge(DEFAULTS, raw)
    run = cfg["run"]
    if run not in RUN_KINDS:
        c.err("run", f"must be one of {list(RUN_KINDS)}, got {run!r}")
    scenario = cfg.get("scenario")
    if run == "scenario":
        from .scenarios import SCENARIOS

        if scenario not in SCENARIOS:
            c.err("scenario", f"unknown scenario {scenario!r}")
    system = None
    if run != "scenario" or "system" in raw:
        system = _parse_system(raw.get("system"), c)
    times = _parse_times(cfg["times"], c)
    th = cfg["thresholds"]
    dense_cutoff = c.number(th, "dense_cutoff", "thresholds.dense_cutoff", integer=True)
    bic_floor = c.number(th, "bic_floor", "thresholds.bic_floor")
    if bic_floor is not None and bic_floor <= 0:
        c.err("thresholds.bic_floor", "must be positive")
    spec = cfg["spectrum"]
    if spec.get("mode") not in ("auto", "full", "window"):
        c.err("spectrum.mode", "must be auto, full or window")
    init = cfg["initial_state"]
    if system is not None and init is None:
        init = ("atom1_level1" if system.coupling_variant is CouplingVariant.TWO_PHOTON
                else "atom1_level2")
        cfg["initial_state"] = init
    if isinstance(init, list):
        try:
            init = parse_state_spec(init)
        except (KeyError, TypeError) as exc:
            c.err("initial_state", f"bad custom state entry: {exc}")
    elif init is not None and init not in ("atom1_level1", "atom1_level2"):
        c.err("initial_state", f"unknown preset {init!r}")
    if c.errors:
        raise ConfigValidationError(c.errors)
    return ExperimentConfig(
        system=system,
        run=run,
        times=times,
        initial_state=init,
        output=Path(cfg["output"]),
        dense_cutoff=dense_cutoff,
        bic_floor=bic_floor,
        spectrum=dict(spec),
        bic_target=cfg["bic"].get("target"),
        scenario=scenario,
        perturbation=dict(cfg.get("perturbation") or {}),
        warnings=list(system.warnings) if system else [],
        resolved=cfg,
    )


def validate_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config.

    Raises :class:`ConfigValidationError` listing every violation with its
    field path and source line.
    """
    path = Path(path)
    text = path.read_text()
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f"line {mark.line + 1}: " if mark else ""
        raise ConfigValidationError([f"{line}<yaml>: {exc}"]) from exc
    lines = _line_map(node) if node is not None else {}
    return validate_dict(raw if raw is not None else {}, lines)
