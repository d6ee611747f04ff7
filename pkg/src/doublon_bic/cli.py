"""Command-line entry point: ``doublon-bic <command> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigValidationError, validate_config
from .model import ConfigError
from .perturbation import PerturbationInputs
from .scenarios import SCENARIOS, run_scenario
from .spectral import BICNotFound, ConvergenceError
from . import tasks

log = logging.getLogger("doublon_bic")


def _load(args):
    cfg = validate_config(args.config)
    for w in cfg.warnings:
        log.warning(w)
    out = Path(args.out) if args.out else cfg.output
    return cfg, out


def _need_system(cfg):
    if cfg.system is None:
        raise ConfigValidationError(["system: required for this command"])
    return cfg.system


def cmd_dispersion(args):
    return tasks.run_dispersion(args.U, args.J, Path(args.out or "out"), samples=args.samples,
                                delta_x=args.delta_x)


def cmd_spectrum(args):
    cfg, out = _load(args)
    sp = cfg.spectrum
    return tasks.run_spectrum(_need_system(cfg), out, mode=sp.get("mode", "auto"),
                              target=sp.get("target"), count=int(sp.get("count", 20)),
                              dense_cutoff=cfg.dense_cutoff)


def cmd_bic(args):
    cfg, out = _load(args)
    sp = cfg.spectrum
    paths, _, summary = tasks.run_bic(
        _need_system(cfg), out, target=cfg.bic_target, mode=sp.get("mode", "auto"),
        count=max(int(sp.get("count", 20)), 40), dense_cutoff=cfg.dense_cutoff,
        floor=cfg.bic_floor,
    )
    print(f"bound state E={summary['eigenvalue']:.6f} IPR={summary['ipr']:.4f}")
    return paths


def cmd_evolve(args):
    cfg, out = _load(args)
    return tasks.run_evolve(_need_system(cfg), out, cfg.times, init=cfg.initial_state,
                            dense_cutoff=cfg.dense_cutoff)[0]


def cmd_perturb(args):
    if args.config:
        cfg, out = _load(args)
        p = dict(cfg.perturbation)
        if cfg.system is not None:
            a = cfg.system.atoms[0]
            p.setdefault("N", cfg.system.N)
            p.setdefault("g", a.g)
            p.setdefault("delta2", a.delta2)
            p.setdefault("x1", a.coupling_points[0])
            p.setdefault("x2", a.coupling_points[-1])
            p.setdefault("J", cfg.system.waveguide.J)
            p.setdefault("U", cfg.system.waveguide.U)
    else:
        out = Path(args.out or "out")
        p = {"N": args.N, "g": args.g, "delta2": args.delta2, "x1": args.x1, "x2": args.x2,
             "J": args.J, "U": args.U}
    omega = p.pop("omega_df", None)
    paths, report = tasks.run_perturbation(PerturbationInputs(**p), out, omega)
    print(f"g_eff={report['g_eff']:.6f} lamb={report['lamb_shift']:.6f} "
          f"delta1_corrected={report['delta1_corrected']:.6f}")
    return paths


def cmd_reproduce(args):
    out = Path(args.out or Path("out") / args.scenario)
    return run_scenario(args.scenario, out, full=getattr(args, "full", False),
                        estimator=getattr(args, "estimator", "analytic"))


def cmd_validate(args):
    cfg = validate_config(args.config)
    for w in cfg.warnings:
        print(f"warning: {w}")
    print(f"{args.config}: ok (run={cfg.run})")
    return []


def cmd_run(args):
    """Dispatch on the ``run`` field of a config file."""
    cfg, out = _load(args)
    if cfg.run == "scenario":
        args.scenario, args.out = cfg.scenario, str(out)
        return cmd_reproduce(args)
    return {"spectrum": cmd_spectrum, "bic": cmd_bic, "evolve": cmd_evolve,
            "perturbation": cmd_perturb}[cfg.run](args)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="doublon-bic",
                                description="Giant atoms coupled to doublons in a Kerr cavity array")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--seedless", action="store_true",
                   help="accepted for compatibility; every run is deterministic")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True, help="YAML experiment config")
        s.add_argument("--out", help="output directory (overrides the config)")
        s.set_defaults(func=func)
        return s

    d = sub.add_parser("dispersion", help="doublon band and DF point")
    d.add_argument("--U", type=float, default=10.0)
    d.add_argument("--J", type=float, default=1.0)
    d.add_argument("--delta-x", type=int, default=2)
    d.add_argument("--samples", type=int, default=201)
    d.add_argument("--out")
    d.set_defaults(func=cmd_dispersion)

    with_config("spectrum", cmd_spectrum, "eigenvalues and IPRs")
    with_config("bic", cmd_bic, "locate the bound state and write its profile")
    with_config("evolve", cmd_evolve, "time evolution and observables")
    with_config("run", cmd_run, "run whatever the config's run field asks for")

    pt = sub.add_parser("perturb", help="second-order shifts for the three-level atom")
    pt.add_argument("--config")
    pt.add_argument("--out")
    pt.add_argument("--N", type=int, default=199)
    pt.add_argument("--g", type=float, default=0.25)
    pt.add_argument("--delta2", type=float, default=5.0)
    pt.add_argument("--x1", type=int, default=99)
    pt.add_argument("--x2", type=int, default=101)
    pt.add_argument("--J", type=float, default=1.0)
    pt.add_argument("--U", type=float, default=10.0)
    pt.set_defaults(func=cmd_perturb)

    r = sub.add_parser("reproduce", help="regenerate the data of one figure panel")
    r.add_argument("scenario", choices=sorted(SCENARIOS))
    r.add_argument("--out")
    r.add_argument("--full", action="store_true", help="full-size lattice (N=199)")
    r.add_argument("--estimator", choices=["calibrated", "analytic"], default="analytic",
                   help="how the corrected DF condition is obtained")
    r.set_defaults(func=cmd_reproduce)

    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        paths = args.func(args)
    except ConfigValidationError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, BICNotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path in paths or []:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
