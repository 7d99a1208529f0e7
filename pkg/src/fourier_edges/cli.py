"""Command-line entry point: ``fourier-edges <subcommand> [flags]``.

Exit status is 0 on success, 2 when a solver stops without converging and 1
on invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness as H
from .reconstruct import write_recon_csv
from .sampling import catalog
from .sbl import write_trace_csv

EXIT_OK, EXIT_CONTRACT, EXIT_NONCONVERGED = 0, 1, 2


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment config")
    g.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    g.add_argument("--M", type=int)
    g.add_argument("--N", type=int)
    g.add_argument("--J", type=int)
    g.add_argument("--pattern", choices=["jittered", "quadratic", "logarithmic"])
    g.add_argument("--function", choices=["f1", "f2", "f3"])
    g.add_argument("--template", choices=["s1", "s2"])
    g.add_argument("--mu", type=float)
    g.add_argument("--reg", type=float)
    g.add_argument("--design", choices=["free", "bump"])
    g.add_argument("--model", choices=["shift", "exact"])
    g.add_argument("--rcond", type=float)
    g.add_argument("--design-rcond", type=float)
    g.add_argument("--v", type=float)
    g.add_argument("--lambda-l1", type=float)
    g.add_argument("--fidelity", choices=["unsquared", "squared"])
    g.add_argument("--noise-std", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--method", choices=["l1", "sbl", "both"])
    g.add_argument("--trials", type=int)
    g.add_argument("--sbl-tol", type=float)
    g.add_argument("--sbl-max-iter", type=int)
    g.add_argument("--sbl-a-max", type=float)
    g.add_argument("--sbl-beta-init", help="number or fixed:<value>")
    g.add_argument("--sbl-count-scale", type=float)
    g.add_argument("--recon-m", type=int)
    g.add_argument("--recon-tau", type=float)
    g.add_argument("--recon-lambda", type=float)
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


_TOP = ["M", "N", "J", "pattern", "function", "template", "mu", "reg", "design", "model", "rcond",
        "design_rcond", "v", "lambda_l1", "fidelity", "noise_std", "seed", "method", "trials"]
_SBL = {"sbl_tol": "tol", "sbl_max_iter": "max_iter", "sbl_a_max": "a_max", "sbl_beta_init": "beta_init",
        "sbl_count_scale": "count_scale"}
_RECON = {"recon_m": "m_order", "recon_tau": "tau", "recon_lambda": "lam"}


def config_from_args(args) -> H.ExperimentConfig:
    d = {}
    if args.config:
        d = json.loads(Path(args.config).read_text())
    cfg = H.ExperimentConfig.from_dict(d)
    top = {k: getattr(args, k) for k in _TOP if getattr(args, k, None) is not None}
    sbl = {v: getattr(args, k) for k, v in _SBL.items() if getattr(args, k, None) is not None}
    if "beta_init" in sbl and not str(sbl["beta_init"]).startswith("fixed:"):
        sbl["beta_init"] = float(sbl["beta_init"])
    recon = {v: getattr(args, k) for k, v in _RECON.items() if getattr(args, k, None) is not None}
    if sbl:
        top["sbl"] = sbl
    if recon:
        top["recon"] = recon
    return cfg.replace(**top) if top else cfg


def _out(args) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def cmd_modes(cfg, args):
    ms = H.make_modes(cfg.pattern, cfg.M, cfg.seed, cfg.v)
    path = _out(args) / "modes.json"
    ms.save_json(path)
    return [path], True


def _write_data_csv(path, data, cfg):
    rows = [(int(k), float(l), float(v.real), float(v.imag))
            for k, l, v in zip(data.mode_set.index, data.mode_set.modes, data.values)]
    H.write_csv(path, ["k", "lambda", "re", "im"], rows, H.header_lines(cfg))


def cmd_data(cfg, args):
    ms = H.make_modes(cfg.pattern, cfg.M, cfg.seed, cfg.v)
    data = H.fourier_data(cfg, ms, cfg.seed)
    path = _out(args) / "data.csv"
    _write_data_csv(path, data, cfg)
    return [path], True


def cmd_sigma(cfg, args):
    design = H.prepare(cfg)
    cf = design.cf
    cf.meta.update(config_hash=cfg.hash(), seed=cfg.seed, versions=H.module_versions(),
                   frame_cond=design.system.cond, frame_rank=design.system.rank)
    path = _out(args) / "sigma.json"
    cf.save_json(path)
    return [path], True


def cmd_detect(cfg, args):
    det = H.run_detection(cfg)
    out = _out(args)
    paths = []
    for m, g in det.estimates.items():
        p = out / f"detect_{m}.csv"
        H.write_csv(p, H.DETECTION_COLUMNS, H.detection_rows(det, m),
                    H.header_lines(cfg, extra={"method": m, "rel_error": repr(det.errors[m])}))
        paths.append(p)
    if det.sbl_result is not None:
        p = out / "sbl_trace.csv"
        write_trace_csv(det.sbl_result.trace, p, H.header_lines(cfg))
        paths.append(p)
    summary = {"config_hash": cfg.hash(), "errors": det.errors, "converged": det.converged}
    p = out / "detect_summary.json"
    p.write_text(json.dumps(summary, indent=1, sort_keys=True))
    paths.append(p)
    return paths, all(det.converged.values())


def cmd_recon(cfg, args):
    det = H.run_detection(cfg)
    out = _out(args)
    f_true = catalog(cfg.function)(det.x)
    paths = []
    for m in det.estimates:
        f, err = H.reconstruct_from(det, m)
        p = out / f"recon_{m}.csv"
        write_recon_csv(p, det.x, f, f_true, H.header_lines(cfg, extra={"mask": m, "rel_error": repr(err)}))
        paths.append(p)
    return paths, all(det.converged.values())


def cmd_table1(cfg, args):
    rows = H.run_table1(cfg)
    p = _out(args) / "table1.csv"
    H.write_csv(p, H.TABLE1_COLUMNS, [[r[c] for c in H.TABLE1_COLUMNS] for r in rows], H.header_lines(cfg))
    return [p], all(r["failures"] == 0 for r in rows)


def cmd_sweep_threshold(cfg, args):
    det = H.run_detection(cfg, methods=H.METHODS)
    top = max(np.abs(g).max(initial=0.0) for g in det.estimates.values())
    thresholds = np.linspace(0.0, 1.05 * top, args.points)
    rows = H.sweep_threshold(det.estimates, thresholds)
    cols = ["threshold"] + [f"count_{m}" for m in det.estimates]
    widths = {m: H.plateau_width(g, 2) for m, g in det.estimates.items()}
    p = _out(args) / "threshold.csv"
    H.write_csv(p, cols, [[r[c] for c in cols] for r in rows],
                H.header_lines(cfg, extra={f"plateau2_{m}": repr(w) for m, w in widths.items()}))
    return [p], all(det.converged.values())


def cmd_sweep_resolution(cfg, args):
    Js = [int(j) for j in args.J_values.split(",")]
    rows = H.sweep_resolution(Js, cfg)
    cols = ["J", "rel_error", "min", "max", "seeds"]
    slope = H.fitted_slope([r["J"] for r in rows], [r["rel_error"] for r in rows])
    p = _out(args) / "resolution.csv"
    H.write_csv(p, cols, [[r[c] for c in cols] for r in rows], H.header_lines(cfg, extra={"slope": repr(slope)}))
    return [p], True


def cmd_noisy(cfg, args):
    if args.noise_std is None and cfg.noise_std == 0:
        cfg = cfg.replace(noise_std=0.02)
    rows = H.run_noisy_comparison(cfg, seeds=args.seeds)
    p = _out(args) / "noisy.csv"
    H.write_csv(p, H.NOISY_COLUMNS, [[r[c] for c in H.NOISY_COLUMNS] for r in rows], H.header_lines(cfg))
    return [p], True


COMMANDS = {
    "modes": (cmd_modes, "write the mode set as JSON"),
    "data": (cmd_data, "write Fourier samples (k, lambda, re, im) as CSV"),
    "sigma": (cmd_sigma, "design the concentration factor and write it as JSON"),
    "detect": (cmd_detect, "detect edges with l1 and/or SBL"),
    "recon": (cmd_recon, "edge-adaptive reconstruction using detected edges"),
    "table1": (cmd_table1, "clean-data error table over functions x patterns x methods"),
    "sweep-threshold": (cmd_sweep_threshold, "detection count versus threshold"),
    "sweep-resolution": (cmd_sweep_resolution, "SBL error versus grid size J"),
    "noisy": (cmd_noisy, "noisy comparison of both detectors and both masks"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fourier-edges", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        _add_config_flags(p)
        if name == "sweep-threshold":
            p.add_argument("--points", type=int, default=201)
        if name == "sweep-resolution":
            p.add_argument("--J-values", default="16,32,64,128")
        if name == "noisy":
            p.add_argument("--seeds", type=int, default=10)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        paths, ok = COMMANDS[args.command][0](cfg, args)
    except (ValueError, TypeError, KeyError, json.JSONDecodeError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    for p in paths:
        print(p)
    if not ok:
        print("warning: a solver stopped before converging", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
