"""Command line entry point.

Subcommands: riemann (one flat-space Riemann problem), emit-model (exact
solution slices), simulate (one run with snapshots and a manifest),
converge (mesh-doubling error tables), reverse (time-reversed collapse run
with optional boundary chopping).  Exit codes: 0 success, 2 configuration
error, 3 horizon / coordinate-singularity stop, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields

import numpy as np

from . import diagnostics, experiments, models, output, riemann, scheme
from .config import RunConfig, config_from_dict, parse_config
from .errors import HorizonEncountered, ParseError, RelshockError, ValidationError
from .fluid import EosParams, FluidState

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HORIZON = 3
EXIT_NUMERICAL = 4


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="key = value configuration file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None)


def _load_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else RunConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(RunConfig)
        if getattr(args, f.name, None) is not None
    }
    if overrides:
        base = {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}
        base.update(overrides)
        cfg = config_from_dict(base)
    return cfg.validate()


def _make_model(cfg: RunConfig):
    eos = EosParams(cfg.sigma)
    return models.make_model(
        cfg.model, eos, r0=cfg.r0, t_start=cfg.t_start, b0=cfg.b0,
        psi0=cfg.psi0, reversed_time=cfg.reversed,
    ), eos


def cmd_riemann(args) -> int:
    eos = EosParams(args.sigma)
    left = FluidState(args.rho_l, args.v_l)
    right = FluidState(args.rho_r, args.v_r)
    fan = riemann.solve_middle_state(left, right, eos, args.eps)
    os.makedirs(args.outdir, exist_ok=True)
    output.emit_fan_json(fan, os.path.join(args.outdir, "fan.json"))
    xi = np.linspace(args.xi_min, args.xi_max, args.xi_count)
    sol = riemann.solve_interfaces(left.rho, left.v, right.rho, right.v, eos, args.eps)
    rho, v = riemann.sample_solution(sol, xi)
    path = os.path.join(args.outdir, "samples.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("xi,rho,v\n")
        for k in range(xi.size):
            fh.write(f"{xi[k]:.10e},{rho[k]:.10e},{v[k]:.10e}\n")
    print(f"region {fan.region}; middle rho={fan.middle.rho:.6e} v={fan.middle.v:.6f}")
    print(f"wrote {path} and fan.json")
    return EXIT_OK


def cmd_emit_model(args) -> int:
    cfg = _load_config(args)
    model, _ = _make_model(cfg)
    r = np.linspace(cfg.r_min, cfg.r_max, args.count)
    t = model.t_start + args.at
    rho, v, A, B, M = model.evaluate(t, r)
    prof = experiments.ProfileSlice(t=t, x=r, xe=r, rho=rho, v=v, A=A, B=B, M=M)
    os.makedirs(cfg.outdir, exist_ok=True)
    path = output.emit_plotdata(prof, os.path.join(cfg.outdir, "model.csv"))
    print(f"wrote {path}")
    return EXIT_OK


def _manifest_payload(cfg: RunConfig, arts) -> dict:
    payload = {
        "config": {f.name: getattr(cfg, f.name) for f in fields(RunConfig)},
        "steps": arts.log.steps,
        "stop_reason": arts.log.stop_reason,
        "t_final": arts.state.t,
        "dt_history": arts.log.dt_history,
        "chops": arts.log.chops,
    }
    if arts.cones is not None:
        payload["cones"] = [
            {"t": t, "light": [c.light_left, c.light_right],
             "sound": [c.sound_left, c.sound_right]}
            for t, c in arts.cones.trajectory
        ]
    if arts.mu is not None:
        payload["mu_history"] = [list(row) for row in arts.mu.history]
    if arts.tv is not None:
        payload["tv_history"] = [list(row) for row in arts.tv.history]
        payload["tv_alarmed"] = arts.tv.alarmed
    try:
        border, _ = diagnostics.detect_frw_border(arts.state)
        payload["frw_border"] = border
    except RelshockError:
        pass
    try:
        border, _ = diagnostics.detect_tov_border(arts.state)
        payload["tov_border"] = border
    except RelshockError:
        pass
    return payload


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    model, eos = _make_model(cfg)
    grid = scheme.SimGrid(cfg.r_min, cfg.r_max, cfg.n)
    arts = experiments.simulate_model(
        model, grid, eos, cfg.duration,
        snapshots=max(cfg.snapshots, 1),
        track_cones=cfg.track_cones and cfg.model.endswith("_tov"),
        track_mu=cfg.reversed, track_tv=True, eps=cfg.eps,
    )
    os.makedirs(cfg.outdir, exist_ok=True)
    for k, prof in enumerate(arts.snapshots):
        output.emit_plotdata(prof, os.path.join(cfg.outdir, f"snapshot_{k:03d}.csv"))
    output.emit_manifest(_manifest_payload(cfg, arts),
                         os.path.join(cfg.outdir, "manifest.json"))
    print(f"{cfg.model}: {arts.log.steps} steps to t = {arts.state.t:.6f}; "
          f"wrote {len(arts.snapshots)} snapshots to {cfg.outdir}")
    return EXIT_HORIZON if arts.log.horizon else EXIT_OK


def _parse_levels(spec: str):
    lo, _, hi = spec.partition("..")
    lo, hi = int(lo), int(hi)
    ns = []
    n = lo
    while n <= hi:
        ns.append(n)
        n *= 2
    return ns


def cmd_converge(args) -> int:
    cfg = _load_config(args)
    eos = EosParams(cfg.sigma)
    ns = _parse_levels(args.levels)
    reference = "model" if cfg.model in ("frw1", "frw2", "tov") else "fine"

    def make():
        model, _ = _make_model(cfg)
        return model

    result = experiments.ladder(make, ns, eos, cfg.r_min, cfg.r_max,
                                cfg.duration, reference=reference, eps=cfg.eps)
    os.makedirs(cfg.outdir, exist_ok=True)
    path = output.emit_table(result, os.path.join(cfg.outdir, "table.csv"))
    print(f"wrote {path} (reference: {reference})")
    for name in experiments.FIELDS:
        rates = ", ".join(f"{r:.2f}" for r in result["rates"][name])
        print(f"  {name}: rates {rates}")
    return EXIT_OK


def cmd_reverse(args) -> int:
    cfg = _load_config(args)
    eos = EosParams(cfg.sigma)
    arts = experiments.reversed_collapse_run(
        cfg.n, eos, r_min=cfg.r_min, r_max=cfg.r_max, r0=cfg.r0,
        continue_chop=args.continue_chop, min_cells=cfg.min_cells, eps=cfg.eps,
    )
    os.makedirs(cfg.outdir, exist_ok=True)
    output.emit_plotdata(experiments.ProfileSlice.from_state(arts.state),
                         os.path.join(cfg.outdir, "final.csv"))
    output.emit_manifest(_manifest_payload(cfg, arts),
                         os.path.join(cfg.outdir, "manifest.json"))
    mu, radius = diagnostics.black_hole_number(arts.state)
    print(f"stopped ({arts.log.stop_reason}) at t = {arts.state.t:.6f}; "
          f"mu_max = {mu:.4f} at r = {radius:.4f}")
    return EXIT_HORIZON if arts.log.horizon else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relshock", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("riemann", help="solve one flat-space Riemann problem")
    p.add_argument("--rho-l", type=float, required=True)
    p.add_argument("--v-l", type=float, required=True)
    p.add_argument("--rho-r", type=float, required=True)
    p.add_argument("--v-r", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0 / 3.0)
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--xi-min", type=float, default=-1.0)
    p.add_argument("--xi-max", type=float, default=1.0)
    p.add_argument("--xi-count", type=int, default=201)
    p.add_argument("--outdir", default="out")
    p.set_defaults(func=cmd_riemann)

    p = sub.add_parser("emit-model", help="write an exact-solution slice")
    _add_config_flags(p)
    p.add_argument("--at", type=float, default=0.0,
                   help="time offset from the model start time")
    p.add_argument("--count", type=int, default=257)
    p.set_defaults(func=cmd_emit_model)

    p = sub.add_parser("simulate", help="run one model")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converge", help="mesh-doubling error table")
    _add_config_flags(p)
    p.add_argument("--levels", default="64..1024", help="e.g. 64..2048")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("reverse", help="time-reversed collapse run")
    _add_config_flags(p)
    p.add_argument("--continue-chop", action="store_true",
                   help="keep zooming in by discarding boundary cells")
    p.set_defaults(func=cmd_reverse)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "reverse" and getattr(args, "reversed", None) is None:
        args.reversed = "true"
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HorizonEncountered as exc:
        print(f"stopped at a coordinate singularity: {exc}", file=sys.stderr)
        return EXIT_HORIZON
    except RelshockError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
