"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import benchmarks, output
from .config import ConfigError, ScenarioConfig, build_initial_state, \
    load_config, parse_config, serialize_config
from .pressure import PcgError
from .solver import SolverError, run
from .transport import CflError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, PcgError, CflError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capflow",
        description="Incompressible multi-phase flow with phase-field "
                    "surface tension and VOF walls")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file")
    p_run.add_argument("config")
    _common_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="run a built-in benchmark")
    bench_sub = p_bench.add_subparsers(dest="bench", required=True)
    p_men = bench_sub.add_parser("meniscus", help="meniscus relaxation (designed 30 deg)")
    p_men.add_argument("--resolution", type=float, default=1.0,
                       help="1.0 = 0.125 um cells; 0.5 = half resolution")
    p_men.add_argument("--end-time", type=float, default=30.0)
    _common_flags(p_men)
    p_men.set_defaults(func=cmd_bench_meniscus)

    p_ca = bench_sub.add_parser("contact-angle", help="semicylinder wetting sweep")
    p_ca.add_argument("--angle", type=int, default=60,
                      choices=sorted(benchmarks.CONTACT_ANGLE_SIGMA2),
                      help="designed contact angle (degrees)")
    p_ca.add_argument("--resolution", type=float, default=1.0)
    p_ca.add_argument("--end-time", type=float, default=50.0)
    _common_flags(p_ca)
    p_ca.set_defaults(func=cmd_bench_contact_angle)

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)

    p_res = sub.add_parser("resume", help="resume from a checkpoint")
    p_res.add_argument("checkpoint")
    _common_flags(p_res)
    p_res.set_defaults(func=cmd_resume)
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output-dir", default=None)
    p.add_argument("--cadence", type=float, default=None, help="sample spacing (us)")
    p.add_argument("--reproducible", action="store_true", default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--formulation", default=None,
                   choices=["two-phase", "wall-symmetric", "n-phase"])


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.cadence is not None:
        cfg.cadence = args.cadence
    if args.reproducible is not None:
        cfg.reproducible = args.reproducible
    if args.max_steps is not None:
        cfg.max_steps = args.max_steps
    if args.formulation is not None:
        cfg.formulation = args.formulation
    return cfg


def _execute(cfg: ScenarioConfig, state=None) -> int:
    if state is None:
        state = build_initial_state(cfg)
    run_cfg = cfg.run_config()
    run_cfg.log_stream = sys.stderr
    out_dir = output.ensure_dir(cfg.output_dir)
    config_text = serialize_config(cfg)
    next_checkpoint = [cfg.checkpoint_every or float("inf")]

    csv_path = os.path.join(out_dir, "timeseries.csv")
    with open(csv_path, "w", encoding="ascii") as csv_fh:
        writer = output.TimeseriesWriter(csv_fh)

        def on_sample(st, row):
            writer.write_row(row)
            if "vtk" in cfg.output_formats:
                output.write_snapshot(
                    st, os.path.join(out_dir, f"snap_{st.step_count:07d}.vtk"))
            if st.t >= next_checkpoint[0]:
                output.checkpoint(st, config_text,
                                  os.path.join(out_dir, "checkpoint.npz"))
                next_checkpoint[0] += cfg.checkpoint_every

        final, rows = run(run_cfg, state, on_sample=on_sample)
    output.checkpoint(final, config_text, os.path.join(out_dir, "final.npz"))
    print(f"finished at t={final.t:.6g} us after {final.step_count} steps; "
          f"wrote {csv_path}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    return _execute(cfg)


def cmd_bench_meniscus(args) -> int:
    cfg = benchmarks.meniscus_config(resolution=args.resolution,
                                     end_time=args.end_time)
    cfg.output_dir = args.output_dir or "out-meniscus"
    return _execute(_apply_overrides(cfg, args))


def cmd_bench_contact_angle(args) -> int:
    cfg = benchmarks.contact_angle_config(angle_deg=args.angle,
                                          resolution=args.resolution,
                                          end_time=args.end_time)
    cfg.output_dir = args.output_dir or f"out-contact-{args.angle}"
    return _execute(_apply_overrides(cfg, args))


def cmd_validate(args) -> int:
    load_config(args.config)
    print("config ok")
    return EXIT_OK


def cmd_resume(args) -> int:
    payload = output.restore(args.checkpoint)
    cfg = _apply_overrides(parse_config(str(payload["config_text"])), args)
    state = build_initial_state(cfg)
    state = output.apply_checkpoint(state, payload)
    return _execute(cfg, state=state)


if __name__ == "__main__":
    raise SystemExit(main())
