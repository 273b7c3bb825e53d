"""Command-line interface.

Exit codes: 0 success, 1 parse or validation error, 2 infeasible lift.

Every subcommand emits records; ``--format text`` prints each record as one
line of ``key=value`` pairs and ``--format json-lines`` prints the same
record as one JSON object per line.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import dyadic_grid, finest_scale, relation_count, simulate_dt, sweep_h, sweep_q
from .exceptions import TimescaleError
from .matfun import RANK_TOL
from .model import CtModel, DtModel, decompose_relations, kernel_residual
from .modelfile import ModelFileError, dumps_model, load_model
from .resample import TAU_RICCATI, lift_general, lift_q, lift_to_ct, sample_ct

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

DEFAULT_Q_GRID = list(range(1, 9))
DEFAULT_OMEGAS = np.logspace(-3, 3, 50)


class CliError(Exception):
    pass


def _fmt_value(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, separators=(",", ":"))
    v = str(v)
    return json.dumps(v) if (not v or any(c.isspace() or c in "\"'" for c in v)) else v


class Reporter:
    def __init__(self, fmt, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def emit(self, record):
        if self.fmt == "json-lines":
            self.stream.write(json.dumps(record) + "\n")
        else:
            self.stream.write(" ".join(f"{k}={_fmt_value(v)}" for k, v in record.items()) + "\n")


def _to_list(M):
    return np.asarray(M, dtype=float).tolist()


def _write_text(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(args, kind=None):
    model, meta = load_model(args.model, validate=not args.no_validate)
    if kind == "ct" and not isinstance(model, CtModel):
        raise CliError(f"{args.model}: expected a continuous-time (kind 'ct') model")
    if kind == "dt" and not isinstance(model, DtModel):
        raise CliError(f"{args.model}: expected a discrete-time (kind 'dt') model")
    return model, meta


def _lift_record(rep, **extra):
    rec = dict(extra)
    rec["feasible"] = rep.feasible
    rec["failed_condition"] = None if rep.failed_condition is None else str(rep.failed_condition)
    if rep.certificate is not None:
        rec["rank"] = rep.certificate.rank
        rec["min_eig"] = rep.certificate.min_eig
        rec["eigenvalues"] = [float(x) for x in rep.certificate.eigenvalues]
    rec["message"] = rep.message
    return rec


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_sample(args, cfg, out):
    model, meta = _load(args, "ct")
    dt = sample_ct(model, args.h)
    meta = dict(meta, source=str(args.model), h=repr(float(args.h)))
    if args.output:
        Path(args.output).write_text(dumps_model(dt, meta))
        out.emit({"written": args.output, "n": dt.n, "p": dt.p, "step": dt.step})
    else:
        sys.stdout.write(dumps_model(dt, meta))
    return EXIT_OK


def cmd_lift(args, cfg, out):
    model, meta = _load(args, "dt")
    tol = dict(rank_tol=cfg["rank_tol"], psd_tol=cfg["psd_tol"])
    if args.q is not None:
        rep = lift_q(model, args.q, **tol)
        rec = _lift_record(rep, mode="q", q=args.q)
    elif args.general:
        rep = lift_general(model, args.h, riccati_tol=cfg["riccati_tol"], **tol)
        rec = _lift_record(rep, mode="general", h=model.step if args.h is None else args.h)
    else:
        if model.has_feedthrough:
            raise CliError("model has D != 0; use --general for the continuous lift")
        rep = lift_to_ct(model, args.h, **tol)
        rec = _lift_record(rep, mode="h", h=model.step if args.h is None else args.h)
    if rep.feasible:
        rec["relations"] = relation_count(rep.lifted, cfg["rank_tol"])
    out.emit(rec)
    if rep.feasible and args.output:
        Path(args.output).write_text(dumps_model(rep.lifted, dict(meta, lifted_from=str(args.model))))
    return EXIT_OK if rep.feasible else EXIT_INFEASIBLE


def cmd_sweep(args, cfg, out):
    model, _ = _load(args)
    grid = args.grid
    if grid is not None and len(grid) == 0:
        raise CliError("empty grid")
    if args.axis == "h":
        if not isinstance(model, CtModel):
            raise CliError("--axis h needs a continuous-time model")
        grid = cfg.get("h_grid") or grid or dyadic_grid(7)
        table = sweep_h(model, [float(g) for g in grid])
    else:
        if not isinstance(model, DtModel):
            raise CliError("--axis q needs a discrete-time model")
        grid = cfg.get("q_grid") or grid or DEFAULT_Q_GRID
        qs = [float(g) for g in grid]
        if any(q != int(q) or q < 1 for q in qs):
            raise CliError("q grid must hold positive integers")
        table = sweep_q(model, [int(q) for q in qs], rank_tol=cfg["rank_tol"], psd_tol=cfg["psd_tol"])
    _write_text(table.to_csv(), args.output)
    return EXIT_OK


def cmd_relations(args, cfg, out):
    model, _ = _load(args, "ct")
    dec = decompose_relations(model)
    omegas = cfg.get("omegas") or DEFAULT_OMEGAS
    m = model.p - relation_count(model, cfg["rank_tol"])
    out.emit({
        "p": model.p,
        "m": m,
        "relations": dec.relation_count,
        "input_rows": dec.input_indices,
        "output_rows": dec.output_indices,
        "kernel_residual": kernel_residual(dec, model, omegas),
        "T_order": int(dec.T_min[0].shape[0]),
    })
    for name, M in zip(("T_A", "T_B", "T_C", "T_D"), dec.T_min):
        out.emit({"matrix": name, "value": _to_list(M)})
    return EXIT_OK


def cmd_finest(args, cfg, out):
    model, _ = _load(args, "dt")
    res = finest_scale(model, q_max=args.qmax, h_per_step=args.h, continuous=args.continuous,
                       rank_tol=cfg["rank_tol"], psd_tol=cfg["psd_tol"])
    for q, rep in res.reports.items():
        out.emit(_lift_record(rep, q=q))
    if res.continuous is not None:
        out.emit(_lift_record(res.continuous, continuous=True))
    out.emit({
        "q*": res.q_star,
        "fine_step": res.fine_model.step,
        "relations": relation_count(res.fine_model, cfg["rank_tol"]),
        "continuous_lift": None if res.continuous is None else res.continuous.feasible,
    })
    if args.output:
        Path(args.output).write_text(dumps_model(res.finest_model, {"q_star": res.q_star}))
    return EXIT_OK


def cmd_simulate(args, cfg, out):
    model, _ = _load(args, "dt")
    seed = cfg.get("seed", args.seed)
    Y = simulate_dt(model, args.steps, seed)
    lines = [",".join(f"y_{k}" for k in range(1, model.p + 1))]
    lines += [",".join(repr(float(v)) for v in row) for row in Y]
    _write_text("\n".join(lines) + "\n", args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _positive(x):
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {x}")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json-lines"), default="text")
    common.add_argument("--config", help="JSON run configuration; overrides flags")
    common.add_argument("--no-validate", action="store_true",
                        help="skip structural validation of the model file")
    common.add_argument("--rank-tol", type=_positive, default=RANK_TOL)
    common.add_argument("--psd-tol", type=_positive, default=None)
    common.add_argument("-o", "--output", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="timescale-lift",
        description="Sample, subsample and lift linear stochastic state-space models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="sample a continuous model")
    p.add_argument("model")
    p.add_argument("--h", type=_positive, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("lift", parents=[common], help="lift a discrete model")
    p.add_argument("model")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--q", type=int, help="lift to a q-times-faster discrete model")
    g.add_argument("--general", action="store_true",
                   help="continuous lift of a model with feedthrough")
    p.add_argument("--h", type=_positive, help="sampling period (default: model step)")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("sweep", parents=[common], help="eigenvalue sweep over h or q")
    p.add_argument("model")
    p.add_argument("--axis", choices=("h", "q"), required=True)
    p.add_argument("--grid", nargs="*", type=float)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("relations", parents=[common], help="dynamic relations of a continuous model")
    p.add_argument("model")
    p.set_defaults(func=cmd_relations)

    p = sub.add_parser("finest", parents=[common], help="finest consistent time scale")
    p.add_argument("model")
    p.add_argument("--qmax", type=int, default=16)
    p.add_argument("--continuous", action="store_true")
    p.add_argument("--h", type=_positive, help="period of one coarse step")
    p.set_defaults(func=cmd_finest)

    p = sub.add_parser("simulate", parents=[common], help="seeded output trajectory (CSV)")
    p.add_argument("model")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)
    return parser


def _run_config(args):
    cfg = {"rank_tol": args.rank_tol, "psd_tol": args.psd_tol, "riccati_tol": TAU_RICCATI}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise CliError("config must be a JSON object")
        for key in ("rank_tol", "psd_tol", "riccati_tol"):
            if key in doc and not (isinstance(doc[key], (int, float)) and doc[key] > 0):
                raise CliError(f"config '{key}' must be positive")
        for key in ("h_grid", "q_grid", "omegas"):
            if key in doc and not doc[key]:
                raise CliError(f"config '{key}' must be non-empty")
        cfg.update(doc)
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Reporter(args.format)
    try:
        cfg = _run_config(args)
        return args.func(args, cfg, out)
    except (CliError, ModelFileError, TimescaleError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
