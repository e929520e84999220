"""Command-line front end: load operators, run analyses, emit JSON and CSV.

Exit codes: 0 on success, 2 when an input fails validation (a diagnostic
JSON object is printed), 1 on solver failure.  Every report embeds the
tolerance set in force and the solver gap actually achieved.  Randomized
subcommands take an explicit --seed and are deterministic for a fixed one.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import jaynescummings as jc
from . import phasecov, processes, signalling
from .channels import (
    ChannelDescriptor,
    SuperchannelDescriptor,
    apply_superchannel,
    is_bistochastic_superchannel,
    random_bistochastic_superchannel,
    random_cptp,
    validate_comb,
)
from .errors import SigpowError, SolverError, ValidationError, WireError
from .sdp import SolverOptions
from .wires import LabeledOperator, Wire

EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2


def _solver_options(args) -> SolverOptions:
    if args.tol is None:
        return SolverOptions()
    return SolverOptions(
        feasibility_tol=args.tol, relative_gap_tol=args.tol, absolute_gap_tol=args.tol
    )


def _tolerance_block(args) -> dict:
    opts = _solver_options(args)
    return {
        "feasibility_tol": opts.feasibility_tol,
        "relative_gap_tol": opts.relative_gap_tol,
        "validation_tol": args.tol if args.tol is not None else 1e-7,
    }


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _load_channel(
    path: str, input_wires: str | None, tol: float | None = None
) -> ChannelDescriptor:
    op = LabeledOperator.from_json_file(path)
    if input_wires:
        inputs = tuple(input_wires.split(","))
    else:
        inputs = (op.names[0],)
    outputs = tuple(n for n in op.names if n not in inputs)
    # file inputs are often rounded; default leniency, overridable via --tol
    return ChannelDescriptor(op, inputs, outputs).validate(tol=tol or 1e-4)


def _load_superchannel(path: str) -> SuperchannelDescriptor:
    op = LabeledOperator.from_json_file(path)
    if len(op.names) != 4:
        raise ValidationError(
            "superchannel operators need exactly four wires in the order "
            "outer-in, inner-in, inner-out, outer-out"
        )
    a, b, c, d = op.names
    return SuperchannelDescriptor(op, (a,), (b,), (c,), (d,)).validate(1e-6)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_signalling(args) -> int:
    ch = _load_channel(args.channel, args.input_wires, args.tol)
    rep = signalling.signalling_power(ch, _solver_options(args))
    margin = signalling.WITNESS_TOL
    verdict = (
        "positive"
        if rep.witness_value > margin
        else "negative"
        if rep.witness_value < -margin
        else "inconclusive"
    )
    _emit(
        {
            "subcommand": "signalling",
            "s_value": rep.s_value,
            "raw_primal": rep.raw_primal,
            "dual_value": rep.dual_value,
            "gap": rep.gap,
            "witness_eb": rep.witness_eb,
            "witness_verdict": verdict,
            "tolerances": _tolerance_block(args),
        },
        args.out,
    )
    return EXIT_OK


def _cmd_exclusion(args) -> int:
    ch = _load_channel(args.channel, args.input_wires, args.tol)
    rep = signalling.exclusion_power(ch, _solver_options(args))
    _emit(
        {
            "subcommand": "exclusion",
            "p_value": rep.p_value,
            "dual_value": rep.dual_value,
            "gap": rep.gap,
            "tolerances": _tolerance_block(args),
        },
        args.out,
    )
    return EXIT_OK


def _cmd_strategy(args) -> int:
    ch = _load_channel(args.channel, args.input_wires, args.tol)
    rep = signalling.signalling_power(ch, _solver_options(args))
    strat = signalling.extract_superdense_strategy(ch, _solver_options(args))
    payload = {
        "subcommand": "strategy",
        "s_value": rep.s_value,
        "raw_primal": rep.raw_primal,
        "coincidence_sum": strat.coincidence_sum,
        "gap": rep.gap,
        "n_letters": len(strat.povm),
        "tolerances": _tolerance_block(args),
    }
    if args.full:
        payload["povm"] = [e.to_json_dict() for e in strat.povm]
        payload["encodings"] = [c.op.to_json_dict() for c in strat.encodings]
    _emit(payload, args.out)
    return EXIT_OK


def _cmd_dpi_check(args) -> int:
    opts = _solver_options(args)
    rng = np.random.default_rng(args.seed)
    if args.op:
        t = _load_superchannel(args.op)
        ch = _load_channel(args.channel, args.input_wires, args.tol)
        ch = ch.rename(
            dict(
                zip(
                    tuple(ch.input_wires) + tuple(ch.output_wires),
                    tuple(t.inner_in) + tuple(t.inner_out),
                )
            )
        )
        cases = [(t, ch)]
    else:
        cases = []
        for _ in range(args.trials):
            t = random_bistochastic_superchannel(2, rng)
            n = random_cptp(Wire("A", 2), Wire("B", 2), rng)
            cases.append((t, n))
    worst = -np.inf
    rows = []
    for t, n in cases:
        bistochastic, residuals = is_bistochastic_superchannel(t)
        before = signalling.signalling_power(n, opts).s_value
        after = signalling.signalling_power(apply_superchannel(t, n), opts).s_value
        rows.append(
            {
                "bistochastic": bistochastic,
                "s_before": before,
                "s_after": after,
                "violation": after - before,
            }
        )
        if bistochastic:
            worst = max(worst, after - before)
    _emit(
        {
            "subcommand": "dpi-check",
            "cases": rows,
            "max_violation": worst,
            "seed": args.seed,
            "tolerances": _tolerance_block(args),
        },
        args.out,
    )
    return EXIT_OK


def _cmd_comb_validate(args) -> int:
    op = LabeledOperator.from_json_file(args.op)
    with open(args.pairs) as fh:
        pairs_payload = json.load(fh)
    pairs = [(p.get("in"), p.get("out")) for p in pairs_payload["pairs"]]
    report = validate_comb(op, pairs, tol=args.tol if args.tol else 1e-7)
    payload = {
        "subcommand": "comb-validate",
        "valid": report.valid,
        "first_violation": report.first_violation,
        "residuals": report.residuals,
    }
    _emit(payload, args.out)
    return EXIT_OK if report.valid else EXIT_VALIDATION


def _cmd_pm_validate(args) -> int:
    op = LabeledOperator.from_json_file(args.op)
    roles = tuple(op.names)
    report = processes.validate_process_matrix(
        op, roles, tol=args.tol if args.tol else 1e-7
    )
    payload = {
        "subcommand": "pm-validate",
        "roles": list(roles),
        "valid": report.valid,
        "first_violation": report.first_violation,
        "residuals": report.residuals,
    }
    _emit(payload, args.out)
    return EXIT_OK if report.valid else EXIT_VALIDATION


def _cmd_pm_curve(args) -> int:
    alphas = np.linspace(0.0, 1.0, args.grid)
    rows = processes.process_signalling_curve(
        args.kind, alphas, _solver_options(args), jobs=args.jobs
    )
    if args.out:
        processes.write_curve_csv(rows, args.out)
    print(
        json.dumps(
            {
                "subcommand": "pm-curve",
                "kind": args.kind,
                "endpoints": {"first": rows[0][1], "last": rows[-1][1]},
                "rows": len(rows),
                "out": args.out,
                "tolerances": _tolerance_block(args),
            }
        )
    )
    return EXIT_OK


def _cmd_causal_loop(args) -> int:
    opts = _solver_options(args)
    if args.op:
        op = LabeledOperator.from_json_file(args.op)
        pm = processes.ProcessMatrix(op, *op.names)
        reports = [signalling.causal_loop_inequality(pm, opts)]
    else:
        rng = np.random.default_rng(args.seed)
        reports = [
            signalling.causal_loop_inequality(
                processes.random_process_matrix(rng), opts
            )
            for _ in range(args.trials)
        ]
    _emit(
        {
            "subcommand": "causal-loop",
            "terms": [
                {"term_ab": r.term_ab, "term_ba": r.term_ba, "total": r.total}
                for r in reports
            ],
            "max_total": max(r.total for r in reports),
            "seed": args.seed,
            "tolerances": _tolerance_block(args),
        },
        args.out,
    )
    return EXIT_OK


def _parse_params(pairs: list[str]) -> dict[str, float]:
    out = {}
    for pair in pairs or []:
        key, _, value = pair.partition("=")
        if not value:
            raise ValueError(f"--param expects k=v, got {pair!r}")
        out[key] = float(value)
    return out


def _model_from_args(args) -> phasecov.RateModel:
    params = _parse_params(args.param)
    if args.model == "kappa":
        return phasecov.kappa_model(params.get("kappa", 1.0))
    if args.model == "eternal":
        return phasecov.eternal_nm_model(params.get("gamma", 1.0))
    if args.model == "constant":
        return phasecov.constant_rates(
            params.get("gamma_plus", 0.0),
            params.get("gamma_minus", 0.0),
            params.get("gamma_z", 0.0),
            params.get("omega", 0.0),
        )
    raise ValueError(f"unknown model {args.model!r}; use kappa, eternal or constant")


def _cmd_pc_scan(args) -> int:
    model = _model_from_args(args)
    grid = np.linspace(0.0, args.tmax, args.grid)
    scan = phasecov.scan_dynamics(model, grid)
    if args.out:
        phasecov.write_scan_csv(scan, args.out)
    print(
        json.dumps(
            {
                "subcommand": "pc-scan",
                "model": model.name,
                "params": model.params,
                "points": int(scan.t.size),
                "min_backflow_lhs": float(scan.backflow_lhs.min()),
                "out": args.out,
                "tolerances": _tolerance_block(args),
            }
        )
    )
    return EXIT_OK


def _cmd_pc_thresholds(args) -> int:
    if args.model != "kappa":
        raise ValueError("threshold search is defined for the kappa model")
    report = phasecov.divisibility_thresholds(
        kappa_range=(0.0, args.kappa_max),
        t_max=args.tmax,
        tol=args.tol if args.tol else 1e-5,
        grid_points=args.grid,
    )
    _emit({"subcommand": "pc-thresholds", **report.to_json_dict()}, args.out)
    return EXIT_OK


def _cmd_jc_scan(args) -> int:
    cfg = (
        jc.JcConfig.from_json_file(args.config)
        if args.config
        else jc.JcConfig.fig_defaults()
    )
    grid = np.linspace(0.0, args.tmax, args.grid)
    result = jc.backflow_scan(
        cfg, grid, grid,
        intercept="dephase" if args.intercept else None,
        opts=_solver_options(args),
        jobs=args.jobs,
    )
    if args.out:
        jc.write_grid_csv(result, args.out)
    print(
        json.dumps(
            {
                "subcommand": "jc-scan",
                "grid": args.grid,
                "tmax": args.tmax,
                "intercept": bool(args.intercept),
                "max_witness": result.max_witness(),
                "positive_cells": int(np.nansum(result.witness > 1e-6)),
                "out": args.out,
                "tolerances": _tolerance_block(args),
            }
        )
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigpow",
        description="Signalling and exclusion power of quantum processes.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, channel=False, op=False, pairs=False):
        if channel:
            p.add_argument("--channel", required=True, help="channel operator JSON")
            p.add_argument(
                "--input-wires",
                help="comma-separated input wire names (default: first wire)",
            )
        if op:
            p.add_argument("--op", help="operator JSON")
        if pairs:
            p.add_argument("--pairs", required=True, help="comb wire-pair JSON")
        p.add_argument("--tol", type=float, help="tolerance override")
        p.add_argument("--seed", type=int, default=0, help="RNG seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel job cap")
        p.add_argument("--out", help="output path (JSON or CSV)")
        return p

    common(sub.add_parser("signalling", help="signalling power of a channel"),
           channel=True).set_defaults(func=_cmd_signalling)
    common(sub.add_parser("exclusion", help="exclusion power of a channel"),
           channel=True).set_defaults(func=_cmd_exclusion)
    p = common(sub.add_parser("strategy", help="superdense strategy extraction"),
               channel=True)
    p.add_argument("--full", action="store_true", help="embed POVM and encodings")
    p.set_defaults(func=_cmd_strategy)

    p = common(sub.add_parser("dpi-check", help="data-processing inequality check"),
               op=True)
    p.add_argument("--channel", help="channel operator JSON (with --op)")
    p.add_argument("--input-wires")
    p.add_argument("--trials", type=int, default=20, help="random cases without --op")
    p.set_defaults(func=_cmd_dpi_check)

    p = common(sub.add_parser("comb-validate", help="comb trace hierarchy check"),
               pairs=True)
    p.add_argument("--op", required=True, help="operator JSON")
    p.set_defaults(func=_cmd_comb_validate)

    p = common(sub.add_parser("pm-validate", help="process-matrix validity report"))
    p.add_argument("--op", required=True, help="operator JSON, wires A_i A_o B_i B_o")
    p.set_defaults(func=_cmd_pm_validate)

    p = common(sub.add_parser("pm-curve", help="signalling along cause mixtures"))
    p.add_argument("--kind", choices=("coherent", "incoherent"), required=True)
    p.add_argument("--grid", type=int, default=21)
    p.set_defaults(func=_cmd_pm_curve)

    p = common(sub.add_parser("causal-loop", help="exclusion-power loop inequality"),
               op=True)
    p.add_argument("--trials", type=int, default=20, help="random processes without --op")
    p.set_defaults(func=_cmd_causal_loop)

    p = common(sub.add_parser("pc-scan", help="phase-covariant dynamics scan"))
    p.add_argument("--model", required=True, help="kappa | eternal | constant")
    p.add_argument("--param", action="append", help="model parameter k=v")
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--grid", type=int, default=1001)
    p.set_defaults(func=_cmd_pc_scan)

    p = common(sub.add_parser("pc-thresholds", help="kappa divisibility thresholds"))
    p.add_argument("--model", default="kappa")
    p.add_argument("--param", action="append", help="model parameter k=v")
    p.add_argument("--tmax", type=float, default=20.0)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--kappa-max", type=float, default=2.0)
    p.set_defaults(func=_cmd_pc_thresholds)

    p = common(sub.add_parser("jc-scan", help="Jaynes-Cummings backflow witness"))
    p.add_argument("--config", help="JcConfig JSON")
    p.add_argument("--tmax", type=float, default=float(2 * np.pi))
    p.add_argument("--grid", type=int, default=40)
    p.add_argument("--intercept", action="store_true",
                   help="measure-and-prepare interception diagnostic")
    p.set_defaults(func=_cmd_jc_scan)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, WireError) as exc:
        diagnostic = {
            "error": type(exc).__name__,
            "message": str(exc),
        }
        if isinstance(exc, ValidationError) and exc.residual is not None:
            diagnostic["residual"] = exc.residual
        print(json.dumps(diagnostic))
        return EXIT_VALIDATION
    except SolverError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_SOLVER
    except SigpowError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_VALIDATION
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
