"""
Command line for the Separation Bell toolkit

  separation-bell ineq build --n 3
  separation-bell bound ns --preset primary_ABC_ABD --exact
  separation-bell bound ns --n 3 --out ns.json --optimizer ns_box.json
  separation-bell monogamy check primary_ABC_ABD --out report.xlsx
  separation-bell quantum eval --n 3
  separation-bell figure3 --dmin 2 --dmax 50 --out figure3.csv
  separation-bell verify chains

Exit codes: 0 success, 1 a checked claim does not hold, 2 usage or input error.
Data goes to stdout, progress lines and error JSON to stderr.
"""

import argparse
import json
import logging
import os
import sys

import pandas as pd

from bell_builder import (PRESETS, build_separation_bell, build_zg_svetlichny, compose_monogamy,
                          expression_from_json, expression_to_json, parse_expression)
from bounds_oracles import (certificate_report, lr_minimum, ns_minimum,
                            pairwise_monogamy_certificates)
from chain_verifier import builtin_proofs, parse_proof, sample_soundness, verify_chain
from errors import InputError, SeparationBellError, log_error
from performance_monitor import PerformanceMonitor
from prob_core import save_behavior
from quantum_ghz import figure3_sweep, canonical_qudit_plan, quantum_separation_value, zg_value_reduced
from run_config import ENV_LOGS_DIR, RunConfig, load_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2


def status(message):
    print(message, file=sys.stderr)


def export_table(frame, path, float_digits=15):
    """Write a DataFrame to .csv or .xlsx (auto-sized columns)"""
    extension = os.path.splitext(path)[1].lower()
    if extension not in (".csv", ".xlsx"):
        raise InputError(f"Output {path} must end in .csv or .xlsx")
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        if extension == ".csv":
            frame.to_csv(path, index=False, float_format=f"%.{float_digits}g")
        else:
            with pd.ExcelWriter(path, engine='openpyxl') as writer:
                frame.to_excel(writer, sheet_name='Results', index=False)
                worksheet = writer.sheets['Results']
                for column in worksheet.columns:
                    width = max(len(str(cell.value)) for cell in column if cell.value is not None)
                    worksheet.column_dimensions[column[0].column_letter].width = min(width + 2, 50)
    except OSError as e:
        raise InputError(f"Cannot write {path}: {e}")
    logger.info("Table written to %s", path)
    return path


def _write_json(payload, path):
    text = json.dumps(payload, indent=2, sort_keys=False)
    if path:
        try:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text + "\n")
        except OSError as e:
            raise InputError(f"Cannot write {path}: {e}")
        status(f"💾 Saved to {path}")
    else:
        print(text)


def _optimizer_path(explicit, output):
    """--optimizer if given, else <stem>.optimizer.json next to --out, else None"""
    if explicit:
        return explicit
    if output:
        return os.path.splitext(output)[0] + ".optimizer.json"
    return None


def _load_expression_file(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"Cannot read inequality {path}: {e}")
    return expression_from_json(payload)


def _expression_from_args(args):
    """Exactly one of --ineq, --preset, --expr, --n or --d picks the expression"""
    chosen = [name for name in ("ineq", "preset", "expr", "n", "d") if getattr(args, name, None) is not None]
    if getattr(args, "preset", None) and getattr(args, "d", None):
        chosen.remove("d")
    if len(chosen) != 1:
        raise InputError(f"Choose exactly one inequality source, got {chosen or 'none'}")
    source = chosen[0]
    if source == "ineq":
        return _load_expression_file(args.ineq), args.ineq
    if source == "preset":
        return compose_monogamy(args.preset, d=args.d or 2), args.preset
    if source == "expr":
        return parse_expression(args.expr, d=args.outcomes), "expr"
    if source == "n":
        parties = "ABCDEFGHIJKL"[:args.n]
        return build_separation_bell(tuple(parties), minus_position=args.minus), f"n={args.n}"
    return build_zg_svetlichny(args.d, direction_swapped=args.swapped), f"d={args.d}"


# --- commands ------------------------------------------------------------------------

def cmd_ineq_build(args, config, run_config):
    expression, _ = _expression_from_args(args)
    status(f"🧮 Built {expression.label}")
    _write_json(expression_to_json(expression), run_config.output)
    return EXIT_OK


def cmd_bound(args, config, run_config):
    expression, _ = _expression_from_args(args)
    if args.kind == "lr":
        status(f"🔍 Enumerating deterministic strategies for {expression.label}")
        result = lr_minimum(expression, config, workers=run_config.workers)
    else:
        status(f"📐 Solving the no-signaling LP for {expression.label}")
        result = ns_minimum(expression, exact=run_config.exact, config=config)
    payload = result.to_dict()
    payload["optimizer_path"] = None
    optimizer_path = _optimizer_path(args.optimizer, run_config.output)
    if optimizer_path:
        payload["optimizer_path"] = save_behavior(result.optimizer, optimizer_path)
        status(f"💾 Optimizer behavior saved to {optimizer_path}")
    _write_json(payload, run_config.output)
    return EXIT_OK


def cmd_monogamy_check(args, config, run_config):
    monogamy = compose_monogamy(args.preset, d=args.d or 2)
    status(f"🔗 Checking {monogamy}")
    overall = ns_minimum(monogamy, exact=run_config.exact, config=config)
    pairwise = pairwise_monogamy_certificates(monogamy, exact=run_config.exact, config=config)
    report = certificate_report([overall] + pairwise, run_config.tolerance)
    if run_config.output:
        export_table(report, run_config.output, config["output"]["float_digits"])
        status(f"💾 Report saved to {run_config.output}")
    print(report.to_string(index=False))

    overall_holds = overall.value >= -run_config.tolerance
    if overall_holds:
        status(f"✅ {monogamy.label}: overall NS minimum {overall.value:.3g} >= 0 holds")
    else:
        status(f"❌ {monogamy.label}: overall NS minimum {overall.value:.3g} is below -{run_config.tolerance:g}")

    failing = [r for r in pairwise if r.value < -run_config.tolerance]
    if not failing:
        status(f"✅ {monogamy.label}: strong (pairwise) monogamy holds; at most one summand violable")
    else:
        worst = min(r.value for r in failing)
        status(f"❌ {monogamy.label}: strong (pairwise) monogamy fails on {len(failing)} of {len(pairwise)} pairs "
               f"(worst {worst:.3g})")
    return EXIT_OK if overall_holds and not failing else EXIT_VIOLATED


def cmd_quantum_eval(args, config, run_config):
    if (args.n is None) == (args.d is None):
        raise InputError("quantum eval takes exactly one of --n or --d")
    if args.n is not None:
        value = quantum_separation_value(args.n)
        payload = {"parties": args.n, "value": round(value, 12)}
    else:
        value = zg_value_reduced(args.d, canonical_qudit_plan(args.d))
        payload = {"d": args.d, "value": round(value, 12)}
    status(f"⚛️ GHZ value {payload['value']}")
    print(payload["value"])
    if run_config.output:
        _write_json(payload, run_config.output)
    return EXIT_OK


def cmd_figure3(args, config, run_config):
    workers = args.workers if args.workers is not None else config["quantum"]["figure3_workers"]
    frame = figure3_sweep(args.dmin, args.dmax, workers=workers, config=config)
    if run_config.output:
        export_table(frame, run_config.output, config["output"]["float_digits"])
        status(f"💾 Sweep saved to {run_config.output}")
    else:
        print(frame.to_csv(index=False, float_format=f"%.{config['output']['float_digits']}g"), end="")
    negative = int((frame["value"] < 0).sum())
    status(f"📈 d={args.dmin}..{args.dmax}: {negative} of {len(frame)} values negative")
    return EXIT_OK


def cmd_verify_chains(args, config, run_config):
    if args.file:
        try:
            with open(args.file, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise InputError(f"Cannot read proof {args.file}: {e}")
        proofs = [parse_proof(text, name=os.path.splitext(os.path.basename(args.file))[0])]
    else:
        proofs = builtin_proofs()

    all_valid = True
    for proof in proofs:
        verdict = verify_chain(proof)
        all_valid &= verdict.valid
        if verdict.valid:
            status(f"✅ {proof.name}: {len(proof.steps)} steps sum to the target")
        else:
            status(f"❌ {proof.name}: left over {verdict.difference}")
            continue
        if args.samples:
            report = sample_soundness(proof, trials=args.samples)
            all_valid &= report.passed
            status(f"   🎲 {report.trials} samples, minimum target value {report.min_target_value:.3g}")
    return EXIT_OK if all_valid else EXIT_VIOLATED


# --- parser --------------------------------------------------------------------------

def _add_source_arguments(parser):
    parser.add_argument("--ineq", help="inequality JSON file")
    parser.add_argument("--preset", choices=PRESETS, help="named monogamy preset")
    parser.add_argument("--expr", help="signed terms, e.g. '+A1B2C2 +A2B1C2 +A2B2C1 -A1B1C1'")
    parser.add_argument("--outcomes", type=int, default=2, help="outcome count for --expr")
    parser.add_argument("--n", type=int, help="N-party separation Bell inequality")
    parser.add_argument("--minus", type=int, help="X-term carrying the minus sign (with --n)")
    parser.add_argument("--d", type=int, help="d-outcome quasi-distance inequality, or d for quasi presets")
    parser.add_argument("--swapped", action="store_true", help="swap every quasi direction (with --d)")


def build_parser():
    parser = argparse.ArgumentParser(prog="separation-bell",
                                     description="Separation Bell inequalities, monogamies and their bounds")
    parser.add_argument("--config", help="configuration JSON merged over the defaults")
    parser.add_argument("--tol", type=float, help="tolerance for nonnegativity verdicts")
    parser.add_argument("--workers", type=int, help="parallel workers for enumeration and sweeps")
    parser.add_argument("--profile", action="store_true", help="print a timing and memory report")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more log output")
    commands = parser.add_subparsers(dest="command", required=True)

    ineq = commands.add_parser("ineq", help="inequalities").add_subparsers(dest="action", required=True)
    build = ineq.add_parser("build", help="write an inequality as JSON")
    _add_source_arguments(build)
    build.add_argument("--out", help="output JSON path (stdout if omitted)")
    build.set_defaults(handler=cmd_ineq_build)

    bound = commands.add_parser("bound", help="LR or NS minimum")
    bound.add_argument("kind", choices=("lr", "ns"))
    _add_source_arguments(bound)
    bound.add_argument("--exact", action="store_true", help="certify the NS minimum in rationals")
    bound.add_argument("--out", help="output JSON path (stdout if omitted)")
    bound.add_argument("--optimizer", help="optimizer behavior JSON path (default: <out stem>.optimizer.json)")
    bound.set_defaults(handler=cmd_bound)

    monogamy = commands.add_parser("monogamy", help="monogamy relations").add_subparsers(dest="action", required=True)
    check = monogamy.add_parser("check", help="NS minimum and pairwise certificates of a preset")
    check.add_argument("preset", choices=PRESETS)
    check.add_argument("--d", type=int, help="outcome count for quasi presets")
    check.add_argument("--exact", action="store_true")
    check.add_argument("--out", help="report path (.csv or .xlsx)")
    check.set_defaults(handler=cmd_monogamy_check)

    quantum = commands.add_parser("quantum", help="GHZ values").add_subparsers(dest="action", required=True)
    qeval = quantum.add_parser("eval", help="quantum value on the GHZ state")
    qeval.add_argument("--n", type=int, help="N-party separation inequality, qubits")
    qeval.add_argument("--d", type=int, help="d-outcome quasi-distance inequality, qudits")
    qeval.add_argument("--out", help="also write the value as JSON")
    qeval.set_defaults(handler=cmd_quantum_eval)

    figure3 = commands.add_parser("figure3", help="quantum value of the d-outcome inequality over d")
    figure3.add_argument("--dmin", type=int, default=2)
    figure3.add_argument("--dmax", type=int, default=50)
    figure3.add_argument("--out", help="output path (.csv or .xlsx); CSV on stdout if omitted")
    figure3.set_defaults(handler=cmd_figure3)

    verify = commands.add_parser("verify", help="proof checks").add_subparsers(dest="action", required=True)
    chains = verify.add_parser("chains", help="verify triangle-inequality chains")
    chains.add_argument("--file", help="proof in the SEP/QUASI/TARGET text format")
    chains.add_argument("--samples", type=int, default=0, help="also check on this many random distributions")
    chains.set_defaults(handler=cmd_verify_chains)
    return parser


def _run_config(args, config):
    command = " ".join(part for part in (args.command, getattr(args, "action", None) or getattr(args, "kind", None))
                       if part)
    source = next((str(getattr(args, name)) for name in ("ineq", "preset", "expr", "n", "d", "file")
                   if getattr(args, name, None) is not None), None)
    tolerance = args.tol if args.tol is not None else config["tolerances"]["lp"]
    workers = args.workers if args.workers is not None else config["enumeration"]["workers"]
    return RunConfig(command, source, tolerance, bool(getattr(args, "exact", False)),
                     getattr(args, "out", None), workers)


def run(argv=None):
    """Parse argv, run one command, return the exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logs_dir = os.environ.get(ENV_LOGS_DIR)
    monitor = PerformanceMonitor() if args.profile else None
    try:
        config = load_config(args.config)
        logs_dir = config["output"]["logs_dir"]
        run_config = _run_config(args, config)
        if monitor:
            with monitor.track(run_config.command):
                code = args.handler(args, config, run_config)
        else:
            code = args.handler(args, config, run_config)
    except SeparationBellError as e:
        print(e.to_json(), file=sys.stderr)
        log_error(e, logs_dir, context=" ".join(argv or sys.argv[1:]))
        return EXIT_USAGE
    if monitor:
        status(monitor.get_performance_report())
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
