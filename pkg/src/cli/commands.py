# src/cli/commands.py
"""
Subcommands of the command-line interface

Every command loads a model file, runs one computation, prints a summary
and writes its tables as CSV (plus SVG plots with --svg and a JSON report
with --save) under --out.
"""

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from src.channel.channel_models import DiscreteStateMac
from src.cli.model_file import LoadedModel, load_model
from src.cli.report_writer import save_report, write_csv, write_svg
from src.config.config import Config
from src.errors.exceptions import (
    BudgetExceededError,
    CapacityError,
    ModelParseError,
    ModelSchemaError,
    NonConvergenceError,
)
from src.gaussian_power.power_control import (
    constant_policy,
    corner_objective,
    delay_sweep,
    gaussian_frontier_sweep,
    gaussian_rate_triple,
    kkt_residual,
    optimize_sum_rate,
    optimize_weighted,
)
from src.inforate.information_rates import assemble_joint, policy_hash, random_policy, rate_triple
from src.multiletter.directed_information import embed_policy, rn_point
from src.region.rate_region import frontier_sweep
from src.simulate.occupancy import empirical_rate_estimate, occupancy_study
from src.state.rate_state import SolverSettings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4

CASES = ("asymmetric", "symmetric", "one-encoder")


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit status"""
    if isinstance(error, (ModelParseError, FileNotFoundError)):
        return EXIT_USAGE
    if isinstance(error, (NonConvergenceError, BudgetExceededError)):
        return EXIT_NUMERICAL
    if isinstance(error, (ModelSchemaError, ValueError)):
        return EXIT_INVALID
    return EXIT_FAILURE


def describe_error(error: BaseException) -> str:
    if isinstance(error, CapacityError):
        return error.describe()
    return f"[cli] {type(error).__name__}: {error}"


# flag parsing

def parse_alpha_grid(text: str) -> List[float]:
    """'a:b:step' -> [a, a+step, ..., <= b]"""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha grid must look like a:b:step, got {text!r}")
    if step <= 0 or stop < start or start < 0:
        raise argparse.ArgumentTypeError(f"alpha grid needs 0 <= a <= b and step > 0, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_delays(text: str) -> List[int]:
    """'0..20' (inclusive range), '0,1,5,100' or a single integer"""
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split(".."))
            values = list(range(lo, hi + 1))
        else:
            values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"delays must be 'a..b' or a comma list, got {text!r}")
    if not values or min(values) < 0:
        raise argparse.ArgumentTypeError(f"delays must be a nonempty list of nonnegative integers, got {text!r}")
    return values


def default_delays(case: str, d2: int = 0, count: int = 21) -> List[int]:
    """d1 starts at the fixed d2 in the asymmetric case"""
    start = d2 if case == "asymmetric" else 0
    return list(range(start, start + count))


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsmac",
        description="Capacity regions and power control for Markov-state MACs with delayed CSI",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="Path to a JSON model file")
    common.add_argument("--out", default=Config.OUTPUT_DIR, help="Output directory")
    common.add_argument("--seed", type=_seed, default=None, help="64-bit seed")
    common.add_argument("--tolerance", type=float, default=None, help="KKT tolerance of the power solver")
    common.add_argument("--svg", action="store_true", default=Config.EMIT_SVG, help="Also emit SVG plots")
    common.add_argument("--save", action="store_true", help="Save a JSON run report")

    sub.add_parser("validate", parents=[common], help="Check a model file")

    sweep = sub.add_parser("sweep-delay", parents=[common], help="Optimal sum rate versus delay")
    sweep.add_argument("--case", choices=CASES, default=None, help="Delay case (default: the model's)")
    sweep.add_argument("--d", type=parse_delays, default=None, help="Delays, e.g. 0..20 or 0,1,5 (default: 21 values from the smallest valid d)")
    sweep.add_argument("--d2", type=int, default=0, help="Fixed d2 of the asymmetric case")

    region = sub.add_parser("region", parents=[common], help="Capacity-region frontier sweep")
    region.add_argument("--alpha-grid", type=parse_alpha_grid, default=parse_alpha_grid("0:4:0.5"))
    region.add_argument("--aux-size", type=int, default=None, help="|U| of the discrete optimizer (<= 3)")
    region.add_argument("--starts", type=int, default=None, help="Multi-start count of the discrete optimizer")

    power = sub.add_parser("power-policy", parents=[common], help="Optimal power policy with KKT report")
    power.add_argument("--alpha", type=float, default=None, help="Weight of R1 (default: sum rate)")

    simulate = sub.add_parser("simulate", parents=[common], help="Occupancy trials and plug-in rates")
    simulate.add_argument("--n", type=int, default=100000, help="Block length")
    simulate.add_argument("--trials", type=int, default=100, help="Number of occupancy trials")
    simulate.add_argument("--epsilon-prime", type=float, default=Config.EPSILON_PRIME, help="Codebook slack")

    multi = sub.add_parser("multiletter-check", parents=[common], help="Block-length-n bounds of an embedded policy")
    multi.add_argument("--horizon", type=int, default=3, help="Largest block length")
    return parser


# helpers

def _settings(model: LoadedModel, args: argparse.Namespace, **extra):
    update = {"seed": args.seed, "tolerance": args.tolerance, **extra}
    update = {k: v for k, v in update.items() if v is not None}
    return SolverSettings.model_validate({**model.settings.model_dump(), **update})


def _require_gaussian(model: LoadedModel, command: str):
    if not model.is_gaussian:
        raise ModelSchemaError(f"{command} needs a gaussian channel, {model.name} is discrete")


def _require_discrete(model: LoadedModel, command: str):
    if model.is_gaussian:
        raise ModelSchemaError(f"{command} needs a discrete channel, {model.name} is gaussian")


def _banner(title: str):
    print("=" * 80)
    print(title)
    print("=" * 80)


def _sample_policy(model: LoadedModel, seed: int, aux_size: int = 1):
    channel: DiscreteStateMac = model.channel
    x1_size, x2_size, k, _ = channel.law.shape
    k1 = 1 if model.delays.one_encoder else k
    return random_policy(Config.get_rng(seed), k1, k, x1_size, x2_size, aux_size)


# commands

def cmd_validate(model: LoadedModel, args: argparse.Namespace, out: Path) -> Dict:
    chain = model.chain
    print(f"📦 Model: {model.name}")
    print(f"  States: {', '.join(chain.states)}")
    print("  Stationary law: " + ", ".join(f"π({s})={p:.6g}" for s, p in zip(chain.states, chain.pi)))
    print(f"  Delays: {model.delays.label()} ({model.delays.case})")

    rows = [{"state": s, "pi": float(p)} for s, p in zip(chain.states, chain.pi)]
    summary = {"name": model.name, "states": list(chain.states), "pi": chain.pi.tolist(), "delays": model.delays.label()}
    if model.is_gaussian:
        ch = model.channel
        for row, s2, g1, g2 in zip(rows, ch.sigma2, ch.h1, ch.h2):
            row.update({"sigma2": float(s2), "h1": float(g1), "h2": float(g2)})
        baseline = gaussian_rate_triple(chain, model.delays, ch, constant_policy(chain, model.delays, ch))
        print(f"  Gaussian channel, P1={ch.P1:g}, P2={ch.P2:g}")
        print(f"  Constant-power rates: R1={baseline.r1:.6f} R2={baseline.r2:.6f} Rsum={baseline.rsum:.6f}")
        summary["constant_policy_rates"] = baseline.model_dump()
    else:
        x1, x2, _, y = model.channel.law.shape
        print(f"  Discrete channel, |X1|={x1} |X2|={x2} |Y|={y}")
        summary["alphabets"] = [x1, x2, y]
    write_csv(rows, out / f"{model.name}_validate.csv", "validate")
    print("✅ Model is valid")
    return summary


def cmd_sweep_delay(model: LoadedModel, args: argparse.Namespace, out: Path) -> Dict:
    _require_gaussian(model, "sweep-delay")
    case = args.case or model.delays.case
    settings = _settings(model, args)
    d_values = args.d if args.d is not None else default_delays(case, args.d2)
    print(f"🔍 Sweeping {case} delays over {len(d_values)} values...")
    sweep = delay_sweep(model.chain, model.channel, case, d_values, args.d2, settings)

    rows = []
    for point in sweep:
        row = {"d": point.d, "rate_bits": point.sum_rate}
        row.update(point.policy.csv_columns())
        row.update({
            "d1": "inf" if point.delays.one_encoder else point.delays.d1,
            "d2": point.delays.d2,
            "kkt_residual": point.residual,
        })
        rows.append(row)
        print(f"  d={point.d:>4}  sum rate {point.sum_rate:.6f} bits  (KKT {point.residual:.1e})")

    path = out / f"{model.name}_sweep_{case}.csv"
    df = write_csv(rows, path, "delay-sweep")
    if args.svg:
        write_svg(df, "d", ["rate_bits"], path.with_suffix(".svg"), f"{model.name}: {case} sum rate", xlabel="delay d")
    return {"case": case, "rows": rows}


def cmd_region(model: LoadedModel, args: argparse.Namespace, out: Path) -> Dict:
    alphas = args.alpha_grid
    if model.is_gaussian:
        settings = _settings(model, args)
        print(f"🔍 Gaussian frontier over {len(alphas)} weights in both orientations...")
        region, _ = gaussian_frontier_sweep(model.chain, model.delays, model.channel, alphas, settings)
    else:
        settings = _settings(model, args, aux_size=args.aux_size, multi_start=args.starts)
        print(f"🔍 Discrete frontier over {len(alphas)} weights (|U|={settings.aux_size}, {settings.multi_start} starts)...")
        region = frontier_sweep(model.chain, model.delays, model.channel, alphas, settings)

    rows = [
        {
            "alpha": prov.alpha,
            "r1_bits": point.r1,
            "r2_bits": point.r2,
            "corner_id": prov.corner_id,
            "policy_hash": prov.policy_hash,
            "orientation": prov.orientation,
        }
        for point, prov in zip(region.frontier, region.provenance)
    ]
    for row in rows:
        print(f"  R1={row['r1_bits']:.6f}  R2={row['r2_bits']:.6f}  [{row['corner_id']}]")
    path = out / f"{model.name}_region.csv"
    df = write_csv(rows, path, "region")
    if args.svg:
        write_svg(df, "r1_bits", ["r2_bits"], path.with_suffix(".svg"), f"{model.name}: {model.delays.label()}", area=True, xlabel="R1")
    return {"delays": model.delays.label(), "frontier": rows}


def cmd_power_policy(model: LoadedModel, args: argparse.Namespace, out: Path) -> Dict:
    _require_gaussian(model, "power-policy")
    settings = _settings(model, args)
    chain, delays, channel = model.chain, model.delays, model.channel
    if args.alpha is None:
        policy, objective = optimize_sum_rate(chain, delays, channel, settings)
        corner_id, coefficients = "A", (0.0, 0.0, 1.0)
        label = "sum rate"
    else:
        point, policy = optimize_weighted(chain, delays, channel, args.alpha, "r1", settings)
        objective = args.alpha * point.r1 + point.r2
        corner_id, coefficients = corner_objective(args.alpha, 1.0)
        label = f"{args.alpha:g}*R1 + R2"
    rates = gaussian_rate_triple(chain, delays, channel, policy)
    corner = rates.corner_a() if corner_id == "A" else rates.corner_b()
    kkt = kkt_residual(chain, delays, channel, policy, coefficients)

    print(f"💡 Optimal {label}: {objective:.6f} bits ({delays.label()})")
    print(f"  R1={rates.r1:.6f} R2={rates.r2:.6f} Rsum={rates.rsum:.6f}")
    print(f"  Corner {corner_id}: ({corner.r1:.6f}, {corner.r2:.6f})")
    print(f"  p1: {policy.p1_map()}")
    print(f"  p2: {policy.p2_map()}")
    print(f"  KKT residual {kkt.max_residual:.2e} (ν1={kkt.nu1:.4g}, ν2={kkt.nu2:.4g})")

    row = {
        "d1": "inf" if delays.one_encoder else delays.d1,
        "d2": delays.d2,
        "alpha": args.alpha,
        "objective": objective,
        "r1": rates.r1,
        "r2": rates.r2,
        "rsum": rates.rsum,
        "corner_id": corner_id,
        "corner_r1": corner.r1,
        "corner_r2": corner.r2,
        "stationarity": kkt.stationarity,
        "complementary_slackness": kkt.complementary_slackness,
        "primal_feasibility": kkt.primal_feasibility,
        "dual_feasibility": kkt.dual_feasibility,
        "nu1": kkt.nu1,
        "nu2": kkt.nu2,
        "policy_hash": policy_hash(policy),
    }
    row.update(policy.csv_columns())
    write_csv([row], out / f"{model.name}_power_policy.csv", "power-policy")
    return {"row": row, "kkt": kkt.model_dump()}


def cmd_simulate(model: LoadedModel, args: argparse.Namespace, out: Path) -> Dict:
    seed = Config.DEFAULT_SEED if args.seed is None else args.seed
    print(f"🎲 {args.trials} occupancy trials at n={args.n}, ε'={args.epsilon_prime:g}...")
    study = occupancy_study(
        model.chain, model.delays, args.n, args.epsilon_prime, trials=args.trials, seed=seed, show_progress=True
    )
    rows = [t.as_row() for t in study.trials] + [study.summary_row()]
    write_csv(rows, out / f"{model.name}_occupancy.csv", "occupancy")
    print(f"  Declared-error frequency: {study.declared_error_frequency:.3f}")
    print(f"  Max occupancy deviation: {study.max_deviation:.4f}")
    summary = {
        "declared_error_frequency": study.declared_error_frequency,
        "max_deviation": study.max_deviation,
        "empirical_spread": study.empirical_spread() if len(study.trials) > 1 else {},
        "expected_spread": study.expected_spread,
    }

    if model.is_gaussian:
        print("  Gaussian channel: rates are closed-form, no plug-in estimate")
        return summary
    policy = _sample_policy(model, seed)
    exact = rate_triple(assemble_joint(model.chain, model.delays, model.channel, policy))
    estimate = empirical_rate_estimate(model.chain, model.delays, model.channel, policy, args.n, seed)
    rate_rows = [
        {"bound": name, "analytic": getattr(exact, name), "estimate": getattr(estimate, name),
         "abs_error": abs(getattr(exact, name) - getattr(estimate, name))}
        for name in ("r1", "r2", "rsum")
    ]
    for r in rate_rows:
        print(f"  {r['bound']:>4}: analytic {r['analytic']:.5f}  estimate {r['estimate']:.5f}")
    write_csv(rate_rows, out / f"{model.name}_rates.csv", "plugin-rates")
    summary.update({"policy_hash": policy_hash(policy), "rates": rate_rows})
    return summary


def cmd_multiletter_check(model: LoadedModel, args: argparse.Namespace, out: Path) -> Dict:
    _require_discrete(model, "multiletter-check")
    seed = Config.DEFAULT_SEED if args.seed is None else args.seed
    chain, delays, channel = model.chain, model.delays, model.channel
    policy = _sample_policy(model, seed)
    single = rate_triple(assemble_joint(chain, delays, channel, policy))
    print(f"🔗 Single-letter: R1={single.r1:.6f} R2={single.r2:.6f} Rsum={single.rsum:.6f}")

    rows = []
    for n in range(1, args.horizon + 1):
        multi = rn_point(chain, delays, channel, embed_policy(chain, delays, policy, n), n)
        deficit = max(single.r1 - multi.r1, single.r2 - multi.r2, single.rsum - multi.rsum, 0.0)
        rows.append({
            "n": n, "r1": multi.r1, "r2": multi.r2, "rsum": multi.rsum,
            "single_r1": single.r1, "single_r2": single.r2, "single_rsum": single.rsum,
            "deficit": deficit,
        })
        print(f"  n={n}: R1={multi.r1:.6f} R2={multi.r2:.6f} Rsum={multi.rsum:.6f}  deficit {deficit:.2e}")
    path = out / f"{model.name}_multiletter.csv"
    df = write_csv(rows, path, "multiletter")
    if args.svg:
        write_svg(df, "n", ["r1", "r2", "rsum"], path.with_suffix(".svg"), f"{model.name}: per-symbol bounds", xlabel="n")
    return {"policy_hash": policy_hash(policy), "rows": rows}


COMMANDS: Dict[str, Callable[[LoadedModel, argparse.Namespace, Path], Dict]] = {
    "validate": cmd_validate,
    "sweep-delay": cmd_sweep_delay,
    "region": cmd_region,
    "power-policy": cmd_power_policy,
    "simulate": cmd_simulate,
    "multiletter-check": cmd_multiletter_check,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and return the exit status

    Exit codes: 0 ok, 2 usage or unreadable model, 3 invalid model or
    domain error, 4 numerical failure, 1 anything else.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        model = load_model(args.model)
        out = Path(args.out)
        _banner(f"🧮 {args.command} · {model.name}")
        result = COMMANDS[args.command](model, args, out)
        if args.save:
            path = save_report(
                {"command": args.command, "model": args.model, "seed": args.seed, "result": result},
                out,
                args.command.replace("-", "_"),
            )
            print(f"💾 Report saved to {path}")
        return EXIT_OK
    except Exception as e:  # noqa: BLE001
        code = exit_code_for(e)
        print(f"❌ {describe_error(e)}", file=sys.stderr)
        if code == EXIT_FAILURE:
            logger.exception("unexpected failure in %s", args.command)
        return code
