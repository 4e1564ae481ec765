"""Command-line front end: seeded verification runs with text, json or csv reports.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import discrimination as disc
from . import qcore
from .adversary import azuma_tail_check, estimate_cheat_probability, loss_attack_check, strategy_by_name, BUILTIN_STRATEGIES
from .errors import DomainError
from .protocol import DEFAULT_SEED, RunConfig, run_honest

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class ReportRow:
    quantity: str
    value: Any
    reference: Any = None
    passed: bool | None = None
    trials: int | None = None
    stderr: float | None = None


@dataclass
class Report:
    command: str
    parameters: dict
    rows: list
    transcript: str | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "passed": self.passed,
            "rows": [asdict(r) for r in self.rows],
        }


def _fmt(v, verdict: bool = False) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        if verdict:
            return "pass" if v else "FAIL"
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    header = ["quantity", "value", "reference", "passed", "trials", "stderr"]
    table = [[_fmt(getattr(r, h), h == "passed") for h in header] for r in report.rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(table)
        return buf.getvalue()
    widths = [max(len(h), *(len(row[i]) for row in table)) if table else len(h) for i, h in enumerate(header)]
    lines = [f"# {report.command} " + " ".join(f"{k}={_fmt(v)}" for k, v in sorted(report.parameters.items()))]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in table]
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _within(value: float, reference: float, tol: float) -> bool:
    return abs(value - reference) <= tol


def cmd_verify_povm(args) -> Report:
    rows = []
    elems = []
    for i in range(1, 5):
        theta = i * math.pi / 4 - math.pi / 8 + (args.perturb if i == 1 else 0.0)
        v = np.array([math.cos(theta), math.sin(theta)])
        elems.append(0.5 * np.outer(v, v).astype(complex))
    completeness = float(np.max(np.abs(sum(elems) - np.eye(2))))
    rows.append(ReportRow("completeness_max_deviation", completeness, 0.0, completeness <= qcore.PSD_TOL))
    try:
        strategy = disc.GuessingStrategy(qcore.Povm(tuple(elems)))
    except DomainError:
        rows.append(ReportRow("povm_valid", False, True, False))
        return Report("verify-povm", {"perturb": args.perturb}, rows)

    gamma = disc.gamma_operator(strategy)
    gamma_ref = (1 + 1 / math.sqrt(2)) / 8
    gamma_dev = float(np.max(np.abs(gamma - gamma_ref * np.eye(2))))
    rows.append(ReportRow("gamma_diagonal", float(gamma[0, 0].real), gamma_ref, gamma_dev <= qcore.EQ_TOL))
    rows.append(ReportRow("gamma_max_deviation", gamma_dev, 0.0, gamma_dev <= qcore.EQ_TOL))
    try:
        cert = disc.holevo_certificate(strategy, qcore.PSD_TOL)
        for i, m in enumerate(cert.min_eigenvalues, start=1):
            rows.append(ReportRow(f"holevo_min_eigenvalue_{i}", m, 0.0, m >= -qcore.PSD_TOL))
    except (DomainError, ArithmeticError):
        rows.append(ReportRow("holevo_certificate", False, True, False))
    win = disc.win_probability(strategy)
    rows.append(ReportRow("win_probability", win, disc.MU, _within(win, disc.MU, qcore.EQ_TOL)))
    two_tr = 2 * float(np.trace(gamma).real)
    rows.append(ReportRow("two_trace_gamma", two_tr, win, _within(two_tr, win, qcore.EQ_TOL)))
    return Report("verify-povm", {"perturb": args.perturb}, rows)


def _azuma_pairs(specs) -> list[tuple[int, float]]:
    pairs = []
    for spec in specs or []:
        try:
            n, eps = spec.split(":")
            pairs.append((int(n), float(eps)))
        except ValueError:
            raise DomainError(f"azuma pair must look like N:EPS, got {spec!r}") from None
    return pairs


def cmd_security_table(args) -> Report:
    if args.n_max < 1:
        raise DomainError("--n-max must be >= 1")
    rows = [
        ReportRow("mu", disc.MU, 0.5 * (1 + 1 / math.sqrt(2)), True),
        ReportRow("noise_threshold", disc.NOISE_THRESHOLD, 1 - disc.MU,
                  _within(disc.NOISE_THRESHOLD, 1 - disc.MU, 1e-15)),
    ]
    prev = math.inf
    for n in range(1, args.n_max + 1):
        b = disc.security_bound(n)
        rows.append(ReportRow(f"security_bound_N={n}", b, None, b < prev))
        prev = b
    for n, eps in _azuma_pairs(args.azuma):
        rows.append(ReportRow(f"azuma_bound_N={n}_eps={eps:g}", disc.azuma_bound(n, eps)))
    return Report("security-table", {"n_max": args.n_max, "azuma": list(args.azuma or [])}, rows)


def cmd_azuma_table(args) -> Report:
    rows = []
    for n in args.n_values:
        for eps in args.eps_values:
            rows.append(ReportRow(f"azuma_bound_N={n}_eps={eps:g}", disc.azuma_bound(n, eps)))
        if args.trials:
            for row in azuma_tail_check(n, args.trials, args.eps_values, args.seed):
                rows.append(ReportRow(f"empirical_tail_N={n}_eps={row.epsilon:g}", row.fraction, row.bound,
                                      row.passed, args.trials, row.stderr))
    params = {"n_values": args.n_values, "eps_values": args.eps_values, "trials": args.trials, "seed": args.seed}
    return Report("azuma-table", params, rows)


def _run_config(args) -> RunConfig:
    return RunConfig(n=args.n, bit=args.bit, separation=args.separation, noise=args.noise, loss=args.loss,
                     tolerance=args.tolerance, max_loss=args.max_loss, seed=args.seed)


def cmd_honest_run(args) -> Report:
    config = _run_config(args)
    transcript = run_honest(config)
    summary = transcript.summary()
    rows = [
        ReportRow("verdict", summary["verdict"], "Accept", transcript.verdict.accepted),
        ReportRow("error_fraction_q0", summary["error_fractions"][0], config.tolerance),
        ReportRow("error_fraction_q1", summary["error_fractions"][1], config.tolerance),
        ReportRow("loss_fraction", summary["loss_fraction"], config.max_loss),
        ReportRow("checked_positions", summary["checked_positions"]),
        ReportRow("messages", summary["messages"]),
        ReportRow("causality_violations", summary["causality_violations"], 0, summary["causality_violations"] == 0),
        ReportRow("transcript_digest", summary["transcript_digest"]),
    ]
    return Report("honest-run", asdict(config), rows, transcript.text_report())


def cmd_cheat_run(args) -> Report:
    strategy = strategy_by_name(args.strategy)
    r = estimate_cheat_probability(strategy, args.n, args.trials, args.tolerance, args.seed)
    rows = [
        ReportRow("cheat_probability", r.estimate, r.bound, not r.bound_violated, r.trials, r.stderr),
        ReportRow("successes", r.successes, None, None, r.trials, r.stderr * r.trials),
        ReportRow("security_bound", r.bound),
    ]
    params = {"strategy": args.strategy, "n": args.n, "trials": args.trials, "tolerance": args.tolerance,
              "seed": args.seed}
    return Report("cheat-run", params, rows)


def cmd_loss_check(args) -> Report:
    r = loss_attack_check(args.loss, args.n, args.trials, args.seed)
    rows = [
        ReportRow("cheat_probability", r.estimate, r.oracle_observed,
                  abs(r.estimate - r.oracle_observed) <= 4 * r.stderr, r.trials, r.stderr),
        ReportRow("binomial_mixture_oracle", r.oracle_exact),
        ReportRow("per_surviving_state_rate", r.per_state_rate, disc.MU,
                  r.per_state_rate <= disc.MU + 4 * r.per_state_stderr, r.trials, r.per_state_stderr),
        ReportRow("mean_survivors", r.mean_survivors, args.n * (1 - args.loss), None, r.trials, r.survivors_stderr),
        ReportRow("bound_violated", r.bound_violated, False, not r.bound_violated, r.trials),
    ]
    return Report("loss-check", {"loss": args.loss, "n": args.n, "trials": args.trials, "seed": args.seed}, rows)


def cmd_collective_check(args) -> Report:
    second = disc.always_guess(1) if args.corrupt else None
    cert = disc.collective_certificate_n2(qcore.PSD_TOL, second=second)
    gamma2 = disc.collective_gamma(disc.optimal_povm(), second or disc.optimal_povm())
    ref = (1 + 1 / math.sqrt(2)) ** 2 / 64
    dev = float(np.max(np.abs(gamma2 - ref * np.eye(4))))
    four_tr = 4 * float(np.trace(gamma2).real)
    rows = [
        ReportRow("certificate_worst_eigenvalue", cert.worst_eigenvalue, 0.0, cert.passed),
        ReportRow("gamma2_max_deviation", dev, 0.0, dev <= qcore.EQ_TOL),
        ReportRow("four_trace_gamma2", four_tr, disc.MU**2, _within(four_tr, disc.MU**2, qcore.EQ_TOL)),
    ]
    return Report("collective-check", {"corrupt": args.corrupt}, rows)


def cmd_lemma2_demo(args) -> Report:
    rng = qcore.make_rng(args.seed)
    runs = [disc.lemma2_demo(args.n, rng) for _ in range(args.trials)]
    freq = float(np.mean([r.success for r in runs]))
    se = math.sqrt(freq * (1 - freq) / args.trials)
    iterations = np.array([r.iterations for r in runs], dtype=float)
    iters = float(iterations.mean())
    iters_se = float(iterations.std() / math.sqrt(args.trials))
    if args.n == 1:
        ok = abs(freq - disc.MU) <= 4 * se
    else:
        ok = freq <= disc.MU + 4 * se
    rows = [
        ReportRow("conditional_success", freq, disc.MU, ok, args.trials, se),
        ReportRow("mean_iterations", iters, None, math.isfinite(iters), args.trials, iters_se),
    ]
    return Report("lemma2-demo", {"n": args.n, "trials": args.trials, "seed": args.seed}, rows)


def _common(p: argparse.ArgumentParser, trials: int) -> None:
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--output", type=Path, default=None)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--config", type=Path, default=None, help="key = value or JSON file supplying any flag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relbc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-povm", help="certify the optimal guessing POVM")
    _common(p, 0)
    p.add_argument("--perturb", type=float, default=0.0, help="debug: shift theta_1 by this many radians")
    p.set_defaults(func=cmd_verify_povm)

    p = sub.add_parser("security-table", help="mu^N for N = 1..n_max")
    _common(p, 0)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--azuma", action="append", metavar="N:EPS")
    p.set_defaults(func=cmd_security_table)

    p = sub.add_parser("azuma-table", help="Azuma tail bounds, optionally against simulation")
    _common(p, 0)
    p.add_argument("--n-values", type=int, nargs="+", default=[100, 1000])
    p.add_argument("--eps-values", type=float, nargs="+", default=[0.02, 0.05])
    p.set_defaults(func=cmd_azuma_table)

    p = sub.add_parser("honest-run", help="one honest commit/unveil run")
    _common(p, 0)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--bit", type=int, choices=(0, 1), default=0)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--loss", type=float, default=0.0)
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--max-loss", type=float, default=0.0)
    p.set_defaults(func=cmd_honest_run)

    p = sub.add_parser("cheat-run", help="Monte Carlo estimate of a cheating strategy")
    _common(p, 100_000)
    p.add_argument("--strategy", choices=sorted(BUILTIN_STRATEGIES), default="optimal")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=0.0)
    p.set_defaults(func=cmd_cheat_run)

    p = sub.add_parser("loss-check", help="optimal attack with states declared lost")
    _common(p, 100_000)
    p.add_argument("--loss", type=float, default=0.5)
    p.add_argument("--n", type=int, default=20)
    p.set_defaults(func=cmd_loss_check)

    p = sub.add_parser("collective-check", help="two-state product POVM certificate")
    _common(p, 0)
    p.add_argument("--corrupt", action="store_true", help="replace one factor with always-guess-S1")
    p.set_defaults(func=cmd_collective_check)

    p = sub.add_parser("lemma2-demo", help="teleportation reduction, repeated")
    _common(p, 10_000)
    p.add_argument("--n", type=int, default=2)
    p.set_defaults(func=cmd_lemma2_demo)
    return parser


def load_config(path: Path) -> dict:
    """Read a JSON object or ``key = value`` lines (``#`` comments)."""
    text = path.read_text()
    if path.suffix == ".json":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise DomainError("config file must hold a JSON object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            data[key] = json.loads(value)
        except json.JSONDecodeError:
            data[key] = value
    return data


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], args) -> argparse.Namespace:
    values = {k.replace("-", "_"): v for k, v in load_config(args.config).items()}
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(values) - known - {"command", "func"}
    if unknown:
        raise DomainError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    values.pop("config", None)
    if "output" in values:
        values["output"] = Path(values["output"])
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.config is not None:
            args = _apply_config(parser, argv, args)
        if args.trials < 0 or args.seed < 0:
            raise DomainError("--trials and --seed must be non-negative")
        if args.trials < 1 and args.command == "lemma2-demo":
            raise DomainError("--trials must be >= 1")
        report = args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (DomainError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"relbc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = render(report, args.format)
    if args.format == "text" and report.transcript:
        out += report.transcript + "\n"
    if args.output is not None:
        args.output.write_text(out)
    else:
        sys.stdout.write(out)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
