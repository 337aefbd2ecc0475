"""Command-line entry point for quadperiod.

Usage: python -m src.quadperiod <command> [options]
"""
import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .cfrac import minus_cf, plus_cf, slow_plus, slow_simple
from .config import (
    DEFAULT_LIST_DEPTH,
    DEFAULT_LIST_ROWS,
    DEFAULT_DEPTH_CAP,
    DEFAULT_SEED,
    DEFAULT_TOLERANCE,
    DISPLAY_DIGITS,
    LOG_FORMAT,
    LOG_LEVEL,
    LOG_PATH,
    PREC_CAP_BITS,
    PREC_START_BITS,
    validate_config,
)
from .db_manager import DatabaseManager
from .modsums import (
    AuditFailureError,
    DepthExceededError,
    Representation,
    SumRequest,
    a_star_sum,
    a_sum_stream,
    forms_in_bracket,
    orbit_lists,
)
from .output_writer import FORMATS, OutputRecord, package_versions, write
from .periods import (
    cocycle_check,
    default_samples,
    even_odd_split,
    l_value,
    period_polynomial,
    reduce_mod_generator,
    simple_a_sum,
    transformation_law_audit,
)
from .qforms import FormKind, Group, QForm, class_decomposition, class_numbers, enumerate_forms, reduce_to_class, root_data
from .realscalar import InsufficientPrecisionError, Rational, Real, parse_real
from .verify_suites import SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_AUDIT_FAILED = 2
EXIT_PRECISION_EXHAUSTED = 3

STREAMS = ("plus", "minus", "slow_plus", "slow_simple")
DEFAULT_CF_STEPS = 20


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Send diagnostics to the log file and stderr; stdout is reserved for the payload."""
    LOG_PATH.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(LOG_PATH),
            logging.StreamHandler(sys.stderr)
        ],
        force=True
    )


class QuadPeriodArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors by raising instead of exiting with status 2."""

    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def parse_form(text: str) -> QForm:
    """Parse "[a,b,c]" or "a,b,c" into a QForm.

    Raises:
        ValueError: If the text is not three integers.
    """
    parts = text.strip().strip("[]").split(",")
    try:
        a, b, c = (int(part) for part in parts)
    except ValueError:
        raise ValueError(f"expected a form [a,b,c], got {text!r}")
    return QForm(a, b, c)


def _compact(value: Any) -> str:
    return json.dumps(value, separators=(",", ":"))


def _short(value: Real) -> str:
    lo, hi = value.bounds()
    if value.sign() != 0 and max(abs(lo), abs(hi)) < Fraction(1, 10 ** DISPLAY_DIGITS):
        return value.to_scientific(3)
    return value.to_decimal(DISPLAY_DIGITS)


def _places(bound: Fraction) -> int:
    """Largest number of decimals p with bound < 10^-p / 2, between 1 and 30."""
    if bound == 0:
        return 12
    places = 0
    while places < 30 and bound < Fraction(1, 2 * 10 ** (places + 1)):
        places += 1
    return max(places, 1)


def build_parser() -> QuadPeriodArgumentParser:
    common = QuadPeriodArgumentParser(add_help=False)
    common.add_argument("--record", action="store_true", help="record this run in the history database")
    common.add_argument("--log-level", default=LOG_LEVEL, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--prec", type=_positive_int, default=PREC_START_BITS, help="starting precision in bits")
    common.add_argument("--prec-cap", type=_positive_int, default=PREC_CAP_BITS, help="precision cap in bits")
    common.add_argument("--tol", type=_fraction, default=DEFAULT_TOLERANCE, help="truncation tolerance")
    common.add_argument("--depth", type=_positive_int, default=None,
                        help="depth cap for sums, number of steps for lists")
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for sampled audits")
    common.add_argument("--Dmax", type=_positive_int, default=None, help="discriminant range for verify")

    parser = QuadPeriodArgumentParser(prog="quadperiod", description="Exact sums of quadratic forms and period polynomials")
    commands = parser.add_subparsers(dest="command", metavar="command", parser_class=QuadPeriodArgumentParser)
    commands.required = True

    cf = commands.add_parser("cf", parents=[common], help="continued-fraction streams of x")
    cf.add_argument("--x", required=True)
    cf.add_argument("--stream", choices=STREAMS, default="plus")
    cf.add_argument("--steps", type=_positive_int, default=DEFAULT_CF_STEPS)
    cf.add_argument("--ceil-plus-one", action="store_true", help="negative stream with the ceil(x)+1 digit rule")

    forms = commands.add_parser("forms", parents=[common], help="simple, reduced or bracket forms of D")
    forms.add_argument("--D", type=int, required=True)
    forms.add_argument("--kind", choices=["simple", "reduced", "bracket"], default="simple")
    forms.add_argument("--x", help="rational point for --kind bracket")

    classes = commands.add_parser("classes", parents=[common], help="class decomposition of D")
    classes.add_argument("--D", type=int, required=True)
    classes.add_argument("--group", choices=[g.value.lower() for g in Group], default="gamma1")

    for name, help_text in (("sum", "evaluate A_{k,D}(x) or A_{k,A}(x)"),
                            ("periods", "period polynomial, cocycle relations and L-values")):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("--D", type=int)
        sub.add_argument("--class-rep", help="a form [a,b,c] naming the class to sum over")
        sub.add_argument("--k", type=int, default=2)
        sub.add_argument("--group", choices=[g.value.lower() for g in Group], default="gamma")
        if name == "sum":
            sub.add_argument("--x", required=True)
            sub.add_argument("--representation", choices=[r.value for r in Representation], default=None)
            sub.add_argument("--star", action="store_true", help="A*_{k,B} for a Gamma1-class, with and without conditions")
            sub.add_argument("--ledger", action="store_true", help="emit one row per visited pair")
            sub.add_argument("--strict", action="store_true", help="fail when the depth cap is reached")
        else:
            sub.add_argument("--audit", action="store_true", help="check the transformation laws of P^Gamma")

    lists = commands.add_parser("lists", parents=[common], help="orbit lists of the simple forms along Gamma(x)")
    lists.add_argument("--D", type=int, required=True)
    lists.add_argument("--x", required=True)
    lists.add_argument("--k", type=int, default=2)
    lists.add_argument("--rows", type=int, default=DEFAULT_LIST_ROWS,
                       help="keep extending each list until it has this many included rows")

    verify = commands.add_parser("verify", parents=[common], help="run acceptance suites")
    verify.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")

    history = commands.add_parser("history", parents=[common], help="show recorded runs")
    history.add_argument("--limit", type=_positive_int, default=10)
    history.add_argument("--stats", action="store_true")
    return parser


def _group(name: str) -> Group:
    return Group.GAMMA if name == "gamma" else Group.GAMMA1


class QuadPeriodRunner:
    """Runs one parsed command with the precision-doubling retry policy."""

    def __init__(self, args: argparse.Namespace, db_manager: Optional[DatabaseManager] = None):
        if args.prec > args.prec_cap:
            raise UsageError(f"--prec {args.prec} exceeds --prec-cap {args.prec_cap}")
        self.args = args
        self.db_manager = db_manager
        self.retries = 0
        self.precision = args.prec
        self.audit_failed = False

    def config_echo(self) -> Dict[str, Any]:
        echo = {}
        for key, value in sorted(vars(self.args).items()):
            echo[key] = str(value) if isinstance(value, Fraction) else value
        return echo

    def run(self) -> OutputRecord:
        """Execute the command, doubling precision on InsufficientPrecisionError up to the cap.

        Raises:
            PrecisionExhaustedError: When the cap is reached without a certified answer.
        """
        handler = getattr(self, f"cmd_{self.args.command}")
        started = time.perf_counter()
        while True:
            try:
                payload, rows = handler(self.precision)
                break
            except InsufficientPrecisionError as e:
                if self.precision * 2 > self.args.prec_cap:
                    raise PrecisionExhaustedError(
                        f"precision cap {self.args.prec_cap} bits reached: {e}"
                    ) from e
                self.precision *= 2
                self.retries += 1
                logger.warning(f"Insufficient precision ({e}); retrying at {self.precision} bits")

        metadata = {
            "command": self.args.command,
            "config": self.config_echo(),
            "versions": package_versions(),
            "precision_bits": self.precision,
            "retries": self.retries,
            "wall_time_s": round(time.perf_counter() - started, 6),
        }
        return OutputRecord(self.args.command, payload, rows, metadata)

    def _scope(self) -> Tuple[Optional[int], Optional[Any]]:
        args = self.args
        if (args.D is None) == (args.class_rep is None):
            raise UsageError("give exactly one of --D and --class-rep")
        if args.class_rep is None:
            return args.D, None
        form_class, _ = reduce_to_class(parse_form(args.class_rep), _group(args.group))
        return None, form_class

    def cmd_cf(self, prec: int):
        args = self.args
        x = parse_real(args.x, prec)
        rows: List[Dict[str, Any]] = []
        if args.stream in ("plus", "minus"):
            if args.stream == "plus":
                steps = plus_cf(x, args.steps)
            else:
                steps = minus_cf(x, args.steps, ceil_plus_one=args.ceil_plus_one)
            for step in steps:
                rows.append({
                    "i": step.index,
                    "digit": step.digit,
                    "state": None if step.state is None else step.state.to_decimal(12),
                    "gamma": _compact(step.gamma.to_list()),
                    "convergent": _compact(list(step.convergent)),
                    "delta": step.delta.to_scientific(8),
                })
            payload = {"x": x.to_json(), "stream": args.stream, "steps": rows,
                       "digits": [row["digit"] for row in rows if row["digit"] is not None]}
            return payload, rows

        expand = slow_plus if args.stream == "slow_plus" else slow_simple
        expansion = expand(x, args.steps)
        for step in expansion.steps:
            rows.append({
                "i": step.index,
                "branch": step.branch.value,
                "state": step.state.to_decimal(12),
                "matrix": _compact(step.matrix.to_list()),
            })
        payload = {
            "x": x.to_json(),
            "stream": args.stream,
            "steps": rows,
            "cycle_start": expansion.cycle_start,
            "cycle_length": expansion.cycle_length,
            "purely_periodic": expansion.purely_periodic,
            "terminated": expansion.terminated,
        }
        return payload, rows

    def cmd_forms(self, prec: int):
        args = self.args
        if args.kind == "bracket":
            if args.x is None:
                raise UsageError("--kind bracket needs --x")
            forms = forms_in_bracket(args.D, parse_real(args.x, prec))
        else:
            forms = enumerate_forms(args.D, FormKind(args.kind))
        rows = []
        for Q in forms:
            roots = root_data(Q)
            rows.append({
                "form": _compact(Q.to_list()),
                "w": roots.w.to_decimal(DISPLAY_DIGITS),
                "w_prime": roots.w_prime.to_decimal(DISPLAY_DIGITS),
                "primitive": Q.is_primitive,
            })
        payload = {"D": args.D, "kind": args.kind, "count": len(forms), "forms": [Q.to_list() for Q in forms]}
        return payload, rows

    def cmd_classes(self, prec: int):
        args = self.args
        group = _group(args.group)
        classes = class_decomposition(args.D, group)
        gamma1_count, gamma_count = class_numbers(args.D)
        rows = []
        for index, form_class in enumerate(classes):
            rows.append({
                "class": index,
                "representative": _compact(form_class.representative.to_list()),
                "simple_forms": len(form_class.simple_forms),
                "reduced_forms": len(form_class.reduced_forms),
                "simple_cycles": _compact([[f.to_list() for f in c] for c in form_class.simple_cycles]),
            })
        payload = {
            "D": args.D,
            "group": group.value,
            "class_numbers": {"Gamma1": gamma1_count, "Gamma": gamma_count},
            "classes": [form_class.to_json() for form_class in classes],
        }
        return payload, rows

    def cmd_sum(self, prec: int):
        args = self.args
        D, form_class = self._scope()
        x = parse_real(args.x, prec)
        depth = args.depth or DEFAULT_DEPTH_CAP

        if args.star:
            if form_class is None or form_class.group is not Group.GAMMA1:
                raise UsageError("--star needs --class-rep with --group gamma1")
            star = a_star_sum(form_class, args.k, x, args.tol, depth)
            payload = {
                "conditioned": star.conditioned.to_json(_places(star.conditioned.truncation_bound)),
                "unconditioned": star.unconditioned.to_json(_places(star.unconditioned.truncation_bound)),
                "difference": star.difference.to_decimal(DISPLAY_DIGITS),
            }
            rows = [{"sum": name, **{key: value for key, value in payload[name].items() if key != "value_json"}}
                    for name in ("conditioned", "unconditioned")]
            return payload, rows

        representation = args.representation
        if representation is None:
            gamma1_scope = _group(args.group) is Group.GAMMA1
            representation = Representation.GAMMA1_CONDITIONED if gamma1_scope else Representation.SIMPLE_CONDITIONED
        request = SumRequest(x=x, k=args.k, D=D, form_class=form_class, representation=representation,
                             tolerance=args.tol, depth_cap=depth, strict=args.strict)
        result = a_sum_stream(request)
        payload = result.to_json(_places(result.truncation_bound), with_ledger=args.ledger)
        payload.update({"D": request.discriminant, "k": args.k, "x": x.to_json()})
        rows = [row.to_json(DISPLAY_DIGITS) for row in result.ledger] if args.ledger else []
        for row in rows:
            row["matrix"] = _compact(row["matrix"])
            row["form"] = _compact(row["form"])
            row["image"] = _compact(row["image"])
        return payload, rows

    def cmd_lists(self, prec: int):
        args = self.args
        x = parse_real(args.x, prec)
        lists = orbit_lists(args.D, x, depth=args.depth or DEFAULT_LIST_DEPTH, k=args.k,
                            min_included=args.rows)
        rows = []
        for zlist in lists:
            for row in zlist.rows:
                rows.append({
                    "form": _compact(row.image.to_list()),
                    "value": _short(row.term),
                    "included": row.included,
                    "list": _compact(zlist.simple_form.to_list()),
                    "i": row.index,
                    "matrix": _compact(row.matrix.to_list()),
                })
        payload = {
            "D": args.D,
            "x": x.to_json(),
            "lists": [zlist.to_json(DISPLAY_DIGITS) for zlist in lists],
            "total": sum((zlist.included_sum for zlist in lists), Rational(0)).to_decimal(DISPLAY_DIGITS),
        }
        return payload, rows

    def cmd_periods(self, prec: int):
        args = self.args
        D, form_class = self._scope()
        period = period_polynomial(args.k, D=D, form_class=form_class)
        cocycle = cocycle_check(period.poly, period.degree_bound)
        even, odd = even_odd_split(period.poly)
        payload = period.to_json()
        payload.update({
            "is_even": period.is_even,
            "cocycle": cocycle.to_json(),
            "even_part": even.to_json(),
            "odd_part": odd.to_json(),
            "modulo_generator": reduce_mod_generator(period.poly, args.k).to_json(),
        })
        if D is not None:
            payload["l_value"] = str(l_value(D, 1 - args.k).value)
            payload["simple_a_sum"] = simple_a_sum(D)
        if args.audit:
            report = transformation_law_audit(period.poly, default_samples(prec), period.degree_bound,
                                    args.tol, args.depth or DEFAULT_DEPTH_CAP)
            payload["transformation_laws"] = report.to_json()
            self.audit_failed = not report.passed
        rows = [{"degree": degree, "coefficient": str(c)} for degree, c in enumerate(period.poly.coeffs)]
        return payload, rows

    def cmd_verify(self, prec: int):
        args = self.args
        reports = run_suite(args.suite, d_max=args.Dmax, seed=args.seed, tolerance=args.tol)
        self.audit_failed = not all(report.passed for report in reports)
        rows = [{"suite": r.name, "passed": r.passed, "checked": r.checked,
                 "counterexample": None if r.counterexample is None else _compact(r.counterexample)}
                for r in reports]
        payload = {"passed": not self.audit_failed, "suites": [r.to_json() for r in reports]}
        return payload, rows

    def cmd_history(self, prec: int):
        manager = self.db_manager or DatabaseManager()
        if self.args.stats:
            stats = manager.get_run_stats()
            return stats, [stats]
        runs = manager.get_run_history(self.args.limit)
        return {"runs": runs}, runs


def _summary(record: OutputRecord) -> str:
    payload = record.payload
    for key in ("value", "passed", "count", "total"):
        if key in payload:
            return f"{key}={payload[key]}"
    return record.command


def run(argv: Optional[Sequence[str]] = None, db_manager: Optional[DatabaseManager] = None) -> int:
    """Parse ``argv``, run the command and write its output; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"quadperiod: error: {e}\n")
        return EXIT_USAGE

    configure_logging(args.log_level)
    run_id = None
    recorder = None
    try:
        validate_config()
        if args.record:
            recorder = db_manager or DatabaseManager()
            run_id = recorder.add_run(args.command, {k: str(v) for k, v in vars(args).items()})

        runner = QuadPeriodRunner(args, db_manager)
        record = runner.run()
        write(record, args.format)
        status = EXIT_AUDIT_FAILED if runner.audit_failed else EXIT_OK
        if recorder:
            recorder.update_run_status(run_id, "success" if status == EXIT_OK else "failed",
                                       None if status == EXIT_OK else "audit failed", _summary(record))
        return status

    except (PrecisionExhaustedError, DepthExceededError) as e:
        status, message = EXIT_PRECISION_EXHAUSTED, str(e)
    except AuditFailureError as e:
        status, message = EXIT_AUDIT_FAILED, str(e)
    except (UsageError, ValueError, ZeroDivisionError) as e:
        status, message = EXIT_USAGE, str(e)
    except Exception as e:
        logger.exception("Unexpected failure")
        status, message = EXIT_USAGE, f"{type(e).__name__}: {e}"

    logger.error(f"{args.command} failed: {message}")
    sys.stderr.write(f"quadperiod: error: {message}\n")
    if recorder and run_id is not None:
        recorder.update_run_status(run_id, "failed", message)
    return status


def main():
    """Main entry point for the quadperiod command."""
    sys.exit(run())


class UsageError(Exception):
    """Raised for invalid command-line usage."""
    pass


class PrecisionExhaustedError(ArithmeticError):
    """Raised when the precision cap is reached before a computation is certified."""
    pass


if __name__ == "__main__":
    main()
