"""Command-line entry point.

Exit codes: 0 success, 2 verification failure, 3 resource cap exceeded,
4 bad flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .algebra import DIM_CAP_ENV, build_realization, dimension_cap
from .classical import SPLIT_MAX_M, eta_max
from .correlations import (
    bipartite_bell_value,
    critical_visibility,
    delta_value,
    sweep_to_csv,
    werner_sweep,
)
from .encoding import build_encoding, table_to_json
from .errors import DomainError, NLocalityError, ResourceError
from .verification import TOLERANCES, gamma_probe, self_test_report

SCHEMA = "v1"
COMMANDS = ("report", "classical-bound", "verify", "bell", "sweep", "encoding")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 2
EXIT_RESOURCE = 3
EXIT_BAD_FLAGS = 4


class FlagError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FlagError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: int
    n: int
    seed: int
    trials: int
    format: str
    out: str | None

    def __post_init__(self):
        if self.m < 2:
            raise FlagError(f"--m must be >= 2, got {self.m}")
        if self.n < 1:
            raise FlagError(f"--n must be >= 1, got {self.n}")
        if self.trials < 0:
            raise FlagError(f"--trials must be >= 0, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise FlagError(f"--seed must be a 64-bit unsigned integer, got {self.seed}")

    def echo(self) -> dict:
        return {
            "command": self.command,
            "m": self.m,
            "n": self.n,
            "seed": self.seed,
            "trials": self.trials,
            "format": self.format,
        }


def _envelope(config: RunConfig, result: dict) -> dict:
    return {
        "schema": SCHEMA,
        "tool": "nlocality",
        "version": __version__,
        "config": config.echo(),
        "tolerances": dict(TOLERANCES),
        "dimension_cap": dimension_cap(),
        "result": result,
    }


def _dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _sign_lines(rows) -> list[str]:
    return ["".join("+" if v > 0 else "-" for v in row) for row in rows]


def _text_header(config: RunConfig) -> list[str]:
    return [
        f"nlocality {__version__} (schema {SCHEMA})",
        "config: " + " ".join(f"{k}={v}" for k, v in config.echo().items()),
        "tolerances: " + " ".join(f"{k}={v!r}" for k, v in TOLERANCES.items()),
    ]


def _inequality_lines(table) -> list[str]:
    lines = [f"correlator signs (row i, column x = 1..{table.num_inputs}):"]
    lines += [f"  I_{i + 1}: {row}" for i, row in enumerate(_sign_lines(table.signs))]
    if table.num_constraints:
        lines.append("input constraints:")
        for s, row in zip(table.constraints, _sign_lines(table.constraint_signs)):
            lines.append(f"  {''.join(map(str, s))}: {row} = 0")
    return lines


def cmd_report(config: RunConfig) -> tuple[str, int]:
    table = build_encoding(config.m)
    real = build_realization(config.n, config.m)
    value = delta_value(real, table)
    report = self_test_report(real, table)
    result = {
        "delta": value.delta,
        "correlators": list(value.correlators),
        "classical_bound": value.classical_bound,
        "quantum_opt": value.quantum_opt,
        "verification": report.to_dict(),
    }
    if config.trials:
        result["gamma_probe_min"] = gamma_probe(real, table, config.trials, rng=config.seed)
    if config.format == "text":
        lines = _text_header(config) + _inequality_lines(table) + [
            f"delta = {value.delta!r}",
            f"classical bound = {value.classical_bound}",
            f"quantum optimum = {value.quantum_opt!r}",
            f"verification passed = {report.passed}",
        ]
        return "\n".join(lines) + "\n", EXIT_OK
    return _dumps(_envelope(config, result)), EXIT_OK


def cmd_classical_bound(config: RunConfig) -> tuple[str, int]:
    if config.m > SPLIT_MAX_M:
        raise ResourceError(
            f"classical enumeration is capped at m={SPLIT_MAX_M}",
            dimension=2 ** (2 ** (config.m - 1)),
            cap=2 ** (2 ** (SPLIT_MAX_M - 1)),
        )
    table = build_encoding(config.m)
    res = eta_max(table)
    result = res.to_dict()
    result["n"] = config.n
    result["classical_bound"] = table.classical_bound
    if config.format == "text":
        lines = _text_header(config) + [
            f"eta_max = {res.eta_max}",
            f"valid strategies = {res.strategy_count}",
            "witness = " + "".join("+" if a > 0 else "-" for a in res.witness.assignment),
        ]
        return "\n".join(lines) + "\n", EXIT_OK
    return _dumps(_envelope(config, result)), EXIT_OK


def cmd_verify(config: RunConfig) -> tuple[str, int]:
    table = build_encoding(config.m)
    real = build_realization(config.n, config.m)
    report = self_test_report(real, table)
    result = report.to_dict()
    passed = report.passed
    if config.trials:
        probe = gamma_probe(real, table, config.trials, rng=config.seed)
        result["gamma_probe_min"] = probe
        probe_ok = probe >= TOLERANCES["gamma_floor"]
        result["checks"]["gamma_probe"] = probe_ok
        passed = passed and probe_ok
        result["passed"] = passed
    code = EXIT_OK if passed else EXIT_VERIFY_FAILED
    if config.format == "text":
        lines = _text_header(config) + [
            f"{name}: {'ok' if ok else 'FAIL'}" for name, ok in sorted(result["checks"].items())
        ] + [f"passed = {passed}"]
        return "\n".join(lines) + "\n", code
    return _dumps(_envelope(config, result)), code


def cmd_bell(config: RunConfig) -> tuple[str, int]:
    table = build_encoding(config.m)
    real = build_realization(config.n, config.m)
    bells = [bipartite_bell_value(real, table, k) for k in range(config.n)]
    delta = delta_value(real, table).delta
    product = float(np.prod(np.array(bells) ** (1.0 / config.n)))
    result = {
        "bell_values": bells,
        "bell_classical_bound": table.classical_bound,
        "delta": delta,
        "product_root": product,
        "correspondence_gap": product - delta,
    }
    if config.format == "text":
        lines = _text_header(config) + [f"B_{k + 1} = {b!r}" for k, b in enumerate(bells)] + [
            f"prod_k B_k^(1/n) = {product!r}",
            f"delta = {delta!r}",
        ]
        return "\n".join(lines) + "\n", EXIT_OK
    return _dumps(_envelope(config, result)), EXIT_OK


def cmd_sweep(config: RunConfig) -> tuple[str, int]:
    table = build_encoding(config.m)
    real = build_realization(config.n, config.m)
    rows = werner_sweep(real, table, 101)
    v_star = critical_visibility(real, table)
    if config.format == "json":
        result = {
            "v_star": v_star,
            "rows": [{"v": v, "delta": d, "bound": b} for v, d, b in rows],
        }
        return _dumps(_envelope(config, result)), EXIT_OK
    if config.format == "text":
        lines = _text_header(config) + [f"v* = {v_star!r}"]
        lines += [f"{v:.2f} {d:.10f} {b}" for v, d, b in rows]
        return "\n".join(lines) + "\n", EXIT_OK
    return sweep_to_csv(rows), EXIT_OK


def cmd_encoding(config: RunConfig) -> tuple[str, int]:
    table = build_encoding(config.m)
    if config.format == "text":
        lines = _text_header(config) + [
            "strings: " + " ".join("".join(map(str, s)) for s in table.strings)
        ] + _inequality_lines(table)
        return "\n".join(lines) + "\n", EXIT_OK
    result = json.loads(table_to_json(table))
    return _dumps(_envelope(config, result)), EXIT_OK


HANDLERS = {
    "report": cmd_report,
    "classical-bound": cmd_classical_bound,
    "verify": cmd_verify,
    "bell": cmd_bell,
    "sweep": cmd_sweep,
    "encoding": cmd_encoding,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--m", type=int, default=3, help="number of central inputs")
    common.add_argument("--n", type=int, default=2, help="number of edge parties")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
    common.add_argument("--trials", type=int, default=0, help="randomized gamma-probe trials")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    parser = _Parser(
        prog="nlocality",
        description="Star-network n-locality inequalities: values, bounds and certificates.",
        epilog=f"Set {DIM_CAP_ENV} to change the per-source local dimension cap.",
    )
    parser.add_argument("--version", action="version", version=f"nlocality {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise FlagError(f"a command is required: {', '.join(COMMANDS)}")
    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    if fmt == "csv" and args.command != "sweep":
        raise FlagError("--format csv is only available for sweep")
    return RunConfig(
        command=args.command,
        m=args.m,
        n=args.n,
        seed=args.seed,
        trials=args.trials,
        format=fmt,
        out=args.out,
    )


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except FlagError as exc:
        print(f"nlocality: error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    try:
        text, code = HANDLERS[config.command](config)
    except ResourceError as exc:
        payload = {"error": "resource", "message": str(exc),
                   "dimension": exc.dimension, "cap": exc.cap}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return EXIT_RESOURCE
    except DomainError as exc:
        print(f"nlocality: error: {exc}", file=sys.stderr)
        return EXIT_BAD_FLAGS
    except NLocalityError as exc:  # pragma: no cover
        print(f"nlocality: error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED

    if config.out:
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
