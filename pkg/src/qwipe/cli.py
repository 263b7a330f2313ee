"""Command-line front end: ``qwipe {factors,eta,simulate,compare,convergence}``.

Every command writes CSV whose first line is ``# qwipe <command> key=value ...``
echoing the resolved parameters; those pairs are valid config-file lines.

Exit codes: 0 success, 2 usage error, 3 ``compare`` over tolerance,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Callable

from . import experiments
from .analytic import ModelParams
from .channel import DissipationParams, EvolutionConfig, NumericalFailure, coherence_of
from .linalg import DensityValidationError, min_eigenvalue

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("factors", "eta", "simulate", "compare", "convergence")


class UsageError(ValueError):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(s) for s in items)


def _range(text: str) -> tuple[float, float, int]:
    lo, hi, steps = text.split(":")
    return float(lo), float(hi), int(steps)


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


@dataclass(frozen=True)
class CliConfig:
    command: str
    a: float = 0.5
    b: complex = 0.5
    c: float = 1e3
    tau: float = 1e-3
    p: float = 0.0
    epsilon: float = 0.0
    p_list: tuple[float, ...] = experiments.FIG2_P
    epsilon_list: tuple[float, ...] = experiments.FIG2_EPSILON
    lnx_over_c: tuple[float, float, int] = (0.0, 10.0, 500)
    t_final: float = 1e-2
    t_steps: int = 1000
    dt: float = 1e-5
    dt_list: tuple[float, ...] = (1e-4, 5e-5, 2.5e-5)
    stride: int = 1
    tol: float = 5e-3
    precision: int = 9
    out: str = "-"

    def params(self, p: float | None = None, epsilon: float | None = None) -> ModelParams:
        return ModelParams(
            self.a,
            self.b,
            self.c,
            DissipationParams(self.p if p is None else p, self.tau),
            self.epsilon if epsilon is None else epsilon,
        )

    def evolution(self) -> EvolutionConfig:
        return EvolutionConfig(self.dt, self.t_final, self.stride)

    def header_items(self) -> list[tuple[str, str]]:
        return [(k, _format_value(getattr(self, k))) for k in COMMAND_KEYS[self.command]]

    def validate(self) -> "CliConfig":
        """Raise :class:`UsageError` if any wrapped constructor rejects the values."""
        try:
            if self.precision < 1 or self.precision > 17:
                raise ValueError("precision must be between 1 and 17")
            if self.command == "factors":
                self.sweep_spec()
            elif self.command == "eta":
                self.sweep_spec()
                for p in self.p_list:
                    self.params(p=p)
                for eps in self.epsilon_list:
                    self.params(epsilon=eps)
            elif self.command == "convergence":
                self.params()
                experiments.SweepSpec("convergence", self.params(), dt_list=self.dt_list)
            else:
                self.params()
                self.evolution()
                if self.tol < 0:
                    raise ValueError("tol must be non-negative")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return self

    def sweep_spec(self) -> experiments.SweepSpec:
        if self.command == "factors":
            return experiments.SweepSpec(
                "factors",
                self.params(),
                epsilon_list=self.epsilon_list,
                lnx_over_c_range=self.lnx_over_c,
            )
        return experiments.SweepSpec(
            "eta",
            self.params(),
            epsilon_list=(self.epsilon,),
            p_list=self.p_list,
            time_grid=(self.t_final, self.t_steps),
        )


PARSERS: dict[str, Callable[[str], object]] = {
    "a": float,
    "b": _complex,
    "c": float,
    "tau": float,
    "p": float,
    "epsilon": float,
    "p_list": _float_list,
    "epsilon_list": _float_list,
    "lnx_over_c": _range,
    "t_final": float,
    "t_steps": int,
    "dt": float,
    "dt_list": _float_list,
    "stride": int,
    "tol": float,
    "precision": int,
    "out": str,
}

_MODEL = ("a", "b", "c", "tau")
COMMAND_KEYS: dict[str, tuple[str, ...]] = {
    "factors": ("c", "epsilon_list", "lnx_over_c", "precision"),
    "eta": _MODEL + ("epsilon", "p_list", "t_final", "t_steps", "precision"),
    "simulate": _MODEL + ("p", "epsilon", "dt", "t_final", "stride", "precision"),
    "compare": _MODEL + ("p", "epsilon", "dt", "t_final", "stride", "tol", "precision"),
    "convergence": _MODEL + ("p", "epsilon", "dt_list", "t_final", "precision"),
}


def _format_value(v) -> str:
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else repr(v).replace(" ", "")
    if isinstance(v, tuple) and len(v) == 3 and isinstance(v[2], int):
        return f"{v[0]!r}:{v[1]!r}:{v[2]}"
    if isinstance(v, tuple):
        return ",".join(repr(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def _parse_value(key: str, text: str):
    return PARSERS[key](text.strip())


def read_config_file(path, command: str) -> dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    allowed = set(COMMAND_KEYS[command]) | {"out"}
    values: dict[str, object] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"expected 'key = value' (line {lineno})")
        key, value = (s.strip() for s in line.split("=", 1))
        norm = key.replace("-", "_")
        if norm not in allowed:
            raise UsageError(f"unknown key '{key}' (line {lineno})")
        try:
            values[norm] = _parse_value(norm, value)
        except ValueError:
            raise UsageError(f"malformed value for '{key}': {value!r} (line {lineno})") from None
    return values


def load_config(path, command: str = "eta", overrides: dict | None = None) -> CliConfig:
    """Merge defaults, then the file at ``path`` (if any), then ``overrides``."""
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    values = read_config_file(path, command) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return CliConfig(command, **values).validate()


def _flag_type(key: str):
    parser = PARSERS[key]

    def convert(text: str):
        try:
            return parser(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None

    convert.__name__ = key
    return convert


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwipe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key = value parameter file")
        sp.add_argument("--out", default=None, help="output path; '-' for stdout")
        for key in COMMAND_KEYS[name]:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=_flag_type(key), default=None)
    return parser


def _fmt(x: float, precision: int) -> str:
    return f"{x + 0.0:.{precision - 1}e}"


def _table(header: list[str], rows, precision: int) -> list[str]:
    return [",".join(header)] + [",".join(_fmt(v, precision) for v in row) for row in rows]


def execute(cfg: CliConfig) -> tuple[list[str], int]:
    """Run ``cfg`` and return ``(csv_lines, exit_code)``."""
    lines = [f"# qwipe {cfg.command} " + " ".join(f"{k}={v}" for k, v in cfg.header_items())]
    prec = cfg.precision
    code = EXIT_OK
    if cfg.command == "factors":
        rows = experiments.sweep_factors(cfg.sweep_spec())
        cols = ["epsilon", "lnx_over_c", "re_rp_over_c", "im_rp_over_c", "re_rm_over_c", "im_rm_over_c"]
        lines += _table(cols, rows, prec)
    elif cfg.command == "eta":
        rows = experiments.sweep_eta(cfg.sweep_spec())
        lines += _table(["p", "epsilon", "t", "abs_eta_over_b"], rows, prec)
    elif cfg.command == "simulate":
        rows = []
        for t, rho in experiments.reduced_trajectory(cfg.params(), cfg.evolution()):
            m = rho.matrix
            rows.append(
                (
                    t,
                    coherence_of(m),
                    m[0, 1].real,
                    m[0, 1].imag,
                    abs(m[0, 0] + m[1, 1] - 1.0),
                    min_eigenvalue(m),
                )
            )
        cols = ["t", "abs_coherence", "rho01_re", "rho01_im", "trace_error", "min_eig"]
        lines += _table(cols, rows, prec)
    elif cfg.command == "compare":
        evo = cfg.evolution()
        err = experiments.compare_discrete_analytic(cfg.params(), evo)
        row = (cfg.p, cfg.epsilon, cfg.dt, evo.t_end, err)
        lines += _table(["p", "epsilon", "dt", "t_final", "max_abs_error"], [row], prec)
        code = EXIT_OK if err <= cfg.tol else EXIT_TOLERANCE
    else:
        report = experiments.convergence_order(cfg.params(), cfg.dt_list, cfg.t_final)
        lines += _table(["dt", "max_abs_error"], report.rows, prec)
        if report.exact_regime:
            lines.append("# estimated_order=nan exact_regime=true")
        else:
            lines.append(f"# estimated_order={_fmt(report.estimated_order, prec)} exact_regime=false")
    return lines, code


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = build_parser().parse_args(argv)
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
        cfg = load_config(ns.config, ns.command, flags)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        lines, code = execute(cfg)
    except (NumericalFailure, DensityValidationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = "\n".join(lines) + "\n"
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return code


def main() -> None:
    sys.exit(run())
