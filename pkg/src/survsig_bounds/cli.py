"""Command-line front end.

Subcommands::

    survsig-bounds signature --system bridge.sys --out sig.csv
    survsig-bounds infer --system bridge.sys --priors priors.csv --data data.csv \\
        --t-start 0 --t-stop 5 --t-step 0.02 --out bounds.csv --diag-out diag.csv
    survsig-bounds lint --system bridge.sys --priors priors.csv --data data.csv --times 0,1,2

Exit status is 0 on success, 1 on bad input or unreadable files and 2 when a
computation breaks down numerically. Output files are written atomically, so
a failed run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .beta_binomial import DEFAULT_EPSILON
from .errors import InputError, NumericError
from .prior_sets import (
    PRIOR_PARAMS,
    PriorSpec,
    TestData,
    build_prior_spec,
    expand_grid,
    lint_prior,
    parse_prior_csv,
    parse_test_data_csv,
    validate_grid,
)
from .structure_graph import (
    DEFAULT_MAX_COMPONENTS,
    SurvivalSignature,
    compute_survival_signature,
    parse_system,
    signature_from_csv,
    signature_to_csv,
)
from .system_bounds import SearchConfig, bounds_to_csv, compute_bounds, diagnostics_to_csv

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2

#: Homogeneous prior used when neither a prior file nor shorthand flags are given.
DEFAULT_PRIOR = {"n_lower": 2.0, "n_upper": 2.0, "y_lower": 0.5, "y_upper": 0.5}


@dataclass
class RunConfig:
    subcommand: str
    system: Path | None = None
    signature: Path | None = None
    priors: Path | None = None
    data: Path | None = None
    times: tuple[float, ...] = ()
    shorthand: dict[str, float] = field(default_factory=dict)
    prior_only: bool = False
    out: Path | None = None
    diag_out: Path | None = None
    grid_resolution: int = 101
    epsilon: float = DEFAULT_EPSILON
    workers: int = 1
    max_components: int = DEFAULT_MAX_COMPONENTS


def _parse_times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise InputError(f"--times: bad number list {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is kept for numeric failures
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="survsig-bounds",
        description="Survival signatures and imprecise Bayesian system reliability bounds.",
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    def system_args(sp: argparse.ArgumentParser, allow_signature: bool) -> None:
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--system", type=Path, help="system graph file")
        if allow_signature:
            g.add_argument("--signature", type=Path, help="precomputed signature CSV instead of a graph")
        sp.add_argument("--max-components", type=int, default=DEFAULT_MAX_COMPONENTS)

    def prior_args(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--priors", type=Path, help="prior CSV (type,t,n_lower,n_upper,y_lower,y_upper)")
        sp.add_argument("--data", type=Path, help="test data CSV (type,failure_time)")
        sp.add_argument("--times", type=str, help="comma-separated time grid")
        sp.add_argument("--t-start", type=str)
        sp.add_argument("--t-stop", type=str)
        sp.add_argument("--t-step", type=str)
        for name in PRIOR_PARAMS:
            sp.add_argument("--" + name.replace("_", "-"), dest=name, type=float, help="same value for every type and time")
        sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)

    sp = sub.add_parser("signature", help="compute a survival signature")
    system_args(sp, allow_signature=False)
    sp.add_argument("--out", type=Path, help="signature CSV (default: stdout)")

    sp = sub.add_parser("infer", help="lower and upper system reliability curves")
    system_args(sp, allow_signature=True)
    prior_args(sp)
    sp.add_argument("--prior-only", action="store_true", help="ignore the data in the bounds")
    sp.add_argument("--out", type=Path, help="bounds CSV (default: stdout)")
    sp.add_argument("--diag-out", type=Path, help="per-type diagnostics CSV")
    sp.add_argument("--grid-resolution", type=int, default=101, help="search points per undecided prior strength")
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("lint", help="check a prior specification against the data")
    system_args(sp, allow_signature=True)
    prior_args(sp)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(ns.subcommand, system=ns.system, signature=getattr(ns, "signature", None))
    cfg.max_components = ns.max_components
    cfg.out = getattr(ns, "out", None)
    if ns.subcommand == "signature":
        return cfg
    cfg.priors, cfg.data, cfg.epsilon = ns.priors, ns.data, ns.epsilon
    cfg.shorthand = {p: getattr(ns, p) for p in PRIOR_PARAMS if getattr(ns, p) is not None}
    step_args = (ns.t_start, ns.t_stop, ns.t_step)
    if ns.times is not None and any(a is not None for a in step_args):
        raise InputError("give either --times or --t-start/--t-stop/--t-step, not both")
    if ns.times is not None:
        cfg.times = _parse_times(ns.times)
    elif all(a is not None for a in step_args):
        cfg.times = expand_grid(*step_args)
    else:
        raise InputError("a time grid is required: --times or all of --t-start, --t-stop, --t-step")
    cfg.times = validate_grid(cfg.times)
    if ns.subcommand == "infer":
        cfg.prior_only = ns.prior_only
        cfg.diag_out = ns.diag_out
        cfg.grid_resolution = ns.grid_resolution
        cfg.workers = ns.workers
        if cfg.grid_resolution < 2:
            raise InputError("--grid-resolution must be at least 2")
        if cfg.workers < 1:
            raise InputError("--workers must be at least 1")
    return cfg


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def write_outputs(outputs: dict[Path, str]) -> None:
    """Write every file or none: stage to temporaries, then rename."""
    staged: list[tuple[str, Path]] = []
    try:
        for path, text in outputs.items():
            directory = path.parent if str(path.parent) else Path(".")
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        for tmp, path in staged:
            os.replace(tmp, path)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def load_signature(cfg: RunConfig) -> SurvivalSignature:
    if cfg.signature is not None:
        return signature_from_csv(_read(cfg.signature), str(cfg.signature))
    graph = parse_system(_read(cfg.system), str(cfg.system))
    return compute_survival_signature(graph, cfg.max_components)


def load_prior(cfg: RunConfig, labels: Sequence[str]) -> PriorSpec:
    """Prior spec from the CSV and/or shorthand flags.

    A shorthand flag acts as a ``type=*, t=*`` row, so it may not set a
    parameter the CSV also sets.
    """
    if cfg.priors is None:
        values = {**DEFAULT_PRIOR, **cfg.shorthand}
        return build_prior_spec([], labels, cfg.times, cfg.epsilon, values, "<shorthand>")
    source = str(cfg.priors)
    rows = parse_prior_csv(_read(cfg.priors), source)
    for r in rows:
        clash = sorted(set(r.values) & set(cfg.shorthand))
        if clash:
            raise InputError(f"{', '.join(clash)} given both in the prior file and on the command line", source, r.line)
    return build_prior_spec(rows, labels, cfg.times, cfg.epsilon, cfg.shorthand, source)


def load_data(cfg: RunConfig) -> TestData:
    if cfg.data is None:
        return TestData({})
    return parse_test_data_csv(_read(cfg.data), str(cfg.data))


def _fmt_ranges(ranges: list[tuple[float, float]]) -> str:
    if not ranges:
        return "none"
    return " ".join(f"[{a:g}, {b:g}]" for a, b in ranges)


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one subcommand. Errors propagate to :func:`main`."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    sig = load_signature(cfg)

    if cfg.subcommand == "signature":
        text = signature_to_csv(sig)
        if cfg.out is None:
            stdout.write(text)
        else:
            write_outputs({cfg.out: text})
        return EXIT_OK

    spec = load_prior(cfg, sig.type_labels)
    data = load_data(cfg)

    if cfg.subcommand == "lint":
        warnings = lint_prior(spec, data)
        for w in warnings:
            print(f"warning: {w}", file=stdout)
        if not warnings:
            print("no warnings", file=stdout)
        return EXIT_OK

    search = SearchConfig(points_few=cfg.grid_resolution, points_many=min(21, cfg.grid_resolution))
    result = compute_bounds(sig, spec, data, posterior=not cfg.prior_only, search=search, workers=cfg.workers)
    bounds = bounds_to_csv(result)
    outputs = {}
    if cfg.out is not None:
        outputs[cfg.out] = bounds
    if cfg.diag_out is not None:
        outputs[cfg.diag_out] = diagnostics_to_csv(result)
    write_outputs(outputs)
    if cfg.out is None:
        stdout.write(bounds)
    for lab in sig.type_labels:
        if data.n(lab) == 0:
            print(f"{lab}: untested", file=stderr)
        else:
            print(f"{lab}: conflict at {_fmt_ranges(result.conflicts.ranges(lab))}", file=stderr)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return run(config_from_args(ns))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
