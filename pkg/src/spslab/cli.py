from __future__ import annotations

import logging
import shlex
import time
from collections.abc import Iterator
from contextlib import contextmanager
from enum import Enum
from importlib.metadata import version
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from spslab.errors import InputError, ResourceError, SpsError

logger = logging.getLogger(__name__)


def _version_callback(value: bool) -> None:
    if value:
        print(version("sps-lab"))
        raise typer.Exit()


app = typer.Typer(help="Exact identity testing and structure of depth-3 circuits.")

stdout = Console()
stderr = Console(stderr=True)


class Method(str, Enum):
    PATH = "path"
    BLACKBOX = "blackbox"
    RANDOM = "random"
    ALL = "all"


class NucleusStage(str, Enum):
    MAT = "mat"
    FULL = "full"


class SGOp(str, Enum):
    CLOSED = "closed"
    OPERATOR = "operator"
    GROWTH = "growth"


class PointFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(name)s: %(message)s",
        handlers=[RichHandler(console=stderr, show_time=False, show_path=False)],
        force=True,
    )


@app.callback()
def main(
    _version: Annotated[
        bool | None,
        typer.Option(
            "--version",
            callback=_version_callback,
            is_eager=True,
            help="Show version and exit.",
        ),
    ] = None,
    verbose: Annotated[
        int,
        typer.Option("--verbose", "-v", count=True, help="-v for progress, -vv for debug."),
    ] = 0,
) -> None:
    """Exact identity testing and structure of depth-3 circuits."""
    _configure_logging(verbose)


@contextmanager
def _reporting() -> Iterator[None]:
    """Map library errors to exit codes."""
    from spslab.errors import PreconditionError
    from spslab.formatting import format_certificate
    from spslab.paths import Certificate

    try:
        yield
    except SpsError as e:
        stderr.print(f"[red]{e.kind}:[/red] {escape(str(e))}")
        if isinstance(e, ResourceError) and e.progress:
            done = ", ".join(f"{k}={v}" for k, v in e.progress.items())
            stderr.print(f"[dim]Progress before stopping: {done}[/dim]")
        if isinstance(e, PreconditionError) and isinstance(e.detail, Certificate):
            stderr.print(format_certificate(e.detail.path.base.field, e.detail))
        raise typer.Exit(e.exit_code)
    except SystemExit as e:
        stderr.print(f"[red]Configuration error:[/red] {escape(str(e))}")
        raise typer.Exit(2)


FileArg = Annotated[
    Path, typer.Argument(exists=True, dir_okay=False, help="Circuit or configuration file.")
]
JsonOpt = Annotated[bool, typer.Option("--json", help="Emit a sps-lab/1 JSON report.")]


@app.command()
def check(
    file: FileArg,
    method: Annotated[Method, typer.Option(help="Identity test to run.")] = Method.PATH,
    seed: Annotated[
        int | None, typer.Option(help="Seed for the randomized test (required for random/all).")
    ] = None,
    trials: Annotated[int, typer.Option(help="Random points to try.")] = 50,
    json_: JsonOpt = False,
) -> None:
    """Decide whether a circuit computes the zero polynomial."""
    from spslab.circuits import homogenize
    from spslab.config import load_config
    from spslab.fileformat import read_circuit
    from spslab.formatting import (
        MethodResult,
        check_json,
        format_certificate,
        format_check_table,
    )
    from spslab.pit import blackbox_test, circuit_oracle, hitting_set, schwartz_zippel_test

    if method in (Method.RANDOM, Method.ALL) and seed is None:
        stderr.print(f"[red]Input error:[/red] --seed is required for --method {method.value}")
        raise typer.Exit(2)

    results: list[MethodResult] = []
    with _reporting():
        limits = load_config()
        c = read_circuit(file)
        if method in (Method.PATH, Method.ALL):
            from spslab.paths import path_identity_test

            start = time.perf_counter()
            res = path_identity_test(c, limits)
            results.append(
                MethodResult(
                    "path",
                    str(res.verdict),
                    res.certificate,
                    seconds=time.perf_counter() - start,
                )
            )
        if method in (Method.BLACKBOX, Method.ALL):
            start = time.perf_counter()
            h = homogenize(c)
            points = hitting_set(h.fanin, h.degree, h.nvars, h.field, limits)
            out = blackbox_test(circuit_oracle(h), points)
            results.append(
                MethodResult(
                    "blackbox",
                    str(out.verdict),
                    point=out.point,
                    trials=out.trials,
                    seconds=time.perf_counter() - start,
                )
            )
        if method in (Method.RANDOM, Method.ALL):
            start = time.perf_counter()
            out = schwartz_zippel_test(c, trials, seed)
            results.append(
                MethodResult(
                    "random",
                    str(out.verdict),
                    point=out.point,
                    trials=out.trials,
                    error_bound=str(out.error_bound),
                    seconds=time.perf_counter() - start,
                )
            )

    agree = len({r.verdict == "NONZERO" for r in results}) <= 1
    if json_:
        print(check_json(c.field, results, agree))
    else:
        stdout.print(format_check_table(c.field, results))
        for r in results:
            if r.certificate is not None:
                stdout.print(format_certificate(c.field, r.certificate))
    if not agree:
        stderr.print("[red]Methods disagree.[/red] This is a bug; please report the input.")
        raise typer.Exit(1)


@app.command()
def nucleus(
    file: FileArg,
    stage: Annotated[NucleusStage, typer.Option(help="Stop at the mat-nucleus or go on.")] = (
        NucleusStage.FULL
    ),
    json_: JsonOpt = False,
) -> None:
    """Build the nucleus of a simple minimal identity and check its rank bounds."""
    from spslab.circuits import homogenize
    from spslab.config import load_config
    from spslab.fileformat import read_circuit
    from spslab.formatting import (
        format_basis,
        format_bounds_table,
        format_nucleus,
        nucleus_json,
    )
    from spslab.nucleus import build_mat_nucleus, build_nucleus, nucleus_identity
    from spslab.structure import (
        require_simple_minimal_identity,
        verify_rank_bounds,
        verify_split_lemma,
    )

    split = None
    with _reporting():
        limits = load_config()
        c = homogenize(read_circuit(file))
        require_simple_minimal_identity(c, limits)
        if stage is NucleusStage.MAT:
            report = build_mat_nucleus(c, limits)
            bounds = verify_rank_bounds(c, None, limits)
        else:
            report = build_nucleus(c, None, limits)
            bounds = verify_rank_bounds(c, report, limits)
            big_field = c.field.size is None or c.field.size > c.degree
            if big_field and bounds.ind_fanin == c.fanin - 1:
                split = verify_split_lemma(c, report, limits=limits, truncate=True)
        nucleus_identity(c, report, limits)

    fs = c.field
    if json_:
        print(nucleus_json(fs, report, report.alphas, bounds, split))
        return
    stdout.print(format_basis(fs, report.k_space.basis))
    stdout.print(format_nucleus(fs, report, report.alphas))
    stdout.print(format_bounds_table(bounds))
    if split is not None:
        state = "vacuous" if split.vacuous else "holds" if split.holds else "VIOLATED"
        stdout.print(f"Split check on SG tuple: {state}")


@app.command()
def sg(
    file: FileArg,
    k: Annotated[int, typer.Option("-k", help="SG_k parameter, k >= 2.")],
    op: Annotated[SGOp, typer.Option(help="What to compute.")] = SGOp.CLOSED,
    json_: JsonOpt = False,
) -> None:
    """Check SG_k-closure, run the SG_k operator, or check growth."""
    from spslab.config import load_config
    from spslab.fileformat import read_sg_config
    from spslab.formatting import format_sg, sg_json
    from spslab.sg import is_sg_closed, sg_growth_check, sg_operator

    result = growth = None
    with _reporting():
        limits = load_config()
        s = read_sg_config(file)
        if op is SGOp.CLOSED:
            result = is_sg_closed(s, k, limits)
        elif op is SGOp.OPERATOR:
            result = sg_operator(s, k, limits)
        else:
            growth = sg_growth_check(s, k, limits)

    if json_:
        print(sg_json(s, k, op.value, result, growth))
    else:
        stdout.print(format_sg(s, k, result, growth))


_GEN_ARITY = {"interp": 1, "skew-lines": 0, "line": 1, "fp": 3, "random": 4}


@app.command()
def gen(
    family: Annotated[str, typer.Argument(help="interp, skew-lines, line, fp or random.")],
    params: Annotated[list[int] | None, typer.Argument(help="Family parameters.")] = None,
    prime: Annotated[
        int | None, typer.Option("--prime", help="Work over F_p instead of Q.")
    ] = None,
    output: Annotated[
        Path | None, typer.Option("--output", "-o", help="Write here instead of stdout.")
    ] = None,
) -> None:
    """Generate an identity family, a random circuit or an SG configuration."""
    from spslab.fields import RATIONAL, FieldSpec
    from spslab.fileformat import format_circuit, format_sg_config
    from spslab.generators import gen_interpolation_identity, gen_random_circuit
    from spslab.sg import gen_fp_config, gen_line_config, gen_skew_lines

    params = params or []
    with _reporting():
        if family not in _GEN_ARITY:
            raise InputError(f"unknown family {family!r}; expected one of {', '.join(_GEN_ARITY)}")
        if len(params) != _GEN_ARITY[family]:
            raise InputError(f"{family} takes {_GEN_ARITY[family]} parameter(s), got {len(params)}")
        fs = RATIONAL if prime is None else FieldSpec.prime(prime)
        match family:
            case "interp":
                text = format_circuit(gen_interpolation_identity(params[0], fs))
            case "random":
                k, d, n, seed = params
                text = format_circuit(gen_random_circuit(k, d, n, seed, fs))
            case "skew-lines":
                text = format_sg_config(gen_skew_lines())
            case "line":
                text = format_sg_config(gen_line_config(params[0], fs))
            case _:
                text = format_sg_config(gen_fp_config(*params))

    if output is None:
        print(text, end="")
    else:
        output.write_text(text)
        stderr.print(f"Wrote {output}")


@app.command(name="hitting-set")
def hitting_set_cmd(
    k: Annotated[int, typer.Argument(help="Fan-in.")],
    d: Annotated[int, typer.Argument(help="Degree.")],
    n: Annotated[int, typer.Argument(help="Number of variables.")],
    prime: Annotated[
        int | None, typer.Option("--prime", help="Work over F_p instead of Q.")
    ] = None,
    fmt: Annotated[PointFormat, typer.Option("--format", help="Point output format.")] = (
        PointFormat.TEXT
    ),
    oracle: Annotated[
        str | None,
        typer.Option(help="Command evaluating the circuit, one point per line on stdin."),
    ] = None,
) -> None:
    """Emit a hitting set for ΣΠΣ(k,d,n), or test a black box against it."""
    from spslab.config import load_config
    from spslab.fields import RATIONAL, FieldSpec
    from spslab.fileformat import format_points
    from spslab.formatting import hitting_set_json
    from spslab.pit import SubprocessOracle, blackbox_test, hitting_set

    with _reporting():
        limits = load_config()
        fs = RATIONAL if prime is None else FieldSpec.prime(prime)
        h = hitting_set(k, d, n, fs, limits)
        outcome = None
        if oracle is not None:
            with SubprocessOracle(shlex.split(oracle), fs) as box:
                outcome = blackbox_test(box, h)

    if outcome is not None:
        stdout.print(f"{outcome.verdict} after {outcome.trials} of {h.size} points")
        if outcome.point is not None:
            stdout.print("Witness: [" + ",".join(str(a) for a in outcome.point) + "]")
        return
    if fmt is PointFormat.JSON:
        print(hitting_set_json(h))
    else:
        print(format_points(h.points, h.header()), end="")


@app.command()
def bench(
    seed: Annotated[int, typer.Option(help="Corpus seed.")],
    count: Annotated[int, typer.Option(help="Random circuits in the corpus.")] = 500,
    blackbox: Annotated[
        bool, typer.Option("--blackbox", help="Also run the hitting-set tester.")
    ] = False,
    json_: JsonOpt = False,
) -> None:
    """Run the corpus through every tester and compare against expansion."""
    from spslab.circuits import homogenize, is_identity
    from spslab.config import load_config
    from spslab.formatting import BenchRow, bench_json, format_bench_table
    from spslab.generators import build_corpus
    from spslab.paths import path_identity_test
    from spslab.pit import blackbox_test, circuit_oracle, hitting_set

    rows: list[BenchRow] = []
    with _reporting():
        limits = load_config()
        for entry in build_corpus(seed, random_count=count):
            start = time.perf_counter()
            c = entry.circuit
            expected = "ZERO" if is_identity(c, limits) else "NONZERO"
            verdicts = {"expand": expected, "path": str(path_identity_test(c, limits).verdict)}
            if blackbox:
                h = homogenize(c)
                try:
                    points = hitting_set(h.fanin, h.degree, h.nvars, h.field, limits)
                except (InputError, ResourceError) as e:
                    logger.info("%s: blackbox skipped: %s", entry.name, e)
                else:
                    verdicts["blackbox"] = str(blackbox_test(circuit_oracle(h), points).verdict)
            rows.append(BenchRow(entry.name, expected, verdicts, time.perf_counter() - start))

    methods = ["expand", "path"] + (["blackbox"] if blackbox else [])
    if json_:
        print(bench_json(rows))
    else:
        stdout.print(format_bench_table(rows, methods))
    bad = [r.name for r in rows if not r.agree]
    if bad:
        stderr.print(f"[red]{len(bad)} disagreement(s):[/red] {', '.join(bad[:10])}")
        raise typer.Exit(1)
