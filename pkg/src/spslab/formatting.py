from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from importlib.resources import files
from typing import Any

from rich.table import Table
from rich.text import Text

from spslab.circuits import MultTerm
from spslab.fields import FieldSpec, Scalar
from spslab.linalg import FormVec
from spslab.nucleus import Matching, NucleusReport
from spslab.paths import Certificate
from spslab.pit import HittingSet
from spslab.sg import GrowthReport, OperatorResult, SGConfig
from spslab.structure import RankBoundReport, SplitLemmaResult

SCHEMA = "sps-lab/1"


@dataclass(frozen=True)
class MethodResult:
    method: str
    verdict: str
    certificate: Certificate | None = None
    point: tuple[object, ...] | None = None
    trials: int | None = None
    error_bound: str | None = None
    seconds: float = 0.0


@dataclass(frozen=True)
class BenchRow:
    name: str
    expected: str
    verdicts: dict[str, str] = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def agree(self) -> bool:
        """Every method lands on the same side of zero."""
        return len({v != "NONZERO" for v in self.verdicts.values()}) <= 1


def load_schema() -> dict[str, Any]:
    return json.loads(files("spslab").joinpath("schema/sps-lab-1.json").read_text())


def dumps(kind: str, body: dict[str, Any]) -> str:
    return json.dumps({"schema": SCHEMA, "kind": kind, **body}, ensure_ascii=False)


# values


def form_json(fs: FieldSpec, f: FormVec) -> list[str]:
    return [fs.format(a) for a in f]


def form_text(fs: FieldSpec, f: FormVec) -> str:
    return "[" + ",".join(fs.format(a) for a in f) + "]"


def term_json(fs: FieldSpec, t: MultTerm) -> dict[str, Any]:
    """Forms with multiplicities, in first-occurrence order."""
    counts: dict[FormVec, int] = {}
    for f in t.forms:
        counts[f] = counts.get(f, 0) + 1
    return {
        "coeff": fs.format(t.coeff),
        "forms": [{"form": form_json(fs, f), "mult": e} for f, e in counts.items()],
    }


def term_text(fs: FieldSpec, t: MultTerm) -> str:
    body = " ".join(form_text(fs, f) for f in t.forms)
    return f"{fs.format(t.coeff)}" + (f" * {body}" if body else "")


def certificate_json(fs: FieldSpec, cert: Certificate) -> dict[str, Any]:
    return {
        "prefix": cert.i,
        "survivor": cert.survivor + 1,
        "alpha": fs.format(cert.alpha),
        "path": [
            {"term": j + 1, "node": term_json(fs, node)}
            for node, j in zip(cert.path.nodes, cert.path.sources, strict=True)
        ],
    }


def _matching_json(fs: FieldSpec, m: Matching) -> dict[str, Any]:
    return {
        "pairs": [[i + 1, j + 1] for i, j in m.pairs],
        "scales": [fs.format(a) for a in m.scales],
    }


# reports


def check_json(fs: FieldSpec, results: Sequence[MethodResult], agree: bool) -> str:
    methods = []
    for r in results:
        entry: dict[str, Any] = {"method": r.method, "verdict": r.verdict}
        if r.certificate is not None:
            entry["certificate"] = certificate_json(fs, r.certificate)
        if r.point is not None:
            entry["point"] = [str(a) for a in r.point]
        if r.trials is not None:
            entry["trials"] = r.trials
        if r.error_bound is not None:
            entry["error_bound"] = r.error_bound
        methods.append(entry)
    return dumps("check", {"field": str(fs), "methods": methods, "agree": agree})


def nucleus_json(
    fs: FieldSpec,
    report: NucleusReport,
    coefficients: Sequence[Scalar],
    bounds: RankBoundReport | None = None,
    split: SplitLemmaResult | None = None,
) -> str:
    body: dict[str, Any] = {
        "field": str(fs),
        "stage": str(report.stage),
        "rank": report.rank,
        "basis": [form_json(fs, b) for b in report.k_space.basis],
        "rounds": report.rounds,
        "indep": [i + 1 for i in report.indep],
        "matchings": [
            {
                "term": i + 1,
                "inside": _matching_json(fs, m.inside),
                "outside": _matching_json(fs, m.outside),
            }
            for i, m in enumerate(report.matchings)
        ],
        "k_terms": [term_json(fs, t) for t in report.k_terms],
        "alphas": [fs.format(a) for a in coefficients],
    }
    if bounds is not None:
        body["bounds"] = bounds_json(bounds)
    if split is not None:
        body["split_lemma"] = split_lemma_json(fs, split)
    return dumps("nucleus", body)


def bounds_json(report: RankBoundReport) -> dict[str, Any]:
    return {
        "rank": report.rank,
        "ind_fanin": report.ind_fanin,
        "nucleus_rank": report.nucleus_rank,
        "non_nucleus_rank": report.non_nucleus_rank,
        "passed": report.passed,
        "checks": [
            {
                "name": ch.name,
                "measured": ch.measured,
                "relation": ch.relation,
                "bound": ch.bound,
                "passed": ch.passed,
                "note": ch.note,
            }
            for ch in report.checks
        ],
    }


def sg_json(
    s: SGConfig,
    k: int,
    op: str,
    result: OperatorResult | None = None,
    growth: GrowthReport | None = None,
) -> str:
    fs = s.field
    body: dict[str, Any] = {
        "field": str(fs),
        "k": k,
        "op": op,
        "size": s.size,
        "rank": s.rank,
    }
    if result is not None:
        body["closed"] = result.closed
        body["examined"] = result.examined
        body["witness"] = (
            None if result.witness is None else [form_json(fs, v) for v in result.witness]
        )
    if growth is not None:
        body.update(
            threshold=growth.threshold,
            bound=growth.bound,
            regime=growth.regime,
            satisfied=growth.satisfied,
        )
    return dumps("sg", body)


def hitting_set_json(h: HittingSet) -> str:
    return dumps(
        "hitting-set",
        {
            "field": str(h.field),
            "k": h.k,
            "d": h.d,
            "n": h.n,
            "rank_bound": h.rank_bound,
            "method": h.method,
            "alphas": list(h.alphas),
            "bit_bound": h.bit_bound,
            "points": [list(p) for p in h.points],
        },
    )


def bench_json(rows: Sequence[BenchRow]) -> str:
    return dumps(
        "bench",
        {
            "count": len(rows),
            "disagreements": sum(1 for r in rows if not r.agree),
            "rows": [
                {
                    "name": r.name,
                    "expected": r.expected,
                    "verdicts": r.verdicts,
                    "agree": r.agree,
                    "seconds": round(r.seconds, 6),
                }
                for r in rows
            ],
        },
    )


def split_lemma_json(fs: FieldSpec, result: SplitLemmaResult) -> dict[str, Any]:
    check = result.check
    return {
        "holds": result.holds,
        "vacuous": result.vacuous,
        "witness": [form_json(fs, v) for v in result.witness],
        "examined": check.examined if check else 0,
        "truncated": check.truncated if check else False,
    }


# rich


def format_check_table(fs: FieldSpec, results: Sequence[MethodResult]) -> Table:
    table = Table(show_header=True, header_style="bold")
    table.add_column("Method")
    table.add_column("Verdict")
    table.add_column("Evidence")
    table.add_column("Time", justify="right", style="dim")
    for r in results:
        style = "red" if r.verdict == "NONZERO" else "green"
        if r.certificate is not None:
            cert = r.certificate
            evidence = f"survivor T_{cert.survivor + 1}, alpha={fs.format(cert.alpha)}, " + (
                f"path through {cert.path.length} terms"
            )
        elif r.point is not None:
            evidence = "point [" + ",".join(str(a) for a in r.point) + "]"
        elif r.trials is not None:
            evidence = f"{r.trials} points"
            if r.error_bound is not None:
                evidence += f", error <= {r.error_bound} each"
        else:
            evidence = ""
        table.add_row(r.method, Text(r.verdict, style=style), evidence, f"{r.seconds:.3f}s")
    return table


def format_certificate(fs: FieldSpec, cert: Certificate) -> Text:
    out = Text()
    out.append("Certificate: ", style="bold")
    out.append(f"T_{cert.survivor + 1} survives with alpha = {fs.format(cert.alpha)}\n")
    for node, j in zip(cert.path.nodes, cert.path.sources, strict=True):
        out.append(f"  T_{j + 1} -> {term_text(fs, node)}\n", style="dim")
    return out


def format_nucleus(fs: FieldSpec, report: NucleusReport, coefficients: Sequence[Scalar]) -> Table:
    title = f"{report.stage}, rank {report.rank}"
    table = Table(show_header=True, header_style="bold", title=title)
    table.add_column("Term", justify="right")
    table.add_column("K_i")
    table.add_column("alpha_i", justify="right")
    table.add_column("Outside scales", style="dim")
    for i, (k_i, a, m) in enumerate(
        zip(report.k_terms, coefficients, report.matchings, strict=True)
    ):
        scales = ", ".join(fs.format(s) for s in m.outside.scales)
        table.add_row(str(i + 1), term_text(fs, k_i), fs.format(a), scales)
    return table


def format_basis(fs: FieldSpec, basis: Sequence[FormVec]) -> Text:
    out = Text()
    out.append("K basis: ", style="bold")
    out.append(", ".join(form_text(fs, b) for b in basis) if basis else "{0}")
    out.append("\n")
    return out


def format_bounds_table(report: RankBoundReport) -> Table:
    table = Table(show_header=True, header_style="bold", title="Rank bounds")
    table.add_column("Bound")
    table.add_column("Measured", justify="right")
    table.add_column("", justify="center")
    table.add_column("Limit", justify="right")
    table.add_column("Result")
    table.add_column("Note", style="dim")
    for ch in report.checks:
        result = Text("pass", style="green") if ch.passed else Text("FAIL", style="bold red")
        table.add_row(ch.name, str(ch.measured), ch.relation, str(ch.bound), result, ch.note)
    return table


def format_sg(
    s: SGConfig,
    k: int,
    result: OperatorResult | None = None,
    growth: GrowthReport | None = None,
) -> Text:
    fs = s.field
    out = Text()
    out.append("Configuration: ", style="bold")
    out.append(f"{s.size} vectors over {fs}, rank {s.rank}\n")
    if result is not None:
        out.append(f"SG_{k}: ", style="bold")
        if result.closed:
            out.append("closed\n", style="green")
        else:
            out.append("not closed", style="red")
            out.append(", witness " + ", ".join(form_text(fs, v) for v in result.witness) + "\n")
    if growth is not None:
        out.append("Growth: ", style="bold")
        out.append(f"r={growth.rank}, threshold {growth.threshold}, regime {growth.regime}, ")
        if growth.satisfied:
            out.append("satisfied\n", style="green")
        else:
            out.append("VIOLATED\n", style="red")
    return out


def format_bench_table(rows: Sequence[BenchRow], methods: Sequence[str]) -> Table:
    """Agreement counts per corpus family."""
    table = Table(show_header=True, header_style="bold")
    table.add_column("Family")
    table.add_column("Circuits", justify="right")
    for m in methods:
        table.add_column(f"{m} ZERO", justify="right")
    table.add_column("Disagree", justify="right")
    table.add_column("Time", justify="right", style="dim")

    groups: dict[str, list[BenchRow]] = {}
    for r in rows:
        groups.setdefault(r.name.split("-", 1)[0], []).append(r)
    for family, members in groups.items():
        zeros = [
            str(sum(1 for r in members if r.verdicts.get(m) in ("ZERO", "PROBABLY_ZERO")))
            for m in methods
        ]
        bad = sum(1 for r in members if not r.agree)
        table.add_row(
            family,
            str(len(members)),
            *zeros,
            Text(str(bad), style="red" if bad else "green"),
            f"{sum(r.seconds for r in members):.2f}s",
        )
    return table
