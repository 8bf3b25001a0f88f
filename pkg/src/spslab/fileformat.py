"""Line-oriented text formats for circuits, SG configurations and point sets.

    field rational | field prime <p>
    nvars <n>
    term <coeff>: [c1,...,cn]^e [c1,...,cn;c0] ...
    vec [c1,...,cn]

`#` starts a comment. `;c0` carries the constant slot of an affine form.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path

from spslab.circuits import MultTerm, SPSCircuit
from spslab.errors import InputError
from spslab.fields import FieldSpec, Scalar
from spslab.linalg import FormVec
from spslab.sg import SGConfig

_FORM_RE = re.compile(r"\[([^\]]*)\](?:\^(\d+))?")
_TERM_RE = re.compile(r"term\s+([^:\s]+)\s*:")


def _lines(text: str) -> Iterator[tuple[int, str, int]]:
    """(line number, content without comment, column offset of content)."""
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        stripped = content.strip()
        if stripped:
            yield number, stripped, content.index(stripped) + 1


def _parse_header(lines: Iterator[tuple[int, str, int]]) -> tuple[FieldSpec, int]:
    try:
        number, content, _ = next(lines)
    except StopIteration:
        raise InputError("empty input", line=1, column=1) from None
    parts = content.split()
    try:
        if parts[:2] == ["field", "rational"] and len(parts) == 2:
            fs = FieldSpec.rational()
        elif parts[:2] == ["field", "prime"] and len(parts) == 3:
            fs = FieldSpec.prime(int(parts[2]))
        else:
            raise InputError("expected 'field rational' or 'field prime <p>'")
    except (InputError, ValueError) as e:
        raise InputError(str(e), line=number, column=1) from None

    try:
        number, content, _ = next(lines)
    except StopIteration:
        raise InputError("missing 'nvars <n>' line", line=number + 1, column=1) from None
    parts = content.split()
    if len(parts) != 2 or parts[0] != "nvars" or not parts[1].isdigit() or int(parts[1]) < 1:
        raise InputError("expected 'nvars <n>' with n >= 1", line=number, column=1)
    return fs, int(parts[1])


def _parse_vector(
    fs: FieldSpec, body: str, line: int, column: int
) -> tuple[list[Scalar], Scalar | None]:
    constant = None
    if ";" in body:
        body, const_text = body.split(";", 1)
        try:
            constant = fs.parse(const_text)
        except InputError as e:
            raise InputError(str(e), line=line, column=column) from None
    entries = []
    offset = column + 1
    for piece in body.split(","):
        try:
            entries.append(fs.parse(piece))
        except InputError as e:
            raise InputError(str(e), line=line, column=offset) from None
        offset += len(piece) + 1
    return entries, constant


def _parse_forms(
    fs: FieldSpec, rest: str, line: int, column: int
) -> list[tuple[list[Scalar], Scalar | None, int]]:
    forms = []
    pos = 0
    for m in _FORM_RE.finditer(rest):
        gap = rest[pos : m.start()]
        if gap.strip():
            raise InputError(
                f"unexpected {gap.strip()!r}",
                line=line,
                column=column + pos + gap.index(gap.strip()),
            )
        entries, constant = _parse_vector(fs, m.group(1), line, column + m.start())
        power = int(m.group(2)) if m.group(2) else 1
        if power < 1:
            raise InputError(
                "multiplicity must be at least 1", line=line, column=column + m.start()
            )
        forms.extend([(entries, constant, column + m.start())] * power)
        pos = m.end()
    tail = rest[pos:]
    if tail.strip():
        raise InputError(
            f"unexpected {tail.strip()!r}",
            line=line,
            column=column + pos + tail.index(tail.strip()),
        )
    return forms


def parse_circuit(text: str) -> SPSCircuit:
    lines = _lines(text)
    fs, n = _parse_header(lines)
    raw_terms = []
    affine = False
    for number, content, column in lines:
        m = _TERM_RE.match(content)
        if not m:
            raise InputError("expected 'term <coeff>: [..] ...'", line=number, column=column)
        try:
            coeff = fs.parse(m.group(1))
        except InputError as e:
            raise InputError(str(e), line=number, column=column + 5) from None
        if not coeff:
            raise InputError("term coefficient is zero", line=number, column=column + 5)
        forms = _parse_forms(fs, content[m.end() :], number, column + m.end())
        for entries, constant, col in forms:
            if len(entries) != n:
                raise InputError(
                    f"form has {len(entries)} coefficients, expected {n}", line=number, column=col
                )
            if not any(entries) and not constant:
                raise InputError("zero linear form", line=number, column=col)
            affine = affine or constant is not None
        raw_terms.append((coeff, forms))

    if not raw_terms:
        raise InputError("circuit has no terms", line=1, column=1)

    terms = []
    for coeff, forms in raw_terms:
        vectors: list[FormVec] = []
        for entries, constant, _ in forms:
            if affine:
                entries = entries + [constant if constant is not None else fs.zero]
            vectors.append(tuple(entries))
        terms.append(MultTerm(coeff, tuple(vectors)))
    return SPSCircuit(fs, n, tuple(terms), affine=affine)


def format_vector(fs: FieldSpec, v: Sequence[Scalar], affine: bool = False) -> str:
    if affine:
        head = ",".join(fs.format(a) for a in v[:-1])
        return f"[{head};{fs.format(v[-1])}]"
    return "[" + ",".join(fs.format(a) for a in v) + "]"


def _format_header(fs: FieldSpec, n: int) -> list[str]:
    field_line = "field rational" if fs.is_rational else f"field prime {fs.modulus}"
    return [field_line, f"nvars {n}"]


def format_circuit(c: SPSCircuit) -> str:
    """Canonical text; consecutive equal forms collapse to ^e."""
    fs = c.field
    out = _format_header(fs, c.nvars)
    for t in c.terms:
        chunks = []
        i = 0
        while i < len(t.forms):
            j = i
            while j + 1 < len(t.forms) and t.forms[j + 1] == t.forms[i]:
                j += 1
            text = format_vector(fs, t.forms[i], c.affine)
            power = j - i + 1
            chunks.append(text if power == 1 else f"{text}^{power}")
            i = j + 1
        body = " ".join(chunks)
        out.append(f"term {fs.format(t.coeff)}:" + (f" {body}" if body else ""))
    return "\n".join(out) + "\n"


def parse_sg_config(text: str) -> SGConfig:
    lines = _lines(text)
    fs, n = _parse_header(lines)
    vectors = []
    for number, content, column in lines:
        if not content.startswith("vec"):
            raise InputError("expected 'vec [c1,...,cn]'", line=number, column=column)
        rest = content[3:]
        m = _FORM_RE.fullmatch(rest.strip())
        if not m or m.group(2) or ";" in m.group(1):
            raise InputError("expected 'vec [c1,...,cn]'", line=number, column=column + 3)
        entries, _ = _parse_vector(fs, m.group(1), number, column + 3)
        if len(entries) != n:
            raise InputError(
                f"vector has {len(entries)} coordinates, expected {n}",
                line=number,
                column=column + 4,
            )
        vectors.append(tuple(entries))
    return SGConfig(fs, tuple(vectors))


def format_sg_config(s: SGConfig) -> str:
    out = _format_header(s.field, s.dim)
    out.extend(f"vec {format_vector(s.field, v)}" for v in s.vectors)
    return "\n".join(out) + "\n"


def format_points(points: Iterable[Sequence[object]], header: str | None = None) -> str:
    out = [f"# {header}"] if header else []
    for p in points:
        out.append("point [" + ",".join(str(a) for a in p) + "]")
    return "\n".join(out) + "\n"


def read_circuit(path: Path) -> SPSCircuit:
    return parse_circuit(path.read_text())


def read_sg_config(path: Path) -> SGConfig:
    return parse_sg_config(path.read_text())
