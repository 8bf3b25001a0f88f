"""Black-box and randomized identity testing.

The hitting set substitutes x_i <- sum_j alpha^(i*j) y_j for alpha in a small
set A and runs y over the grid {0..d}^(R+1). Its constants are this package's
own choice, checked against the corpus rather than derived.
"""

from __future__ import annotations

import logging
import random
import subprocess
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from types import TracebackType

from spslab.circuits import SPSCircuit, evaluate
from spslab.config import DEFAULT_LIMITS, Limits
from spslab.errors import InputError, StructuralError, check_cap
from spslab.fields import FieldSpec, Scalar
from spslab.paths import Verdict

logger = logging.getLogger(__name__)

Point = tuple[int, ...]
Oracle = Callable[[Point], object]


@dataclass(frozen=True)
class RankBound:
    k: int
    d: int
    field: FieldSpec
    value: int


def rank_bound(k: int, d: int, fs: FieldSpec) -> RankBound:
    """3k^2 over Q, ceil(3k^2 lg 2d) over F_p."""
    if k < 2:
        raise InputError("rank bounds address identities with k >= 2")
    if d < 1:
        raise InputError("rank bounds need d >= 1")
    e = 3 * k * k
    if fs.is_rational:
        return RankBound(k, d, fs, e)
    # ceil(lg (2d)^e) without floating point
    return RankBound(k, d, fs, ((2 * d) ** e - 1).bit_length())


@dataclass(frozen=True)
class HittingSet:
    points: tuple[Point, ...]
    k: int
    d: int
    n: int
    field: FieldSpec
    rank_bound: int
    alphas: tuple[int, ...]
    method: str
    bit_bound: int

    @property
    def size(self) -> int:
        return len(self.points)

    def header(self) -> str:
        return f"sps-lab hitting set k={self.k} d={self.d} n={self.n} R={self.rank_bound}"


def _grid(width: int, d: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = [()]
    for _ in range(width):
        out = [(*p, g) for p in out for g in range(d + 1)]
    return out


def hitting_set(
    k: int,
    d: int,
    n: int,
    fs: FieldSpec,
    limits: Limits = DEFAULT_LIMITS,
    rank_override: int | None = None,
) -> HittingSet:
    """Points on which every nonzero ΣΠΣ(k,d,n) circuit is nonzero somewhere.

    The full grid {0..d}^n is used while R+1 >= n. Over Q that covers every
    n <= 3k^2+1, so the Vandermonde condenser runs for k = 1, for larger n,
    or under `rank_override`.
    """
    if k < 1 or d < 0 or n < 1:
        raise InputError("need k >= 1, d >= 0 and n >= 1")
    if rank_override is not None:
        r = rank_override
    elif k == 1:
        r = 0
    else:
        r = rank_bound(k, max(d, 1), fs).value
    p = fs.size

    if r + 1 >= n:
        if p is not None and p <= d:
            raise InputError(f"the grid {{0..{d}}} needs more than {d} elements, {fs} has {p}")
        check_cap("max_points", (d + 1) ** n, limits.max_points, "hitting-set grid")
        points = _grid(n, d)
        return HittingSet(
            tuple(points), k, d, n, fs, r, (), "grid", max(d, 0).bit_length()
        )

    size_a = 2 * n * d * (r + 1) + 1
    if p is not None and p <= size_a:
        raise InputError(
            f"the condenser needs {size_a} distinct nonzero values; {fs} has {p - 1}"
        )
    check_cap(
        "max_points", size_a * (d + 1) ** (r + 1), limits.max_points, "hitting-set condenser"
    )
    alphas = tuple(range(1, size_a + 1))
    bit_bound = ((r + 1) * max(d, 1) * size_a ** (n * (r + 1))).bit_length()
    grid = _grid(r + 1, d)
    seen: set[Point] = set()
    points: list[Point] = []
    for alpha in alphas:
        powers = [[alpha ** (i * j) for j in range(1, r + 2)] for i in range(1, n + 1)]
        for g in grid:
            point = tuple(sum(a * b for a, b in zip(row, g, strict=True)) for row in powers)
            if p is not None:
                point = tuple(a % p for a in point)
            if max(a.bit_length() for a in point) > bit_bound:
                raise StructuralError(f"point {point} exceeds the {bit_bound}-bit bound")
            if point not in seen:
                seen.add(point)
                points.append(point)
    logger.debug("condenser: |A|=%d, %d distinct points", size_a, len(points))
    return HittingSet(tuple(points), k, d, n, fs, r, alphas, "condenser", bit_bound)


@dataclass(frozen=True)
class PitOutcome:
    verdict: Verdict
    point: tuple[object, ...] | None = None
    trials: int = 0
    error_bound: Fraction | None = None


def blackbox_test(oracle: Oracle, h: HittingSet) -> PitOutcome:
    """NONZERO at the first point where the oracle is nonzero, else ZERO."""
    if not h.points:
        logger.warning("empty hitting set; ZERO is vacuous")
    fs = h.field
    for count, point in enumerate(h.points, start=1):
        if fs.convert(oracle(point)):
            return PitOutcome(Verdict.NONZERO, point, count)
    return PitOutcome(Verdict.ZERO, None, len(h.points))


def circuit_oracle(c: SPSCircuit) -> Oracle:
    return lambda point: evaluate(c, point)


def schwartz_zippel_test(c: SPSCircuit, trials: int, seed: int) -> PitOutcome:
    """Seeded random evaluation; one trial errs with probability at most d/|S|."""
    if trials < 1:
        raise InputError("need at least one trial")
    fs = c.field
    d = c.degree
    rng = random.Random(seed)
    if fs.is_rational:
        top = max(2 * d, 100)
        sample = top + 1

        def draw() -> int:
            return rng.randint(0, top)
    else:
        sample = fs.modulus
        if sample <= d:
            logger.warning("p=%d is at most d=%d; the error bound is degenerate", sample, d)

        def draw() -> int:
            return rng.randrange(fs.modulus)

    bound = Fraction(d, sample)
    for t in range(1, trials + 1):
        point = tuple(draw() for _ in range(c.nvars))
        if evaluate(c, point):
            return PitOutcome(Verdict.NONZERO, point, t, bound)
    return PitOutcome(Verdict.PROBABLY_ZERO, None, trials, bound)


class SubprocessOracle:
    """A long-lived process answering one evaluation per line.

    Each point is written as space-separated decimal fractions; the process
    replies with one scalar per line.
    """

    def __init__(self, cmd: Sequence[str], fs: FieldSpec) -> None:
        if not cmd:
            raise InputError("oracle command is empty")
        self.cmd = list(cmd)
        self.field = fs
        self._proc: subprocess.Popen[str] | None = None

    def _process(self) -> subprocess.Popen[str]:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(  # noqa: S603
                    self.cmd,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as e:
                raise InputError(f"could not start oracle {self.cmd[0]!r}: {e}") from e
        return self._proc

    def __call__(self, point: Sequence[object]) -> Scalar:
        proc = self._process()
        if proc.stdin is None or proc.stdout is None:
            raise StructuralError("oracle process has no pipes")
        line = " ".join(str(Fraction(str(a))) for a in point)
        try:
            proc.stdin.write(line + "\n")
            proc.stdin.flush()
        except BrokenPipeError as e:
            raise InputError(f"oracle {self.cmd[0]!r} closed its input") from e
        reply = proc.stdout.readline()
        if not reply:
            raise InputError(f"oracle {self.cmd[0]!r} exited without answering [{line}]")
        return self.field.parse(reply)

    def close(self) -> None:
        if self._proc is None:
            return
        if self._proc.stdin:
            self._proc.stdin.close()
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._proc = None

    def __enter__(self) -> SubprocessOracle:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()
