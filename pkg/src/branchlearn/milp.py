"""Binary MILP instances, partial assignments and the LP relaxations they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .lp import LinearProgram, LpSolution, SENSES, StructuralError, solve

INT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MilpInstance:
    """Maximize ``c @ x`` subject to linear rows; ``binary`` lists the {0,1} variables.

    Every other variable is continuous in ``[0, 1]``. ``header`` carries free-form
    comment lines (generator parameters, variable mappings) that survive a
    file round-trip. Instances are immutable; the private memo only caches LP
    results keyed by assignment, which are pure functions of the instance.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    binary: tuple[int, ...]
    header: tuple[str, ...] = ()
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, c.size)
        rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        if A.ndim != 2 or A.shape[1] != c.size or A.shape[0] != rhs.size or len(self.senses) != rhs.size:
            raise StructuralError("inconsistent MILP dimensions")
        if any(s not in SENSES for s in self.senses):
            raise StructuralError("unknown row sense")
        binary = tuple(sorted(set(int(i) for i in self.binary)))
        if binary and (binary[0] < 0 or binary[-1] >= c.size):
            raise StructuralError("binary index out of range")
        for arr in (c, A, rhs):
            arr.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "senses", tuple(self.senses))
        object.__setattr__(self, "binary", binary)
        object.__setattr__(self, "header", tuple(self.header))

    @classmethod
    def from_rows(
        cls,
        c: Sequence[float],
        rows: Sequence[tuple[Sequence[float], str, float]],
        binary: Sequence[int] | None = None,
        header: Sequence[str] = (),
    ) -> "MilpInstance":
        n = len(c)
        A = np.array([r[0] for r in rows], dtype=float).reshape(len(rows), n)
        return cls(np.asarray(c, dtype=float), A, tuple(r[1] for r in rows),
                   np.array([r[2] for r in rows], dtype=float),
                   tuple(range(n)) if binary is None else tuple(binary), tuple(header))

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def big_value(self) -> float:
        """Stand-in bound decrease for an infeasible child: ``||c||_1 + 1``."""
        return float(np.abs(self.c).sum()) + 1.0

    def relaxation(self, a: "PartialAssignment | None" = None) -> LinearProgram:
        lo, hi = np.zeros(self.n), np.ones(self.n)
        if a is not None:
            for i, v in a.items():
                lo[i] = hi[i] = v
        return LinearProgram.trusted(self.c, self.A, self.senses, self.rhs, lo, hi)

    def root(self) -> "PartialAssignment":
        return PartialAssignment.empty(self.n)


def solve_relaxation(q: MilpInstance, a: "PartialAssignment") -> LpSolution:
    """LP relaxation of ``q`` under ``a``, memoized on the instance."""
    key = ("lp", a.values)
    sol = q._memo.get(key)
    if sol is None:
        sol = solve(q.relaxation(a))
        q._memo[key] = sol
    return sol


@dataclass(frozen=True)
class PartialAssignment:
    """Per-variable value in {0, 1} or unassigned (stored as -1)."""

    values: tuple[int, ...]

    @classmethod
    def empty(cls, n: int) -> "PartialAssignment":
        return cls((-1,) * n)

    def get(self, i: int) -> int | None:
        v = self.values[i]
        return None if v < 0 else v

    def is_assigned(self, i: int) -> bool:
        return self.values[i] >= 0

    def items(self) -> Iterator[tuple[int, int]]:
        return ((i, v) for i, v in enumerate(self.values) if v >= 0)

    def __len__(self) -> int:
        return sum(1 for v in self.values if v >= 0)

    def fix(self, i: int, v: int) -> "PartialAssignment":
        if self.values[i] >= 0:
            raise ValueError(f"variable {i} is already assigned")
        if v not in (0, 1):
            raise ValueError("binary branches take value 0 or 1")
        vals = list(self.values)
        vals[i] = v
        return PartialAssignment(tuple(vals))


def child(q: MilpInstance, a: PartialAssignment, i: int, v: int) -> PartialAssignment:
    """Branch ``a`` on binary variable ``i`` with value ``v``."""
    if i not in q.binary:
        raise ValueError(f"variable {i} is not binary")
    return a.fix(i, v)


def is_integral(sol: LpSolution, q: MilpInstance) -> bool:
    """True iff every binary variable of ``sol`` lies within 1e-6 of 0 or 1."""
    if not sol.is_optimal:
        raise ValueError("integrality is only defined for optimal LP solutions")
    xb = sol.x[list(q.binary)]
    return bool(np.all(np.abs(xb - np.round(xb)) <= INT_TOL))


def fractional_vars(sol: LpSolution, q: MilpInstance) -> list[int]:
    xb = sol.x[list(q.binary)]
    frac = np.abs(xb - np.round(xb)) > INT_TOL
    return [q.binary[k] for k in np.flatnonzero(frac)]


# -- file format -----------------------------------------------------------

def _fmt(values: Sequence[float]) -> str:
    return " ".join(repr(float(v)) for v in values)


def dumps(q: MilpInstance) -> str:
    lines = [f"# {h}" if h else "#" for h in q.header]
    lines.append(f"n {q.n}")
    lines.append(f"obj {_fmt(q.c)}")
    for row, sense, b in zip(q.A, q.senses, q.rhs):
        lines.append(f"row {sense} {repr(float(b))} {_fmt(row)}")
    lines.append("bin " + " ".join(str(i) for i in q.binary))
    return "\n".join(lines) + "\n"


def loads(text: str) -> MilpInstance:
    header: list[str] = []
    n = None
    c = None
    rows = []
    binary: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header.append(line[1:].removeprefix(" "))
            continue
        key, *rest = line.split()
        try:
            if key == "n":
                n = int(rest[0])
            elif key == "obj":
                c = [float(t) for t in rest]
            elif key == "row":
                rows.append(([float(t) for t in rest[2:]], rest[0], float(rest[1])))
            elif key == "bin":
                binary.extend(int(t) for t in rest)
            else:
                raise ValueError(f"unknown record {key!r}")
        except (IndexError, ValueError) as exc:
            raise StructuralError(f"line {lineno}: {exc}") from None
    if n is None or c is None or len(c) != n:
        raise StructuralError("missing or inconsistent 'n'/'obj' records")
    if any(len(r[0]) != n for r in rows):
        raise StructuralError("row length does not match n")
    return MilpInstance.from_rows(c, rows, binary, header)


def write(q: MilpInstance, path: str | Path) -> None:
    Path(path).write_text(dumps(q))


def read(path: str | Path) -> MilpInstance:
    return loads(Path(path).read_text())
