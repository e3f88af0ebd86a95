"""Run summaries, trace CSV files, comparison tables and plot data."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .problem import TrialRecord, index_counts, weighted_evaluations

TRACE_COLUMNS = ("k", "action", "x", "nu", "g_value", "zstar", "q", "t", "R_t")


class TraceFormatError(ValueError):
    """Malformed trace CSV; ``line`` is 1-based and counts the header."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class RunSummary:
    problem: str
    method: str
    m: int
    counts: list[int]
    iterations: int
    evaluations: int
    outcome: str
    lower: Optional[float] = None
    upper: Optional[float] = None
    minimizer: Optional[float] = None
    wall_time: float = 0.0
    delta_eps: Optional[float] = None
    v_delta: list[float] = field(default_factory=list)
    error: Optional[str] = None

    @classmethod
    def from_trials(cls, problem: str, method: str, m: int, trials: Sequence[TrialRecord],
                    **kw) -> "RunSummary":
        counts = index_counts(trials, m) if method == "acif" else [0] * m + [len(trials)]
        evals = weighted_evaluations(counts) if method == "acif" else (m + 1) * len(trials)
        return cls(problem, method, m, counts, len(trials), evals, **kw)

    @property
    def label(self) -> str:
        if self.method == "acif" and self.delta_eps is not None:
            return f"ACIF d={self.delta_eps:g}eps"
        return self.method.upper()

    def lines(self) -> list[str]:
        names = [f"N_g{j}" for j in range(1, self.m + 1)] + ["N_f", "Iter.", "Eval."]
        values = [*self.counts, self.iterations, self.evaluations]
        out = [f"{self.problem}  {self.label}  {self.outcome}"]
        if self.error:
            out.append(f"  error: {self.error}")
            return out
        out.append("  " + "  ".join(f"{n:>7}" for n in names))
        out.append("  " + "  ".join(f"{v:>7}" for v in values))
        if self.minimizer is not None:
            out.append(f"  minimizer x* = {self.minimizer:.8f}")
        if self.upper is not None:
            lo = "n/a" if self.lower is None else f"{self.lower:.8f}"
            out.append(f"  bounds on the global minimum: [{lo}, {self.upper:.8f}]")
        if self.v_delta:
            out.append("  V^delta: " + ", ".join(f"{x:.8g}" for x in self.v_delta))
        out.append(f"  time {self.wall_time:.3f} s")
        return out

    def __str__(self):
        return "\n".join(self.lines())


# ------------------------------------------------------------------- traces

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_trace(rows: Iterable, path_or_file) -> int:
    """Write events (objects with the :data:`TRACE_COLUMNS` attributes) as CSV."""
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        n = 0
        for ev in rows:
            w.writerow([_cell(getattr(ev, c)) for c in TRACE_COLUMNS])
            n += 1
        return n
    finally:
        if own:
            fh.close()


@dataclass
class TraceRow:
    k: int
    action: str
    x: Optional[float] = None
    nu: Optional[int] = None
    g_value: Optional[float] = None
    zstar: Optional[float] = None
    q: Optional[int] = None
    t: Optional[int] = None
    R_t: Optional[float] = None


def pen_trace_rows(trials: Sequence[TrialRecord]) -> list[TraceRow]:
    """Trace rows for a penalty run; ``nu`` is the number of functions per trial."""
    rows, best = [], math.inf
    for k, tr in enumerate(trials, start=1):
        best = min(best, tr.g_value)
        rows.append(TraceRow(k, "trial", tr.x, tr.nu, tr.g_value, best, k))
    return rows


_PARSERS = {"k": int, "x": float, "nu": int, "g_value": float, "zstar": float,
            "q": int, "t": int, "R_t": float}


def read_trace(path_or_text: Union[str, Path]) -> list[TraceRow]:
    """Parse a trace CSV (a path, or the text itself when it contains a newline)."""
    if isinstance(path_or_text, Path) or "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = str(path_or_text)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise TraceFormatError("empty file, expected a header row", 1) from None
    if tuple(h.strip() for h in header) != TRACE_COLUMNS:
        raise TraceFormatError(f"header must be {','.join(TRACE_COLUMNS)}", 1)
    rows = []
    for line, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(TRACE_COLUMNS):
            raise TraceFormatError(f"expected {len(TRACE_COLUMNS)} fields, got {len(rec)}", line)
        kw = {}
        for name, cell in zip(TRACE_COLUMNS, rec):
            if name == "action":
                if not cell:
                    raise TraceFormatError("empty action", line)
                kw[name] = cell
                continue
            if cell == "":
                if name == "k":
                    raise TraceFormatError("empty k", line)
                kw[name] = None
                continue
            try:
                kw[name] = _PARSERS[name](cell)
            except ValueError:
                raise TraceFormatError(f"bad {name} value {cell!r}", line) from None
        rows.append(TraceRow(**kw))
    return rows


def trial_rows(rows: Iterable[TraceRow]) -> list[TraceRow]:
    return [r for r in rows if r.action == "trial"]


def write_plotdata(rows: Sequence[TraceRow], prefix: Union[str, Path],
                   indexes: Optional[int] = None) -> list[Path]:
    """One file of x values per index (``<prefix>_nu<j>.txt``) plus
    ``<prefix>_dynamics.txt`` with ``iteration x`` pairs in trial order."""
    prefix = Path(prefix)
    trials = trial_rows(rows)
    for i, r in enumerate(trials):
        if r.x is None or r.nu is None:
            raise ValueError(f"trial row {i + 1} lacks x or nu")
    top = max([r.nu for r in trials] + [indexes or 0])
    written = []
    for j in range(1, top + 1):
        p = prefix.with_name(f"{prefix.name}_nu{j}.txt")
        p.write_text("".join(f"{r.x!r}\n" for r in trials if r.nu == j), encoding="utf-8")
        written.append(p)
    p = prefix.with_name(f"{prefix.name}_dynamics.txt")
    p.write_text("".join(f"{i} {r.x!r}\n" for i, r in enumerate(trials, start=1)),
                 encoding="utf-8")
    written.append(p)
    return written


# ------------------------------------------------------------------- tables

def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def comparison_table(summaries: Sequence[RunSummary]) -> tuple[list[str], list[list[str]]]:
    """Header and rows: one row per run, then one Average row per method
    column group over the solved runs."""
    width = max([s.m for s in summaries] + [0])
    header = (["Problem", "Method"] + [f"N_g{j}" for j in range(1, width + 1)]
              + ["N_f", "Iter.", "Eval.", "Outcome", "x*", "Upper"])
    rows = []
    for s in summaries:
        if s.error:
            rows.append([s.problem, s.label] + ["-"] * (width + 3) + ["error: " + s.error, "-", "-"])
            continue
        ncols = [str(n) for n in s.counts[:-1]] + ["-"] * (width - s.m)
        rows.append([s.problem, s.label, *ncols, str(s.counts[-1]), str(s.iterations),
                     str(s.evaluations), s.outcome, _fmt(s.minimizer), _fmt(s.upper)])
    for label in dict.fromkeys(s.label for s in summaries):
        solved = [s for s in summaries if s.label == label and not s.error
                  and "infeasible" not in s.outcome.lower()]
        if not solved:
            continue
        it = sum(s.iterations for s in solved) / len(solved)
        ev = sum(s.evaluations for s in solved) / len(solved)
        rows.append(["Average", label] + [""] * (width + 1)
                    + [f"{it:.1f}", f"{ev:.1f}", f"{len(solved)} solved", "", ""])
    return header, rows


def render_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    def line(cells):
        return "  ".join(str(c).ljust(w) for c, w in zip(cells, widths)).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([line(header), sep] + [line(r) for r in rows])


def write_table_csv(header, rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
