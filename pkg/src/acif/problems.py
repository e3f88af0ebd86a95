"""Problem files and the built-in registry.

File format (TOML)::

    [problem]
    name = "fsp-9"
    interval = [0.0, 4.0]
    delta = "10*eps"            # a number, or a multiple of epsilon
    epsilon = 4e-4              # optional, default 1e-4 * (b - a)
    objective = "3 - 2*exp(...)"
    objective_lipschitz = "auto"   # a number or "auto"
    penalty_P = 15              # optional

    [[constraint]]              # evaluated in file order
    expr = "..."
    lipschitz = "auto"

``"auto"`` constants are grid estimates times :data:`SAFETY_FACTOR`.
"""
from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .expr import Expression, ParseError, parse_expression
from .oracle import DEFAULT_RESOLUTION, estimate_lipschitz
from .problem import ConstrainedProblem

SAFETY_FACTOR = 1.1
AUTO = "auto"

Lipschitz = Union[float, str]

_EPS_MULTIPLE = re.compile(r"^\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*\*?\s*eps\s*$")


class ProblemFileError(ValueError):
    """Invalid problem file."""


def parse_delta(value) -> Union[float, str]:
    """A positive number, or a normalized ``"N*eps"`` string."""
    if isinstance(value, bool):
        raise ProblemFileError(f"invalid delta {value!r}")
    if isinstance(value, (int, float)):
        if not value > 0:
            raise ProblemFileError(f"delta must be positive, got {value}")
        return float(value)
    if isinstance(value, str):
        m = _EPS_MULTIPLE.match(value)
        if m:
            n = float(m.group(1) or 1.0)
            if not n > 0:
                raise ProblemFileError(f"delta must be positive, got {value!r}")
            return f"{n:g}*eps"
        try:
            return parse_delta(float(value))
        except ValueError:
            pass
    raise ProblemFileError(f"invalid delta {value!r}; use a number or 'N*eps'")


def _lipschitz(value, where: str) -> Lipschitz:
    if value == AUTO:
        return AUTO
    if isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0:
        return float(value)
    raise ProblemFileError(f"{where}: lipschitz must be a positive number or 'auto'")


@functools.lru_cache(maxsize=256)
def _auto_constant(source: str, interval: tuple[float, float], resolution: int) -> float:
    return SAFETY_FACTOR * estimate_lipschitz(parse_expression(source), interval, resolution)


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    interval: tuple[float, float]
    objective: Expression
    objective_lipschitz: Lipschitz = AUTO
    constraints: tuple[tuple[Expression, Lipschitz], ...] = ()
    delta: Union[float, str] = "1*eps"
    epsilon: Optional[float] = None
    penalty_P: Optional[float] = None

    @property
    def m(self) -> int:
        return len(self.constraints)

    def resolved_epsilon(self, override: Optional[float] = None) -> float:
        if override is not None:
            return float(override)
        if self.epsilon is not None:
            return self.epsilon
        a, b = self.interval
        return 1e-4 * (b - a)

    def resolved_delta(self, epsilon: float, override=None) -> float:
        d = parse_delta(override) if override is not None else self.delta
        if isinstance(d, str):
            return float(d.split("*")[0]) * epsilon
        return d

    def lipschitz_constants(self, resolution: int = DEFAULT_RESOLUTION) -> tuple[float, ...]:
        out = []
        for expr, k in [*self.constraints, (self.objective, self.objective_lipschitz)]:
            out.append(_auto_constant(expr.source, self.interval, resolution) if k == AUTO else k)
        return tuple(out)

    def build(self, epsilon: Optional[float] = None, delta=None,
              resolution: int = DEFAULT_RESOLUTION) -> ConstrainedProblem:
        """Concrete problem; ``auto`` constants estimated on ``resolution`` nodes."""
        eps = self.resolved_epsilon(epsilon)
        funcs = tuple(e for e, _ in self.constraints) + (self.objective,)
        labels = tuple(e.source for e in funcs)
        return ConstrainedProblem(funcs, self.lipschitz_constants(resolution), self.interval,
                                  self.resolved_delta(eps, delta), self.name, labels)


def parse_problem_text(text: str, source: str = "<string>") -> ProblemSpec:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{source}: {exc}") from exc
    prob = doc.get("problem")
    if not isinstance(prob, dict):
        raise ProblemFileError(f"{source}: missing [problem] table")
    for key in ("name", "interval", "objective"):
        if key not in prob:
            raise ProblemFileError(f"{source}: missing required key problem.{key}")
    interval = prob["interval"]
    if (not isinstance(interval, list) or len(interval) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in interval)):
        raise ProblemFileError(f"{source}: interval must be a two-element numeric array")
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ProblemFileError(f"{source}: interval needs a < b, got [{a}, {b}]")

    def expression(text, where):
        if not isinstance(text, str):
            raise ProblemFileError(f"{source}: {where} must be a string")
        try:
            return parse_expression(text)
        except ParseError as exc:
            raise ProblemFileError(f"{source}: {where}: {exc}") from exc

    constraints = []
    for i, c in enumerate(doc.get("constraint", []), start=1):
        if "expr" not in c:
            raise ProblemFileError(f"{source}: constraint {i} missing required key expr")
        constraints.append((expression(c["expr"], f"constraint {i}"),
                            _lipschitz(c.get("lipschitz", AUTO), f"constraint {i}")))
    eps = prob.get("epsilon")
    if eps is not None and not (isinstance(eps, (int, float)) and eps > 0):
        raise ProblemFileError(f"{source}: epsilon must be a positive number")
    pen = prob.get("penalty_P")
    if pen is not None and not (isinstance(pen, (int, float)) and pen > 0):
        raise ProblemFileError(f"{source}: penalty_P must be a positive number")
    try:
        delta = parse_delta(prob.get("delta", "1*eps"))
    except ProblemFileError as exc:
        raise ProblemFileError(f"{source}: {exc}") from exc
    return ProblemSpec(
        name=str(prob["name"]),
        interval=(a, b),
        objective=expression(prob["objective"], "objective"),
        objective_lipschitz=_lipschitz(prob.get("objective_lipschitz", AUTO), "objective"),
        constraints=tuple(constraints),
        delta=delta,
        epsilon=None if eps is None else float(eps),
        penalty_P=None if pen is None else float(pen),
    )


def load_problem_file(path: Union[str, Path]) -> ProblemSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    return parse_problem_text(text, str(path))


_BUILTIN_FILES = {
    "fsp-9": "problem9.toml",
    "mono": "mono.toml",
    "infeasible-const": "infeasible_const.toml",
    "isolated": "isolated.toml",
    "two-region": "two_region.toml",
}


def data_path(filename: str) -> Path:
    return Path(str(resources.files("acif") / "data" / filename))


@functools.lru_cache(maxsize=None)
def builtin_registry() -> dict[str, ProblemSpec]:
    return {name: load_problem_file(data_path(f)) for name, f in _BUILTIN_FILES.items()}
