"""Builders for the bundled example spaces and their reference values."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exceptions import ConfigError
from .space import GroupSpec, SpaceDescription, VoltageAssignment, validate_graph
from .symbolic import InvolutiveAlphabet, SymbolPartition


@dataclass(frozen=True)
class Expected:
    quantity: str
    value: float
    tolerance: float
    provenance: str  # "PAPER" or "DERIVED"
    note: str = ""


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    params: dict
    description: SpaceDescription
    expected: tuple[Expected, ...] = ()
    partition: SymbolPartition | None = None

    @property
    def base(self):
        return self.description.base

    def expand(self, radius, **kwargs):
        return self.description.expand(radius, **kwargs)

    def to_dict(self) -> dict:
        out = self.description.to_dict()
        out["name"] = self.name
        out["params"] = dict(self.params)
        if self.partition is not None:
            out["partition"] = {"classes": [[self.base.side_label(s) for s in c]
                                            for c in self.partition.classes],
                                "names": list(self.partition.names)}
        return out


def _rose(loops: list[tuple[str, str]], rank: int, extension=()) -> SpaceDescription:
    edges = [{"id": lab, "from": 0, "to": 0, "length": 1, "label": lab} for lab, _ in loops]
    base = validate_graph({"vertices": 1, "edges": edges})
    group = GroupSpec(rank, tuple(extension))
    volts = VoltageAssignment.from_edges(base, {lab: w for lab, w in loops}, group)
    return SpaceDescription(base, group, volts)


def _check_ell(ell) -> int:
    if not isinstance(ell, int) or isinstance(ell, bool) or ell < 1:
        raise ConfigError(f"invalid rank {ell!r}")
    return ell


def tree(ell: int = 2) -> ExampleSpec:
    """``T_{2 ell}`` as the cover of a rose of ``ell`` loops with voltages ``a_i``."""
    ell = _check_ell(ell)
    desc = _rose([(f"a{i}", f"a{i}") for i in range(1, ell + 1)], ell)
    h = math.log(2 * ell - 1) if ell > 1 else 0.0
    exp = (Expected("hcrit", h, 0.01, "PAPER", "critical exponent of the free group"),
           Expected("sft", h, 0.0, "PAPER", "entropy of the quotient geodesic flow"),
           Expected("delta", 0.0, 0.0, "DERIVED", "trees satisfy the four-point condition"))
    return ExampleSpec(f"tree({ell})", {"ell": ell}, _named(desc, f"tree({ell})"), exp)


def doubled(ell: int = 2) -> ExampleSpec:
    """Every edge of ``T_{2 ell}`` doubled: loops ``a_i`` and ``t_i`` both carry ``a_i``."""
    ell = _check_ell(ell)
    loops = [(f"a{i}", f"a{i}") for i in range(1, ell + 1)]
    loops += [(f"t{i}", f"a{i}") for i in range(1, ell + 1)]
    desc = _rose(loops, ell)
    exp = (Expected("hcrit", math.log(2 * ell - 1), 0.02, "PAPER", "orbit growth unchanged"),
           Expected("sft", math.log(4 * ell - 2), 0.0, "PAPER", "geodesic shift entropy log(4l-2)"))
    return ExampleSpec(f"doubled({ell})", {"ell": ell}, _named(desc, f"doubled({ell})"), exp)


def circle_rose(ell: int = 2) -> ExampleSpec:
    """``T_{2 ell}`` with one circle of length 1 glued at every vertex (identity voltage)."""
    ell = _check_ell(ell)
    loops = [(f"a{i}", f"a{i}") for i in range(1, ell + 1)] + [("c", "")]
    desc = _rose(loops, ell)
    exp = (Expected("hcrit", math.log(2 * ell - 1), 0.02, "PAPER", "circles do not move the orbit"),
           Expected("sft", math.log(2 * ell + 1), 0.0, "PAPER", "local geodesics of the wedge"),
           Expected("hgeod", math.log(2 * ell - 1), 0.05, "DERIVED", "lines stay in the tree"))
    return ExampleSpec(f"circle_rose({ell})", {"ell": ell}, _named(desc, f"circle_rose({ell})"), exp)


def wedge(k: int = 3) -> ExampleSpec:
    """Wedge of ``k`` unit circles (its universal cover is ``T_{2k}``)."""
    k = _check_ell(k)
    desc = _rose([(f"a{i}", f"a{i}") for i in range(1, k + 1)], k)
    exp = (Expected("sft", math.log(2 * k - 1) if k > 1 else 0.0, 0.0, "PAPER",
                    "non-backtracking loops on the wedge"),)
    return ExampleSpec(f"wedge({k})", {"k": k}, _named(desc, f"wedge({k})"), exp)


ROTATION = (2, 3, 0, 1)  # a1 -> a2, a2 -> a1 on positions [a1, A1, a2, A2]


def rotation_t4() -> ExampleSpec:
    """``T_4`` with the free group extended by the order-2 symbol swap, plus the one-class partition."""
    desc = _rose([("a1", "a1"), ("a2", "a2")], 2, (ROTATION,))
    alpha = InvolutiveAlphabet.from_graph(desc.base)
    part = SymbolPartition.single_class(alpha, "a")
    exp = (Expected("hcrit", math.log(3), 0.01, "PAPER", "finite extension keeps the growth"),
           Expected("sft", 0.0, 0.0, "PAPER", "all local geodesic segments identified"))
    return ExampleSpec("rotation_t4", {"permutation": list(ROTATION)},
                       _named(desc, "rotation_t4"), exp, part)


_RULES: dict[str, Callable[[int], int]] = {
    "linear": lambda n: n,
    "exp": lambda n: 2 ** n,
    "const": lambda n: 1,
}


def tufted_ray(rule: str = "exp", R: int = 14) -> ExampleSpec:
    """The real line with ``d_n`` unit segments glued at each ``n >= 1``, truncated at ``R``.

    Line vertex ``j`` is graph vertex ``j + R + 1``; the group is a trivial stub.
    """
    if rule not in _RULES:
        raise ConfigError(f"unknown tuft rule {rule!r}; choose from {sorted(_RULES)}")
    if not isinstance(R, int) or R < 1:
        raise ConfigError("R must be a positive integer")
    d = _RULES[rule]
    n_line = 2 * R + 3
    origin = R + 1
    edges = [{"id": f"l{j}", "from": j, "to": j + 1, "length": 1, "label": f"l{j}"}
             for j in range(n_line - 1)]
    nv = n_line
    t = 0
    for n in range(1, R + 1):
        for _ in range(d(n)):
            edges.append({"id": f"t{t}", "from": origin + n, "to": nv, "length": 1, "label": f"t{t}"})
            nv += 1
            t += 1
    base = validate_graph({"vertices": nv, "edges": edges})
    group = GroupSpec(1)
    desc = SpaceDescription(base, group, VoltageAssignment.from_edges(base, {}, group),
                            f"tufted_ray({rule},{R})", Fraction(R), origin)
    exp = [Expected("hgeod", 0.0, 0.02, "PAPER", "geodesic lines confined to the line")]
    if rule == "exp":
        exp.append(Expected("hcov", math.log(2), 0.05, "DERIVED", "count = n + sum d_j"))
    else:
        exp.append(Expected("hcov", 0.0, 0.05, "PAPER", "polynomial growth"))
    return ExampleSpec(f"tufted_ray({rule},{R})", {"rule": rule, "R": R, "origin": origin},
                       desc, tuple(exp))


def _named(desc: SpaceDescription, name: str) -> SpaceDescription:
    return SpaceDescription(desc.base, desc.group, desc.voltages, name, desc.max_radius, desc.basepoint)


BUILDERS: dict[str, Callable[..., ExampleSpec]] = {
    "tree": tree,
    "doubled": doubled,
    "circle_rose": circle_rose,
    "wedge": wedge,
    "rotation_t4": rotation_t4,
    "tufted_ray": tufted_ray,
}


def list_examples() -> list[str]:
    return sorted(BUILDERS)


def build_example(name: str, **params) -> ExampleSpec:
    """Build a bundled example; ``name`` may carry arguments, e.g. ``"tree(3)"``."""
    if "(" in name and name.endswith(")"):
        name, args = name[:-1].split("(", 1)
        pos = [a.strip() for a in args.split(",") if a.strip()]
        if name == "tufted_ray":
            keys = ["rule", "R"]
            conv = [str, int]
        else:
            keys, conv = [_first_param(name)], [int]
        for k, c, v in zip(keys, conv, pos):
            try:
                params.setdefault(k, c(v))
            except ValueError:
                raise ConfigError(f"bad parameter {v!r} for {name}") from None
    builder = BUILDERS.get(name)
    if builder is None:
        raise ConfigError(f"unknown example {name!r}; known: {', '.join(list_examples())}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _first_param(name: str) -> str:
    return {"wedge": "k"}.get(name, "ell")
