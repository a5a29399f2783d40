"""Registry types and the verification engine."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

from gmpy2 import mpq

from ..scalars import as_scalar, format_rational, parse_rational, scalar_to_json
from ..series import Mismatch, ParamMonomial, Series, VarSpec, series_compare


class _Formal:
    """Marker for a parameter kept as a formal variable."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_Formal, ())

    def __repr__(self):
        return "formal"


FORMAL = _Formal()

PARAM_KINDS = ("formal", "scalar", "formal|scalar", "int", "rational", "rational-list")


@dataclass(frozen=True)
class ParamSpec:
    kind: str
    default: object = None
    note: str = ""
    check: Callable | None = None

    def __post_init__(self):
        if self.kind not in PARAM_KINDS:
            raise ValueError(f"unknown parameter kind {self.kind!r}")


class ParamBinding:
    """Parameter values plus truncation bounds for one check."""

    __slots__ = ("params", "nq", "nt", "_spec")

    def __init__(self, params: Mapping, nq: int, nt: int | None = None):
        self.params = dict(params)
        self.nq = int(nq)
        self.nt = int(nq if nt is None else nt)
        self._spec = None

    def formal_names(self) -> tuple:
        return tuple(k for k, v in self.params.items() if v is FORMAL)

    @property
    def spec(self) -> VarSpec:
        if self._spec is None:
            self._spec = VarSpec(("q",) + self.formal_names(), self.nq, self.nt)
        return self._spec

    def is_formal(self, name: str) -> bool:
        return self.params.get(name) is FORMAL

    def __getitem__(self, name):
        return self.params[name]

    def get(self, name, default=None):
        return self.params.get(name, default)

    def mono(self, name: str, qshift: int = 0, coeff=1) -> ParamMonomial:
        """The parameter as a Pochhammer argument, times coeff*q^qshift."""
        v = self.params[name]
        if v is FORMAL:
            return ParamMonomial(coeff, qshift, ((name, 1),))
        return ParamMonomial(as_scalar(v) * as_scalar(coeff), qshift)

    def with_bounds(self, nq: int, nt: int | None = None) -> "ParamBinding":
        return ParamBinding(self.params, nq, nt)

    def with_params(self, **updates) -> "ParamBinding":
        p = dict(self.params)
        p.update(updates)
        return ParamBinding(p, self.nq, self.nt)

    def to_json(self) -> dict:
        out = {}
        for k, v in self.params.items():
            out[k] = format_value(v)
        return out

    def __eq__(self, other):
        return isinstance(other, ParamBinding) and (self.params, self.nq, self.nt) == (other.params, other.nq, other.nt)

    def __repr__(self):
        ps = ", ".join(f"{k}={format_value(v)}" for k, v in self.params.items())
        return f"ParamBinding({ps}; nq={self.nq}, nt={self.nt})"

    def __getstate__(self):
        return (self.params, self.nq, self.nt)

    def __setstate__(self, state):
        self.params, self.nq, self.nt = state
        self._spec = None


def format_value(v) -> str:
    if v is FORMAL:
        return "formal"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, (tuple, list)):
        return ",".join(format_value(x) for x in v)
    return format_rational(v)


def parse_value(kind: str, text: str):
    text = text.strip()
    if kind == "formal":
        if text != "formal":
            raise ValueError(f"parameter must be formal, got {text!r}")
        return FORMAL
    if kind == "formal|scalar" and text == "formal":
        return FORMAL
    if kind in ("scalar", "formal|scalar", "rational"):
        return parse_rational(text)
    if kind == "int":
        return int(text)
    if kind == "rational-list":
        return tuple(parse_rational(t) for t in text.split(",") if t.strip())
    raise ValueError(f"cannot parse kind {kind!r}")


@dataclass(frozen=True)
class IdentityDescriptor:
    id: str
    sides: tuple            # ((name, builder), ...)
    schema: Mapping         # name -> ParamSpec, in formal-variable order
    anchor: str
    expected_fail: bool = False
    suite: tuple = ()       # tuple of param dicts
    notes: str = ""

    def __post_init__(self):
        if len(self.sides) < 2:
            raise ValueError(f"{self.id}: an identity needs at least two sides")
        if sum(1 for n, p in self.schema.items() if p.kind == "formal") > 2:
            raise ValueError(f"{self.id}: too many formal parameters")

    @property
    def side_names(self) -> tuple:
        return tuple(n for n, _ in self.sides)

    def builder(self, side: str):
        for n, b in self.sides:
            if n == side:
                return b
        raise KeyError(f"{self.id} has no side {side!r}; sides are {self.side_names}")

    def bind(self, params: Mapping | None = None, nq: int = 20, nt: int | None = None) -> ParamBinding:
        """Fill defaults, validate against the schema and order parameters by schema."""
        params = dict(params or {})
        unknown = set(params) - set(self.schema)
        if unknown:
            raise ValueError(f"{self.id}: unknown parameters {sorted(unknown)}")
        full = {}
        for name, ps in self.schema.items():
            v = params.get(name, ps.default)
            if v is None:
                raise ValueError(f"{self.id}: missing parameter {name!r}")
            full[name] = _coerce(self.id, name, ps, v)
        nformal = sum(1 for v in full.values() if v is FORMAL)
        if nformal > 2:
            raise ValueError(f"{self.id}: at most two formal parameters, got {nformal}")
        b = ParamBinding(full, nq, nt)
        for name, ps in self.schema.items():
            if ps.check is not None:
                msg = ps.check(full[name], b)
                if msg:
                    raise ValueError(f"{self.id}: parameter {name}: {msg}")
        return b


def _coerce(ident: str, name: str, ps: ParamSpec, v):
    kind = ps.kind
    if isinstance(v, str):
        return parse_value(kind, v)
    if v is FORMAL:
        if not kind.startswith("formal"):
            raise ValueError(f"{ident}: parameter {name!r} cannot be formal")
        return v
    if kind == "formal":
        raise ValueError(f"{ident}: parameter {name!r} must be formal")
    if kind == "int":
        if isinstance(v, bool) or int(v) != v:
            raise ValueError(f"{ident}: parameter {name!r} must be an integer")
        return int(v)
    if kind == "rational-list":
        return tuple(as_scalar(x) for x in v)
    return as_scalar(v)


@dataclass
class VerificationReport:
    id: str
    binding: ParamBinding
    outcome: str                    # "pass" | "fail"
    mismatch: dict | None = None
    millis: float = 0.0
    notes: list = field(default_factory=list)
    expected_fail: bool = False

    @property
    def nq(self) -> int:
        return self.binding.nq

    @property
    def nt(self) -> int:
        return self.binding.nt

    @property
    def passed(self) -> bool:
        return self.outcome == "pass"

    def to_json(self, command: str = "verify") -> dict:
        rec = {
            "command": command,
            "id": self.id,
            "params": self.binding.to_json(),
            "nq": self.nq,
            "nt": self.nt,
            "outcome": self.outcome,
            "millis": round(self.millis, 3),
        }
        if self.mismatch is not None:
            rec["mismatch"] = self.mismatch
        if self.notes:
            rec["notes"] = list(self.notes)
        return rec


def mismatch_record(spec: VarSpec, mm: Mismatch, left: str, right: str) -> dict:
    return {
        "monomial": dict(zip(spec.names, mm.exponents)),
        "exponents": list(mm.exponents),
        "sides": [left, right],
        "left": scalar_to_json(mm.left),
        "right": scalar_to_json(mm.right),
    }


class Registry:
    def __init__(self):
        self._entries: dict[str, IdentityDescriptor] = {}

    def add(self, desc: IdentityDescriptor) -> IdentityDescriptor:
        if desc.id in self._entries:
            raise ValueError(f"duplicate identity id {desc.id!r}")
        self._entries[desc.id] = desc
        return desc

    def get(self, ident: str) -> IdentityDescriptor:
        try:
            return self._entries[ident]
        except KeyError:
            raise KeyError(f"unknown identity {ident!r}") from None

    def __contains__(self, ident):
        return ident in self._entries

    def ids(self) -> list:
        return list(self._entries)

    def all(self) -> list:
        return list(self._entries.values())


REGISTRY = Registry()


def _resolve(ident_or_desc) -> IdentityDescriptor:
    if isinstance(ident_or_desc, IdentityDescriptor):
        return ident_or_desc
    from . import catalogue  # noqa: F401  (populates the registry)
    return REGISTRY.get(ident_or_desc)


def list_identities() -> list:
    from . import catalogue  # noqa: F401
    return REGISTRY.all()


def get_identity(ident: str) -> IdentityDescriptor:
    return _resolve(ident)


def build_side(ident, side: str, binding: ParamBinding) -> Series:
    desc = _resolve(ident)
    series = desc.builder(side)(binding)
    if series.spec != binding.spec:
        series = series.lift(binding.spec)
    return series


def verify_identity(ident, binding: ParamBinding, overrides: Mapping | None = None) -> VerificationReport:
    """Build every side and compare each against the first, monomial by monomial.

    ``overrides`` maps side names to replacement series or to functions that
    transform the built series; it exists to exercise error localisation.
    """
    desc = _resolve(ident)
    overrides = dict(overrides or {})
    start = time.perf_counter()
    built = []
    for name, _ in desc.sides:
        s = build_side(desc, name, binding)
        if name in overrides:
            o = overrides[name]
            s = o(s) if callable(o) else o
        built.append((name, s))
    first_name, first = built[0]
    mismatch = None
    best = None
    for name, s in built[1:]:
        mm = series_compare(first, s)
        if mm is not None:
            key = (sum(mm.exponents), mm.exponents)
            if best is None or key < best:
                best = key
                mismatch = mismatch_record(binding.spec, mm, first_name, name)
    millis = (time.perf_counter() - start) * 1000
    report = VerificationReport(desc.id, binding, "pass" if mismatch is None else "fail",
                                mismatch, millis, expected_fail=desc.expected_fail)
    if any(v is not FORMAL and isinstance(v, type(mpq(0))) and v.denominator != 1
           for k, v in binding.params.items() if k in ("alpha",)):
        report.notes.append("non-integer alpha: the complex-alpha statement is sampled at a rational point")
    if desc.expected_fail:
        if mismatch is None:
            report.notes.append("review: expected a discrepancy but all retained coefficients agree")
        else:
            report.notes.append("expected discrepancy observed")
    return report


def default_param_suite(ident) -> list:
    """Bindings for the standard regression run, cycling q-order tiers 20/30/40."""
    desc = _resolve(ident)
    tiers = (20, 30, 40)
    out = []
    for i, params in enumerate(desc.suite):
        nq = tiers[i % len(tiers)]
        out.append(desc.bind(params, nq, nq))
    return out
