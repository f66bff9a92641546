"""Canonical data model for a library under test.

Everything downstream (constraint solving, scheduling, driver generation)
consumes the types in this module: API functions with normalized type
spellings, usage-convention constraints between API pairs, and API groups.
All types are immutable after construction and safe to share across tasks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class SpecError(Exception):
    """Base class for library-spec loading and validation failures."""


class MalformedTypeError(SpecError):
    """Raised when a type spelling cannot be normalized."""


class SpecFormatError(SpecError):
    """Raised when a spec document violates the JSON schema.

    The message is path-qualified, e.g. ``apis[2].params[0].type: ...``.
    """


class SpecValidationError(SpecError):
    """Raised when a structurally well-formed document breaks an invariant."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class UnknownApiError(SpecError, KeyError):
    """Raised when an operation references an API name not in the spec."""


_CV_QUALIFIERS = {"const", "volatile"}


@dataclass(frozen=True)
class TypeName:
    """A canonicalized C/C++ type spelling: base text plus pointer depth."""

    base: str
    pointer_depth: int = 0

    def matches(self, other: TypeName, loose_pointer_match: bool = False) -> bool:
        """Type equality used by the dependency rules.

        Bare ``void`` never matches anything (otherwise every void-returning
        function would depend on every other). ``loose_pointer_match``
        additionally ignores pointer depth.
        """
        if self.is_void or other.is_void:
            return False
        if self.base != other.base:
            return False
        return loose_pointer_match or self.pointer_depth == other.pointer_depth

    @property
    def is_void(self) -> bool:
        return self.base == "void" and self.pointer_depth == 0

    def spelling(self) -> str:
        return self.base + "*" * self.pointer_depth


def normalize_type(raw: str) -> TypeName:
    """Canonicalize a raw C/C++ type spelling.

    Strips cv-qualifiers (``const``, ``volatile``) and reference sigils
    (``&``, ``&&``); each ``*`` increments pointer depth; whitespace is
    collapsed. Raises :class:`MalformedTypeError` on empty input.
    """
    if raw is None or not raw.strip():
        raise MalformedTypeError("empty type spelling")
    pointer_depth = raw.count("*")
    text = raw.replace("*", " ").replace("&", " ")
    tokens = [t for t in text.split() if t not in _CV_QUALIFIERS]
    base = " ".join(tokens)
    if not base:
        raise MalformedTypeError(f"type spelling {raw!r} has no base type")
    return TypeName(base=base, pointer_depth=pointer_depth)


VOID = TypeName("void", 0)


@dataclass(frozen=True)
class Parameter:
    name: str
    type: TypeName


@dataclass(frozen=True)
class ApiFunction:
    """One exported library function with its normalized type facts."""

    name: str
    signature: str
    return_type: TypeName
    parameters: tuple[Parameter, ...] = ()

    @property
    def parameter_types(self) -> tuple[TypeName, ...]:
        return tuple(p.type for p in self.parameters)


@dataclass(frozen=True)
class ImplicitConstraint:
    """A usage-convention relation between two APIs.

    ``imply``: a group containing ``first`` must also contain ``second``.
    ``conflict``: ``first`` and ``second`` must not co-occur (symmetric).
    """

    kind: str  # "imply" | "conflict"
    first: str
    second: str

    KINDS = ("imply", "conflict")


@dataclass(frozen=True)
class ApiGroup:
    """An order-insensitive set of API names intended for one driver."""

    members: frozenset[str]

    @staticmethod
    def of(*names: str) -> ApiGroup:
        return ApiGroup(frozenset(names))

    @property
    def size(self) -> int:
        return len(self.members)

    def sorted_members(self) -> list[str]:
        return sorted(self.members)

    def __contains__(self, name: str) -> bool:
        return name in self.members


@dataclass(frozen=True)
class LibrarySpec:
    """The library under test: APIs plus implicit constraints."""

    library_name: str
    apis: tuple[ApiFunction, ...]
    implicit: tuple[ImplicitConstraint, ...] = ()
    source_root: str | None = None
    _by_name: dict[str, ApiFunction] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_name", {a.name: a for a in self.apis})

    def api(self, name: str) -> ApiFunction:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownApiError(name) from None

    def has_api(self, name: str) -> bool:
        return name in self._by_name

    @property
    def api_names(self) -> list[str]:
        return [a.name for a in self.apis]


def validate_spec(spec: LibrarySpec) -> list[str]:
    """Return all invariant violations; empty list means the spec is sound.

    Violations are data, not errors: each entry names the offending element.
    """
    violations: list[str] = []
    seen: set[str] = set()
    for api in spec.apis:
        if not api.name:
            violations.append("api with empty name")
            continue
        if api.name in seen:
            violations.append(f"duplicate api: {api.name}")
        seen.add(api.name)
        param_names = [p.name for p in api.parameters]
        for pname in sorted({n for n in param_names if param_names.count(n) > 1}):
            violations.append(f"duplicate parameter {pname!r} in api: {api.name}")
        for t in (api.return_type, *api.parameter_types):
            if not t.base or t.base != t.base.strip():
                violations.append(f"malformed type {t.base!r} in api: {api.name}")
            elif any(tok in _CV_QUALIFIERS for tok in t.base.split()):
                violations.append(f"cv-qualified type {t.base!r} in api: {api.name}")
    for c in spec.implicit:
        if c.kind not in ImplicitConstraint.KINDS:
            violations.append(f"unknown constraint kind: {c.kind}")
        if c.first == c.second:
            violations.append(f"self-referential constraint on: {c.first}")
        for name in (c.first, c.second):
            if name not in seen:
                violations.append(f"unknown api in constraint: {name}")
    return violations


def _expect(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise SpecFormatError(f"{path}: {message}")


def _parse_api(entry: object, path: str, index: int) -> ApiFunction:
    _expect(isinstance(entry, dict), path, "expected an object")
    name = entry.get("name")
    _expect(isinstance(name, str) and bool(name), f"{path}.name", "expected a non-empty string")
    signature = entry.get("signature", "")
    _expect(isinstance(signature, str), f"{path}.signature", "expected a string")
    raw_return = entry.get("return_type")
    _expect(isinstance(raw_return, str), f"{path}.return_type", "expected a string")
    try:
        return_type = normalize_type(raw_return)
    except MalformedTypeError as exc:
        raise SpecFormatError(f"{path}.return_type: {exc}") from None
    raw_params = entry.get("params", [])
    _expect(isinstance(raw_params, list), f"{path}.params", "expected a list")
    params = []
    for i, p in enumerate(raw_params):
        ppath = f"{path}.params[{i}]"
        _expect(isinstance(p, dict), ppath, "expected an object")
        _expect(isinstance(p.get("type"), str), f"{ppath}.type", "expected a string")
        try:
            ptype = normalize_type(p["type"])
        except MalformedTypeError as exc:
            raise SpecFormatError(f"{ppath}.type: {exc}") from None
        pname = p.get("name") or f"arg{i}"
        _expect(isinstance(pname, str), f"{ppath}.name", "expected a string")
        params.append(Parameter(name=pname, type=ptype))
    return ApiFunction(
        name=name, signature=signature, return_type=return_type, parameters=tuple(params)
    )


def parse_library_spec(text: str) -> LibrarySpec:
    """Parse and validate a library-spec JSON document.

    Raises :class:`SpecFormatError` with a path-qualified message on schema
    violations and :class:`SpecValidationError` when invariants fail (e.g. a
    constraint names an API that does not exist).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"$: invalid JSON ({exc})") from None
    _expect(isinstance(doc, dict), "$", "expected a JSON object")
    library = doc.get("library")
    _expect(isinstance(library, str) and bool(library), "library", "expected a non-empty string")
    raw_apis = doc.get("apis", [])
    _expect(isinstance(raw_apis, list), "apis", "expected a list")
    apis = tuple(_parse_api(a, f"apis[{i}]", i) for i, a in enumerate(raw_apis))
    raw_implicit = doc.get("implicit", [])
    _expect(isinstance(raw_implicit, list), "implicit", "expected a list")
    implicit = []
    for i, c in enumerate(raw_implicit):
        path = f"implicit[{i}]"
        _expect(isinstance(c, dict), path, "expected an object")
        kind = c.get("kind")
        _expect(kind in ImplicitConstraint.KINDS, f"{path}.kind", "expected 'imply' or 'conflict'")
        for key in ("first", "second"):
            _expect(isinstance(c.get(key), str) and bool(c[key]), f"{path}.{key}",
                    "expected a non-empty string")
        implicit.append(ImplicitConstraint(kind=kind, first=c["first"], second=c["second"]))
    source_root = doc.get("source_root")
    _expect(source_root is None or isinstance(source_root, str), "source_root",
            "expected a string or null")
    spec = LibrarySpec(
        library_name=library,
        apis=apis,
        implicit=tuple(implicit),
        source_root=source_root,
    )
    violations = validate_spec(spec)
    if violations:
        raise SpecValidationError(violations)
    return spec


def load_library_spec(path) -> LibrarySpec:
    """Read and parse a library-spec JSON file."""
    with open(path, encoding="utf-8") as handle:
        return parse_library_spec(handle.read())


def save_library_spec(spec: LibrarySpec) -> str:
    """Serialize a spec back to its JSON document form (types re-spelled)."""
    doc = {
        "library": spec.library_name,
        "apis": [
            {
                "name": a.name,
                "signature": a.signature,
                "return_type": a.return_type.spelling(),
                "params": [{"name": p.name, "type": p.type.spelling()} for p in a.parameters],
            }
            for a in spec.apis
        ],
        "implicit": [
            {"kind": c.kind, "first": c.first, "second": c.second} for c in spec.implicit
        ],
        "source_root": spec.source_root,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
