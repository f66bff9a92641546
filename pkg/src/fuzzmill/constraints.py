"""Validity and rationality rules for API groups, plus a group enumerator.

A group is *valid* when every member shares a type-level dependency with
some other member: a parameter type of one matching a parameter or return
type of another (bare ``void`` never matches). A valid group is *rational*
when it additionally satisfies every imply/conflict constraint. The
enumerator streams all valid and rational groups within a size range,
deterministically for a fixed seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .model import ApiGroup, ImplicitConstraint, LibrarySpec, TypeName, UnknownApiError

DEFAULT_MAX_GROUP_LEN = 5


@dataclass(frozen=True)
class DependencyIndex:
    """Type-keyed lookup tables over a spec's APIs.

    ``by_param_type`` maps each (non-void) type to the APIs taking it as a
    parameter; ``by_return_type`` maps each type to the APIs returning it.
    Rebuilding from the same spec yields equal maps.
    """

    spec: LibrarySpec
    loose_pointer_match: bool = False
    by_param_type: dict[TypeName, frozenset[str]] = field(init=False, compare=False)
    by_return_type: dict[TypeName, frozenset[str]] = field(init=False, compare=False)

    def __post_init__(self):
        params: dict[TypeName, set[str]] = {}
        returns: dict[TypeName, set[str]] = {}
        for api in self.spec.apis:
            for t in api.parameter_types:
                params.setdefault(self._key(t), set()).add(api.name)
            if not api.return_type.is_void:
                returns.setdefault(self._key(api.return_type), set()).add(api.name)
        object.__setattr__(
            self, "by_param_type", {t: frozenset(s) for t, s in params.items()}
        )
        object.__setattr__(
            self, "by_return_type", {t: frozenset(s) for t, s in returns.items()}
        )

    def _key(self, t: TypeName) -> TypeName:
        if self.loose_pointer_match and not t.is_void:
            return TypeName(t.base, 0)
        return t

    def _keys_for(self, name: str) -> tuple[list[TypeName], TypeName | None]:
        api = self.spec.api(name)
        param_keys = [self._key(t) for t in api.parameter_types if not t.is_void]
        return_key = None if api.return_type.is_void else self._key(api.return_type)
        return param_keys, return_key

    def neighbors(self, name: str) -> frozenset[str]:
        """All APIs sharing any dependency clause with ``name``."""
        param_keys, return_key = self._keys_for(name)
        linked: set[str] = set()
        for t in param_keys:
            linked |= self.by_return_type.get(t, frozenset())
            linked |= self.by_param_type.get(t, frozenset())
        if return_key is not None:
            linked |= self.by_param_type.get(return_key, frozenset())
        linked.discard(name)
        return frozenset(linked)


def depends(f: str, rest: Iterable[str], index: DependencyIndex) -> bool:
    """True when ``f`` is type-linked to some member of ``rest``.

    Three clauses: a parameter type of ``f`` equals a return type in
    ``rest``, or equals a parameter type in ``rest``, or the return type of
    ``f`` equals a parameter type in ``rest``.
    """
    rest = set(rest)
    if f in rest:
        raise ValueError(f"{f!r} must not be in its own rest set")
    if not index.spec.has_api(f):
        raise UnknownApiError(f)
    for name in rest:
        if not index.spec.has_api(name):
            raise UnknownApiError(name)
    return bool(index.neighbors(f) & rest)


def sat_explicit(group: ApiGroup, index: DependencyIndex) -> bool:
    """True when every member depends on the rest of the group.

    Singletons always fail: the rest set is empty, so no dependency can
    hold.
    """
    members = group.members
    for f in members:
        if not depends(f, members - {f}, index):
            return False
    return True


def sat_implicit(group: ApiGroup, constraints: Iterable[ImplicitConstraint]) -> bool:
    """True when the group meets every imply/conflict constraint.

    ``imply(f1, f2)`` is material implication (vacuous when ``f1`` is
    absent); ``conflict(f1, f2)`` is symmetric co-occurrence exclusion.
    """
    for c in constraints:
        if c.kind == "imply":
            if c.first in group and c.second not in group:
                return False
        elif c.kind == "conflict":
            if c.first in group and c.second in group:
                return False
    return True


def enumerate_groups(
    spec: LibrarySpec,
    size_range: tuple[int, int] = (2, DEFAULT_MAX_GROUP_LEN),
    cap: int | None = None,
    order_seed: int = 0,
    check_explicit: bool = True,
    check_implicit: bool = True,
    loose_pointer_match: bool = False,
) -> Iterator[ApiGroup]:
    """Stream valid and rational API groups of sizes in ``size_range``.

    Enumeration walks subsets over a seed-shuffled API order, pruning
    branches that cannot repair an isolated member, so only a prefix of a
    potentially huge space is materialized. No duplicates are produced and
    the order is deterministic for a fixed seed. ``cap`` bounds the stream,
    not any precomputation; callers may pull more later with a fresh call.

    Disabling both checks degenerates to plain subset enumeration (used for
    combinatorial accounting), in which case sizes below 2 are permitted.
    """
    lo, hi = size_range
    min_allowed = 0 if not check_explicit else 2
    if lo < min_allowed or lo > hi:
        raise ValueError(f"invalid size range {size_range}")
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1")

    order = sorted(spec.api_names)
    random.Random(order_seed).shuffle(order)
    index = DependencyIndex(spec, loose_pointer_match=loose_pointer_match)
    neighbor_sets = {name: index.neighbors(name) for name in order}
    if check_explicit:
        # APIs linked to nothing can never appear in a satisfying group.
        order = [n for n in order if neighbor_sets[n]]
    position = {name: i for i, name in enumerate(order)}
    constraints = spec.implicit if check_implicit else ()

    emitted = 0

    def emit(members: tuple[str, ...]) -> Iterator[ApiGroup]:
        nonlocal emitted
        group = ApiGroup(frozenset(members))
        if constraints and not sat_implicit(group, constraints):
            return
        emitted += 1
        yield group

    def extend(members: tuple[str, ...], start: int) -> Iterator[ApiGroup]:
        if cap is not None and emitted >= cap:
            return
        size = len(members)
        if size >= lo:
            if not check_explicit:
                yield from emit(members)
            else:
                chosen = set(members)
                if all(neighbor_sets[m] & chosen for m in members):
                    yield from emit(members)
        if size == hi:
            return
        for i in range(start, len(order)):
            if cap is not None and emitted >= cap:
                return
            candidate = order[i]
            if check_explicit and members:
                chosen = set(members) | {candidate}
                lonely = [m for m in chosen if not (neighbor_sets[m] & (chosen - {m}))]
                if len(members) + 1 == hi:
                    # Full size reached: isolated members can no longer be fixed.
                    if lonely:
                        continue
                else:
                    # Prune branches where an isolated member has no possible
                    # partner among the APIs still ahead in the order.
                    dead = any(
                        not any(position.get(n, -1) > i for n in neighbor_sets[m])
                        for m in lonely
                    )
                    if dead:
                        continue
            yield from extend(members + (candidate,), i + 1)

    yield from extend((), 0)
