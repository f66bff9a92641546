"""Shared fixtures: a small key-value store library spec.

The kv library is hand-written so tests never depend on the synthetic
spec generator they may be testing. It has a connected core (handle
types flowing between open/close/put/get/del and the iterator trio) plus
one deliberately isolated API (kv_sync) that shares no type with anyone.
"""

import json

import pytest

from fuzzmill.model import (
    ApiFunction,
    ImplicitConstraint,
    LibrarySpec,
    Parameter,
    normalize_type,
)


def _api(name: str, return_type: str, params: list[tuple[str, str]], signature: str = ""):
    return ApiFunction(
        name=name,
        signature=signature or f"{return_type} {name}(...)",
        return_type=normalize_type(return_type),
        parameters=tuple(Parameter(name=n, type=normalize_type(t)) for n, t in params),
    )


KV_APIS = (
    _api("kv_open", "kv_t*", [("path", "const char*")]),
    _api("kv_close", "void", [("db", "kv_t*")]),
    _api("kv_put", "int", [("db", "kv_t*"), ("key", "const char*"), ("value", "const char*")]),
    _api("kv_get", "const char*", [("db", "kv_t*"), ("key", "const char*")]),
    _api("kv_del", "int", [("db", "kv_t*"), ("key", "const char*")]),
    _api("kv_iter_new", "kv_iter*", [("db", "kv_t*")]),
    _api("kv_iter_next", "int", [("it", "kv_iter*")]),
    _api("kv_iter_free", "void", [("it", "kv_iter*")]),
    # Shares no parameter/return type with any other API.
    _api("kv_sync", "void", [("flags", "unsigned")]),
)

KV_IMPLICIT = (
    ImplicitConstraint(kind="imply", first="kv_put", second="kv_open"),
    ImplicitConstraint(kind="imply", first="kv_iter_next", second="kv_iter_new"),
    ImplicitConstraint(kind="conflict", first="kv_del", second="kv_iter_next"),
)


@pytest.fixture
def kv_spec() -> LibrarySpec:
    return LibrarySpec(library_name="kvstore", apis=KV_APIS, implicit=KV_IMPLICIT)


@pytest.fixture
def kv_spec_no_constraints() -> LibrarySpec:
    return LibrarySpec(library_name="kvstore", apis=KV_APIS, implicit=())


def kv_spec_document() -> dict:
    return {
        "library": "kvstore",
        "apis": [
            {
                "name": a.name,
                "signature": a.signature,
                "return_type": a.return_type.spelling(),
                "params": [{"name": p.name, "type": p.type.spelling()} for p in a.parameters],
            }
            for a in KV_APIS
        ],
        "implicit": [
            {"kind": c.kind, "first": c.first, "second": c.second} for c in KV_IMPLICIT
        ],
        "source_root": None,
    }


@pytest.fixture
def kv_spec_file(tmp_path):
    path = tmp_path / "kvstore.json"
    path.write_text(json.dumps(kv_spec_document()))
    return path
