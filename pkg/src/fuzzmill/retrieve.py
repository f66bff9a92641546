"""Repair-context retrieval from compiler diagnostics.

When a generated driver fails to build, the diagnostics usually name the
identifier the text client got wrong: a misspelled function, an unknown
type, a bad field. Seven fixed regexes pull those identifiers out, and a
string-matching scan over the library sources returns the enclosing
definition of each one so the repair prompt can show the client what the
real declaration looks like.

Matching is exact: a captured identifier that never appears as a token in
the sources yields nothing rather than a fuzzy guess.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

MAX_SNIPPETS = 8

SOURCE_EXTENSIONS = (".h", ".hh", ".hpp", ".hxx", ".c", ".cc", ".cpp", ".cxx", ".inl")

EXTRACTION_PATTERNS = tuple(
    re.compile(p)
    for p in (
        r"error: no matching function for call to '([^']*)'",
        r"error: use of undeclared identifier '([^']*)'",
        r"error: use of undeclared identifier ([^']*); did you mean '([^']*)'\?",
        r"error: assigning to '([^']*)'(?: \(aka '[^']*'\))? from incompatible type "
        r"'[^']*'(?: \(aka '[^']*'\))?",
        r"error: unknown type name '([^']*)'",
        r"error: no member named '[^']*' in '([^']*)'",
        r"error: field designator '[^']*' does not refer to any field in type "
        r"'([^']*)'(?: \(aka '[^']*'\))?",
    )
)

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

_DECLARATOR_TAIL = re.compile(r"[A-Za-z0-9_*,\[\]\s]*")


def extract_identifiers(diagnostics: str) -> list[str]:
    """Captured identifiers from every diagnostic line, first-seen order."""
    seen: list[str] = []
    for line in diagnostics.splitlines():
        for pattern in EXTRACTION_PATTERNS:
            for match in pattern.finditer(line):
                for captured in match.groups():
                    if not captured:
                        continue
                    # Template or call spellings like "kv_put(int, char *)"
                    # reduce to their leading identifier.
                    head = _IDENTIFIER.match(captured.strip())
                    if head is None:
                        continue
                    name = head.group(0)
                    if name not in seen:
                        seen.append(name)
    return seen


def mask_comments_and_strings(text: str) -> str:
    """Blank out comments and string/char literals, preserving offsets.

    Replaced characters become spaces (newlines survive), so positions in
    the masked text map one-to-one onto the original.
    """
    out = list(text)
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
        elif ch == "/" and nxt == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (text[i] == "*" and i + 1 < n and text[i + 1] == "/"):
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = out[i + 1] = " "
                i += 2
        elif ch in "\"'":
            quote = ch
            out[i] = " "
            i += 1
            while i < n and text[i] != quote:
                if text[i] == "\\" and i + 1 < n:
                    out[i] = " "
                    i += 1
                if text[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


def _top_level_spans(masked: str) -> list[tuple[int, int]]:
    """Offsets of each top-level construct (declaration, function, type).

    A construct runs from the first non-whitespace character after the
    previous one to either a semicolon at brace depth zero or the matching
    closing brace of a top-level block (plus a trailing semicolon, so
    ``struct {...};`` stays whole).
    """
    spans: list[tuple[int, int]] = []
    n = len(masked)
    i = 0
    while i < n:
        while i < n and masked[i].isspace():
            i += 1
        if i >= n:
            break
        start = i
        depth = 0
        while i < n:
            ch = masked[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    i += 1
                    # Swallow a declarator tail such as "} KvHandle;" or
                    # "} g_table[4];" so typedefs stay in one piece.
                    j = i
                    while j < n and masked[j] not in "{};#()":
                        j += 1
                    if j < n and masked[j] == ";" and _DECLARATOR_TAIL.fullmatch(masked[i:j]):
                        i = j + 1
                    break
            elif ch == ";" and depth == 0:
                i += 1
                break
            elif ch == "#" and depth == 0 and i == start:
                # Preprocessor line: runs to the first unescaped newline.
                while i < n:
                    if masked[i] == "\n" and masked[i - 1] != "\\":
                        break
                    i += 1
                break
            i += 1
        spans.append((start, i))
    return spans


def _find_definition(text: str, identifier: str) -> str | None:
    masked = mask_comments_and_strings(text)
    token = re.compile(r"\b%s\b" % re.escape(identifier))
    hit = token.search(masked)
    if hit is None:
        return None
    for start, end in _top_level_spans(masked):
        if start <= hit.start() < end:
            return text[start:end].strip()
    return None


def iter_source_files(source_root: str | os.PathLike[str]) -> list[Path]:
    root = Path(source_root)
    found: list[Path] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            if name.endswith(SOURCE_EXTENSIONS):
                found.append(Path(dirpath) / name)
    return found


def retrieve_context(
    diagnostics: str,
    source_root: str | os.PathLike[str] | None,
    max_snippets: int = MAX_SNIPPETS,
) -> list[str]:
    """Definition snippets for every identifier named in the diagnostics.

    Files are visited in sorted order and the first file containing the
    identifier as an exact token wins. Unreadable or missing source roots
    retrieve nothing; repair then proceeds without context.
    """
    if source_root is None:
        return []
    root = Path(source_root)
    if not root.is_dir():
        return []
    identifiers = extract_identifiers(diagnostics)
    if not identifiers:
        return []
    files = iter_source_files(root)
    snippets: list[str] = []
    for identifier in identifiers:
        for path in files:
            try:
                text = path.read_text(errors="replace")
            except OSError:
                continue
            snippet = _find_definition(text, identifier)
            if snippet is not None:
                if snippet not in snippets:
                    snippets.append(snippet)
                break
        if len(snippets) >= max_snippets:
            break
    return snippets[:max_snippets]
