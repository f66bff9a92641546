"""Prompt assembly for constraint mining, driver generation, and repair.

Templates live as plain text files under ``fuzzmill/templates`` so wording
can be tuned without touching code. Builders fill in the placeholders and
enforce the structural rules: generation prompts list every member
signature, repair prompts truncate oversized diagnostics, and the retrieved
definition section disappears when nothing was retrieved.
"""

from __future__ import annotations

from importlib import resources

from .model import ApiGroup, LibrarySpec

DIAGNOSTIC_CHAR_BUDGET = 4_000

TRUNCATION_MARKER = "... [diagnostics truncated]"

DEFAULT_HINTS = (
    "Use the exact entry-point signature shown above; do not rename it or add a main().",
    "Derive every argument from the fuzz input bytes; never read files, clocks, or randomness.",
    "Check every return value before using the result, especially pointers.",
    "Release every resource you acquire: close handles, free buffers, destroy contexts.",
    "Do not write to the file system or the network.",
    "Avoid unbounded loops; bound every iteration by the input size.",
    "Call setup functions before the functions that depend on them.",
    "When casting input bytes to wider types, check that enough bytes remain first.",
    "Keep no state between invocations; every call must start from scratch.",
)


def load_template(name: str) -> str:
    return (resources.files("fuzzmill") / "templates" / name).read_text()


def build_constraint_prompt(header_text: str) -> str:
    """Constraint-analysis prompt around the library headers."""
    if not header_text.strip():
        raise ValueError("header text is empty")
    return load_template("constraint.txt").format(headers=header_text.rstrip())


def build_generation_prompt(
    spec: LibrarySpec,
    group: ApiGroup,
    hints: tuple[str, ...] = DEFAULT_HINTS,
) -> str:
    """Generation prompt naming the project, the group, and each signature."""
    if group.size == 0:
        raise ValueError("cannot build a prompt for an empty group")
    members = group.sorted_members()
    signatures = "\n".join(spec.api(name).signature for name in members)
    hint_block = "\n".join(f"{i}. {hint}" for i, hint in enumerate(hints, start=1))
    return load_template("generation.txt").format(
        project=spec.library_name,
        group=", ".join(members),
        signature=signatures,
        hints=hint_block,
    )


def build_repair_prompt(
    driver_text: str,
    diagnostics: str,
    retrieved: list[str],
    char_budget: int = DIAGNOSTIC_CHAR_BUDGET,
) -> str:
    """Repair prompt with error excerpt, retrieved definitions, old driver.

    Diagnostics keep their head up to ``char_budget`` characters; compiler
    output front-loads the root cause, so the tail is the part to drop.
    """
    if not diagnostics.strip():
        raise ValueError("diagnostics are empty")
    excerpt = diagnostics
    if len(excerpt) > char_budget:
        excerpt = excerpt[:char_budget].rstrip() + "\n" + TRUNCATION_MARKER
    if retrieved:
        target = "## Target definitions\n" + "\n\n".join(retrieved) + "\n\n"
    else:
        target = ""
    return load_template("repair.txt").format(
        diagnostics=excerpt,
        target=target,
        driver=driver_text,
    )
