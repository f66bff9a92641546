"""String-pattern taxonomy for driver generation failures.

Compiler and environment diagnostics are bucketed into six groups:

  G1  corrupted code (incomplete or unbalanced output)
  G2  language-basics violations (redefinition, access control, ambiguity)
  G3  references to non-existing identifiers
  G4  type errors
  G5  token-limit overruns (diagnostics too large for the text client)
  G6  out-of-space signals from the execution environment

Classification is a first-match substring scan in fixed G1 -> G6 order,
so a diagnostic hitting several groups lands in the lowest-numbered one.
"""

from __future__ import annotations

from dataclasses import dataclass

G1_CORRUPTED = "G1_corrupted"
G2_LANGUAGE_BASICS = "G2_language_basics"
G3_NONEXISTING_IDENTIFIER = "G3_nonexisting_identifier"
G4_TYPE_ERROR = "G4_type_error"
G5_TOKEN_LIMIT = "G5_token_limit"
G6_OUT_OF_SPACE = "G6_out_of_space"
UNKNOWN = "unknown"

CATEGORY_ORDER = (
    G1_CORRUPTED,
    G2_LANGUAGE_BASICS,
    G3_NONEXISTING_IDENTIFIER,
    G4_TYPE_ERROR,
    G5_TOKEN_LIMIT,
    G6_OUT_OF_SPACE,
)

# Marker emitted by the executor when a driver blows its directory quota.
OUT_OF_SPACE_SIGNAL = "fuzzmill: working directory quota exceeded"

G1_PATTERNS = (
    "is an abstract class",
    "error: no viable conversion from",
    "error: variable has incomplete type",
    "error: expected '}'",
    "error: expected ')'",
    "error: expected ';' after expression",
    "error: expected expression",
    "error: expected '>'",
    "error: extraneous closing brace",
    "named in nested name specifier",
    "error: a type specifier is required for all declarations",
    "error: C++ requires a type specifier",
    "error: expected unqualified-id",
    "error: extraneous ')' before ';'",
    "error: variable declaration in condition cannot have a parenthesized initializer",
    "does not name a template but is followed by template arguments",
    "error: templates must have C++ linkage",
    "tag to refer to type",
    "does not refer to a value",
)

G2_PATTERNS = (
    "multiple definition of",
    "error: calling a protected constructor",
    "error: attempt to use a deleted function",
    "error: overload resolution selected deleted operator",
    "cannot be implicitly captured in a lambda with no capture-default specified",
    "error: redefinition of",
    "discards qualifiers",
    "error: invalid application of",
    "error: cannot jump from this goto statement to its label",
    "is ambiguous",
    "error: function definition is not allowed here",
    "has a different language linkage",
    "error: typedef redefinition with different types",
    "error: illegal initializer",
    "error: excess elements in scalar initializer",
    "error: call to non-static member function",
    "is a private member of",
    "error: multiple overloads of",
    "is a protected member of",
    "error: call to implicitly-deleted default constructor of",
    "error: reference to non-static member function",
    "error: expression is not assignable",
    "error: call to implicitly-deleted",
    "could not bind to an rvalue of type",
    "is neither visible in the template definition nor found by argument-dependent lookup",
    "error: ambiguous conversion",
    "error: no viable overloaded",
    "error: calling a private",
    "error: allocating an object of abstract class type",
    "is a pointer; did you mean to use",
    "error: only virtual member functions",
    "error: cannot jump from",
    "error: cannot delete",
    "does not provide a call operator",
    "error: excess elements in struct initializer",
    "error: taking the address of a temporary objec",
    "used in function with fixed args",
    "error: reference to overloaded function could not be resolved",
    "variables must have global storage",
    "conflicts with typedef of the same name",
    "error: call to deleted",
    "error: cannot create a non-constant pointer to member function",
)

G3_PATTERNS = (
    "no matching function for call to",
    "error: use of undeclared identifier",
    "undefined reference to",
    "error: no member named",
    "no matching constructor for initialization",
    "error: no matching member",
    "error: field designator",
)

G4_PATTERNS = (
    "error: no type named",
    "error: unknown type name",
    "invalid operands to binary expression",
    "error: unexpected type name",
    "error: member reference base type",
    "error: cannot initialize a",
    "error: reinterpret_cast from",
    "error: member access into",
    "error: incompatible integer to pointer conversion",
    "from incompatible type",
    "error: cast from pointer to smaller type",
    "error: incompatible pointer types",
    "is not a function or function pointe",
    "error: non-constant-expression cannot be narrowed from type",
    "error: invalid use of incomplete type",
    "error: cannot cast from type",
    "has incompatible initializer of type",
    "error: const_cast from",
    "error: static_cast from",
    "cannot be narrowed to",
    "error: invalid argument type",
    "error: incompatible pointer to integer conversion",
    "error: too few arguments to function call",
    "error: invalid range expression of type",
    "s not a pointer; did you mean to use",
    "error: conflicting types",
    "error: non-const lvalue reference to typ",
    "error: no matching conversion for",
    "error: too many arguments to function call",
    "error: arithmetic on a pointer",
    "error: comparison between",
    "error: C-style cast from",
    "error: incompatible operand types",
    "could not bind to an lvalue of type",
    "error: cannot take the address of an rvalue of type",
    "error: too many arguments provided",
    "error: cannot initialize an",
    "is not assignable",
    "error: functional-style cast",
    "must match previous return type",
    "error: cannot compile this lambda conversion to variadic function yet",
    "is not contextually convertible",
    "cannot be referenced with a struct specifier",
    "error: cannot convert",
    "error: indirection requires pointer operand",
    "error: functions that differ only in their return type cannot be overloaded",
)

# G5/G6 have no compiler-message table of their own; they are recognized by
# client- and environment-side signals.
G5_PATTERNS = (
    "maximum context length",
    "token limit exceeded",
    "reduce the length of the messages",
)

G6_PATTERNS = (
    "No space left on device",
    "disk quota exceeded",
    OUT_OF_SPACE_SIGNAL,
)

PATTERNS_BY_CATEGORY = {
    G1_CORRUPTED: G1_PATTERNS,
    G2_LANGUAGE_BASICS: G2_PATTERNS,
    G3_NONEXISTING_IDENTIFIER: G3_PATTERNS,
    G4_TYPE_ERROR: G4_PATTERNS,
    G5_TOKEN_LIMIT: G5_PATTERNS,
    G6_OUT_OF_SPACE: G6_PATTERNS,
}


@dataclass(frozen=True)
class FailureCategory:
    tag: str
    matched_pattern: str | None = None


def classify_failure(diagnostics: str, token_budget: int | None = None) -> FailureCategory:
    """Assign a diagnostic text to its first matching category.

    Total function: anything unmatched is ``unknown``. When ``token_budget``
    is given, diagnostics longer than the budget classify as G5 even without
    a pattern hit (overlong link errors are exactly the token-limit case).
    """
    for tag in CATEGORY_ORDER:
        for pattern in PATTERNS_BY_CATEGORY[tag]:
            if pattern in diagnostics:
                return FailureCategory(tag=tag, matched_pattern=pattern)
    if token_budget is not None and len(diagnostics) > token_budget:
        return FailureCategory(tag=G5_TOKEN_LIMIT, matched_pattern=None)
    return FailureCategory(tag=UNKNOWN)
