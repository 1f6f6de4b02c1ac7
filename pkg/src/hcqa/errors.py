"""Typed exceptions shared across the pipeline."""


class HcqaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HcqaError):
    """Malformed input file (CoNLL-U or bracketed tree).

    Carries the 1-based line number and, for bracket streams, a character
    offset so callers can point at the exact spot.
    """

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"offset {offset}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class StructureError(HcqaError):
    """Well-formed file but inconsistent structure (cycles, bad spans, misalignment)."""


class DecompositionError(HcqaError):
    """No decomposition exists, e.g. a question without any key triple."""


class PlanningError(HcqaError):
    """Query planning failed, e.g. no joinable slot pair on an edge."""


class ExecutionError(HcqaError):
    """Plan execution failed, e.g. operator applied to incompatible answer sets."""


class ContractViolation(HcqaError):
    """An internal invariant was violated by the caller (programming error)."""
