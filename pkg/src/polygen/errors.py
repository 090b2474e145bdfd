"""Exception hierarchy shared by every polygen module."""

from __future__ import annotations


class PolygenError(Exception):
    """Base class for all library errors."""


class InputError(PolygenError, ValueError):
    """Malformed or invalid user input (files, flags, specs, words)."""


class WordSyntaxError(InputError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class PreconditionError(PolygenError, ValueError):
    """An operation was called outside its documented domain."""


class ConditionViolation(PreconditionError):
    """A hypothesis of the lifting theorem fails for the supplied data.

    ``clause`` names the violated condition (``"fox-singular"``,
    ``"infinite-index"``, ``"dp-exceeds-k"``, ``"word-not-in-V"``, ...).
    """

    def __init__(self, clause: str, message: str):
        super().__init__(f"[{clause}] {message}")
        self.clause = clause


class BudgetExhausted(PolygenError):
    """An embedded finite search ran out of budget before finishing."""


class CertificateError(PolygenError, AssertionError):
    """An internally produced certificate failed re-verification.

    This signals a bug; it must never be raised on valid input.
    """
