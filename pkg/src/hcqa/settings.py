"""Extraction settings.

Each letter toggles one behaviour of the extraction pipeline:

  A  minimal noun phrases (same-level dependents only; without A the full
     constituency NP subtree is used as the argument span)
  B  quotation / expression spans become single noun phrases
  C  entity mentions become single noun phrases and pattern markers inside
     a mention are suppressed
  D  reformation of preposition chains whose tail is a named entity or number
  E  filtering of spurious appositives
  F  prepositional relations through any verb argument (not only noun-noun)
  G  noun compound pairing, adjacent-word approach
  H  noun compound pairing, rightmost-noun approach
"""

from __future__ import annotations

from dataclasses import dataclass

VALID_FLAGS = "ABCDEFGH"

# Default profile: all quality rules on, pairing approach II.
DEFAULT_SETTINGS_STRING = "ABCDEH"


@dataclass(frozen=True)
class SettingSet:
    """Immutable set of extraction flags."""

    flags: frozenset[str]

    def __contains__(self, flag: str) -> bool:
        return flag in self.flags

    def __str__(self) -> str:
        return "".join(sorted(self.flags))

    def with_flag(self, flag: str) -> "SettingSet":
        return SettingSet(self.flags | {flag})

    def without_flag(self, flag: str) -> "SettingSet":
        return SettingSet(self.flags - {flag})


def parse_settings(text: str) -> SettingSet:
    """Parse a settings string such as ``"ABCH"``.

    Order-insensitive; raises ValueError on unknown letters or duplicates.
    """
    seen = set()
    for ch in text:
        if ch not in VALID_FLAGS:
            raise ValueError(f"unknown setting {ch!r}; valid letters are {VALID_FLAGS}")
        if ch in seen:
            raise ValueError(f"duplicate setting {ch!r} in {text!r}")
        seen.add(ch)
    return SettingSet(frozenset(seen))


DEFAULT_SETTINGS = parse_settings(DEFAULT_SETTINGS_STRING)
