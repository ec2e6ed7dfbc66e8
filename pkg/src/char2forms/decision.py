"""Tri-state decisions with replayable certificates.

Decision procedures in this library never bluff: a ZERO or NONZERO verdict
carries a :class:`Certificate` whose steps can be re-executed against the
library's own rules, and anything the bounded searches cannot settle comes
back UNKNOWN together with the log of what was tried.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Verdict(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNKNOWN = "unknown"

    def __str__(self) -> str:  # scenario reports print bare words
        return self.value


# The four certificate families. `kind` is one of these strings and the
# steps vocabulary below is what `replay` understands.
REWRITE_CHAIN = "RewriteChain"
RESIDUE_OBSTRUCTION = "ResidueObstruction"
VALUATION_OBSTRUCTION = "ValuationObstruction"
BRUTE_FORCE_WITNESS = "BruteForceWitness"


@dataclass(frozen=True)
class Step:
    """One certificate step: a named rule plus whatever data replays it."""

    rule: str
    data: dict[str, Any] = field(default_factory=dict)

    def describe(self) -> str:
        if not self.data:
            return self.rule
        parts = ", ".join(f"{k}={_short(v)}" for k, v in sorted(self.data.items()))
        return f"{self.rule}({parts})"


def _short(v: Any) -> str:
    s = str(v)
    return s if len(s) <= 60 else s[:57] + "..."


@dataclass(frozen=True)
class Certificate:
    kind: str
    steps: tuple[Step, ...] = ()

    def describe(self) -> list[str]:
        return [self.kind] + ["  " + s.describe() for s in self.steps]


@dataclass(frozen=True)
class Decision:
    """Verdict + certificate (for decided cases) or reason log (for UNKNOWN)."""

    verdict: Verdict
    certificate: Certificate | None = None
    reason: str = ""
    log: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        raise TypeError(
            "Decision is tri-state; test `.verdict` explicitly "
            "(e.g. `d.verdict is Verdict.ZERO`)"
        )

    @property
    def is_zero(self) -> bool:
        return self.verdict is Verdict.ZERO

    @property
    def is_nonzero(self) -> bool:
        return self.verdict is Verdict.NONZERO

    @property
    def is_unknown(self) -> bool:
        return self.verdict is Verdict.UNKNOWN

    def describe(self) -> str:
        lines = [str(self.verdict)]
        if self.certificate is not None:
            lines += self.certificate.describe()
        if self.reason:
            lines.append("reason: " + self.reason)
        return "\n".join(lines)


def zero(kind: str, *steps: Step, reason: str = "") -> Decision:
    return Decision(Verdict.ZERO, Certificate(kind, tuple(steps)), reason)


def nonzero(kind: str, *steps: Step, reason: str = "") -> Decision:
    return Decision(Verdict.NONZERO, Certificate(kind, tuple(steps)), reason)


def unknown(reason: str, log=()) -> Decision:
    return Decision(Verdict.UNKNOWN, None, reason, tuple(log))
