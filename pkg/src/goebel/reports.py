from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class VerdictReport:
    """Outcome of a finite verification run.

    ``counterexamples`` holds tuples starting with (k, l, n, p) where those
    apply; a failed report always carries at least one.
    """

    claim: str
    passed: bool
    counterexamples: list = field(default_factory=list)
    checked: int = 0
    parts: list["VerdictReport"] = field(default_factory=list)

    def __post_init__(self):
        if not self.passed and not self.counterexamples:
            raise ValueError("a failing report needs a counterexample")

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.claim} (checked {self.checked})"
        if self.counterexamples:
            line += f"; first counterexample {self.counterexamples[0]}"
        return line

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "passed": self.passed,
            "checked": self.checked,
            "counterexamples": [list(c) for c in self.counterexamples],
            "parts": [part.to_dict() for part in self.parts],
        }
