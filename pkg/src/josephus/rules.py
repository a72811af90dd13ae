"""Elimination rule descriptions.

Four rules act on a circle of participants labelled counterclockwise:

* ``DETERMINISTIC`` -- every knife holder stabs his right neighbour and
  passes the knife rightwards (the classical game).
* ``R1`` -- the holder keeps the previous stabbing direction with
  probability ``p`` and flips it otherwise; the knife follows the stab.
  The very first stab goes right with probability ``p``.
* ``R2`` -- memoryless: each holder stabs right with probability ``p``,
  left otherwise, and the knife follows the victim's side.
* ``R3`` -- two independent coins per step: the victim's side is right
  with probability ``p``; the knife then passes to the holder's right
  neighbour with probability ``q``, to his left neighbour otherwise.

No algebraic identification between rules is assumed here; coincidences
(for instance R1 and R2 at ``p = 1/2``) are established by tests only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


class RuleKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    R1 = "r1"
    R2 = "r2"
    R3 = "r3"


def _check_prob(value, name: str) -> None:
    if not 0 <= value <= 1:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class RuleSpec:
    """Which elimination process to run, with its Bernoulli parameters.

    ``p`` and ``q`` may be floats or exact ``Fraction``s; exact values are
    preserved so the enumeration oracle can work in rational arithmetic.
    """

    kind: RuleKind
    p: float | Fraction | None = None
    q: float | Fraction | None = None

    def __post_init__(self) -> None:
        if self.kind is RuleKind.DETERMINISTIC:
            if self.p is not None or self.q is not None:
                raise DomainError("deterministic rule carries no parameters")
            return
        if self.p is None:
            raise DomainError(f"rule {self.kind.value} requires parameter p")
        _check_prob(self.p, "p")
        if self.kind is RuleKind.R3:
            if self.q is None:
                raise DomainError("rule r3 requires parameter q")
            _check_prob(self.q, "q")
        elif self.q is not None:
            raise DomainError(f"rule {self.kind.value} carries no parameter q")

    @staticmethod
    def deterministic() -> "RuleSpec":
        return RuleSpec(RuleKind.DETERMINISTIC)

    @staticmethod
    def r1(p) -> "RuleSpec":
        return RuleSpec(RuleKind.R1, p=p)

    @staticmethod
    def r2(p) -> "RuleSpec":
        return RuleSpec(RuleKind.R2, p=p)

    @staticmethod
    def r3(p, q) -> "RuleSpec":
        return RuleSpec(RuleKind.R3, p=p, q=q)

    @property
    def p_float(self) -> float:
        return 1.0 if self.kind is RuleKind.DETERMINISTIC else float(self.p)

    @property
    def q_float(self) -> float:
        if self.kind is RuleKind.DETERMINISTIC:
            return 1.0
        if self.q is None:
            raise DomainError(f"rule {self.kind.value} has no parameter q")
        return float(self.q)

    @property
    def p_exact(self) -> Fraction:
        """Exact rational value of ``p`` (a float converts to its binary value)."""
        return Fraction(1) if self.kind is RuleKind.DETERMINISTIC else Fraction(self.p)

    @property
    def q_exact(self) -> Fraction:
        if self.kind is RuleKind.DETERMINISTIC:
            return Fraction(1)
        if self.q is None:
            raise DomainError(f"rule {self.kind.value} has no parameter q")
        return Fraction(self.q)

    def describe(self) -> str:
        if self.kind is RuleKind.DETERMINISTIC:
            return "deterministic"
        if self.kind is RuleKind.R3:
            return f"r3(p={float(self.p):g}, q={float(self.q):g})"
        return f"{self.kind.value}(p={float(self.p):g})"
