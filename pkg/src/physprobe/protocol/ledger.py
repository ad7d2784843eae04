"""Budget accounting for an episode.

The ledger never goes negative: a charge that would overdraw raises
InsufficientBudget and leaves the balance untouched.  Every accepted charge
is recorded so a transcript can be audited after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ArgumentError, InsufficientBudget


@dataclass(frozen=True)
class LedgerEntry:
    time: float
    amount: float
    label: str


@dataclass
class BudgetLedger:
    total: float
    entries: list = field(default_factory=list)

    def __post_init__(self):
        if self.total < 0:
            raise ArgumentError(f"budget must be >= 0, got {self.total}")

    @property
    def spent(self) -> float:
        return sum(e.amount for e in self.entries)

    @property
    def remaining(self) -> float:
        return self.total - self.spent

    def can_afford(self, amount: float) -> bool:
        return amount <= self.remaining

    def charge(self, amount: float, time: float, label: str) -> float:
        """Record a charge and return the new remaining balance."""
        if amount < 0:
            raise ArgumentError(f"charge must be >= 0, got {amount}")
        if amount > self.remaining:
            raise InsufficientBudget(
                f"charge {amount} exceeds remaining budget {self.remaining}"
            )
        self.entries.append(LedgerEntry(time=time, amount=amount, label=label))
        return self.remaining
