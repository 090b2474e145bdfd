"""Search budgets for the embedded finite searches."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

from polygen.errors import BudgetExhausted

DEFAULT_SEED = 20080607
ENV_BUDGET_MS = "POLYGEN_BUDGET_MS"


def _env_ms() -> int | None:
    raw = os.environ.get(ENV_BUDGET_MS)
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value > 0 else None


@dataclass(frozen=True)
class Budget:
    """Limits for one search.

    ``max_checks`` bounds the number of candidate tuples tested (this is the
    deterministic limit); ``time_ms`` is a wall-clock cap, read from
    ``POLYGEN_BUDGET_MS`` when not given explicitly.
    """

    random_tries: int = 200
    max_checks: int = 200_000
    time_ms: int | None = field(default_factory=_env_ms)
    seed: int = DEFAULT_SEED

    def meter(self) -> "Meter":
        return Meter(self)


class Meter:
    """Counts checks against a :class:`Budget`."""

    def __init__(self, budget: Budget):
        self.budget = budget
        self.checks = 0
        self._deadline = (
            None if budget.time_ms is None else time.monotonic() + budget.time_ms / 1000.0
        )

    def tick(self, what: str = "search") -> None:
        self.checks += 1
        if self.checks > self.budget.max_checks:
            raise BudgetExhausted(f"{what}: more than {self.budget.max_checks} candidates")
        if self._deadline is not None and self.checks % 64 == 0 and time.monotonic() > self._deadline:
            raise BudgetExhausted(f"{what}: exceeded {self.budget.time_ms} ms")
