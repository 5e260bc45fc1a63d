"""Enumeration and memory budgets.

Defaults: 10^9 tuples, 8 GiB. Overridable through the environment
(DIAG_ARCS_BUDGET_TUPLES, DIAG_ARCS_BUDGET_BYTES); explicit arguments
always take precedence over the environment.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_TUPLES = 10**9
DEFAULT_BYTES = 8 * 1024**3

ENV_TUPLES = "DIAG_ARCS_BUDGET_TUPLES"
ENV_BYTES = "DIAG_ARCS_BUDGET_BYTES"


@dataclass(frozen=True)
class Budget:
    tuples: int = DEFAULT_TUPLES
    bytes: int = DEFAULT_BYTES

    def check_tuples(self, needed: int, what: str, hint: str = "") -> None:
        from .errors import BudgetError

        if needed > self.tuples:
            msg = f"{what}: {needed} tuples exceed budget {self.tuples}"
            if hint:
                msg += f" ({hint})"
            raise BudgetError(msg)

    def check_bytes(self, needed: int, what: str) -> None:
        from .errors import BudgetError

        if needed > self.bytes:
            raise BudgetError(
                f"{what}: ~{needed} bytes exceed memory budget {self.bytes}"
            )


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        from .errors import InputError

        raise InputError(f"{name} must be an integer, got {raw!r}")
    if value <= 0:
        from .errors import InputError

        raise InputError(f"{name} must be positive, got {value}")
    return value


def default_budget(tuples: int | None = None, mem_bytes: int | None = None) -> Budget:
    """Resolve the effective budget: explicit args > env vars > defaults."""
    if tuples is None:
        tuples = _env_int(ENV_TUPLES, DEFAULT_TUPLES)
    if mem_bytes is None:
        mem_bytes = _env_int(ENV_BYTES, DEFAULT_BYTES)
    return Budget(tuples=tuples, bytes=mem_bytes)
