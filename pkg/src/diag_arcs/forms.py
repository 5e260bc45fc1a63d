"""Diagonal systems of forms and their scalar invariants.

A system is a tuple of exponents 1 <= k_1 < k_2 < ... < k_n together with
an n x s matrix of nonzero integer coefficients; component i evaluates to
sum_j u[i][j] * x_j**k[i]. Everything here is immutable after validation
and safe to share across workers.

Integer arithmetic is checked against a signed 128-bit range. Python ints
never wrap around, but the documented contract is "overflow is a hard
error", so the range check is enforced explicitly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InputError, OverflowLimitError, ValidationError

INT128_MAX = 2**127 - 1
INT128_MIN = -(2**127)


def checked_int128(value: int, context: str = "value") -> int:
    if value > INT128_MAX or value < INT128_MIN:
        raise OverflowLimitError(
            f"{context} = {value} leaves the signed 128-bit range"
        )
    return value


@dataclass(frozen=True)
class ExponentTuple:
    """Strictly increasing positive integer exponents."""

    k: tuple[int, ...]

    def __post_init__(self):
        if len(self.k) < 1:
            raise ValidationError("exponent tuple must have at least one entry")
        for i, ki in enumerate(self.k):
            if not isinstance(ki, int) or ki < 1:
                raise ValidationError(
                    f"exponent k[{i + 1}] = {ki!r} is not a positive integer"
                )
        for i in range(1, len(self.k)):
            if self.k[i] <= self.k[i - 1]:
                raise ValidationError(
                    "exponents not strictly increasing: "
                    f"k[{i}] = {self.k[i - 1]} followed by k[{i + 1}] = {self.k[i]}"
                )

    @property
    def n(self) -> int:
        return len(self.k)

    @property
    def max_degree(self) -> int:
        return self.k[-1]

    def __iter__(self):
        return iter(self.k)

    def __len__(self):
        return len(self.k)

    def __getitem__(self, i):
        return self.k[i]


@dataclass(frozen=True)
class TheoremConstants:
    """Scalar invariants attached to an exponent tuple.

    sigma is the sum of the exponents; eta0 and the two s-thresholds are
    kept as exact rationals / integers so tests never see float noise.
    """

    sigma: int
    eta0: Fraction
    s_min_thm1: int
    s_min_major: int


@dataclass(frozen=True)
class DiagonalSystem:
    k: ExponentTuple
    s: int
    u: tuple[tuple[int, ...], ...]
    name: str = ""
    _columns: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.s, int) or self.s < 1:
            raise ValidationError(f"number of variables s = {self.s!r} must be >= 1")
        n = self.k.n
        if len(self.u) != n:
            raise ValidationError(
                f"coefficient matrix has {len(self.u)} rows, expected n = {n}"
            )
        for i, row in enumerate(self.u):
            if len(row) != self.s:
                raise ValidationError(
                    f"row {i + 1} has {len(row)} entries, expected s = {self.s}"
                )
            for j, uij in enumerate(row):
                if not isinstance(uij, int):
                    raise ValidationError(
                        f"coefficient at ({i + 1},{j + 1}) is not an integer: {uij!r}"
                    )
                if uij == 0:
                    raise ValidationError(f"zero coefficient at ({i + 1},{j + 1})")
                checked_int128(uij, f"coefficient at ({i + 1},{j + 1})")
        cols = tuple(
            tuple(self.u[i][j] for i in range(n)) for j in range(self.s)
        )
        object.__setattr__(self, "_columns", cols)

    @property
    def n(self) -> int:
        return self.k.n

    def coefficient_column(self, j: int) -> tuple[int, ...]:
        """Column u_j = (u_{1,j}, ..., u_{n,j}), 1-based j."""
        if not 1 <= j <= self.s:
            raise InputError(f"column index {j} out of range 1..{self.s}")
        return self._columns[j - 1]

    @property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        return self._columns

    def sup_norm(self) -> int:
        return max(abs(uij) for row in self.u for uij in row)

    def evaluate(self, x: Sequence[int]) -> tuple[int, ...]:
        return evaluate_forms(self, x)

    def constants(self) -> TheoremConstants:
        return constants(self)

    def to_json_dict(self) -> dict:
        return {"name": self.name, "k": list(self.k.k), "u": [list(r) for r in self.u]}


def validate_system(raw) -> DiagonalSystem:
    """Validate a candidate system description.

    Accepts a mapping with keys "k" and "u" (and optional "name"), per the
    JSON schema {"name": str, "k": [int,...], "u": [[int,...],...]} with u
    row-major, or an existing DiagonalSystem (returned as-is).
    """
    if isinstance(raw, DiagonalSystem):
        return raw
    if not isinstance(raw, dict):
        raise InputError(f"system description must be a mapping, got {type(raw)}")
    unknown = set(raw) - {"name", "k", "u", "s"}
    if unknown:
        raise InputError(f"unknown keys in system description: {sorted(unknown)}")
    try:
        k_list = list(raw["k"])
        u_rows = [list(row) for row in raw["u"]]
    except KeyError as exc:
        raise InputError(f"system description missing key {exc}")
    except TypeError:
        raise InputError("'k' must be a list of integers and 'u' a list of rows")
    if not u_rows or not u_rows[0]:
        raise ValidationError("coefficient matrix must be non-empty")
    s = len(u_rows[0])
    if "s" in raw and raw["s"] != s:
        raise ValidationError(
            f"declared s = {raw['s']} does not match row length {s}"
        )
    k = ExponentTuple(tuple(int(v) if isinstance(v, int) else v for v in k_list))
    u = tuple(tuple(v if isinstance(v, int) else v for v in row) for row in u_rows)
    name = str(raw.get("name", ""))
    return DiagonalSystem(k=k, s=s, u=u, name=name)


def load_system(path) -> DiagonalSystem:
    """Load and validate a system from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read system file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}")
    return validate_system(raw)


def evaluate_forms(system: DiagonalSystem, x: Sequence[int]) -> tuple[int, ...]:
    """Evaluate all n forms at an integer point, exactly.

    Every intermediate term and every accumulated component is checked
    against the 128-bit signed range; leaving it raises, never wraps.
    """
    if len(x) != system.s:
        raise InputError(f"point has {len(x)} coordinates, expected s = {system.s}")
    for j, xj in enumerate(x):
        if not isinstance(xj, int):
            raise InputError(f"coordinate x[{j + 1}] = {xj!r} is not an integer")
    out = []
    for i, ki in enumerate(system.k):
        acc = 0
        row = system.u[i]
        for j in range(system.s):
            term = checked_int128(
                row[j] * x[j] ** ki, f"term u[{i + 1}][{j + 1}]*x^{ki}"
            )
            acc = checked_int128(acc + term, f"component {i + 1} accumulation")
        out.append(acc)
    return tuple(out)


def constants(system_or_k) -> TheoremConstants:
    """sigma(k), eta0 = 1/(n*k_n^2) and the two s-thresholds."""
    k = system_or_k.k if isinstance(system_or_k, DiagonalSystem) else system_or_k
    if not isinstance(k, ExponentTuple):
        k = ExponentTuple(tuple(k))
    n = k.n
    kn = k.max_degree
    return TheoremConstants(
        sigma=sum(k.k),
        eta0=Fraction(1, n * kn * kn),
        s_min_thm1=1 + kn * (1 + kn),
        s_min_major=(n + 1) * kn + 1,
    )


def coefficient_column(system: DiagonalSystem, j: int) -> tuple[int, ...]:
    return system.coefficient_column(j)


def sup_norm(system: DiagonalSystem) -> int:
    return system.sup_norm()
