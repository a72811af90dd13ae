"""The classical (fully deterministic) elimination game.

Three independent computations of the survivor's position are provided --
the halving recurrence, the closed form ``2l + 1`` with ``N = 2^m + l``,
and a cyclic rotation of the binary digits -- together with the exact
power-series expansion whose coefficients reproduce the survivor sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "DeterministicSurvivor",
    "survivor_recurrence",
    "survivor_closed_form",
    "survivor_binary_rotation",
    "survivor_sequence",
    "generating_series_coefficients",
]


@dataclass(frozen=True)
class DeterministicSurvivor:
    """Survivor of the deterministic game among ``n_participants`` people.

    ``survivor_zero_based`` is the label in 0..N-1; ``survivor_one_based``
    is the same position counted from 1 (always odd).
    """

    n_participants: int
    survivor_zero_based: int
    survivor_one_based: int


def _require_positive(n: int) -> None:
    if n < 1:
        raise DomainError(f"participant count must be >= 1, got {n}")


def _result(n: int, one_based: int) -> DeterministicSurvivor:
    return DeterministicSurvivor(n, one_based - 1, one_based)


# Cache for the halving chain N, N//2, N//4, ...; the chain has O(log N)
# new entries per query, so the cache stays small even for huge N.
_chain_cache: dict[int, int] = {1: 1}


def survivor_recurrence(n: int) -> DeterministicSurvivor:
    """Survivor via ``b(N) = 2 b(N//2) - (-1)^N`` with ``b(1) = 1``.

    Computed top-down with memoization over the halving chain, never by
    naive exponential recursion.
    """
    _require_positive(n)
    chain = []
    m = n
    while m not in _chain_cache:
        chain.append(m)
        m //= 2
    for m in reversed(chain):
        _chain_cache[m] = 2 * _chain_cache[m // 2] + (1 if m % 2 else -1)
    return _result(n, _chain_cache[n])


def survivor_closed_form(n: int) -> DeterministicSurvivor:
    """Survivor via ``b = 2l + 1`` where ``N = 2^m + l`` with ``0 <= l < 2^m``."""
    _require_positive(n)
    high = 1 << (n.bit_length() - 1)
    return _result(n, 2 * (n - high) + 1)


def survivor_binary_rotation(n: int) -> DeterministicSurvivor:
    """Survivor via a one-position left cyclic rotation of N's binary digits."""
    _require_positive(n)
    digits = bin(n)[2:]
    return _result(n, int(digits[1:] + digits[0], 2))


def survivor_sequence(n_max: int, method: str = "recurrence") -> np.ndarray:
    """One-based survivors for all N in 1..n_max as an int64 array.

    ``method`` selects the computation: "recurrence" fills dyadic blocks
    bottom-up from the halving recurrence, "closed-form" vectorises the
    ``2l + 1`` formula, "rotation" rotates binary digits (scalar loop).
    """
    _require_positive(n_max)
    if method == "recurrence":
        b = np.zeros(n_max + 1, dtype=np.int64)
        b[1] = 1
        k = 1
        while 2**k <= n_max:
            idx = np.arange(2**k, min(2 ** (k + 1), n_max + 1), dtype=np.int64)
            b[idx] = 2 * b[idx >> 1] - (1 - 2 * (idx & 1))
            k += 1
        return b[1:]
    if method == "closed-form":
        idx = np.arange(1, n_max + 1, dtype=np.int64)
        if n_max >= 2**53:
            raise DomainError("vectorised closed form supports N < 2**53")
        _, exp = np.frexp(idx.astype(np.float64))
        high = np.int64(1) << (exp.astype(np.int64) - 1)
        return 2 * (idx - high) + 1
    if method == "rotation":
        return np.array(
            [survivor_binary_rotation(n).survivor_one_based for n in range(1, n_max + 1)],
            dtype=np.int64,
        )
    raise DomainError(f"unknown method {method!r}")


def _series_mul(a: list[int], b: list[int], max_degree: int) -> list[int]:
    out = [0] * (max_degree + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(min(len(b), max_degree + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def generating_series_coefficients(max_degree: int) -> list[int]:
    """Coefficients of x^0..x^max_degree of the survivor generating series.

    Expands ``1 + (1/(1-x)) * ((3x-1)/(1-x) - sum_{k>=1} 2^k x^(2^k))`` as a
    formal power series in exact integer arithmetic.  The coefficient of
    x^N equals the one-based survivor position for every N >= 1.
    """
    if max_degree < 1:
        raise DomainError(f"max_degree must be >= 1, got {max_degree}")
    d = max_degree
    geom = [1] * (d + 1)  # 1/(1-x)
    inner = _series_mul([-1, 3], geom, d)  # (3x-1)/(1-x)
    k = 1
    while 2**k <= d:
        inner[2**k] -= 2**k
        k += 1
    coeffs = _series_mul(inner, geom, d)
    coeffs[0] += 1
    return coeffs
