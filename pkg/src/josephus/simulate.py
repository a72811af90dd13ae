"""Faithful step-by-step simulation of the elimination processes.

Three consumers share one set of process semantics:

* ``step`` -- readable reference transition on an immutable ring, used by
  the exhaustive oracle and by tests;
* ``sample_survivor`` -- seeded single run on a doubly-linked ring
  (O(1) elimination per step);
* ``empirical_distribution`` -- the same dynamics vectorised across many
  samples at once, chunked to bound memory.

The two sampling engines consume identical per-sample uniform streams (see
``prng``), so a batch run reproduces single runs bit for bit; tests assert
this.  Coins are booleans: ``True`` is the probability-``p`` branch (and
the probability-``q`` branch for the knife coin of the two-coin rule).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import prng
from .distributions import Method, SurvivalDistribution
from .errors import DomainError, EnumerationCapError, InvalidStateError
from .rules import RuleKind, RuleSpec

__all__ = [
    "ProcessState",
    "SurvivorSample",
    "initial_state",
    "step",
    "run_path",
    "oracle_distribution",
    "sample_survivor",
    "empirical_distribution",
    "ORACLE_CAP_TWO_BRANCH",
    "ORACLE_CAP_FOUR_BRANCH",
]

ORACLE_CAP_TWO_BRANCH = 16
ORACLE_CAP_FOUR_BRANCH = 12

RIGHT = 1
LEFT = -1


@dataclass(frozen=True)
class ProcessState:
    """Live state of one elimination round.

    ``alive`` holds the original labels in counterclockwise order;
    ``direction`` is the previous stabbing direction (+1 right, -1 left),
    meaningful only for the direction-persistence rule and initialised
    Right (the first stab's p-branch targets participant 1).
    """

    rule: RuleSpec
    alive: tuple[int, ...]
    knife: int
    direction: int = RIGHT

    def __post_init__(self) -> None:
        if self.knife not in self.alive:
            raise InvalidStateError(f"knife holder {self.knife} is not alive")
        if self.direction not in (RIGHT, LEFT):
            raise InvalidStateError(f"direction must be +1 or -1, got {self.direction}")


@dataclass(frozen=True)
class SurvivorSample:
    """Outcome of one seeded run: who survived among N participants."""

    rule: RuleSpec
    n_participants: int
    survivor: int
    normalized_position: float
    rng_seed: int
    path_length: int
    stream_index: int = 0


def initial_state(rule: RuleSpec, n: int) -> ProcessState:
    if n < 1:
        raise DomainError(f"participant count must be >= 1, got {n}")
    return ProcessState(rule, tuple(range(n)), 0, RIGHT)


def _neighbor(alive: tuple[int, ...], label: int, direction: int) -> int:
    return alive[(alive.index(label) + direction) % len(alive)]


def step(
    state: ProcessState, coin_victim: bool, coin_knife: bool | None = None
) -> ProcessState:
    """Apply one elimination step and return the successor state.

    ``coin_victim`` is the p-branch indicator; ``coin_knife`` must be
    supplied exactly for the two-coin rule.  Exactly one participant is
    removed; the knife relocates per the rule text.

    Two-person convention (this function is the single place it lives):
    both neighbours of the knife holder coincide, so the holder eliminates
    the other participant under either coin and keeps the knife.  This is
    what makes the three-person base vectors reproducible.
    """
    if len(state.alive) < 2:
        raise InvalidStateError("cannot step a round with fewer than 2 participants")
    kind = state.rule.kind
    if (coin_knife is not None) != (kind is RuleKind.R3):
        raise DomainError("coin_knife must be supplied iff the rule is r3")

    if kind is RuleKind.DETERMINISTIC:
        d_victim = d_pass = new_dir = RIGHT
    elif kind is RuleKind.R1:
        new_dir = state.direction if coin_victim else -state.direction
        d_victim = d_pass = new_dir
    elif kind is RuleKind.R2:
        d_victim = d_pass = RIGHT if coin_victim else LEFT
        new_dir = state.direction
    else:  # R3
        d_victim = RIGHT if coin_victim else LEFT
        d_pass = RIGHT if coin_knife else LEFT
        new_dir = state.direction

    victim = _neighbor(state.alive, state.knife, d_victim)
    alive = tuple(x for x in state.alive if x != victim)
    # next alive beyond the victim in the passing direction == next alive
    # from the holder once the victim is out (a 1-ring yields the holder)
    knife = _neighbor(alive, state.knife, d_pass)
    return replace(state, alive=alive, knife=knife, direction=new_dir)


def run_path(rule: RuleSpec, n: int, coins) -> int:
    """Run the whole process from an explicit coin sequence; returns the survivor.

    ``coins`` holds one boolean per step for the one-coin rules and one
    (victim, knife) pair per step for the two-coin rule.
    """
    state = initial_state(rule, n)
    for c in coins:
        if rule.kind is RuleKind.R3:
            state = step(state, c[0], c[1])
        else:
            state = step(state, c)
    if len(state.alive) != 1:
        raise InvalidStateError(f"{len(state.alive)} participants left after the path")
    return state.alive[0]


# --- exhaustive enumeration oracle -----------------------------------------


def _branches(rule: RuleSpec) -> list[tuple[bool, bool | None, Fraction]]:
    if rule.kind is RuleKind.DETERMINISTIC:
        return [(True, None, Fraction(1))]
    p = rule.p_exact
    if rule.kind is RuleKind.R3:
        q = rule.q_exact
        return [
            (cv, ck, (p if cv else 1 - p) * (q if ck else 1 - q))
            for cv in (True, False)
            for ck in (True, False)
        ]
    return [(True, None, p), (False, None, 1 - p)]


def oracle_distribution(rule: RuleSpec, n: int) -> SurvivalDistribution:
    """Exact distribution by enumerating every coin sequence with rational weights.

    States reached by different coin prefixes are merged on
    (alive ring, knife, direction) with summed weights, which keeps the
    state space far below the raw path count.  Refuses N above the cap:
    16 for the one-coin rules, 12 for the two-coin rule.
    """
    cap = ORACLE_CAP_FOUR_BRANCH if rule.kind is RuleKind.R3 else ORACLE_CAP_TWO_BRANCH
    if n > cap:
        raise EnumerationCapError(
            f"exhaustive oracle for rule {rule.kind.value} is capped at N <= {cap}, got N={n}"
        )
    if n < 2:
        raise DomainError(f"oracle requires N >= 2, got N={n}")
    branches = [(cv, ck, w) for cv, ck, w in _branches(rule) if w != 0]
    start = initial_state(rule, n)
    states: dict[tuple, Fraction] = {(start.alive, start.knife, start.direction): Fraction(1)}
    for _ in range(n - 1):
        merged: dict[tuple, Fraction] = {}
        for (alive, knife, direction), weight in states.items():
            state = ProcessState(rule, alive, knife, direction)
            for cv, ck, w in branches:
                nxt = step(state, cv, ck)
                key = (nxt.alive, nxt.knife, nxt.direction)
                merged[key] = merged.get(key, Fraction(0)) + weight * w
        states = merged
    exact = [Fraction(0)] * n
    for (alive, _, _), weight in states.items():
        exact[alive[0]] += weight
    if sum(exact) != 1:
        raise InvalidStateError("oracle weights do not sum to one")  # pragma: no cover
    return SurvivalDistribution(
        rule,
        n,
        np.array([float(x) for x in exact]),
        Method.EXACT_ORACLE,
        exact=tuple(exact),
    )


# --- seeded sampling --------------------------------------------------------


def _uniforms_needed(rule: RuleSpec, n: int) -> int:
    if rule.kind is RuleKind.DETERMINISTIC:
        return 0
    return 2 * (n - 1) if rule.kind is RuleKind.R3 else n - 1


def _run_linked(rule: RuleSpec, n: int, u: np.ndarray) -> int:
    """One run on a doubly-linked ring; consumes ``u`` in step order."""
    nxt = list(range(1, n)) + [0]
    prv = [n - 1] + list(range(n - 1))
    knife = 0
    direction = RIGHT
    kind = rule.kind
    p = rule.p_float
    q = rule.q_float if kind is RuleKind.R3 else None
    ui = 0
    for _ in range(n - 1):
        if kind is RuleKind.DETERMINISTIC:
            d_victim = d_pass = RIGHT
        elif kind is RuleKind.R1:
            direction = direction if u[ui] < p else -direction
            d_victim = d_pass = direction
            ui += 1
        elif kind is RuleKind.R2:
            d_victim = d_pass = RIGHT if u[ui] < p else LEFT
            ui += 1
        else:
            d_victim = RIGHT if u[ui] < p else LEFT
            d_pass = RIGHT if u[ui + 1] < q else LEFT
            ui += 2
        victim = nxt[knife] if d_victim == RIGHT else prv[knife]
        pv, nv = prv[victim], nxt[victim]
        nxt[pv] = nv
        prv[nv] = pv
        knife = nxt[knife] if d_pass == RIGHT else prv[knife]
    return knife


def sample_survivor(
    rule: RuleSpec, n: int, seed: int, stream_index: int = 0
) -> SurvivorSample:
    """Run the process once from stream ``stream_index`` derived from ``seed``.

    Identical (rule, N, seed, stream_index) always yields the identical
    survivor; streams follow the SplitMix64/Philox scheme in ``prng``, and
    ``empirical_distribution`` aggregates exactly these runs over
    ``stream_index = 0 .. samples-1``.
    """
    if n < 2:
        raise DomainError(f"sampling requires N >= 2, got N={n}")
    need = _uniforms_needed(rule, n)
    u = prng.stream(seed, stream_index).random(need) if need else np.empty(0)
    survivor = _run_linked(rule, n, u)
    return SurvivorSample(rule, n, survivor, survivor / n, seed, n - 1, stream_index)


def _batch_uniform_matrix(seed: int, start: int, count: int, steps: int) -> np.ndarray:
    out = np.empty((count, steps))
    for i, key in enumerate(prng.stream_keys(seed, start, count)):
        out[i] = np.random.Generator(np.random.Philox(key=key)).random(steps)
    return out


def _batch_run(rule: RuleSpec, n: int, u: np.ndarray) -> np.ndarray:
    """Vectorised ``_run_linked`` across the rows of ``u``."""
    m = u.shape[0]
    rows = np.arange(m)
    nxt = np.tile((np.arange(1, n + 1, dtype=np.int32)) % n, (m, 1))
    prv = np.tile((np.arange(n, dtype=np.int32) - 1) % n, (m, 1))
    knife = np.zeros(m, dtype=np.int32)
    kind = rule.kind
    p = rule.p_float
    if kind is RuleKind.R1:
        going_right = np.ones(m, dtype=bool)
    for s in range(n - 1):
        if kind is RuleKind.DETERMINISTIC:
            victim_right = np.ones(m, dtype=bool)
            pass_right = victim_right
        elif kind is RuleKind.R1:
            going_right = np.where(u[:, s] < p, going_right, ~going_right)
            victim_right = pass_right = going_right
        elif kind is RuleKind.R2:
            victim_right = u[:, s] < p
            pass_right = victim_right
        else:
            victim_right = u[:, 2 * s] < p
            pass_right = u[:, 2 * s + 1] < rule.q_float
        victim = np.where(victim_right, nxt[rows, knife], prv[rows, knife])
        pv = prv[rows, victim]
        nv = nxt[rows, victim]
        nxt[rows, pv] = nv
        prv[rows, nv] = pv
        # holder links are already spliced, so these reads skip the victim
        knife = np.where(pass_right, nxt[rows, knife], prv[rows, knife]).astype(np.int32)
    return knife


def empirical_distribution(
    rule: RuleSpec,
    n: int,
    samples: int,
    seed: int,
    chunk_size: int = 4096,
) -> SurvivalDistribution:
    """Aggregate ``samples`` independent seeded runs into a histogram.

    Sample ``s`` consumes the uniform stream of key ``splitmix64(seed, s)``,
    exactly as ``sample_survivor`` would with that derived stream, so the
    result is a pure function of (rule, N, samples, seed) regardless of
    chunking or execution order.
    """
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples}")
    if n < 2:
        raise DomainError(f"sampling requires N >= 2, got N={n}")
    steps = _uniforms_needed(rule, n)
    counts = np.zeros(n, dtype=np.int64)
    if steps == 0:
        survivor = _run_linked(rule, n, np.empty(0))
        counts[survivor] = samples
    else:
        for start in range(0, samples, chunk_size):
            m = min(chunk_size, samples - start)
            u = _batch_uniform_matrix(seed, start, m, steps)
            survivors = _batch_run(rule, n, u)
            counts += np.bincount(survivors, minlength=n)
    return SurvivalDistribution(
        rule,
        n,
        counts / samples,
        Method.MONTE_CARLO,
        mc_samples=samples,
        counts=counts,
        seed=seed,
    )
