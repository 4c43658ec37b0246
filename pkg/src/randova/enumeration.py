"""Enumeration and uniform sampling of the randomization space.

RCB randomizations are independent per-block permutations of the treatment
labels; the space has (T!)^N elements and is streamed in lexicographic order
of the concatenated permutations.  LS randomizations are Latin squares of
order T, streamed in row-major lexicographic order by backtracking.  Exact
enumeration is capped (default 10^7 assignments, override with the
RANDOVA_ENUM_CAP environment variable); beyond the cap callers must sample.

Uniform sampling: RCB draws independent Fisher-Yates permutations per block.
For LS the default measure is uniform over ALL Latin squares of the order,
realized by Jacobson-Matthews +-1 moves on the incidence cube with a
configurable burn-in between emitted squares; a "subgroup" measure is also
available which only randomizes rows/columns/symbols of a fixed cyclic
reference square (a strictly smaller orbit unless T <= 3).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .errors import DimensionMismatch, SpaceTooLarge, WrongDesign
from .potential_outcomes import DesignKind, PotentialOutcomeTable

DEFAULT_ENUM_CAP = 10_000_000
ENUM_CAP_ENV_VAR = "RANDOVA_ENUM_CAP"

# Total Latin square counts for orders 1..5.  Orders 1-4 are re-derived by an
# independent counting oracle in the test suite; order 5 was produced once by
# the backtracking enumerator and is pinned as a regression value.
LATIN_SQUARE_COUNTS = {1: 1, 2: 2, 3: 12, 4: 576, 5: 161280}
MAX_EXACT_LS_ORDER = 5

DEFAULT_JM_BURN_IN_FACTOR = 2  # moves between emissions = factor * T^3


def enumeration_cap() -> int:
    """Active exact-enumeration cap (env override wins)."""
    raw = os.environ.get(ENUM_CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_ENUM_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"{ENUM_CAP_ENV_VAR} must be >= 1, got {cap}")
    return cap


class SpaceKind(str, Enum):
    EXACT = "exact"
    SAMPLE = "sample"


class LsMeasure(str, Enum):
    ALL_SQUARES = "all"
    TRANSFORMATION_SUBGROUP = "subgroup"


@dataclass(frozen=True)
class RandomizationSpace:
    """Strategy for traversing the randomization space of a design.

    EXACT visits each assignment exactly once.  SAMPLE draws sample_size
    assignments, deterministically given seed; burn_in (LS only) is the
    number of Jacobson-Matthews moves between emitted squares and defaults
    to 2*T^3.
    """

    kind: SpaceKind = SpaceKind.EXACT
    sample_size: int | None = None
    seed: int | None = None
    burn_in: int | None = None
    ls_measure: LsMeasure = LsMeasure.ALL_SQUARES

    @classmethod
    def exact(cls) -> "RandomizationSpace":
        return cls()

    @classmethod
    def sample(
        cls,
        size: int,
        seed: int,
        burn_in: int | None = None,
        ls_measure: LsMeasure | str = LsMeasure.ALL_SQUARES,
    ) -> "RandomizationSpace":
        if size < 0:
            raise ValueError(f"sample size must be >= 0, got {size}")
        return cls(
            kind=SpaceKind.SAMPLE,
            sample_size=size,
            seed=seed,
            burn_in=burn_in,
            ls_measure=LsMeasure(ls_measure),
        )


@dataclass(frozen=True)
class Assignment:
    """One realized randomization.

    RCB: rcb_perms[i][j] is the (zero-based) treatment given to plot j of
    block i; each row is a permutation of 0..T-1.  LS: ls_square[i][j] is the
    treatment in cell (i, j); each symbol occurs once per row and column.
    """

    design: DesignKind
    rcb_perms: np.ndarray | None = None
    ls_square: np.ndarray | None = None

    def __post_init__(self) -> None:
        for field in ("rcb_perms", "ls_square"):
            arr = getattr(self, field)
            if arr is not None:
                arr = np.asarray(arr, dtype=np.int64)
                arr.setflags(write=False)
                object.__setattr__(self, field, arr)
        if self.design is DesignKind.RCB:
            assert self.rcb_perms is not None and self.rcb_perms.ndim == 2
        else:
            assert self.ls_square is not None and self.ls_square.ndim == 2
        # full bijection/Latin check in debug runs; python -O skips it
        assert self.is_valid(), "assignment violates its design invariant"

    @property
    def num_treatments(self) -> int:
        arr = self.rcb_perms if self.design is DesignKind.RCB else self.ls_square
        return arr.shape[1]

    def labels(self) -> np.ndarray:
        """The treatment-label grid, whichever design."""
        return self.rcb_perms if self.design is DesignKind.RCB else self.ls_square

    def as_tuple(self) -> tuple:
        """Hashable form, for aggregation and distinctness checks."""
        return tuple(map(tuple, self.labels().tolist()))

    def indicators(self) -> np.ndarray:
        """Indicator array W[i][j][t] in {0,1} with one 1 per (i, j)."""
        grid = self.labels()
        t = self.num_treatments
        return (grid[:, :, None] == np.arange(t)[None, None, :]).astype(np.int64)

    def is_valid(self) -> bool:
        """Bijection check per block (RCB) or Latin property (LS)."""
        grid = self.labels()
        t = self.num_treatments
        want = np.arange(t)
        if self.design is DesignKind.RCB:
            return all(np.array_equal(np.sort(row), want) for row in grid)
        rows_ok = all(np.array_equal(np.sort(row), want) for row in grid)
        cols_ok = all(np.array_equal(np.sort(col), want) for col in grid.T)
        return rows_ok and cols_ok and grid.shape[0] == t


def rcb_space_size(num_blocks: int, num_treatments: int) -> int:
    """Cardinality (T!)^N of the RCB randomization space."""
    return math.factorial(num_treatments) ** num_blocks


def latin_square_count(order: int) -> int | None:
    """Total Latin squares of the order, or None when not tabulated (order > 5)."""
    return LATIN_SQUARE_COUNTS.get(order)


def space_cardinality(
    design: DesignKind, num_blocks: int, num_treatments: int
) -> int | None:
    if DesignKind(design) is DesignKind.RCB:
        return rcb_space_size(num_blocks, num_treatments)
    return latin_square_count(num_treatments)


def enumerate_rcb(
    num_blocks: int, num_treatments: int, cap: int | None = None
) -> Iterator[Assignment]:
    """Stream all (T!)^N per-block permutation assignments, lexicographically."""
    if num_blocks < 1 or num_treatments < 1:
        raise DimensionMismatch(
            f"need num_blocks >= 1 and num_treatments >= 1, "
            f"got {num_blocks}, {num_treatments}"
        )
    cap = enumeration_cap() if cap is None else cap
    size = rcb_space_size(num_blocks, num_treatments)
    if size > cap:
        raise SpaceTooLarge(
            f"RCB space has {size} assignments, above the cap {cap}; "
            "use uniform sampling instead"
        )
    labels = range(num_treatments)
    for perms in itertools.product(
        itertools.permutations(labels), repeat=num_blocks
    ):
        yield Assignment(DesignKind.RCB, rcb_perms=np.array(perms, dtype=np.int64))


def _latin_square_grids(order: int) -> Iterator[tuple[int, ...]]:
    """Backtracking over cells in row-major order, symbols ascending."""
    cells = order * order
    grid = [0] * cells
    row_used = [0] * order
    col_used = [0] * order
    full = (1 << order) - 1

    def rec(pos: int) -> Iterator[tuple[int, ...]]:
        if pos == cells:
            yield tuple(grid)
            return
        i, j = divmod(pos, order)
        avail = ~(row_used[i] | col_used[j]) & full
        while avail:
            bit = avail & -avail
            avail ^= bit
            grid[pos] = bit.bit_length() - 1
            row_used[i] |= bit
            col_used[j] |= bit
            yield from rec(pos + 1)
            row_used[i] ^= bit
            col_used[j] ^= bit

    yield from rec(0)


def enumerate_latin_squares(order: int, cap: int | None = None) -> Iterator[Assignment]:
    """Stream every Latin square of the order, row-major lexicographic."""
    if order < 1:
        raise DimensionMismatch(f"order must be >= 1, got {order}")
    cap = enumeration_cap() if cap is None else cap
    known = latin_square_count(order)
    if known is None:
        raise SpaceTooLarge(
            f"exact Latin-square enumeration is supported up to order "
            f"{MAX_EXACT_LS_ORDER}; order {order} must be sampled"
        )
    if known > cap:
        raise SpaceTooLarge(
            f"Latin-square space has {known} squares, above the cap {cap}; "
            "use uniform sampling instead"
        )
    for flat in _latin_square_grids(order):
        square = np.array(flat, dtype=np.int64).reshape(order, order)
        yield Assignment(DesignKind.LS, ls_square=square)


class _RandomIntBuffer:
    """Batched uniform integers on [0, high); scalar Generator calls are slow."""

    def __init__(self, rng: np.random.Generator, high: int, block: int = 8192) -> None:
        self._rng = rng
        self._high = high
        self._block = block
        self._buffer: list[int] = []

    def next(self) -> int:
        if not self._buffer:
            self._buffer = self._rng.integers(
                0, self._high, size=self._block
            ).tolist()
        return self._buffer.pop()


class _JacobsonMatthewsChain:
    """+-1 moves on the T x T x T incidence cube, allowing one improper cell.

    From a proper state, pick a random zero cell (r, c, s); the three lines
    through it each contain a unique 1 at (r1, c, s), (r, c1, s), (r, c, s1).
    Add 1 on the even corners of the subcube spanned with (r1, c1, s1) and
    subtract 1 on the odd corners; the far corner may drop to -1, making the
    state improper.  From an improper state the -1 cell plays the role of the
    zero cell and the two 1-candidates on each line are chosen at random.
    Stationary distribution over proper states is uniform.

    State lives in nested Python lists: the cube is tiny (T <= ~12) and
    per-move numpy indexing overhead would dominate.
    """

    def __init__(self, order: int, rng: np.random.Generator) -> None:
        self.order = order
        self._draw_t = _RandomIntBuffer(rng, order)
        self._draw_2 = _RandomIntBuffer(rng, 2)
        self.cube = [
            [[0] * order for _ in range(order)] for _ in range(order)
        ]
        for i in range(order):
            for j in range(order):
                self.cube[i][j][(i + j) % order] = 1
        self.improper: tuple[int, int, int] | None = None

    def _move(self) -> None:
        t = self.order
        cube = self.cube
        if self.improper is None:
            draw = self._draw_t.next
            while True:
                r, c, s = draw(), draw(), draw()
                if cube[r][c][s] == 0:
                    break
            r1 = next(k for k in range(t) if cube[k][c][s] == 1)
            c1 = next(k for k in range(t) if cube[r][k][s] == 1)
            s1 = next(k for k in range(t) if cube[r][c][k] == 1)
        else:
            r, c, s = self.improper
            rows = [k for k in range(t) if cube[k][c][s] == 1]
            cols = [k for k in range(t) if cube[r][k][s] == 1]
            syms = [k for k in range(t) if cube[r][c][k] == 1]
            r1 = rows[self._draw_2.next()]
            c1 = cols[self._draw_2.next()]
            s1 = syms[self._draw_2.next()]
        cube[r][c][s] += 1
        cube[r][c1][s1] += 1
        cube[r1][c][s1] += 1
        cube[r1][c1][s] += 1
        cube[r1][c][s] -= 1
        cube[r][c1][s] -= 1
        cube[r][c][s1] -= 1
        cube[r1][c1][s1] -= 1
        self.improper = (r1, c1, s1) if cube[r1][c1][s1] == -1 else None

    def advance(self, moves: int) -> np.ndarray:
        """Run the given number of moves, then continue to a proper state."""
        for _ in range(moves):
            self._move()
        while self.improper is not None:
            self._move()
        square = [[row.index(1) for row in plane] for plane in self.cube]
        return np.array(square, dtype=np.int64)


def sample_rcb(
    num_blocks: int, num_treatments: int, count: int, seed: int
) -> Iterator[Assignment]:
    """Independent uniform per-block permutations; deterministic given seed."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        perms = np.stack([rng.permutation(num_treatments) for _ in range(num_blocks)])
        yield Assignment(DesignKind.RCB, rcb_perms=perms)


def sample_latin_squares(
    order: int,
    count: int,
    seed: int,
    burn_in: int | None = None,
    measure: LsMeasure | str = LsMeasure.ALL_SQUARES,
) -> Iterator[Assignment]:
    """Approximately uniform Latin squares; deterministic given seed.

    measure="all" uses the Jacobson-Matthews chain over all squares of the
    order; measure="subgroup" permutes rows, columns and symbols of a fixed
    cyclic square, which is uniform only on that transformation orbit.
    """
    measure = LsMeasure(measure)
    rng = np.random.default_rng(seed)
    if count <= 0:
        return
    if order == 1:
        for _ in range(count):
            yield Assignment(DesignKind.LS, ls_square=np.zeros((1, 1), dtype=np.int64))
        return
    if measure is LsMeasure.TRANSFORMATION_SUBGROUP:
        idx = np.arange(order)
        reference = (idx[:, None] + idx[None, :]) % order
        for _ in range(count):
            rows = rng.permutation(order)
            cols = rng.permutation(order)
            symbols = rng.permutation(order)
            square = symbols[reference[np.ix_(rows, cols)]]
            yield Assignment(DesignKind.LS, ls_square=square)
        return
    moves = DEFAULT_JM_BURN_IN_FACTOR * order**3 if burn_in is None else burn_in
    chain = _JacobsonMatthewsChain(order, rng)
    for _ in range(count):
        square = chain.advance(moves)
        yield Assignment(DesignKind.LS, ls_square=square)


def sample_uniform(
    design: DesignKind,
    num_treatments: int,
    count: int,
    seed: int,
    num_blocks: int | None = None,
    burn_in: int | None = None,
    ls_measure: LsMeasure | str = LsMeasure.ALL_SQUARES,
) -> Iterator[Assignment]:
    """Uniform sampler for either design; see sample_rcb / sample_latin_squares."""
    if DesignKind(design) is DesignKind.RCB:
        if num_blocks is None:
            raise WrongDesign("RCB sampling needs num_blocks")
        return sample_rcb(num_blocks, num_treatments, count, seed)
    return sample_latin_squares(num_treatments, count, seed, burn_in, ls_measure)


def assignment_stream(
    table: PotentialOutcomeTable, space: RandomizationSpace
) -> tuple[Iterator[Assignment], int | None, bool]:
    """Resolve a space against a table: (stream, count when known, is_exact)."""
    t = table.num_treatments
    if space.kind is SpaceKind.EXACT:
        if table.design is DesignKind.RCB:
            n = table.num_blocks
            return enumerate_rcb(n, t), rcb_space_size(n, t), True
        return enumerate_latin_squares(t), latin_square_count(t), True
    if space.sample_size is None or space.seed is None:
        raise ValueError("sampled spaces need sample_size and seed")
    stream = sample_uniform(
        table.design,
        t,
        space.sample_size,
        space.seed,
        num_blocks=table.num_blocks,
        burn_in=space.burn_in,
        ls_measure=space.ls_measure,
    )
    return stream, space.sample_size, False
