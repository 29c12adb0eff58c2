"""Per-block automata: the character machine and its chunked compaction.

A block of ``s`` consecutive A-points is viewed as ``s`` disks.  An
aggregate state is a face label together with the set ``S`` of *valid*
disks (bit ``k`` set means the A-frog may stand on the block's ``k``-th
point).  Feeding a (face, flag) pair moves the state; the Moore output is
whether the block's last disk is valid.

The compact machine reads ``tau`` pairs at a time, packed into one integer
with face labels in the high bits and flags in the low ``tau`` bits, and
emits the ``tau`` output flags of the transition as a packed word.

Valid sets and block memberships are machine words here (``s <= 64``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .core import (
    WORD_BITS,
    ConfigurationError,
    FrechetError,
    InvalidInputError,
    MoveModel,
    TableMode,
)

_U1 = np.uint64(1)
_MIX1 = np.uint64(0x9E3779B97F4A7C15)
_MIX2 = np.uint64(0xC2B2AE3D27D4EB4F)


class EncodingOverflowError(FrechetError, ValueError):
    pass


class BudgetExceededError(FrechetError, MemoryError):
    pass


class ConsistencyError(FrechetError, RuntimeError):
    pass


class AggregateState(NamedTuple):
    face: int
    valid: int


class StepInput(NamedTuple):
    face: int
    flag: int


# --------------------------------------------------------------------------
# valid-set arithmetic


def fill_runs(seeds: int, member: int) -> int:
    """Grow every seed upward through its contiguous run of ``member`` bits.

    ``seeds`` must be a subset of ``member``.  A run of non-seed members whose
    lower neighbour is outside ``member`` stays unreached; one carry-add per
    such run clears it.
    """
    rest = member & ~seeds
    starts = rest & ~(member << 1)
    unreached = ((rest + starts) ^ rest) & rest
    return member & ~unreached


@njit(cache=True, inline="always")
def _fill(seeds, member):
    rest = member & ~seeds
    starts = rest & ~(member << _U1)
    unreached = ((rest + starts) ^ rest) & rest
    return member & ~unreached


@njit(cache=True, inline="always")
def _step(S, D, flag, diag):
    seeds = S | flag
    if diag:
        seeds |= S << _U1
    return _fill(seeds & D, D)


# --------------------------------------------------------------------------
# the character-level machine


@dataclass(frozen=True)
class BlockSpec:
    """Block-local disk membership of every layer face label.

    ``masks[f]`` is the set of the block's ``s`` disks containing face
    ``f`` (bit 0 is the block's first point).
    """

    masks: np.ndarray
    s: int
    beta: int

    def __post_init__(self):
        masks = np.ascontiguousarray(self.masks, dtype=np.uint64)
        object.__setattr__(self, "masks", masks)
        if not 1 <= self.s <= WORD_BITS:
            raise ConfigurationError(f"block size {self.s} outside 1..{WORD_BITS}")
        if len(masks) > (1 << self.beta):
            raise EncodingOverflowError(f"{len(masks)} face labels do not fit in {self.beta} bits")
        if self.s < WORD_BITS and len(masks) and int(masks.max()) >> self.s:
            raise InvalidInputError("face membership reaches past the block")

    @classmethod
    def from_masks(cls, masks: Sequence[int], s: int, beta: int | None = None) -> "BlockSpec":
        L = len(masks)
        if beta is None:
            beta = max(1, (L - 1).bit_length())
        return cls(np.array([int(v) for v in masks], dtype=np.uint64), s, beta)

    @property
    def L(self) -> int:
        return len(self.masks)

    @property
    def full(self) -> int:
        return (1 << self.s) - 1

    def member(self, face: int) -> int:
        if not 0 <= face < self.L:
            raise InvalidInputError(f"face label {face} out of range 0..{self.L - 1}")
        return int(self.masks[face])


def transition_basic(spec: BlockSpec, state: AggregateState, inp: StepInput, model=MoveModel.ORTHOGONAL) -> AggregateState:
    """One character step: the B-frog hops into face ``inp.face``."""
    D = spec.member(inp.face)
    S = state.valid
    seeds = S | (1 if inp.flag else 0)
    if MoveModel.parse(model).diagonal:
        seeds |= S << 1
    return AggregateState(inp.face, fill_runs(seeds & D, D))


def moore_output(spec: BlockSpec, state: AggregateState) -> int:
    return (state.valid >> (spec.s - 1)) & 1


def start_state(spec: BlockSpec, face: int, flag: int) -> AggregateState:
    """Initial state at the first B-point: the valid prefix of the face, if flagged."""
    D = spec.member(face)
    return AggregateState(face, fill_runs(D & 1, D) if flag else 0)


def run_basic(spec: BlockSpec, start: AggregateState, inputs, model=MoveModel.ORTHOGONAL):
    """Character-by-character run; returns ``(final_state, output_bits)``."""
    state = start
    outs = []
    for inp in inputs:
        state = transition_basic(spec, state, StepInput(*inp), model)
        outs.append(moore_output(spec, state))
    return state, outs


# --------------------------------------------------------------------------
# chunk encoding


@dataclass(frozen=True)
class EncodedChunk:
    """``tau`` (face, flag) pairs packed into ``code = face_part + flag_part``.

    Flags occupy bits ``0..tau-1``; face ``i`` (0-based) occupies bits
    ``tau + beta*i .. tau + beta*(i+1) - 1``.  ``length < tau`` marks a
    padded final chunk whose trailing positions are skipped when run.
    """

    code: int
    face_part: int
    flag_part: int
    length: int
    beta: int
    tau: int


def encode_faces(faces: Sequence[int], beta: int, tau: int) -> int:
    """The face part of a chunk code (flags zero)."""
    code = 0
    limit = 1 << beta
    for i, f in enumerate(faces):
        f = int(f)
        if not 0 <= f < limit:
            raise EncodingOverflowError(f"face label {f} does not fit in {beta} bits")
        code += f << (beta * i + tau)
    return code


def encode_flags(flags: Sequence[int]) -> int:
    code = 0
    for i, phi in enumerate(flags):
        if phi:
            code |= 1 << i
    return code


def encode_chunk(faces: Sequence[int], flags: Sequence[int], beta: int, tau: int) -> EncodedChunk:
    faces = list(faces)
    flags = list(flags)
    if len(faces) != len(flags):
        raise InvalidInputError("faces and flags must have equal length")
    if not 1 <= len(faces) <= tau:
        raise InvalidInputError(f"a chunk holds 1..{tau} pairs, got {len(faces)}")
    fp = encode_faces(faces, beta, tau)
    gp = encode_flags(flags)
    return EncodedChunk(fp + gp, fp, gp, len(faces), beta, tau)


def decode_chunk(chunk: EncodedChunk) -> tuple[list[int], list[int]]:
    fmask = (1 << chunk.beta) - 1
    faces = [(chunk.code >> (chunk.tau + chunk.beta * i)) & fmask for i in range(chunk.length)]
    flags = [(chunk.code >> i) & 1 for i in range(chunk.length)]
    return faces, flags


def chunk_inputs(faces: Sequence[int], flags: Sequence[int], beta: int, tau: int) -> list[EncodedChunk]:
    """Split a (face, flag) string into encoded chunks of ``tau`` pairs."""
    return [encode_chunk(faces[i : i + tau], flags[i : i + tau], beta, tau) for i in range(0, len(faces), tau)]


# --------------------------------------------------------------------------
# flag streams


@dataclass
class FlagStream:
    """Reachability flags of ``n`` B-positions.

    Position 1 is held in ``first``; positions ``2..n`` are packed ``tau`` per
    word, position ``2 + k*tau + i`` in bit ``i`` of ``words[k]``.
    """

    first: int
    words: np.ndarray
    n: int
    tau: int

    def __post_init__(self):
        self.words = np.ascontiguousarray(self.words, dtype=np.uint64)
        mu = -(-(self.n - 1) // self.tau) if self.n > 1 else 0
        if len(self.words) != mu:
            raise ConsistencyError(f"{self.n} flags need {mu} words of {self.tau} bits, got {len(self.words)}")

    @classmethod
    def from_bits(cls, bits, tau: int) -> "FlagStream":
        bits = np.asarray(bits, dtype=np.uint64).ravel()
        n = len(bits)
        if n == 0:
            raise InvalidInputError("a flag stream covers at least one position")
        tail = bits[1:]
        mu = -(-len(tail) // tau)
        padded = np.zeros(mu * tau, dtype=np.uint64)
        padded[: len(tail)] = tail
        shifts = np.arange(tau, dtype=np.uint64)
        words = (padded.reshape(mu, tau) << shifts).sum(axis=1, dtype=np.uint64) if mu else np.zeros(0, np.uint64)
        return cls(int(bits[0]), words, n, tau)

    def to_bits(self) -> np.ndarray:
        shifts = np.arange(self.tau, dtype=np.uint64)
        tail = ((self.words[:, None] >> shifts) & _U1).ravel()[: self.n - 1]
        return np.concatenate([[self.first], tail]).astype(bool)

    @property
    def last(self) -> int:
        if self.n == 1:
            return self.first
        k, i = divmod(self.n - 2, self.tau)
        return int((int(self.words[k]) >> i) & 1)

    def __len__(self) -> int:
        return self.n


# --------------------------------------------------------------------------
# compiled runners


@njit(cache=True)
def _chunk_step(S, code, fb, beta, tau, length, last_bit, diag):
    """Run ``length`` positions of a chunk from valid set ``S``."""
    fmask = (_U1 << np.uint64(beta)) - _U1
    out = np.uint64(0)
    for i in range(length):
        face = (code >> np.uint64(tau + beta * i)) & fmask
        flag = (code >> np.uint64(i)) & _U1
        S = _step(S, fb[face], flag, diag)
        out |= ((S >> last_bit) & _U1) << np.uint64(i)
    return S, out


@njit(cache=True)
def _probe(keyS, keyC, used, S, code):
    cap = keyS.shape[0]
    h = (S * _MIX1) ^ (code * _MIX2)
    h ^= h >> np.uint64(31)
    i = np.int64(h & np.uint64(cap - 1))
    while used[i] and (keyS[i] != S or keyC[i] != code):
        i = (i + 1) & (cap - 1)
    return i


@njit(cache=True)
def _run_lazy(fb, beta, tau, last_bit, diag, S, e0F, flags, k0, last_len, out, keyS, keyC, valS, valO, used, count, limit):
    """Fold memoised chunk transitions from chunk ``k0``.

    Stops early, returning the resume index, when the memo reaches ``limit``
    entries so the caller can grow it.  Returns ``(S, next_k, count, hits)``.
    """
    mu = e0F.shape[0]
    hits = 0
    k = k0
    while k < mu:
        if S == 0 and flags[k] == 0:
            # nothing valid and nothing entering: the chunk is inert
            out[k] = 0
            k += 1
            continue
        code = e0F[k] + flags[k]
        if k == mu - 1 and last_len < tau:
            S, o = _chunk_step(S, code, fb, beta, tau, last_len, last_bit, diag)
            out[k] = o
            k += 1
            continue
        i = _probe(keyS, keyC, used, S, code)
        if used[i]:
            out[k] = valO[i]
            S = valS[i]
            hits += 1
        else:
            if count >= limit:
                return S, k, count, hits
            S1, o = _chunk_step(S, code, fb, beta, tau, tau, last_bit, diag)
            used[i] = 1
            keyS[i] = S
            keyC[i] = code
            valS[i] = S1
            valO[i] = o
            count += 1
            out[k] = o
            S = S1
        k += 1
    return S, k, count, hits


@njit(cache=True)
def _rehash(keyS, keyC, valS, valO, used, nkS, nkC, nvS, nvO, nused):
    for i in range(keyS.shape[0]):
        if used[i]:
            j = _probe(nkS, nkC, nused, keyS[i], keyC[i])
            nused[j] = 1
            nkS[j] = keyS[i]
            nkC[j] = keyC[i]
            nvS[j] = valS[i]
            nvO[j] = valO[i]


@njit(cache=True)
def _tabulate(rows_S, fb, beta, tau, last_bit, diag, ncodes, L):
    """Eager table: next valid set and output word for every (row, code)."""
    nr = rows_S.shape[0]
    nxt = np.zeros((nr, ncodes), dtype=np.uint64)
    outs = np.zeros((nr, ncodes), dtype=np.uint64)
    ok = np.zeros(ncodes, dtype=np.uint8)
    fmask = (_U1 << np.uint64(beta)) - _U1
    for c in range(ncodes):
        good = 1
        for i in range(tau):
            face = (np.uint64(c) >> np.uint64(tau + beta * i)) & fmask
            if face >= L:
                good = 0
        ok[c] = good
    for r in range(nr):
        for c in range(ncodes):
            if ok[c]:
                S1, o = _chunk_step(rows_S[r], np.uint64(c), fb, beta, tau, tau, last_bit, diag)
                nxt[r, c] = S1
                outs[r, c] = o
    return nxt, outs, ok


@njit(cache=True)
def _run_eager(row, next_row, out_tab, rows_S, fb, beta, tau, last_bit, diag, e0F, flags, last_len, out):
    mu = e0F.shape[0]
    for k in range(mu):
        code = e0F[k] + flags[k]
        if k == mu - 1 and last_len < tau:
            S, o = _chunk_step(rows_S[row], code, fb, beta, tau, last_len, last_bit, diag)
            out[k] = o
            return S
        out[k] = out_tab[row, code]
        row = next_row[row, code]
        if row < 0:
            return np.uint64(0xFFFFFFFFFFFFFFFF)
    return rows_S[row]


# --------------------------------------------------------------------------
# the compact machine


class CompactAutomaton:
    """Chunk-level machine over one block.

    Transitions depend only on the source valid set and the chunk code (the
    source face never enters the rules), so both the eager table rows and
    the lazy memo are keyed by valid set.  Not safe to share a lazy instance
    between threads.
    """

    def __init__(self, spec: BlockSpec, beta: int, tau: int, model=MoveModel.ORTHOGONAL, table_mode=TableMode.LAZY, budget: int = 1 << 22):
        self.spec = spec
        self.beta = int(beta)
        self.tau = int(tau)
        self.model = MoveModel.parse(model)
        self.table_mode = TableMode.parse(table_mode)
        if self.tau * (self.beta + 1) > WORD_BITS:
            raise ConfigurationError(f"tau*(beta+1) = {self.tau * (self.beta + 1)} exceeds {WORD_BITS} bits")
        if spec.L > (1 << self.beta):
            raise EncodingOverflowError(f"{spec.L} face labels do not fit in {self.beta} bits")
        self.last_bit = np.uint64(spec.s - 1)
        self.hits = 0
        self.misses = 0
        if self.table_mode is TableMode.LAZY:
            self._alloc(64)
            self._count = 0
        else:
            self._build_eager(budget)

    # -- lazy memo -----------------------------------------------------

    def _alloc(self, cap):
        self._keyS = np.zeros(cap, dtype=np.uint64)
        self._keyC = np.zeros(cap, dtype=np.uint64)
        self._valS = np.zeros(cap, dtype=np.uint64)
        self._valO = np.zeros(cap, dtype=np.uint64)
        self._used = np.zeros(cap, dtype=np.uint8)

    def _grow(self):
        old = (self._keyS, self._keyC, self._valS, self._valO, self._used)
        self._alloc(2 * len(self._keyS))
        _rehash(*old, self._keyS, self._keyC, self._valS, self._valO, self._used)

    @property
    def memo_size(self) -> int:
        return self._count if self.table_mode is TableMode.LAZY else 0

    # -- eager table ---------------------------------------------------

    def _build_eager(self, budget):
        spec = self.spec
        masks = [int(v) for v in spec.masks]
        starts = {0} | {fill_runs(D & 1, D) for D in masks}
        pairs = {(f, 0) for f in range(spec.L)} | {(f, fill_runs(D & 1, D)) for f, D in enumerate(masks)}
        seen = set(starts)
        todo = list(starts)
        diag = self.model.diagonal
        while todo:
            S = todo.pop()
            for f, D in enumerate(masks):
                for flag in (0, 1):
                    seeds = S | flag | ((S << 1) if diag else 0)
                    S1 = fill_runs(seeds & D, D)
                    pairs.add((f, S1))
                    if S1 not in seen:
                        seen.add(S1)
                        todo.append(S1)
        rows = np.array(sorted(seen), dtype=np.uint64)
        ncodes = 1 << (self.tau * (self.beta + 1))
        if len(rows) * ncodes > budget:
            raise BudgetExceededError(
                f"eager table needs {len(rows)} x {ncodes} entries (budget {budget}); use table_mode='lazy'"
            )
        nxt, outs, ok = _tabulate(rows, spec.masks, self.beta, self.tau, self.last_bit, diag, ncodes, spec.L)
        pos = np.searchsorted(rows, nxt)
        pos = np.minimum(pos, len(rows) - 1)
        next_row = np.where(ok[None, :] == 1, pos, -1).astype(np.int64)
        if np.any((rows[pos] != nxt) & (ok[None, :] == 1)):
            raise ConsistencyError("eager table left the reachable state set")
        self._rows = rows
        self._row_of = {int(v): i for i, v in enumerate(rows)}
        self._next_row = next_row
        self._out_tab = outs
        self.states = pairs

    @property
    def n_states(self) -> int:
        """Reachable (face, valid-set) pairs (eager mode only)."""
        return len(self.states)

    def states_at_face(self, face: int) -> set[int]:
        return {S for f, S in self.states if f == face}

    # -- running ---------------------------------------------------------

    def transition(self, valid: int, chunk: EncodedChunk) -> tuple[int, int]:
        """``(next_valid, output_word)`` for one chunk."""
        if chunk.beta != self.beta or chunk.tau != self.tau:
            raise ConsistencyError("chunk encoded with a different (beta, tau)")
        S, out = self.run_words(valid, np.array([chunk.face_part], dtype=np.uint64), np.array([chunk.flag_part], dtype=np.uint64), chunk.length)
        return S, int(out[0])

    def run_words(self, valid: int, e0F: np.ndarray, flags: np.ndarray, last_len: int | None = None):
        """Run over packed chunks; ``e(chunk_k) = e0F[k] + flags[k]``.

        ``last_len`` is the number of real positions in the final chunk.
        Returns ``(final_valid, output_words)``.
        """
        mu = len(e0F)
        out = np.zeros(mu, dtype=np.uint64)
        if last_len is None:
            last_len = self.tau
        if mu == 0:
            return int(valid), out
        S = np.uint64(valid)
        diag = self.model.diagonal
        if self.table_mode is TableMode.EAGER:
            row = self._row_of.get(int(valid))
            if row is None:
                raise ConsistencyError(f"valid set {valid:#x} is not a state of this automaton")
            S = _run_eager(row, self._next_row, self._out_tab, self._rows, self.spec.masks, self.beta, self.tau, self.last_bit, diag, e0F, flags, last_len, out)
            if S == np.uint64(0xFFFFFFFFFFFFFFFF) and self.spec.s < 64:
                raise ConsistencyError("chunk code names a face outside the table")
            return int(S), out
        k = 0
        while True:
            limit = len(self._keyS) // 2
            S, k, self._count, hits = _run_lazy(
                self.spec.masks, self.beta, self.tau, self.last_bit, diag, np.uint64(S), e0F, flags, k, last_len, out,
                self._keyS, self._keyC, self._valS, self._valO, self._used, self._count, limit,
            )
            self.hits += hits
            if k >= mu:
                break
            self._grow()
        self.misses = self._count
        return int(S), out


def build_compact(spec: BlockSpec, beta: int, tau: int, model=MoveModel.ORTHOGONAL, table_mode=TableMode.LAZY, budget: int = 1 << 22) -> CompactAutomaton:
    return CompactAutomaton(spec, beta, tau, model, table_mode, budget)


def run_compact(aut: CompactAutomaton, start: AggregateState, chunks: Sequence[EncodedChunk]):
    """Run the compact machine over encoded chunks.

    Returns ``(final_state, flags)``.  ``flags.first`` is the output of
    ``start`` itself and the packed tail holds one output bit per position
    the chunks cover.
    """
    chunks = list(chunks)
    first = moore_output(aut.spec, start)
    if not chunks:
        return start, FlagStream(first, np.zeros(0, dtype=np.uint64), 1, aut.tau)
    for c in chunks:
        if c.beta != aut.beta or c.tau != aut.tau:
            raise ConsistencyError("chunk encoded with a different (beta, tau)")
    for c in chunks[:-1]:
        if c.length != aut.tau:
            raise ConsistencyError("only the final chunk may be short")
    e0F = np.array([c.face_part for c in chunks], dtype=np.uint64)
    flags = np.array([c.flag_part for c in chunks], dtype=np.uint64)
    S, out = aut.run_words(start.valid, e0F, flags, chunks[-1].length)
    last_faces, _ = decode_chunk(chunks[-1])
    n = 1 + aut.tau * (len(chunks) - 1) + chunks[-1].length
    return AggregateState(last_faces[-1], S), FlagStream(first, out, n, aut.tau)
