"""Path ORAM with a client-side position map and stash.

The server tree has ``L_T = ceil(log2 N)`` levels below the root and
``2^(L_T+1) - 1`` buckets of ``Z`` slots, laid out in heap order. Slot numbers
are 1-based: slot ``b*Z + z + 1`` is position ``z`` of bucket ``b``.

:func:`gen_ap` plans one access. It returns the pattern the servers will
see (every slot on one root-to-leaf path read, then every slot on the same
path written back) together with the client's next state; it never mutates
its input. The pattern also tells the client which logical block sits in
each read slot and which one goes into each write slot, so the caller can
move data without further bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .codec import Reader, decode_all, encode_list, encode_uint
from .rng import Rng

DEFAULT_Z = 5


class OramError(ValueError):
    pass


def tree_levels(n_blocks: int) -> int:
    if n_blocks < 1:
        raise OramError("N must be at least 1")
    return (n_blocks - 1).bit_length()


def slot_count(n_blocks: int, z: int = DEFAULT_Z) -> int:
    return z * ((1 << (tree_levels(n_blocks) + 1)) - 1)


@dataclass
class OramState:
    N: int
    Z: int
    levels: int
    posmap: list[int]  # index 0 unused; posmap[id] = leaf
    slot_ids: list[int]  # index 0 unused; 0 marks a dummy slot
    stash: list[int] = field(default_factory=list)
    known: set[int] = field(default_factory=set)  # ids that own a block

    @property
    def leaves(self) -> int:
        return 1 << self.levels

    @property
    def M(self) -> int:
        return self.Z * ((1 << (self.levels + 1)) - 1)

    def copy(self) -> "OramState":
        return OramState(self.N, self.Z, self.levels, list(self.posmap), list(self.slot_ids),
                         list(self.stash), set(self.known))

    def path_buckets(self, leaf: int) -> list[int]:
        """Bucket indices from root (level 0) to the leaf bucket."""
        L = self.levels
        return [(1 << l) - 1 + (leaf >> (L - l)) for l in range(L + 1)]

    def path_slots(self, leaf: int) -> list[int]:
        Z = self.Z
        return [b * Z + z + 1 for b in self.path_buckets(leaf) for z in range(Z)]

    def locate(self, block_id: int) -> Optional[int]:
        """Slot holding ``block_id``, 0 for the stash, ``None`` if it has no block yet."""
        if block_id not in self.known:
            return None
        if block_id in self.stash:
            return 0
        return self.slot_ids.index(block_id, 1)

    # persistence ------------------------------------------------------
    def encode(self) -> bytes:
        return encode_list([
            encode_uint(self.N), encode_uint(self.Z), encode_uint(self.levels),
            encode_list(encode_uint(p) for p in self.posmap[1:]),
            encode_list(encode_uint(i) for i in self.slot_ids[1:]),
            encode_list(encode_uint(i) for i in self.stash),
            encode_list(encode_uint(i) for i in sorted(self.known)),
        ])

    @classmethod
    def decode(cls, buf: bytes) -> "OramState":
        def read(r: Reader) -> "OramState":
            r._length()
            N, Z, levels = r.uint(), r.uint(), r.uint()
            posmap = [0] + r.list(Reader.uint)
            slots = [0] + r.list(Reader.uint)
            stash = r.list(Reader.uint)
            known = set(r.list(Reader.uint))
            return cls(N, Z, levels, posmap, slots, stash, known)
        return decode_all(buf, read)


@dataclass(frozen=True)
class AccessPattern:
    """Slot pairs the servers see, plus the client-only routing for each slot.

    ``pairs[k] = (read_slots[k], write_slots[k])``. ``read_ids[k]`` is the
    logical id held in the k-th read slot (``None`` for a dummy);
    ``write_ids[k]`` is the id evicted into the k-th write slot. ``adopted``
    is the read slot whose dummy block the target takes over on its first
    access, and ``fresh`` is set when the target needs a brand-new block
    because its path had no dummy to adopt.
    """

    target: int
    leaf: int
    new_leaf: int
    read_slots: tuple[int, ...]
    write_slots: tuple[int, ...]
    read_ids: tuple[Optional[int], ...]
    write_ids: tuple[Optional[int], ...]
    adopted: Optional[int] = None
    fresh: bool = False

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.read_slots, self.write_slots))


def setup(N: int, rng: Rng, Z: int = DEFAULT_Z) -> tuple[OramState, int]:
    levels = tree_levels(N)
    if Z < 1:
        raise OramError("bucket size must be positive")
    leaves = 1 << levels
    posmap = [0] + [rng.randbelow(leaves) for _ in range(N)]
    M = Z * ((1 << (levels + 1)) - 1)
    return OramState(N, Z, levels, posmap, [0] * (M + 1)), M


def gen_ap(s: OramState, block_id: int, rng: Rng, *, remap: bool = True
           ) -> tuple[AccessPattern, OramState]:
    """Plan one access to ``block_id``.

    ``remap=False`` keeps the block on its current leaf; that breaks
    obliviousness and exists only for negative-control experiments.
    """
    if not (1 <= block_id <= s.N):
        raise OramError(f"id {block_id} outside 1..{s.N}")
    t = s.copy()
    leaf = t.posmap[block_id]
    reads = t.path_slots(leaf)
    read_ids = tuple(t.slot_ids[i] or None for i in reads)

    adopted = None
    fresh = False
    if block_id not in t.known:
        for i, rid in zip(reads, read_ids):
            if rid is None:
                adopted = i
                break
        fresh = adopted is None
        t.known.add(block_id)
    read_ids = tuple(block_id if i == adopted else rid for i, rid in zip(reads, read_ids))

    # pull the whole path into the stash
    for i, rid in zip(reads, read_ids):
        if rid is not None:
            t.stash.append(rid)
        t.slot_ids[i] = 0
    if fresh:
        t.stash.append(block_id)

    new_leaf = rng.randbelow(t.leaves) if remap else leaf
    t.posmap[block_id] = new_leaf

    # greedy eviction, deepest bucket first
    L, Z = t.levels, t.Z
    buckets = t.path_buckets(leaf)
    writes: list[int] = []
    write_ids: list[Optional[int]] = []
    for level in range(L, -1, -1):
        prefix = leaf >> (L - level)
        chosen = [b for b in t.stash if (t.posmap[b] >> (L - level)) == prefix][:Z]
        for b in chosen:
            t.stash.remove(b)
        chosen += [None] * (Z - len(chosen))
        base = buckets[level] * Z + 1
        for z, b in enumerate(chosen):
            writes.append(base + z)
            write_ids.append(b)
            t.slot_ids[base + z] = b or 0

    ap = AccessPattern(block_id, leaf, new_leaf, tuple(reads), tuple(writes), read_ids,
                       tuple(write_ids), adopted, fresh)
    return ap, t


def get_id(s: OramState, i: int) -> Optional[int]:
    if not (1 <= i <= s.M):
        raise OramError(f"slot {i} outside 1..{s.M}")
    return s.slot_ids[i] or None
