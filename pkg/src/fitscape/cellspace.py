"""Cell search space: DAG cells, 289-bit genotypes, and the Hamming neighborhood.

A cell is an upper-triangular DAG with at most 7 nodes and 9 edges, node 0
being the input and the last node the output; each intermediate node carries
one of three operator labels. For a flat identifier, each of the 5
intermediate positions is expanded into 3 operator slots, giving a fixed
17-node graph whose 17x17 adjacency flattens to a 289-bit genotype
(row-major, bit(i, j) = 17*i + j).

Conventions fixed here so genotypes stay stable across runs:

* operator slot order is CONV1X1 < CONV3X3 < MAXPOOL3X3;
* position p in {1..5} with operator o occupies expanded node 1 + 3*(p-1) + o;
  position 0 is expanded node 0 (IN) and position 6 is node 16 (OUT);
* cells with fewer than 7 nodes occupy positions 0..num_nodes-2 contiguously
  with OUT always at position 6 (canonical placement, makes encoding
  injective);
* genotype text form is the 74-char lowercase hex of 37 bytes, bit 0 at the
  MSB of byte 0, final 7 bits zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal

from .errors import CellError, DecodeError, GenotypeError

OPS = ("CONV1X1", "CONV3X3", "MAXPOOL3X3")

MAX_NODES = 7
MAX_EDGES = 9
EXPANDED_NODES = 17
GENOTYPE_BITS = EXPANDED_NODES * EXPANDED_NODES  # 289
GENOTYPE_BYTES = 37  # ceil(289 / 8)
_WORD_BITS = GENOTYPE_BYTES * 8  # 296; low 7 bits of the int are padding

IN_POSITION = 0
OUT_POSITION = 6
IN_NODE = 0
OUT_NODE = 16

NeighborMode = Literal["RAW", "VALID"]


def bit_index(i: int, j: int) -> int:
    """Flat genotype index of expanded adjacency entry (i, j)."""
    if not (0 <= i < EXPANDED_NODES and 0 <= j < EXPANDED_NODES):
        raise ValueError(f"expanded node index out of range: ({i}, {j})")
    return EXPANDED_NODES * i + j


def slot_node(position: int, op_index: int = 0) -> int:
    """Expanded node index for a cell position and operator choice."""
    if position == IN_POSITION:
        return IN_NODE
    if position == OUT_POSITION:
        return OUT_NODE
    if not (1 <= position <= 5):
        raise ValueError(f"cell position out of range: {position}")
    if not (0 <= op_index < len(OPS)):
        raise ValueError(f"operator index out of range: {op_index}")
    return 1 + 3 * (position - 1) + op_index


def node_position(node: int) -> int:
    """Cell position that owns an expanded node."""
    if node == IN_NODE:
        return IN_POSITION
    if node == OUT_NODE:
        return OUT_POSITION
    if not (1 <= node <= 15):
        raise ValueError(f"expanded node index out of range: {node}")
    return 1 + (node - 1) // 3


def node_op_index(node: int) -> int:
    """Operator slot of an intermediate expanded node."""
    if not (1 <= node <= 15):
        raise ValueError(f"node {node} carries no operator")
    return (node - 1) % 3


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    message: str
    node: int | None = None


@dataclass(frozen=True, slots=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)


@dataclass(frozen=True)
class CellSpec:
    """A candidate cell: node count, upper-triangular adjacency, operator labels.

    Construction only enforces shape (square adjacency, boolean entries,
    known operator labels, at least the IN and OUT node); semantic limits
    are reported by :func:`validate_cell` so over-bound candidates stay
    inspectable.
    """

    num_nodes: int
    adjacency: tuple[tuple[bool, ...], ...]
    ops: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.num_nodes < 2:
            raise ValueError("a cell needs at least IN and OUT nodes")
        rows = tuple(tuple(bool(x) for x in row) for row in self.adjacency)
        if len(rows) != self.num_nodes or any(len(r) != self.num_nodes for r in rows):
            raise ValueError("adjacency must be num_nodes x num_nodes")
        object.__setattr__(self, "adjacency", rows)
        ops = tuple(self.ops)
        for op in ops:
            if op not in OPS:
                raise ValueError(f"unknown operator label: {op!r}")
        object.__setattr__(self, "ops", ops)

    def edges(self) -> list[tuple[int, int]]:
        """All (i, j) pairs with a true adjacency entry, row-major order."""
        return [
            (i, j)
            for i in range(self.num_nodes)
            for j in range(self.num_nodes)
            if self.adjacency[i][j]
        ]

    def to_json_dict(self) -> dict:
        return {
            "num_nodes": self.num_nodes,
            "adjacency": [list(row) for row in self.adjacency],
            "ops": list(self.ops),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CellSpec":
        return cls(
            num_nodes=int(obj["num_nodes"]),
            adjacency=tuple(tuple(bool(x) for x in row) for row in obj["adjacency"]),
            ops=tuple(str(op) for op in obj["ops"]),
        )


def _reachable(start: int, succ: dict[int, list[int]]) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in succ.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def on_path_nodes(num_nodes: int, edges: Iterable[tuple[int, int]]) -> set[int]:
    """Nodes lying on some directed IN -> OUT path (IN = 0, OUT = num_nodes-1)."""
    succ: dict[int, list[int]] = {}
    pred: dict[int, list[int]] = {}
    for i, j in edges:
        succ.setdefault(i, []).append(j)
        pred.setdefault(j, []).append(i)
    fwd = _reachable(0, succ)
    bwd = _reachable(num_nodes - 1, pred)
    return fwd & bwd


def validate_cell(cell: CellSpec) -> ValidationReport:
    """Check every cell invariant; reports violations, never raises.

    Codes: TOO_MANY_NODES, TOO_MANY_EDGES, NOT_UPPER_TRIANGULAR,
    DANGLING_NODE, BAD_OP_COUNT. The DANGLING_NODE rule is strict: every
    node (IN and OUT included) must lie on some directed IN -> OUT path.
    Without it, isolated or off-path nodes would encode to nothing and
    the genotype mapping would stop being injective.
    """
    violations: list[Violation] = []
    n = cell.num_nodes
    if n > MAX_NODES:
        violations.append(Violation("TOO_MANY_NODES", f"{n} nodes exceeds limit {MAX_NODES}"))
    edges = cell.edges()
    if len(edges) > MAX_EDGES:
        violations.append(
            Violation("TOO_MANY_EDGES", f"{len(edges)} edges exceeds limit {MAX_EDGES}")
        )
    for i, j in edges:
        if i >= j:
            violations.append(
                Violation("NOT_UPPER_TRIANGULAR", f"edge ({i}, {j}) is not strictly upper")
            )
    if len(cell.ops) != n - 2:
        violations.append(
            Violation("BAD_OP_COUNT", f"{len(cell.ops)} ops for {n - 2} intermediate nodes")
        )
    live = on_path_nodes(n, edges)
    for v in range(n):
        if v not in live:
            violations.append(
                Violation("DANGLING_NODE", f"node {v} lies on no IN->OUT path", node=v)
            )
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class Genotype:
    """Fixed-length 289-bit identifier of a cell.

    Stored as one integer over 296 bits (37 bytes); bit index b maps to
    integer bit 295 - b so that the hex form reads most-significant-bit
    first. The low 7 integer bits are padding and must stay zero.
    """

    word: int

    def __post_init__(self) -> None:
        if not (0 <= self.word < 1 << _WORD_BITS):
            raise GenotypeError("BAD_GENOTYPE", "genotype word out of range")
        if self.word & 0x7F:
            raise GenotypeError("BAD_GENOTYPE", "padding bits must be zero")

    def __len__(self) -> int:
        return GENOTYPE_BITS

    @classmethod
    def zeros(cls) -> "Genotype":
        return cls(0)

    @classmethod
    def from_set_bits(cls, indices: Iterable[int]) -> "Genotype":
        word = 0
        for b in indices:
            if not (0 <= b < GENOTYPE_BITS):
                raise GenotypeError("BAD_GENOTYPE", f"bit index {b} out of range")
            word |= 1 << (_WORD_BITS - 1 - b)
        return cls(word)

    @classmethod
    def from_hex(cls, text: str) -> "Genotype":
        if len(text) != 2 * GENOTYPE_BYTES:
            raise GenotypeError(
                "BAD_GENOTYPE", f"expected {2 * GENOTYPE_BYTES} hex chars, got {len(text)}"
            )
        if text != text.lower():
            raise GenotypeError("BAD_GENOTYPE", "genotype hex must be lowercase")
        try:
            word = int.from_bytes(bytes.fromhex(text), "big")
        except ValueError as exc:
            raise GenotypeError("BAD_GENOTYPE", f"not a hex string: {exc}") from exc
        if word & 0x7F:
            raise GenotypeError("BAD_GENOTYPE", "padding bits must be zero")
        return cls(word)

    def to_hex(self) -> str:
        return self.word.to_bytes(GENOTYPE_BYTES, "big").hex()

    def bit(self, b: int) -> int:
        if not (0 <= b < GENOTYPE_BITS):
            raise GenotypeError("BAD_GENOTYPE", f"bit index {b} out of range")
        return (self.word >> (_WORD_BITS - 1 - b)) & 1

    def bit_rc(self, i: int, j: int) -> int:
        return self.bit(bit_index(i, j))

    def flip(self, b: int) -> "Genotype":
        if not (0 <= b < GENOTYPE_BITS):
            raise GenotypeError("BAD_GENOTYPE", f"bit index {b} out of range")
        return Genotype(self.word ^ (1 << (_WORD_BITS - 1 - b)))

    def set_bits(self) -> tuple[int, ...]:
        """Indices of set bits, ascending."""
        out = []
        w = self.word
        while w:
            low = w & -w
            out.append(_WORD_BITS - low.bit_length())
            w ^= low
        out.reverse()
        return tuple(out)

    @property
    def popcount(self) -> int:
        return self.word.bit_count()

    def as_int_lsb0(self) -> int:
        """Little-bit-order integer: bit b of the genotype becomes bit b.

        Used where a plain bitstring view is needed (NK evaluation).
        """
        x = 0
        for b in self.set_bits():
            x |= 1 << b
        return x


def hamming(a: Genotype, b: Genotype) -> int:
    """Number of differing bit positions between two genotypes."""
    if len(a) != len(b):  # fixed-length type; guards foreign subclasses
        raise GenotypeError("LENGTH_MISMATCH", f"{len(a)} vs {len(b)} bits")
    return (a.word ^ b.word).bit_count()


def encode(cell: CellSpec) -> Genotype:
    """Map a valid cell onto its 289-bit genotype, one set bit per edge."""
    report = validate_cell(cell)
    if not report.ok:
        raise CellError(
            "INVALID_CELL",
            "cell fails validation: " + ", ".join(report.codes()),
            report=report,
        )
    n = cell.num_nodes

    def expanded(node: int) -> int:
        if node == 0:
            return IN_NODE
        if node == n - 1:
            return OUT_NODE
        return slot_node(node, OPS.index(cell.ops[node - 1]))

    bits = [bit_index(expanded(i), expanded(j)) for i, j in cell.edges()]
    return Genotype.from_set_bits(bits)


# Expanded node index -> owning cell position, as a flat lookup table.
_NODE_POS = tuple(
    IN_POSITION if node == IN_NODE else (OUT_POSITION if node == OUT_NODE else 1 + (node - 1) // 3)
    for node in range(EXPANDED_NODES)
)


def _decode_positions(g: Genotype) -> tuple[list[tuple[int, int]], list[int], dict[int, int]]:
    """Shared decode front end: full validity checking on the position graph.

    Returns (position edges, used intermediate positions ascending, position
    -> active expanded node). Raises DecodeError exactly as decode() does;
    building the CellSpec afterwards cannot fail.
    """
    bits = g.set_bits()
    if len(bits) > MAX_EDGES:
        raise DecodeError("INVALID_STRUCTURE", f"{len(bits)} edges exceeds limit {MAX_EDGES}")

    slot_of: dict[int, int] = {}
    pos_edges: list[tuple[int, int]] = []
    for b in bits:
        i, j = divmod(b, EXPANDED_NODES)
        for node in (i, j):
            if node != IN_NODE and node != OUT_NODE:
                pos = _NODE_POS[node]
                prior = slot_of.setdefault(pos, node)
                if prior != node:
                    raise DecodeError(
                        "SLOT_CONFLICT",
                        f"position {pos} has edges on operator slots {sorted((prior, node))}",
                    )
        pos_edges.append((_NODE_POS[i], _NODE_POS[j]))
    for p, q in pos_edges:
        if p >= q:
            raise DecodeError("NOT_A_DAG", f"edge between positions {p} and {q}")

    used = sorted(slot_of)
    if used != list(range(1, len(used) + 1)):
        raise DecodeError(
            "INVALID_STRUCTURE",
            f"intermediate positions {used} are not the contiguous canonical placement",
        )

    # Every position (IN and OUT included) must sit on some IN->OUT path.
    succ: dict[int, list[int]] = {}
    pred: dict[int, list[int]] = {}
    for p, q in pos_edges:
        succ.setdefault(p, []).append(q)
        pred.setdefault(q, []).append(p)
    fwd = _reachable(IN_POSITION, succ)
    bwd = _reachable(OUT_POSITION, pred)
    live = fwd & bwd
    for pos in (IN_POSITION, OUT_POSITION, *used):
        if pos not in live:
            raise DecodeError(
                "INVALID_STRUCTURE", f"position {pos} lies on no IN->OUT path"
            )
    return pos_edges, used, slot_of


def decode(g: Genotype) -> CellSpec:
    """Reconstruct the unique cell a genotype encodes.

    Raises DecodeError with code SLOT_CONFLICT (a position drives two
    operator slots), NOT_A_DAG (an edge runs backwards or within one
    position), or INVALID_STRUCTURE (too many edges, non-canonical
    placement, or an off-path node).
    """
    pos_edges, used, slot_of = _decode_positions(g)
    num_nodes = len(used) + 2

    def node_of(pos: int) -> int:
        return pos if pos != OUT_POSITION else num_nodes - 1

    adjacency = [[False] * num_nodes for _ in range(num_nodes)]
    for p, q in pos_edges:
        adjacency[node_of(p)][node_of(q)] = True
    ops = tuple(OPS[node_op_index(slot_of[pos])] for pos in used)
    return CellSpec(num_nodes, tuple(tuple(r) for r in adjacency), ops)


def decodes(g: Genotype) -> bool:
    """True when the genotype decodes without error."""
    try:
        _decode_positions(g)
    except DecodeError:
        return False
    return True


def neighbors(g: Genotype, mode: NeighborMode) -> list[Genotype]:
    """Single-bit-flip neighborhood, ordered by flipped bit index.

    RAW returns all 289 flips; VALID keeps only the flips that decode.
    """
    if mode == "RAW":
        return [g.flip(b) for b in range(GENOTYPE_BITS)]
    if mode != "VALID":
        raise ValueError(f"unknown neighborhood mode: {mode!r}")

    try:
        base = decode(g)
    except DecodeError:
        return [y for b in range(GENOTYPE_BITS) if decodes(y := g.flip(b))]

    # Fast path for a decodable base. Clearing a bit can orphan nodes or
    # break the canonical placement, so those few flips are re-decoded in
    # full. Setting a bit is valid exactly when it joins the active slots
    # of two used positions in forward order and the edge budget allows it:
    # a flip that touches an unused slot either conflicts with the active
    # one or leaves a single-edge (hence off-path) node.
    found: list[tuple[int, Genotype]] = []
    for b in g.set_bits():
        y = g.flip(b)
        if decodes(y):
            found.append((b, y))
    if g.popcount < MAX_EDGES:
        n = base.num_nodes
        active = [IN_NODE]
        active.extend(slot_node(p, OPS.index(base.ops[p - 1])) for p in range(1, n - 1))
        active.append(OUT_NODE)
        for u, v in combinations(active, 2):
            b = bit_index(u, v)
            if not g.bit(b):
                found.append((b, g.flip(b)))
    found.sort(key=lambda t: t[0])
    return [y for _, y in found]
