"""
Benchmark circuit generators: GHZ, QAOA max-cut, hardware-efficient ansatz and
the two-block "bridge" family. Its optimal cut counts follow a closed form only
while the dense blocks stay on their own side, which `bridge_anchors` enforces;
unpinned, a cut through a block corner can be cheaper.

Randomness comes from `Xoshiro256`, a xoshiro256** generator seeded through
splitmix64, so the same seed reproduces the same edge sets and angles on any
platform or language.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

from qknit.tools.circuit_ir import Circuit, Gate, GateKind
from qknit.tools.errors import InvalidArgument

if TYPE_CHECKING:
    from qknit.tools.cutting_graph import CuttingGraph

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1

# rounds of nearest-neighbour CNOTs per dense block in the bridge family
DENSE_ROUNDS = 2


# ---------------------------------------------------------------------------
# PRNG
# ---------------------------------------------------------------------------


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def splitmix64(state: int) -> Tuple[int, int]:
    """One splitmix64 step. Returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** 1.0 with splitmix64 seeding."""

    def __init__(self, seed: int):
        sm = seed & _MASK64
        self.s: List[int] = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            self.s.append(out)

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise InvalidArgument(f"randbelow needs n > 0, got {n}")
        # reject the low tail so every residue is equally likely
        threshold = ((1 << 64) - n) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n

    def shuffle(self, items: List) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def generate_ghz(n: int) -> Circuit:
    if n < 2:
        raise InvalidArgument(f"GHZ needs n >= 2, got {n}")
    gates = [Gate(GateKind.H, (0,))]
    gates += [Gate(GateKind.CNOT, (i, i + 1)) for i in range(n - 1)]
    return Circuit(n, tuple(gates))


def random_graph_edges(n: int, extra_edge_frac: float, seed: int) -> List[Tuple[int, int]]:
    """Random spanning tree plus round(extra_edge_frac * n) distinct extra edges."""
    if n < 2:
        raise InvalidArgument(f"graph needs n >= 2, got {n}")
    if extra_edge_frac < 0 or not math.isfinite(extra_edge_frac):
        raise InvalidArgument(f"extra_edge_frac must be a finite value >= 0, got {extra_edge_frac}")
    rng = Xoshiro256(seed)

    order = list(range(n))
    rng.shuffle(order)
    edges: List[Tuple[int, int]] = []
    for i in range(1, n):
        parent = order[rng.randbelow(i)]
        child = order[i]
        edges.append((min(parent, child), max(parent, child)))

    taken = set(edges)
    candidates = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in taken]
    wanted = int(math.floor(extra_edge_frac * n + 0.5))
    if wanted > len(candidates):
        logger.warning(f"[generators] only {len(candidates)} extra edges exist for n={n}, wanted {wanted}")
        wanted = len(candidates)
    rng.shuffle(candidates)
    edges.extend(sorted(candidates[:wanted]))
    return edges


def generate_qaoa_maxcut(
    n: int,
    extra_edge_frac: float,
    seed: int,
    layers: int = 1,
    use_crz: bool = False,
) -> Circuit:
    """
    QAOA for max-cut on a seeded random connected graph.

    Each cost term is CNOT-RZ-CNOT on the edge (or a single CRZ with `use_crz`), each
    mixer is H-RZ-H on every qubit. Angles are drawn from the same generator after the
    edge set, so the edge set depends on the seed alone.
    """
    if layers < 1:
        raise InvalidArgument(f"layers must be >= 1, got {layers}")
    edges = random_graph_edges(n, extra_edge_frac, seed)
    rng = Xoshiro256(seed ^ 0x5A5A5A5A)

    gates: List[Gate] = [Gate(GateKind.H, (q,)) for q in range(n)]
    for _ in range(layers):
        gamma = 2 * math.pi * rng.uniform()
        beta = 2 * math.pi * rng.uniform()
        for u, v in edges:
            if use_crz:
                gates.append(Gate(GateKind.CRZ, (u, v), 2 * gamma))
            else:
                gates.append(Gate(GateKind.CNOT, (u, v)))
                gates.append(Gate(GateKind.RZ, (v,), 2 * gamma))
                gates.append(Gate(GateKind.CNOT, (u, v)))
        for q in range(n):
            gates.append(Gate(GateKind.H, (q,)))
            gates.append(Gate(GateKind.RZ, (q,), 2 * beta))
            gates.append(Gate(GateKind.H, (q,)))
    logger.debug(f"[generators] qaoa n={n} edges={len(edges)} layers={layers} crz={use_crz}")
    return Circuit(n, tuple(gates))


def generate_hea(n: int, layers: int, seed: int) -> Circuit:
    if n < 2:
        raise InvalidArgument(f"HEA needs n >= 2, got {n}")
    if layers < 1:
        raise InvalidArgument(f"layers must be >= 1, got {layers}")
    rng = Xoshiro256(seed)
    gates: List[Gate] = []
    for _ in range(layers):
        for q in range(n):
            gates.append(Gate(GateKind.RZ, (q,), 2 * math.pi * rng.uniform()))
            gates.append(Gate(GateKind.H, (q,)))
        gates += [Gate(GateKind.CNOT, (i, i + 1)) for i in range(n - 1)]
    return Circuit(n, tuple(gates))


@dataclass(frozen=True)
class BridgeSpec:
    L: int
    M: int
    k_w: int
    k_v: int

    def __post_init__(self):
        if self.L < 2 or self.M < 2:
            raise InvalidArgument(f"bridge blocks need L, M >= 2, got L={self.L} M={self.M}")
        if self.k_w < 0 or self.k_v < 0:
            raise InvalidArgument(f"k_w and k_v must be >= 0, got k_w={self.k_w} k_v={self.k_v}")

    @property
    def width(self) -> int:
        return self.L + self.M


def _dense_block(first: int, size: int) -> List[Gate]:
    return [
        Gate(GateKind.CNOT, (first + i, first + i + 1))
        for _ in range(DENSE_ROUNDS)
        for i in range(size - 1)
    ]


def generate_bridge(spec: BridgeSpec) -> Circuit:
    """
    Two dense blocks (top: qubits 0..L-1, bottom: L..L+M-1) joined first by k_w CNOTs
    on the fixed pair (L-1, L), then by k_v ladder CNOTs that each sit between fresh
    dense blocks. Only the bridging CNOTs cross the boundary; the dense blocks are not
    dense enough to rule out corner cuts, so pair the circuit with `bridge_anchors`.
    """
    L, M = spec.L, spec.M

    def blocks() -> List[Gate]:
        return _dense_block(0, L) + _dense_block(L, M)

    gates: List[Gate] = blocks()
    gates += [Gate(GateKind.CNOT, (L - 1, L)) for _ in range(spec.k_w)]
    for j in range(spec.k_v):
        gates += blocks()
        gates.append(Gate(GateKind.CNOT, (L - 1 - j % L, L + j % M)))
    gates += blocks()
    return Circuit(spec.width, tuple(gates))


def boundary_crossings(circuit: Circuit, split: int) -> int:
    return sum(1 for _, g in circuit.two_qubit_gates if (g.qubits[0] < split) != (g.qubits[1] < split))


def bridge_anchors(spec: BridgeSpec, graph: "CuttingGraph") -> Dict[int, int]:
    """Pin both endpoints of every intra-block gate: top block to partition 0, bottom to 1."""
    pins: Dict[int, int] = {}
    for edge in graph.gate_edges:
        u, v = edge.endpoints
        qu, qv = graph.qubit_of[u], graph.qubit_of[v]
        if qu < spec.L and qv < spec.L:
            pins[u] = pins[v] = 0
        elif qu >= spec.L and qv >= spec.L:
            pins[u] = pins[v] = 1
    return pins


# ---------------------------------------------------------------------------
# --gen NAME[:params]
# ---------------------------------------------------------------------------

GENERATOR_USAGE = {
    "ghz": "ghz:n",
    "qaoa": "qaoa:n,frac,seed,layers[,crz]",
    "hea": "hea:n,layers,seed",
    "bridge": "bridge:L,M,kw,kv",
}


def _split_spec(text: str) -> Tuple[str, List[str]]:
    name, _, params = text.strip().partition(":")
    name = name.strip().lower()
    if name not in GENERATOR_USAGE:
        raise InvalidArgument(f"unknown generator '{name}', expected one of {sorted(GENERATOR_USAGE)}")
    return name, [p.strip() for p in params.split(",") if p.strip()]


def _ints(name: str, values: Sequence[str], count: int) -> List[int]:
    if len(values) != count:
        raise InvalidArgument(f"'{name}' expects {GENERATOR_USAGE[name]}")
    try:
        return [int(v) for v in values]
    except ValueError as e:
        raise InvalidArgument(f"'{name}' expects {GENERATOR_USAGE[name]}: {e}") from e


def bridge_spec_from_text(text: str) -> Optional[BridgeSpec]:
    name, params = _split_spec(text)
    if name != "bridge":
        return None
    return BridgeSpec(*_ints(name, params, 4))


def generate_from_spec(text: str) -> Circuit:
    """Build a circuit from a `--gen` string such as "ghz:4" or "qaoa:10,0.5,1,1,crz"."""
    name, params = _split_spec(text)
    if name == "ghz":
        return generate_ghz(*_ints(name, params, 1))
    if name == "hea":
        n, layers, seed = _ints(name, params, 3)
        return generate_hea(n, layers, seed)
    if name == "bridge":
        return generate_bridge(BridgeSpec(*_ints(name, params, 4)))

    use_crz = bool(params) and params[-1].lower() == "crz"
    if use_crz:
        params = params[:-1]
    if len(params) != 4:
        raise InvalidArgument(f"'qaoa' expects {GENERATOR_USAGE['qaoa']}")
    try:
        n, frac, seed, layers = int(params[0]), float(params[1]), int(params[2]), int(params[3])
    except ValueError as e:
        raise InvalidArgument(f"'qaoa' expects {GENERATOR_USAGE['qaoa']}: {e}") from e
    return generate_qaoa_maxcut(n, frac, seed, layers, use_crz=use_crz)
