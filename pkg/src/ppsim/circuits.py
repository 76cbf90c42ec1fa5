"""Brick-wall circuits of nearest-neighbour PPUs and their builders.

A circuit lists layers of ``(gate, q)`` placements, each gate acting on
qubits ``q, q+1``.  Layers alternate between even and odd offsets.  The
boundary states are computational basis states given as bitstrings.
"""
import json
from dataclasses import dataclass, field

import numpy as np

from . import gates as G

FORMAT_NAME = "ppsim-circuit"
FORMAT_VERSION = 1


class LayoutError(ValueError):
    pass


class InvalidBoundaryError(ValueError):
    pass


def parity_even(bits):
    return bits.count("1") % 2 == 0


def _check_bits(bits, L, label):
    if len(bits) != L or set(bits) - {"0", "1"}:
        raise InvalidBoundaryError(f"{label} must be a length-{L} bitstring, got {bits!r}")
    if not parity_even(bits):
        raise InvalidBoundaryError(f"{label}={bits!r} has odd parity")


@dataclass
class Circuit:
    L: int
    layers: list = field(default_factory=list)
    psi_i: str = ""
    psi_f: str = ""

    def __post_init__(self):
        if not self.psi_i:
            self.psi_i = "0" * self.L
        if not self.psi_f:
            self.psi_f = "0" * self.L
        self.layers = [sorted(layer, key=lambda p: p[1]) for layer in self.layers]
        self.validate()

    def validate(self):
        if self.L < 2 and any(self.layers):
            raise LayoutError("gates need at least two qubits")
        _check_bits(self.psi_i, self.L, "psi_i")
        _check_bits(self.psi_f, self.L, "psi_f")
        prev = None
        for li, layer in enumerate(self.layers):
            used = set()
            for gate, q in layer:
                if not isinstance(gate, G.PPUGate):
                    raise LayoutError(f"layer {li}: not a PPUGate: {gate!r}")
                if not 0 <= q < self.L - 1:
                    raise LayoutError(f"layer {li}: gate at q={q} out of range for L={self.L}")
                if {q, q + 1} & used:
                    raise LayoutError(f"layer {li}: overlapping placement at q={q}")
                used |= {q, q + 1}
            offsets = {q % 2 for _, q in layer}
            if len(offsets) > 1:
                raise LayoutError(f"layer {li}: mixed brick-wall offsets")
            if offsets:
                (off,) = offsets
                shift = (off - li) % 2
                if prev is not None and shift != prev:
                    raise LayoutError(f"layer {li}: offset does not alternate")
                prev = shift

    @property
    def s(self):
        return sum(len(layer) for layer in self.layers)

    @property
    def depth(self):
        return len(self.layers)

    def placements(self):
        """(layer, q, gate) in layer-major, left-to-right order."""
        for li, layer in enumerate(self.layers):
            for gate, q in layer:
                yield li, q, gate

    def with_boundaries(self, psi_i=None, psi_f=None):
        return Circuit(self.L, self.layers, psi_i or self.psi_i, psi_f or self.psi_f)

    def is_number_conserving(self):
        return all(g.is_number_conserving() for _, _, g in self.placements())


def brickwall_slots(L, d, offset=0):
    """Gate positions of a depth-``d`` brick wall, layer by layer."""
    return [list(range((offset + li) % 2, L - 1, 2)) for li in range(d)]


def _require_even(L):
    if L < 2 or L % 2:
        raise LayoutError(f"L must be even and >= 2, got {L}")


def trotter_circuit(L, n, t=1.0, U=0.0, dt=0.1, psi_i=None, psi_f=None):
    """First-order Trotter circuit for the two-site-cell tight-binding chain.

    Each step is an intra-cell layer of fsim(t*dt, 0) on bonds (0,1), (2,3), ...
    followed by an inter-cell layer of fsim(t*dt, U*dt) on (1,2), (3,4), ...
    """
    _require_even(L)
    if n < 0:
        raise LayoutError("n must be non-negative")
    hop = G.fsim(t * dt, 0.0)
    inter = G.fsim(t * dt, U * dt)
    layers = []
    for _ in range(n):
        layers.append([(hop, q) for q in range(0, L - 1, 2)])
        layers.append([(inter, q) for q in range(1, L - 1, 2)])
    return Circuit(L, layers, psi_i or "0" * L, psi_f or psi_i or "0" * L)


def floquet_circuit(L, d, theta, phi, psi_i=None, psi_f=None):
    """``d`` periods of a fsim(theta, 0) layer followed by a fsim(theta, phi) layer."""
    _require_even(L)
    if d < 0:
        raise LayoutError("d must be non-negative")
    gauss = G.fsim(theta, 0.0)
    inter = G.fsim(theta, phi)
    layers = []
    for _ in range(d):
        layers.append([(gauss, q) for q in range(0, L - 1, 2)])
        layers.append([(inter, q) for q in range(1, L - 1, 2)])
    return Circuit(L, layers, psi_i or "0" * L, psi_f or psi_i or "0" * L)


def random_circuit(L, d, m, kind="cphase", phi=0.5, gamma_cutoff=None, seed=0,
                   psi_i=None, psi_f=None):
    """Random matchgate brick wall with ``m`` slots replaced by non-matchgates.

    ``kind`` is ``"cphase"`` (all planted gates cphase(phi)) or ``"ppu"``
    (Haar PPUs, optionally restricted to ``|gamma| <= gamma_cutoff``).
    """
    if L < 2:
        raise LayoutError("L must be >= 2")
    rng = np.random.default_rng(seed)
    slots = [(li, q) for li, qs in enumerate(brickwall_slots(L, d)) for q in qs]
    if m > len(slots):
        raise LayoutError(f"cannot plant {m} gates in {len(slots)} slots")
    planted = set(int(i) for i in rng.choice(len(slots), size=m, replace=False)) if m else set()
    layers = [[] for _ in range(d)]
    for i, (li, q) in enumerate(slots):
        if i in planted:
            if kind == "cphase":
                gate = G.cphase(phi)
            elif kind == "ppu":
                gate = G.random_ppu(gamma_cutoff=gamma_cutoff, rng=rng)
            else:
                raise ValueError(f"unknown kind {kind!r}")
        else:
            gate = G.random_matchgate(rng)
        layers[li].append((gate, q))
    return Circuit(L, layers, psi_i or "0" * L, psi_f or psi_i or "0" * L)


def half_filling_states(L, variant="h"):
    """Half-filled basis states.

    ``h`` fills the left half (1..10..0) and has a non-trivial hole cutoff;
    ``e`` alternates (1010...) and has none until the second period.
    """
    if L <= 0 or L % 4:
        raise ValueError(f"half-filling patterns need L divisible by 4, got {L}")
    if variant == "h":
        return "1" * (L // 2) + "0" * (L // 2)
    if variant == "e":
        return "10" * (L // 2)
    raise ValueError(f"unknown variant {variant!r}")


# -- circuit files -----------------------------------------------------------

def _gate_record(gate, q):
    rec = {"q": q, "gate": gate.name}
    if gate.name == "cphase":
        rec["phi"] = gate.params[0]
    elif gate.name == "fsim":
        rec["theta"], rec["phi"] = gate.params
    elif gate.name not in ("identity", "cz", "swap"):
        rec["gate"] = "ppu"
        rec["a"] = [[[z.real, z.imag] for z in row] for row in gate.a]
        rec["b"] = [[[z.real, z.imag] for z in row] for row in gate.b]
    return rec


def _gate_from_record(rec):
    name = rec["gate"]
    if name == "identity":
        return G.identity()
    if name == "cz":
        return G.cz()
    if name == "swap":
        return G.swap()
    if name == "cphase":
        return G.cphase(rec["phi"])
    if name == "fsim":
        return G.fsim(rec["theta"], rec["phi"])
    if name == "ppu":
        a = np.array([[complex(*z) for z in row] for row in rec["a"]])
        b = np.array([[complex(*z) for z in row] for row in rec["b"]])
        return G.make_ppu(a, b)
    raise ValueError(f"unknown gate name {name!r}")


def circuit_to_dict(circ):
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "L": circ.L,
        "psi_i": circ.psi_i,
        "psi_f": circ.psi_f,
        "layers": [[_gate_record(g, q) for g, q in layer] for layer in circ.layers],
    }


def circuit_from_dict(data):
    if data.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} document")
    if data.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported circuit format version {data.get('version')}")
    layers = [[(_gate_from_record(r), int(r["q"])) for r in layer] for layer in data["layers"]]
    return Circuit(int(data["L"]), layers, data["psi_i"], data["psi_f"])


def dump_circuit(circ, path):
    with open(path, "w") as fh:
        json.dump(circuit_to_dict(circ), fh, indent=1)
        fh.write("\n")


def load_circuit(path):
    with open(path) as fh:
        return circuit_from_dict(json.load(fh))
