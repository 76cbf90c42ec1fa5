"""Fermionic tensors of PPUs and the circuit-wide generating matrix.

Each gate owns four Grassmann modes, ordered ``in_q, in_q+1, out_q+1, out_q``
(counter-clockwise around the gate box when time runs upward and qubit 0 is
on the left).  With this ordering

    G_{(o1 o2),(i1 i2)} = T[i1, i2, o2, o1],

and a PPU with ``a11 != 0`` becomes ``N exp(theta^T A theta / 2) + N gamma
theta_1 theta_2 theta_3 theta_4``.

Wires between gates become ``C`` entries of +-1.  Their signs are not read off
a picture: the circuit graph is planar and every gate lists its modes in the
same rotational sense, so the sign that a Pfaffian term picks up relative to
the bosonic contraction is an affine function of the wire occupations.  The
edge signs are solved over GF(2) on a fundamental-cycle basis, and the
remaining constant is folded into the network normalisation.

Boundary handling: a boundary leg fixed to 0 drops its mode; a leg fixed to
1 keeps its mode with no wire partner.
"""
import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .circuits import InvalidBoundaryError, LayoutError, parity_even
from .gates import MG_TOL, gamma_det
from .pfaffian import pfaffian

A11_TOL = 1e-12

IN1, IN2, OUT2, OUT1 = range(4)


class UnsupportedGateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GateTensor:
    N: complex
    A: np.ndarray
    gamma: complex
    gate: object = None


def gate_tensor(g):
    a, b = g.a, g.b
    n = a[0, 0]
    if abs(n) <= A11_TOL:
        raise UnsupportedGateError(
            f"{g!r} has G_(00,00) = a11 = {n:.3g}; gates with a vanishing "
            "vacuum entry need a different fermionic representation"
        )
    A = np.array(
        [
            [0, a[0, 1], b[0, 1], b[1, 1]],
            [-a[0, 1], 0, b[0, 0], b[1, 0]],
            [-b[0, 1], -b[0, 0], 0, a[1, 0]],
            [-b[1, 1], -b[1, 0], -a[1, 0], 0],
        ],
        dtype=np.complex128,
    ) / n
    pfA = A[0, 1] * A[2, 3] - A[0, 2] * A[1, 3] + A[0, 3] * A[1, 2]
    gamma = a[1, 1] / n - pfA
    A.setflags(write=False)
    return GateTensor(complex(n), A, complex(gamma), g)


def tensor_entries(t, gamma=None):
    """Dense 4x4 gate rebuilt from ``N exp(A) + N gamma theta^4``."""
    gam = t.gamma if gamma is None else gamma
    A, N = t.A, t.N
    pfA = pfaffian(A)
    # T[x1, x2, x3, x4] in mode order (in1, in2, out2, out1)
    T = np.zeros((2, 2, 2, 2), dtype=np.complex128)
    T[0, 0, 0, 0] = N
    for p in range(4):
        for q in range(p + 1, 4):
            idx = [0, 0, 0, 0]
            idx[p] = idx[q] = 1
            T[tuple(idx)] = N * A[p, q]
    T[1, 1, 1, 1] = N * (pfA + gam)
    g = np.zeros((4, 4), dtype=np.complex128)
    for x1 in range(2):
        for x2 in range(2):
            for x3 in range(2):
                for x4 in range(2):
                    g[2 * x4 + x3, 2 * x1 + x2] = T[x1, x2, x3, x4]
    return g


@dataclass(frozen=True)
class NonMGSite:
    site: int
    gamma: complex
    blocked: bool  # a leg is pinned to 0 by a boundary, so every hole term vanishes


@dataclass(eq=False)
class GateNetwork:
    M: np.ndarray
    norm: complex
    prod_N: complex
    sign: int
    mode_map: np.ndarray  # (s, 4) surviving global index per gate leg, -1 if dropped
    tensors: list
    nonmg: list
    s: int
    L: int
    psi_i: str
    psi_f: str
    placements: list = field(default_factory=list)  # (layer, q) per site
    edges: list = field(default_factory=list)  # (mode_u, mode_v, sigma) on raw ids
    zero: bool = False

    @property
    def m(self):
        return len(self.nonmg)

    @property
    def dim(self):
        return self.M.shape[0]

    def site_modes(self, site):
        idx = self.mode_map[site]
        return idx[idx >= 0]

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.M, dtype="<c16").tobytes())
        h.update(repr((self.M.shape, self.sign, self.zero,
                       [(x.site, x.blocked) for x in self.nonmg])).encode())
        return h.hexdigest()


# -- layout ----------------------------------------------------------------

def _wire_layout(circuit):
    """Trace qubit wires through the layers.

    Returns internal edges (out-mode, in-mode), boundary legs as
    ``{mode: bit}``, and the bits of qubits no gate touches.
    """
    last = [None] * circuit.L
    edges, boundary = [], {}
    placements = []
    for site, (li, q, _) in enumerate(circuit.placements()):
        placements.append((li, q))
        base = 4 * site
        for leg, qq in ((IN1, q), (IN2, q + 1)):
            if last[qq] is None:
                boundary[base + leg] = circuit.psi_i[qq]
            else:
                edges.append((last[qq], base + leg))
        last[q], last[q + 1] = base + OUT1, base + OUT2
    bare = []
    for qq, mode in enumerate(last):
        if mode is None:
            bare.append((circuit.psi_i[qq], circuit.psi_f[qq]))
        else:
            boundary[mode] = circuit.psi_f[qq]
    return edges, boundary, bare, placements


def _perm_parity(seq):
    """Parity (0/1) of the permutation sorting ``seq``."""
    order = np.argsort(seq, kind="stable")
    seen = np.zeros(len(seq), dtype=bool)
    parity = 0
    for i in range(len(seq)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = order[j]
                length += 1
            parity ^= (length - 1) & 1
    return parity


class _SignSolver:
    """Sign of a Pfaffian matching term relative to the bosonic term."""

    def __init__(self, s, edges, index, lone):
        self.s = s
        self.edges = edges
        self.index = index  # raw mode -> surviving position (or -1)
        self.lone = lone  # raw modes pinned to 1
        self.edge_at = {}
        for e, (u, v) in enumerate(edges):
            self.edge_at[u] = e
            self.edge_at[v] = e

    def config_sign(self, x, sigma):
        """+-1 for occupations ``x`` (bool per edge) under edge signs ``sigma``."""
        seq, sgn = [], 1
        for e, (u, v) in enumerate(self.edges):
            if not x[e]:
                a, b = self.index[u], self.index[v]
                if a > b:
                    a, b = b, a
                seq += [a, b]
                sgn *= sigma[e]
        for g in range(self.s):
            occ = []
            for leg in range(4):
                raw = 4 * g + leg
                if self.index[raw] < 0:
                    continue
                e = self.edge_at.get(raw)
                if (e is not None and x[e]) or raw in self.lone:
                    occ.append(self.index[raw])
            if len(occ) % 2:
                raise AssertionError("odd gate occupation in sign evaluation")
            seq += occ  # consecutive pairs, increasing: no local crossings
        return sgn * (-1 if _perm_parity(seq) else 1)


def _spanning_forest(s, edges):
    adj = [[] for _ in range(s)]
    for e, (u, v) in enumerate(edges):
        gu, gv = u // 4, v // 4
        adj[gu].append((gv, e))
        adj[gv].append((gu, e))
    parent = [-1] * s
    parent_edge = [-1] * s
    depth = [0] * s
    root = [-1] * s
    order = []
    for r in range(s):
        if root[r] >= 0:
            continue
        root[r] = r
        dq = deque([r])
        while dq:
            g = dq.popleft()
            order.append(g)
            for h, e in adj[g]:
                if root[h] < 0:
                    root[h], parent[h], parent_edge[h], depth[h] = r, g, e, depth[g] + 1
                    dq.append(h)
    return parent, parent_edge, depth, root, order


def _tree_path(a, b, parent, parent_edge, depth):
    path = []
    while depth[a] > depth[b]:
        path.append(parent_edge[a])
        a = parent[a]
    while depth[b] > depth[a]:
        path.append(parent_edge[b])
        b = parent[b]
    while a != b:
        path += [parent_edge[a], parent_edge[b]]
        a, b = parent[a], parent[b]
    return path


def solve_signs(s, edges, index, lone):
    """Edge signs making the matching sign constant; returns (sigma, const, feasible)."""
    nE = len(edges)
    parent, parent_edge, depth, root, order = _spanning_forest(s, edges)
    # base configuration: a T-join that gives every gate an even occupation
    demand = [0] * s
    for raw in lone:
        demand[raw // 4] ^= 1
    x0 = np.zeros(nE, dtype=bool)
    for g in reversed(order):
        if demand[g] and parent[g] >= 0:
            x0[parent_edge[g]] ^= True
            demand[g] = 0
            demand[parent[g]] ^= 1
    if any(demand):
        return np.ones(nE, dtype=np.int8), 0, False
    solver = _SignSolver(s, edges, index, lone)
    sigma = np.ones(nE, dtype=np.int8)
    tree = set(e for e in parent_edge if e >= 0)
    t0 = solver.config_sign(x0, sigma)
    flips = {}
    for f in range(nE):
        if f in tree:
            continue
        u, v = edges[f]
        z = _tree_path(u // 4, v // 4, parent, parent_edge, depth) + [f]
        x = x0.copy()
        x[z] ^= True
        flips[f] = solver.config_sign(x, sigma) * t0
    for f, val in flips.items():
        sigma[f] = val
    const = solver.config_sign(x0, sigma)
    return sigma, const, True


def build_network(circuit, expansion_sites=None):
    """Assemble ``M = (+)A + C`` and the prefactor for ``c = norm * pf(M) + ...``.

    ``expansion_sites`` overrides which gates are expanded (default: every gate
    with ``|gamma| > MG_TOL``), e.g. to keep a parameter sweep's network fixed
    at points where the swept gates happen to be matchgates.
    """
    if not (parity_even(circuit.psi_i) and parity_even(circuit.psi_f)):
        raise InvalidBoundaryError("boundary states must have even parity")
    tensors = [gate_tensor(g) for _, _, g in circuit.placements()]
    s = len(tensors)
    edges, boundary, bare, placements = _wire_layout(circuit)
    wired = set(u for e in edges for u in e)
    for raw in range(4 * s):
        if raw not in wired and raw not in boundary:
            raise LayoutError(f"dangling leg {raw % 4} at site {raw // 4}")

    survive = [raw for raw in range(4 * s) if boundary.get(raw, "1") == "1"]
    index = np.full(4 * s, -1, dtype=np.int64)
    index[survive] = np.arange(len(survive))
    lone = frozenset(raw for raw, bit in boundary.items() if bit == "1")

    sigma, const, feasible = solve_signs(s, edges, index, lone)

    n = len(survive)
    M = np.zeros((n, n), dtype=np.complex128)
    for g, t in enumerate(tensors):
        raw = 4 * g + np.arange(4)
        keep = index[raw] >= 0
        pos = index[raw][keep]
        M[np.ix_(pos, pos)] = t.A[np.ix_(keep, keep)]
    for e, (u, v) in enumerate(edges):
        a, b = index[u], index[v]
        if a > b:
            a, b = b, a
        M[a, b] = sigma[e]
        M[b, a] = -sigma[e]
    M.setflags(write=False)

    prod_N = complex(np.prod([t.N for t in tensors])) if tensors else 1.0 + 0j
    zero = (not feasible) or any(bi != bf for bi, bf in bare)
    norm = 0j if zero else const * prod_N

    if expansion_sites is None:
        expansion_sites = [g for g, t in enumerate(tensors) if abs(t.gamma) > MG_TOL]
    nonmg = []
    for g in sorted(set(int(g) for g in expansion_sites)):
        if not 0 <= g < s:
            raise IndexError(f"expansion site {g} out of range")
        blocked = bool(np.any(index[4 * g:4 * g + 4] < 0))
        nonmg.append(NonMGSite(g, tensors[g].gamma, blocked))

    return GateNetwork(
        M=M,
        norm=complex(norm),
        prod_N=prod_N,
        sign=int(const),
        mode_map=index.reshape(s, 4) if s else np.zeros((0, 4), dtype=np.int64),
        tensors=tensors,
        nonmg=nonmg,
        s=s,
        L=circuit.L,
        psi_i=circuit.psi_i,
        psi_f=circuit.psi_f,
        placements=placements,
        edges=[(u, v, int(sg)) for (u, v), sg in zip(edges, sigma)],
        zero=zero,
    )


def gaussian_overlap(net):
    """``norm * pf(M)``: the overlap with every expansion site kept Gaussian."""
    if net.zero:
        return 0j
    return net.norm * pfaffian(net.M)
