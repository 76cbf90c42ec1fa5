"""Self-check suites run by ``ppsim verify`` (small scale, L <= 10)."""
import numpy as np

from . import circuits as C
from . import gates as G
from .contract import contract_exact, cutoff_order, empirical_cutoff
from .decomp import extent_fsim, gamma_split, reconstruct_gamma, xi_split_cphase
from .fermionize import build_network, gate_tensor, gaussian_overlap
from .oracle import overlap
from .pfaffian import pfaffian


def close(c, ref, rel=1e-9, small=1e-3, abs_tol=1e-12):
    if abs(ref) < small:
        return abs(c - ref) <= abs_tol
    return abs(c - ref) <= rel * abs(ref)


def random_test_circuit(seed, L_range=(4, 10), max_depth=6, max_m=6, matchgate_only=False):
    """Seeded brick wall with a random half-filled-or-not even boundary."""
    rng = np.random.default_rng(seed)
    L = int(rng.integers(L_range[0] // 2, L_range[1] // 2 + 1)) * 2
    d = int(rng.integers(1, max_depth + 1))
    slots = sum(len(x) for x in C.brickwall_slots(L, d))
    m = 0 if matchgate_only else int(rng.integers(0, min(slots, max_m) + 1))
    bits = []
    for _ in range(2):
        b = rng.integers(0, 2, L)
        if b.sum() % 2:
            b[int(rng.integers(L))] ^= 1
        bits.append("".join(map(str, b)))
    kind = "cphase" if seed % 2 else "ppu"
    phi = float(rng.uniform(-np.pi, np.pi))
    return C.random_circuit(L, d, m, kind=kind, phi=phi, seed=seed, psi_i=bits[0], psi_f=bits[1])


def suite_oracle(n=30, seed0=0):
    worst = 0.0
    failures = 0
    for seed in range(seed0, seed0 + n):
        circ = random_test_circuit(seed)
        ref = overlap(circ)
        c = contract_exact(build_network(circ)).c
        worst = max(worst, abs(c - ref) / max(abs(ref), 1e-3))
        failures += not close(c, ref)
    return failures == 0, f"{n} circuits, worst scaled error {worst:.2e}"


def suite_matchgate(n=30, seed0=1000):
    failures = 0
    for seed in range(seed0, seed0 + n):
        circ = random_test_circuit(seed, matchgate_only=True)
        failures += not close(gaussian_overlap(build_network(circ)), overlap(circ), rel=1e-10)
    return failures == 0, f"{n} circuits, {failures} mismatches"


def suite_cutoff():
    lines, ok = [], True
    for L, v, n in ((8, "h", 2), (8, "e", 2), (12, "h", 1), (12, "e", 2)):
        psi = C.half_filling_states(L, v)
        circ = C.trotter_circuit(L, n, 1.0, 2.0, 0.25, psi, psi)
        formula = cutoff_order(circ)
        found = empirical_cutoff(build_network(circ))
        ok &= formula == found
        lines.append(f"L={L} {v} n={n}: k_c {formula} vs detected {found}")
    return ok, "; ".join(lines)


def suite_decomp(n=300, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        g = G.random_ppu(rng=rng)
        t = gate_tensor(g)
        worst = max(worst, abs(t.N**2 * t.gamma - G.gamma_det(g)))
        worst = max(worst, np.max(np.abs(reconstruct_gamma(gamma_split(t)) - g.matrix())))
    for phi in np.linspace(-np.pi, np.pi, 41):
        sp = xi_split_cphase(phi)
        worst = max(worst, abs(sp.l1**2 - extent_fsim(phi)))
    return bool(worst <= 1e-10), f"worst deviation {worst:.2e}"


def suite_pfaffian(dims=(2, 10, 50, 120), seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in dims:
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m = x - x.T
        pf = pfaffian(m)
        det = np.linalg.det(m)
        worst = max(worst, abs(pf**2 - det) / abs(det))
    return bool(worst <= 1e-8), f"dims {list(dims)}, worst relative pf^2/det error {worst:.2e}"


SUITES = {
    "oracle": suite_oracle,
    "matchgate": suite_matchgate,
    "cutoff": suite_cutoff,
    "decomposition": suite_decomp,
    "pfaffian": suite_pfaffian,
}


def run_all():
    return [(name, *fn()) for name, fn in SUITES.items()]
