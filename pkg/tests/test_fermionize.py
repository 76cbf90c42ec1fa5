import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppsim import circuits as C
from ppsim import gates as G
from ppsim.fermionize import (
    UnsupportedGateError,
    build_network,
    gate_tensor,
    gaussian_overlap,
    tensor_entries,
)
from ppsim.oracle import overlap
from ppsim.pfaffian import pfaffian


def test_cphase_tensor():
    t = gate_tensor(G.cphase(0.9))
    assert t.N == 1
    assert t.gamma == pytest.approx(np.exp(0.9j) - 1)
    assert t.A[0, 3] == 1 and t.A[1, 2] == 1


def test_tensor_is_antisymmetric_and_read_only():
    t = gate_tensor(G.random_ppu(3))
    assert np.allclose(t.A, -t.A.T)
    with pytest.raises(ValueError):
        t.A[0, 1] = 0


@given(st.integers(0, 2**31 - 1))
def test_tensor_reproduces_gate(seed):
    g = G.random_ppu(seed)
    t = gate_tensor(g)
    assert np.max(np.abs(tensor_entries(t) - g.matrix())) < 1e-12
    assert abs(t.N**2 * t.gamma - (np.linalg.det(g.a) - np.linalg.det(g.b))) < 1e-10


def test_vanishing_vacuum_entry_rejected():
    g = G.make_ppu([[0, 1], [1, 0]], np.eye(2))
    with pytest.raises(UnsupportedGateError):
        gate_tensor(g)


def _random_mg_circuit(seed, L, d):
    rng = np.random.default_rng(seed)
    layers = [[(G.random_matchgate(rng), q) for q in qs] for qs in C.brickwall_slots(L, d)]
    bits = []
    for _ in range(2):
        b = rng.integers(0, 2, L)
        if b.sum() % 2:
            b[0] ^= 1
        bits.append("".join(map(str, b)))
    return C.Circuit(L, layers, *bits)


@given(st.integers(0, 2**31 - 1), st.sampled_from([2, 4, 6, 8]), st.integers(0, 5))
def test_matchgate_closed_form(seed, L, d):
    circ = _random_mg_circuit(seed, L, d)
    net = build_network(circ)
    assert net.m == 0
    ref = overlap(circ)
    assert abs(gaussian_overlap(net) - ref) <= 1e-10 * max(1, abs(ref))


def test_empty_circuit():
    assert gaussian_overlap(build_network(C.Circuit(4, [], "0110", "0110"))) == pytest.approx(1)
    net = build_network(C.Circuit(4, [], "0110", "1100"))
    assert net.zero and gaussian_overlap(net) == 0


def test_single_cz_hole_formula():
    # c = N (pf M - 2 pf M|_hole) for one CZ
    circ = C.Circuit(2, [[(G.cz(), 0)]], "11", "11")
    net = build_network(circ)
    keep = np.setdiff1d(np.arange(net.dim), net.site_modes(0))
    c = net.norm * (pfaffian(net.M) - 2 * pfaffian(net.M[np.ix_(keep, keep)]))
    assert c == pytest.approx(-1)
    assert overlap(circ) == pytest.approx(-1)


def test_blocked_site():
    # a non-matchgate touching a |0> boundary leg cannot host a hole
    circ = C.Circuit(4, [[(G.cz(), 0), (G.cz(), 2)]], "0011", "0011")
    net = build_network(circ)
    assert [x.blocked for x in net.nonmg] == [True, False]


def test_expansion_site_override():
    circ = C.floquet_circuit(4, 1, 0.3, 0.0)
    assert build_network(circ).m == 0
    net = build_network(circ, expansion_sites=[2])
    assert net.m == 1 and net.nonmg[0].gamma == pytest.approx(0, abs=1e-15)
    with pytest.raises(IndexError):
        build_network(circ, expansion_sites=[9])


def test_fingerprint_stable_and_sensitive():
    a = build_network(C.floquet_circuit(4, 2, 0.3, 0.5))
    b = build_network(C.floquet_circuit(4, 2, 0.3, 0.5))
    c = build_network(C.floquet_circuit(4, 2, 0.31, 0.5))
    assert a.fingerprint() == b.fingerprint() != c.fingerprint()
