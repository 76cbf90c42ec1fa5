import numpy as np
import pytest

from ppsim import gates as G
from ppsim import oracle as O
from ppsim.circuits import Circuit


def test_basis_state():
    assert O.basis_state("00")[0] == 1
    assert O.basis_state("11")[3] == 1
    assert O.parity_even("0101") and not O.parity_even("0100")


def test_cz_on_11():
    psi = O.apply_gate(O.basis_state("11"), G.cz(), 0)
    assert psi[3] == -1


def test_identity_leaves_state():
    rng = np.random.default_rng(0)
    psi = rng.normal(size=16) + 0j
    assert np.allclose(O.apply_gate(psi, G.identity(), 1), psi)


def test_bad_position():
    with pytest.raises(IndexError):
        O.apply_gate(O.basis_state("000"), G.cz(), 2)


def test_qubit_zero_is_msb():
    # swap on (0,1) of |10> -> |01>
    psi = O.apply_gate(O.basis_state("10"), G.swap(), 0)
    assert psi[1] == 1


def test_parity_sectors_and_norm():
    rng = np.random.default_rng(5)
    L = 6
    psi = O.basis_state("110000")
    odd = np.array([bin(i).count("1") % 2 for i in range(2**L)], dtype=bool)
    for _ in range(1000):
        psi = O.apply_gate(psi, G.random_ppu(rng=rng), int(rng.integers(L - 1)), L)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12
    assert np.all(psi[odd] == 0)


def test_number_conserving_keeps_weight():
    L = 6
    psi = O.basis_state("110000")
    for q in [0, 1, 2, 3, 4, 1, 2]:
        psi = O.apply_gate(psi, G.fsim(0.7, 0.4), q, L)
    weights = {bin(i).count("1") for i in np.nonzero(np.abs(psi) > 1e-14)[0]}
    assert weights == {2}


def test_empty_circuit_overlaps():
    assert O.overlap(Circuit(4, [], "1100", "1100")) == 1
    assert O.overlap(Circuit(4, [], "1100", "0011")) == 0


def test_cap():
    with pytest.raises(O.ResourceError):
        O.overlap(Circuit(16, []))
