import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppsim import gates as G
from ppsim.decomp import (
    A_ID,
    extent_fsim,
    gamma_cphase,
    gamma_split,
    reconstruct_gamma,
    reconstruct_xi,
    xi_split,
    xi_split_cphase,
)
from ppsim.fermionize import GateTensor, gate_tensor

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def test_gamma_split_values():
    assert gamma_split(gate_tensor(G.cz())).hole == pytest.approx(-2)
    assert gamma_split(gate_tensor(G.fsim(0.3, 0))).hole == pytest.approx(0, abs=1e-15)
    sp = gamma_split(gate_tensor(G.cphase(1.1)))
    assert abs(sp.hole) == pytest.approx(2 * abs(np.sin(0.55)))
    assert sp.gaussian.gamma == 0


def test_gamma_split_reconstructs():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        g = G.random_ppu(rng=rng)
        t = gate_tensor(g)
        assert np.max(np.abs(reconstruct_gamma(gamma_split(t)) - g.matrix())) <= 1e-12


def test_xi_identity_limit():
    sp = xi_split_cphase(0.0)
    (c1, A1), (c2, A2) = sp.terms
    assert c1 == 1 and c2 == 0
    assert np.array_equal(A1, A_ID)


@given(angles)
def test_xi_cphase_reconstructs(phi):
    sp = xi_split_cphase(phi)
    assert np.allclose(sp.terms[1][1], -sp.terms[0][1])
    assert np.max(np.abs(reconstruct_xi(sp) - G.cphase(phi).matrix())) < 1e-12
    assert sp.phase == pytest.approx(np.exp(0.5j * phi))


@given(angles)
def test_xi_extent(phi):
    assert xi_split_cphase(phi).l1 ** 2 == pytest.approx(extent_fsim(phi), abs=1e-10)
    assert extent_fsim(phi) == pytest.approx(1 + abs(gamma_cphase(phi)) / 2, abs=1e-12)


def test_extent_values():
    assert extent_fsim(0) == 1
    assert extent_fsim(np.pi) == pytest.approx(2)
    assert extent_fsim(np.pi / 2) == pytest.approx(1.7071067811865475)
    assert xi_split_cphase(np.pi).l1 ** 2 == pytest.approx(2)


@given(st.integers(0, 2**31 - 1))
def test_general_xi_split(seed):
    g = G.random_ppu(seed)
    t = gate_tensor(g)
    sp = xi_split(t)
    assert np.max(np.abs(reconstruct_xi(sp, t.N) - g.matrix())) < 1e-10
    assert abs(sp.terms[0][0]) >= abs(sp.terms[1][0])


def test_general_xi_matches_cphase_extent():
    for phi in np.linspace(-3, 3, 13):
        sp = xi_split(gate_tensor(G.cphase(phi)))
        assert sp.l1**2 == pytest.approx(extent_fsim(phi), abs=1e-12)


def test_xi_split_needs_nonzero_pf():
    # unreachable for unitary gates (|det b| = 1 > |a12 a21|), so build the tensor by hand
    with pytest.raises(ValueError):
        xi_split(GateTensor(1.0, np.zeros((4, 4), dtype=complex), 0.5))
