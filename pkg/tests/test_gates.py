import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppsim import gates as G


def test_cz_gamma():
    assert G.cz().gamma == pytest.approx(-2)
    assert G.cz().kind is G.GateKind.NON_MATCHGATE


def test_identity_is_matchgate_swap_is_not():
    assert G.identity().is_matchgate()
    assert G.swap().gamma == pytest.approx(2)


@pytest.mark.parametrize("phi", [0.0, 0.3, np.pi / 2, np.pi, -2.0])
def test_cphase_gamma(phi):
    g = G.cphase(phi)
    assert g.gamma == pytest.approx(np.exp(1j * phi) - 1)
    assert abs(g.gamma) == pytest.approx(2 * abs(np.sin(phi / 2)))


def test_fsim_zero_theta_is_conjugate_cphase():
    assert np.allclose(G.fsim(0, 0.7).matrix(), G.cphase(-0.7).matrix())


def test_fsim_matchgate_at_zero_phi():
    assert G.fsim(0.4, 0.0).is_matchgate()
    assert not G.fsim(0.4, 0.3).is_matchgate()


def test_make_ppu_rejects_non_unitary():
    with pytest.raises(G.GateValidationError) as exc:
        G.make_ppu(np.eye(2) * 1.1, np.eye(2))
    assert exc.value.deviation > 0.1


def test_blocks_read_only():
    g = G.cz()
    with pytest.raises(ValueError):
        g.a[0, 0] = 2


@given(st.integers(0, 2**31 - 1))
def test_random_ppu_unitary(seed):
    u = G.random_ppu(seed).matrix()
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_random_ppu_seeded():
    assert np.array_equal(G.random_ppu(7).a, G.random_ppu(7).a)


def test_gamma_cutoff_respected():
    rng = np.random.default_rng(3)
    for _ in range(50):
        assert abs(G.random_ppu(rng=rng, gamma_cutoff=0.3).gamma) <= 0.3
    assert G.random_ppu(seed=1, gamma_cutoff=0).is_matchgate()
    with pytest.raises(ValueError):
        G.random_ppu(seed=1, gamma_cutoff=-1)


def test_haar_gamma_mean():
    # |det a - det b| for independent Haar phases: mean |e^{ix} - 1| = 4/pi
    rng = np.random.default_rng(0)
    vals = [abs(G.random_ppu(rng=rng).gamma) for _ in range(4000)]
    assert np.mean(vals) == pytest.approx(4 / np.pi, abs=0.04)


def test_random_matchgate():
    rng = np.random.default_rng(9)
    for _ in range(20):
        assert G.random_matchgate(rng).is_matchgate()


def test_number_conservation():
    assert G.fsim(0.3, 0.2).is_number_conserving()
    a = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert not G.make_ppu(a, np.eye(2)).is_number_conserving()
