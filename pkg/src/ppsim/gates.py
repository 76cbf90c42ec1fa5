"""Parity-preserving two-qubit unitaries G(a, b).

The even block ``a`` acts on span{|00>, |11>} and the odd block ``b`` on
span{|01>, |10>}.  Basis order is |q, q+1> with the left qubit as the most
significant bit.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

UNITARY_TOL = 1e-10
MG_TOL = 1e-12
MAX_REJECTIONS = 10**6


class GateValidationError(ValueError):
    def __init__(self, msg, deviation):
        super().__init__(f"{msg} (deviation {deviation:.3e})")
        self.deviation = deviation


class SamplingExhaustedError(RuntimeError):
    pass


class GateKind(Enum):
    MATCHGATE = "matchgate"
    NON_MATCHGATE = "non-matchgate"


@dataclass(frozen=True, eq=False)
class PPUGate:
    a: np.ndarray
    b: np.ndarray
    name: str = "ppu"
    params: tuple = ()

    def matrix(self):
        a, b = self.a, self.b
        g = np.zeros((4, 4), dtype=np.complex128)
        g[0, 0], g[0, 3], g[3, 0], g[3, 3] = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
        g[1:3, 1:3] = b
        return g

    @property
    def gamma(self):
        return gamma_det(self)

    @property
    def kind(self):
        return classify(self)[0]

    def is_matchgate(self, tol=MG_TOL):
        return abs(gamma_det(self)) <= tol

    def is_number_conserving(self, tol=1e-12):
        return abs(self.a[0, 1]) <= tol and abs(self.a[1, 0]) <= tol

    def __repr__(self):
        if self.params:
            args = ", ".join(f"{p:.6g}" for p in self.params)
            return f"{self.name}({args})"
        return self.name


def _unitarity_deviation(u):
    return float(np.max(np.abs(u @ u.conj().T - np.eye(2))))


def make_ppu(a, b, name="ppu", params=()):
    a = np.array(a, dtype=np.complex128)
    b = np.array(b, dtype=np.complex128)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError("blocks must be 2x2")
    for label, blk in (("a", a), ("b", b)):
        dev = _unitarity_deviation(blk)
        if not dev <= UNITARY_TOL:
            raise GateValidationError(f"block {label} is not unitary", dev)
    a.setflags(write=False)
    b.setflags(write=False)
    return PPUGate(a, b, name, tuple(float(p) for p in params))


def gamma_det(g):
    """Non-Gaussianity det(a) - det(b); zero exactly for matchgates."""
    return complex(np.linalg.det(g.a) - np.linalg.det(g.b))


def classify(g, tol=MG_TOL):
    gam = gamma_det(g)
    kind = GateKind.MATCHGATE if abs(gam) <= tol else GateKind.NON_MATCHGATE
    return kind, gam


def identity():
    return make_ppu(np.eye(2), np.eye(2), "identity")


def cz():
    return make_ppu(np.diag([1, -1]), np.eye(2), "cz")


def swap():
    return make_ppu(np.eye(2), [[0, 1], [1, 0]], "swap")


def cphase(phi):
    """diag(1, 1, 1, e^{i phi})."""
    return make_ppu(np.diag([1, np.exp(1j * phi)]), np.eye(2), "cphase", (phi,))


def fsim(theta, phi):
    """Hopping by ``theta`` on the odd sector, phase e^{-i phi} on |11>.

    Note ``fsim(0, phi) == cphase(-phi)``.
    """
    c, s = np.cos(theta), np.sin(theta)
    return make_ppu(
        np.diag([1, np.exp(-1j * phi)]),
        [[c, -1j * s], [-1j * s, c]],
        "fsim",
        (theta, phi),
    )


def haar_u2(rng):
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_matchgate(rng):
    """Independent Haar blocks with b rephased so that det b = det a."""
    a = haar_u2(rng)
    b = haar_u2(rng)
    ratio = np.linalg.det(a) / np.linalg.det(b)
    b = b * np.sqrt(ratio)
    return make_ppu(a, b, "ppu")


def random_ppu(seed=None, gamma_cutoff=None, rng=None):
    """Haar-random PPU with independent Haar blocks.

    With ``gamma_cutoff`` the draw is rejection-sampled until
    ``|gamma| <= gamma_cutoff``; a cutoff at or below the matchgate tolerance
    samples matchgates directly.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    if gamma_cutoff is not None:
        if gamma_cutoff < 0:
            raise ValueError("gamma_cutoff must be non-negative")
        if gamma_cutoff <= MG_TOL:
            return random_matchgate(rng)
    for _ in range(MAX_REJECTIONS):
        a, b = haar_u2(rng), haar_u2(rng)
        if gamma_cutoff is None or abs(np.linalg.det(a) - np.linalg.det(b)) <= gamma_cutoff:
            return make_ppu(a, b, "ppu")
    raise SamplingExhaustedError(
        f"no PPU with |gamma| <= {gamma_cutoff} after {MAX_REJECTIONS} draws"
    )
