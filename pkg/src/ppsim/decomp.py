"""Splitting a non-matchgate tensor into Gaussian pieces.

gamma split:  T = N e^{A} + (N gamma) theta_1 theta_2 theta_3 theta_4
xi split:     T = N (c1 e^{lam A} + c2 e^{-lam A}),  lam^2 = 1 + gamma / pf(A)

The quartic monomial of the gamma split is the same for every gate, so the
hole Pfaffians it produces can be reused across gate parameters.  The xi
split has gate-dependent generating matrices instead.
"""
from dataclasses import dataclass

import numpy as np

from .fermionize import GateTensor, gate_tensor, tensor_entries
from .gates import cphase
from .pfaffian import pfaffian

A_ID = np.array(
    [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]], dtype=np.complex128
)
A_ID.setflags(write=False)


@dataclass(frozen=True)
class GammaSplit:
    gaussian: GateTensor
    hole: complex


@dataclass(frozen=True)
class XiSplit:
    terms: tuple  # ((coefficient, A), (coefficient, A))
    phase: complex = 1.0  # terms sum to phase * (source gate)

    @property
    def l1(self):
        return sum(abs(c) for c, _ in self.terms)


def gamma_split(t):
    gauss = GateTensor(t.N, t.A, 0j, t.gate)
    return GammaSplit(gauss, t.N * t.gamma)


def reconstruct_gamma(split):
    """Dense gate from a gamma split (Gaussian part plus the hole term)."""
    g = split.gaussian
    return tensor_entries(g, gamma=split.hole / g.N)


def xi_split_cphase(phi):
    """Two-Gaussian split of cphase(phi) in closed form.

    ``c1 e^{A1} + c2 e^{A2}`` equals ``e^{i phi/2} cphase(phi)``; the returned
    ``phase`` records that factor.
    """
    w = np.exp(0.5j * phi)
    A1 = w * A_ID
    c1 = np.exp(0.25j * phi) * np.cos(phi / 4)
    c2 = np.exp(0.25j * phi) * 1j * np.sin(phi / 4)
    A2 = -A1
    A1.setflags(write=False)
    A2.setflags(write=False)
    return XiSplit(((complex(c1), A1), (complex(c2), A2)), complex(w))


def xi_split(t):
    """Gate-normalised two-Gaussian split ``T = N (c1 e^{lam A} + c2 e^{-lam A})``.

    Term 0 carries the larger coefficient; it is the one kept at order 0 of
    the expansion.  Requires ``pf(A) != 0``.  For the cphase/fSim family
    this reproduces the minimal-extent split (up to the global phase of
    :func:`xi_split_cphase`).
    """
    pfA = pfaffian(t.A)
    if abs(pfA) < 1e-12:
        raise ValueError("xi split needs a generating matrix with pf(A) != 0")
    lam = np.sqrt(1 + t.gamma / pfA)
    c1 = (1 + 1 / lam) / 2
    c2 = (1 - 1 / lam) / 2
    if abs(c2) > abs(c1):
        lam, c1, c2 = -lam, c2, c1
    A1 = lam * t.A
    A2 = -lam * t.A
    A1.setflags(write=False)
    A2.setflags(write=False)
    return XiSplit(((complex(c1), A1), (complex(c2), A2)), 1.0 + 0j)


def reconstruct_xi(split, N=1.0):
    """Dense gate ``N sum_j c_j e^{A_j}`` (divided by the split's phase)."""
    total = np.zeros((4, 4), dtype=np.complex128)
    for c, A in split.terms:
        total += c * tensor_entries(GateTensor(N, A, 0j))
    return total / split.phase


def extent_fsim(phi):
    """Gaussian extent of cphase/fSim: 1 + |gamma|/2 = 1 + |sin(phi/2)|."""
    return 1.0 + abs(np.sin(phi / 2))


def gamma_cphase(phi):
    return gate_tensor(cphase(phi)).gamma
