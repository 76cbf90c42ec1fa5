"""Hole expansion of a fermionized circuit.

    c = norm * sum_P (prod_{j in P} gamma_j) pf(M with the modes of P removed)

Patterns ``P`` are subsets of the expansion sites, visited order by order
(``k = |P|`` ascending) and in colexicographic order within an order.  Terms
are evaluated in fixed-size chunks, optionally on worker threads; every sum is
exactly rounded (``math.fsum``) so results do not depend on the worker count.
"""
import math
import os
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .decomp import xi_split
from .fermionize import build_network, gate_tensor
from .oracle import ResourceError
from .pfaffian import PIVOT_RTOL, _pf_inplace, pfaffian_batch

CHUNK = 256
DEFAULT_BUDGET = 1e12
THREADS_ENV = "PPSIM_THREADS"


class BudgetExceededError(ResourceError):
    def __init__(self, estimate, budget):
        super().__init__(f"estimated cost {estimate:.3e} exceeds budget {budget:.3e}")
        self.estimate = estimate
        self.budget = budget


def warmup():
    """Compile (or load from cache) the numba kernels so timings exclude JIT."""
    m = np.array([[0, 1], [-1, 0]], dtype=np.complex128)
    pfaffian_batch(m, np.array([[0, 1]]), 0.0)
    _pf_xi_batch(m, np.full((1, 4), -1, dtype=np.int64), np.zeros((1, 1), dtype=np.int64), 0.0)


def worker_count(threads=None):
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "0") or 0) or (os.cpu_count() or 1)
    return max(1, int(threads))


def runtime_estimate(k_t, m, s):
    """sum_{k<=k_t} C(m, k) (s-k)^3 in abstract cost units (exact integer)."""
    if not 0 <= k_t <= m <= s:
        raise ValueError(f"need 0 <= k_t <= m <= s, got k_t={k_t}, m={m}, s={s}")
    return sum(math.comb(m, k) * (s - k) ** 3 for k in range(k_t + 1))


def colex_masks(m, k):
    """k-subsets of range(m) as bitmasks, in colexicographic order."""
    if k == 0:
        yield 0
        return
    x = (1 << k) - 1
    top = 1 << m
    while x < top:
        yield x
        c = x & -x
        r = x + c
        x = (((r ^ x) >> 2) // c) | r


def _positions(masks, m, k):
    masks = np.asarray(masks, dtype=np.uint64)
    bits = (masks[:, None] >> np.arange(m, dtype=np.uint64)[None, :]) & np.uint64(1)
    rows, cols = np.nonzero(bits.astype(bool))
    return cols.reshape(len(masks), k)


def _chunks(m, k):
    buf = []
    for x in colex_masks(m, k):
        buf.append(x)
        if len(buf) == CHUNK:
            yield _positions(buf, m, k)
            buf = []
    if buf:
        yield _positions(buf, m, k)


def _csum(values):
    values = np.asarray(values, dtype=np.complex128)
    return complex(math.fsum(values.real), math.fsum(values.imag))


@dataclass
class HolePattern:
    bits: int

    @property
    def k(self):
        return bin(self.bits).count("1")

    def sites(self):
        return [i for i in range(self.bits.bit_length()) if self.bits >> i & 1]


@dataclass
class ExpansionResult:
    c: complex
    k_used: int
    terms_evaluated: int
    order_sums: list  # contribution of each order to c
    elapsed: float
    mode: str = "gamma"
    estimate: int = 0
    pfsums: list = field(default_factory=list)  # unweighted order-k Pfaffian sums (gamma mode)

    def partial(self, k):
        return complex(sum(self.order_sums[: k + 1]))


# -- gamma mode ---------------------------------------------------------------

class _HoleEvaluator:
    def __init__(self, net):
        self.net = net
        self.active = [j for j, x in enumerate(net.nonmg) if not x.blocked]
        self.modes = np.array(
            [net.site_modes(net.nonmg[j].site) for j in self.active], dtype=np.int64
        ).reshape(len(self.active), 4)
        self.gammas = np.array([net.nonmg[j].gamma for j in self.active], dtype=np.complex128)
        self.base = np.ascontiguousarray(net.M)
        self.tol = PIVOT_RTOL * (float(np.max(np.abs(self.base))) if self.base.size else 0.0)

    def keeps(self, pos):
        B, k = pos.shape
        n = self.base.shape[0]
        mask = np.ones((B, n), dtype=bool)
        if k:
            holes = self.modes[pos].reshape(B, 4 * k)
            mask[np.repeat(np.arange(B), 4 * k), holes.ravel()] = False
        return np.nonzero(mask)[1].reshape(B, n - 4 * k)

    def values(self, pos):
        return pfaffian_batch(self.base, self.keeps(pos), self.tol)


def _run_chunks(fn, chunks, threads):
    if threads <= 1:
        return [fn(ch) for ch in chunks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, chunks))


def _gamma_orders(net, k_max, threads, weights=True):
    ev = _HoleEvaluator(net)
    ma = len(ev.active)
    pfsums, wsums, count = [], [], 0
    for k in range(k_max + 1):
        if k > ma:
            pfsums.append(0j)
            wsums.append(0j)
            continue
        chunks = list(_chunks(ma, k))

        def job(pos):
            vals = ev.values(pos)
            w = np.prod(ev.gammas[pos], axis=1) if k else np.ones(len(pos), dtype=np.complex128)
            return vals, vals * w

        out = _run_chunks(job, chunks, threads)
        vals = np.concatenate([o[0] for o in out])
        wvals = np.concatenate([o[1] for o in out])
        count += len(vals)
        pfsums.append(_csum(vals))
        wsums.append(_csum(wvals))
    return pfsums, wsums, count


# -- xi mode ------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _pf_xi_batch(base, blocks, pos, tol):
    n = base.shape[0]
    out = np.empty(pos.shape[0], dtype=np.complex128)
    work = np.empty((n, n), dtype=np.complex128)
    for b in range(pos.shape[0]):
        work[:, :] = base
        for t in range(pos.shape[1]):
            blk = blocks[pos[b, t]]
            for p in range(4):
                i = blk[p]
                if i < 0:
                    continue
                for q in range(4):
                    j = blk[q]
                    if j >= 0:
                        work[i, j] = -work[i, j]
        out[b] = _pf_inplace(work, tol) if n else 1.0 + 0j
    return out


def _xi_orders(net, k_max, threads):
    sites = [x.site for x in net.nonmg]
    splits = [xi_split(net.tensors[g]) for g in sites]
    base = np.array(net.M, dtype=np.complex128)
    blocks = np.full((len(sites), 4), -1, dtype=np.int64)
    for j, (g, sp) in enumerate(zip(sites, splits)):
        idx = net.mode_map[g]
        keep = idx >= 0
        blocks[j] = idx
        pos = idx[keep]
        base[np.ix_(pos, pos)] = sp.terms[0][1][np.ix_(keep, keep)]
    c1 = np.array([sp.terms[0][0] for sp in splits], dtype=np.complex128)
    ratio = np.array([sp.terms[1][0] / sp.terms[0][0] for sp in splits], dtype=np.complex128)
    lead = complex(np.prod(c1)) if len(c1) else 1.0 + 0j
    tol = PIVOT_RTOL * (float(np.max(np.abs(base))) if base.size else 0.0)
    m = len(sites)
    wsums, count = [], 0
    for k in range(k_max + 1):
        chunks = list(_chunks(m, k))

        def job(pos):
            vals = _pf_xi_batch(base, blocks, np.ascontiguousarray(pos, dtype=np.int64), tol)
            w = np.prod(ratio[pos], axis=1) if k else np.ones(len(pos), dtype=np.complex128)
            return vals * (w * lead)

        out = _run_chunks(job, chunks, threads)
        wvals = np.concatenate(out)
        count += len(wvals)
        wsums.append(_csum(wvals))
    return wsums, count


# -- public operations ----------------------------------------------------------

def _guard(net, k_t, budget):
    m = net.m
    est = runtime_estimate(k_t, m, max(net.s, m))
    if budget is not None and est > budget:
        raise BudgetExceededError(est, budget)
    return est


def contract_truncated(net, k_t, mode="gamma", budget=DEFAULT_BUDGET, threads=None):
    """Expansion including orders ``0..k_t`` only."""
    if not 0 <= k_t <= net.m:
        raise ValueError(f"k_t must lie in [0, {net.m}], got {k_t}")
    est = _guard(net, k_t, budget)
    threads = worker_count(threads)
    t0 = time.perf_counter()
    pfsums = []
    if net.zero:
        wsums, count = [0j] * (k_t + 1), 0
    elif mode == "gamma":
        pfsums, wsums, count = _gamma_orders(net, k_t, threads)
    elif mode == "xi":
        wsums, count = _xi_orders(net, k_t, threads)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    order_sums = [net.norm * w for w in wsums]
    c = net.norm * _csum(wsums)
    return ExpansionResult(
        c=complex(c),
        k_used=k_t,
        terms_evaluated=count,
        order_sums=order_sums,
        elapsed=time.perf_counter() - t0,
        mode=mode,
        estimate=est,
        pfsums=pfsums,
    )


def contract_exact(net, mode="gamma", budget=DEFAULT_BUDGET, threads=None):
    return contract_truncated(net, net.m, mode=mode, budget=budget, threads=threads)


def truncation_error(net, k_t, mode="gamma", budget=DEFAULT_BUDGET, threads=None):
    exact = contract_exact(net, mode=mode, budget=budget, threads=threads)
    return exact.c - exact.partial(k_t) if k_t < net.m else 0j


def simulate(circuit, k_t=None, mode="gamma", budget=DEFAULT_BUDGET, threads=None):
    """Fermionize ``circuit`` and expand it (exactly when ``k_t`` is None)."""
    net = build_network(circuit)
    k = net.m if k_t is None else min(k_t, net.m)
    return contract_truncated(net, k, mode=mode, budget=budget, threads=threads)


# -- precomputation -------------------------------------------------------------

@dataclass
class PfSumTable:
    values: list
    fingerprint: str
    k_max: int
    m: int


def pfsum_table(net, k_max, budget=DEFAULT_BUDGET, threads=None):
    """Order-k sums of hole Pfaffians; independent of every gate's gamma."""
    if not 0 <= k_max <= net.m:
        raise ValueError(f"k_max must lie in [0, {net.m}], got {k_max}")
    _guard(net, k_max, budget)
    if net.zero:
        values = [0j] * (k_max + 1)
    else:
        values, _, _ = _gamma_orders(net, k_max, worker_count(threads))
    return PfSumTable(values, net.fingerprint(), k_max, net.m)


def eval_sweep(table, gammas, norms):
    """``norm * sum_k gamma^k PfSum(k)`` for each sweep point (Horner form)."""
    if len(gammas) != len(norms):
        raise ValueError("gammas and norms differ in length")
    out = []
    for gam, nrm in zip(gammas, norms):
        acc = 0j
        for v in reversed(table.values):
            acc = acc * gam + v
        out.append(complex(nrm * acc))
    return out


def retarget(net, gate, atol=1e-12):
    """``(gamma, norm)`` of ``net`` with every expansion site replaced by ``gate``.

    Valid only when the new gate has the same generating matrix as each
    site it replaces, which is what lets one PfSum table serve a sweep.
    """
    t = gate_tensor(gate)
    norm = net.norm
    for x in net.nonmg:
        old = net.tensors[x.site]
        if not np.allclose(old.A, t.A, rtol=0, atol=atol):
            raise ValueError("gate changes a generating matrix; the PfSum table does not apply")
        norm = norm * (t.N / old.N)
    return complex(t.gamma), complex(norm)


_MAGIC = b"PFST"
_TABLE_VERSION = 1


def save_table(table, path):
    """Little-endian: magic, version, k_max, m, 32-byte fingerprint, (re, im) doubles."""
    vals = np.array(table.values, dtype=np.complex128)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<III", _TABLE_VERSION, table.k_max, table.m))
        fh.write(bytes.fromhex(table.fingerprint))
        fh.write(np.column_stack([vals.real, vals.imag]).astype("<f8").tobytes())


def load_table(path, expect_fingerprint=None):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError("not a PfSum table file")
    version, k_max, m = struct.unpack("<III", data[4:16])
    if version != _TABLE_VERSION:
        raise ValueError(f"unsupported table version {version}")
    fp = data[16:48].hex()
    if expect_fingerprint is not None and fp != expect_fingerprint:
        raise ValueError("table fingerprint does not match the network")
    raw = np.frombuffer(data[48:], dtype="<f8").reshape(-1, 2)
    if raw.shape[0] != k_max + 1:
        raise ValueError("truncated table file")
    return PfSumTable([complex(r, i) for r, i in raw], fp, k_max, m)


# -- truncation policies --------------------------------------------------------

def adaptive_order(net, target_rel, mode="gamma", budget=DEFAULT_BUDGET, threads=None,
                   exact=None):
    """Smallest k_t whose truncated value is within ``target_rel`` of the reference.

    The reference is the exact expansion when the budget allows it; otherwise
    the value two orders higher is used as a proxy.  Returns
    ``(k_t, result_at_reference, used_proxy)``.
    """
    m = net.m
    try:
        ref = exact if exact is not None else contract_exact(net, mode, budget, threads)
    except BudgetExceededError:
        ref = None
    if ref is not None:
        c = ref.c
        for k in range(m + 1):
            if abs(c - ref.partial(k)) <= target_rel * abs(c):
                return k, ref, False
        return m, ref, False
    k = 0
    while True:
        hi = min(k + 2, m)
        res = contract_truncated(net, hi, mode, budget, threads)
        if abs(res.c - res.partial(k)) <= target_rel * abs(res.c) or hi == m:
            return k, res, True
        k += 1


# -- exact particle-number cutoff ----------------------------------------------

def _periodic_structure(circuit):
    """Number of periods if the circuit is (MG layer offset 0, non-MG layer offset 1)^n."""
    L = circuit.L
    layers = circuit.layers
    if len(layers) % 2 or L % 2:
        return None
    for i, layer in enumerate(layers):
        qs = [q for _, q in layer]
        want = list(range(i % 2, L - 1, 2))
        if qs != want:
            return None
        if i % 2 == 0 and not all(g.is_matchgate() for g, _ in layer):
            return None
    return len(layers) // 2


def empirical_cutoff(net, tol=1e-12, exhaustive_limit=4096, samples=512, seed=0):
    """Largest order with a non-vanishing hole Pfaffian (None if none vanish)."""
    ev = _HoleEvaluator(net)
    ma = len(ev.active)
    rng = np.random.default_rng(seed)
    for k in range(ma + 1):
        if math.comb(ma, k) <= exhaustive_limit:
            sets = list(_iter_sets(ma, k))
            pos = np.array(sets, dtype=np.int64).reshape(len(sets), k)
        else:
            pos = np.array([np.sort(rng.choice(ma, k, replace=False)) for _ in range(samples)],
                           dtype=np.int64)
        if not np.any(np.abs(ev.values(pos)) > tol):
            return k - 1
    return ma if ma < net.m else None


def _iter_sets(m, k):
    for x in colex_masks(m, k):
        yield [i for i in range(m) if x >> i & 1]


def cutoff_order(circuit, method="auto"):
    """Exact truncation order beyond which every hole Pfaffian vanishes.

    Needs particle-number-conserving gates; otherwise returns None.  With
    ``method="auto"`` the closed forms for the half-filling families are
    used when the circuit matches them, else the cutoff is detected
    numerically.
    """
    from .circuits import half_filling_states

    if not circuit.is_number_conserving():
        return None
    L = circuit.L
    if method in ("auto", "analytic") and L % 4 == 0 and circuit.psi_i == circuit.psi_f:
        n = _periodic_structure(circuit)
        if n:
            if circuit.psi_i == half_filling_states(L, "h"):
                return (L // 4 - 1) * n
            if circuit.psi_i == half_filling_states(L, "e"):
                return (L // 4) * (n - 1)
    if method == "analytic":
        return None
    return empirical_cutoff(build_network(circuit))
