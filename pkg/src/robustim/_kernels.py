"""Numba kernels for Monte Carlo live-edge simulation.

Edge e is live in simulation i iff ``uniform(seed, i, e) < p[e]``, where the
uniform is a counter-based hash. Every evaluation sharing a seed therefore sees
the same live-edge graphs (common random numbers), and results do not depend on
how simulations are split across workers.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_ALT = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mix(x):
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


@njit(cache=True, inline="always")
def sim_key(seed, sim):
    return _mix(np.uint64(seed) + _GOLDEN * (np.uint64(sim) + _ONE))


@njit(cache=True, inline="always")
def edge_uniform(key, edge):
    h = _mix(key ^ (_ALT * (np.uint64(edge) + _ONE)))
    return np.float64(h >> _S11) * _INV53


@njit(cache=True, nogil=True)
def spread_moments(indptr, out_eids, dst, p, seeds, seed, sim_lo, sim_hi):
    """Sum and sum of squares of reachable-set sizes over sims [sim_lo, sim_hi)."""
    n = len(indptr) - 1
    stamp = np.zeros(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    total = 0
    total_sq = 0
    for sim in range(sim_lo, sim_hi):
        mark = sim + 1
        key = sim_key(seed, sim)
        top = 0
        for s in seeds:
            if stamp[s] != mark:
                stamp[s] = mark
                stack[top] = s
                top += 1
        size = top
        while top > 0:
            top -= 1
            u = stack[top]
            for j in range(indptr[u], indptr[u + 1]):
                e = out_eids[j]
                v = dst[e]
                if stamp[v] == mark:
                    continue
                if edge_uniform(key, e) < p[e]:
                    stamp[v] = mark
                    stack[top] = v
                    top += 1
                    size += 1
        total += size
        total_sq += size * size
    return total, total_sq


@njit(cache=True, nogil=True)
def marginal_totals(indptr, out_eids, dst, p, seed, covered, cands):
    """For each candidate, newly reached nodes summed over all sims.

    ``covered[i]`` marks nodes already reached by the current seed set in sim i;
    the search from a candidate never expands covered nodes, since everything
    they reach is covered too.
    """
    num_sims, n = covered.shape
    out = np.zeros(len(cands), dtype=np.int64)
    stamp = np.zeros(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    mark = 0
    for c in range(len(cands)):
        v0 = cands[c]
        gain = 0
        for sim in range(num_sims):
            cov = covered[sim]
            if cov[v0]:
                continue
            mark += 1
            key = sim_key(seed, sim)
            stamp[v0] = mark
            stack[0] = v0
            top = 1
            gain += 1
            while top > 0:
                top -= 1
                u = stack[top]
                for j in range(indptr[u], indptr[u + 1]):
                    e = out_eids[j]
                    v = dst[e]
                    if cov[v] or stamp[v] == mark:
                        continue
                    if edge_uniform(key, e) < p[e]:
                        stamp[v] = mark
                        stack[top] = v
                        top += 1
                        gain += 1
        out[c] = gain
    return out


@njit(cache=True, nogil=True)
def add_cover(indptr, out_eids, dst, p, seed, covered, v0):
    """Mark everything reachable from v0 as covered, sim by sim."""
    num_sims, n = covered.shape
    stack = np.empty(n, dtype=np.int64)
    for sim in range(num_sims):
        cov = covered[sim]
        if cov[v0]:
            continue
        key = sim_key(seed, sim)
        cov[v0] = True
        stack[0] = v0
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for j in range(indptr[u], indptr[u + 1]):
                e = out_eids[j]
                v = dst[e]
                if cov[v]:
                    continue
                if edge_uniform(key, e) < p[e]:
                    cov[v] = True
                    stack[top] = v
                    top += 1


@njit(cache=True)
def live_mask(p, seed, sim):
    key = sim_key(seed, sim)
    out = np.empty(len(p), dtype=np.bool_)
    for e in range(len(p)):
        out[e] = edge_uniform(key, e) < p[e]
    return out


@njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True, nogil=True)
def singleton_totals(indptr, out_eids, dst, p, seed, covered):
    """Per node, newly reached nodes summed over sims -- all nodes at once.

    Equivalent to ``marginal_totals`` over every node. Each sim's live graph on
    the uncovered nodes is condensed into strongly connected components
    (iterative Tarjan, which emits a component only after everything it
    reaches), and reach sets are propagated as bitsets in emission order.
    """
    num_sims, n = covered.shape
    words = (n + 63) // 64
    m = len(dst)
    totals = np.zeros(n, dtype=np.int64)
    lptr = np.empty(n + 1, dtype=np.int64)
    ladj = np.empty(m, dtype=np.int64)
    index = np.empty(n, dtype=np.int64)
    low = np.empty(n, dtype=np.int64)
    onstack = np.zeros(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    cnode = np.empty(n, dtype=np.int64)
    cedge = np.empty(n, dtype=np.int64)
    comp = np.empty(n, dtype=np.int64)
    members = np.empty(n, dtype=np.int64)
    bits = np.zeros((n, words), dtype=np.uint64)
    size = np.empty(n, dtype=np.int64)
    for sim in range(num_sims):
        key = sim_key(seed, sim)
        cov = covered[sim]
        cnt = 0
        for u in range(n):
            lptr[u] = cnt
            if cov[u]:
                continue
            for j in range(indptr[u], indptr[u + 1]):
                e = out_eids[j]
                v = dst[e]
                if cov[v]:
                    continue
                if edge_uniform(key, e) < p[e]:
                    ladj[cnt] = v
                    cnt += 1
        lptr[n] = cnt
        for u in range(n):
            index[u] = -1
        counter = 0
        ncomp = 0
        sp = 0
        for s in range(n):
            if cov[s] or index[s] != -1:
                continue
            cs = 0
            cnode[0] = s
            cedge[0] = lptr[s]
            index[s] = counter
            low[s] = counter
            counter += 1
            stack[sp] = s
            sp += 1
            onstack[s] = True
            while cs >= 0:
                u = cnode[cs]
                if cedge[cs] < lptr[u + 1]:
                    v = ladj[cedge[cs]]
                    cedge[cs] += 1
                    if index[v] == -1:
                        index[v] = counter
                        low[v] = counter
                        counter += 1
                        stack[sp] = v
                        sp += 1
                        onstack[v] = True
                        cs += 1
                        cnode[cs] = v
                        cedge[cs] = lptr[v]
                    elif onstack[v] and index[v] < low[u]:
                        low[u] = index[v]
                    continue
                if low[u] == index[u]:
                    c = ncomp
                    ncomp += 1
                    for w in range(words):
                        bits[c, w] = np.uint64(0)
                    nm = 0
                    while True:
                        x = stack[sp - 1]
                        sp -= 1
                        onstack[x] = False
                        comp[x] = c
                        bits[c, x >> 6] |= np.uint64(1) << np.uint64(x & 63)
                        members[nm] = x
                        nm += 1
                        if x == u:
                            break
                    for a in range(nm):
                        x = members[a]
                        for j in range(lptr[x], lptr[x + 1]):
                            d = comp[ladj[j]]
                            if d != c:
                                for w in range(words):
                                    bits[c, w] |= bits[d, w]
                    tot = 0
                    for w in range(words):
                        tot += _popcount64(bits[c, w])
                    size[c] = tot
                cs -= 1
                if cs >= 0:
                    parent = cnode[cs]
                    if low[u] < low[parent]:
                        low[parent] = low[u]
        for u in range(n):
            if not cov[u]:
                totals[u] += size[comp[u]]
    return totals
