"""Kernel-row enumeration, generic over the number type (mpf or float).

A row entry factorizes as

    C~_N / V(X) * V(Y) * prod_r |y_r| g(m_r) F_{p_r}(m_r) * H(p*)

with y_r = x_{p_r} q^{m_r}, g(m) = (q;q)_inf/(t;q)_inf * (t;q)_m/(q;q)_m,
F_p(m) = prod_{s != p} (x_p t/x_s; q)_m / (x_p q/x_s; q)_m and
H(p) = prod_{j != p} (x_p t/x_j; q)_inf / (x_p q/x_j; q)_inf, where p* is
the one index of X not hit by r -> p_r.  Every factor except V(Y) depends on
a single m_r, so the per-index factors are tabulated once and the straddle
index is advanced incrementally.

Straddle tails are certified: each factor of T(m+1)/T(m) has the form
(1 - a u)/(1 - b u) in u = q^m, monotone on [0, q^m], so
rho(m) = q * prod max(1, factor(q^m)) bounds every later ratio and the tail
after m is at most T(m) rho / (1 - rho).
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence


def row_engine(
    xs: Sequence,
    k: int,
    ls: Sequence[int | None],
    q,
    t,
    ctilde,
    poch_inf: Callable,
    budget,
    m_cap: int | None = None,
    hard_cap: int = 200000,
    poch_ratio: Callable | None = None,
):
    """Enumerate a kernel row.

    Returns ``(entries, tail)`` with entries ``(eps_k, ms, weight)``; ``eps_k``
    is None when there is no straddle index.  With ``m_cap`` the straddle
    index stops at that depth; otherwise it stops once the certified tail of
    the chain is below its share of ``budget``.  ``poch_ratio(a, b)``, when
    given, computes (a;q)_inf/(b;q)_inf as one product; the float backends
    use it so that huge arguments do not overflow.
    """
    N = len(xs)
    one = q / q
    inf = one * float("inf")
    straddle = 0 < k < N
    qpow = [one]

    def qp_at(m):
        while len(qpow) <= m:
            qpow.append(qpow[-1] * q)
        return qpow[m]

    g = [poch_inf(q) / poch_inf(t)]

    def g_at(m):
        while len(g) <= m:
            j = len(g) - 1
            g.append(g[j] * (1 - t * qp_at(j)) / (1 - qp_at(j + 1)))
        return g[m]

    ratio_a = {}
    ratio_b = {}
    F: dict = {}

    def f_at(p, m):
        tab = F.setdefault(p, [one])
        if p not in ratio_a:
            xp = xs[p - 1]
            ratio_a[p] = [xp * t / xs[s] for s in range(N) if s != p - 1]
            ratio_b[p] = [xp * q / xs[s] for s in range(N) if s != p - 1]
        while len(tab) <= m:
            j = len(tab) - 1
            u = qp_at(j)
            val = tab[j]
            for a, b in zip(ratio_a[p], ratio_b[p]):
                val = val * (1 - a * u) / (1 - b * u)
            tab.append(val)
        return tab[m]

    if poch_ratio is None:
        poch_ratio = lambda a, b: poch_inf(a) / poch_inf(b)

    def h_at(p):
        xp = xs[p - 1]
        val = one
        for j in range(N):
            if j != p - 1:
                val = val * poch_ratio(xp * t / xs[j], xp * q / xs[j])
        return val

    vx = one
    for i in range(N):
        for j in range(i + 1, N):
            vx = vx * (xs[i] - xs[j])
    const = ctilde / vx

    free = [r for r in range(1, N) if ls[r - 1] is not None]
    tables = {}
    for r in free:
        p = r if r < k else r + 1
        xp = xs[p - 1]
        vals, ys = [], []
        for m in range(ls[r - 1] + 1):
            y = xp * qp_at(m)
            ys.append(y)
            vals.append(abs(y) * g_at(m) * f_at(p, m))
        tables[r] = (vals, ys)

    entries = []
    tail = one - one
    combos = list(itertools.product(*(range(ls[r - 1] + 1) for r in free)))
    if not straddle:
        pstar = N if k == N else 1
        hs = h_at(pstar)
        for combo in combos:
            ms = [0] * (N - 1)
            ys = [None] * (N - 1)
            pr = one
            for r, m in zip(free, combo):
                ms[r - 1] = m
                vals, yv = tables[r]
                ys[r - 1] = yv[m]
                pr = pr * vals[m]
            v = one
            for i in range(N - 1):
                for j in range(i + 1, N - 1):
                    v = v * (ys[i] - ys[j])
            entries.append((None, tuple(ms), const * v * pr * hs))
        return entries, tail

    hs = {0: h_at(k + 1), 1: h_at(k)}  # keyed by eps_k: p* = k + 1 - eps_k
    chain_budget = budget / (2 * len(combos))
    kk = k - 1
    for combo in combos:
        ms = [0] * (N - 1)
        ys = [None] * (N - 1)
        pr = one
        for r, m in zip(free, combo):
            ms[r - 1] = m
            vals, yv = tables[r]
            ys[r - 1] = yv[m]
            pr = pr * vals[m]
        vpart = one
        for i in range(N - 1):
            if i == kk:
                continue
            for j in range(i + 1, N - 1):
                if j != kk:
                    vpart = vpart * (ys[i] - ys[j])
        above = ys[:kk]
        below = ys[kk + 1 :]
        for e in (0, 1):
            p = k + e
            xp = xs[p - 1]
            base = const * vpart * pr * hs[e]
            inv = [xp / y for y in above + below]
            m = 0
            while True:
                u = qp_at(m)
                yk = xp * u
                vk = one
                for y in above:
                    vk = vk * (y - yk)
                for y in below:
                    vk = vk * (yk - y)
                w = base * vk * abs(yk) * g_at(m) * f_at(p, m)
                mm = list(ms)
                mm[kk] = m
                entries.append((e, tuple(mm), w))
                rho = q * max(one, (1 - t * u) / (1 - q * u))
                for a, b in zip(ratio_a[p], ratio_b[p]):
                    rho = rho * max(one, (1 - a * u) / (1 - b * u))
                for c in inv:
                    rho = rho * max(one, (1 - c * q * u) / (1 - c * u))
                tb = w * rho / (1 - rho) if rho < 1 else inf
                if tb != tb:
                    raise ArithmeticError("non-finite weight in a straddle chain")
                if m_cap is not None:
                    if m >= m_cap:
                        tail = tail + tb
                        break
                elif tb <= chain_budget or m >= hard_cap:
                    tail = tail + tb
                    break
                m += 1
    return entries, tail
