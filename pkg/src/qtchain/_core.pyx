# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled double-precision kernel-row enumeration.

Mirrors qtchain._engine.row_engine with C arrays; see that module for the
factorization and the tail certificate.
"""

from libc.math cimport fabs, INFINITY
from libc.stdlib cimport malloc, free

BACKEND = "cython"


cpdef double poch_inf(double z, double q):
    cdef double out = 1.0
    cdef double tol = 1e-18 * (1.0 - q)
    while fabs(z) > tol:
        out *= 1.0 - z
        z *= q
    return out


cpdef double poch_ratio(double a, double b, double q):
    # (a;q)_inf / (b;q)_inf factor by factor, so huge arguments cannot overflow
    cdef double out = 1.0
    cdef double tol = 1e-18 * (1.0 - q)
    while fabs(a) > tol or fabs(b) > tol:
        out *= (1.0 - a) / (1.0 - b)
        a *= q
        b *= q
    return out


cdef class _Tables:
    # lazily grown per-index tables for g(m) and F_p(m)
    cdef public list g
    cdef public list qpow
    cdef public dict F

    def __init__(self):
        self.g = []
        self.qpow = [1.0]
        self.F = {}


def row_float(xs_in, int k, ls, double q, double t, double ctilde, double budget, m_cap=None):
    cdef int N = len(xs_in)
    cdef int i, j, r, s, p, e, m, kk, idx, nfree
    cdef double *xs = <double *> malloc(N * sizeof(double))
    cdef double *ys = <double *> malloc((N + 1) * sizeof(double))
    cdef double *ra = <double *> malloc(2 * (N + 1) * N * sizeof(double))
    cdef double *rb = <double *> malloc(2 * (N + 1) * N * sizeof(double))
    cdef double u, yk, vk, w, rho, fac, tb, base, vx, const, pr, vpart, val, xp, tail = 0.0
    cdef double chain_budget
    cdef bint capped = m_cap is not None
    cdef int cap = m_cap if capped else 0
    cdef int hard_cap = 200000
    try:
        for i in range(N):
            xs[i] = xs_in[i]
        # ratio tables for every p in 1..N
        for p in range(1, N + 1):
            idx = 0
            for s in range(N):
                if s != p - 1:
                    ra[p * N + idx] = xs[p - 1] * t / xs[s]
                    rb[p * N + idx] = xs[p - 1] * q / xs[s]
                    idx += 1

        qpow = [1.0]
        g = [poch_inf(q, q) / poch_inf(t, q)]
        Ftab = {}

        def qp_at(int mm):
            while len(qpow) <= mm:
                qpow.append(qpow[len(qpow) - 1] * q)
            return qpow[mm]

        def g_at(int mm):
            cdef int jj
            while len(g) <= mm:
                jj = len(g) - 1
                g.append(g[jj] * (1.0 - t * qp_at(jj)) / (1.0 - qp_at(jj + 1)))
            return g[mm]

        def f_at(int pp, int mm):
            cdef int jj, ss
            cdef double v2, uu
            tab = Ftab.get(pp)
            if tab is None:
                tab = Ftab[pp] = [1.0]
            while len(tab) <= mm:
                jj = len(tab) - 1
                uu = qp_at(jj)
                v2 = tab[jj]
                for ss in range(N - 1):
                    v2 *= (1.0 - ra[pp * N + ss] * uu) / (1.0 - rb[pp * N + ss] * uu)
                tab.append(v2)
            return tab[mm]

        def h_at(int pp):
            cdef int jj
            cdef double v2 = 1.0
            cdef double x0 = xs[pp - 1]
            for jj in range(N):
                if jj != pp - 1:
                    v2 *= poch_ratio(x0 * t / xs[jj], x0 * q / xs[jj], q)
            return v2

        vx = 1.0
        for i in range(N):
            for j in range(i + 1, N):
                vx *= xs[i] - xs[j]
        const = ctilde / vx

        free_idx = [r for r in range(1, N) if ls[r - 1] is not None]
        tables = {}
        for r in free_idx:
            p = r if r < k else r + 1
            vals = []
            yv = []
            for m in range(ls[r - 1] + 1):
                yk = xs[p - 1] * qp_at(m)
                yv.append(yk)
                vals.append(fabs(yk) * g_at(m) * f_at(p, m))
            tables[r] = (vals, yv)

        import itertools
        combos = list(itertools.product(*[range(ls[r - 1] + 1) for r in free_idx]))
        entries = []
        if not (0 < k < N):
            pstar = N if k == N else 1
            hs = h_at(pstar)
            for combo in combos:
                ms = [0] * (N - 1)
                pr = 1.0
                for r, m in zip(free_idx, combo):
                    ms[r - 1] = m
                    vals, yv = tables[r]
                    ys[r - 1] = yv[m]
                    pr *= vals[m]
                vk = 1.0
                for i in range(N - 1):
                    for j in range(i + 1, N - 1):
                        vk *= ys[i] - ys[j]
                entries.append((None, tuple(ms), const * vk * pr * hs))
            return entries, tail

        # keyed by eps_k: the unhit index is k + 1 - eps_k
        h0 = h_at(k + 1)
        h1 = h_at(k)
        chain_budget = budget / (2 * len(combos))
        kk = k - 1
        for combo in combos:
            ms = [0] * (N - 1)
            pr = 1.0
            for r, m in zip(free_idx, combo):
                ms[r - 1] = m
                vals, yv = tables[r]
                ys[r - 1] = yv[m]
                pr *= vals[m]
            vpart = 1.0
            for i in range(N - 1):
                if i == kk:
                    continue
                for j in range(i + 1, N - 1):
                    if j != kk:
                        vpart *= ys[i] - ys[j]
            for e in range(2):
                p = k + e
                xp = xs[p - 1]
                base = const * vpart * pr * (h0 if e == 0 else h1)
                m = 0
                while True:
                    u = qp_at(m)
                    yk = xp * u
                    vk = 1.0
                    for i in range(kk):
                        vk *= ys[i] - yk
                    for i in range(kk + 1, N - 1):
                        vk *= yk - ys[i]
                    w = base * vk * fabs(yk) * g_at(m) * f_at(p, m)
                    mm = list(ms)
                    mm[kk] = m
                    entries.append((e, tuple(mm), w))
                    rho = q
                    fac = (1.0 - t * u) / (1.0 - q * u)
                    if fac > 1.0:
                        rho *= fac
                    for s in range(N - 1):
                        fac = (1.0 - ra[p * N + s] * u) / (1.0 - rb[p * N + s] * u)
                        if fac > 1.0:
                            rho *= fac
                    for i in range(N - 1):
                        if i == kk:
                            continue
                        val = xp / ys[i]
                        fac = (1.0 - val * q * u) / (1.0 - val * u)
                        if fac > 1.0:
                            rho *= fac
                    tb = w * rho / (1.0 - rho) if rho < 1.0 else INFINITY
                    if tb != tb:
                        raise ArithmeticError("non-finite weight in a straddle chain")
                    if capped:
                        if m >= cap:
                            tail += tb
                            break
                    elif tb <= chain_budget or m >= hard_cap:
                        tail += tb
                        break
                    m += 1
        return entries, tail
    finally:
        free(xs)
        free(ys)
        free(ra)
        free(rb)
