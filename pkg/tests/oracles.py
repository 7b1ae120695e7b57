"""Independent reference implementations used to cross-check the package.

Everything here is written directly from first principles (exact
rational arithmetic, brute-force enumeration) and deliberately shares no
code with the package internals.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product


# -- reordering / windowing reference ---------------------------------------

def brute_force_join(tuples, windows_ms, matches):
    """All matching combinations under the time-window semantics.

    One tuple per stream; every pair of parts must lie within the other
    part's window extent: b.ts in [a.ts - W_b, a.ts + W_a] for all pairs.
    Returns a set of (identity, result_ts) with result_ts = max part ts.
    """
    m = len(windows_ms)
    per_stream = [[] for _ in range(m)]
    for e in tuples:
        per_stream[e.stream - 1].append(e)
    out = set()
    for combo in product(*per_stream):
        ok = True
        # for every pair, the separation is bounded by the older side's window
        for a in range(m):
            for b in range(a + 1, m):
                d = combo[a].ts - combo[b].ts
                if d > windows_ms[b] or -d > windows_ms[a]:
                    ok = False
                    break
            if not ok:
                break
        if ok and matches(combo):
            ts = max(p.ts for p in combo)
            out.add((tuple((p.stream, p.seq) for p in combo), ts))
    return out


# -- model formula oracles (exact rational arithmetic) -----------------------

def oracle_shift(bins: dict, shift: int) -> dict:
    """Shift a delay pmf down by `shift` bins; bins <= shift merge into 0."""
    out: dict = {}
    for d, mass in bins.items():
        nd = 0 if d <= shift else d - shift
        out[nd] = out.get(nd, Fraction(0)) + Fraction(mass)
    return out


def oracle_basic_window(bins: dict, rate_per_ms, window_ms, b_ms, g_ms, l):
    """Expected cardinality of basic window l from a shifted pmf."""
    n = (window_ms + b_ms - 1) // b_ms
    extent = b_ms if l < n else window_ms - (n - 1) * b_ms
    limit = (l - 1) * b_ms // g_ms
    mass = sum((Fraction(v) for d, v in bins.items() if d <= limit), Fraction(0))
    return Fraction(rate_per_ms) * extent * mass


def oracle_window_population(bins, rate_per_ms, window_ms, b_ms, g_ms):
    n = (window_ms + b_ms - 1) // b_ms
    return sum(
        (oracle_basic_window(bins, rate_per_ms, window_ms, b_ms, g_ms, l)
         for l in range(1, n + 1)),
        Fraction(0),
    )


def oracle_recall(pdfs, ksyncs_ms, rates_per_ms, windows_ms, g_ms, b_ms,
                  k_ms, sel_ratio=Fraction(1)):
    """Recall estimate: expected produced over expected true, clamped."""
    m = len(pdfs)
    shifted = []
    for i in range(m):
        shift = (k_ms + ksyncs_ms[i]) // g_ms
        shifted.append(oracle_shift(pdfs[i], int(shift)))
    pops = [
        oracle_window_population(shifted[i], rates_per_ms[i], windows_ms[i],
                                 b_ms, g_ms)
        for i in range(m)
    ]
    num = Fraction(0)
    den = Fraction(0)
    for i in range(m):
        term = shifted[i].get(0, Fraction(0))
        full = Fraction(1)
        for j in range(m):
            if j != i:
                term *= pops[j]
                full *= Fraction(rates_per_ms[j]) * windows_ms[j]
        num += term
        den += full
    value = Fraction(sel_ratio) * num / den
    return min(Fraction(1), max(Fraction(0), value))


def oracle_selectivity_ratio(m_cross: dict, m_join: dict, k_bin: int):
    """Partial-to-total productivity ratio; None when undefined."""
    pc = sum(v for d, v in m_cross.items() if d <= k_bin)
    pj = sum(v for d, v in m_join.items() if d <= k_bin)
    tc = sum(m_cross.values())
    tj = sum(m_join.values())
    if pc == 0 or tj == 0 or tc == 0:
        return None
    return Fraction(pj, pc) * Fraction(tc, tj)


def oracle_instant_requirement(gamma, true_past, prod_past, true_next):
    """Smallest next-interval recall that keeps the period recall at gamma.

    Solves prod_past + x * true_next >= gamma * (true_past + true_next)
    for x, clamped into [0, 1]; with nothing expected next, the overall
    target is the only meaningful requirement.
    """
    if true_next == 0:
        return Fraction(gamma)
    x = (Fraction(gamma) * (Fraction(true_past) + Fraction(true_next))
         - Fraction(prod_past)) / Fraction(true_next)
    return min(Fraction(1), max(Fraction(0), x))
