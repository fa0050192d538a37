"""Reference computations that share no code with the package.

Everything here is written from the operator definitions directly: Fock
states as plain dicts, ladder operators applied one at a time, and
closed-form resource formulas evaluated in extended precision.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict

import mpmath
import numpy as np
from scipy.optimize import brentq


def omega(n, M, L):
    return math.sqrt((2 * math.pi * n / L) ** 2 + M * M)


def _key(d):
    return tuple(sorted((n, r) for n, r in d.items() if r))


# --- Fock algebra -------------------------------------------------------------


def annihilate(n, state):
    """a_n acting on {key: amplitude}."""
    out = defaultdict(float)
    for k, amp in state.items():
        d = dict(k)
        r = d.get(n, 0)
        if r == 0:
            continue
        d[n] = r - 1
        out[_key(d)] += amp * math.sqrt(r)
    return out


def create(n, state):
    out = defaultdict(float)
    for k, amp in state.items():
        d = dict(k)
        r = d.get(n, 0)
        d[n] = r + 1
        out[_key(d)] += amp * math.sqrt(r + 1)
    return out


def apply_word(word, state):
    """Apply a normal-ordered word like [('c', -1), ('a', 2), ...], rightmost first."""
    for kind, n in reversed(word):
        state = create(n, state) if kind == "c" else annihilate(n, state)
        if not state:
            break
    return state


def _created_tuples(k, momentum, budget, window, M, L):
    """Ordered k-tuples of modes in [-window, window] summing to ``momentum`` with energy <= budget."""
    if k == 0:
        if momentum == 0:
            yield ()
        return
    if k == 1:
        if abs(momentum) <= window and omega(momentum, M, L) <= budget:
            yield (momentum,)
        return
    for n in range(-window, window + 1):
        w = omega(n, M, L)
        if w > budget:
            continue
        for rest in _created_tuples(k - 1, momentum - n, budget - w, window, M, L):
            yield (n,) + rest


def v_on_state(key, M, L, g, window, e_cap=math.inf):
    """V|key> as a sum over ordered quadruples (n1, n2, n3, n4) with n1+n2+n3+n4 = 0.

    For the class with k creators the word is
    a^dagger_{-n1} .. a^dagger_{-nk} a_{n_{k+1}} .. a_{n4}. Annihilated indices
    run over occupied modes only (other choices give zero) and created
    indices over |n| <= window; images above ``e_cap`` are skipped since
    they cannot lie in a basis capped at that energy.
    """
    src = {key: 1.0}
    occupied = sorted({n for n, _ in key})
    e_src = sum(r * omega(n, M, L) for n, r in key)
    weights = (1, 4, 6, 4, 1)
    out = defaultdict(float)
    pref = g * L / 4.0
    tol = 1e-12 * max(1.0, e_cap) if math.isfinite(e_cap) else math.inf
    for k in range(5):
        for ann in itertools.product(occupied, repeat=4 - k):
            e_old = sum(omega(n, M, L) for n in ann)
            budget = e_cap + tol - (e_src - e_old)
            # created indices n_i enter as a^dagger_{-n_i}; momentum constraint on the n_i
            for cre in _created_tuples(k, -sum(ann), budget, window, M, L):
                ns = cre + ann
                base = pref
                for n in ns:
                    base /= math.sqrt(L * omega(n, M, L))
                word = [("c", -n) for n in cre] + [("a", n) for n in ann]
                for t, a in apply_word(word, src).items():
                    out[t] += weights[k] * base * a
    return out


def parity(key):
    return _key({-n: r for n, r in key})


def parity_vector(key):
    """Unnormalised orbit sum |r> + P|r> with the beta prefactor applied."""
    p = parity(key)
    if p == key:
        return {key: 0.5 * 2.0}
    return {key: 1 / math.sqrt(2), p: 1 / math.sqrt(2)}


def brute_force_v(representatives, M, L, g):
    """Dense V over parity-even states given by their Fock-state representatives."""
    dim = len(representatives)
    window = max([abs(n) for k in representatives for n, _ in k] + [0])
    e_cap = max(sum(r * omega(n, M, L) for n, r in k) for k in representatives)
    vecs = [parity_vector(k) for k in representatives]
    cache = {}
    out = np.zeros((dim, dim))
    for j, vj in enumerate(vecs):
        image = defaultdict(float)
        for k, a in vj.items():
            if k not in cache:
                cache[k] = v_on_state(k, M, L, g, window, e_cap)
            for t, b in cache[k].items():
                image[t] += a * b
        for i, vi in enumerate(vecs):
            out[i, j] = sum(a * image.get(k, 0.0) for k, a in vi.items())
    return out


# --- brute-force basis -----------------------------------------------------------


def brute_force_basis(M, L, e_max, even_only=False):
    """All parity orbits of zero-momentum Fock states with energy <= e_max.

    Depth-first over every occupation vector on |n| <= floor(L e_max / 2 pi),
    pruning branches that already exceed the cutoff.
    """
    window = int(math.floor(L * e_max / (2 * math.pi)))
    modes = list(range(-window, window + 1))
    w = [omega(n, M, L) for n in modes]
    orbits = set()
    occ = [0] * len(modes)

    def rec(i, e):
        if i == len(modes):
            if sum(n * r for n, r in zip(modes, occ)) != 0:
                return
            if even_only and sum(occ) % 2:
                return
            k = _key(dict(zip(modes, occ)))
            orbits.add(frozenset({k, parity(k)}))
            return
        r = 0
        while e + r * w[i] <= e_max * (1 + 1e-12):
            occ[i] = r
            rec(i + 1, e + r * w[i])
            r += 1
        occ[i] = 0

    rec(0, 0.0)
    return orbits


# --- closed forms ------------------------------------------------------------

mpmath.mp.dps = 40


def truncation_error(g, m, e_max):
    return float(mpmath.mpf(24) ** 2 * g**2 / (4 * mpmath.pi * mpmath.mpf(e_max) ** 2 * m**2))


def _potential_mp(r, g, m):
    g, m = mpmath.mpf(g), mpmath.mpf(m)
    return -18 * g**2 / m**3 * mpmath.exp(-2 * m * r) / mpmath.sqrt(mpmath.pi * m * r)


def potential(r, g, m):
    return float(_potential_mp(mpmath.mpf(r), g, m))


def force(r, g, m):
    """dV/dr by extended-precision numerical differentiation."""
    return float(mpmath.diff(lambda x: _potential_mp(x, g, m), mpmath.mpf(r)))


def min_volume(epsilon, m):
    """L = 6 r0 with dV/dr(r0) / dV/dr(1/m) = epsilon, from brentq on an analytic ratio."""

    def ratio(r):
        # dV/dr proportional to r^-1/2 e^{-2mr} (1/(2r) + 2m)
        f = lambda x: x**-0.5 * math.exp(-2 * m * x) * (0.5 / x + 2 * m)  # noqa: E731
        return f(r) / f(1 / m) - epsilon

    hi = 1 / m
    while ratio(hi) > 0:
        hi *= 2
    r0 = brentq(ratio, 1 / m, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return 6 * r0, r0


def qubits_per_site(epsilon, sqrt_s, L, a, m):
    arg = 1 + mpmath.mpf(4) * sqrt_s / (m * mpmath.pi) * (1 + mpmath.sqrt(mpmath.mpf(L) / (a * epsilon))) ** 2
    return int(mpmath.ceil(mpmath.log(arg, 2)))


def lattice_spacing(epsilon, m):
    # epsilon = 4 (m a)^2
    return float(mpmath.sqrt(mpmath.mpf(epsilon) / 4) / m)


def emax_for(epsilon, g, m):
    return float(24 * mpmath.mpf(g) / (m * mpmath.sqrt(4 * mpmath.pi * epsilon)))
