"""Braid group orbits on tuples: exact component enumeration.

A tuple (g_1, ..., g_n) of nonidentity elements of the ramification
support C is acted on by the moves

    left  at i: (g_i, g_{i+1}) -> (g_i g_{i+1} g_i^-1, g_i)
    right at i: (g_i, g_{i+1}) -> (g_{i+1}, g_{i+1}^-1 g_i g_{i+1})

which preserve the product and the class multiset.  Orbits are computed
by breadth-first closure with a hashed visited set, deterministic by
construction: representatives are lexicographically minimal.
"""

from __future__ import annotations

import os
from .errors import BudgetExceeded, IndexOutOfRange


DEFAULT_BUDGET = 10 ** 8


def state_budget():
    return int(os.environ.get("HM_BUDGET", DEFAULT_BUDGET))


def braid_move(group, entries, i, direction="left"):
    """Apply the braid move at position i (1-based, 1 <= i < n)."""
    n = len(entries)
    if not 1 <= i < n:
        raise IndexOutOfRange(f"braid index {i} out of 1..{n - 1}")
    g, h = entries[i - 1], entries[i]
    out = list(entries)
    if direction == "left":
        out[i - 1] = group.conj(h, g)
        out[i] = g
    elif direction == "right":
        out[i - 1] = h
        out[i] = group.conj(g, group.inv[h])
    else:
        raise ValueError("direction must be 'left' or 'right'")
    return tuple(out)


def multidegree(group, entries, class_ids=None):
    """Multidegree of a tuple over geometric classes (dict class_id -> count)."""
    ct = group.conjugacy_table()
    out = {}
    for g in entries:
        c = ct.class_of[g]
        out[c] = out.get(c, 0) + 1
    return out


def _tuples_iter(group, class_elements, nbar_list, product_target):
    """All tuples with the given per-class counts and product, via DFS.

    ``class_elements``: list of element-lists per class (aligned with
    ``nbar_list``); classes are interleaved in every order (all multiset
    arrangements), so this enumerates every admissible tuple.
    """
    n = sum(nbar_list)
    k = len(nbar_list)
    # reachability pruning: set of products achievable with the remaining
    # class-budget is expensive to index exactly; use a cheap closure bound.
    all_elems = sorted({g for elems in class_elements for g in elems})

    reachable = [set() for _ in range(n + 1)]
    reachable[0] = {group.identity}
    for j in range(1, n + 1):
        prev = reachable[j - 1]
        cur = set()
        for x in prev:
            for g in all_elems:
                cur.add(group.mul(x, g))
        reachable[j] = cur

    def rec(prefix, partial, remaining, slots_left):
        if slots_left == 0:
            if partial == product_target:
                yield tuple(prefix)
            return
        # prune: the inverse-completion must be reachable
        needed = group.mul(group.inv[partial], product_target)
        if needed not in reachable[slots_left]:
            return
        for ci in range(k):
            if remaining[ci] == 0:
                continue
            remaining[ci] -= 1
            for g in class_elements[ci]:
                prefix.append(g)
                yield from rec(prefix, group.mul(partial, g), remaining, slots_left - 1)
                prefix.pop()
            remaining[ci] += 1

    yield from rec([], group.identity, list(nbar_list), n)


class OrbitCatalog:
    """Braid orbits for one (nbar, gamma, connected) key."""

    def __init__(self, group, c_elements, nbar, gamma, connected, orbits, n_tuples):
        self.group = group
        self.c_elements = tuple(sorted(c_elements))
        self.nbar = dict(nbar)
        self.gamma = gamma
        self.connected = connected
        self.orbits = orbits  # list of (representative tuple, size)
        self.n_tuples = n_tuples

    def count(self):
        return len(self.orbits)

    def to_json(self):
        return {
            "group": self.group.name,
            "support": list(self.c_elements),
            "nbar": {str(k): v for k, v in sorted(self.nbar.items())},
            "gamma": self.gamma,
            "connected": self.connected,
            "orbit_count": len(self.orbits),
            "orbits": [{"representative": list(rep), "size": size}
                       for rep, size in self.orbits],
        }


def orbit_enumerate(group, c_elements, nbar, gamma, connected=True, budget=None):
    """Braid orbits on tuples with multidegree nbar and (g_1...g_n)^-1 = gamma.

    ``nbar`` maps geometric class id -> count; ``gamma`` is an element index.
    If ``connected``, restrict to tuples whose entries generate the group.
    """
    budget = budget or state_budget()
    ct = group.conjugacy_table()
    c_set = set(c_elements)
    if group.identity in c_set:
        raise ValueError("support contains the identity")
    class_ids = sorted({ct.class_of[g] for g in c_set})
    for cid, cnt in nbar.items():
        if cnt and cid not in class_ids:
            raise ValueError(f"multidegree on class {cid} outside the support")
    nbar_list = [int(nbar.get(cid, 0)) for cid in class_ids]
    class_elements = [[g for g in ct.classes[cid] if g in c_set] for cid in class_ids]
    for cid, elems in zip(class_ids, class_elements):
        full = ct.classes[cid]
        if any((g in c_set) != (full[0] in c_set) for g in full):
            raise ValueError("support is not conjugation-invariant")
    n = sum(nbar_list)
    n_states = max(len(c_set), 1) ** n
    if n_states > budget:
        raise BudgetExceeded("orbit enumeration too large",
                             attempted=n_states, budget=budget)

    product_target = group.inv[gamma]
    admissible = set(_tuples_iter(group, class_elements, nbar_list, product_target))
    if connected:
        gen_cache = {}

        def generates(t):
            key = frozenset(t)
            if key not in gen_cache:
                gen_cache[key] = group.generates(key)
            return gen_cache[key]

        admissible = {t for t in admissible if generates(t)}

    orbits = []
    seen = set()
    for start in sorted(admissible):
        if start in seen:
            continue
        frontier = [start]
        orbit = {start}
        while frontier:
            new = []
            for t in frontier:
                for i in range(1, n):
                    for direction in ("left", "right"):
                        t2 = braid_move(group, t, i, direction)
                        if t2 not in orbit:
                            orbit.add(t2)
                            new.append(t2)
            frontier = new
        assert orbit <= admissible, "braid moves left the admissible set"
        seen |= orbit
        orbits.append((min(orbit), len(orbit)))
    orbits.sort()
    return OrbitCatalog(group, c_set, nbar, gamma, connected, orbits, len(admissible))


def stabilization_scan(group, c_elements, gamma, nbar_range, connected=True,
                       budget=None):
    """Orbit counts over a grid of multidegrees, with empirical stabilization.

    ``nbar_range``: iterable of multidegree dicts.  Returns a dict with the
    per-nbar counts and the least observed bound beyond which counts stop
    changing (reported as empirical only; no theoretical bound is claimed).
    """
    rows = []
    for nbar in nbar_range:
        cat = orbit_enumerate(group, c_elements, nbar, gamma, connected, budget)
        rows.append({"nbar": dict(nbar), "orbits": cat.count(),
                     "tuples": cat.n_tuples})
    counts = [r["orbits"] for r in rows]
    stable_value = counts[-1] if counts else 0
    first_stable = None
    for i in range(len(counts) - 1, -1, -1):
        if counts[i] != stable_value:
            break
        first_stable = i
    return {
        "rows": rows,
        "stable_value": stable_value,
        "first_stable_index": first_stable,
        "empirical_only": True,
    }
