"""Finite group tables: validation, inverses, closures, standard examples.

Groups are given as Cayley tables ``table[i][j] = index of g_i * g_j``.
"""

from __future__ import annotations

import itertools

import numpy as np


class GroupTableError(ValueError):
    """The table violates a group axiom; the message names the failure."""


def validate_cayley(table):
    """Check the group axioms, returning the identity index.

    Raises :class:`GroupTableError` naming the failing axiom, e.g.
    ``associativity fails at (i, j, k)``.
    """
    t = np.asarray(table, dtype=int)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise GroupTableError("table must be square")
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        raise GroupTableError("table entries must be element indices in range")
    identity = None
    for e in range(n):
        if all(t[e, j] == j and t[j, e] == j for j in range(n)):
            identity = e
            break
    if identity is None:
        raise GroupTableError("no identity element")
    for i in range(n):
        if not any(t[i, j] == identity and t[j, i] == identity for j in range(n)):
            raise GroupTableError(f"no inverse for element {i}")
    for i, j, k in itertools.product(range(n), repeat=3):
        if t[t[i, j], k] != t[i, t[j, k]]:
            raise GroupTableError(f"associativity fails at ({i}, {j}, {k})")
    return identity


def inverses(table, identity):
    t = np.asarray(table, dtype=int)
    n = t.shape[0]
    inv = [-1] * n
    for i in range(n):
        for j in range(n):
            if t[i, j] == identity:
                inv[i] = j
                break
    return inv


def subgroup_closure(table, generators):
    """Smallest subset closed under the product containing the generators.

    In a finite group, closure under products of a nonempty set containing
    its own difference set already yields the generated subgroup.
    """
    t = np.asarray(table, dtype=int)
    gens = set(int(g) for g in generators)
    if not gens:
        raise GroupTableError("empty generating set")
    closure = set(gens)
    frontier = list(gens)
    while frontier:
        new = []
        for a in frontier:
            for b in closure | gens:
                for c in (t[a, b], t[b, a]):
                    if c not in closure:
                        closure.add(int(c))
                        new.append(int(c))
        frontier = new
    return closure


def difference_set(table, identity, support):
    """{ i^{-1} j : i, j in support }."""
    inv = inverses(table, identity)
    t = np.asarray(table, dtype=int)
    return {int(t[inv[i], j]) for i in support for j in support}


def cyclic_table(n):
    return [[(i + j) % n for j in range(n)] for i in range(n)]


def symmetric_table(n):
    """Cayley table of S_n with elements enumerated by itertools order."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = []
    for p in perms:
        row = []
        for q in perms:
            # (p q)(x) = p(q(x))
            row.append(index[tuple(p[q[x]] for x in range(n))])
        table.append(row)
    return table


def direct_product_table(t1, t2):
    t1 = np.asarray(t1, dtype=int)
    t2 = np.asarray(t2, dtype=int)
    n1, n2 = t1.shape[0], t2.shape[0]
    table = np.zeros((n1 * n2, n1 * n2), dtype=int)
    for a, b in itertools.product(range(n1), range(n2)):
        for c, d in itertools.product(range(n1), range(n2)):
            table[a * n2 + b, c * n2 + d] = t1[a, c] * n2 + t2[b, d]
    return table.tolist()
