"""Independent brute-force oracles.

Nothing here reuses fibgen's algorithms: each predicate is checked straight
from its definition with plain loops over indices.
"""

from itertools import product


def composable(c, g, f):
    return int(c.tgt[f]) == int(c.src[g])


def is_category(n_obj, src, tgt, ident, comp):
    """Check a raw presentation against the axioms, one triple at a time."""
    nm = len(src)
    for o in range(n_obj):
        i = ident[o]
        if not (0 <= i < nm) or src[i] != o or tgt[i] != o:
            return False
    for g, f in product(range(nm), repeat=2):
        ok = tgt[f] == src[g]
        r = comp[g][f]
        if ok != (r != -1):
            return False
        if ok and (src[r] != src[f] or tgt[r] != tgt[g]):
            return False
    for f in range(nm):
        if comp[ident[tgt[f]]][f] != f or comp[f][ident[src[f]]] != f:
            return False
    for h, g, f in product(range(nm), repeat=3):
        if tgt[f] == src[g] and tgt[g] == src[h]:
            if comp[comp[h][g]][f] != comp[h][comp[g][f]]:
                return False
    return True


def is_cartesian(q, f):
    """For every g: Z -> Y and v with q(f)∘v = q(g) there is exactly one h with f∘h = g over v."""
    E, B = q.dom, q.cod
    X, Y = int(E.src[f]), int(E.tgt[f])
    qf = int(q.mor_map[f])
    for g in range(E.n_mor):
        if int(E.tgt[g]) != Y:
            continue
        Z = int(E.src[g])
        for v in range(B.n_mor):
            if int(B.src[v]) != q.obj_map[Z] or int(B.tgt[v]) != q.obj_map[X]:
                continue
            if int(B.comp[qf, v]) != int(q.mor_map[g]):
                continue
            n = sum(1 for h in range(E.n_mor)
                    if int(E.src[h]) == Z and int(E.tgt[h]) == X
                    and int(E.comp[f, h]) == g and int(q.mor_map[h]) == v)
            if n != 1:
                return False
    return True


def is_pullback(B, f, g, p1, p2):
    """``f: X -> Z``, ``g: Y -> Z``, ``p1: P -> X``, ``p2: P -> Y`` with ``f∘p1 = g∘p2``,
    and every cone ``(a, b)`` from any ``W`` factors uniquely through ``P``."""
    if int(B.comp[f, p1]) != int(B.comp[g, p2]):
        return False
    P = int(B.src[p1])
    X, Y = int(B.src[f]), int(B.src[g])
    for W in range(B.n_obj):
        for a in range(B.n_mor):
            if int(B.src[a]) != W or int(B.tgt[a]) != X:
                continue
            for b in range(B.n_mor):
                if int(B.src[b]) != W or int(B.tgt[b]) != Y or int(B.comp[f, a]) != int(B.comp[g, b]):
                    continue
                n = sum(1 for k in range(B.n_mor)
                        if int(B.src[k]) == W and int(B.tgt[k]) == P
                        and int(B.comp[p1, k]) == a and int(B.comp[p2, k]) == b)
                if n != 1:
                    return False
    return True


def cartesian_into(q, T):
    E = q.dom
    return [f for f in range(E.n_mor) if int(E.tgt[f]) == T and is_cartesian(q, f)]


def generic_flags(q, T):
    """generic / skeletal / gaunt straight from the definitions."""
    E = q.dom
    carts = cartesian_into(q, T)
    by_src = {x: [f for f in carts if int(E.src[f]) == x] for x in range(E.n_obj)}
    generic = all(by_src.values())
    skeletal = generic and all(len({int(q.mor_map[f]) for f in fs}) == 1 for fs in by_src.values())
    gaunt = generic and all(len(fs) == 1 for fs in by_src.values())
    return {"generic": generic, "skeletal": skeletal, "gaunt": gaunt}
