"""Compiled inner loops for the genetic localizer.

One call runs the whole search for one node.  Random numbers are passed
in as a pre-drawn ``(generations, k)`` block so results depend only on the
caller's generator.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def objectives(pos, anchors, dis, edis, mask, out):
    n = pos.shape[0]
    K = anchors.shape[0]
    for p in range(n):
        s1 = 0.0
        s2 = 0.0
        for k in range(K):
            dx = pos[p, 0] - anchors[k, 0]
            dy = pos[p, 1] - anchors[k, 1]
            dz = pos[p, 2] - anchors[k, 2]
            d = math.sqrt(dx * dx + dy * dy + dz * dz)
            r1 = (d - dis[k]) * mask[k]
            r2 = (d - edis[k]) * mask[k]
            s1 += r1 * r1
            s2 += r2 * r2
        out[p, 0] = s1
        out[p, 1] = s2


@njit(cache=True)
def ranks(f):
    n = f.shape[0]
    dom = np.zeros((n, n), dtype=np.bool_)
    count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if (f[i, 0] <= f[j, 0] and f[i, 1] <= f[j, 1]
                    and (f[i, 0] < f[j, 0] or f[i, 1] < f[j, 1])):
                dom[i, j] = True
                count[j] += 1
    rank = np.zeros(n, dtype=np.int64)
    done = 0
    level = 0
    front = np.zeros(n, dtype=np.bool_)
    while done < n:
        level += 1
        for i in range(n):
            front[i] = rank[i] == 0 and count[i] == 0
        for i in range(n):
            if front[i]:
                rank[i] = level
                done += 1
                for j in range(n):
                    if dom[i, j]:
                        count[j] -= 1
    return rank


@njit(cache=True)
def _sorted_by(members, m, f, obj):
    # stable insertion sort of members[:m] by f[:, obj]
    order = members[:m].copy()
    for a in range(1, m):
        key = order[a]
        b = a - 1
        while b >= 0 and f[order[b], obj] > f[key, obj]:
            order[b + 1] = order[b]
            b -= 1
        order[b + 1] = key
    return order


@njit(cache=True)
def crowding(f, rank):
    n = f.shape[0]
    crowd = np.zeros(n)
    members = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        if rank[i] > top:
            top = rank[i]
    for level in range(1, top + 1):
        m = 0
        for i in range(n):
            if rank[i] == level:
                members[m] = i
                m += 1
        if m <= 2:
            for t in range(m):
                crowd[members[t]] = np.inf
            continue
        for obj in range(f.shape[1]):
            order = _sorted_by(members, m, f, obj)
            span = f[order[m - 1], obj] - f[order[0], obj]
            crowd[order[0]] = np.inf
            crowd[order[m - 1]] = np.inf
            if span > 0:
                for t in range(1, m - 1):
                    crowd[order[t]] += (f[order[t + 1], obj] - f[order[t - 1], obj]) / span
    return crowd


@njit(cache=True)
def _better(ra, ca, ia, rb, cb, ib):
    # survival order: lower rank, then larger crowding, then lower index
    if ra != rb:
        return ra < rb
    if ca != cb:
        return ca > cb
    return ia < ib


@njit(cache=True)
def survival_order(rank, crowd):
    n = rank.shape[0]
    order = np.arange(n)
    for a in range(1, n):
        key = order[a]
        b = a - 1
        while b >= 0 and _better(rank[key], crowd[key], key, rank[order[b]], crowd[order[b]], order[b]):
            order[b + 1] = order[b]
            b -= 1
        order[b + 1] = key
    return order


@njit(cache=True)
def _clip(x, lo, hi):
    return min(max(x, lo), hi)


@njit(cache=True)
def evolve_node(anchors, dis, edis, mask, side, pos0, uniforms, pc, pm, eta_c, eta_m):
    """Returns final positions, objectives, and per-generation (min f1, min f2)."""
    P = pos0.shape[0]
    half = P // 2
    G = uniforms.shape[0]
    lo = 0.0
    hi = side
    pos = pos0.copy()
    f = np.empty((P, 2))
    objectives(pos, anchors, dis, edis, mask, f)
    rank = ranks(f)
    crowd = crowding(f, rank)
    best = np.empty((G + 1, 2))
    best[0, 0] = f[:, 0].min()
    best[0, 1] = f[:, 1].min()

    kids = np.empty((P, 3))
    kf = np.empty((P, 2))
    all_pos = np.empty((2 * P, 3))
    all_f = np.empty((2 * P, 2))
    winners = np.empty(P, dtype=np.int64)
    pc_pow = 1.0 / (eta_c + 1.0)
    pm_pow = 1.0 / (eta_m + 1.0)
    width = hi - lo

    for g in range(G):
        u = uniforms[g]
        o = 0
        for t in range(P):
            i = min(int(u[o + 2 * t] * P), P - 1)
            j = min(int(u[o + 2 * t + 1] * P), P - 1)
            if rank[j] < rank[i] or (rank[j] == rank[i] and crowd[j] > crowd[i]):
                winners[t] = j
            else:
                winners[t] = i
        o += 2 * P
        o_var = o + half
        o_beta = o_var + 3 * half
        for q in range(half):
            a = winners[2 * q]
            b = winners[2 * q + 1]
            do_cx = u[o + q] < pc
            for c in range(3):
                x1 = pos[a, c]
                x2 = pos[b, c]
                ub = u[o_beta + 3 * q + c]
                if do_cx and u[o_var + 3 * q + c] < 0.5 and abs(x1 - x2) > 1e-14:
                    if ub <= 0.5:
                        beta = (2.0 * ub) ** pc_pow
                    else:
                        beta = (1.0 / (2.0 * (1.0 - ub))) ** pc_pow
                    y1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
                    y2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
                    kids[2 * q, c] = _clip(y1, lo, hi)
                    kids[2 * q + 1, c] = _clip(y2, lo, hi)
                else:
                    kids[2 * q, c] = x1
                    kids[2 * q + 1, c] = x2
        o = o_beta + 3 * half
        o_val = o + 3 * P
        for t in range(P):
            for c in range(3):
                if u[o + 3 * t + c] < pm:
                    x = kids[t, c]
                    uu = u[o_val + 3 * t + c]
                    if uu < 0.5:
                        d1 = (x - lo) / width
                        delta = (2.0 * uu + (1.0 - 2.0 * uu) * (1.0 - d1) ** (eta_m + 1.0)) ** pm_pow - 1.0
                    else:
                        d2 = (hi - x) / width
                        delta = 1.0 - (2.0 * (1.0 - uu) + 2.0 * (uu - 0.5) * (1.0 - d2) ** (eta_m + 1.0)) ** pm_pow
                    kids[t, c] = _clip(x + delta * width, lo, hi)

        objectives(kids, anchors, dis, edis, mask, kf)
        all_pos[:P] = pos
        all_pos[P:] = kids
        all_f[:P] = f
        all_f[P:] = kf
        all_rank = ranks(all_f)
        all_crowd = crowding(all_f, all_rank)
        order = survival_order(all_rank, all_crowd)
        for t in range(P):
            s = order[t]
            pos[t] = all_pos[s]
            f[t] = all_f[s]
            rank[t] = all_rank[s]
            crowd[t] = all_crowd[s]
        best[g + 1, 0] = f[:, 0].min()
        best[g + 1, 1] = f[:, 1].min()
    return pos, f, best
