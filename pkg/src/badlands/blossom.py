"""Edmonds' weighted blossom algorithm, O(n^3), compiled with numba.

Primal-dual maximum-weight matching on general graphs with integer edge
weights (Galil's formulation).  With ``maxcardinality`` the result is the
heaviest among the maximum-cardinality matchings.

Vertices are ``0..n-1``; blossoms get ids ``n..2n-1``.  Edge ``k`` has
endpoints ``2k`` (its first vertex) and ``2k+1`` (its second); ``mate``
stores remote endpoints while the algorithm runs.  Nested blossom
bookkeeping lives in fixed-width rows with separate length arrays.
"""

from __future__ import annotations

import numba
import numpy as np
from numba.typed import List

_NONE = -1


@numba.njit(cache=True)
def _leaves(b, n, childs, nchild, out):
    """Write the vertices inside blossom ``b`` to ``out``; return their count."""
    cnt = 0
    stack = np.empty(2 * n + 1, dtype=np.int64)
    stack[0] = b
    sp = 1
    while sp:
        sp -= 1
        t = stack[sp]
        if t < n:
            out[cnt] = t
            cnt += 1
        else:
            for i in range(nchild[t] - 1, -1, -1):
                stack[sp] = childs[t, i]
                sp += 1
    return cnt


@numba.njit(cache=True)
def _slack(k, eu, ev, ew, dual):
    return dual[eu[k]] + dual[ev[k]] - 2 * ew[k]


@numba.njit(cache=True)
def _assign_label(w, t, p, n, inblossom, label, labelend, bestedge, base_of, mate, endpoint,
                  childs, nchild, queue, buf):
    while True:
        b = inblossom[w]
        label[w] = t
        label[b] = t
        labelend[w] = p
        labelend[b] = p
        bestedge[w] = -1
        bestedge[b] = -1
        if t == 1:
            cnt = _leaves(b, n, childs, nchild, buf)
            for i in range(cnt):
                queue.append(buf[i])
            return
        m = mate[base_of[b]]
        w = endpoint[m]
        t = 1
        p = m ^ 1


@numba.njit(cache=True)
def _scan_blossom(v, w, inblossom, label, labelend, base_of, endpoint, path):
    """Trace back from v and w; return the base of a new blossom or -1 for an augmenting path."""
    plen = 0
    base = -1
    while v != -1 or w != -1:
        b = inblossom[v]
        if label[b] & 4:
            base = base_of[b]
            break
        path[plen] = b
        plen += 1
        label[b] = 5
        if labelend[b] == -1:
            v = -1
        else:
            v = endpoint[labelend[b]]
            b = inblossom[v]
            v = endpoint[labelend[b]]
        if w != -1:
            v, w = w, v
    for i in range(plen):
        label[path[i]] = 1
    return base


@numba.njit(cache=True)
def _mwm(n, eu, ev, ew, maxcardinality):
    m = len(eu)
    endpoint = np.empty(2 * m, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    for k in range(m):
        endpoint[2 * k] = eu[k]
        endpoint[2 * k + 1] = ev[k]
        deg[eu[k]] += 1
        deg[ev[k]] += 1
    nb_ptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        nb_ptr[i + 1] = nb_ptr[i] + deg[i]
    fill = nb_ptr[:-1].copy()
    nb = np.empty(2 * m, dtype=np.int64)
    for k in range(m):
        nb[fill[eu[k]]] = 2 * k + 1
        fill[eu[k]] += 1
        nb[fill[ev[k]]] = 2 * k
        fill[ev[k]] += 1

    maxweight = 0
    for k in range(m):
        if ew[k] > maxweight:
            maxweight = ew[k]

    nn = 2 * n
    mate = np.full(n, -1, dtype=np.int64)
    label = np.zeros(nn, dtype=np.int64)
    labelend = np.full(nn, -1, dtype=np.int64)
    inblossom = np.arange(n, dtype=np.int64)
    parent = np.full(nn, -1, dtype=np.int64)
    childs = np.zeros((nn, n + 1), dtype=np.int64)
    endps = np.zeros((nn, n + 1), dtype=np.int64)
    nchild = np.zeros(nn, dtype=np.int64)
    base_of = np.full(nn, -1, dtype=np.int64)
    for i in range(n):
        base_of[i] = i
    bestedge = np.full(nn, -1, dtype=np.int64)
    bbest = np.zeros((nn, nn), dtype=np.int64)
    nbbest = np.full(nn, _NONE, dtype=np.int64)
    unused = np.empty(n, dtype=np.int64)
    for i in range(n):
        unused[i] = n + i
    n_unused = n
    dual = np.zeros(nn, dtype=np.int64)
    for i in range(n):
        dual[i] = maxweight
    allowedge = np.zeros(m, dtype=np.bool_)
    buf = np.empty(n, dtype=np.int64)
    buf2 = np.empty(n, dtype=np.int64)
    path = np.empty(nn, dtype=np.int64)
    tmp_p = np.empty(n + 1, dtype=np.int64)
    tmp_e = np.empty(n + 1, dtype=np.int64)
    bestedgeto = np.empty(nn, dtype=np.int64)
    work = np.empty(nn * (n + 2), dtype=np.int64)

    for _stage in range(n):
        label[:] = 0
        bestedge[:] = -1
        for b in range(n, nn):
            nbbest[b] = _NONE
        allowedge[:] = False
        queue = List.empty_list(numba.int64)
        for v in range(n):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                _assign_label(v, 1, -1, n, inblossom, label, labelend, bestedge, base_of, mate,
                              endpoint, childs, nchild, queue, buf)
        augmented = False
        while True:
            while len(queue) > 0 and not augmented:
                v = queue.pop()
                for idx in range(nb_ptr[v], nb_ptr[v + 1]):
                    p = nb[idx]
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0
                    if not allowedge[k]:
                        kslack = _slack(k, eu, ev, ew, dual)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            _assign_label(w, 2, p ^ 1, n, inblossom, label, labelend, bestedge,
                                          base_of, mate, endpoint, childs, nchild, queue, buf)
                        elif label[inblossom[w]] == 1:
                            base = _scan_blossom(v, w, inblossom, label, labelend, base_of, endpoint, path)
                            if base >= 0:
                                # --- add blossom ---
                                bv = inblossom[eu[k]]
                                bw = inblossom[ev[k]]
                                bb = inblossom[base]
                                n_unused -= 1
                                b = unused[n_unused]
                                base_of[b] = base
                                parent[b] = -1
                                parent[bb] = b
                                c1 = 0
                                while bv != bb:
                                    parent[bv] = b
                                    tmp_p[c1] = bv
                                    tmp_e[c1] = labelend[bv]
                                    c1 += 1
                                    bv = inblossom[endpoint[labelend[bv]]]
                                nc = 0
                                childs[b, nc] = bb
                                nc += 1
                                for i in range(c1 - 1, -1, -1):
                                    childs[b, nc] = tmp_p[i]
                                    nc += 1
                                ne = 0
                                for i in range(c1 - 1, -1, -1):
                                    endps[b, ne] = tmp_e[i]
                                    ne += 1
                                endps[b, ne] = 2 * k
                                ne += 1
                                while bw != bb:
                                    parent[bw] = b
                                    childs[b, nc] = bw
                                    nc += 1
                                    endps[b, ne] = labelend[bw] ^ 1
                                    ne += 1
                                    bw = inblossom[endpoint[labelend[bw]]]
                                nchild[b] = nc
                                label[b] = 1
                                labelend[b] = labelend[bb]
                                dual[b] = 0
                                cnt = _leaves(b, n, childs, nchild, buf)
                                for i in range(cnt):
                                    x = buf[i]
                                    if label[inblossom[x]] == 2:
                                        queue.append(x)
                                    inblossom[x] = b
                                bestedgeto[:] = -1
                                for ci in range(nc):
                                    cb = childs[b, ci]
                                    if nbbest[cb] == _NONE:
                                        cnt = _leaves(cb, n, childs, nchild, buf2)
                                        for li in range(cnt):
                                            x = buf2[li]
                                            for jdx in range(nb_ptr[x], nb_ptr[x + 1]):
                                                k2 = nb[jdx] // 2
                                                j = ev[k2]
                                                if inblossom[j] == b:
                                                    j = eu[k2]
                                                bj = inblossom[j]
                                                if bj != b and label[bj] == 1 and (
                                                        bestedgeto[bj] == -1 or
                                                        _slack(k2, eu, ev, ew, dual) < _slack(bestedgeto[bj], eu, ev, ew, dual)):
                                                    bestedgeto[bj] = k2
                                    else:
                                        for li in range(nbbest[cb]):
                                            k2 = bbest[cb, li]
                                            j = ev[k2]
                                            if inblossom[j] == b:
                                                j = eu[k2]
                                            bj = inblossom[j]
                                            if bj != b and label[bj] == 1 and (
                                                    bestedgeto[bj] == -1 or
                                                    _slack(k2, eu, ev, ew, dual) < _slack(bestedgeto[bj], eu, ev, ew, dual)):
                                                bestedgeto[bj] = k2
                                    nbbest[cb] = _NONE
                                    bestedge[cb] = -1
                                cntb = 0
                                for x in range(nn):
                                    if bestedgeto[x] != -1:
                                        bbest[b, cntb] = bestedgeto[x]
                                        cntb += 1
                                nbbest[b] = cntb
                                bestedge[b] = -1
                                for li in range(cntb):
                                    k2 = bbest[b, li]
                                    if bestedge[b] == -1 or _slack(k2, eu, ev, ew, dual) < _slack(bestedge[b], eu, ev, ew, dual):
                                        bestedge[b] = k2
                            else:
                                # --- augment matching along edge k ---
                                for side in range(2):
                                    if side == 0:
                                        s = eu[k]
                                        p2 = 2 * k + 1
                                    else:
                                        s = ev[k]
                                        p2 = 2 * k
                                    while True:
                                        bs = inblossom[s]
                                        if bs >= n:
                                            _augment_blossom(bs, s, n, parent, childs, endps, nchild, base_of,
                                                             mate, endpoint, work)
                                        mate[s] = p2
                                        if labelend[bs] == -1:
                                            break
                                        t = endpoint[labelend[bs]]
                                        bt = inblossom[t]
                                        s = endpoint[labelend[bt]]
                                        j = endpoint[labelend[bt] ^ 1]
                                        if bt >= n:
                                            _augment_blossom(bt, j, n, parent, childs, endps, nchild, base_of,
                                                             mate, endpoint, work)
                                        mate[j] = labelend[bt]
                                        p2 = labelend[bt] ^ 1
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < _slack(bestedge[b], eu, ev, ew, dual):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < _slack(bestedge[w], eu, ev, ew, dual):
                            bestedge[w] = k
            if augmented:
                break

            deltatype = -1
            delta = 0
            deltaedge = -1
            deltablossom = -1
            if not maxcardinality:
                deltatype = 1
                delta = dual[0]
                for v in range(1, n):
                    if dual[v] < delta:
                        delta = dual[v]
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    dd = _slack(bestedge[v], eu, ev, ew, dual)
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(nn):
                if parent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    dd = _slack(bestedge[b], eu, ev, ew, dual) // 2
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n, nn):
                if base_of[b] >= 0 and parent[b] == -1 and label[b] == 2 and (deltatype == -1 or dual[b] < delta):
                    delta = dual[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                deltatype = 1
                delta = dual[0]
                for v in range(1, n):
                    if dual[v] < delta:
                        delta = dual[v]
                if delta < 0:
                    delta = 0

            for v in range(n):
                lb = label[inblossom[v]]
                if lb == 1:
                    dual[v] -= delta
                elif lb == 2:
                    dual[v] += delta
            for b in range(n, nn):
                if base_of[b] >= 0 and parent[b] == -1:
                    if label[b] == 1:
                        dual[b] += delta
                    elif label[b] == 2:
                        dual[b] -= delta

            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                i = eu[deltaedge]
                if label[inblossom[i]] == 0:
                    i = ev[deltaedge]
                queue.append(i)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                queue.append(eu[deltaedge])
            else:
                n_unused = _expand_blossom(deltablossom, False, n, inblossom, label, labelend, bestedge,
                                           base_of, mate, endpoint, childs, endps, nchild, parent,
                                           nbbest, dual, allowedge, unused, n_unused, queue, buf, work)
        if not augmented:
            break
        for b in range(n, nn):
            if parent[b] == -1 and base_of[b] >= 0 and label[b] == 1 and dual[b] == 0:
                n_unused = _expand_blossom(b, True, n, inblossom, label, labelend, bestedge,
                                           base_of, mate, endpoint, childs, endps, nchild, parent,
                                           nbbest, dual, allowedge, unused, n_unused, queue, buf, work)

    out = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        if mate[v] >= 0:
            out[v] = endpoint[mate[v]]
    return out


@numba.njit(cache=True)
def _expand_blossom(root, endstage, n, inblossom, label, labelend, bestedge, base_of, mate, endpoint,
                    childs, endps, nchild, parent, nbbest, dual, allowedge, unused, n_unused, queue, buf, work):
    """Dissolve blossom ``root`` (and, at end of stage, its zero-dual sub-blossoms)."""
    sp = 1
    work[0] = root
    while sp:
        sp -= 1
        b = work[sp]
        nc = nchild[b]
        for ci in range(nc):
            s = childs[b, ci]
            parent[s] = -1
            if s < n:
                inblossom[s] = s
            elif endstage and dual[s] == 0:
                work[sp] = s
                sp += 1
            else:
                cnt = _leaves(s, n, childs, nchild, buf)
                for i in range(cnt):
                    inblossom[buf[i]] = s
        if (not endstage) and label[b] == 2:
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = 0
            while childs[b, j] != entrychild:
                j += 1
            if j & 1:
                j -= nc
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[endps[b, (j - endptrick) % nc] ^ endptrick ^ 1]] = 0
                _assign_label(endpoint[p ^ 1], 2, p, n, inblossom, label, labelend, bestedge, base_of,
                              mate, endpoint, childs, nchild, queue, buf)
                allowedge[endps[b, (j - endptrick) % nc] // 2] = True
                j += jstep
                p = endps[b, (j - endptrick) % nc] ^ endptrick
                allowedge[p // 2] = True
                j += jstep
            bv = childs[b, j % nc]
            label[endpoint[p ^ 1]] = 2
            label[bv] = 2
            labelend[endpoint[p ^ 1]] = p
            labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while childs[b, j % nc] != entrychild:
                bv = childs[b, j % nc]
                if label[bv] == 1:
                    j += jstep
                    continue
                cnt = _leaves(bv, n, childs, nchild, buf)
                found = -1
                for i in range(cnt):
                    if label[buf[i]] != 0:
                        found = buf[i]
                        break
                if found != -1:
                    label[found] = 0
                    label[endpoint[mate[base_of[bv]]]] = 0
                    _assign_label(found, 2, labelend[found], n, inblossom, label, labelend, bestedge,
                                  base_of, mate, endpoint, childs, nchild, queue, buf)
                j += jstep
        label[b] = -1
        labelend[b] = -1
        nchild[b] = 0
        base_of[b] = -1
        nbbest[b] = _NONE
        bestedge[b] = -1
        unused[n_unused] = b
        n_unused += 1
    return n_unused


@numba.njit(cache=True)
def _augment_blossom(root, v0, n, parent, childs, endps, nchild, base_of, mate, endpoint, work):
    """Swap matched/unmatched edges inside blossom ``root`` so that vertex ``v0`` becomes its base."""
    sp = 2
    work[0] = root
    work[1] = v0
    while sp:
        sp -= 2
        b = work[sp]
        v = work[sp + 1]
        t = v
        while parent[t] != b:
            t = parent[t]
        if t >= n:
            work[sp] = t
            work[sp + 1] = v
            sp += 2
        nc = nchild[b]
        i = 0
        while childs[b, i] != t:
            i += 1
        j = i
        if i & 1:
            j -= nc
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[b, j % nc]
            p = endps[b, (j - endptrick) % nc] ^ endptrick
            if t >= n:
                work[sp] = t
                work[sp + 1] = endpoint[p]
                sp += 2
            j += jstep
            t = childs[b, j % nc]
            if t >= n:
                work[sp] = t
                work[sp + 1] = endpoint[p ^ 1]
                sp += 2
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        rc = childs[b, :nc].copy()
        re = endps[b, :nc].copy()
        for x in range(nc):
            childs[b, x] = rc[(x + i) % nc]
            endps[b, x] = re[(x + i) % nc]
        # Sub-blossoms may still be queued, so take the new base directly.
        base_of[b] = v


@numba.njit(cache=True)
def max_weight_matching_arrays(n, eu, ev, ew, maxcardinality):
    if len(eu) == 0:
        return np.full(n, -1, dtype=np.int64)
    return _mwm(n, eu, ev, ew, maxcardinality)


def max_weight_matching(n: int, edges, maxcardinality: bool = False) -> list[int]:
    """Mate of each vertex (``-1`` if unmatched) in a maximum-weight matching.

    ``edges`` is a sequence of ``(u, v, weight)`` with integer weights and
    at most one edge per vertex pair.
    """
    eu = np.asarray([e[0] for e in edges], dtype=np.int64)
    ev = np.asarray([e[1] for e in edges], dtype=np.int64)
    ew = np.asarray([e[2] for e in edges], dtype=np.int64)
    if len(eu) and (eu == ev).any():
        raise ValueError("self-loops are not allowed")
    return max_weight_matching_arrays(n, eu, ev, ew, maxcardinality).tolist()
