# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled network simplex kernel.

Algorithmic twin of ``_simplex_py.solve_dense``: same initial basis, same
pivot rules, same floating-point operation order, so the two kernels return
bitwise identical results.  See the pure-Python module for the algorithm
notes; this file only restates what differs (plain C loops, preallocated
work arrays).
"""

import numpy as np

from libc.math cimport INFINITY, ceil, sqrt


class PivotLimitError(RuntimeError):
    pass


def solve_dense(supply_in, demand_in, cost_in, double tol_enter,
                long bland_after, long max_pivots):
    supply_arr = np.ascontiguousarray(supply_in, dtype=np.float64)
    demand_arr = np.ascontiguousarray(demand_in, dtype=np.float64)
    cost_arr = np.ascontiguousarray(cost_in, dtype=np.float64)

    cdef const double[::1] supply = supply_arr
    cdef const double[::1] demand = demand_arr
    cdef const double[::1] cost = cost_arr

    cdef long m = supply.shape[0]
    cdef long n = demand.shape[0]
    cdef long V = m + n
    cdef long E = m * n

    x_arr = np.zeros(E, dtype=np.float64)
    cdef double[::1] x = x_arr
    basis_arr = np.empty(V - 1, dtype=np.int64)
    cdef long[::1] basis_arcs = basis_arr
    a_rem_arr = supply_arr.copy()
    b_rem_arr = demand_arr.copy()
    cdef double[::1] a_rem = a_rem_arr
    cdef double[::1] b_rem = b_rem_arr

    # --- northwest-corner initial basis --------------------------------
    cdef long i = 0, j = 0, step, arc
    cdef double t
    for step in range(V - 1):
        t = a_rem[i] if a_rem[i] <= b_rem[j] else b_rem[j]
        arc = i * n + j
        basis_arcs[step] = arc
        x[arc] = t
        a_rem[i] -= t
        b_rem[j] -= t
        if (a_rem[i] <= b_rem[j] and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1

    # --- tree arrays from a DFS over the staircase ----------------------
    adj_head_arr = np.full(V, -1, dtype=np.int64)
    adj_next_arr = np.empty(2 * (V - 1), dtype=np.int64)
    adj_node_arr = np.empty(2 * (V - 1), dtype=np.int64)
    adj_arc_arr = np.empty(2 * (V - 1), dtype=np.int64)
    cdef long[::1] adj_head = adj_head_arr
    cdef long[::1] adj_next = adj_next_arr
    cdef long[::1] adj_node = adj_node_arr
    cdef long[::1] adj_arc = adj_arc_arr
    cdef long k, u, w, s, slot
    for k in range(V - 1):
        arc = basis_arcs[k]
        u = arc // n
        w = m + arc % n
        slot = 2 * k
        adj_node[slot] = w
        adj_arc[slot] = arc
        adj_next[slot] = adj_head[u]
        adj_head[u] = slot
        slot = 2 * k + 1
        adj_node[slot] = u
        adj_arc[slot] = arc
        adj_next[slot] = adj_head[w]
        adj_head[w] = slot

    parent_arr = np.full(V, -1, dtype=np.int64)
    edge_arr = np.full(V, -1, dtype=np.int64)
    order_arr = np.empty(V, dtype=np.int64)
    pos_arr = np.empty(V, dtype=np.int64)
    visited_arr = np.zeros(V, dtype=np.int64)
    stack_arr = np.empty(V, dtype=np.int64)
    cdef long[::1] parent = parent_arr
    cdef long[::1] edge = edge_arr
    cdef long[::1] order = order_arr
    cdef long[::1] pos = pos_arr
    cdef long[::1] visited = visited_arr
    cdef long[::1] stack = stack_arr

    cdef long top = 0, cnt = 0, v, w_
    stack[0] = 0
    top = 1
    visited[0] = 1
    while top > 0:
        top -= 1
        v = stack[top]
        order[cnt] = v
        pos[v] = cnt
        cnt += 1
        s = adj_head[v]
        while s != -1:
            w_ = adj_node[s]
            if visited[w_] == 0:
                visited[w_] = 1
                parent[w_] = v
                edge[w_] = adj_arc[s]
                stack[top] = w_
                top += 1
            s = adj_next[s]

    size_arr = np.ones(V, dtype=np.int64)
    last_arr = np.empty(V, dtype=np.int64)
    next_arr = np.empty(V, dtype=np.int64)
    prev_arr = np.empty(V, dtype=np.int64)
    cdef long[::1] size = size_arr
    cdef long[::1] last = last_arr
    cdef long[::1] next_ = next_arr
    cdef long[::1] prev_ = prev_arr
    for k in range(V - 1, 0, -1):
        size[parent[order[k]]] += size[order[k]]
    for v in range(V):
        last[v] = order[pos[v] + size[v] - 1]
    for k in range(V):
        next_[order[k]] = order[(k + 1) % V]
        prev_[order[k]] = order[k - 1] if k > 0 else order[V - 1]

    pi_arr = np.zeros(V, dtype=np.float64)
    cdef double[::1] pi = pi_arr
    cdef long a_, p_
    for k in range(1, V):
        v = order[k]
        a_ = edge[v]
        p_ = parent[v]
        if m + a_ % n == v:
            pi[v] = pi[p_] - cost[a_]
        else:
            pi[v] = pi[p_] + cost[a_]

    # --- pivot work arrays ----------------------------------------------
    wn_arr = np.empty(V + 2, dtype=np.int64)
    we_arr = np.empty(V + 2, dtype=np.int64)
    anc_arr = np.empty(V + 1, dtype=np.int64)
    cdef long[::1] Wn = wn_arr
    cdef long[::1] We = we_arr
    cdef long[::1] anc = anc_arr

    cdef long block = <long>ceil(sqrt(<double>E))
    cdef long n_blocks = (E + block - 1) // block
    cdef long scan_start = 0

    cdef long pivots = 0
    cdef long bland = 0
    cdef long ea, q_, s_, t_, j_arc, cyc_len, idx, lo, hi, blocks_done
    cdef long best_k, sp, sq, apex, w2, pos_e, pos_j
    cdef long size_t_, prev_t, last_t, next_last_t
    cdef long size_p, last_p, prev_q, last_q, next_last_q, anc_len, q2
    cdef long size_q
    cdef double best, cred, delta, best_res, r_, d_
    cdef long l_

    while True:
        if pivots >= max_pivots:
            raise PivotLimitError(f"pivot limit {max_pivots} exceeded")
        if bland == 0 and pivots >= bland_after:
            bland = 1

        # --- entering arc ------------------------------------------------
        ea = -1
        if bland == 1:
            for idx in range(E):
                cred = (cost[idx] - pi[idx // n]) + pi[m + idx % n]
                if cred < -tol_enter:
                    ea = idx
                    break
        else:
            blocks_done = 0
            while blocks_done < n_blocks:
                hi = scan_start + block
                best = INFINITY
                best_k = -1
                if hi <= E:
                    for idx in range(scan_start, hi):
                        cred = (cost[idx] - pi[idx // n]) + pi[m + idx % n]
                        if cred < best:
                            best = cred
                            best_k = idx
                else:
                    for idx in range(scan_start, E):
                        cred = (cost[idx] - pi[idx // n]) + pi[m + idx % n]
                        if cred < best:
                            best = cred
                            best_k = idx
                    for idx in range(0, hi - E):
                        cred = (cost[idx] - pi[idx // n]) + pi[m + idx % n]
                        if cred < best:
                            best = cred
                            best_k = idx
                    hi -= E
                scan_start = hi
                if best < -tol_enter:
                    ea = best_k
                    break
                blocks_done += 1
        if ea < 0:
            break

        p_ = ea // n
        q_ = m + ea % n

        # --- cycle through the entering arc (apex via subtree sizes) -----
        u = p_
        w2 = q_
        sp = size[u]
        sq = size[w2]
        while True:
            while sp < sq:
                u = parent[u]
                sp = size[u]
            while sp > sq:
                w2 = parent[w2]
                sq = size[w2]
            if sp == sq:
                if u != w2:
                    u = parent[u]
                    sp = size[u]
                    w2 = parent[w2]
                    sq = size[w2]
                else:
                    break
        apex = u

        # walk p -> apex, reversed into Wn/We, then entering arc, then q -> apex
        cyc_len = 0
        v = p_
        while v != apex:
            Wn[cyc_len] = v
            We[cyc_len] = edge[v]
            cyc_len += 1
            v = parent[v]
        Wn[cyc_len] = apex
        # reverse first cyc_len+1 nodes and cyc_len edges
        for k in range((cyc_len + 1) // 2):
            u = Wn[k]
            Wn[k] = Wn[cyc_len - k]
            Wn[cyc_len - k] = u
        for k in range(cyc_len // 2):
            u = We[k]
            We[k] = We[cyc_len - 1 - k]
            We[cyc_len - 1 - k] = u
        We[cyc_len] = ea
        cyc_len += 1
        v = q_
        while v != apex:
            Wn[cyc_len] = v
            We[cyc_len] = edge[v]
            cyc_len += 1
            v = parent[v]

        # --- leaving arc: min residual, ties to lowest arc id ------------
        best_res = INFINITY
        j_arc = -1
        s_ = -1
        for k in range(cyc_len):
            if We[k] // n == Wn[k]:
                continue
            r_ = x[We[k]]
            if r_ < best_res or (r_ == best_res and We[k] < j_arc):
                best_res = r_
                j_arc = We[k]
                s_ = Wn[k]
        if j_arc // n == s_:
            t_ = m + j_arc % n
        else:
            t_ = j_arc // n

        # --- augment ------------------------------------------------------
        delta = x[j_arc]
        if delta != 0.0:
            for k in range(cyc_len):
                if We[k] // n == Wn[k]:
                    x[We[k]] += delta
                else:
                    x[We[k]] -= delta
        pivots += 1

        if ea != j_arc:
            if parent[t_] != s_:
                u = s_
                s_ = t_
                t_ = u
            pos_e = -1
            pos_j = -1
            for k in range(cyc_len):
                if We[k] == ea:
                    pos_e = k
                if We[k] == j_arc:
                    pos_j = k
            if pos_e > pos_j:
                u = p_
                p_ = q_
                q_ = u

            # remove_edge(s_, t_)
            size_t_ = size[t_]
            prev_t = prev_[t_]
            last_t = last[t_]
            next_last_t = next_[last_t]
            parent[t_] = -1
            edge[t_] = -1
            next_[prev_t] = next_last_t
            prev_[next_last_t] = prev_t
            next_[last_t] = t_
            prev_[t_] = last_t
            u = s_
            while u != -1:
                size[u] -= size_t_
                if last[u] == last_t:
                    last[u] = prev_t
                u = parent[u]

            # make_root(q_) inside the detached subtree
            anc_len = 0
            u = q_
            while u != -1:
                anc[anc_len] = u
                anc_len += 1
                u = parent[u]
            for k in range(anc_len // 2):
                u = anc[k]
                anc[k] = anc[anc_len - 1 - k]
                anc[anc_len - 1 - k] = u
            for k in range(anc_len - 1):
                u = anc[k]
                q2 = anc[k + 1]
                size_p = size[u]
                last_p = last[u]
                prev_q = prev_[q2]
                last_q = last[q2]
                next_last_q = next_[last_q]
                parent[u] = q2
                parent[q2] = -1
                edge[u] = edge[q2]
                edge[q2] = -1
                size[u] = size_p - size[q2]
                size[q2] = size_p
                next_[prev_q] = next_last_q
                prev_[next_last_q] = prev_q
                next_[last_q] = q2
                prev_[q2] = last_q
                if last_p == last_q:
                    last[u] = prev_q
                    last_p = prev_q
                prev_[u] = last_q
                next_[last_q] = u
                next_[last_p] = q2
                prev_[q2] = last_p
                last[q2] = last_p

            # add_edge(ea, p_, q_)
            last_p = last[p_]
            next_last_t = next_[last_p]
            size_q = size[q_]
            last_q = last[q_]
            parent[q_] = p_
            edge[q_] = ea
            next_[last_p] = q_
            prev_[q_] = last_p
            prev_[next_last_t] = last_q
            next_[last_q] = next_last_t
            u = p_
            while u != -1:
                size[u] += size_q
                if last[u] == last_p:
                    last[u] = last_q
                u = parent[u]

            # update potentials over the reattached subtree
            if q_ == m + ea % n:
                d_ = pi[p_] - cost[ea] - pi[q_]
            else:
                d_ = pi[p_] + cost[ea] - pi[q_]
            v = q_
            l_ = last[q_]
            pi[v] += d_
            while v != l_:
                v = next_[v]
                pi[v] += d_

    # --- clean potentials and basis extraction ----------------------------
    pi_out_arr = np.zeros(V, dtype=np.float64)
    cdef double[::1] pi_out = pi_out_arr
    v = next_[0]
    while v != 0:
        a_ = edge[v]
        p_ = parent[v]
        if m + a_ % n == v:
            pi_out[v] = pi_out[p_] - cost[a_]
        else:
            pi_out[v] = pi_out[p_] + cost[a_]
        v = next_[v]

    out_arcs_arr = np.empty(V - 1, dtype=np.int64)
    out_flows_arr = np.empty(V - 1, dtype=np.float64)
    cdef long[::1] out_arcs = out_arcs_arr
    cdef double[::1] out_flows = out_flows_arr
    k = 0
    for v in range(1, V):
        out_arcs[k] = edge[v]
        out_flows[k] = x[edge[v]]
        k += 1
    return out_arcs_arr, out_flows_arr, pi_out_arr, pivots, bool(bland)
