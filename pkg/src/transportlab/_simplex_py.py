"""Pure-Python network simplex kernel for dense transportation problems.

This is the fallback twin of the compiled kernel in ``_simplex_core``; both
implement the same algorithm with the same pivot rules and produce bitwise
identical results.

Problem: min sum c_ij x_ij subject to row sums = supply, column sums =
demand, x >= 0, with supply and demand balanced.  Nodes 0..m-1 are sources,
m..m+n-1 are sinks; arc a = i*n + j runs from source i to sink j and is
uncapacitated.

Algorithm notes:

* The initial basis is the northwest-corner staircase, a spanning tree of
  the m+n nodes; no artificial arcs or big-M costs are ever introduced, so
  node potentials stay on the scale of the real costs.
* The spanning tree is maintained with the classic parent/thread/size
  arrays; the thread is the preorder of the tree and is kept circular.
* Entering arcs come from a cyclic block search (Dantzig within a block of
  size ~sqrt(#arcs)); the leaving arc is the minimum-residual counter arc
  on the pivot cycle with ties broken by lowest arc index (Bland).  If the
  pivot count ever exceeds ``bland_after`` the entering rule also switches
  to lowest-index (full Bland), which guarantees termination on degenerate
  instances.
* Node potentials are recomputed from the final tree before returning, so
  the reported duals carry no drift from incremental updates.
"""

from __future__ import annotations

import math

import numpy as np


class PivotLimitError(RuntimeError):
    pass


def solve_dense(supply, demand, cost, tol_enter, bland_after, max_pivots):
    """Solve the dense transportation problem.

    Returns (basis_arcs, basis_flows, potentials, pivots, bland_used):
    ``basis_arcs``/``basis_flows`` describe the m+n-1 spanning-tree arcs,
    ``potentials`` has one entry per node with reduced costs
    c[a] - pi[src] + pi[dst] >= -tol_enter at optimality.
    """
    supply = np.ascontiguousarray(supply, dtype=float)
    demand = np.ascontiguousarray(demand, dtype=float)
    cost = np.ascontiguousarray(cost, dtype=float)
    m, n = supply.size, demand.size
    V = m + n
    E = m * n

    # --- northwest-corner initial basis --------------------------------
    x = np.zeros(E)
    basis_arcs = np.empty(V - 1, dtype=np.int64)
    a_rem = supply.copy()
    b_rem = demand.copy()
    i = j = 0
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
    adj_head = np.full(V, -1, dtype=np.int64)
    adj_next = np.empty(2 * (V - 1), dtype=np.int64)
    adj_node = np.empty(2 * (V - 1), dtype=np.int64)
    adj_arc = np.empty(2 * (V - 1), dtype=np.int64)
    for k in range(V - 1):
        arc = int(basis_arcs[k])
        u, w = arc // n, m + arc % n
        for slot, (p_, q_) in enumerate(((u, w), (w, u))):
            s = 2 * k + slot
            adj_node[s] = q_
            adj_arc[s] = arc
            adj_next[s] = adj_head[p_]
            adj_head[p_] = s

    parent = np.full(V, -1, dtype=np.int64)
    edge = np.full(V, -1, dtype=np.int64)
    order = np.empty(V, dtype=np.int64)
    pos = np.empty(V, dtype=np.int64)
    visited = np.zeros(V, dtype=bool)
    stack = [0]
    visited[0] = True
    cnt = 0
    while stack:
        v = stack.pop()
        order[cnt] = v
        pos[v] = cnt
        cnt += 1
        s = int(adj_head[v])
        while s != -1:
            w_ = int(adj_node[s])
            if not visited[w_]:
                visited[w_] = True
                parent[w_] = v
                edge[w_] = adj_arc[s]
                stack.append(w_)
            s = int(adj_next[s])

    size = np.ones(V, dtype=np.int64)
    for k in range(V - 1, 0, -1):
        size[parent[order[k]]] += size[order[k]]
    last = np.empty(V, dtype=np.int64)
    for v in range(V):
        last[v] = order[pos[v] + size[v] - 1]
    next_ = np.empty(V, dtype=np.int64)
    prev_ = np.empty(V, dtype=np.int64)
    for k in range(V):
        next_[order[k]] = order[(k + 1) % V]
        prev_[order[k]] = order[k - 1]

    pi = np.zeros(V)
    for k in range(1, V):
        v = int(order[k])
        a_ = int(edge[v])
        p_ = int(parent[v])
        if m + a_ % n == v:
            pi[v] = pi[p_] - cost[a_]
        else:
            pi[v] = pi[p_] + cost[a_]

    # --- pivot machinery -------------------------------------------------
    block = int(math.ceil(math.sqrt(E)))
    n_blocks = (E + block - 1) // block
    scan_start = 0

    def find_entering():
        nonlocal scan_start
        blocks_done = 0
        while blocks_done < n_blocks:
            hi = scan_start + block
            if hi <= E:
                idx = np.arange(scan_start, hi)
            else:
                idx = np.concatenate((np.arange(scan_start, E), np.arange(0, hi - E)))
                hi -= E
            scan_start = hi
            cred = (cost[idx] - pi[idx // n]) + pi[m + idx % n]
            k = int(np.argmin(cred))
            if cred[k] < -tol_enter:
                return int(idx[k])
            blocks_done += 1
        return -1

    def find_entering_bland():
        chunk = 8192
        lo = 0
        while lo < E:
            hi = min(lo + chunk, E)
            idx = np.arange(lo, hi)
            cred = (cost[idx] - pi[idx // n]) + pi[m + idx % n]
            hits = np.nonzero(cred < -tol_enter)[0]
            if hits.size:
                return int(idx[hits[0]])
            lo = hi
        return -1

    def find_apex(p_, q_):
        sp, sq = int(size[p_]), int(size[q_])
        while True:
            while sp < sq:
                p_ = int(parent[p_])
                sp = int(size[p_])
            while sp > sq:
                q_ = int(parent[q_])
                sq = int(size[q_])
            if sp == sq:
                if p_ != q_:
                    p_ = int(parent[p_])
                    sp = int(size[p_])
                    q_ = int(parent[q_])
                    sq = int(size[q_])
                else:
                    return p_

    def find_cycle(ea, p_, q_):
        w_ = find_apex(p_, q_)
        Wn, We = [], []
        v = p_
        while v != w_:
            Wn.append(v)
            We.append(int(edge[v]))
            v = int(parent[v])
        Wn.append(w_)
        Wn.reverse()
        We.reverse()
        We.append(ea)
        v = q_
        while v != w_:
            Wn.append(v)
            We.append(int(edge[v]))
            v = int(parent[v])
        return Wn, We

    def find_leaving(Wn, We):
        best_res = math.inf
        best_arc = -1
        best_node = -1
        for e_, v_ in zip(We, Wn):
            if e_ // n == v_:
                continue  # aligned with the cycle walk: residual infinite
            r_ = x[e_]
            if r_ < best_res or (r_ == best_res and e_ < best_arc):
                best_res = r_
                best_arc = e_
                best_node = v_
        t_ = m + best_arc % n if best_arc // n == best_node else best_arc // n
        return best_arc, best_node, t_

    def augment(Wn, We, delta):
        for e_, v_ in zip(We, Wn):
            if e_ // n == v_:
                x[e_] += delta
            else:
                x[e_] -= delta

    def remove_edge(s_, t_):
        size_t = int(size[t_])
        prev_t = int(prev_[t_])
        last_t = int(last[t_])
        next_last_t = int(next_[last_t])
        parent[t_] = -1
        edge[t_] = -1
        next_[prev_t] = next_last_t
        prev_[next_last_t] = prev_t
        next_[last_t] = t_
        prev_[t_] = last_t
        while s_ != -1:
            size[s_] -= size_t
            if last[s_] == last_t:
                last[s_] = prev_t
            s_ = int(parent[s_])

    def make_root(q_):
        ancestors = []
        v = q_
        while v != -1:
            ancestors.append(v)
            v = int(parent[v])
        ancestors.reverse()
        for p_, q2 in zip(ancestors, ancestors[1:]):
            size_p = int(size[p_])
            last_p = int(last[p_])
            prev_q = int(prev_[q2])
            last_q = int(last[q2])
            next_last_q = int(next_[last_q])
            parent[p_] = q2
            parent[q2] = -1
            edge[p_] = edge[q2]
            edge[q2] = -1
            size[p_] = size_p - size[q2]
            size[q2] = size_p
            next_[prev_q] = next_last_q
            prev_[next_last_q] = prev_q
            next_[last_q] = q2
            prev_[q2] = last_q
            if last_p == last_q:
                last[p_] = prev_q
                last_p = prev_q
            prev_[p_] = last_q
            next_[last_q] = p_
            next_[last_p] = q2
            prev_[q2] = last_p
            last[q2] = last_p

    def add_edge(ea, p_, q_):
        last_p = int(last[p_])
        next_last_p = int(next_[last_p])
        size_q = int(size[q_])
        last_q = int(last[q_])
        parent[q_] = p_
        edge[q_] = ea
        next_[last_p] = q_
        prev_[q_] = last_p
        prev_[next_last_p] = last_q
        next_[last_q] = next_last_p
        while p_ != -1:
            size[p_] += size_q
            if last[p_] == last_p:
                last[p_] = last_q
            p_ = int(parent[p_])

    def update_potentials(ea, p_, q_):
        if q_ == m + ea % n:
            d_ = pi[p_] - cost[ea] - pi[q_]
        else:
            d_ = pi[p_] + cost[ea] - pi[q_]
        v = q_
        l_ = int(last[q_])
        pi[v] += d_
        while v != l_:
            v = int(next_[v])
            pi[v] += d_

    # --- pivot loop -------------------------------------------------------
    pivots = 0
    bland = False
    while True:
        if pivots >= max_pivots:
            raise PivotLimitError(f"pivot limit {max_pivots} exceeded")
        if not bland and pivots >= bland_after:
            bland = True
        ea = find_entering_bland() if bland else find_entering()
        if ea < 0:
            break
        p_ = ea // n
        q_ = m + ea % n
        Wn, We = find_cycle(ea, p_, q_)
        j_, s_, t_ = find_leaving(Wn, We)
        delta = float(x[j_])
        if delta != 0.0:
            augment(Wn, We, delta)
        pivots += 1
        if ea != j_:
            if parent[t_] != s_:
                s_, t_ = t_, s_
            if We.index(ea) > We.index(j_):
                p_, q_ = q_, p_
            remove_edge(s_, t_)
            make_root(q_)
            add_edge(ea, p_, q_)
            update_potentials(ea, p_, q_)

    # --- clean potentials and basis extraction ----------------------------
    pi_out = np.zeros(V)
    v = int(next_[0])
    while v != 0:
        a_ = int(edge[v])
        p_ = int(parent[v])
        if m + a_ % n == v:
            pi_out[v] = pi_out[p_] - cost[a_]
        else:
            pi_out[v] = pi_out[p_] + cost[a_]
        v = int(next_[v])

    out_arcs = np.empty(V - 1, dtype=np.int64)
    out_flows = np.empty(V - 1)
    k = 0
    for v in range(V):
        if v == 0:
            continue
        a_ = int(edge[v])
        out_arcs[k] = a_
        out_flows[k] = x[a_]
        k += 1
    return out_arcs, out_flows, pi_out, pivots, bland
