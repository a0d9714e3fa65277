# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernel: twin of gdrp.solver._kernel.

Performs the same floating-point operations in the same order as the pure
fallback, so both engines return identical results.
"""

from libc.stdlib cimport free, malloc

import numpy as np
from time import monotonic

cdef double INF = float("inf")
cdef double FEAS_EPS = 1e-9
cdef long long TIME_CHECK_MASK = 0xFFF


def energy_cost_table(int n, double[::1] coef, double m0, double[::1] sub_mass,
                      const unsigned char[::1] feasible, double energy_cap):
    """Optimal tour energy per customer subset; inf where infeasible."""
    cdef long long size = 1LL << n
    cdef int stride = n + 1
    cdef object g_arr = np.full(size * n, np.inf)
    cdef object opt_arr = np.full(size, np.inf)
    cdef double[::1] g = g_arr
    cdef double[::1] opt = opt_arr
    cdef long long s, rest, base
    cdef int f, f2, row
    cdef double launch, best_s, tail, w, v
    opt[0] = 0.0
    for s in range(1, size):
        if not feasible[s]:
            continue
        launch = m0 + sub_mass[s]
        best_s = INF
        for f in range(n):
            if not (s >> f) & 1:
                continue
            rest = s & ~(1LL << f)
            if rest == 0:
                tail = coef[(f + 1) * stride] * m0
            else:
                w = m0 + sub_mass[rest]
                tail = INF
                row = (f + 1) * stride
                base = rest * n
                for f2 in range(n):
                    if (rest >> f2) & 1:
                        v = coef[row + f2 + 1] * w + g[base + f2]
                        if v < tail:
                            tail = v
            g[s * n + f] = tail
            v = coef[f + 1] * launch + tail
            if v < best_s:
                best_s = v
        if best_s <= energy_cap + FEAS_EPS:
            opt[s] = best_s
    return opt_arr


cdef class _BB:
    cdef int n, k_count, num_units, unopened
    cdef bint required, use_pruning, has_side, additive, aborted, have_best
    cdef double side_budget, best_value, sum_cost, sum_side, sum_marg, lb_open
    cdef double deadline
    cdef long long nodes
    cdef const int[::1] h, perm
    cdef const double[:, ::1] cost, side, marg_ck
    cdef const double[::1] marg_suffix, side_marg_suffix
    cdef long long* unit_mask
    cdef double* unit_cost
    cdef double* unit_side
    cdef int* opened
    cdef int* base
    cdef long long* best_masks
    # per-depth candidate buffers, row-major (depth, slot)
    cdef double* cb_bound
    cdef double* cb_dcost
    cdef double* cb_dside
    cdef double* cb_ncost
    cdef int* cb_u
    cdef int* cb_k
    cdef int* cb_opens

    def __cinit__(self, int n, const int[::1] h, const double[:, ::1] cost,
                  bint has_side, const double[:, ::1] side, double side_budget,
                  const double[::1] marg_suffix, const double[::1] side_marg_suffix,
                  bint additive, const double[:, ::1] marg_ck,
                  const int[::1] perm, bint required, bint use_pruning,
                  double time_limit_s, double seed_value,
                  const long long[::1] seed_masks):
        cdef int k, u, slots
        self.n = n
        self.h = h
        self.k_count = h.shape[0]
        self.num_units = 0
        for k in range(self.k_count):
            self.num_units += h[k]
        self.cost = cost
        self.has_side = has_side
        self.side = side
        self.side_budget = side_budget
        self.marg_suffix = marg_suffix
        self.side_marg_suffix = side_marg_suffix
        self.additive = additive
        self.marg_ck = marg_ck
        self.perm = perm
        self.required = required
        self.use_pruning = use_pruning
        self.deadline = monotonic() + time_limit_s
        self.nodes = 0
        self.aborted = False
        self.lb_open = INF
        self.sum_cost = 0.0
        self.sum_side = 0.0
        self.sum_marg = 0.0
        self.unopened = self.num_units

        self.unit_mask = <long long*>malloc(self.num_units * sizeof(long long))
        self.unit_cost = <double*>malloc(self.num_units * sizeof(double))
        self.unit_side = <double*>malloc(self.num_units * sizeof(double))
        self.best_masks = <long long*>malloc(self.num_units * sizeof(long long))
        self.opened = <int*>malloc(self.k_count * sizeof(int))
        self.base = <int*>malloc(self.k_count * sizeof(int))
        slots = (n if n > 0 else 1) * self.num_units
        self.cb_bound = <double*>malloc(slots * sizeof(double))
        self.cb_dcost = <double*>malloc(slots * sizeof(double))
        self.cb_dside = <double*>malloc(slots * sizeof(double))
        self.cb_ncost = <double*>malloc(slots * sizeof(double))
        self.cb_u = <int*>malloc(slots * sizeof(int))
        self.cb_k = <int*>malloc(slots * sizeof(int))
        self.cb_opens = <int*>malloc(slots * sizeof(int))

        for u in range(self.num_units):
            self.unit_mask[u] = 0
            self.unit_cost[u] = 0.0
            self.unit_side[u] = 0.0
            self.best_masks[u] = 0
        self.base[0] = 0
        for k in range(1, self.k_count):
            self.base[k] = self.base[k - 1] + h[k - 1]
        for k in range(self.k_count):
            self.opened[k] = 0

        self.best_value = seed_value
        self.have_best = seed_masks.shape[0] == self.num_units
        if self.have_best:
            for u in range(self.num_units):
                self.best_masks[u] = seed_masks[u]

    def __dealloc__(self):
        free(self.unit_mask); free(self.unit_cost); free(self.unit_side)
        free(self.best_masks); free(self.opened); free(self.base)
        free(self.cb_bound); free(self.cb_dcost); free(self.cb_dside)
        free(self.cb_ncost); free(self.cb_u); free(self.cb_k); free(self.cb_opens)

    cdef void descend(self, int depth):
        cdef int c, k, local, top, u, m, i, j, opens
        cdef long long bit, old_mask
        cdef double best_value, new_cost, nside, dside, dcost, bound
        cdef double old_cost, old_side
        cdef int off = depth * self.num_units
        cdef int count = 0
        cdef int remaining_after

        if depth == self.n:
            if self.sum_cost < self.best_value:
                self.best_value = self.sum_cost
                self.have_best = True
                for u in range(self.num_units):
                    self.best_masks[u] = self.unit_mask[u]
            return

        c = self.perm[depth]
        bit = 1LL << c
        best_value = self.best_value
        remaining_after = self.n - depth - 1

        for k in range(self.k_count):
            top = self.opened[k] + 1 if self.opened[k] < self.h[k] else self.opened[k]
            for local in range(top):
                u = self.base[k] + local
                old_mask = self.unit_mask[u]
                new_cost = self.cost[k, old_mask | bit]
                if new_cost == INF:
                    continue
                opens = 1 if old_mask == 0 else 0
                if self.required and remaining_after < self.unopened - opens:
                    continue
                dside = 0.0
                if self.has_side:
                    nside = self.side[k, old_mask | bit]
                    if nside == INF:
                        continue
                    dside = nside - self.unit_side[u]
                    if (self.sum_side + dside + self.side_marg_suffix[depth + 1]
                            > self.side_budget + FEAS_EPS):
                        continue
                dcost = new_cost - self.unit_cost[u]
                if self.additive:
                    bound = self.sum_marg + self.marg_ck[k, c] + self.marg_suffix[depth + 1]
                else:
                    bound = self.sum_cost + dcost + self.marg_suffix[depth + 1]
                if self.use_pruning and bound >= best_value:
                    continue
                self.cb_bound[off + count] = bound
                self.cb_u[off + count] = u
                self.cb_k[off + count] = k
                self.cb_dcost[off + count] = dcost
                self.cb_dside[off + count] = dside
                self.cb_ncost[off + count] = new_cost
                self.cb_opens[off + count] = opens
                count += 1

        # insertion sort by (bound, u); stable and tiny
        cdef double tb, td, tds, tnc
        cdef int tu, tk, to_
        for i in range(1, count):
            tb = self.cb_bound[off + i]; tu = self.cb_u[off + i]
            tk = self.cb_k[off + i]; td = self.cb_dcost[off + i]
            tds = self.cb_dside[off + i]; tnc = self.cb_ncost[off + i]
            to_ = self.cb_opens[off + i]
            j = i - 1
            while j >= 0 and (self.cb_bound[off + j] > tb or
                              (self.cb_bound[off + j] == tb and self.cb_u[off + j] > tu)):
                self.cb_bound[off + j + 1] = self.cb_bound[off + j]
                self.cb_u[off + j + 1] = self.cb_u[off + j]
                self.cb_k[off + j + 1] = self.cb_k[off + j]
                self.cb_dcost[off + j + 1] = self.cb_dcost[off + j]
                self.cb_dside[off + j + 1] = self.cb_dside[off + j]
                self.cb_ncost[off + j + 1] = self.cb_ncost[off + j]
                self.cb_opens[off + j + 1] = self.cb_opens[off + j]
                j -= 1
            self.cb_bound[off + j + 1] = tb; self.cb_u[off + j + 1] = tu
            self.cb_k[off + j + 1] = tk; self.cb_dcost[off + j + 1] = td
            self.cb_dside[off + j + 1] = tds; self.cb_ncost[off + j + 1] = tnc
            self.cb_opens[off + j + 1] = to_

        for i in range(count):
            if self.aborted:
                for j in range(i, count):
                    if self.cb_bound[off + j] < self.lb_open:
                        self.lb_open = self.cb_bound[off + j]
                return
            bound = self.cb_bound[off + i]
            if self.use_pruning and bound >= self.best_value:
                continue
            u = self.cb_u[off + i]; k = self.cb_k[off + i]
            dcost = self.cb_dcost[off + i]; dside = self.cb_dside[off + i]
            new_cost = self.cb_ncost[off + i]; opens = self.cb_opens[off + i]
            self.nodes += 1
            if (self.nodes & TIME_CHECK_MASK) == 0 and monotonic() > self.deadline:
                self.aborted = True
                if bound < self.lb_open:
                    self.lb_open = bound
                for j in range(i + 1, count):
                    if self.cb_bound[off + j] < self.lb_open:
                        self.lb_open = self.cb_bound[off + j]
                return
            old_cost = self.unit_cost[u]
            old_side = self.unit_side[u]
            self.unit_mask[u] |= bit
            self.unit_cost[u] = new_cost
            self.sum_cost += dcost
            if self.has_side:
                self.unit_side[u] += dside
                self.sum_side += dside
            if self.additive:
                self.sum_marg += self.marg_ck[k, c]
            if opens:
                self.opened[k] += 1
                self.unopened -= 1
            self.descend(depth + 1)
            if opens:
                self.opened[k] -= 1
                self.unopened += 1
            if self.additive:
                self.sum_marg -= self.marg_ck[k, c]
            if self.has_side:
                self.sum_side -= dside
                self.unit_side[u] = old_side
            self.sum_cost -= dcost
            self.unit_cost[u] = old_cost
            self.unit_mask[u] &= ~bit


def run_bb(int n, const int[::1] h, const double[:, ::1] cost,
           bint has_side, const double[:, ::1] side, double side_budget,
           const double[::1] marg_suffix, const double[::1] side_marg_suffix,
           bint additive, const double[:, ::1] marg_ck,
           const int[::1] perm, bint required, bint use_pruning,
           double time_limit_s, double seed_value,
           const long long[::1] seed_masks):
    """Depth-first branch and bound; mirrors gdrp.solver._kernel.run_bb."""
    bb = _BB(n, h, cost, has_side, side, side_budget, marg_suffix,
             side_marg_suffix, additive, marg_ck, perm, required, use_pruning,
             time_limit_s, seed_value, seed_masks)
    bb.descend(0)
    proven = not bb.aborted
    lb = bb.best_value if proven else min(bb.best_value, bb.lb_open)
    masks = None
    if bb.have_best:
        masks = [bb.best_masks[u] for u in range(bb.num_units)]
    return bb.best_value, masks, bb.nodes, proven, lb
