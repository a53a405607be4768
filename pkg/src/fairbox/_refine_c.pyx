# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled refinement engine: the hot branch-and-bound loop (pop, bisect,
classify, box mass) in C.  Step-for-step transcription of _refine_py.PyRefiner;
keep the two in sync.

Boxes live as rows of 2-D arrays and every kernel is row-indexed and nogil,
so parallel mode releases the GIL once per worker span.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from libc.math cimport exp, fabs, floor

cdef double SLACK_REL = 2.0 ** -40
cdef double SLACK_ABS = 1e-300
cdef double SQRT1_2 = 0.7071067811865476
cdef double INV_SQRT_PI = 0.5641895835477563

cdef int EMPTY = 0
cdef int MIXED = 1
cdef int FULL = 2

cdef int REL_LE = 0
cdef int REL_LT = 1
cdef int REL_GE = 2
cdef int REL_GT = 3
cdef int REL_EQ = 4


cdef double _erfc(double x) nogil:
    """Cody-style rational approximation; mirrors fairbox.normal.erfc."""
    cdef double ax = fabs(x)
    cdef double z, xnum, xden, result, ysq, dl
    if ax <= 0.46875:
        z = ax * ax
        xnum = 1.85777706184603153e-1 * z
        xden = z
        xnum = (xnum + 3.16112374387056560e0) * z
        xden = (xden + 2.36012909523441209e1) * z
        xnum = (xnum + 1.13864154151050156e2) * z
        xden = (xden + 2.44024637934444173e2) * z
        xnum = (xnum + 3.77485237685302021e2) * z
        xden = (xden + 1.28261652607737228e3) * z
        return 1.0 - x * (xnum + 3.20937758913846947e3) / (xden + 2.84423683343917062e3)
    if ax <= 4.0:
        xnum = 2.15311535474403846e-8 * ax
        xden = ax
        xnum = (xnum + 5.64188496988670089e-1) * ax
        xden = (xden + 1.57449261107098347e1) * ax
        xnum = (xnum + 8.88314979438837594e0) * ax
        xden = (xden + 1.17693950891312499e2) * ax
        xnum = (xnum + 6.61191906371416295e1) * ax
        xden = (xden + 5.37181101862009858e2) * ax
        xnum = (xnum + 2.98635138197400131e2) * ax
        xden = (xden + 1.62138957456669019e3) * ax
        xnum = (xnum + 8.81952221241769090e2) * ax
        xden = (xden + 3.29079923573345963e3) * ax
        xnum = (xnum + 1.71204761263407058e3) * ax
        xden = (xden + 4.36261909014324716e3) * ax
        xnum = (xnum + 2.05107837782607147e3) * ax
        xden = (xden + 3.43936767414372164e3) * ax
        result = (xnum + 1.23033935479799725e3) / (xden + 1.23033935480374942e3)
    else:
        z = 1.0 / (ax * ax)
        xnum = 1.63153871373020978e-2 * z
        xden = z
        xnum = (xnum + 3.05326634961232344e-1) * z
        xden = (xden + 2.56852019228982242e0) * z
        xnum = (xnum + 3.60344899949804439e-1) * z
        xden = (xden + 1.87295284992346047e0) * z
        xnum = (xnum + 1.25781726111229246e-1) * z
        xden = (xden + 5.27905102951428412e-1) * z
        xnum = (xnum + 1.60837851487422766e-2) * z
        xden = (xden + 6.05183413124413191e-2) * z
        result = z * (xnum + 6.58749161529837803e-4) / (xden + 2.33520497626869185e-3)
        result = (INV_SQRT_PI - result) / ax
    ysq = floor(ax * 16.0) / 16.0
    dl = (ax - ysq) * (ax + ysq)
    if ysq * ysq + dl > 708.0:
        result = 0.0
    else:
        result = result * (exp(-ysq * ysq) * exp(-dl))
    if x < 0.0:
        result = 2.0 - result
    return result


cdef double _ncdf(double z) nogil:
    return 0.5 * _erfc(-z * SQRT1_2)


def _ncdf_debug(double z):
    """Parity hook for tests: the compiled twin of normal.gaussian_cdf."""
    return _ncdf(z)


cdef class CRefiner:
    name = "compiled"

    cdef public object problem
    cdef int n, n_comp
    cdef bint collect_boxes, record_trace
    cdef public double lower, mixed, tail, stuck
    # reported bounds, clamped monotone against ulp wobble in the ledgers
    cdef public double rep_lower, rep_upper
    cdef public long splits_used
    cdef long _seq

    # measure
    cdef double[::1] mu, inv_sigma, weights

    # region atoms, flattened across components
    cdef double[:, ::1] atom_coef
    cdef double[::1] atom_const
    cdef int[::1] atom_rel
    cdef long[::1] disj_off   # [n_disj + 1] atom row ranges
    cdef long[::1] comp_off   # [n_comp + 1] disjunct ranges

    # box pool + freelist (boxes are rows)
    cdef double[:, ::1] pool_lo, pool_hi
    cdef long[::1] free_stack
    cdef long free_top, pool_cap

    # binary max-heap over (mass desc, seq asc)
    cdef double[::1] h_mass
    cdef long[::1] h_seq, h_slot
    cdef int[::1] h_comp
    cdef long h_size, h_cap

    # scratch rows for one serial split: 0/1 = children lo, hi in s_lo/s_hi
    cdef double[:, ::1] s_lo, s_hi

    cdef public list full_boxes, empty_boxes, trace_lower, trace_upper

    def __init__(self, problem):
        self.problem = problem
        self.n = len(problem.dims)
        self.n_comp = len(problem.weights)
        self.collect_boxes = problem.collect_boxes
        self.record_trace = problem.record_trace
        self.mu = np.asarray(problem.mu, dtype=np.float64)
        self.inv_sigma = 1.0 / np.asarray(problem.sigma, dtype=np.float64)
        self.weights = np.asarray(problem.weights, dtype=np.float64)

        coef_rows = []
        consts = []
        rels = []
        disj_off = [0]
        comp_off = [0]
        for comp in problem.regions:
            for conj in comp:
                for coeffs, const, rel in conj:
                    coef_rows.append(coeffs)
                    consts.append(const)
                    rels.append(rel)
                disj_off.append(len(consts))
            comp_off.append(len(disj_off) - 1)
        if coef_rows:
            self.atom_coef = np.asarray(coef_rows, dtype=np.float64).reshape(
                len(coef_rows), self.n)
        else:
            self.atom_coef = np.zeros((0, self.n), dtype=np.float64)
        self.atom_const = np.asarray(consts, dtype=np.float64)
        self.atom_rel = np.asarray(rels, dtype=np.int32)
        self.disj_off = np.asarray(disj_off, dtype=np.int64)
        self.comp_off = np.asarray(comp_off, dtype=np.int64)

        self.pool_cap = 256
        self.pool_lo = np.empty((self.pool_cap, self.n), dtype=np.float64)
        self.pool_hi = np.empty((self.pool_cap, self.n), dtype=np.float64)
        self.free_stack = np.arange(self.pool_cap - 1, -1, -1, dtype=np.int64)
        self.free_top = self.pool_cap

        self.h_cap = 256
        self.h_mass = np.empty(self.h_cap, dtype=np.float64)
        self.h_seq = np.empty(self.h_cap, dtype=np.int64)
        self.h_slot = np.empty(self.h_cap, dtype=np.int64)
        self.h_comp = np.empty(self.h_cap, dtype=np.int32)
        self.h_size = 0

        self.s_lo = np.empty((2, self.n), dtype=np.float64)
        self.s_hi = np.empty((2, self.n), dtype=np.float64)

        self.lower = 0.0
        self.mixed = 0.0
        self.tail = 0.0
        self.stuck = 0.0
        self.rep_lower = 0.0
        self.rep_upper = 1.0
        self.splits_used = 0
        self._seq = 0
        self.full_boxes = [[] for _ in range(self.n_comp)]
        self.empty_boxes = [[] for _ in range(self.n_comp)]
        self.trace_lower = []
        self.trace_upper = []
        self._init_roots()

    # ------------------------------------------------------------------
    # pool / heap plumbing

    cdef long _pool_alloc(self):
        cdef long old_cap, i
        if self.free_top == 0:
            old_cap = self.pool_cap
            self.pool_cap = old_cap * 2
            new_lo = np.empty((self.pool_cap, self.n), dtype=np.float64)
            new_hi = np.empty((self.pool_cap, self.n), dtype=np.float64)
            new_lo[:old_cap] = np.asarray(self.pool_lo)
            new_hi[:old_cap] = np.asarray(self.pool_hi)
            self.pool_lo = new_lo
            self.pool_hi = new_hi
            new_free = np.empty(self.pool_cap, dtype=np.int64)
            for i in range(old_cap):
                new_free[i] = self.pool_cap - 1 - i
            self.free_stack = new_free
            self.free_top = old_cap
        self.free_top -= 1
        return self.free_stack[self.free_top]

    cdef void _pool_free(self, long slot):
        self.free_stack[self.free_top] = slot
        self.free_top += 1

    cdef bint _before(self, long i, long j):
        if self.h_mass[i] != self.h_mass[j]:
            return self.h_mass[i] > self.h_mass[j]
        return self.h_seq[i] < self.h_seq[j]

    cdef void _swap(self, long i, long j):
        cdef double tm = self.h_mass[i]
        cdef long ts = self.h_seq[i]
        cdef long tb = self.h_slot[i]
        cdef int tc = self.h_comp[i]
        self.h_mass[i] = self.h_mass[j]
        self.h_seq[i] = self.h_seq[j]
        self.h_slot[i] = self.h_slot[j]
        self.h_comp[i] = self.h_comp[j]
        self.h_mass[j] = tm
        self.h_seq[j] = ts
        self.h_slot[j] = tb
        self.h_comp[j] = tc

    cdef void _heap_push(self, double mass, int comp, long slot):
        cdef long i, parent
        if self.h_size == self.h_cap:
            old = self.h_cap
            self.h_cap = old * 2
            nm = np.empty(self.h_cap, dtype=np.float64)
            ns = np.empty(self.h_cap, dtype=np.int64)
            nb = np.empty(self.h_cap, dtype=np.int64)
            nc = np.empty(self.h_cap, dtype=np.int32)
            nm[:old] = np.asarray(self.h_mass)
            ns[:old] = np.asarray(self.h_seq)
            nb[:old] = np.asarray(self.h_slot)
            nc[:old] = np.asarray(self.h_comp)
            self.h_mass = nm
            self.h_seq = ns
            self.h_slot = nb
            self.h_comp = nc
        i = self.h_size
        self.h_mass[i] = mass
        self.h_seq[i] = self._seq
        self._seq += 1
        self.h_slot[i] = slot
        self.h_comp[i] = comp
        self.h_size += 1
        while i > 0:
            parent = (i - 1) >> 1
            if self._before(i, parent):
                self._swap(i, parent)
                i = parent
            else:
                break

    cdef void _heap_pop_root(self):
        cdef long i = 0, left, right, best
        self.h_size -= 1
        if self.h_size == 0:
            return
        self._swap(0, self.h_size)
        while True:
            left = 2 * i + 1
            right = left + 1
            best = i
            if left < self.h_size and self._before(left, best):
                best = left
            if right < self.h_size and self._before(right, best):
                best = right
            if best == i:
                return
            self._swap(i, best)
            i = best

    # ------------------------------------------------------------------
    # row-indexed kernels

    cdef double _box_mass(self, double[:, ::1] lo, long rl,
                          double[:, ::1] hi, long rh) nogil:
        cdef double mass = 1.0, f
        cdef int j
        for j in range(self.n):
            f = _ncdf((hi[rh, j] - self.mu[j]) * self.inv_sigma[j]) - \
                _ncdf((lo[rl, j] - self.mu[j]) * self.inv_sigma[j])
            if f <= 0.0:
                return 0.0
            mass *= f
        return mass

    cdef int _classify(self, int comp, double[:, ::1] lo, long rl,
                       double[:, ::1] hi, long rh) nogil:
        cdef bint all_empty = True
        cdef bint conj_full, conj_empty
        cdef long d, a
        cdef int j, rel
        cdef double mn, mx, acc_mn, acc_mx, c, p, q, s
        for d in range(self.comp_off[comp], self.comp_off[comp + 1]):
            conj_full = True
            conj_empty = False
            for a in range(self.disj_off[d], self.disj_off[d + 1]):
                mn = self.atom_const[a]
                mx = mn
                acc_mn = fabs(mn)
                acc_mx = acc_mn
                for j in range(self.n):
                    c = self.atom_coef[a, j]
                    if c > 0.0:
                        p = c * lo[rl, j]
                        q = c * hi[rh, j]
                    elif c < 0.0:
                        p = c * hi[rh, j]
                        q = c * lo[rl, j]
                    else:
                        continue
                    mn += p
                    acc_mn += fabs(p)
                    mx += q
                    acc_mx += fabs(q)
                if acc_mn != 0.0:
                    s = acc_mn * SLACK_REL
                    mn -= s if s > SLACK_ABS else SLACK_ABS
                if acc_mx != 0.0:
                    s = acc_mx * SLACK_REL
                    mx += s if s > SLACK_ABS else SLACK_ABS
                rel = self.atom_rel[a]
                if rel == REL_LE or rel == REL_LT:
                    if not mx <= 0.0:
                        if mn >= 0.0:
                            conj_empty = True
                            break
                        conj_full = False
                elif rel == REL_GE or rel == REL_GT:
                    if not mn >= 0.0:
                        if mx <= 0.0:
                            conj_empty = True
                            break
                        conj_full = False
                else:
                    if not (mn == 0.0 and mx == 0.0):
                        conj_empty = True
                        break
            if conj_empty:
                continue
            all_empty = False
            if conj_full:
                return FULL
        return EMPTY if all_empty else MIXED

    cdef int _split_dim(self, double[:, ::1] lo, long rl,
                        double[:, ::1] hi, long rh) nogil:
        cdef int best = 0, j
        cdef double best_w = -1.0, w
        for j in range(self.n):
            w = (hi[rh, j] - lo[rl, j]) * self.inv_sigma[j]
            if w > best_w:
                best = j
                best_w = w
        return best

    # ------------------------------------------------------------------
    # setup and bookkeeping

    def _init_roots(self):
        cdef int comp, cls
        cdef long slot
        cdef double root_mass, t, m, w
        root_lo = np.asarray(self.problem.root_lo, dtype=np.float64).reshape(1, self.n)
        root_hi = np.asarray(self.problem.root_hi, dtype=np.float64).reshape(1, self.n)
        cdef double[:, ::1] lo_v = root_lo, hi_v = root_hi
        for comp in range(self.n_comp):
            if self.comp_off[comp] == self.comp_off[comp + 1]:
                # empty disjunction: no mass anywhere, no tail; the root box
                # still certifies the component's mass as outside the event
                self._record(self.empty_boxes, comp, lo_v, 0, hi_v, 0)
                continue
            w = self.weights[comp]
            root_mass = self._box_mass(lo_v, 0, hi_v, 0)
            t = w * (1.0 - root_mass)
            if t > 0.0:
                self.tail += t
            cls = self._classify(comp, lo_v, 0, hi_v, 0)
            if cls == FULL:
                self.lower += w * root_mass
                self._record(self.full_boxes, comp, lo_v, 0, hi_v, 0)
            elif cls == EMPTY:
                self._record(self.empty_boxes, comp, lo_v, 0, hi_v, 0)
            else:
                m = w * root_mass
                self.mixed += m
                slot = self._pool_alloc()
                self.pool_lo[slot, :] = lo_v[0, :]
                self.pool_hi[slot, :] = hi_v[0, :]
                self._heap_push(m, comp, slot)
        self.rep_lower = self.lower
        self.rep_upper = self.lower + self.mixed + self.tail
        if self.record_trace:
            self.trace_lower.append(self.rep_lower)
            self.trace_upper.append(self.rep_upper)

    cdef void _record(self, list store, int comp, double[:, ::1] lo, long rl,
                      double[:, ::1] hi, long rh):
        cdef int j
        if self.collect_boxes:
            store[comp].append((
                tuple(lo[rl, j] for j in range(self.n)),
                tuple(hi[rh, j] for j in range(self.n)),
            ))

    @property
    def upper(self):
        return self.rep_upper

    @property
    def gap(self):
        return self.rep_upper - self.rep_lower

    @property
    def exhausted(self):
        return self.h_size == 0

    # ------------------------------------------------------------------
    # refinement

    def refine(self, long max_splits, double gap_target=0.0, int workers=1):
        """Transcription of PyRefiner.refine; children never outweigh their
        popped parent, keeping the reported upper bound nonincreasing."""
        if workers <= 1:
            return self._refine_serial(max_splits, gap_target)
        return self._refine_parallel(max_splits, gap_target, workers)

    cdef long _refine_serial(self, long max_splits, double gap_target):
        cdef long done = 0
        cdef double parent_mass, mid, a, b
        cdef double mass0, mass1
        cdef int comp, cls0, cls1, d, j
        cdef long slot
        while done < max_splits and self.h_size > 0 and \
                self.rep_upper - self.rep_lower > gap_target:
            parent_mass = self.h_mass[0]
            comp = self.h_comp[0]
            slot = self.h_slot[0]
            self._heap_pop_root()
            d = self._split_dim(self.pool_lo, slot, self.pool_hi, slot)
            a = self.pool_lo[slot, d]
            b = self.pool_hi[slot, d]
            mid = 0.5 * (a + b)
            if not (a < mid < b):
                self.stuck += parent_mass
                self._pool_free(slot)
                done += 1
                continue
            for j in range(self.n):
                self.s_lo[0, j] = self.pool_lo[slot, j]
                self.s_hi[0, j] = self.pool_hi[slot, j]
                self.s_lo[1, j] = self.pool_lo[slot, j]
                self.s_hi[1, j] = self.pool_hi[slot, j]
            self.s_hi[0, d] = mid
            self.s_lo[1, d] = mid
            self._pool_free(slot)
            cls0 = self._classify(comp, self.s_lo, 0, self.s_hi, 0)
            cls1 = self._classify(comp, self.s_lo, 1, self.s_hi, 1)
            mass0 = 0.0
            mass1 = 0.0
            if cls0 != EMPTY:
                mass0 = self.weights[comp] * \
                    self._box_mass(self.s_lo, 0, self.s_hi, 0)
            if cls1 != EMPTY:
                mass1 = self.weights[comp] * \
                    self._box_mass(self.s_lo, 1, self.s_hi, 1)
            self._settle(comp, parent_mass, cls0, mass0, cls1, mass1,
                         self.s_lo, self.s_hi, 0)
            done += 1
        return done

    cdef void _settle(self, int comp, double parent_mass,
                      int cls0, double mass0, int cls1, double mass1,
                      double[:, ::1] lo2, double[:, ::1] hi2, long base):
        """Serial aggregation: mixed children keep their computed mass first,
        full children absorb what remains (trimming the lower bound is always
        sound); the two children never outweigh the popped parent."""
        cdef double budget, m, u
        self.mixed -= parent_mass
        budget = parent_mass
        if cls0 == MIXED:
            m = mass0 if mass0 < budget else budget
            budget -= m
            mass0 = m
        if cls1 == MIXED:
            m = mass1 if mass1 < budget else budget
            budget -= m
            mass1 = m
        if cls0 == FULL:
            m = mass0 if mass0 < budget else budget
            budget -= m
            mass0 = m
        if cls1 == FULL:
            m = mass1 if mass1 < budget else budget
            budget -= m
            mass1 = m
        self._apply_child(comp, cls0, mass0, lo2, hi2, base)
        self._apply_child(comp, cls1, mass1, lo2, hi2, base + 1)
        if self.lower > self.rep_lower:
            self.rep_lower = self.lower
        u = self.lower + self.mixed + self.tail
        if u < self.rep_upper:
            self.rep_upper = u
        self.splits_used += 1
        if self.record_trace:
            self.trace_lower.append(self.rep_lower)
            self.trace_upper.append(self.rep_upper)

    cdef void _apply_child(self, int comp, int cls, double mass,
                           double[:, ::1] lo2, double[:, ::1] hi2, long row):
        cdef long child
        cdef int j
        if cls == EMPTY:
            self._record(self.empty_boxes, comp, lo2, row, hi2, row)
        elif cls == FULL:
            self.lower += mass
            self._record(self.full_boxes, comp, lo2, row, hi2, row)
        else:
            if mass > 0.0:
                self.mixed += mass
                child = self._pool_alloc()
                for j in range(self.n):
                    self.pool_lo[child, j] = lo2[row, j]
                    self.pool_hi[child, j] = hi2[row, j]
                self._heap_push(mass, comp, child)

    # parallel mode: workers classify/bisect disjoint spans of the popped
    # batch concurrently (GIL released per span); the ledger update stays on
    # the calling thread in pop order

    cdef void _process_span(self, int start, int stop,
                            double[:, ::1] blo, double[:, ::1] bhi,
                            double[:, ::1] olo, double[:, ::1] ohi,
                            int[::1] ocls, double[::1] omass,
                            int[::1] pcomp, int[::1] ok) nogil:
        cdef int i, d, j, comp
        cdef double a, b, mid
        for i in range(start, stop):
            comp = pcomp[i]
            d = self._split_dim(blo, i, bhi, i)
            a = blo[i, d]
            b = bhi[i, d]
            mid = 0.5 * (a + b)
            if not (a < mid < b):
                ok[i] = 0
                continue
            ok[i] = 1
            for j in range(self.n):
                olo[2 * i, j] = blo[i, j]
                ohi[2 * i, j] = bhi[i, j]
                olo[2 * i + 1, j] = blo[i, j]
                ohi[2 * i + 1, j] = bhi[i, j]
            ohi[2 * i, d] = mid
            olo[2 * i + 1, d] = mid
            ocls[2 * i] = self._classify(comp, olo, 2 * i, ohi, 2 * i)
            ocls[2 * i + 1] = self._classify(comp, olo, 2 * i + 1, ohi, 2 * i + 1)
            omass[2 * i] = 0.0
            omass[2 * i + 1] = 0.0
            if ocls[2 * i] != EMPTY:
                omass[2 * i] = self.weights[comp] * \
                    self._box_mass(olo, 2 * i, ohi, 2 * i)
            if ocls[2 * i + 1] != EMPTY:
                omass[2 * i + 1] = self.weights[comp] * \
                    self._box_mass(olo, 2 * i + 1, ohi, 2 * i + 1)

    def _run_span(self, int start, int stop,
                  double[:, ::1] blo, double[:, ::1] bhi,
                  double[:, ::1] olo, double[:, ::1] ohi,
                  int[::1] ocls, double[::1] omass,
                  int[::1] pcomp, int[::1] ok):
        with nogil:
            self._process_span(start, stop, blo, bhi, olo, ohi,
                               ocls, omass, pcomp, ok)

    def _refine_parallel(self, long max_splits, double gap_target, int workers):
        cdef long done = 0
        cdef long slot
        cdef int count, i, batch = workers * 32
        batch_lo = np.empty((batch, self.n), dtype=np.float64)
        batch_hi = np.empty((batch, self.n), dtype=np.float64)
        out_lo = np.empty((2 * batch, self.n), dtype=np.float64)
        out_hi = np.empty((2 * batch, self.n), dtype=np.float64)
        out_cls = np.empty(2 * batch, dtype=np.int32)
        out_mass = np.empty(2 * batch, dtype=np.float64)
        parents = np.empty(batch, dtype=np.float64)
        comps = np.empty(batch, dtype=np.int32)
        ok = np.empty(batch, dtype=np.int32)
        cdef double[:, ::1] blo = batch_lo, bhi = batch_hi
        cdef double[:, ::1] olo = out_lo, ohi = out_hi
        cdef int[::1] ocls = out_cls
        cdef double[::1] omass = out_mass
        cdef double[::1] pmass = parents
        cdef int[::1] pcomp = comps
        cdef int[::1] okv = ok

        def task(bounds):
            self._run_span(bounds[0], bounds[1], blo, bhi, olo, ohi,
                           ocls, omass, pcomp, okv)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            while done < max_splits and self.h_size > 0 and \
                    self.rep_upper - self.rep_lower > gap_target:
                count = 0
                while (self.h_size > 0 and count < batch
                       and done + count < max_splits):
                    pmass[count] = self.h_mass[0]
                    pcomp[count] = self.h_comp[0]
                    slot = self.h_slot[0]
                    self._heap_pop_root()
                    blo[count, :] = self.pool_lo[slot, :]
                    bhi[count, :] = self.pool_hi[slot, :]
                    self._pool_free(slot)
                    count += 1
                chunk = max(1, (count + workers - 1) // workers)
                spans = [(s, min(s + chunk, count))
                         for s in range(0, count, chunk)]
                list(pool.map(task, spans))
                for i in range(count):
                    if not okv[i]:
                        self.stuck += pmass[i]
                        continue
                    self._settle(pcomp[i], pmass[i],
                                 ocls[2 * i], omass[2 * i],
                                 ocls[2 * i + 1], omass[2 * i + 1],
                                 olo, ohi, 2 * i)
                done += count
        return done
