"""Pure-Python refinement engine: priority worklist of Mixed boxes, largest
component-weighted mass first; Full boxes accumulate into the lower bound,
Empty boxes are discarded (and retained for certificates), Mixed boxes are
bisected on the widest dimension in sigma units.

This is the fallback twin of the Cython engine in _refine_c.pyx; both follow
the same arithmetic step for step so their bounds agree to rounding noise.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor

from ._problem import REL_GE, REL_GT, REL_LE, REL_LT, CompiledProblem
from .normal import gaussian_cdf

_SLACK_REL = 2.0 ** -40
_SLACK_ABS = 1e-300

EMPTY, MIXED, FULL = 0, 1, 2


def _classify(region, lo, hi):
    all_empty = True
    for conj in region:
        conj_full = True
        conj_empty = False
        for coeffs, const, rel in conj:
            mn = const
            mx = const
            acc_mn = abs(const)
            acc_mx = acc_mn
            for j, c in enumerate(coeffs):
                if c > 0.0:
                    p = c * lo[j]
                    q = c * hi[j]
                elif c < 0.0:
                    p = c * hi[j]
                    q = c * lo[j]
                else:
                    continue
                mn += p
                acc_mn += p if p > 0.0 else -p
                mx += q
                acc_mx += q if q > 0.0 else -q
            if acc_mn != 0.0:
                s = acc_mn * _SLACK_REL
                mn -= s if s > _SLACK_ABS else _SLACK_ABS
            if acc_mx != 0.0:
                s = acc_mx * _SLACK_REL
                mx += s if s > _SLACK_ABS else _SLACK_ABS
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
            else:  # REL_EQ: measure zero unless identically zero
                if not (mn == 0.0 and mx == 0.0):
                    conj_empty = True
                    break
        if conj_empty:
            continue
        all_empty = False
        if conj_full:
            return FULL
    return EMPTY if all_empty else MIXED


class PyRefiner:
    """Resumable branch-and-bound state for one event region."""

    name = "python"

    def __init__(self, problem: CompiledProblem):
        self.problem = problem
        self.n = len(problem.dims)
        self.mu = list(problem.mu)
        self.inv_sigma = [1.0 / s for s in problem.sigma]
        self.sigma = list(problem.sigma)
        self.weights = list(problem.weights)
        self.regions = [
            [list(conj) for conj in comp] for comp in problem.regions
        ]
        self.lower = 0.0
        self.mixed = 0.0
        self.tail = 0.0
        self.stuck = 0.0  # mass of boxes too thin to split; stays Mixed
        # reported bounds: the raw ledgers wobble by an ulp as masses move
        # between them, so the reported pair is clamped monotone (the min of
        # two sound upper bounds is itself a sound upper bound)
        self.rep_lower = 0.0
        self.rep_upper = 1.0
        self.splits_used = 0
        self._seq = 0
        self._heap: list = []
        k = len(self.weights)
        self.full_boxes: list[list] = [[] for _ in range(k)]
        self.empty_boxes: list[list] = [[] for _ in range(k)]
        self.trace_lower: list[float] = []
        self.trace_upper: list[float] = []
        self._init_roots()

    # -- mass ------------------------------------------------------------

    def _box_mass(self, lo, hi):
        mass = 1.0
        for j in range(self.n):
            f = gaussian_cdf((hi[j] - self.mu[j]) * self.inv_sigma[j]) - \
                gaussian_cdf((lo[j] - self.mu[j]) * self.inv_sigma[j])
            if f <= 0.0:
                return 0.0
            mass *= f
        return mass

    # -- setup -----------------------------------------------------------

    def _init_roots(self):
        lo = list(self.problem.root_lo)
        hi = list(self.problem.root_hi)
        for comp, region in enumerate(self.regions):
            if not region:
                # empty disjunction: no mass anywhere, no tail; the root box
                # still certifies the component's mass as outside the event
                self._record(self.empty_boxes, comp, lo, hi)
                continue
            w = self.weights[comp]
            root_mass = self._box_mass(lo, hi)
            t = w * (1.0 - root_mass)
            self.tail += t if t > 0.0 else 0.0
            cls = _classify(region, lo, hi)
            if cls == FULL:
                self.lower += w * root_mass
                self._record(self.full_boxes, comp, lo, hi)
            elif cls == EMPTY:
                self._record(self.empty_boxes, comp, lo, hi)
            else:
                m = w * root_mass
                self.mixed += m
                self._push(m, comp, list(lo), list(hi))
        self.rep_lower = self.lower
        self.rep_upper = self.lower + self.mixed + self.tail
        if self.problem.record_trace:
            self.trace_lower.append(self.rep_lower)
            self.trace_upper.append(self.rep_upper)

    def _record(self, store, comp, lo, hi):
        if self.problem.collect_boxes:
            store[comp].append((tuple(lo), tuple(hi)))

    def _push(self, mass, comp, lo, hi):
        heapq.heappush(self._heap, (-mass, self._seq, comp, lo, hi))
        self._seq += 1

    # -- refinement ------------------------------------------------------

    @property
    def upper(self) -> float:
        return self.rep_upper

    @property
    def gap(self) -> float:
        return self.rep_upper - self.rep_lower

    @property
    def exhausted(self) -> bool:
        return not self._heap

    def _split_dim(self, lo, hi):
        best, best_w = 0, -1.0
        for j in range(self.n):
            w = (hi[j] - lo[j]) * self.inv_sigma[j]
            if w > best_w:
                best, best_w = j, w
        return best

    def _process(self, comp, lo, hi):
        """Bisect and classify; pure, safe to run concurrently."""
        d = self._split_dim(lo, hi)
        a, b = lo[d], hi[d]
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            return None  # too thin to split at double precision
        out = []
        for clo, chi in (
            (lo, hi[:d] + [mid] + hi[d + 1:]),
            (lo[:d] + [mid] + lo[d + 1:], hi),
        ):
            cls = _classify(self.regions[comp], clo, chi)
            mass = 0.0
            if cls != EMPTY:
                mass = self.weights[comp] * self._box_mass(clo, chi)
            out.append((cls, clo, chi, mass))
        return out

    def _apply(self, comp, parent_mass, processed):
        """Serial aggregation point; keeps lower nondecreasing and upper
        nonincreasing by never letting the children outweigh their parent
        (floating-point summation can overshoot by an ulp)."""
        if processed is None:
            self.stuck += parent_mass
            return
        self.mixed -= parent_mass
        budget = parent_mass
        for cls, clo, chi, mass in processed:
            if cls == MIXED:
                m = mass if mass < budget else budget
                budget -= m
                if m > 0.0:
                    self.mixed += m
                    self._push(m, comp, clo, chi)
            elif cls == EMPTY:
                self._record(self.empty_boxes, comp, clo, chi)
        for cls, clo, chi, mass in processed:
            if cls == FULL:
                m = mass if mass < budget else budget
                budget -= m
                self.lower += m
                self._record(self.full_boxes, comp, clo, chi)
        if self.lower > self.rep_lower:
            self.rep_lower = self.lower
        u = self.lower + self.mixed + self.tail
        if u < self.rep_upper:
            self.rep_upper = u
        self.splits_used += 1
        if self.problem.record_trace:
            self.trace_lower.append(self.rep_lower)
            self.trace_upper.append(self.rep_upper)

    def refine(self, max_splits: int, gap_target: float = 0.0,
               workers: int = 1) -> int:
        """Run up to max_splits further bisections; stop early once
        upper - lower <= gap_target or no Mixed boxes remain."""
        done = 0
        if workers <= 1:
            while done < max_splits and self._heap and self.gap > gap_target:
                neg_m, _, comp, lo, hi = heapq.heappop(self._heap)
                self._apply(comp, -neg_m, self._process(comp, lo, hi))
                done += 1
            return done
        batch_cap = workers * 32
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while done < max_splits and self._heap and self.gap > gap_target:
                batch = []
                while (self._heap and len(batch) < batch_cap
                       and done + len(batch) < max_splits):
                    neg_m, _, comp, lo, hi = heapq.heappop(self._heap)
                    batch.append((comp, -neg_m, lo, hi))
                chunk = max(1, (len(batch) + workers - 1) // workers)
                spans = [batch[s:s + chunk] for s in range(0, len(batch), chunk)]
                parts = pool.map(
                    lambda span: [self._process(c, lo, hi)
                                  for c, _, lo, hi in span],
                    spans)
                for span, outs in zip(spans, parts):
                    for (comp, mass, _, _), processed in zip(span, outs):
                        self._apply(comp, mass, processed)
                done += len(batch)
        return done
