"""Monte Carlo cross-check: forward-samples the population model and runs a
direct (non-symbolic) interpreter of the decision program.

Serves as the statistical oracle in tests and behind the CLI's --mc-check.
Gaussian variates come from the inverse CDF applied to PCG64 uniforms
(scipy's ndtri, a code path independent of the package's own CDF).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .dsl.nodes import (
    Assign,
    Cond,
    CondAnd,
    CondAtom,
    Draw,
    Gauss,
    IfChain,
    LinearExpression,
    Relation,
)
from .dsl.validator import ValidatedTask
from .symexec import EVENTS

GENERATOR = "pcg64-ndtri"


@dataclass(frozen=True)
class McEventEstimate:
    estimate: float
    stderr: float | None  # None marks a degenerate p*(1-p) = 0 sample
    count: int


@dataclass(frozen=True)
class McEstimate:
    events: dict[str, McEventEstimate]
    ratio: float | None
    samples: int
    seed: int
    generator: str = GENERATOR


def _draw_base_vector(vtask: ValidatedTask, n: int,
                      rng: np.random.Generator) -> dict[str, np.ndarray]:
    """All draw sites sampled up front, in site order.  Conditionally
    reached draws just ignore their value, which preserves the measure
    (sites are independent)."""
    out: dict[str, np.ndarray] = {}
    for site in vtask.draw_sites:
        if isinstance(site.dist, Gauss):
            u = np.maximum(rng.random(n), 1e-300)  # ndtri(0) is -inf
            out[site.base_name] = site.dist.mean + site.dist.stddev * ndtri(u)
        else:
            out[site.base_name] = (rng.random(n) < site.dist.p).astype(np.float64)
    return out


def _eval_linexpr(e: LinearExpression, env, n: int) -> np.ndarray:
    acc = np.full(n, e.const)
    for name, coef in e.terms:
        acc += coef * env[name]
    return acc


def _eval_cond(c: Cond, env, n: int) -> np.ndarray:
    if isinstance(c, CondAtom):
        v = _eval_linexpr(c.atom.lhs, env, n)
        rel = c.atom.rel
        if rel is Relation.LE:
            return v <= 0.0
        if rel is Relation.LT:
            return v < 0.0
        if rel is Relation.GE:
            return v >= 0.0
        if rel is Relation.GT:
            return v > 0.0
        return v == 0.0
    if isinstance(c, CondAnd):
        acc = np.ones(n, dtype=bool)
        for item in c.items:
            acc &= _eval_cond(item, env, n)
        return acc
    acc = np.zeros(n, dtype=bool)
    for item in c.items:
        acc |= _eval_cond(item, env, n)
    return acc


def _exec_block(body, env, mask, draws, vtask, n):
    for stmt in body:
        if isinstance(stmt, Draw):
            value = draws[vtask.site_of[stmt].base_name]
            prior = env.get(stmt.target)
            env[stmt.target] = value if prior is None else np.where(mask, value, prior)
        elif isinstance(stmt, Assign):
            if isinstance(stmt.value, bool):
                prior = env.get(stmt.target)
                if prior is None or prior.dtype != bool:
                    prior = np.zeros(n, dtype=bool)
                env[stmt.target] = np.where(mask, stmt.value, prior)
            else:
                value = _eval_linexpr(stmt.value, env, n)
                prior = env.get(stmt.target)
                env[stmt.target] = value if prior is None else np.where(mask, value, prior)
        elif isinstance(stmt, IfChain):
            remaining = mask.copy()
            for guard, branch in stmt.branches:
                g = _eval_cond(guard, env, n)
                _exec_block(branch, env, remaining & g, draws, vtask, n)
                remaining &= ~g
            _exec_block(stmt.else_body, env, remaining, draws, vtask, n)
        else:
            raise TypeError(f"unknown statement {stmt!r}")


def interpret(vtask: ValidatedTask, draws: dict[str, np.ndarray],
              n: int) -> tuple[np.ndarray, np.ndarray]:
    """Direct interpretation of model + program on pre-drawn base vectors.

    Returns (program returns true, sensitive condition holds) boolean arrays.
    Writes outside a branch's mask never leak, so this matches sequential
    execution sample for sample.
    """
    task = vtask.task
    with np.errstate(invalid="ignore"):
        model_env: dict[str, np.ndarray] = {}
        _exec_block(task.model.body, model_env, np.ones(n, dtype=bool),
                    draws, vtask, n)
        sens = _eval_cond(task.spec.sensitive, model_env, n)
        prog_env = {
            param: model_env[ret]
            for ret, param in zip(task.model.returns, task.program.params)
        }
        _exec_block(task.program.body, prog_env, np.ones(n, dtype=bool),
                    draws, vtask, n)
        rv = task.program.return_value
        if isinstance(rv, bool):
            ret = np.full(n, rv, dtype=bool)
        else:
            ret = prog_env[rv].astype(bool)
    return ret, sens


def interpret_point(vtask: ValidatedTask,
                    values: dict[str, float]) -> tuple[bool, bool]:
    """Single-point direct interpretation; values keyed by base names."""
    draws = {k: np.array([v], dtype=np.float64) for k, v in values.items()}
    ret, sens = interpret(vtask, draws, 1)
    return bool(ret[0]), bool(sens[0])


def _run_shard(vtask: ValidatedTask, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    draws = _draw_base_vector(vtask, n, rng)
    ret, sens = interpret(vtask, draws, n)
    return np.array([
        int(np.count_nonzero(ret & sens)),
        int(np.count_nonzero(ret & ~sens)),
        int(np.count_nonzero(sens)),
        int(np.count_nonzero(~sens)),
    ], dtype=np.int64)


def mc_estimate(vtask: ValidatedTask, n: int, seed: int = 42,
                workers: int = 1) -> McEstimate:
    """Estimate the four event probabilities from n forward samples.

    Deterministic for fixed (task, n, seed, workers); shard i draws from
    seed XOR i.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    workers = max(1, workers)
    base = n // workers
    sizes = [base + (1 if i < n % workers else 0) for i in range(workers)]
    shards = [(size, seed ^ i) for i, size in enumerate(sizes) if size > 0]
    if len(shards) == 1:
        counts = _run_shard(vtask, shards[0][0], shards[0][1])
    else:
        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            parts = list(pool.map(
                lambda t: _run_shard(vtask, t[0], t[1]), shards))
        counts = np.sum(parts, axis=0)
    events: dict[str, McEventEstimate] = {}
    for name, c in zip(EVENTS, counts):
        p = c / n
        var = p * (1.0 - p)
        stderr = float(np.sqrt(var / n)) if var > 0.0 else None
        events[name] = McEventEstimate(float(p), stderr, int(c))
    qs, qn, s, ns = (events[e].estimate for e in EVENTS)
    ratio = None
    if s > 0.0 and ns > 0.0 and qn > 0.0:
        ratio = (qs / s) / (qn / ns)
    return McEstimate(events, ratio, n, seed)
