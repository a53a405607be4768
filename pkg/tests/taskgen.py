"""Pseudo-random verification tasks: 2-4 Gaussian attributes, optionally one
Bernoulli group bit, and a decision tree of depth <= 4 with linear guards.
Emitted as source text so the whole pipeline (parser included) is exercised."""

from __future__ import annotations

import numpy as np

from fairbox.dsl import parse_source, validate


def _guard(rng: np.random.Generator, names, mus, sigmas) -> str:
    k = int(rng.integers(1, min(3, len(names)) + 1))
    idx = [int(i) for i in rng.choice(len(names), size=k, replace=False)]
    coefs = [float(c) for c in rng.choice((-2.0, -1.0, 1.0, 2.0), size=k)]
    mean = sum(c * mus[i] for c, i in zip(coefs, idx))
    spread = float(np.sqrt(sum((c * sigmas[i]) ** 2 for c, i in zip(coefs, idx))))
    threshold = float(mean + float(rng.uniform(-1.0, 1.0)) * spread)
    terms = []
    for c, i in zip(coefs, idx):
        c = float(c)
        if not terms:
            terms.append(names[i] if c == 1.0 else f"{c!r} * {names[i]}")
        elif c < 0:
            terms.append(f"- {abs(c)!r} * {names[i]}" if abs(c) != 1.0
                         else f"- {names[i]}")
        else:
            terms.append(f"+ {c!r} * {names[i]}" if c != 1.0
                         else f"+ {names[i]}")
    rel = str(rng.choice(("<=", ">", "<", ">=")))
    return f"{' '.join(terms)} {rel} {threshold!r}"


def _tree(rng, names, mus, sigmas, depth, pad) -> list[str]:
    if depth == 0 or rng.random() < 0.25:
        value = "true" if rng.random() < 0.5 else "false"
        return [f"{pad}q <- {value}"]
    lines = [f"{pad}if ({_guard(rng, names, mus, sigmas)})"]
    lines += _tree(rng, names, mus, sigmas, depth - 1, pad + "  ")
    lines.append(f"{pad}else")
    lines += _tree(rng, names, mus, sigmas, depth - 1, pad + "  ")
    return lines


def random_task_source(rng: np.random.Generator, max_depth: int = 4,
                       allow_bernoulli: bool = True) -> str:
    g = int(rng.integers(2, 5))
    names = [f"v{i}" for i in range(g)]
    mus = [float(rng.uniform(-3, 3)) for _ in range(g)]
    sigmas = [float(rng.uniform(0.5, 2.5)) for _ in range(g)]
    use_bern = allow_bernoulli and rng.random() < 0.5

    model = ["define m()"]
    for name, mu, sd in zip(names, mus, sigmas):
        model.append(f"  {name} ~ gauss({mu!r}, {sd!r})")
    if use_bern:
        p = float(rng.uniform(0.2, 0.8))
        shift = float(rng.uniform(0.5, 2.0))
        model.append(f"  grp ~ bernoulli({p!r})")
        model.append("  if (grp == 1)")
        model.append(f"    {names[0]} <- {names[0]} + {shift!r}")
    model.append(f"  return {', '.join(names)}")

    program = [f"define d({', '.join(names)})"]
    depth = int(rng.integers(1, max_depth + 1))
    program += _tree(rng, names, mus, sigmas, depth, "  ")
    program.append("  return q")

    if use_bern:
        sensitive = "grp == 1"
    else:
        t = mus[0] + float(rng.uniform(-1.0, 1.0)) * sigmas[0]
        sensitive = f"v0 > {t!r}"
    spec = [
        "spec {",
        f"  sensitive: {sensitive};",
        "  qualified: q;",
        "  epsilon: 0.1;",
        "}",
    ]
    return "\n".join(model + [""] + program + [""] + spec) + "\n"


def random_validated_task(rng: np.random.Generator, **kw):
    return validate(parse_source(random_task_source(rng, **kw)))
