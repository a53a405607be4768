"""Canonical pretty-printer.  print(parse(print(parse(s)))) is a fixed point:
the first round normalizes formatting, after which printing is stable."""

from __future__ import annotations

from .nodes import (
    Assign,
    AtomicCondition,
    Cond,
    CondAnd,
    CondAtom,
    CondOr,
    DecisionProgram,
    Draw,
    Gauss,
    IfChain,
    LinearExpression,
    PopulationModel,
    Statement,
    VerificationTask,
)


def format_number(x: float) -> str:
    return repr(float(x))


def format_linexpr(e: LinearExpression) -> str:
    parts: list[str] = []
    for name, coef in e.terms:
        mag = abs(coef)
        body = name if mag == 1.0 else f"{format_number(mag)} * {name}"
        if not parts:
            parts.append(f"-{body}" if coef < 0 else body)
        else:
            parts.append(f"- {body}" if coef < 0 else f"+ {body}")
    if e.const != 0.0 or not parts:
        mag = format_number(abs(e.const))
        if not parts:
            parts.append(f"-{mag}" if e.const < 0 else mag)
        else:
            parts.append(f"- {mag}" if e.const < 0 else f"+ {mag}")
    return " ".join(parts)


def format_atom(a: AtomicCondition) -> str:
    return f"{format_linexpr(a.lhs)} {a.rel.value} 0"


def format_cond(c: Cond) -> str:
    if isinstance(c, CondAtom):
        return format_atom(c.atom)
    if isinstance(c, CondAnd):
        parts = [
            f"({format_cond(item)})" if isinstance(item, CondOr) else format_cond(item)
            for item in c.items
        ]
        return " and ".join(parts)
    return " or ".join(format_cond(item) for item in c.items)


def _format_stmt(s: Statement, depth: int, out: list[str]) -> None:
    pad = "  " * depth
    if isinstance(s, Assign):
        if isinstance(s.value, bool):
            rhs = "true" if s.value else "false"
        else:
            rhs = format_linexpr(s.value)
        out.append(f"{pad}{s.target} <- {rhs}")
    elif isinstance(s, Draw):
        if isinstance(s.dist, Gauss):
            d = f"gauss({format_number(s.dist.mean)}, {format_number(s.dist.stddev)})"
        else:
            d = f"bernoulli({format_number(s.dist.p)})"
        out.append(f"{pad}{s.target} ~ {d}")
    elif isinstance(s, IfChain):
        for i, (guard, body) in enumerate(s.branches):
            kw = "if" if i == 0 else "elif"
            out.append(f"{pad}{kw} ({format_cond(guard)})")
            for stmt in body:
                _format_stmt(stmt, depth + 1, out)
        if s.else_body:
            out.append(f"{pad}else")
            for stmt in s.else_body:
                _format_stmt(stmt, depth + 1, out)
    else:
        raise TypeError(f"unknown statement {s!r}")


def format_model(m: PopulationModel) -> str:
    out = [f"define {m.name}()"]
    for stmt in m.body:
        _format_stmt(stmt, 1, out)
    out.append(f"  return {', '.join(m.returns)}")
    return "\n".join(out)


def format_program(p: DecisionProgram) -> str:
    out = [f"define {p.name}({', '.join(p.params)})"]
    for stmt in p.body:
        _format_stmt(stmt, 1, out)
    if isinstance(p.return_value, bool):
        ret = "true" if p.return_value else "false"
    else:
        ret = p.return_value
    out.append(f"  return {ret}")
    return "\n".join(out)


def format_task(task: VerificationTask) -> str:
    spec = task.spec
    lines = [
        format_model(task.model),
        "",
        format_program(task.program),
        "",
        "spec {",
        f"  sensitive: {format_cond(spec.sensitive)};",
        f"  qualified: {spec.qualified};",
        f"  epsilon: {format_number(spec.epsilon)};",
        "}",
        "",
    ]
    return "\n".join(lines)
