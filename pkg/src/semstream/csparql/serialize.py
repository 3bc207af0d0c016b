from __future__ import annotations

from ..rdf import XSD_STRING, Iri, Literal, Variable
from .ast import BinOp, Expr, Num, PName, RegisteredQuery

# binding strength; higher binds tighter
_PRECEDENCE = {"||": 1, "&&": 2, "<": 3, "<=": 3, ">": 3, ">=": 3, "=": 3, "!=": 3, "+": 4, "-": 4, "*": 5, "/": 5}


def _term(term: object) -> str:
    if isinstance(term, Literal):
        body = Literal(term.lexical).__str__()
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^{_term(term.datatype)}"
    return str(term)


def format_expr(expr: Expr, parent: int = 0, right_side: bool = False) -> str:
    if isinstance(expr, BinOp):
        prec = _PRECEDENCE[expr.op]
        # left-associative: a right operand at equal precedence needs parentheses
        text = f"{format_expr(expr.left, prec)} {expr.op} {format_expr(expr.right, prec, True)}"
        if prec < parent or (prec == parent and right_side) or (prec == parent == 3):
            return f"({text})"
        return text
    if isinstance(expr, Num) and expr.value < 0:
        return f"({expr})" if parent else str(expr)
    if isinstance(expr, (Variable, Num, Iri, PName, Literal)):
        return _term(expr)
    raise TypeError(f"not an expression: {expr!r}")


def serialize_query(q: RegisteredQuery) -> str:
    lines = [f"REGISTER {q.kind} {q.name} COMPUTED EVERY {q.compute_every} AS"]
    for prefix, ns in q.prefixes.items():
        lines.append(f"  PREFIX {prefix}: <{ns}>")
    items = []
    for item in q.select:
        if item.alias is None:
            items.append(format_expr(item.expr))
        else:
            items.append(f"({format_expr(item.expr)} AS ?{item.alias})")
    lines.append("  SELECT " + " ".join(items))
    for src in q.sources:
        lines.append(f"  FROM STREAM {src.stream_iri} [RANGE {src.range} STEP {src.step}]")
    if q.where or q.filters:
        body = [" ".join(_term(t) for t in pattern) + " ." for pattern in q.where]
        body += [f"FILTER ({format_expr(f)})" for f in q.filters]
        lines.append("  WHERE {")
        lines.extend("    " + b for b in body)
        lines.append("  }")
    for agg in q.aggregates:
        over = ", ".join(f"?{v}" for v in agg.over_vars)
        head = f"  AGGREGATE {{(?{agg.out_var}, {agg.function}, {{{over}}})"
        if agg.filter is not None:
            head += f" FILTER ({format_expr(agg.filter)})"
        lines.append(head + "}")
    return "\n".join(lines) + "\n"
