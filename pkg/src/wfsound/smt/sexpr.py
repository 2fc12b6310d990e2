"""Minimal S-expression reading and writing for SMT-LIB2 text."""

from __future__ import annotations

from fractions import Fraction


class SexprError(ValueError):
    pass


def tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SexprError("unterminated quoted symbol")
            yield text[i:j + 1]
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise SexprError("unterminated string literal")
            yield text[i:j + 1]
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n()|;\"":
                j += 1
            yield text[i:j]
            i = j


def parse_all(text: str) -> list:
    """Parse every top-level S-expression in the text."""
    stack = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SexprError("unbalanced '('")
    return stack[0]


def to_text(node) -> str:
    if isinstance(node, list):
        return "(" + " ".join(to_text(x) for x in node) + ")"
    return str(node)


def num_text(value) -> str:
    """Render an exact rational as an SMT-LIB2 term."""
    value = Fraction(value)
    if value < 0:
        return f"(- {num_text(-value)})"
    if value.denominator == 1:
        return str(value.numerator)
    return f"(/ {value.numerator} {value.denominator})"


def parse_value(node):
    """Interpret a solver value term as an exact rational, integer, or
    boolean."""
    if isinstance(node, str):
        if node == "true":
            return True
        if node == "false":
            return False
        if "." in node:
            text = node.rstrip("0").rstrip(".") if "." in node else node
            return Fraction(node)
        return Fraction(int(node))
    if node and node[0] == "-" and len(node) == 2:
        return -parse_value(node[1])
    if node and node[0] == "/" and len(node) == 3:
        return parse_value(node[1]) / parse_value(node[2])
    raise SexprError(f"cannot interpret value {to_text(node)}")
