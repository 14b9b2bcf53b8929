"""Problem-file format and the right-hand-side expression grammar.

Files are plain ``key = value`` text so fixtures stay diffable:

    n = 3
    T = 1
    a = [1, 0, 0, 0]
    b = [1, 0, 0, 1]
    alpha = [[1,0,0],[0,1,0],[0,0,1]]
    beta = [[0,0,-1],[0,-1,0],[-1,0,0]]
    rhs = sin(t)

Scalars admit ``sqrt(x)`` literals (optionally scaled); the right-hand
side is a sum of terms ``coeff [* t^k] [* exp(mu*t)] [* sin|cos(omega*t)]``
which lowers onto the exponential-polynomial algebra.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import DimensionError, ParseError
from .exppoly import ExpPoly

_REQUIRED = ("n", "T", "a", "b", "alpha", "beta", "rhs")

_NUMBER = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def _parse_scalar(text, line=None):
    """number | sqrt(number) | number*sqrt(number), with optional sign."""
    s = text.strip()
    m = re.fullmatch(
        rf"([+-]?)\s*(?:({_NUMBER})\s*\*\s*)?sqrt\(\s*({_NUMBER})\s*\)", s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        factor = float(m.group(2)) if m.group(2) else 1.0
        return sign * factor * math.sqrt(float(m.group(3)))
    m = re.fullmatch(rf"[+-]?{_NUMBER}", s)
    if m:
        return float(s)
    raise ParseError(f"expected a number or sqrt literal, got {text!r}",
                     line=line)


def _split_top_level(body, line):
    """Split a bracketed list body on top-level commas."""
    items, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ']'", line=line)
        elif ch == "," and depth == 0:
            items.append(body[start:i])
            start = i + 1
    if depth != 0:
        raise ParseError("unbalanced '['", line=line)
    items.append(body[start:])
    return [x.strip() for x in items if x.strip() or len(items) > 1]


def _parse_vector(text, line):
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseError("expected a bracketed vector", line=line)
    return tuple(_parse_scalar(x, line) for x in _split_top_level(s[1:-1],
                                                                  line))


def _parse_matrix(text, line):
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ParseError("expected a bracketed matrix", line=line)
    rows = _split_top_level(s[1:-1], line)
    return tuple(_parse_vector(r, line) for r in rows)


# ---------------------------------------------------------------------------
# right-hand-side expressions

_TOKEN = re.compile(
    rf"\s*(?:(?P<num>{_NUMBER})|(?P<name>t|exp|sin|cos|sqrt)"
    r"|(?P<op>[+\-*^()]))")


def _tokenize(text, line=None):
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line=line, column=pos + 1)
        if m.group("num"):
            out.append(("num", float(m.group("num")), pos))
        elif m.group("name"):
            out.append(("name", m.group("name"), pos))
        else:
            out.append(("op", m.group("op"), pos))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _RhsParser:
    def __init__(self, text, line=None):
        self.text = text
        self.line = line
        self.toks = _tokenize(text, line)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, expected):
        kind, val, pos = self.peek()
        raise ParseError(f"expected {expected}, got {val!r}",
                         line=self.line, column=pos + 1)

    def expect_op(self, op):
        kind, val, _ = self.peek()
        if kind != "op" or val != op:
            self.fail(f"'{op}'")
        self.next()

    def parse(self) -> ExpPoly:
        total = self.parse_term(self.sign())
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                total = total + self.parse_term(-1.0 if val == "-" else 1.0)
            elif kind == "end":
                return total
            else:
                self.fail("'+' or '-'")

    def sign(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            return -1.0 if val == "-" else 1.0
        return 1.0

    def parse_term(self, sign) -> ExpPoly:
        factors = [self.parse_factor()]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.next()
                factors.append(self.parse_factor())
            else:
                break
        out = ExpPoly.constant(sign)
        for f in factors:
            out = out * f
        return out

    def parse_factor(self) -> ExpPoly:
        kind, val, pos = self.peek()
        if kind == "num":
            self.next()
            return ExpPoly.constant(val)
        if kind != "name":
            self.fail("a number, t, sqrt, exp, sin or cos")
        self.next()
        if val == "t":
            k = 1
            pk, pv, _ = self.peek()
            if pk == "op" and pv == "^":
                self.next()
                nk, nv, _ = self.peek()
                if nk != "num" or nv != int(nv) or nv < 1:
                    self.fail("a positive integer power")
                self.next()
                k = int(nv)
            return ExpPoly.monomial(k)
        if val == "sqrt":
            self.expect_op("(")
            nk, nv, _ = self.peek()
            if nk != "num":
                self.fail("a number inside sqrt")
            self.next()
            self.expect_op(")")
            return ExpPoly.constant(math.sqrt(nv))
        # exp / sin / cos with linear argument mu * t
        self.expect_op("(")
        rate = self.sign()
        nk, nv, _ = self.peek()
        if nk == "num":
            self.next()
            rate *= nv
            pk, pv, _ = self.peek()
            if pk == "op" and pv == "*":
                self.next()
        nk, nv, _ = self.peek()
        if nk != "name" or nv != "t":
            self.fail("'t' in the argument")
        self.next()
        self.expect_op(")")
        if val == "exp":
            return ExpPoly.exponential(rate)
        if val == "sin":
            return ExpPoly.sin(rate)
        return ExpPoly.cos(rate)


def parse_rhs(text, line=None) -> ExpPoly:
    """Lower a right-hand-side expression onto the function algebra."""
    if not text.strip():
        raise ParseError("empty right-hand side", line=line)
    return _RhsParser(text, line).parse()


# ---------------------------------------------------------------------------
# problem files

@dataclass(frozen=True)
class ProblemFile:
    n: int
    T: float
    a: tuple
    b: tuple
    alpha: tuple   # n rows of n coefficients
    beta: tuple
    rhs: str

    def rhs_exppoly(self) -> ExpPoly:
        return parse_rhs(self.rhs)

    def to_der_problem(self):
        from .boundary import BoundarySpec
        from .operators import ReflectionOperator
        from .pipeline import DERProblem
        return DERProblem(
            L=ReflectionOperator.make(self.a, self.b),
            B=BoundarySpec.make(self.T, self.alpha, self.beta),
            T=self.T, h=self.rhs_exppoly())


def parse_problem(text) -> ProblemFile:
    """Strict parse of a problem file.

    Unknown or duplicate keys are rejected; dimension mismatches are
    reported with their line numbers.
    """
    seen = {}
    lines = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        body = rawline.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError("expected 'key = value'", line=lineno)
        key, _, value = body.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _REQUIRED:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        seen[key] = value
        lines[key] = lineno
    for key in _REQUIRED:
        if key not in seen:
            raise ParseError(f"missing key {key!r}")

    nline = lines["n"]
    try:
        n = int(seen["n"])
    except ValueError:
        raise ParseError("n must be an integer", line=nline) from None
    if n < 1:
        raise ParseError("n must be at least 1", line=nline)
    T = _parse_scalar(seen["T"], lines["T"])
    if T <= 0:
        raise ParseError("T must be positive", line=lines["T"])

    vecs = {}
    for key in ("a", "b"):
        v = _parse_vector(seen[key], lines[key])
        if len(v) != n + 1:
            raise DimensionError(
                f"{key} must have {n + 1} entries, got {len(v)}",
                line=lines[key])
        vecs[key] = v
    mats = {}
    for key in ("alpha", "beta"):
        m = _parse_matrix(seen[key], lines[key])
        if len(m) != n or any(len(row) != n for row in m):
            raise DimensionError(
                f"{key} must be a {n}x{n} matrix", line=lines[key])
        mats[key] = m

    parse_rhs(seen["rhs"], lines["rhs"])  # validate now, lower lazily
    return ProblemFile(n=n, T=T, a=vecs["a"], b=vecs["b"],
                       alpha=mats["alpha"], beta=mats["beta"],
                       rhs=seen["rhs"])


def format_problem(pf: ProblemFile) -> str:
    """Serialize so that parse(format(pf)) == pf structurally."""
    def num(x):
        return f"{x:.17g}"

    def vec(v):
        return "[" + ", ".join(num(x) for x in v) + "]"

    def mat(m):
        return "[" + ", ".join(vec(r) for r in m) + "]"

    return "\n".join([
        f"n = {pf.n}",
        f"T = {num(pf.T)}",
        f"a = {vec(pf.a)}",
        f"b = {vec(pf.b)}",
        f"alpha = {mat(pf.alpha)}",
        f"beta = {mat(pf.beta)}",
        f"rhs = {pf.rhs}",
    ]) + "\n"
