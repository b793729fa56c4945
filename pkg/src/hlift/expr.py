"""Arithmetic expression language for metric and potential fields.

Grammar (precedence from loosest to tightest):

    expr    :=  term  (("+" | "-") term)*
    term    :=  power (("*" | "/") power)*
    power   :=  unary ("^" power)?          right associative
    unary   :=  "-" unary | atom            unary minus binds tighter than "^"
    atom    :=  NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Note the unary-minus rule: "-x1^2" parses as (-x1)^2.  Write "-(x1^2)"
for the negated square.  There is no implicit multiplication; "2x1" is a
syntax error.

Builtin functions: sin cos tan sinh cosh tanh exp log sqrt abs pow(a,b).
Builtin constants: pi, e.  Variables are x1..xn, u, w; any other name
must be a declared parameter.

Evaluation is generic over float and Dual scalars, so one expression
serves both plain evaluation and forward-mode differentiation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence, Union

from . import autodiff as ad
from .errors import (ExprEvalError, ExprSyntaxError, FieldEvalError,
                     NonFiniteError, UnknownIdentifierError)

__all__ = [
    "Num", "Var", "Unary", "Binary", "Call", "Ast",
    "parse", "to_text", "eval_ast", "compile_ast", "free_names",
    "validate_identifiers", "Field", "as_field",
]

FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "sinh": 1, "cosh": 1, "tanh": 1,
    "exp": 1, "log": 1, "sqrt": 1, "abs": 1, "pow": 2,
}

CONSTANTS = {"pi": math.pi, "e": math.e}

Span = tuple


@dataclass(frozen=True)
class Num:
    value: float
    span: Span


@dataclass(frozen=True)
class Var:
    name: str
    span: Span


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Ast"
    span: Span


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Ast"
    right: "Ast"
    span: Span


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    span: Span


Ast = Union[Num, Var, Unary, Binary, Call]


# -- tokenizer ---------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*/^(),")


def _tokenize(text: str):
    """Yields (kind, text, offset) triples; kinds: num, name, op, end."""
    tokens = []
    pos = 0
    size = len(text)
    while pos < size:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            tokens.append(("num", m.group(), pos))
            pos = m.end()
            continue
        m = _NAME.match(text, pos)
        if m:
            tokens.append(("name", m.group(), pos))
            pos = m.end()
            continue
        if ch in _OPS:
            tokens.append(("op", ch, pos))
            pos += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(("end", "", size))
    return tokens


# -- parser ------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            got = text if text else "end of input"
            raise ExprSyntaxError(f"expected '{op}', got {got!r}", off)
        return self.take()

    def parse(self) -> Ast:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected trailing input {text!r}", off)
        return node

    def expr(self) -> Ast:
        node = self.term()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                right = self.term()
                node = Binary(text, node, right, (node.span[0], right.span[1]))
            else:
                return node

    def term(self) -> Ast:
        node = self.power()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                right = self.power()
                node = Binary(text, node, right, (node.span[0], right.span[1]))
            else:
                return node

    def power(self) -> Ast:
        base = self.unary()
        kind, text, off = self.peek()
        if kind == "op" and text == "^":
            self.take()
            exponent = self.power()
            return Binary("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def unary(self) -> Ast:
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.take()
            operand = self.unary()
            return Unary("-", operand, (off, operand.span[1]))
        return self.atom()

    def atom(self) -> Ast:
        kind, text, off = self.take()
        if kind == "num":
            return Num(float(text), (off, off + len(text)))
        if kind == "name":
            nxt_kind, nxt_text, _ = self.peek()
            if nxt_kind == "op" and nxt_text == "(":
                if text not in FUNCTIONS:
                    raise UnknownIdentifierError(text, off)
                self.take()
                args = [self.expr()]
                while True:
                    k, t, o = self.peek()
                    if k == "op" and t == ",":
                        self.take()
                        args.append(self.expr())
                    else:
                        break
                close = self.expect_op(")")
                arity = FUNCTIONS[text]
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{text} takes {arity} argument(s), got {len(args)}", off)
                return Call(text, tuple(args), (off, close[2] + 1))
            return Var(text, (off, off + len(text)))
        if kind == "op" and text == "(":
            node = self.expr()
            close = self.expect_op(")")
            # widen the span to include the parentheses
            return _respan(node, (off, close[2] + 1))
        got = text if text else "end of input"
        raise ExprSyntaxError(f"expected a number, name or '(', got {got!r}", off)


def _respan(node: Ast, span: Span) -> Ast:
    cls = type(node)
    fields = {f: getattr(node, f) for f in node.__dataclass_fields__}
    fields["span"] = span
    return cls(**fields)


def parse(text: str) -> Ast:
    """Parse expression text into an Ast.

    Raises ExprSyntaxError (with byte offset) on malformed input and
    UnknownIdentifierError when a call uses a name that is not a builtin
    function.
    """
    return _Parser(text).parse()


# -- printer -----------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_UNARY_PREC = 4


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _print(node: Ast, ctx: int) -> str:
    if isinstance(node, Num):
        s = _fmt_number(node.value)
        return s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        args = ", ".join(_print(a, 0) for a in node.args)
        return f"{node.name}({args})"
    if isinstance(node, Unary):
        inner = _print(node.operand, _UNARY_PREC)
        s = f"-{inner}"
        return f"({s})" if ctx > _UNARY_PREC else s
    if isinstance(node, Binary):
        p = _PREC[node.op]
        if node.op == "^":
            # right associative, base must bind at least as tight as unary
            left = _print(node.left, _UNARY_PREC)
            right = _print(node.right, p)
            s = f"{left}^{right}"
        else:
            left = _print(node.left, p)
            right = _print(node.right, p + 1)
            s = f"{left} {node.op} {right}"
        return f"({s})" if p < ctx else s
    raise TypeError(f"not an Ast node: {node!r}")


def to_text(node: Ast) -> str:
    """Canonical text form; parse(to_text(parse(s))) is structurally stable."""
    return _print(node, 0)


# -- analysis ----------------------------------------------------------

def free_names(node: Ast) -> set:
    """All variable/parameter names referenced (constants excluded)."""
    out: set = set()
    _collect_names(node, out)
    return out - set(CONSTANTS)


def _collect_names(node: Ast, out: set) -> None:
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, Unary):
        _collect_names(node.operand, out)
    elif isinstance(node, Binary):
        _collect_names(node.left, out)
        _collect_names(node.right, out)
    elif isinstance(node, Call):
        for a in node.args:
            _collect_names(a, out)


def validate_identifiers(node: Ast, allowed) -> None:
    """Raise UnknownIdentifierError if the Ast references a name outside
    `allowed` (constants are always allowed)."""
    allowed = set(allowed) | set(CONSTANTS)
    _validate(node, allowed)


def _validate(node: Ast, allowed: set) -> None:
    if isinstance(node, Var):
        if node.name not in allowed:
            raise UnknownIdentifierError(node.name, node.span[0])
    elif isinstance(node, Unary):
        _validate(node.operand, allowed)
    elif isinstance(node, Binary):
        _validate(node.left, allowed)
        _validate(node.right, allowed)
    elif isinstance(node, Call):
        for a in node.args:
            _validate(a, allowed)


# -- evaluation --------------------------------------------------------

_FN = {
    "sin": ad.sin, "cos": ad.cos, "tan": ad.tan,
    "sinh": ad.sinh, "cosh": ad.cosh, "tanh": ad.tanh,
    "exp": ad.exp, "log": ad.log, "sqrt": ad.sqrt, "abs": abs,
}


def eval_ast(node: Ast, variables: Mapping, params: Optional[Mapping] = None):
    """Evaluate an Ast.  `variables` maps names to scalars (float or Dual),
    `params` maps names to reals.  Division by zero, log/sqrt domain
    faults and unbound names raise ExprEvalError carrying the span of the
    failing subexpression."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        name = node.name
        if name in variables:
            return variables[name]
        if params is not None and name in params:
            return params[name]
        if name in CONSTANTS:
            return CONSTANTS[name]
        raise ExprEvalError(f"unbound name '{name}'", node.span)
    if isinstance(node, Unary):
        return -eval_ast(node.operand, variables, params)
    if isinstance(node, Binary):
        a = eval_ast(node.left, variables, params)
        b = eval_ast(node.right, variables, params)
        try:
            if node.op == "+":
                return a + b
            if node.op == "-":
                return a - b
            if node.op == "*":
                return a * b
            if node.op == "/":
                return a / b
            return ad.powx(a, b)
        except ZeroDivisionError:
            raise ExprEvalError("division by zero", node.span) from None
        except NonFiniteError as err:
            raise ExprEvalError(str(err), node.span) from None
    if isinstance(node, Call):
        args = [eval_ast(a, variables, params) for a in node.args]
        try:
            if node.name == "pow":
                return ad.powx(args[0], args[1])
            return _FN[node.name](args[0])
        except ZeroDivisionError:
            raise ExprEvalError("division by zero", node.span) from None
        except NonFiniteError as err:
            raise ExprEvalError(str(err), node.span) from None
    raise TypeError(f"not an Ast node: {node!r}")


# -- compilation to a plain Python closure -----------------------------
#
# Interpretation dominates the integrator hot path, so expression fields
# are compiled once into a closure over the same ad.* functions the
# interpreter uses.  Both paths execute the identical operation tree in
# the identical order, so results match the interpreter bit for bit; the
# interpreter remains the error-reporting path (it knows spans).

_COMPILED_FN = {
    "sin": "_f_sin", "cos": "_f_cos", "tan": "_f_tan",
    "sinh": "_f_sinh", "cosh": "_f_cosh", "tanh": "_f_tanh",
    "exp": "_f_exp", "log": "_f_log", "sqrt": "_f_sqrt", "abs": "abs",
}
_COMPILE_GLOBALS = {
    "_f_sin": ad.sin, "_f_cos": ad.cos, "_f_tan": ad.tan,
    "_f_sinh": ad.sinh, "_f_cosh": ad.cosh, "_f_tanh": ad.tanh,
    "_f_exp": ad.exp, "_f_log": ad.log, "_f_sqrt": ad.sqrt,
    "_f_pow": ad.powx, "abs": abs,
}


def _emit(node: Ast, slots: Mapping, params: Optional[Mapping]) -> str:
    if isinstance(node, Num):
        return f"({node.value!r})"
    if isinstance(node, Var):
        name = node.name
        if name in slots:
            return slots[name]
        if params is not None and name in params:
            return f"({float(params[name])!r})"
        if name in CONSTANTS:
            return f"({CONSTANTS[name]!r})"
        raise ExprEvalError(f"unbound name '{name}'", node.span)
    if isinstance(node, Unary):
        return f"(-{_emit(node.operand, slots, params)})"
    if isinstance(node, Binary):
        a = _emit(node.left, slots, params)
        b = _emit(node.right, slots, params)
        if node.op == "^":
            return f"_f_pow({a}, {b})"
        return f"({a} {node.op} {b})"
    if isinstance(node, Call):
        args = [_emit(a, slots, params) for a in node.args]
        if node.name == "pow":
            return f"_f_pow({args[0]}, {args[1]})"
        return f"{_COMPILED_FN[node.name]}({args[0]})"
    raise TypeError(f"not an Ast node: {node!r}")


def compile_ast(node: Ast, n: int, params: Optional[Mapping] = None):
    """Closure f(x, u, w) evaluating the Ast; params are inlined exactly."""
    slots = {f"x{i + 1}": f"x[{i}]" for i in range(n)}
    slots["u"] = "u"
    slots["w"] = "w"
    body = _emit(node, slots, params)
    ns = dict(_COMPILE_GLOBALS)
    exec(f"def _compiled(x, u, w):\n    return {body}", ns)
    return ns["_compiled"]


# -- fields ------------------------------------------------------------

class Field:
    """Scalar field over (x1..xn, u, w), generic over float/Dual inputs.

    Wraps either a parsed expression (with bound parameters) or a plain
    Python callable f(x, u, w).  Evaluation failures surface as
    FieldEvalError with the field name in the message.
    """

    __slots__ = ("n", "name", "_ast", "_fn", "_params", "_names", "_compiled")

    def __init__(self, n: int, source, params: Optional[Mapping] = None,
                 name: str = "field"):
        self.n = n
        self.name = name
        self._params = dict(params or {})
        self._ast = None
        self._fn = None
        self._compiled = None
        if isinstance(source, str):
            ast = parse(source)
            allowed = {f"x{i + 1}" for i in range(n)} | {"u", "w"}
            allowed |= set(self._params)
            validate_identifiers(ast, allowed)
            self._ast = ast
            self._names = [f"x{i + 1}" for i in range(n)]
            self._compiled = compile_ast(ast, n, self._params)
        elif isinstance(source, (int, float)):
            self._fn = None
            self._ast = Num(float(source), (0, 0))
            self._names = []
        elif isinstance(source, Field):
            self._ast = source._ast
            self._fn = source._fn
            self._params = dict(source._params)
            self._names = getattr(source, "_names", [])
            self._compiled = source._compiled
        elif callable(source):
            self._fn = source
            self._names = []
        else:
            raise TypeError(f"cannot build a field from {type(source).__name__}")

    def _interp(self, x: Sequence, u, w):
        env = {self._names[i]: x[i] for i in range(self.n)}
        env["u"] = u
        env["w"] = w
        return eval_ast(self._ast, env, self._params)

    def __call__(self, x: Sequence, u, w):
        fn = self._compiled
        if fn is not None:
            try:
                return fn(x, u, w)
            except (ZeroDivisionError, NonFiniteError, OverflowError) as err:
                # rerun through the interpreter: same math, but it knows
                # which subexpression failed
                try:
                    self._interp(x, u, w)
                except (ExprEvalError, NonFiniteError, ZeroDivisionError) as err2:
                    raise FieldEvalError(f"{self.name}: {err2}") from err2
                raise FieldEvalError(f"{self.name}: {err}") from err
        try:
            if self._fn is not None:
                return self._fn(x, u, w)
            if isinstance(self._ast, Num):
                return self._ast.value
            return self._interp(x, u, w)
        except (ExprEvalError, NonFiniteError, ZeroDivisionError) as err:
            raise FieldEvalError(f"{self.name}: {err}") from err

    def __repr__(self):
        body = to_text(self._ast) if self._ast is not None else repr(self._fn)
        return f"Field({self.name!r}, {body})"


def as_field(source, n: int, params: Optional[Mapping] = None,
             name: str = "field") -> Field:
    """Coerce an expression string, number, callable or Field to a Field."""
    if isinstance(source, Field):
        return source
    return Field(n, source, params, name)
