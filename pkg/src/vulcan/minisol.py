"""MiniSol frontend: lexer, recursive-descent parser, AST, and pretty printer.

MiniSol is a small imperative language. Programs are a sequence of `func`
declarations; statements are variable declarations with initializer,
assignments, if/else, while loops, returns, and expression-statement calls.
Expressions never span lines, which keeps statement boundaries unambiguous
without terminators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

KEYWORDS = {"func", "var", "if", "else", "while", "return", "true", "false"}

# Designated built-in functions (name -> arity). Calls to these are library
# calls; everything else must resolve to a func declared in the same file.
BUILTIN_FUNCS = {
    "assert_nonzero": 1,
    "ext_call": 1,
    "hash": 1,
    "min": 2,
    "max": 2,
}

OPERATORS = {"+", "-", "*", "/", "%", "<", ">", "<=", ">=", "==", "!=", "&&", "||", "!", "="}

NODE_KINDS = (
    "Module", "FuncDecl", "Param", "Block", "Assign", "VarDecl", "If", "Loop",
    "Return", "ExprStmt", "Call", "BinOp", "UnaryOp", "Identifier", "IntLit",
    "BoolLit",
)

STATEMENT_KINDS = {"Assign", "VarDecl", "If", "Loop", "Return", "ExprStmt", "FuncDecl"}


class LexError(Exception):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ParseError(Exception):
    def __init__(self, message, line=None, col=None):
        loc = f"{line}:{col}: " if line is not None else ""
        super().__init__(loc + message)
        self.line = line
        self.col = col


class MultipleStatementsError(Exception):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # Identifier | Keyword | Operator | IntLiteral | BoolLiteral | Punct
    text: str
    line: int
    col: int


@dataclass(frozen=True)
class SourceProgram:
    id: str
    source: str

    @property
    def lines(self):
        return self.source.split("\n")


@dataclass(eq=False)
class AstNode:
    kind: str
    children: list = field(default_factory=list)
    line: int = 1
    op_text: str | None = None  # BinOp/UnaryOp only
    name: str | None = None  # Identifier/FuncDecl/Param/VarDecl only
    value: str | None = None  # IntLit/BoolLit only: the literal's text

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def __repr__(self):
        bits = [self.kind, f"L{self.line}"]
        if self.name is not None:
            bits.append(self.name)
        if self.op_text is not None:
            bits.append(repr(self.op_text))
        if self.value is not None:
            bits.append(self.value)
        return "<" + " ".join(bits) + ">"


@dataclass(eq=False)
class Ast:
    root: AstNode
    functions: dict  # name -> FuncDecl node
    parent_of: dict  # AstNode -> AstNode (total except root)

    def __post_init__(self):
        self._stmt_lines = None
        self._def_sites = None

    def parent(self, node):
        return self.parent_of.get(node)

    def line_count(self):
        return max(n.line for n in self.root.walk())

    def enclosing_function(self, node):
        cur = node
        while cur is not None and cur.kind != "FuncDecl":
            cur = self.parent_of.get(cur)
        return cur

    def statements_on_line(self, line):
        """Statement nodes anchored at `line`, outermost first."""
        if self._stmt_lines is None:
            table = {}
            for n in self.root.walk():
                if n.kind in STATEMENT_KINDS:
                    table.setdefault(n.line, []).append(n)
            self._stmt_lines = table
        return self._stmt_lines.get(line, [])

    def definition_sites(self, func):
        """name -> sorted list of (line, node) definition sites within func.

        Parameters count as definitions at the header line; an assignment is
        a (re-)definition of its left-hand name.
        """
        if self._def_sites is None:
            self._def_sites = {}
        cached = self._def_sites.get(func)
        if cached is not None:
            return cached
        sites = {}
        for n in func.walk():
            if n.kind == "Param":
                sites.setdefault(n.name, []).append((n.line, n))
            elif n.kind == "VarDecl":
                sites.setdefault(n.name, []).append((n.line, n))
            elif n.kind == "Assign":
                target = n.children[0]
                sites.setdefault(target.name, []).append((target.line, target))
        for name in sites:
            sites[name].sort(key=lambda pair: pair[0])
        self._def_sites[func] = sites
        return sites


_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r]+)
      | (?P<comment>//[^\n]*)
      | (?P<nl>\n)
      | (?P<int>[0-9]+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<op><=|>=|==|!=|&&|\|\||[+\-*/%<>=!])
      | (?P<punct>[(){},])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    """Lex MiniSol source into tokens with 1-based line/column positions."""
    tokens = []
    pos = 0
    line = 1
    col = 1
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group()
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(text)
        else:
            if kind == "ident":
                if text in ("true", "false"):
                    tok_kind = "BoolLiteral"
                elif text in KEYWORDS:
                    tok_kind = "Keyword"
                else:
                    tok_kind = "Identifier"
            elif kind == "int":
                tok_kind = "IntLiteral"
            elif kind == "op":
                tok_kind = "Operator"
            else:
                tok_kind = "Punct"
            tokens.append(Token(tok_kind, text, line, col))
            col += len(text)
        pos = m.end()
    return tokens


# Binary operator precedence, loosest first.
_BINOP_LEVELS = [
    {"||"},
    {"&&"},
    {"<", ">", "<=", ">=", "==", "!="},
    {"+", "-"},
    {"*", "/", "%"},
]


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset=0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at_end(self):
        return self.pos >= len(self.tokens)

    def error(self, expected):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.col + len(last.text) if last else 1
            raise ParseError(f"expected {expected}, found end of input", line, col)
        raise ParseError(f"expected {expected}, found {tok.text!r}", tok.line, tok.col)

    def expect(self, text):
        tok = self.peek()
        if tok is None or tok.text != text:
            self.error(repr(text))
        self.pos += 1
        return tok

    def expect_kind(self, kind, what):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.error(what)
        self.pos += 1
        return tok

    def parse_module(self):
        funcs = []
        while not self.at_end():
            funcs.append(self.parse_func())
        first_line = funcs[0].line if funcs else 1
        return AstNode("Module", funcs, first_line)

    def parse_func(self):
        kw = self.expect("func")
        name = self.expect_kind("Identifier", "function name")
        self.expect("(")
        params = []
        if self.peek() is not None and self.peek().text != ")":
            while True:
                p = self.expect_kind("Identifier", "parameter name")
                params.append(AstNode("Param", [], p.line, name=p.text))
                if self.peek() is not None and self.peek().text == ",":
                    self.pos += 1
                else:
                    break
        self.expect(")")
        body = self.parse_block()
        return AstNode("FuncDecl", params + [body], kw.line, name=name.text)

    def parse_block(self):
        brace = self.expect("{")
        stmts = []
        while True:
            tok = self.peek()
            if tok is None:
                self.error("'}'")
            if tok.text == "}":
                self.pos += 1
                break
            stmts.append(self.parse_statement())
        return AstNode("Block", stmts, brace.line)

    def parse_statement(self):
        tok = self.peek()
        if tok.text == "var":
            self.pos += 1
            name = self.expect_kind("Identifier", "variable name")
            self.expect("=")
            init = self.parse_expr()
            return AstNode("VarDecl", [init], tok.line, name=name.text)
        if tok.text == "if":
            return self.parse_if()
        if tok.text == "while":
            self.pos += 1
            cond = self.parse_expr()
            body = self.parse_block()
            return AstNode("Loop", [cond, body], tok.line)
        if tok.text == "return":
            self.pos += 1
            expr = self.parse_expr()
            return AstNode("Return", [expr], tok.line)
        if tok.kind == "Identifier":
            nxt = self.peek(1)
            if nxt is not None and nxt.text == "=" and nxt.kind == "Operator":
                self.pos += 2
                rhs = self.parse_expr()
                target = AstNode("Identifier", [], tok.line, name=tok.text)
                return AstNode("Assign", [target, rhs], tok.line)
            if nxt is not None and nxt.text == "(" and nxt.line == tok.line:
                call = self.parse_primary()
                if call.kind != "Call":
                    raise ParseError("only calls may be used as statements", tok.line, tok.col)
                return AstNode("ExprStmt", [call], tok.line)
        self.error("a statement")

    def parse_if(self):
        kw = self.expect("if")
        cond = self.parse_expr()
        then = self.parse_block()
        children = [cond, then]
        tok = self.peek()
        if tok is not None and tok.text == "else":
            self.pos += 1
            nxt = self.peek()
            if nxt is not None and nxt.text == "if":
                children.append(self.parse_if())
            else:
                children.append(self.parse_block())
        return AstNode("If", children, kw.line)

    def parse_expr(self):
        return self.parse_binop(0)

    def parse_binop(self, level):
        if level >= len(_BINOP_LEVELS):
            return self.parse_unary()
        node = self.parse_binop(level + 1)
        while True:
            tok = self.peek()
            if (
                tok is None
                or tok.kind != "Operator"
                or tok.text not in _BINOP_LEVELS[level]
                or tok.line != node.line
            ):
                # Expressions never span lines; a token on the next line
                # starts a new statement.
                return node
            self.pos += 1
            rhs = self.parse_binop(level + 1)
            node = AstNode("BinOp", [node, rhs], node.line, op_text=tok.text)

    def parse_unary(self):
        tok = self.peek()
        if tok is not None and tok.kind == "Operator" and tok.text in ("!", "-"):
            self.pos += 1
            operand = self.parse_unary()
            return AstNode("UnaryOp", [operand], tok.line, op_text=tok.text)
        return self.parse_primary()

    def parse_primary(self):
        tok = self.peek()
        if tok is None:
            self.error("an expression")
        if tok.kind == "IntLiteral":
            self.pos += 1
            return AstNode("IntLit", [], tok.line, value=tok.text)
        if tok.kind == "BoolLiteral":
            self.pos += 1
            return AstNode("BoolLit", [], tok.line, value=tok.text)
        if tok.text == "(":
            self.pos += 1
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.kind == "Identifier":
            self.pos += 1
            nxt = self.peek()
            if nxt is not None and nxt.text == "(" and nxt.line == tok.line:
                self.pos += 1
                args = []
                if self.peek() is not None and self.peek().text != ")":
                    while True:
                        args.append(self.parse_expr())
                        if self.peek() is not None and self.peek().text == ",":
                            self.pos += 1
                        else:
                            break
                self.expect(")")
                callee = AstNode("Identifier", [], tok.line, name=tok.text)
                return AstNode("Call", [callee] + args, tok.line)
            return AstNode("Identifier", [], tok.line, name=tok.text)
        self.error("an expression")


def _build_parent_map(root):
    parents = {}
    stack = [root]
    while stack:
        node = stack.pop()
        for child in node.children:
            parents[child] = node
            stack.append(child)
    return parents


def _check_arities(root, functions):
    for node in root.walk():
        if node.kind != "Call":
            continue
        name = node.children[0].name
        nargs = len(node.children) - 1
        expected = None
        if name in BUILTIN_FUNCS:
            expected = BUILTIN_FUNCS[name]
        elif name in functions:
            expected = sum(1 for c in functions[name].children if c.kind == "Param")
        if expected is not None and nargs != expected:
            raise ParseError(
                f"{name} expects {expected} argument(s), got {nargs}", node.line, 1
            )


def parse(tokens: list[Token]) -> Ast:
    """Parse a token stream into an Ast; raises ParseError on malformed input."""
    parser = _Parser(tokens)
    root = parser.parse_module()
    functions = {}
    for f in root.children:
        if f.name in functions:
            raise ParseError(f"function {f.name!r} declared twice", f.line, 1)
        functions[f.name] = f
    _check_arities(root, functions)
    return Ast(root, functions, _build_parent_map(root))


def parse_source(source: str) -> Ast:
    return parse(tokenize(source))


def assignments_on_line(ast: Ast, line: int):
    """The unique Assign/VarDecl statement starting on `line`, or None."""
    if not 1 <= line <= ast.line_count():
        raise ValueError(f"line {line} outside program")
    found = [s for s in ast.statements_on_line(line) if s.kind in ("Assign", "VarDecl")]
    if len(found) > 1:
        raise MultipleStatementsError(f"{len(found)} assignments start on line {line}")
    return found[0] if found else None


# --- pretty printer ---------------------------------------------------------

_PRECEDENCE = {}
for _lvl, _ops in enumerate(_BINOP_LEVELS):
    for _op in _ops:
        _PRECEDENCE[_op] = _lvl
_UNARY_PREC = len(_BINOP_LEVELS)


def _expr_text(node, parent_prec=-1):
    if node.kind == "IntLit":
        return node.value
    if node.kind == "BoolLit":
        return node.value
    if node.kind == "Identifier":
        return node.name
    if node.kind == "Call":
        args = ", ".join(_expr_text(a) for a in node.children[1:])
        return f"{node.children[0].name}({args})"
    if node.kind == "UnaryOp":
        inner = _expr_text(node.children[0], _UNARY_PREC)
        text = f"{node.op_text}{inner}"
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if node.kind == "BinOp":
        prec = _PRECEDENCE[node.op_text]
        left = _expr_text(node.children[0], prec)
        right = _expr_text(node.children[1], prec + 1)
        text = f"{left} {node.op_text} {right}"
        return f"({text})" if parent_prec > prec else text
    raise ValueError(f"not an expression node: {node.kind}")


def _stmt_lines_out(node, indent, out):
    pad = "  " * indent
    if node.kind == "VarDecl":
        out.append(f"{pad}var {node.name} = {_expr_text(node.children[0])}")
    elif node.kind == "Assign":
        out.append(f"{pad}{node.children[0].name} = {_expr_text(node.children[1])}")
    elif node.kind == "Return":
        out.append(f"{pad}return {_expr_text(node.children[0])}")
    elif node.kind == "ExprStmt":
        out.append(f"{pad}{_expr_text(node.children[0])}")
    elif node.kind == "Loop":
        out.append(f"{pad}while {_expr_text(node.children[0])} {{")
        for s in node.children[1].children:
            _stmt_lines_out(s, indent + 1, out)
        out.append(f"{pad}}}")
    elif node.kind == "If":
        cur = node
        opener = f"{pad}if "
        while True:
            out.append(f"{opener}{_expr_text(cur.children[0])} {{")
            for s in cur.children[1].children:
                _stmt_lines_out(s, indent + 1, out)
            if len(cur.children) < 3:
                break
            els = cur.children[2]
            if els.kind == "If":
                opener = f"{pad}}} else if "
                cur = els
            else:
                out.append(f"{pad}}} else {{")
                for s in els.children:
                    _stmt_lines_out(s, indent + 1, out)
                break
        out.append(f"{pad}}}")
    else:
        raise ValueError(f"not a statement node: {node.kind}")


def pretty(ast: Ast) -> str:
    """Emit canonical MiniSol text: one statement per line, 2-space indent."""
    out = []
    for func in ast.root.children:
        params = ", ".join(p.name for p in func.children if p.kind == "Param")
        out.append(f"func {func.name}({params}) {{")
        body = func.children[-1]
        for s in body.children:
            _stmt_lines_out(s, 1, out)
        out.append("}")
    return "\n".join(out)


def structurally_equal(a: AstNode, b: AstNode) -> bool:
    """Equality on (kind, name, op_text, value, child order); lines are ignored."""
    if a.kind != b.kind or a.name != b.name or a.op_text != b.op_text or a.value != b.value:
        return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))
