"""Dependence extraction: token classification, most-recent-definition
end-points, and direction-annotated AST paths between a use and its
definition.

A path records only (node kind, direction) steps, never identifier text, so
consistently renaming identifiers leaves every path unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .minisol import Ast, AstNode, BUILTIN_FUNCS

UP = "U"
DOWN = "D"

MAX_TOKENS_PER_LINE = 16
MAX_PATH_LEN = 32

# Token classes
OPERATOR = "Operator"
BUILTIN_FUNC = "BuiltinFunc"
USER_FUNC = "UserFunc"
VARIABLE = "Variable"


class NotAnAssignment(Exception):
    pass


class UnknownCallee(Exception):
    pass


@dataclass(eq=False)
class TokenOccurrence:
    text: str
    cls: str
    node: AstNode
    line: int


@dataclass
class TokenOneHot:
    """Stand-in returned by get_path for operator/builtin tokens."""

    text: str
    is_builtin: bool


@dataclass
class AstPath:
    steps: list  # [(kind, UP|DOWN), ...], ascent then descent
    truncated: bool = False


@dataclass
class Vocab:
    operator_vocab: dict = field(default_factory=dict)
    builtin_vocab: dict = field(default_factory=dict)
    node_kind_vocab: dict = field(default_factory=dict)  # (kind, dir) -> index

    @property
    def operator_unk(self):
        return len(self.operator_vocab)

    @property
    def builtin_unk(self):
        return len(self.builtin_vocab)

    @property
    def node_kind_unk(self):
        return len(self.node_kind_vocab)

    @property
    def n_onehot(self):
        # Combined one-hot space: operators (incl. UNK) then builtins (incl. UNK).
        return len(self.operator_vocab) + 1 + len(self.builtin_vocab) + 1

    @property
    def n_node_kinds(self):
        return len(self.node_kind_vocab) + 1

    def onehot_index(self, tok: TokenOneHot) -> int:
        n_ops = len(self.operator_vocab) + 1
        if tok.is_builtin:
            return n_ops + self.builtin_vocab.get(tok.text, self.builtin_unk)
        return self.operator_vocab.get(tok.text, self.operator_unk)

    def to_dict(self):
        return {
            "operators": self.operator_vocab,
            "builtins": self.builtin_vocab,
            "node_kinds": {f"{k}|{d}": i for (k, d), i in self.node_kind_vocab.items()},
        }

    @classmethod
    def from_dict(cls, d):
        kinds = {}
        for key, i in d["node_kinds"].items():
            kind, direction = key.rsplit("|", 1)
            kinds[(kind, direction)] = i
        return cls(dict(d["operators"]), dict(d["builtins"]), kinds)


def _occurrence_for_call(node, ast):
    name = node.children[0].name
    if name in BUILTIN_FUNCS:
        return TokenOccurrence(name, BUILTIN_FUNC, node, node.line)
    if name in ast.functions:
        return TokenOccurrence(name, USER_FUNC, node.children[0], node.line)
    raise UnknownCallee(f"call to {name!r} on line {node.line} is neither builtin nor declared")


def _walk_expr(node, ast, out):
    """Collect occurrences in source order: operators between/before operands,
    call names ahead of their arguments."""
    if node.kind == "Identifier":
        out.append(TokenOccurrence(node.name, VARIABLE, node, node.line))
    elif node.kind == "BinOp":
        _walk_expr(node.children[0], ast, out)
        out.append(TokenOccurrence(node.op_text, OPERATOR, node, node.line))
        _walk_expr(node.children[1], ast, out)
    elif node.kind == "UnaryOp":
        out.append(TokenOccurrence(node.op_text, OPERATOR, node, node.line))
        _walk_expr(node.children[0], ast, out)
    elif node.kind == "Call":
        out.append(_occurrence_for_call(node, ast))
        for arg in node.children[1:]:
            _walk_expr(arg, ast, out)
    # IntLit/BoolLit carry no define/context pair.


def _rhs_expr(stmt):
    if stmt.kind == "Assign":
        return stmt.children[1]
    if stmt.kind == "VarDecl":
        return stmt.children[0]
    if stmt.kind == "Return":
        return stmt.children[0]
    return None


def rhs_tokens(ast: Ast, line: int) -> list[TokenOccurrence]:
    """Operators, builtin/user calls, and variable reads right of '=' on `line`,
    left to right, capped at MAX_TOKENS_PER_LINE (excess dropped from the right)."""
    from .minisol import assignments_on_line

    stmt = assignments_on_line(ast, line)
    if stmt is None:
        raise NotAnAssignment(f"line {line} hosts no assignment")
    out = []
    _walk_expr(_rhs_expr(stmt), ast, out)
    return out[:MAX_TOKENS_PER_LINE]


def tokens_for_line(ast: Ast, line: int) -> list[TokenOccurrence]:
    """Like rhs_tokens but total over any line: return statements contribute
    their expression, other lines contribute no tokens. Needed because the
    recursive line representation visits return lines (user-function
    end-points) and, under the prev-line variant, arbitrary lines."""
    stmts = ast.statements_on_line(line)
    expr = None
    for stmt in stmts:
        expr = _rhs_expr(stmt)
        if expr is not None:
            break
    if expr is None:
        return []
    out = []
    _walk_expr(expr, ast, out)
    return out[:MAX_TOKENS_PER_LINE]


def classify_token(occ: TokenOccurrence, ast: Ast) -> str:
    if occ.node.kind in ("BinOp", "UnaryOp"):
        return OPERATOR
    if occ.node.kind == "Call":
        name = occ.node.children[0].name
        if name in BUILTIN_FUNCS:
            return BUILTIN_FUNC
        if name in ast.functions:
            return USER_FUNC
        raise UnknownCallee(f"call to {name!r} is neither builtin nor declared")
    if occ.node.kind == "Identifier" and occ.text in ast.functions:
        parent = ast.parent(occ.node)
        if parent is not None and parent.kind == "Call" and parent.children[0] is occ.node:
            return USER_FUNC
    return VARIABLE


def resolve_endpoint(occ: TokenOccurrence, line: int, ast: Ast):
    """Most recent definition line of `occ` before `line`, or None.

    Variables resolve by textual backward scan within the enclosing function
    (parameters count at the header line; loop back-edges are not followed).
    User-function tokens resolve to the last return statement of the callee.
    """
    if occ.cls == USER_FUNC:
        callee = ast.functions.get(occ.text)
        if callee is None:
            return None
        returns = [n for n in callee.walk() if n.kind == "Return"]
        if not returns:
            return None
        return max(n.line for n in returns)
    if occ.cls != VARIABLE:
        return None
    func = ast.enclosing_function(occ.node)
    if func is None:
        return None
    sites = ast.definition_sites(func).get(occ.text)
    if not sites:
        return None
    best = None
    for site_line, _node in sites:
        if site_line < line:
            best = site_line
        else:
            break
    return best


def _defining_node(ast: Ast, func, name: str, line: int):
    for site_line, node in ast.definition_sites(func).get(name, []):
        if site_line == line:
            return node
    return None


def _ancestry(ast: Ast, node):
    chain = [node]
    cur = node
    while True:
        parent = ast.parent(cur)
        if parent is None:
            return chain
        chain.append(parent)
        cur = parent


def path_between_nodes(ast: Ast, start: AstNode, target: AstNode) -> AstPath:
    """Direction-annotated path from `start` up to the lowest common ancestor
    (inclusive, tagged UP) and down to `target` (tagged DOWN)."""
    if start is target:
        return AstPath([(start.kind, UP)])
    up_chain = _ancestry(ast, start)
    down_chain = _ancestry(ast, target)
    up_set = {id(n): i for i, n in enumerate(up_chain)}
    lca_down_idx = None
    for i, n in enumerate(down_chain):
        if id(n) in up_set:
            lca_down_idx = i
            break
    assert lca_down_idx is not None, "nodes of one module always share an ancestor"
    lca_up_idx = up_set[id(down_chain[lca_down_idx])]
    steps = [(n.kind, UP) for n in up_chain[: lca_up_idx + 1]]
    steps += [(n.kind, DOWN) for n in reversed(down_chain[:lca_down_idx])]
    return AstPath(steps)


def extract_ast_path(occ: TokenOccurrence, endpoint: int, ast: Ast) -> AstPath:
    """Path from the occurrence to its defining occurrence on line `endpoint`
    (for user functions: to the callee's return node)."""
    if occ.cls == USER_FUNC:
        callee = ast.functions[occ.text]
        target = None
        for n in callee.walk():
            if n.kind == "Return" and n.line == endpoint:
                target = n
        assert target is not None, "user-function end-point must be a return line"
        return path_between_nodes(ast, occ.node, target)
    func = ast.enclosing_function(occ.node)
    target = _defining_node(ast, func, occ.text, endpoint)
    assert target is not None, "end-point line must define the token"
    return path_between_nodes(ast, occ.node, target)


def get_path(occ: TokenOccurrence, line: int, ast: Ast, prev_line: bool = False):
    """(end-point, path) for one token occurrence.

    Operators and builtin calls yield (None, TokenOneHot). Variables and
    user-function calls yield (end-point line, AstPath), or (None, None) when
    no definition exists. With prev_line=True the end-point is forced to
    line-1 and the path targets that line's statement node.
    """
    if occ.cls == OPERATOR:
        return None, TokenOneHot(occ.text, False)
    if occ.cls == BUILTIN_FUNC:
        return None, TokenOneHot(occ.node.children[0].name, True)
    if prev_line:
        if line <= 1:
            return None, None
        stmts = ast.statements_on_line(line - 1)
        if not stmts:
            return None, None
        return line - 1, path_between_nodes(ast, occ.node, stmts[0])
    endpoint = resolve_endpoint(occ, line, ast)
    if endpoint is None:
        return None, None
    return endpoint, extract_ast_path(occ, endpoint, ast)


def encode_path(path: AstPath, vocab: Vocab):
    """Map steps to (kind, direction) indices, UNK for unseen pairs; paths
    longer than MAX_PATH_LEN keep the first 16 and last 16 steps."""
    idx = [vocab.node_kind_vocab.get(step, vocab.node_kind_unk) for step in path.steps]
    if len(idx) > MAX_PATH_LEN:
        half = MAX_PATH_LEN // 2
        return idx[:half] + idx[-half:], True
    return idx, False


def build_vocabs(programs) -> Vocab:
    """Vocabularies over operators, builtins, and (kind, direction) pairs
    observed in the training programs' extraction output; UNK appended to each.

    `programs` is an iterable of (ast, lines-of-interest) pairs.
    """
    ops = set()
    builtins = set()
    kinds = set()
    for ast, lines in programs:
        for line in lines:
            for occ in tokens_for_line(ast, line):
                ep, pth = get_path(occ, line, ast)
                if isinstance(pth, TokenOneHot):
                    (builtins if pth.is_builtin else ops).add(pth.text)
                elif pth is not None:
                    kinds.update(pth.steps)
    vocab = Vocab()
    for i, op in enumerate(sorted(ops)):
        vocab.operator_vocab[op] = i
    for i, b in enumerate(sorted(builtins)):
        vocab.builtin_vocab[b] = i
    for i, pair in enumerate(sorted(kinds)):
        vocab.node_kind_vocab[pair] = i
    return vocab
