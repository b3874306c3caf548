"""Parser, analyzer, and printer for the SQL dialect subset used by the pipeline.

The subset is a single SELECT statement with DISTINCT, the five aggregate
functions (count, sum, avg, min, max), INNER/LEFT joins with ON equality
chains, WHERE with boolean/comparison/LIKE/IN/BETWEEN/IS NULL predicates,
GROUP BY, HAVING, ORDER BY, LIMIT, and scalar subqueries. Everything else is
rejected with an unsupported-construct error. Grammar productions are
documented in docs/sql-subset.md.

ASTs are immutable values: parsing and printing are pure, and
``parse(print_sql(parse(s)))`` is structurally equal to ``parse(s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .errors import (
    AmbiguousColumnError,
    SqlSyntaxError,
    UnknownColumnError,
    UnknownRelationError,
    UnsupportedSqlError,
)

AGGREGATE_FUNCTIONS = frozenset({"count", "sum", "avg", "min", "max"})

KEYWORDS = frozenset(
    """
    select distinct from as inner left right full cross outer natural join on
    where and or not in like between is null group by having order asc desc
    limit offset union intersect except with case when then else end over
    exists create view table primary key foreign references unique default
    check constraint
    """.split()
)

_UNSUPPORTED_KEYWORDS = {
    "union": "UNION",
    "intersect": "INTERSECT",
    "except": "EXCEPT",
    "with": "WITH (common table expression)",
    "case": "CASE expression",
    "exists": "EXISTS predicate",
}


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "keyword" | "string" | "number" | "op" | "eof"
    value: object
    line: int
    column: int

    def is_kw(self, *words: str) -> bool:
        return self.kind == "keyword" and self.value in words


_TWO_CHAR_OPS = ("<=", ">=", "!=", "<>")
_ONE_CHAR_OPS = "(),.;=<>+-*/%"


def tokenize(sql: str) -> list[Token]:
    """Tokenize SQL text; comments are skipped, identifiers keep their case."""
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(sql)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if sql[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = sql[i]
        if ch.isspace():
            advance(1)
            continue
        if sql.startswith("--", i):
            while i < n and sql[i] != "\n":
                advance(1)
            continue
        if sql.startswith("/*", i):
            end = sql.find("*/", i + 2)
            if end < 0:
                raise SqlSyntaxError("unterminated comment", line, col)
            advance(end + 2 - i)
            continue

        tok_line, tok_col = line, col

        if ch == "'":
            advance(1)
            buf = []
            while True:
                if i >= n:
                    raise SqlSyntaxError("unterminated string literal", tok_line, tok_col)
                if sql[i] == "'":
                    if i + 1 < n and sql[i + 1] == "'":
                        buf.append("'")
                        advance(2)
                        continue
                    advance(1)
                    break
                buf.append(sql[i])
                advance(1)
            tokens.append(Token("string", "".join(buf), tok_line, tok_col))
            continue

        if ch in "`\"":
            quote = ch
            advance(1)
            buf = []
            while True:
                if i >= n:
                    raise SqlSyntaxError("unterminated quoted identifier", tok_line, tok_col)
                if sql[i] == quote:
                    if i + 1 < n and sql[i + 1] == quote:
                        buf.append(quote)
                        advance(2)
                        continue
                    advance(1)
                    break
                buf.append(sql[i])
                advance(1)
            if not buf:
                raise SqlSyntaxError("empty quoted identifier", tok_line, tok_col)
            tokens.append(Token("ident", "".join(buf), tok_line, tok_col))
            continue

        if ch.isdigit() or (ch == "." and i + 1 < n and sql[i + 1].isdigit()):
            start = i
            has_dot = False
            while i < n and (sql[i].isdigit() or (sql[i] == "." and not has_dot)):
                if sql[i] == ".":
                    has_dot = True
                advance(1)
            text = sql[start:i]
            value: object = float(text) if has_dot else int(text)
            tokens.append(Token("number", value, tok_line, tok_col))
            continue

        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (sql[i].isalnum() or sql[i] == "_"):
                advance(1)
            word = sql[start:i]
            lower = word.lower()
            if lower in KEYWORDS:
                tokens.append(Token("keyword", lower, tok_line, tok_col))
            else:
                tokens.append(Token("ident", word, tok_line, tok_col))
            continue

        two = sql[i : i + 2]
        if two in _TWO_CHAR_OPS:
            advance(2)
            tokens.append(Token("op", "!=" if two == "<>" else two, tok_line, tok_col))
            continue
        if ch in _ONE_CHAR_OPS:
            advance(1)
            tokens.append(Token("op", ch, tok_line, tok_col))
            continue

        raise SqlSyntaxError(f"unexpected character {ch!r}", tok_line, tok_col)

    tokens.append(Token("eof", None, line, col))
    return tokens


# ---------------------------------------------------------------------------
# AST nodes


@dataclass(frozen=True)
class Literal:
    value: object  # int | float | str | None


NULL = Literal(None)


@dataclass(frozen=True)
class ColumnRef:
    """A (possibly unqualified) column reference; qualified form is the
    spec's relation.column pair."""

    relation: str | None
    column: str


@dataclass(frozen=True)
class Star:
    relation: str | None = None


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple = ()
    distinct: bool = False
    star: bool = False


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "not"
    operand: object


@dataclass(frozen=True)
class Binary:
    op: str  # comparison, arithmetic, "and", "or"
    left: object
    right: object


@dataclass(frozen=True)
class Like:
    expr: object
    pattern: object
    negated: bool = False


@dataclass(frozen=True)
class InList:
    expr: object
    items: tuple
    negated: bool = False


@dataclass(frozen=True)
class InSubquery:
    expr: object
    query: "QueryAst"
    negated: bool = False


@dataclass(frozen=True)
class Between:
    expr: object
    low: object
    high: object
    negated: bool = False


@dataclass(frozen=True)
class IsNull:
    expr: object
    negated: bool = False


@dataclass(frozen=True)
class ScalarSubquery:
    query: "QueryAst"


@dataclass(frozen=True)
class SelectItem:
    expr: object
    alias: str | None = None


@dataclass(frozen=True)
class TableRef:
    name: str
    alias: str | None = None

    @property
    def scope_name(self) -> str:
        return self.alias or self.name


@dataclass(frozen=True)
class JoinClause:
    join_type: str  # "inner" | "left"
    relation: str
    alias: str | None
    on_condition: object

    @property
    def scope_name(self) -> str:
        return self.alias or self.relation


@dataclass(frozen=True)
class OrderItem:
    expr: object
    direction: str = "asc"  # "asc" | "desc"


@dataclass(frozen=True)
class QueryAst:
    select_items: tuple[SelectItem, ...]
    distinct: bool = False
    from_item: TableRef | None = None
    joins: tuple[JoinClause, ...] = ()
    where_clause: object = None
    group_by: tuple = ()
    having: object = None
    order_by: tuple[OrderItem, ...] = ()
    limit: int | None = None


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def bump(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str) -> SqlSyntaxError:
        return SqlSyntaxError(message, self.cur.line, self.cur.column)

    def expect_kw(self, word: str) -> Token:
        if not self.cur.is_kw(word):
            raise self.error(f"expected {word.upper()}, got {self._describe(self.cur)}")
        return self.bump()

    def expect_op(self, op: str) -> Token:
        if not (self.cur.kind == "op" and self.cur.value == op):
            raise self.error(f"expected {op!r}, got {self._describe(self.cur)}")
        return self.bump()

    def accept_op(self, op: str) -> bool:
        if self.cur.kind == "op" and self.cur.value == op:
            self.bump()
            return True
        return False

    def accept_kw(self, *words: str) -> Token | None:
        if self.cur.is_kw(*words):
            return self.bump()
        return None

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "eof":
            return "end of input"
        return repr(tok.value)

    def expect_ident(self, what: str) -> str:
        if self.cur.kind != "ident":
            raise self.error(f"expected {what}, got {self._describe(self.cur)}")
        return self.bump().value  # type: ignore[return-value]

    def reject_unsupported_keyword(self) -> None:
        if self.cur.kind == "keyword" and self.cur.value in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedSqlError(
                _UNSUPPORTED_KEYWORDS[self.cur.value], self.cur.line, self.cur.column
            )

    # -- statements ---------------------------------------------------------

    def parse_select_statement(self) -> QueryAst:
        self.reject_unsupported_keyword()
        self.expect_kw("select")
        distinct = bool(self.accept_kw("distinct"))
        items = [self.parse_select_item()]
        while self.accept_op(","):
            items.append(self.parse_select_item())

        from_item: TableRef | None = None
        joins: list[JoinClause] = []
        if self.accept_kw("from"):
            from_item = self.parse_table_ref()
            joins = self.parse_joins()

        where = self.parse_expr() if self.accept_kw("where") else None

        group_by: list = []
        if self.accept_kw("group"):
            self.expect_kw("by")
            group_by.append(self.parse_expr())
            while self.accept_op(","):
                group_by.append(self.parse_expr())

        having = self.parse_expr() if self.accept_kw("having") else None

        order_by: list[OrderItem] = []
        if self.accept_kw("order"):
            self.expect_kw("by")
            order_by.append(self.parse_order_item())
            while self.accept_op(","):
                order_by.append(self.parse_order_item())

        limit: int | None = None
        if self.accept_kw("limit"):
            tok = self.cur
            if tok.kind != "number" or not isinstance(tok.value, int) or tok.value < 0:
                raise self.error("LIMIT expects a non-negative integer")
            self.bump()
            limit = tok.value
            if self.cur.is_kw("offset") or (self.cur.kind == "op" and self.cur.value == ","):
                raise UnsupportedSqlError("LIMIT with OFFSET", self.cur.line, self.cur.column)

        self.reject_unsupported_keyword()
        ast = QueryAst(
            select_items=tuple(items),
            distinct=distinct,
            from_item=from_item,
            joins=tuple(joins),
            where_clause=where,
            group_by=tuple(group_by),
            having=having,
            order_by=tuple(order_by),
            limit=limit,
        )
        _check_alias_uniqueness(ast)
        return ast

    def parse_select_item(self) -> SelectItem:
        if self.cur.kind == "op" and self.cur.value == "*":
            self.bump()
            return SelectItem(Star())
        if (
            self.cur.kind == "ident"
            and self.tokens[self.pos + 1].kind == "op"
            and self.tokens[self.pos + 1].value == "."
            and self.tokens[self.pos + 2].kind == "op"
            and self.tokens[self.pos + 2].value == "*"
        ):
            relation = self.bump().value
            self.bump()
            self.bump()
            return SelectItem(Star(relation))
        expr = self.parse_expr()
        alias = None
        if self.accept_kw("as"):
            alias = self.expect_ident("alias")
        elif self.cur.kind == "ident":
            alias = self.bump().value
        return SelectItem(expr, alias)

    def parse_table_ref(self) -> TableRef:
        name = self.expect_ident("table name")
        alias = None
        if self.accept_kw("as"):
            alias = self.expect_ident("alias")
        elif self.cur.kind == "ident":
            alias = self.bump().value
        return TableRef(name, alias)

    def parse_joins(self) -> list[JoinClause]:
        joins: list[JoinClause] = []
        while True:
            if self.cur.is_kw("right", "full", "cross", "natural"):
                raise UnsupportedSqlError(
                    f"{self.cur.value.upper()} JOIN", self.cur.line, self.cur.column
                )
            if self.accept_kw("inner"):
                self.expect_kw("join")
                join_type = "inner"
            elif self.accept_kw("left"):
                self.accept_kw("outer")
                self.expect_kw("join")
                join_type = "left"
            elif self.accept_kw("join"):
                join_type = "inner"
            else:
                break
            ref = self.parse_table_ref()
            self.expect_kw("on")
            on = self.parse_expr()
            _check_on_condition(on)
            joins.append(JoinClause(join_type, ref.name, ref.alias, on))
        return joins

    def parse_order_item(self) -> OrderItem:
        expr = self.parse_expr()
        direction = "asc"
        tok = self.accept_kw("asc", "desc")
        if tok is not None:
            direction = tok.value  # type: ignore[assignment]
        return OrderItem(expr, direction)

    # -- expressions --------------------------------------------------------

    def parse_expr(self):
        return self.parse_or()

    def parse_or(self):
        left = self.parse_and()
        while self.accept_kw("or"):
            left = Binary("or", left, self.parse_and())
        return left

    def parse_and(self):
        left = self.parse_not()
        while self.accept_kw("and"):
            left = Binary("and", left, self.parse_not())
        return left

    def parse_not(self):
        if self.accept_kw("not"):
            return Unary("not", self.parse_not())
        return self.parse_predicate()

    def parse_predicate(self):
        self.reject_unsupported_keyword()
        left = self.parse_additive()

        if self.cur.kind == "op" and self.cur.value in ("=", "!=", "<", "<=", ">", ">="):
            op = self.bump().value
            return Binary(op, left, self.parse_additive())  # type: ignore[arg-type]

        if self.accept_kw("is"):
            negated = bool(self.accept_kw("not"))
            self.expect_kw("null")
            return IsNull(left, negated)

        negated = bool(self.accept_kw("not"))
        if self.accept_kw("like"):
            return Like(left, self.parse_additive(), negated)
        if self.accept_kw("between"):
            low = self.parse_additive()
            self.expect_kw("and")
            return Between(left, low, self.parse_additive(), negated)
        if self.accept_kw("in"):
            self.expect_op("(")
            if self.cur.is_kw("select"):
                query = self.parse_select_statement()
                self.expect_op(")")
                return InSubquery(left, query, negated)
            items = [self.parse_expr()]
            while self.accept_op(","):
                items.append(self.parse_expr())
            self.expect_op(")")
            return InList(left, tuple(items), negated)
        if negated:
            raise self.error("expected LIKE, BETWEEN or IN after NOT")
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.cur.kind == "op" and self.cur.value in ("+", "-"):
            op = self.bump().value
            left = Binary(op, left, self.parse_multiplicative())  # type: ignore[arg-type]
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.cur.kind == "op" and self.cur.value in ("*", "/", "%"):
            op = self.bump().value
            left = Binary(op, left, self.parse_unary())  # type: ignore[arg-type]
        return left

    def parse_unary(self):
        if self.cur.kind == "op" and self.cur.value == "-":
            self.bump()
            return Unary("-", self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.cur
        if tok.kind == "number":
            self.bump()
            return Literal(tok.value)
        if tok.kind == "string":
            self.bump()
            return Literal(tok.value)
        if tok.is_kw("null"):
            self.bump()
            return NULL
        if tok.kind == "op" and tok.value == "(":
            self.bump()
            if self.cur.is_kw("select"):
                query = self.parse_select_statement()
                self.expect_op(")")
                return ScalarSubquery(query)
            inner = self.parse_expr()
            self.expect_op(")")
            return inner
        if tok.kind == "ident":
            nxt = self.tokens[self.pos + 1]
            if nxt.kind == "op" and nxt.value == "(":
                return self.parse_func_call()
            name = self.bump().value
            if self.accept_op("."):
                column = self.expect_ident("column name")
                return ColumnRef(name, column)
            return ColumnRef(None, name)
        self.reject_unsupported_keyword()
        raise self.error(f"unexpected token {self._describe(tok)} in expression")

    def parse_func_call(self):
        name_tok = self.bump()
        name = str(name_tok.value).lower()
        if name not in AGGREGATE_FUNCTIONS:
            raise UnsupportedSqlError(
                f"function {name}", name_tok.line, name_tok.column
            )
        self.expect_op("(")
        if self.cur.kind == "op" and self.cur.value == "*":
            self.bump()
            self.expect_op(")")
            call = FuncCall(name, star=True)
        else:
            distinct = bool(self.accept_kw("distinct"))
            args = [self.parse_expr()]
            while self.accept_op(","):
                args.append(self.parse_expr())
            self.expect_op(")")
            call = FuncCall(name, tuple(args), distinct=distinct)
        if self.cur.is_kw("over"):
            raise UnsupportedSqlError("window function", self.cur.line, self.cur.column)
        return call


def _check_on_condition(expr) -> None:
    """ON conditions are equality chains: col = col joined by AND."""
    if isinstance(expr, Binary):
        if expr.op == "=":
            return
        if expr.op == "and":
            _check_on_condition(expr.left)
            _check_on_condition(expr.right)
            return
    raise UnsupportedSqlError("non-equality join condition")


def _check_alias_uniqueness(ast: QueryAst) -> None:
    seen: set[str] = set()
    names: list[str] = []
    if ast.from_item is not None:
        names.append(ast.from_item.scope_name)
    names.extend(j.scope_name for j in ast.joins)
    for name in names:
        key = name.casefold()
        if key in seen:
            raise SqlSyntaxError(f"duplicate relation alias {name!r} in FROM/JOIN scope")
        seen.add(key)


def parse(sql: str, dialect: str = "sqlite") -> QueryAst:
    """Parse a single SELECT statement in the supported subset.

    Raises SqlSyntaxError with position information on malformed input and
    UnsupportedSqlError naming the construct for recognized-but-unsupported
    SQL (set operations, CTEs, window functions, ...).
    """
    if dialect != "sqlite":
        raise UnsupportedSqlError(f"dialect {dialect}")
    parser = _Parser(tokenize(sql))
    ast = parser.parse_select_statement()
    parser.accept_op(";")
    if parser.cur.kind != "eof":
        parser.reject_unsupported_keyword()
        raise parser.error(f"trailing input after statement: {parser._describe(parser.cur)}")
    return ast


def parse_create_view(sql: str) -> tuple[str, QueryAst]:
    """Parse ``CREATE VIEW name AS <select>`` and return (name, body)."""
    parser = _Parser(tokenize(sql))
    parser.expect_kw("create")
    parser.expect_kw("view")
    name = parser.expect_ident("view name")
    parser.expect_kw("as")
    body = parser.parse_select_statement()
    parser.accept_op(";")
    if parser.cur.kind != "eof":
        raise parser.error("trailing input after CREATE VIEW statement")
    return name, body


def split_statements(sql: str) -> list[str]:
    """Split a script into statements on semicolons outside quotes/comments."""
    statements: list[str] = []
    depth_chars = {"'": "'", "`": "`", '"': '"'}
    buf: list[str] = []
    i, n = 0, len(sql)
    while i < n:
        ch = sql[i]
        if ch in depth_chars:
            close = depth_chars[ch]
            buf.append(ch)
            i += 1
            while i < n:
                buf.append(sql[i])
                if sql[i] == close:
                    if i + 1 < n and sql[i + 1] == close:
                        buf.append(sql[i + 1])
                        i += 2
                        continue
                    i += 1
                    break
                i += 1
            continue
        if sql.startswith("--", i):
            while i < n and sql[i] != "\n":
                i += 1
            continue
        if ch == ";":
            text = "".join(buf).strip()
            if text:
                statements.append(text)
            buf = []
            i += 1
            continue
        buf.append(ch)
        i += 1
    text = "".join(buf).strip()
    if text:
        statements.append(text)
    return statements


# ---------------------------------------------------------------------------
# Printer

_PRECEDENCE = {
    "or": 1,
    "and": 2,
    "=": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_PREDICATE_PRECEDENCE = 4
_NOT_PRECEDENCE = 3
_UNARY_MINUS_PRECEDENCE = 7
_PRIMARY_PRECEDENCE = 9


def quote_ident(name: str) -> str:
    return "`" + name.replace("`", "``") + "`"


def _quote_string(value: str) -> str:
    return "'" + value.replace("'", "''") + "'"


def _expr_precedence(expr) -> int:
    if isinstance(expr, Binary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _NOT_PRECEDENCE if expr.op == "not" else _UNARY_MINUS_PRECEDENCE
    if isinstance(expr, (Like, InList, InSubquery, Between, IsNull)):
        return _PREDICATE_PRECEDENCE
    return _PRIMARY_PRECEDENCE


def _print_child(expr, parent_prec: int, right_side: bool = False) -> str:
    text = print_expr(expr)
    child_prec = _expr_precedence(expr)
    if child_prec < parent_prec or (right_side and child_prec == parent_prec):
        return f"({text})"
    return text


def print_expr(expr) -> str:
    """Render an expression in canonical form (backticked identifiers,
    lowercase keywords, minimal parentheses)."""
    if isinstance(expr, Literal):
        if expr.value is None:
            return "null"
        if isinstance(expr.value, str):
            return _quote_string(expr.value)
        if isinstance(expr.value, float):
            return repr(expr.value)
        return str(expr.value)
    if isinstance(expr, ColumnRef):
        if expr.relation:
            return f"{quote_ident(expr.relation)}.{quote_ident(expr.column)}"
        return quote_ident(expr.column)
    if isinstance(expr, Star):
        return f"{quote_ident(expr.relation)}.*" if expr.relation else "*"
    if isinstance(expr, FuncCall):
        if expr.star:
            return f"{expr.name}(*)"
        inner = ", ".join(print_expr(a) for a in expr.args)
        if expr.distinct:
            inner = f"distinct {inner}"
        return f"{expr.name}({inner})"
    if isinstance(expr, Unary):
        if expr.op == "not":
            return f"not {_print_child(expr.operand, _NOT_PRECEDENCE)}"
        return f"-{_print_child(expr.operand, _UNARY_MINUS_PRECEDENCE)}"
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        left = _print_child(expr.left, prec)
        right = _print_child(expr.right, prec, right_side=True)
        return f"{left} {expr.op} {right}"
    if isinstance(expr, Like):
        kw = "not like" if expr.negated else "like"
        return (
            f"{_print_child(expr.expr, _PREDICATE_PRECEDENCE)} {kw} "
            f"{_print_child(expr.pattern, _PREDICATE_PRECEDENCE, right_side=True)}"
        )
    if isinstance(expr, InList):
        kw = "not in" if expr.negated else "in"
        items = ", ".join(print_expr(item) for item in expr.items)
        return f"{_print_child(expr.expr, _PREDICATE_PRECEDENCE)} {kw} ({items})"
    if isinstance(expr, InSubquery):
        kw = "not in" if expr.negated else "in"
        return f"{_print_child(expr.expr, _PREDICATE_PRECEDENCE)} {kw} ({print_sql(expr.query)})"
    if isinstance(expr, Between):
        kw = "not between" if expr.negated else "between"
        return (
            f"{_print_child(expr.expr, _PREDICATE_PRECEDENCE)} {kw} "
            f"{_print_child(expr.low, _PREDICATE_PRECEDENCE, right_side=True)} and "
            f"{_print_child(expr.high, _PREDICATE_PRECEDENCE, right_side=True)}"
        )
    if isinstance(expr, IsNull):
        kw = "is not null" if expr.negated else "is null"
        return f"{_print_child(expr.expr, _PREDICATE_PRECEDENCE)} {kw}"
    if isinstance(expr, ScalarSubquery):
        return f"({print_sql(expr.query)})"
    raise TypeError(f"cannot print expression of type {type(expr).__name__}")


def print_sql(ast: QueryAst) -> str:
    """Render an AST as a canonical single-line SELECT statement.

    Deterministic whitespace, backtick quoting, lowercase keywords;
    ``parse(print_sql(a))`` is structurally equal to ``a``.
    """
    _check_alias_uniqueness(ast)
    parts = ["select"]
    if ast.distinct:
        parts.append("distinct")
    rendered_items = []
    for item in ast.select_items:
        text = print_expr(item.expr)
        if item.alias:
            text += f" as {quote_ident(item.alias)}"
        rendered_items.append(text)
    parts.append(", ".join(rendered_items))
    if ast.from_item is not None:
        parts.append("from")
        parts.append(_print_table_ref(ast.from_item.name, ast.from_item.alias))
        for join in ast.joins:
            parts.append("inner join" if join.join_type == "inner" else "left join")
            parts.append(_print_table_ref(join.relation, join.alias))
            parts.append("on")
            parts.append(print_expr(join.on_condition))
    if ast.where_clause is not None:
        parts.append("where")
        parts.append(print_expr(ast.where_clause))
    if ast.group_by:
        parts.append("group by")
        parts.append(", ".join(print_expr(e) for e in ast.group_by))
    if ast.having is not None:
        parts.append("having")
        parts.append(print_expr(ast.having))
    if ast.order_by:
        parts.append("order by")
        rendered = []
        for item in ast.order_by:
            text = print_expr(item.expr)
            if item.direction == "desc":
                text += " desc"
            rendered.append(text)
        parts.append(", ".join(rendered))
    if ast.limit is not None:
        parts.append(f"limit {ast.limit}")
    return " ".join(parts)


def _print_table_ref(name: str, alias: str | None) -> str:
    if alias and alias != name:
        return f"{quote_ident(name)} as {quote_ident(alias)}"
    return quote_ident(name)


# ---------------------------------------------------------------------------
# Analysis

def count_joins(ast: QueryAst) -> int:
    """Number of JOIN clauses at the top query level (FROM base not counted)."""
    return len(ast.joins)


def referenced_relations(ast: QueryAst) -> set[str]:
    """All relation scope names (aliases where aliased) referenced by the
    statement, including inside subqueries."""
    names: set[str] = set()

    def visit_query(q: QueryAst) -> None:
        if q.from_item is not None:
            names.add(q.from_item.scope_name)
        for join in q.joins:
            names.add(join.scope_name)
            visit_expr(join.on_condition)
        for item in q.select_items:
            visit_expr(item.expr)
        visit_expr(q.where_clause)
        for e in q.group_by:
            visit_expr(e)
        visit_expr(q.having)
        for o in q.order_by:
            visit_expr(o.expr)

    def visit_expr(expr) -> None:
        if expr is None:
            return
        if isinstance(expr, (ScalarSubquery,)):
            visit_query(expr.query)
        elif isinstance(expr, InSubquery):
            visit_expr(expr.expr)
            visit_query(expr.query)
        else:
            for child in iter_children(expr):
                visit_expr(child)

    visit_query(ast)
    return names


def referenced_base_tables(ast: QueryAst) -> set[str]:
    """Base relation names underlying every FROM/JOIN entry, subqueries included."""
    tables: set[str] = set()

    def visit_query(q: QueryAst) -> None:
        if q.from_item is not None:
            tables.add(q.from_item.name)
        for join in q.joins:
            tables.add(join.relation)
        for expr in iter_query_exprs(q):
            visit_expr(expr)

    def visit_expr(expr) -> None:
        if isinstance(expr, ScalarSubquery):
            visit_query(expr.query)
        elif isinstance(expr, InSubquery):
            visit_query(expr.query)
            visit_expr(expr.expr)
        else:
            for child in iter_children(expr):
                visit_expr(child)

    visit_query(ast)
    return tables


def iter_children(expr) -> Iterable:
    """Immediate sub-expressions of an expression node."""
    if isinstance(expr, Unary):
        yield expr.operand
    elif isinstance(expr, Binary):
        yield expr.left
        yield expr.right
    elif isinstance(expr, Like):
        yield expr.expr
        yield expr.pattern
    elif isinstance(expr, InList):
        yield expr.expr
        yield from expr.items
    elif isinstance(expr, Between):
        yield expr.expr
        yield expr.low
        yield expr.high
    elif isinstance(expr, IsNull):
        yield expr.expr
    elif isinstance(expr, FuncCall):
        yield from expr.args


def iter_query_exprs(q: QueryAst) -> Iterable:
    """Every top-level expression slot of a query, in clause order."""
    for item in q.select_items:
        yield item.expr
    for join in q.joins:
        yield join.on_condition
    if q.where_clause is not None:
        yield q.where_clause
    yield from q.group_by
    if q.having is not None:
        yield q.having
    for o in q.order_by:
        yield o.expr


def iter_column_refs(expr) -> Iterable[ColumnRef]:
    """All column references in an expression, not descending into subqueries."""
    if isinstance(expr, ColumnRef):
        yield expr
        return
    if isinstance(expr, (ScalarSubquery, InSubquery)):
        if isinstance(expr, InSubquery):
            yield from iter_column_refs(expr.expr)
        return
    for child in iter_children(expr):
        yield from iter_column_refs(child)


# ---------------------------------------------------------------------------
# Column qualification

class _Scope:
    """Relation scope for one SELECT, chained to the enclosing scope."""

    def __init__(
        self,
        query: QueryAst,
        catalog: Mapping[str, Sequence[str]],
        parent: "_Scope | None" = None,
    ):
        self.parent = parent
        self.catalog_lookup = {name.casefold(): name for name in catalog}
        self.catalog = catalog
        self.relations: dict[str, str] = {}  # casefolded scope name -> display name
        self.columns: dict[str, list[str]] = {}  # casefolded scope name -> columns
        entries: list[tuple[str, str]] = []
        if query.from_item is not None:
            entries.append((query.from_item.scope_name, query.from_item.name))
        for join in query.joins:
            entries.append((join.scope_name, join.relation))
        for scope_name, relation in entries:
            rel_key = relation.casefold()
            if rel_key not in self.catalog_lookup:
                raise UnknownRelationError(f"unknown relation {relation!r}")
            canonical = self.catalog_lookup[rel_key]
            self.relations[scope_name.casefold()] = scope_name
            self.columns[scope_name.casefold()] = list(catalog[canonical])

    def scope_names_in_order(self, query: QueryAst) -> list[str]:
        names = []
        if query.from_item is not None:
            names.append(query.from_item.scope_name)
        names.extend(j.scope_name for j in query.joins)
        return names

    def resolve_qualified(self, relation: str, column: str) -> ColumnRef:
        key = relation.casefold()
        scope: _Scope | None = self
        while scope is not None:
            if key in scope.relations:
                cols = scope.columns[key]
                for col in cols:
                    if col.casefold() == column.casefold():
                        return ColumnRef(scope.relations[key], col)
                raise UnknownColumnError(
                    f"unknown column {relation}.{column}: "
                    f"relation {relation!r} exposes no column {column!r}"
                )
            scope = scope.parent
        raise UnknownRelationError(f"unknown relation {relation!r} in column reference")

    def resolve_unqualified(self, column: str) -> ColumnRef:
        scope: _Scope | None = self
        while scope is not None:
            matches = []
            for key, display in scope.relations.items():
                for col in scope.columns[key]:
                    if col.casefold() == column.casefold():
                        matches.append((display, col))
                        break
            if len(matches) == 1:
                return ColumnRef(matches[0][0], matches[0][1])
            if len(matches) > 1:
                rels = ", ".join(sorted(m[0] for m in matches))
                raise AmbiguousColumnError(
                    f"ambiguous column {column!r}: exposed by relations {rels}"
                )
            scope = scope.parent
        raise UnknownColumnError(f"unknown column {column!r}: not exposed by any in-scope relation")


def qualify_columns(ast: QueryAst, catalog: Mapping[str, Sequence[str]]) -> QueryAst:
    """Resolve every column reference to a qualified relation.column pair.

    ``catalog`` maps relation names to their ordered column lists. Unqualified
    names resolve to the unique in-scope relation exposing them; two
    candidates raise AmbiguousColumnError, zero raise UnknownColumnError.
    ``*`` and ``t.*`` select items expand to explicit columns. Identifiers in
    GROUP BY / HAVING / ORDER BY that match a select alias resolve to that
    item's expression. Idempotent.
    """
    return _qualify_query(ast, catalog, None)


def _qualify_query(
    query: QueryAst, catalog: Mapping[str, Sequence[str]], parent: _Scope | None
) -> QueryAst:
    scope = _Scope(query, catalog, parent)

    def qualify_expr(expr):
        if expr is None or isinstance(expr, Literal):
            return expr
        if isinstance(expr, ColumnRef):
            if expr.relation is not None:
                return scope.resolve_qualified(expr.relation, expr.column)
            return scope.resolve_unqualified(expr.column)
        if isinstance(expr, Star):
            raise UnknownColumnError("star is only valid as a select item or in count(*)")
        if isinstance(expr, Unary):
            return Unary(expr.op, qualify_expr(expr.operand))
        if isinstance(expr, Binary):
            return Binary(expr.op, qualify_expr(expr.left), qualify_expr(expr.right))
        if isinstance(expr, Like):
            return Like(qualify_expr(expr.expr), qualify_expr(expr.pattern), expr.negated)
        if isinstance(expr, InList):
            return InList(
                qualify_expr(expr.expr),
                tuple(qualify_expr(i) for i in expr.items),
                expr.negated,
            )
        if isinstance(expr, InSubquery):
            return InSubquery(
                qualify_expr(expr.expr),
                _qualify_query(expr.query, catalog, scope),
                expr.negated,
            )
        if isinstance(expr, Between):
            return Between(
                qualify_expr(expr.expr),
                qualify_expr(expr.low),
                qualify_expr(expr.high),
                expr.negated,
            )
        if isinstance(expr, IsNull):
            return IsNull(qualify_expr(expr.expr), expr.negated)
        if isinstance(expr, ScalarSubquery):
            return ScalarSubquery(_qualify_query(expr.query, catalog, scope))
        if isinstance(expr, FuncCall):
            if expr.star:
                return expr
            return FuncCall(
                expr.name,
                tuple(qualify_expr(a) for a in expr.args),
                expr.distinct,
                expr.star,
            )
        raise TypeError(f"cannot qualify expression of type {type(expr).__name__}")

    select_items: list[SelectItem] = []
    for item in query.select_items:
        if isinstance(item.expr, Star):
            star = item.expr
            if star.relation is not None:
                key = star.relation.casefold()
                if key not in scope.relations:
                    raise UnknownRelationError(
                        f"unknown relation {star.relation!r} in star expansion"
                    )
                targets = [scope.relations[key]]
            else:
                targets = scope.scope_names_in_order(query)
                if not targets:
                    raise UnknownColumnError("cannot expand * without a FROM clause")
            for target in targets:
                for col in scope.columns[target.casefold()]:
                    select_items.append(SelectItem(ColumnRef(target, col)))
        else:
            select_items.append(SelectItem(qualify_expr(item.expr), item.alias))

    aliases = {
        item.alias.casefold(): item.expr
        for item in select_items
        if item.alias is not None
    }

    def qualify_output_expr(expr):
        # GROUP BY / HAVING / ORDER BY may name a select alias instead of a
        # source column; substitute the aliased expression.
        if isinstance(expr, ColumnRef) and expr.relation is None:
            key = expr.column.casefold()
            try:
                return scope.resolve_unqualified(expr.column)
            except UnknownColumnError:
                if key in aliases:
                    return aliases[key]
                raise
        return qualify_expr(expr)

    return QueryAst(
        select_items=tuple(select_items),
        distinct=query.distinct,
        from_item=query.from_item,
        joins=tuple(
            JoinClause(j.join_type, j.relation, j.alias, qualify_expr(j.on_condition))
            for j in query.joins
        ),
        where_clause=qualify_expr(query.where_clause),
        group_by=tuple(qualify_output_expr(e) for e in query.group_by),
        having=qualify_output_expr(query.having) if query.having is not None else None,
        order_by=tuple(
            OrderItem(qualify_output_expr(o.expr), o.direction) for o in query.order_by
        ),
        limit=query.limit,
    )


def conjuncts(expr) -> list:
    """Flatten a WHERE clause into its top-level AND conjuncts."""
    if expr is None:
        return []
    if isinstance(expr, Binary) and expr.op == "and":
        return conjuncts(expr.left) + conjuncts(expr.right)
    return [expr]


__all__ = [
    "AGGREGATE_FUNCTIONS",
    "Between",
    "Binary",
    "ColumnRef",
    "FuncCall",
    "InList",
    "InSubquery",
    "IsNull",
    "JoinClause",
    "Like",
    "Literal",
    "NULL",
    "OrderItem",
    "QueryAst",
    "ScalarSubquery",
    "SelectItem",
    "Star",
    "TableRef",
    "Unary",
    "conjuncts",
    "count_joins",
    "iter_children",
    "iter_column_refs",
    "iter_query_exprs",
    "parse",
    "parse_create_view",
    "print_expr",
    "print_sql",
    "qualify_columns",
    "quote_ident",
    "referenced_base_tables",
    "referenced_relations",
    "split_statements",
    "tokenize",
]
