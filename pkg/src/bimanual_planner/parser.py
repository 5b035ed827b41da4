"""Tokenizer and recursive-descent parser for the supported planning-language subset.

Both entry points are pure functions of the source text.  All failures are
reported by raising :class:`ParseError` carrying the 1-based line/column of
the first offending token; there is no error recovery, so the message can be
fed back verbatim to whatever produced the text.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ROOT_TYPE,
    ActionSchema,
    Domain,
    EqualityConstraint,
    Literal,
    PredicateSchema,
    Problem,
    TypeName,
)

SUPPORTED_REQUIREMENTS = {
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":equality",
}

# Characters allowed inside identifiers/keywords. '-' doubles as the typed-list
# separator when it stands alone.
_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789_-=")


class ParseError(Exception):
    """A positioned lexical, syntax or semantic error (first error only)."""

    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int

    @property
    def lower(self) -> str:
        return self.text.lower()


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and src[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(_Token(ch, line, col))
            col += 1
            i += 1
        else:
            start, start_col = i, col
            while i < n and src[i] not in " \t\r\n();":
                i += 1
                col += 1
            word = src[start:i]
            body = word[1:] if word[0] in "?:" else word
            if not body or any(c not in _NAME_CHARS for c in body.lower()):
                raise ParseError(f"lexical error: bad token '{word}'", line, start_col)
            tokens.append(_Token(word, line, start_col))
    return tokens


class _TokenStream:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expected: str) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 1, 1)
            raise ParseError(
                f"syntax error: unexpected end of input, expected {expected}",
                last.line,
                last.column,
                expected,
            )
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next(f"'{text}'")
        if tok.lower != text:
            raise ParseError(
                f"syntax error: expected '{text}', got '{tok.text}'",
                tok.line,
                tok.column,
                text,
            )
        return tok

    def expect_name(self, what: str) -> _Token:
        tok = self.next(what)
        if tok.text in "()" or tok.text.startswith(":") or tok.text.startswith("?"):
            raise ParseError(
                f"syntax error: expected {what}, got '{tok.text}'",
                tok.line,
                tok.column,
                what,
            )
        return tok

    def at_close(self) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == ")"


def _parse_typed_list(ts: _TokenStream, *, variables: bool, what: str) -> list[tuple[str, str, _Token]]:
    """Parse ``item* [- type]`` groups until ')'.  Returns (name, type, token) triples."""
    out: list[tuple[str, str, _Token]] = []
    pending: list[_Token] = []
    while not ts.at_close():
        tok = ts.next(f"{what} or ')'")
        if tok.text == "(":
            raise ParseError(f"syntax error: unexpected '(' in {what} list", tok.line, tok.column)
        if tok.text == "-":
            if not pending:
                raise ParseError(f"syntax error: type separator with no preceding {what}", tok.line, tok.column)
            ty = ts.expect_name("type name")
            for p in pending:
                out.append((p.text, ty.text, p))
            pending = []
            continue
        if variables and not tok.text.startswith("?"):
            raise ParseError(
                f"syntax error: expected variable (starting with '?'), got '{tok.text}'",
                tok.line,
                tok.column,
            )
        if not variables and (tok.text.startswith("?") or tok.text.startswith(":")):
            raise ParseError(f"syntax error: expected {what}, got '{tok.text}'", tok.line, tok.column)
        pending.append(tok)
    for p in pending:
        out.append((p.text, ROOT_TYPE, p))
    return out


def _check_type(types: dict[str, TypeName], tok: _Token, ty: str) -> None:
    if ty.lower() != ROOT_TYPE and ty.lower() not in types:
        raise ParseError(f"semantic error: undeclared type '{ty}'", tok.line, tok.column)


def _parse_atom(ts: _TokenStream, preds: dict[str, PredicateSchema]) -> tuple[Literal, _Token]:
    """Parse ``(name term*)`` after the '(' has been consumed is NOT assumed."""
    open_tok = ts.expect("(")
    name = ts.expect_name("predicate name")
    args: list[str] = []
    while not ts.at_close():
        term = ts.next("term or ')'")
        if term.text in "()" or term.text.startswith(":"):
            raise ParseError(
                f"syntax error: expected term, got '{term.text}'", term.line, term.column
            )
        args.append(term.text)
    ts.expect(")")
    schema = preds.get(name.lower)
    if schema is None:
        raise ParseError(
            f"semantic error: undeclared predicate '{name.text}'", name.line, name.column
        )
    if schema.arity != len(args):
        raise ParseError(
            f"semantic error: arity mismatch for '{name.text}': "
            f"expected {schema.arity}, got {len(args)}",
            name.line,
            name.column,
        )
    return Literal(name.text, tuple(args)), open_tok


def _parse_condition_item(
    ts: _TokenStream, preds: dict[str, PredicateSchema]
) -> Literal | EqualityConstraint:
    """One conjunct: literal, equality, or a (not ...) of either."""
    tok = ts.peek()
    if tok is None or tok.text != "(":
        bad = tok or _Token("", 1, 1)
        raise ParseError(f"syntax error: expected '(' in condition", bad.line, bad.column)
    # Look ahead past '(' to distinguish not/=/predicate.
    head = ts.tokens[ts.pos + 1] if ts.pos + 1 < len(ts.tokens) else None
    if head is not None and head.lower == "not":
        ts.expect("(")
        ts.next("'not'")
        inner = _parse_condition_item(ts, preds)
        ts.expect(")")
        if isinstance(inner, EqualityConstraint):
            if inner.negated:
                raise ParseError("syntax error: double negation", head.line, head.column)
            return EqualityConstraint(inner.left, inner.right, negated=True)
        if inner.negated:
            raise ParseError("syntax error: double negation", head.line, head.column)
        return inner.negate()
    if head is not None and head.text == "=":
        ts.expect("(")
        ts.next("'='")
        left = ts.next("term")
        right = ts.next("term")
        for side in (left, right):
            if side.text in "()":
                raise ParseError(
                    f"syntax error: expected term, got '{side.text}'", side.line, side.column
                )
        ts.expect(")")
        return EqualityConstraint(left.text, right.text)
    lit, _ = _parse_atom(ts, preds)
    return lit


def _parse_conjunction(
    ts: _TokenStream, preds: dict[str, PredicateSchema], what: str
) -> list[Literal | EqualityConstraint]:
    """Parse ``(and item*)`` or a bare single item."""
    tok = ts.peek()
    if tok is None:
        raise ParseError(f"syntax error: expected {what}", 1, 1)
    head = ts.tokens[ts.pos + 1] if ts.pos + 1 < len(ts.tokens) else None
    if tok.text == "(" and head is not None and head.lower == "and":
        ts.expect("(")
        ts.next("'and'")
        items: list[Literal | EqualityConstraint] = []
        while not ts.at_close():
            items.append(_parse_condition_item(ts, preds))
        ts.expect(")")
        return items
    return [_parse_condition_item(ts, preds)]


def _check_bound(items: list[Literal | EqualityConstraint], params: set[str], action: str, tok: _Token) -> None:
    for item in items:
        terms = item.args if isinstance(item, Literal) else (item.left, item.right)
        for term in terms:
            if term.startswith("?") and term.lower() not in params:
                raise ParseError(
                    f"semantic error: variable '{term}' not in parameters of '{action}'",
                    tok.line,
                    tok.column,
                )


def parse_domain(src: str) -> Domain:
    """Parse domain text, raising :class:`ParseError` on the first problem."""
    ts = _TokenStream(src)
    ts.expect("(")
    ts.expect("define")
    ts.expect("(")
    ts.expect("domain")
    name = ts.expect_name("domain name")
    ts.expect(")")

    types: dict[str, TypeName] = {}
    type_order: list[TypeName] = []
    preds: dict[str, PredicateSchema] = {}
    pred_order: list[PredicateSchema] = []
    actions: list[ActionSchema] = []
    action_names: set[str] = set()

    while not ts.at_close():
        ts.expect("(")
        section = ts.next("section keyword")
        if section.lower == ":requirements":
            while not ts.at_close():
                req = ts.next("requirement flag")
                if req.lower not in SUPPORTED_REQUIREMENTS:
                    raise ParseError(
                        f"semantic error: unsupported requirement '{req.text}'",
                        req.line,
                        req.column,
                    )
            ts.expect(")")
        elif section.lower == ":types":
            for tname, ty, tok in _parse_typed_list(ts, variables=False, what="type name"):
                if tname.lower() == ROOT_TYPE:
                    raise ParseError(
                        f"semantic error: type '{tname}' shadows the built-in root type",
                        tok.line,
                        tok.column,
                    )
                if tname.lower() in types:
                    raise ParseError(
                        f"semantic error: duplicate type '{tname}'", tok.line, tok.column
                    )
                parent = None if ty.lower() == ROOT_TYPE else ty
                entry = TypeName(tname, parent)
                types[tname.lower()] = entry
                type_order.append(entry)
            ts.expect(")")
            for entry in type_order:
                if entry.parent and entry.parent.lower() not in types:
                    raise ParseError(
                        f"semantic error: undeclared type '{entry.parent}'",
                        section.line,
                        section.column,
                    )
        elif section.lower == ":predicates":
            while not ts.at_close():
                ts.expect("(")
                pname = ts.expect_name("predicate name")
                if pname.lower in preds:
                    raise ParseError(
                        f"semantic error: duplicate predicate '{pname.text}'",
                        pname.line,
                        pname.column,
                    )
                params = []
                seen_vars: set[str] = set()
                for var, ty, tok in _parse_typed_list(ts, variables=True, what="parameter"):
                    _check_type(types, tok, ty)
                    if var.lower() in seen_vars:
                        raise ParseError(
                            f"semantic error: duplicate parameter '{var}'", tok.line, tok.column
                        )
                    seen_vars.add(var.lower())
                    params.append((var, ty))
                ts.expect(")")
                schema = PredicateSchema(pname.text, tuple(params))
                preds[pname.lower] = schema
                pred_order.append(schema)
            ts.expect(")")
        elif section.lower == ":action":
            aname = ts.expect_name("action name")
            if aname.lower in action_names:
                raise ParseError(
                    f"semantic error: duplicate action '{aname.text}'", aname.line, aname.column
                )
            action_names.add(aname.lower)
            ts.expect(":parameters")
            ts.expect("(")
            params = []
            seen_vars = set()
            for var, ty, tok in _parse_typed_list(ts, variables=True, what="parameter"):
                _check_type(types, tok, ty)
                if var.lower() in seen_vars:
                    raise ParseError(
                        f"semantic error: duplicate parameter '{var}'", tok.line, tok.column
                    )
                seen_vars.add(var.lower())
                params.append((var, ty))
            ts.expect(")")

            precondition: list[Literal] = []
            equalities: list[EqualityConstraint] = []
            adds: list[Literal] = []
            dels: list[Literal] = []
            while not ts.at_close():
                part = ts.next("':precondition' or ':effect'")
                if part.lower == ":precondition":
                    items = _parse_conjunction(ts, preds, "precondition")
                    _check_bound(items, seen_vars, aname.text, part)
                    for item in items:
                        if isinstance(item, EqualityConstraint):
                            equalities.append(item)
                        else:
                            precondition.append(item)
                elif part.lower == ":effect":
                    items = _parse_conjunction(ts, preds, "effect")
                    _check_bound(items, seen_vars, aname.text, part)
                    for item in items:
                        if isinstance(item, EqualityConstraint):
                            raise ParseError(
                                "syntax error: equality not allowed in effects",
                                part.line,
                                part.column,
                            )
                        if item.negated:
                            dels.append(item.negate())
                        else:
                            adds.append(item)
                else:
                    raise ParseError(
                        f"syntax error: unexpected '{part.text}' in action body",
                        part.line,
                        part.column,
                    )
            ts.expect(")")
            dup = set(adds) & set(dels)
            if dup:
                lit = sorted(dup, key=str)[0]
                raise ParseError(
                    f"semantic error: literal {lit} in both add and delete of '{aname.text}'",
                    aname.line,
                    aname.column,
                )
            actions.append(
                ActionSchema(
                    aname.text,
                    tuple(params),
                    tuple(precondition),
                    tuple(equalities),
                    tuple(adds),
                    tuple(dels),
                )
            )
        else:
            raise ParseError(
                f"syntax error: unsupported section '{section.text}'",
                section.line,
                section.column,
            )
    ts.expect(")")
    tail = ts.peek()
    if tail is not None:
        raise ParseError(
            f"syntax error: trailing content '{tail.text}'", tail.line, tail.column
        )
    return Domain(name.text, tuple(type_order), tuple(pred_order), tuple(actions))


def parse_problem(src: str, domain: Domain) -> Problem:
    """Parse problem text and check consistency against ``domain``."""
    ts = _TokenStream(src)
    ts.expect("(")
    ts.expect("define")
    ts.expect("(")
    ts.expect("problem")
    name = ts.expect_name("problem name")
    ts.expect(")")

    types = {t.name.lower(): t for t in domain.types}
    preds = {p.name.lower(): p for p in domain.predicates}
    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    object_names: set[str] = set()
    init: list[Literal] = []
    goal: list[Literal] = []
    seen_init = set()

    def check_ground(lit: Literal, tok: _Token, where: str) -> None:
        for term in lit.args:
            if term.startswith("?"):
                raise ParseError(
                    f"semantic error: variable '{term}' in {where}", tok.line, tok.column
                )
            if term.lower() not in object_names:
                raise ParseError(
                    f"semantic error: unknown object '{term}' in {where}",
                    tok.line,
                    tok.column,
                )

    while not ts.at_close():
        ts.expect("(")
        section = ts.next("section keyword")
        if section.lower == ":domain":
            dn = ts.expect_name("domain name")
            if dn.lower != domain.name.lower():
                raise ParseError(
                    f"semantic error: problem declares domain '{dn.text}' "
                    f"but '{domain.name}' was supplied",
                    dn.line,
                    dn.column,
                )
            domain_name = dn.text
            ts.expect(")")
        elif section.lower == ":objects":
            for oname, ty, tok in _parse_typed_list(ts, variables=False, what="object name"):
                _check_type(types, tok, ty)
                if oname.lower() in object_names:
                    raise ParseError(
                        f"semantic error: duplicate object '{oname}'", tok.line, tok.column
                    )
                object_names.add(oname.lower())
                objects.append((oname, ty))
            ts.expect(")")
        elif section.lower == ":init":
            while not ts.at_close():
                lit, tok = _parse_atom(ts, preds)
                check_ground(lit, tok, "init")
                key = (lit.predicate.lower(), tuple(a.lower() for a in lit.args))
                if key not in seen_init:
                    seen_init.add(key)
                    init.append(lit)
            ts.expect(")")
        elif section.lower == ":goal":
            items = _parse_conjunction(ts, preds, "goal")
            for item in items:
                if isinstance(item, EqualityConstraint):
                    raise ParseError(
                        "syntax error: equality not allowed in goal",
                        section.line,
                        section.column,
                    )
                check_ground(item, section, "goal")
                goal.append(item)
            ts.expect(")")
        else:
            raise ParseError(
                f"syntax error: unsupported section '{section.text}'",
                section.line,
                section.column,
            )
    ts.expect(")")
    tail = ts.peek()
    if tail is not None:
        raise ParseError(
            f"syntax error: trailing content '{tail.text}'", tail.line, tail.column
        )
    if domain_name is None:
        raise ParseError("semantic error: missing (:domain ...) section", 1, 1)
    return Problem(name.text, domain_name, tuple(objects), tuple(init), tuple(goal))
