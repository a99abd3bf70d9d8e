"""Hand-rolled lexer and recursive-descent parser for the assertion subset.

Shape: ``[@(posedge clk)] [disable iff (expr)] property-expr``.
Precedence, tightest first: unary ($past/$rose/$fell/$stable, !), then
comparison, ^, &&, ||, delay concatenation, implication (right-associative,
lowest). Legal SVA outside the subset raises UnsupportedConstruct, which is
a syntax pass but cannot be evaluated; anything else raises SvaSyntaxError
with a position and the expected tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import SvaSyntaxError, UnsupportedConstruct
from . import nodes as N

_SAMPLING_FUNCS = {"$past", "$rose", "$fell", "$stable"}

# Legal SVA keywords we recognize but do not evaluate.
_UNSUPPORTED_KEYWORDS = {
    "until", "s_until", "until_with", "s_until_with", "throughout", "within",
    "intersect", "first_match", "strong", "weak", "nexttime", "s_nexttime",
    "always", "eventually", "not", "and", "or", "implies", "iff",
    "if", "else", "case", "accept_on", "reject_on", "sync_accept_on",
    "sync_reject_on", "property", "sequence",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<implov>\|->)
  | (?P<implnov>\|=>)
  | (?P<delay>\#\#)
  | (?P<and>&&)
  | (?P<or>\|\|)
  | (?P<neq>!==|!=)
  | (?P<eq>===|==)
  | (?P<not>!)
  | (?P<xor>\^)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<lbracket>\[)
  | (?P<rbracket>\])
  | (?P<at>@)
  | (?P<comma>,)
  | (?P<semi>;)
  | (?P<colon>:)
  | (?P<star>\*)
  | (?P<dollar>\$[A-Za-z_]\w*|\$)
  | (?P<number>\d+'[bB][01xXzZ]+|\d+)
  | (?P<ident>[A-Za-z_]\w*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise SvaSyntaxError(f"illegal character {text[i]!r}", i)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), i))
        i = m.end()
    tokens.append(Token("eof", "", n))
    return tokens


_WRAPPER_RE = re.compile(
    r"^\s*(?:[A-Za-z_]\w*\s*:\s*)?(?:assert|assume|cover)\s+property\s*\(", re.DOTALL
)


def _strip_wrapper(text: str) -> str:
    """Peel an ``assert property ( ... );`` shell when present."""
    text = text.strip().rstrip(";").strip()
    m = _WRAPPER_RE.match(text)
    if not m:
        return text
    depth, start = 1, m.end()
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                tail = text[i + 1 :].strip().rstrip(";").strip()
                if tail:
                    return text  # trailing clause (else $error, ...) - parse as-is
                return text[start:i]
    return text


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.cur
        self.i += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.cur.kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str) -> Token:
        if self.cur.kind != kind:
            self._unsupported_if_known_keyword()
            raise SvaSyntaxError(
                f"unexpected {self.cur.text or 'end of input'!r}", self.cur.pos, (what,)
            )
        return self.advance()

    def _unsupported_if_known_keyword(self):
        # infix constructs we recognize but do not evaluate (until, throughout,
        # repetition brackets, ...) surface here rather than at primaries
        tok = self.cur
        if tok.kind == "ident" and tok.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstruct(f"keyword {tok.text}", tok.pos)
        if tok.kind == "lbracket":
            raise UnsupportedConstruct("repetition or range expression", tok.pos)
        if tok.kind == "dollar":
            raise UnsupportedConstruct(f"system function {tok.text}", tok.pos)

    # --- entry ---

    def parse(self) -> N.SvaAst:
        clock = self._clocking()
        guard = self._disable_iff()
        prop = self._property()
        if self.cur.kind != "eof":
            self._unsupported_if_known_keyword()
            raise SvaSyntaxError(
                f"trailing input {self.cur.text!r}", self.cur.pos, ("end of assertion",)
            )
        return N.SvaAst(property=prop, clock=clock, disable_guard=guard)

    def _clocking(self) -> str | None:
        if self.cur.kind != "at":
            return None
        self.advance()
        self.expect("lparen", "(")
        edge = self.expect("ident", "posedge")
        if edge.text == "negedge":
            raise UnsupportedConstruct("negedge clocking", edge.pos)
        if edge.text != "posedge":
            raise SvaSyntaxError(f"unexpected {edge.text!r}", edge.pos, ("posedge",))
        name = self.expect("ident", "clock name")
        if self.cur.kind != "rparen":
            raise UnsupportedConstruct("multi-term clocking event", self.cur.pos)
        self.advance()
        if self.cur.kind == "at":
            raise UnsupportedConstruct("multiple clocking events", self.cur.pos)
        return name.text

    def _disable_iff(self) -> N.Node | None:
        if not (self.cur.kind == "ident" and self.cur.text == "disable"):
            return None
        self.advance()
        kw = self.expect("ident", "iff")
        if kw.text != "iff":
            raise SvaSyntaxError(f"unexpected {kw.text!r}", kw.pos, ("iff",))
        self.expect("lparen", "(")
        expr = self._bool_or()
        self._require_boolean(expr, kw.pos, "disable condition")
        self.expect("rparen", ")")
        return expr

    # --- property level ---

    def _property(self) -> N.Node:
        left = self._prop_operand()
        if self.cur.kind in ("implov", "implnov"):
            tok = self.advance()
            if not N.is_sequence(left):
                raise SvaSyntaxError(
                    "implication antecedent must be a sequence", tok.pos
                )
            right = self._property()  # right-associative
            cls = N.ImplOverlap if tok.kind == "implov" else N.ImplNonOverlap
            return cls(left, right)
        return left

    def _prop_operand(self) -> N.Node:
        if self.cur.kind == "ident" and self.cur.text in ("s_eventually", "s_always"):
            tok = self.advance()
            operand = self._prop_operand()
            node = N.SEventually(operand) if tok.text == "s_eventually" else N.SAlways(operand)
            if self.cur.kind == "delay":
                raise SvaSyntaxError(
                    "liveness property cannot be delay-concatenated", self.cur.pos
                )
            return node
        return self._sequence()

    def _sequence(self) -> N.Node:
        if self.cur.kind == "delay":
            tok = self.advance()
            lo, hi = self._delay_bounds(tok.pos)
            first = self._bool_or()
            self._require_sequence(first, tok.pos)
            left: N.Node = N.DelayConcat(None, lo, hi, first)
        else:
            left = self._bool_or()
        while self.cur.kind == "delay":
            tok = self.advance()
            self._require_sequence(left, tok.pos)
            lo, hi = self._delay_bounds(tok.pos)
            right = self._bool_or()
            self._require_sequence(right, tok.pos)
            left = N.DelayConcat(left, lo, hi, right)
        return left

    def _delay_bounds(self, at: int) -> tuple[int, int]:
        if self.accept("lbracket"):
            lo = self._delay_number()
            self.expect("colon", ":")
            if self.cur.kind == "dollar" and self.cur.text == "$":
                raise UnsupportedConstruct("unbounded delay ##[m:$]", self.cur.pos)
            hi = self._delay_number()
            self.expect("rbracket", "]")
            if lo > hi:
                raise SvaSyntaxError(f"delay range [{lo}:{hi}] is reversed", at)
            return lo, hi
        value = self._delay_number()
        return value, value

    def _delay_number(self) -> int:
        tok = self.expect("number", "delay count")
        if not tok.text.isdigit():
            raise SvaSyntaxError(f"bad delay count {tok.text!r}", tok.pos, ("integer",))
        return int(tok.text)

    # --- boolean levels ---

    def _bool_or(self) -> N.Node:
        left = self._bool_and()
        while self.cur.kind == "or":
            tok = self.advance()
            self._require_boolean(left, tok.pos, "'||' operand")
            right = self._bool_and()
            self._require_boolean(right, tok.pos, "'||' operand")
            left = N.Or(left, right)
        return left

    def _bool_and(self) -> N.Node:
        left = self._bool_xor()
        while self.cur.kind == "and":
            tok = self.advance()
            self._require_boolean(left, tok.pos, "'&&' operand")
            right = self._bool_xor()
            self._require_boolean(right, tok.pos, "'&&' operand")
            left = N.And(left, right)
        return left

    def _bool_xor(self) -> N.Node:
        left = self._bool_cmp()
        while self.cur.kind == "xor":
            tok = self.advance()
            self._require_boolean(left, tok.pos, "'^' operand")
            right = self._bool_cmp()
            self._require_boolean(right, tok.pos, "'^' operand")
            left = N.Xor(left, right)
        return left

    def _bool_cmp(self) -> N.Node:
        left = self._unary()
        if self.cur.kind in ("eq", "neq"):
            tok = self.advance()
            self._require_boolean(left, tok.pos, "comparison operand")
            right = self._unary()
            self._require_boolean(right, tok.pos, "comparison operand")
            cls = N.Eq if tok.kind == "eq" else N.Neq
            return cls(left, right)
        return left

    def _unary(self) -> N.Node:
        if self.cur.kind == "not":
            tok = self.advance()
            operand = self._unary()
            self._require_boolean(operand, tok.pos, "'!' operand")
            return N.Not(operand)
        if self.cur.kind == "dollar":
            return self._system_func()
        return self._primary()

    def _system_func(self) -> N.Node:
        tok = self.advance()
        name = tok.text
        if name not in _SAMPLING_FUNCS:
            raise UnsupportedConstruct(f"system function {name}", tok.pos)
        self.expect("lparen", "(")
        if name == "$past":
            operand = self._bool_or()
            self._require_boolean(operand, tok.pos, "$past operand")
            depth = 1
            if self.accept("comma"):
                d = self.expect("number", "depth")
                if not d.text.isdigit() or int(d.text) < 1:
                    raise SvaSyntaxError(f"bad $past depth {d.text!r}", d.pos, ("integer >= 1",))
                depth = int(d.text)
                if self.cur.kind == "comma":
                    raise UnsupportedConstruct("$past with gating/clock arguments", self.cur.pos)
            self.expect("rparen", ")")
            return N.Past(operand, depth)
        arg = self.cur
        if arg.kind != "ident":
            raise UnsupportedConstruct(f"{name} over a non-signal expression", arg.pos)
        self.advance()
        if self.cur.kind != "rparen":
            raise UnsupportedConstruct(f"{name} over a non-signal expression", self.cur.pos)
        self.advance()
        cls = {"$rose": N.Rose, "$fell": N.Fell, "$stable": N.Stable}[name]
        return cls(arg.text)

    def _primary(self) -> N.Node:
        tok = self.cur
        if tok.kind == "lparen":
            self.advance()
            inner = self._property()
            self.expect("rparen", ")")
            self._check_postfix()
            return inner
        if tok.kind == "ident":
            if tok.text in _UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstruct(f"keyword {tok.text}", tok.pos)
            self.advance()
            self._check_postfix()
            return N.Signal(tok.text)
        if tok.kind == "number":
            self.advance()
            value = tok.text.lower().replace("_", "")
            if value in ("0", "1'b0"):
                return N.Const(False)
            if value in ("1", "1'b1"):
                return N.Const(True)
            raise UnsupportedConstruct(f"multi-bit literal {tok.text}", tok.pos)
        if tok.kind == "lbracket":
            raise UnsupportedConstruct("repetition/range expression", tok.pos)
        raise SvaSyntaxError(
            f"unexpected {tok.text or 'end of input'!r}", tok.pos, ("expression",)
        )

    def _check_postfix(self):
        # a[3] / a[3:0] / a[*2] are legal SVA but out of the 1-bit subset
        if self.cur.kind == "lbracket":
            raise UnsupportedConstruct("bit select or repetition", self.cur.pos)

    # --- operand class checks ---

    def _require_boolean(self, node: N.Node, pos: int, what: str):
        if not N.is_boolean(node):
            raise SvaSyntaxError(f"{what} must be a boolean expression", pos)

    def _require_sequence(self, node: N.Node, pos: int):
        if not N.is_sequence(node):
            raise SvaSyntaxError("property expression not allowed in a sequence", pos)


def parse_sva(text: str) -> N.SvaAst:
    """Parse assertion text into an AST.

    Raises SvaSyntaxError for malformed input and UnsupportedConstruct for
    legal SVA outside the evaluated subset.
    """
    return _Parser(tokenize(_strip_wrapper(text))).parse()


def syntax_check(text: str) -> None:
    """Raise SvaSyntaxError when the text is not plausible assertion syntax.

    UnsupportedConstruct is downgraded to a pass provided the bracket
    structure balances; such assertions count as syntactically fine but
    cannot be scored functionally.
    """
    try:
        parse_sva(text)
    except UnsupportedConstruct:
        _check_balance(_strip_wrapper(text))


def _check_balance(text: str) -> None:
    text = re.sub(r"//[^\n]*", "", text)
    depth = {"(": 0, "[": 0}
    pairs = {")": "(", "]": "["}
    for i, ch in enumerate(text):
        if ch in depth:
            depth[ch] += 1
        elif ch in pairs:
            depth[pairs[ch]] -= 1
            if depth[pairs[ch]] < 0:
                raise SvaSyntaxError(f"unbalanced {ch!r}", i)
    for opener, d in depth.items():
        if d != 0:
            raise SvaSyntaxError(f"unbalanced {opener!r}", len(text))
