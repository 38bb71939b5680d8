"""
Concrete syntax of pCSP terms and of the modal formulas of the logics L and F.

Terms::

    P ::= 0 | a | a.P | tau.P | (P)
        | P |~| P | P [] P | P |[a,b]| P | P |+p| P
        | []{P, ...} | |~|{P, ...} | |+|{p: P, ...}

Prefixing binds tighter than the binary operators.  A chain of one binary operator nests to the right, different
operators have to be separated by parentheses.  The indexed forms are shorthand for right-nested chains, the weights
of ``|+|{...}`` are rescaled accordingly.  Probabilities are written ``1/3`` or ``0.25`` and lie strictly between
0 and 1.  ``#`` starts a comment.

Formulas::

    f ::= tt | ref{a,b} | <a>f | f & f | p*f (+) p*f | (f)
"""
import functools
import logging
from fractions import Fraction
from typing import Iterable, Optional

import lark

from pypcsp.logic import Conj, Diamond, Formula, ProbSum, Ref, Top
from pypcsp.terms import (
    NIL,
    Par,
    Prefix,
    ProbChoice,
    Term,
    TAU,
    ext_sum,
    int_sum,
    is_success,
    prob_sum,
    tau,
)
from pypcsp.utils import FormulaException, ParseException, SortException

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

TERM_GRAMMAR = r"""
    ?start: term

    ?term: unary
         | unary (_INT unary)+          -> int_chain
         | unary (_EXT unary)+          -> ext_chain
         | unary (PROB_OP unary)+       -> prob_chain
         | unary (SYNC_OP unary)+       -> par_chain

    ?unary: ACTION "." unary            -> prefixed
          | atom

    ?atom: "0"                          -> nil
         | ACTION                       -> bare_action
         | "(" term ")"
         | _EXT "{" [term ("," term)*] "}"          -> ext_indexed
         | _INT "{" term ("," term)* "}"            -> int_indexed
         | _PSUM "{" weighted ("," weighted)* "}"   -> prob_indexed

    weighted: WEIGHT ":" term

    ACTION: /[a-z][a-zA-Z0-9_]*/
    WEIGHT: /[0-9]+(\.[0-9]+)?(\s*\/\s*[0-9]+)?/
    PROB_OP: /\|\+\s*[0-9]+(\.[0-9]+)?(\s*\/\s*[0-9]+)?\s*\|/
    SYNC_OP: /\|\[\s*([a-z][a-zA-Z0-9_]*(\s*,\s*[a-z][a-zA-Z0-9_]*)*)?\s*\]\|/
    _INT: "|~|"
    _EXT: "[]"
    _PSUM: "|+|"
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

FORMULA_GRAMMAR = r"""
    ?start: formula

    ?formula: fatom
            | fatom ("&" fatom)+                    -> conj
            | weighted_formula ("(+)" weighted_formula)*   -> prob_sum

    weighted_formula: WEIGHT "*" fatom

    ?fatom: "tt"                                    -> top
          | "ref" "{" [ACTION ("," ACTION)*] "}"    -> ref
          | "<" ACTION ">" fatom                    -> diamond
          | "(" formula ")"

    ACTION: /[a-z][a-zA-Z0-9_]*/
    WEIGHT: /[0-9]+(\.[0-9]+)?(\s*\/\s*[0-9]+)?/

    %import common.WS
    %ignore WS
"""


@functools.lru_cache(maxsize=None)
def _term_parser() -> lark.Lark:
    return lark.Lark(TERM_GRAMMAR, parser="lalr", maybe_placeholders=True, propagate_positions=True)


@functools.lru_cache(maxsize=None)
def _formula_parser() -> lark.Lark:
    return lark.Lark(FORMULA_GRAMMAR, parser="lalr", maybe_placeholders=True)


def _weight(token: lark.Token) -> Fraction:
    return Fraction("".join(str(token).split()))


def _operator_weight(token: lark.Token) -> Fraction:
    p = _weight(str(token)[2:-1])
    if not 0 < p < 1:
        raise ParseException("probability {} outside (0,1)".format(p), token.line, token.column)
    return p


def _operator_sync(token: lark.Token) -> frozenset:
    inner = str(token)[2:-2]
    return frozenset(action.strip() for action in inner.split(",") if action.strip())


class _TermTransformer(lark.Transformer):
    def __init__(self, alphabet: Optional[Iterable[str]] = None) -> None:
        super().__init__()
        self.alphabet = None if alphabet is None else frozenset(alphabet)

    def _action(self, token: lark.Token) -> str:
        action = str(token)
        if self.alphabet is not None and action != TAU and not is_success(action) and action not in self.alphabet:
            raise ParseException("unknown action {!r}".format(action), token.line, token.column)
        return action

    @lark.v_args(inline=True)
    def nil(self):
        return NIL

    @lark.v_args(inline=True)
    def bare_action(self, token):
        action = self._action(token)
        if action == TAU:
            return tau(NIL)
        return Prefix(action, NIL)

    @lark.v_args(inline=True)
    def prefixed(self, token, body):
        action = self._action(token)
        if action == TAU:
            return tau(body)
        return Prefix(action, body)

    def int_chain(self, items):
        return int_sum(items)

    def ext_chain(self, items):
        return ext_sum(items)

    def prob_chain(self, items):
        term = items[-1]
        for index in range(len(items) - 2, 0, -2):
            term = ProbChoice(_operator_weight(items[index]), items[index - 1], term)
        return term

    def par_chain(self, items):
        term = items[-1]
        for index in range(len(items) - 2, 0, -2):
            sync = _operator_sync(items[index])
            for action in sync:
                if self.alphabet is not None and action not in self.alphabet:
                    raise ParseException("unknown action {!r}".format(action), items[index].line, items[index].column)
            term = Par(sync, items[index - 1], term)
        return term

    def ext_indexed(self, items):
        return ext_sum([item for item in items if item is not None])

    def int_indexed(self, items):
        return int_sum(items)

    @lark.v_args(inline=True)
    def weighted(self, token, term):
        p = _weight(token)
        if not 0 < p <= 1:
            raise ParseException("weight {} outside (0,1]".format(p), token.line, token.column)
        return p, term

    @lark.v_args(meta=True)
    def prob_indexed(self, meta, items):
        try:
            return prob_sum(items)
        except SortException as e:
            raise ParseException(str(e), meta.line, meta.column)


class _FormulaTransformer(lark.Transformer):
    @lark.v_args(inline=True)
    def top(self):
        return Top()

    def ref(self, items):
        return Ref(str(item) for item in items if item is not None)

    @lark.v_args(inline=True)
    def diamond(self, token, body):
        return Diamond(str(token), body)

    def conj(self, items):
        return Conj(items)

    @lark.v_args(inline=True)
    def weighted_formula(self, token, body):
        return _weight(token), body

    def prob_sum(self, items):
        return ProbSum(items)


def _unwrap(e: lark.exceptions.VisitError) -> Exception:
    original = e.orig_exc
    if isinstance(original, ParseException):
        return original
    return ParseException(str(original))


def parse(text: str, alphabet: Optional[Iterable[str]] = None) -> Term:
    """
    Parses a term of the concrete syntax.

    :param text:
        The source text.
    :param alphabet:
        Optional set of visible actions.  When given, any other visible action is reported as unknown.
    :return:
        The abstract syntax tree.  Sugar such as ``a [] (b |+1/2| c)`` is kept, see ``terms.desugar``.
    :raises ParseException:
        On syntax errors, probability literals outside (0,1) and unknown actions.
    """
    try:
        tree = _term_parser().parse(text)
    except lark.exceptions.UnexpectedInput as e:
        raise ParseException("syntax error, unexpected input", e.line, e.column)

    try:
        term = _TermTransformer(alphabet).transform(tree)
    except lark.exceptions.VisitError as e:
        raise _unwrap(e)

    logger.debug("parsed term of size %d", term.size())
    return term


def parse_formula(text: str) -> Formula:
    try:
        tree = _formula_parser().parse(text)
    except lark.exceptions.UnexpectedInput as e:
        raise ParseException("syntax error, unexpected input", e.line, e.column)

    try:
        return _FormulaTransformer().transform(tree)
    except lark.exceptions.VisitError as e:
        original = e.orig_exc
        if isinstance(original, FormulaException):
            raise ParseException(str(original))
        raise _unwrap(e)


def unparse(term: Term) -> str:
    return term.unparse()


def unparse_formula(formula: Formula) -> str:
    return formula.unparse()


def read_term(path: str, alphabet: Optional[Iterable[str]] = None) -> Term:
    with open(path, encoding="utf-8") as source:
        return parse(source.read(), alphabet=alphabet)


__all__ = ["parse", "parse_formula", "unparse", "unparse_formula", "read_term"]
