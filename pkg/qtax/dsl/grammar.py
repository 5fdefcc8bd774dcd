"""Lark grammar for .qtx model files."""

from __future__ import annotations

from functools import lru_cache

from lark import Lark

QTX_GRAMMAR = r"""
start: statement*

?statement: model_stmt
          | mode_stmt
          | lattice_stmt
          | var_stmt
          | mech_stmt
          | constraint_stmt
          | prior_stmt
          | experiment_stmt

model_stmt: "model" NAME
mode_stmt: "mode" MODE
lattice_stmt: "lattice" "x" ":" interval "t" ":" interval "c" ":" INT "arrow" ":" ARROW
interval: "[" SIGNED_INT "," SIGNED_INT "]"

var_stmt: "var" NAME "domain" "{" value_list "}" location flag* "kind" ":" KIND
value_list: VALUE ("," VALUE)*
location: "at" site                      -> at_site
        | "at" "{" site ("," site)* "}"  -> at_region
        | "nowhere"                      -> nowhere
site: "(" SIGNED_INT "," SIGNED_INT ")"
flag: FLAG

mech_stmt: "mech" NAME "from" "(" [name_list] ")" "{" row* "}"
constraint_stmt: "constraint" "(" name_list ")" "{" weight_row* "}"
prior_stmt: "prior" [scope] "{" weight_row* "}"
scope: "(" [name_list] ")"
experiment_stmt: "experiment" "(" [binding ("," binding)*] ")"
binding: NAME "=" VALUE
name_list: NAME ("," NAME)*

row: key "->" dist ";"
weight_row: key "->" NUMBER ";"
key: "(" [VALUE ("," VALUE)*] ")"  -> tuple_key
   | VALUE                         -> single_key
dist: "{" entry ("," entry)* "}"
entry: VALUE ":" NUMBER

FLAG: "hidden" | "controllable" | "observable"
KIND: "input" | "output"
MODE: "rational" | "decimal"
ARROW: "forward" | "none"
NAME: /[A-Za-z_][A-Za-z0-9_]*/
VALUE: /[+-]?[A-Za-z0-9_]+/
NUMBER: /[0-9]+(\.[0-9]+|\/[0-9]+)?/
COMMENT: /#[^\n]*/

%import common.SIGNED_INT
%import common.INT
%import common.WS
%ignore WS
%ignore COMMENT
"""


@lru_cache(maxsize=1)
def qtx_parser() -> Lark:
    """Shared LALR parser; Lark parsers are safe to reuse across threads."""
    return Lark(
        QTX_GRAMMAR,
        parser="lalr",
        lexer="contextual",
        start="start",
        propagate_positions=True,
        maybe_placeholders=True,
    )
