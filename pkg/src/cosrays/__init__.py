"""Symbolic model, inverse-branch ray tracing and ray combinatorics for cosine maps."""

from .address import (
    ExternalAddress,
    Symbol,
    SignedAddress,
    AddressSyntaxError,
    compare_symbols,
    cyclic_between,
    format_address,
    lex_compare,
    parse_address,
    parse_signed,
    shift,
)
from .model import ModelPoint, SignedModelPoint, OutOfSpace, step, t_min, in_JF, orbit

__all__ = [
    "ExternalAddress",
    "Symbol",
    "SignedAddress",
    "AddressSyntaxError",
    "compare_symbols",
    "cyclic_between",
    "format_address",
    "lex_compare",
    "parse_address",
    "parse_signed",
    "shift",
    "ModelPoint",
    "SignedModelPoint",
    "OutOfSpace",
    "step",
    "t_min",
    "in_JF",
    "orbit",
]
