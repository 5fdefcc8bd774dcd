from .canonical import canonical_equal
from .parser import (
    ParseDiagnostic,
    ParseResult,
    SourceSpan,
    load,
    load_model,
    parse,
    parse_experiments,
    render_json,
    render_text,
)
from .serializer import format_number, serialize

__all__ = [
    "ParseDiagnostic",
    "ParseResult",
    "SourceSpan",
    "canonical_equal",
    "format_number",
    "load",
    "load_model",
    "parse",
    "parse_experiments",
    "render_json",
    "render_text",
    "serialize",
]
