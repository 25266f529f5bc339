"""Masked-token fill and sentence-embedding service over newline-delimited JSON."""

from .count_model import CountModel, read_texts
from .protocol import ProtocolError, dump_response, handle_line, parse_request
from .server import serve_stdio, serve_tcp

__version__ = "0.1.0"

__all__ = ["CountModel", "ProtocolError", "dump_response", "handle_line",
           "parse_request", "read_texts", "serve_stdio", "serve_tcp",
           "__version__"]
