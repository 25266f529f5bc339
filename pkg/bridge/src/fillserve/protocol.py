"""Wire protocol: one JSON object per line, responses in request order.

Requests:
    {"op": "fill", "tokens": [...], "masked_positions": [...], "k": N}
    {"op": "embed", "texts": [...]}

Responses:
    {"candidates": [[{"token": t, "score": s}, ...k], ...]}   per masked position,
                                                              descending score
    {"vectors": [[...], ...]}                                 one per text
    {"error": "message"}                                      connection stays up

The server never samples: candidates come back ranked and the client owns
any randomness, so end-to-end determinism lives in one place.
"""

from __future__ import annotations

import json


class ProtocolError(ValueError):
    """Malformed request; reported to the client as an error line."""


def parse_request(line: str) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(request, dict):
        raise ProtocolError("request must be a JSON object")
    op = request.get("op")
    if op == "fill":
        tokens = request.get("tokens")
        positions = request.get("masked_positions")
        k = request.get("k")
        if not isinstance(tokens, list) or not tokens or \
                not all(isinstance(t, str) for t in tokens):
            raise ProtocolError("fill needs a non-empty 'tokens' list of strings")
        if not isinstance(positions, list) or not positions or \
                not all(isinstance(p, int) and 0 <= p < len(tokens) for p in positions):
            raise ProtocolError("fill needs in-range integer 'masked_positions'")
        if not isinstance(k, int) or k < 1:
            raise ProtocolError("fill needs a positive integer 'k'")
        return request
    if op == "embed":
        texts = request.get("texts")
        if not isinstance(texts, list) or \
                not all(isinstance(t, str) for t in texts):
            raise ProtocolError("embed needs a 'texts' list of strings")
        return request
    raise ProtocolError(f"unknown op {op!r}")


def handle_line(model, line: str) -> dict:
    """Answer one request line; any failure becomes an error response."""
    try:
        request = parse_request(line)
        if request["op"] == "fill":
            candidates = model.fill(request["tokens"], request["masked_positions"],
                                    request["k"])
            return {"candidates": [[{"token": token, "score": score}
                                    for token, score in per_position]
                                   for per_position in candidates]}
        vectors = model.embed(request["texts"])
        return {"vectors": [[float(x) for x in vector] for vector in vectors]}
    except ProtocolError as exc:
        return {"error": str(exc)}
    except Exception as exc:  # model failure must not kill the connection
        return {"error": f"{type(exc).__name__}: {exc}"}


def dump_response(response: dict) -> str:
    return json.dumps(response, ensure_ascii=False)
