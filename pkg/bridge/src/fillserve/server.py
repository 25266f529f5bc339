"""Serve loops: NDJSON over stdio (subprocess mode) or TCP.

One in-flight request per connection; multiple TCP connections are handled
on separate threads with a shared model guarded by a lock. Malformed lines
produce an error response and leave the connection up.
"""

from __future__ import annotations

import socketserver
import sys
import threading

from .protocol import dump_response, handle_line


class _LockedModel:
    def __init__(self, model) -> None:
        self._model = model
        self._lock = threading.Lock()

    def fill(self, tokens, masked_positions, k):
        with self._lock:
            return self._model.fill(tokens, masked_positions, k)

    def embed(self, texts):
        with self._lock:
            return self._model.embed(texts)


def serve_stdio(model, stdin=None, stdout=None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(dump_response(handle_line(model, line)) + "\n")
        stdout.flush()


def serve_tcp(model, host: str, port: int, ready=None) -> None:
    shared = _LockedModel(model)

    class Handler(socketserver.StreamRequestHandler):
        def handle(self) -> None:
            for raw in self.rfile:
                line = raw.decode("utf-8", errors="replace")
                if not line.strip():
                    continue
                response = dump_response(handle_line(shared, line)) + "\n"
                self.wfile.write(response.encode("utf-8"))

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        bound = server.server_address
        print(f"listening on {bound[0]}:{bound[1]}", file=sys.stderr)
        if ready is not None:
            ready(server)
        server.serve_forever()
