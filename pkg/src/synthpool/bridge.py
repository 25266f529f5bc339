"""Client side of the external backend wire protocol.

The protocol is newline-delimited JSON over stdio (subprocess mode) or TCP:
one request object per line, one response per line in request order.
Requests: ``{"op": "fill", "tokens": [...], "masked_positions": [...], "k": n}``
or ``{"op": "embed", "texts": [...]}``. Error responses carry ``{"error": msg}``
and keep the connection usable.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import threading
from typing import Sequence

import numpy as np

from .generation import BackendError


class BridgeConnection:
    """One NDJSON request/response channel; at most one in-flight request."""

    def __init__(self, reader, writer, process=None, sock=None) -> None:
        self._reader = reader
        self._writer = writer
        self._process = process
        self._socket = sock
        self._lock = threading.Lock()

    @classmethod
    def connect(cls, endpoint: str) -> "BridgeConnection":
        """Open a connection: ``tcp://host:port``, or a command line to spawn."""
        if endpoint.startswith("tcp://"):
            host, _, port = endpoint[len("tcp://"):].partition(":")
            if not port:
                raise BackendError(f"endpoint {endpoint!r} needs a port")
            sock = socket.create_connection((host, int(port)), timeout=60)
            stream = sock.makefile("rw", encoding="utf-8", newline="\n")
            return cls(reader=stream, writer=stream, sock=sock)
        process = subprocess.Popen(shlex.split(endpoint), stdin=subprocess.PIPE,
                                   stdout=subprocess.PIPE, text=True,
                                   encoding="utf-8", bufsize=1)
        return cls(reader=process.stdout, writer=process.stdin, process=process)

    def request(self, payload: dict) -> dict:
        with self._lock:
            try:
                self._writer.write(json.dumps(payload) + "\n")
                self._writer.flush()
                line = self._reader.readline()
            except (BrokenPipeError, OSError) as exc:
                raise BackendError(f"backend connection failed: {exc}") from exc
        if not line:
            raise BackendError("backend closed the connection")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BackendError(f"backend sent invalid JSON: {exc.msg}") from exc
        if "error" in response:
            raise BackendError(f"backend error: {response['error']}")
        return response

    def close(self) -> None:
        for stream in (self._writer, self._reader):
            try:
                stream.close()
            except OSError:
                pass
        if self._socket is not None:
            self._socket.close()
        if self._process is not None:
            self._process.terminate()
            self._process.wait(timeout=10)

    def __enter__(self) -> "BridgeConnection":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class ExternalFillBackend:
    """FillBackend speaking the wire protocol."""

    def __init__(self, connection: BridgeConnection) -> None:
        self._connection = connection

    def fill(self, tokens: Sequence[str], masked_positions: Sequence[int],
             k: int) -> list[list[tuple[str, float]]]:
        response = self._connection.request({
            "op": "fill",
            "tokens": list(tokens),
            "masked_positions": list(masked_positions),
            "k": k,
        })
        candidates = response.get("candidates")
        if not isinstance(candidates, list) or len(candidates) != len(masked_positions):
            raise BackendError(f"fill response has {len(candidates or [])} candidate "
                               f"lists for {len(masked_positions)} positions")
        result = []
        for per_position in candidates:
            if len(per_position) != k:
                raise BackendError(f"fill response has {len(per_position)} candidates, "
                                   f"expected {k}")
            result.append([(entry["token"], float(entry["score"]))
                           for entry in per_position])
        return result


class ExternalEmbedBackend:
    """EmbedBackend speaking the wire protocol."""

    def __init__(self, connection: BridgeConnection) -> None:
        self._connection = connection
        self._dim: int | None = None

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        response = self._connection.request({"op": "embed", "texts": list(texts)})
        vectors = response.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise BackendError(f"embed response has {len(vectors or [])} vectors "
                               f"for {len(texts)} texts")
        matrix = np.asarray(vectors, dtype=float)
        if matrix.ndim != 2:
            raise BackendError("embed response vectors have inconsistent lengths")
        if self._dim is None:
            self._dim = matrix.shape[1]
        elif matrix.shape[1] != self._dim:
            raise BackendError(f"embed dimension changed from {self._dim} "
                               f"to {matrix.shape[1]}")
        return matrix
