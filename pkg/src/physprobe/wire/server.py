"""Socket and stdio episode servers.

One connection runs one episode: the server opens with the briefing batch,
then alternates strictly (batch out, one reply line in) until the result
envelope, after which the connection closes.  Concurrent connections each
get a fully isolated session; an optional seed step gives connection k the
seed ``base_seed + k * seed_step`` so parallel agents probe different worlds.
"""

import dataclasses
import json
import socketserver
import threading

from ..errors import TransportError
from ..harness.episode import EpisodeConfig, EpisodeRecord, EpisodeSession
from .envelope import encode_batch


def serve_stream(episode: EpisodeConfig, read_line, write_bytes) -> EpisodeRecord:
    """Drive one episode over line-oriented callables.

    ``read_line()`` returns the next agent line (str) or None on EOF;
    ``write_bytes(data)`` sends encoded envelope batches.  Returns the
    episode record (partial if the peer vanished).
    """
    session = EpisodeSession(episode)
    envelopes = session.start()
    while True:
        try:
            write_bytes(encode_batch(envelopes))
        except OSError as exc:
            if not session.done:
                session.abort(f"transport failure: {exc}")
            break
        if session.done:
            break
        line = None
        while True:  # skip blank keepalive lines without re-sending the batch
            try:
                line = read_line()
            except OSError:
                line = None
            if line is None or line.strip():
                break
        if line is None:
            envelopes = session.abort("agent disconnected")
            try:
                write_bytes(encode_batch(envelopes))
            except OSError:
                pass
            break
        envelopes = session.handle(line.strip())
    return session.record


def write_record_line(path, record: EpisodeRecord, lock: threading.Lock) -> None:
    with lock:
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record.to_dict(), sort_keys=True))
            handle.write("\n")


class EpisodeServer(socketserver.ThreadingTCPServer):
    """TCP server running one episode per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, episode: EpisodeConfig, record_path=None,
                 seed_step: int = 0):
        self.episode = episode
        self.record_path = record_path
        self.seed_step = seed_step
        self.connection_count = 0
        self.count_lock = threading.Lock()
        self.record_lock = threading.Lock()
        super().__init__(address, _EpisodeHandler)

    def next_episode(self) -> EpisodeConfig:
        with self.count_lock:
            index = self.connection_count
            self.connection_count += 1
        return dataclasses.replace(
            self.episode, seed=self.episode.seed + index * self.seed_step
        )


class _EpisodeHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server: EpisodeServer = self.server

        def read_line():
            raw = self.rfile.readline()
            if not raw:
                return None
            return raw.decode("utf-8")

        def write_bytes(data):
            self.wfile.write(data)
            self.wfile.flush()

        record = serve_stream(server.next_episode(), read_line, write_bytes)
        if server.record_path is not None:
            write_record_line(server.record_path, record, server.record_lock)


def start_server(episode: EpisodeConfig, host: str = "127.0.0.1", port: int = 0,
                 record_path=None, seed_step: int = 0):
    """Start a background episode server; returns (server, thread).

    The bound address is ``server.server_address``; stop with
    ``server.shutdown()`` then ``server.server_close()``.
    """
    server = EpisodeServer((host, port), episode, record_path=record_path,
                           seed_step=seed_step)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, thread


def serve_stdio(episode: EpisodeConfig, stdin=None, stdout=None) -> EpisodeRecord:
    """Run one episode over stdin/stdout (line in, envelope batch out)."""
    import sys

    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout.buffer

    def read_line():
        line = stdin.readline()
        return line if line else None

    def write_bytes(data):
        stdout.write(data)
        stdout.flush()

    return serve_stream(episode, read_line, write_bytes)
