"""NDJSON wire protocol: envelope codec, episode servers, agent channel."""

from .client import SocketChannel, run_remote_episode
from .envelope import ENVELOPE_TYPES, decode_envelope, encode_batch, encode_envelope
from .server import EpisodeServer, serve_stdio, serve_stream, start_server

__all__ = [
    "ENVELOPE_TYPES",
    "EpisodeServer",
    "SocketChannel",
    "decode_envelope",
    "encode_batch",
    "encode_envelope",
    "run_remote_episode",
    "serve_stdio",
    "serve_stream",
    "start_server",
]
