"""Agent-side socket channel: batches in, one reply line out."""

import socket

from ..errors import TransportError
from .envelope import decode_envelope


class SocketChannel:
    """Connects to an episode server and pumps an in-process agent."""

    def __init__(self, host: str, port: int, timeout: float = 60.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.reader = self.sock.makefile("r", encoding="utf-8")
        self.writer = self.sock.makefile("wb")

    def close(self) -> None:
        try:
            self.reader.close()
            self.writer.close()
        finally:
            self.sock.close()

    def read_batch(self) -> list:
        """Read envelopes until one carries the final marker."""
        batch = []
        while True:
            line = self.reader.readline()
            if not line:
                if batch:
                    raise TransportError("connection closed mid-batch")
                return []
            line = line.strip()
            if not line:
                continue
            envelope = decode_envelope(line)
            batch.append(envelope)
            if envelope.get("final"):
                return batch

    def send(self, message: str) -> None:
        self.writer.write(message.encode("utf-8") + b"\n")
        self.writer.flush()

    def run(self, agent) -> dict:
        """Drive the agent to episode completion; returns the result payload."""
        try:
            while True:
                batch = self.read_batch()
                if not batch:
                    raise TransportError("server closed the connection early")
                if batch[-1]["type"] == "result":
                    return batch[-1]["payload"]
                reply = agent.respond(batch)
                if reply is None:
                    raise TransportError("agent produced no reply")
                self.send(reply)
        finally:
            self.close()


def run_remote_episode(host: str, port: int, agent, timeout: float = 60.0) -> dict:
    return SocketChannel(host, port, timeout=timeout).run(agent)
