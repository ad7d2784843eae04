"""Newline-delimited JSON envelope codec.

Server to agent: one envelope per line, ``{"type": ..., "payload": ...}``
with type one of briefing | observation | error | prediction_query | result.
Batches of consecutive envelopes end with one that awaits a reply; the codec
marks that envelope with ``"final": true`` on the wire so stream clients know
when to stop reading and respond (result envelopes are final but expect no
reply).  Agent to server: the raw action JSON as a single line, no envelope.
"""

import json

from ..errors import ParseError, ProtocolError

ENVELOPE_TYPES = (
    "briefing",
    "observation",
    "error",
    "prediction_query",
    "result",
)


def encode_envelope(envelope: dict, final: bool = True) -> bytes:
    if envelope.get("type") not in ENVELOPE_TYPES:
        raise ProtocolError(f"unknown envelope type {envelope.get('type')!r}")
    wire = {"type": envelope["type"], "payload": envelope["payload"]}
    if final:
        wire["final"] = True
    return (json.dumps(wire) + "\n").encode("utf-8")


def encode_batch(envelopes: list) -> bytes:
    """Encode a batch, marking only its last envelope as final."""
    if not envelopes:
        raise ProtocolError("cannot encode an empty envelope batch")
    chunks = [
        encode_envelope(envelope, final=(index == len(envelopes) - 1))
        for index, envelope in enumerate(envelopes)
    ]
    return b"".join(chunks)


def decode_envelope(line) -> dict:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    try:
        envelope = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"envelope line is not valid JSON: {exc}") from exc
    if not isinstance(envelope, dict):
        raise ParseError("envelope must be a JSON object")
    if envelope.get("type") not in ENVELOPE_TYPES:
        raise ParseError(f"unknown envelope type {envelope.get('type')!r}")
    if "payload" not in envelope:
        raise ParseError("envelope is missing its payload")
    return envelope
