/**
 * Wire-level pieces of the episode protocol.
 *
 * The server speaks newline-delimited JSON envelopes; an envelope batch ends
 * with one marked `"final": true`, after which the server is waiting for a
 * single raw JSON reply line. This module owns line framing, envelope
 * validation, and the batch reader; it never interprets payloads.
 */

import type { Readable } from "node:stream";
import { z } from "zod";

export const ENVELOPE_TYPES = [
  "briefing",
  "observation",
  "error",
  "prediction_query",
  "result",
] as const;

export type EnvelopeType = (typeof ENVELOPE_TYPES)[number];

export const EnvelopeSchema = z
  .object({
    type: z.enum(ENVELOPE_TYPES),
    payload: z.unknown(),
    final: z.boolean().optional(),
  })
  .strict();

export type Envelope = z.infer<typeof EnvelopeSchema>;

/** Connection-level failure: refused, closed mid-batch, timed out. */
export class TransportError extends Error {
  constructor(message: string, options?: { cause?: unknown }) {
    super(message, options);
    this.name = "TransportError";
  }
}

/** The peer sent something that is not a valid envelope stream. */
export class WireFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "WireFormatError";
  }
}

export function decodeEnvelope(line: string): Envelope {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch (err) {
    throw new WireFormatError(`envelope line is not valid JSON: ${String(err)}`);
  }
  const check = EnvelopeSchema.safeParse(parsed);
  if (!check.success) {
    throw new WireFormatError(`bad envelope shape: ${check.error.message}`);
  }
  return check.data;
}

/**
 * Buffers a byte stream into complete lines. Blank lines are dropped (the
 * server tolerates them as keepalives, so we never produce them either).
 */
export class LineReader {
  private buffer = "";
  private lines: string[] = [];
  private waiters: Array<(line: string | null) => void> = [];
  private ended = false;

  constructor(stream: Readable, private readonly timeoutMs: number = 120_000) {
    stream.setEncoding("utf-8");
    stream.on("data", (chunk: string) => this.push(chunk));
    stream.on("end", () => this.finish());
    stream.on("error", () => this.finish());
  }

  private push(chunk: string): void {
    this.buffer += chunk;
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).trim();
      this.buffer = this.buffer.slice(index + 1);
      if (!line) continue;
      const waiter = this.waiters.shift();
      if (waiter) waiter(line);
      else this.lines.push(line);
    }
    // never buffer unbounded garbage from a peer that stopped framing
    if (this.buffer.length > 64 * 1024 * 1024) {
      this.finish();
    }
  }

  private finish(): void {
    this.ended = true;
    while (this.waiters.length > 0) {
      this.waiters.shift()!(null);
    }
  }

  /** Next line, or null once the stream has ended. */
  nextLine(): Promise<string | null> {
    const queued = this.lines.shift();
    if (queued !== undefined) return Promise.resolve(queued);
    if (this.ended) return Promise.resolve(null);
    return new Promise((resolve, reject) => {
      const timer = setTimeout(() => {
        const at = this.waiters.indexOf(settle);
        if (at >= 0) this.waiters.splice(at, 1);
        reject(new TransportError(`no line within ${this.timeoutMs} ms`));
      }, this.timeoutMs);
      const settle = (line: string | null) => {
        clearTimeout(timer);
        resolve(line);
      };
      this.waiters.push(settle);
    });
  }
}

/**
 * Reads envelopes until one carries the final marker. Returns an empty array
 * on a clean end-of-stream between batches; a stream that dies mid-batch is
 * a transport error.
 */
export async function readBatch(reader: LineReader): Promise<Envelope[]> {
  const batch: Envelope[] = [];
  for (;;) {
    const line = await reader.nextLine();
    if (line === null) {
      if (batch.length > 0) {
        throw new TransportError("stream ended mid-batch");
      }
      return batch;
    }
    const envelope = decodeEnvelope(line);
    batch.push(envelope);
    if (envelope.final) {
      return batch;
    }
  }
}
