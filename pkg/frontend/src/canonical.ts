/**
 * Canonical serialization, byte-compatible with the server's form.
 *
 * One text form for every state value: sorted keys, compact separators,
 * numbers without exponent notation (non-integral values rounded to six
 * decimals, trailing zeros trimmed), minimal JSON string escaping.
 */

export function encodeNumber(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite number not allowed in canonical form: ${value}`);
  }
  if (Number.isInteger(value) && Math.abs(value) < 1e15) {
    return String(value);
  }
  const text = value.toFixed(6).replace(/0+$/, "").replace(/\.$/, "");
  return text === "" || text === "-" ? "0" : text;
}

function encode(value: unknown, out: string[]): void {
  if (value === null || value === undefined) {
    out.push("null");
  } else if (value === true) {
    out.push("true");
  } else if (value === false) {
    out.push("false");
  } else if (typeof value === "string") {
    out.push(JSON.stringify(value));
  } else if (typeof value === "number") {
    out.push(encodeNumber(value));
  } else if (Array.isArray(value)) {
    out.push("[");
    value.forEach((item, i) => {
      if (i) out.push(",");
      encode(item, out);
    });
    out.push("]");
  } else if (typeof value === "object") {
    out.push("{");
    const keys = Object.keys(value as object).sort();
    keys.forEach((key, i) => {
      if (i) out.push(",");
      out.push(JSON.stringify(key));
      out.push(":");
      encode((value as Record<string, unknown>)[key], out);
    });
    out.push("}");
  } else {
    throw new Error(`value not representable in canonical form: ${typeof value}`);
  }
}

export function canonicalText(value: unknown): string {
  const out: string[] = [];
  encode(value, out);
  return out.join("");
}

/** Cheap deterministic 64-bit hash for geometry guards (not integrity). */
export function fnv1a64(text: string): string {
  let acc = 0xcbf29ce484222325n;
  const bytes = new TextEncoder().encode(text);
  for (const byte of bytes) {
    acc ^= BigInt(byte);
    acc = (acc * 0x100000001b3n) & 0xffffffffffffffffn;
  }
  return acc.toString(16).padStart(16, "0");
}

/** SHA-256 hex of the canonical form; matches the server's state hash. */
export async function stateHash(value: unknown): Promise<string> {
  const data = new TextEncoder().encode(canonicalText(value));
  const digest = await crypto.subtle.digest("SHA-256", data);
  return [...new Uint8Array(digest)]
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}
