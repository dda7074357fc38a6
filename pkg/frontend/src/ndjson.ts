// Incremental newline-delimited JSON: chunks may split a record anywhere.

export class NdjsonParser {
  private buffer = "";

  /** Feed one chunk; returns every record completed by it, in order. */
  push(chunk: string): unknown[] {
    this.buffer += chunk;
    const out: unknown[] = [];
    let nl = this.buffer.indexOf("\n");
    while (nl >= 0) {
      const line = this.buffer.slice(0, nl).trim();
      this.buffer = this.buffer.slice(nl + 1);
      if (line.length > 0) out.push(JSON.parse(line));
      nl = this.buffer.indexOf("\n");
    }
    return out;
  }

  /** Drain a trailing record that arrived without a final newline. */
  flush(): unknown[] {
    const line = this.buffer.trim();
    this.buffer = "";
    return line.length > 0 ? [JSON.parse(line)] : [];
  }
}
