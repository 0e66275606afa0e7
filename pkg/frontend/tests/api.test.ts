import { describe, expect, test } from "vitest";

import { ApiError, LexloopClient } from "../src/api.js";
import type { FetchLike } from "../src/api.js";

function respond(status: number, body: unknown, headers: Record<string, string> = {}): FetchLike {
  return async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json", ...headers },
    });
}

describe("LexloopClient", () => {
  test("prefixes the configured base URL", async () => {
    const seen: string[] = [];
    const client = new LexloopClient("http://somewhere:9", async (input) => {
      seen.push(input);
      return new Response("{}", { status: 200 });
    });
    await client.getSession();
    await client.getMetrics();
    expect(seen).toEqual(["http://somewhere:9/api/session", "http://somewhere:9/api/metrics"]);
  });

  test("postLabel sends exactly the label body", async () => {
    let sent: unknown;
    const client = new LexloopClient("", async (_input, init) => {
      sent = JSON.parse(String(init?.body));
      return new Response(
        JSON.stringify({ word: "w", counted: true, iteration_complete: false, status: "collecting" }),
        { status: 200 },
      );
    });
    await client.postLabel({ word: "w", label: "mental" });
    expect(sent).toEqual({ word: "w", label: "mental" });
    await client.postLabel({ word: "w", label: "physical", note: "hard call" });
    expect(sent).toEqual({ word: "w", label: "physical", note: "hard call" });
  });

  test("non-2xx becomes an ApiError carrying detail and Retry-After", async () => {
    const client = new LexloopClient(
      "",
      respond(503, { detail: "retraining in progress" }, { "retry-after": "2" }),
    );
    const err = await client.getNext().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(503);
    expect((err as ApiError).detail).toBe("retraining in progress");
    expect((err as ApiError).retryAfterSeconds).toBe(2);
  });

  test("missing Retry-After stays null", async () => {
    const client = new LexloopClient("", respond(409, { detail: "not the current task" }));
    const err = (await client.getNext().catch((e: unknown) => e)) as ApiError;
    expect(err.status).toBe(409);
    expect(err.retryAfterSeconds).toBeNull();
  });

  test("a non-JSON error body falls back to the status text", async () => {
    const client = new LexloopClient("", async () =>
      new Response("<html>boom</html>", { status: 500, statusText: "Internal Server Error" }),
    );
    const err = (await client.getSession().catch((e: unknown) => e)) as ApiError;
    expect(err.detail).toBe("Internal Server Error");
  });
});
