import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
	return new Response(JSON.stringify(body), {
		status,
		headers: { "Content-Type": "application/json" },
	});
}

describe("ApiClient", () => {
	it("builds match queries with the documented parameter names", async () => {
		const fetchFn = vi.fn(async () => jsonResponse({ results: [], pinned: [] }));
		const api = new ApiClient("http://svc", fetchFn);
		await api.matchSimilar({ color: "#336699", maxDeltaE: 4, format: "Stick", limit: 5 });
		const url = fetchFn.mock.calls[0][0] as string;
		expect(url).toContain("http://svc/v1/match/similar?");
		expect(url).toContain("color=%23336699");
		expect(url).toContain("max_delta_e=4");
		expect(url).toContain("format=Stick");
		expect(url).toContain("limit=5");
	});

	it("raises ApiError from the error envelope", async () => {
		const fetchFn = vi.fn(async () =>
			jsonResponse({ error: { code: "NotFound", message: "no product" } }, 404),
		);
		const api = new ApiClient("", fetchFn);
		await expect(api.getProperties("ghost")).rejects.toMatchObject({
			name: "ApiError",
			code: "NotFound",
			status: 404,
		});
	});

	it("puts override bodies with author and expected revision", async () => {
		const fetchFn = vi.fn(async () =>
			jsonResponse({ product_id: "p", revision: 2, provenance: "Override" }),
		);
		const api = new ApiClient("", fetchFn);
		const props = {
			format: "Powder" as const,
			best_image_position: 0,
			provenance: "Override" as const,
			shades: [],
		};
		await api.putProperties("p", props, "curator", 1);
		const init = fetchFn.mock.calls[0][1] as RequestInit;
		expect(init.method).toBe("PUT");
		const body = JSON.parse(init.body as string);
		expect(body.author).toBe("curator");
		expect(body.expected_revision).toBe(1);
	});

	it("sends the bearer token when configured", async () => {
		const fetchFn = vi.fn(async () => jsonResponse({ ids: [] }));
		const api = new ApiClient("", fetchFn, "sesame");
		await api.listProducts();
		const init = fetchFn.mock.calls[0][1] as RequestInit;
		expect((init.headers as Record<string, string>).Authorization).toBe("Bearer sesame");
	});

	it("wraps non-envelope failures", async () => {
		const fetchFn = vi.fn(async () => new Response("boom", { status: 500 }));
		const api = new ApiClient("", fetchFn);
		await expect(api.health()).rejects.toBeInstanceOf(ApiError);
	});
});
