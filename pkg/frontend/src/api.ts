// Typed client for the /v1 contract. All color math and scoring happens on
// the service; this file only moves JSON.

import {
	ApiErrorBody,
	Harmony,
	MatchResponse,
	MaterialProperties,
	OutfitProfile,
	PinnedAssociation,
	ProductRecord,
	Recommendation,
} from "./types.js";

export class ApiError extends Error {
	constructor(
		public readonly code: string,
		message: string,
		public readonly status: number,
		public readonly stage?: string,
	) {
		super(message);
		this.name = "ApiError";
	}
}

export interface SimilarParams {
	color?: string;
	product?: string;
	shade?: number;
	category?: string;
	maxDeltaE?: number;
	brand?: string;
	format?: string;
	finish?: string;
	harmony?: Harmony;
	limit?: number;
}

export interface OutfitParams {
	profile: OutfitProfile;
	category?: string;
	maxDeltaE?: number;
	harmony?: Harmony;
	limit?: number;
	brand?: string;
	format?: string;
	finish?: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
	constructor(
		private readonly baseUrl: string = "",
		private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
		private readonly token: string | null = null,
	) {}

	private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
		const headers: Record<string, string> = {
			...(init.headers as Record<string, string> | undefined),
		};
		if (init.body !== undefined) {
			headers["Content-Type"] = "application/json";
		}
		if (this.token) {
			headers["Authorization"] = `Bearer ${this.token}`;
		}
		const response = await this.fetchFn(`${this.baseUrl}${path}`, { ...init, headers });
		if (!response.ok) {
			let body: ApiErrorBody | null = null;
			try {
				body = (await response.json()) as ApiErrorBody;
			} catch {
				// non-envelope failure; fall through to the generic error
			}
			if (body && body.error) {
				throw new ApiError(body.error.code, body.error.message, response.status, body.error.stage);
			}
			throw new ApiError("Invalid", `request failed with ${response.status}`, response.status);
		}
		return (await response.json()) as T;
	}

	health(): Promise<{ status: string; products: number }> {
		return this.request("/v1/health");
	}

	listProducts(): Promise<{ ids: string[] }> {
		return this.request("/v1/products");
	}

	getProduct(id: string): Promise<ProductRecord> {
		return this.request(`/v1/products/${encodeURIComponent(id)}`);
	}

	getProperties(id: string): Promise<MaterialProperties> {
		return this.request(`/v1/products/${encodeURIComponent(id)}/properties`);
	}

	putProperties(
		id: string,
		properties: MaterialProperties,
		author: string,
		expectedRevision?: number,
	): Promise<{ product_id: string; revision: number; provenance: string }> {
		const body: Record<string, unknown> = { properties, author };
		if (expectedRevision !== undefined) {
			body.expected_revision = expectedRevision;
		}
		return this.request(`/v1/products/${encodeURIComponent(id)}/properties`, {
			method: "PUT",
			body: JSON.stringify(body),
		});
	}

	getRevisions(id: string): Promise<{ product_id: string; revisions: { revision: number }[] }> {
		return this.request(`/v1/products/${encodeURIComponent(id)}/revisions`);
	}

	extract(id: string, backend?: string): Promise<{ status: string; properties?: MaterialProperties }> {
		const query = backend ? `?backend=${encodeURIComponent(backend)}` : "";
		return this.request(`/v1/products/${encodeURIComponent(id)}/extract${query}`, {
			method: "POST",
		});
	}

	matchSimilar(params: SimilarParams): Promise<MatchResponse> {
		const q = new URLSearchParams();
		if (params.color !== undefined) q.set("color", params.color);
		if (params.product !== undefined) q.set("product", params.product);
		if (params.shade !== undefined) q.set("shade", String(params.shade));
		if (params.category !== undefined) q.set("category", params.category);
		if (params.maxDeltaE !== undefined) q.set("max_delta_e", String(params.maxDeltaE));
		if (params.brand !== undefined) q.set("brand", params.brand);
		if (params.format !== undefined) q.set("format", params.format);
		if (params.finish !== undefined) q.set("finish", params.finish);
		if (params.harmony !== undefined) q.set("harmony", params.harmony);
		if (params.limit !== undefined) q.set("limit", String(params.limit));
		return this.request(`/v1/match/similar?${q.toString()}`);
	}

	matchOutfit(params: OutfitParams): Promise<MatchResponse & { profile: OutfitProfile }> {
		const body: Record<string, unknown> = { profile: params.profile };
		if (params.category !== undefined) body.category = params.category;
		if (params.maxDeltaE !== undefined) body.max_delta_e = params.maxDeltaE;
		if (params.harmony !== undefined) body.harmony = params.harmony;
		if (params.limit !== undefined) body.limit = params.limit;
		if (params.brand !== undefined) body.brand = params.brand;
		if (params.format !== undefined) body.format = params.format;
		if (params.finish !== undefined) body.finish = params.finish;
		return this.request("/v1/match/outfit", { method: "POST", body: JSON.stringify(body) });
	}

	pin(
		sourceKey: string,
		productId: string,
		shadeIndex: number,
		author: string,
	): Promise<{ revision: number }> {
		return this.request("/v1/associations", {
			method: "POST",
			body: JSON.stringify({
				source_key: sourceKey,
				product_id: productId,
				shade_index: shadeIndex,
				author,
			}),
		});
	}

	associations(sourceKey: string): Promise<{ associations: PinnedAssociation[] }> {
		return this.request(`/v1/associations?source_key=${encodeURIComponent(sourceKey)}`);
	}
}

export type { Recommendation };
