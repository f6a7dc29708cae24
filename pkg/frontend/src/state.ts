// Match explorer state: the knobs the curator can turn, the last committed
// query, and its results. The rendered result list always belongs to the
// latest committed query; responses of superseded queries are dropped.

import { ApiClient, SimilarParams } from "./api.js";
import {
	Harmony,
	MatchResponse,
	OutfitProfile,
	PinnedAssociation,
	Recommendation,
} from "./types.js";

export type QuerySource =
	| { kind: "shade"; productId: string; shadeIndex: number; category?: string }
	| { kind: "color"; hex: string; category?: string }
	| { kind: "profile"; profile: OutfitProfile; category?: string };

export interface ExplorerFilters {
	brand?: string;
	format?: string;
	finish?: string;
}

/** Key a query source the way the service keys pinned associations. */
export function sourceKey(source: QuerySource): string {
	switch (source.kind) {
		case "shade":
			return `shade:${source.productId}:${source.shadeIndex}`;
		case "color":
			return `color:${source.hex}`;
		case "profile":
			return "profile:" + source.profile.colors.map((c) => c.hex).join("+");
	}
}

export class MatchExplorer {
	source: QuerySource | null = null;
	maxDeltaE = 10;
	harmony: Harmony = "Exact";
	filters: ExplorerFilters = {};
	limit = 20;

	results: Recommendation[] = [];
	pinned: PinnedAssociation[] = [];
	committed: string | null = null;

	private sequence = 0;

	constructor(private readonly api: ApiClient) {}

	/** Serialized form of the current knobs; equality means "same query". */
	describe(): string {
		return JSON.stringify({
			source: this.source,
			maxDeltaE: this.maxDeltaE,
			harmony: this.harmony,
			filters: this.filters,
			limit: this.limit,
		});
	}

	get isStale(): boolean {
		return this.committed !== this.describe();
	}

	/** Commit the current knobs and fetch; stale responses are discarded. */
	async run(): Promise<MatchResponse | null> {
		if (this.source === null) {
			throw new Error("pick a query source first");
		}
		const ticket = ++this.sequence;
		const description = this.describe();
		const response = await this.query(this.source);
		if (ticket !== this.sequence) {
			return null; // a newer query was committed while this one was in flight
		}
		this.results = response.results;
		this.pinned = response.pinned;
		this.committed = description;
		return response;
	}

	private query(source: QuerySource): Promise<MatchResponse> {
		if (source.kind === "profile") {
			return this.api.matchOutfit({
				profile: source.profile,
				category: source.category,
				maxDeltaE: this.maxDeltaE,
				harmony: this.harmony,
				limit: this.limit,
				...this.filters,
			});
		}
		const params: SimilarParams = {
			maxDeltaE: this.maxDeltaE,
			harmony: this.harmony,
			limit: this.limit,
			category: source.category,
			...this.filters,
		};
		if (source.kind === "shade") {
			params.product = source.productId;
			params.shade = source.shadeIndex;
		} else {
			params.color = source.hex;
		}
		return this.api.matchSimilar(params);
	}

	/** Persist a curated pick for the committed source. */
	async pinResult(result: Recommendation, author: string): Promise<number> {
		if (this.source === null) {
			throw new Error("nothing committed to pin against");
		}
		const { revision } = await this.api.pin(
			sourceKey(this.source),
			result.product_id,
			result.shade_index,
			author,
		);
		this.pinned = [
			...this.pinned,
			{
				product_id: result.product_id,
				shade_index: result.shade_index,
				author,
				revision,
			},
		];
		return revision;
	}
}
