// Wire types of the /v1 contract. Hex colors are always uppercase "#RRGGBB".

export type Format = "Powder" | "Cream" | "Stick" | "Liquid";
export type FinishType = "Matte" | "Shimmer" | "Metallic" | "Glitter";
export type Provenance = "Pipeline" | "Override" | "GroundTruth";
export type Harmony = "Exact" | "Complementary";

export const FORMATS: Format[] = ["Powder", "Cream", "Stick", "Liquid"];
export const FINISHES: FinishType[] = ["Matte", "Shimmer", "Metallic", "Glitter"];

export interface Region {
	cx: number;
	cy: number;
	w: number;
	h: number;
	confidence: number;
}

export interface ShadeProperties {
	region: Region;
	base_color: string;
	finish: FinishType;
	reflective_color: string | null;
}

export interface MaterialProperties {
	format: Format;
	best_image_position: number;
	provenance: Provenance;
	shades: ShadeProperties[];
}

export interface ImageRef {
	position: number;
	uri: string;
	width: number;
	height: number;
}

export interface ProductRecord {
	product_id: string;
	title: string;
	category: string;
	brand: string;
	description: string;
	images: ImageRef[];
	ground_truth?: MaterialProperties;
}

export interface Recommendation {
	product_id: string;
	shade_index: number;
	score: number;
	matched_color: string;
	satisfied_filters: string[];
}

export interface PinnedAssociation {
	product_id: string;
	shade_index: number;
	author: string;
	revision: number;
}

export interface MatchResponse {
	results: Recommendation[];
	pinned: PinnedAssociation[];
}

export interface ProfileColor {
	hex: string;
	weight: number;
}

export interface OutfitProfile {
	region: string;
	pixel_count: number;
	colors: ProfileColor[];
}

export interface ApiErrorBody {
	error: { code: string; message: string; stage?: string };
}
