// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { ProductCard, ShadeSwatch } from "../src/components/swatch.js";
import { MaterialProperties, ProductRecord, ShadeProperties } from "../src/types.js";

const region = { cx: 0.5, cy: 0.5, w: 0.4, h: 0.4, confidence: 0.9 };

function matte(hex: string): ShadeProperties {
	return { region, base_color: hex, finish: "Matte", reflective_color: null };
}

function glitter(hex: string, reflective: string): ShadeProperties {
	return { region, base_color: hex, finish: "Glitter", reflective_color: reflective };
}

const product: ProductRecord = {
	product_id: "p1",
	title: "Velvet Shadow",
	category: "Eyeshadow",
	brand: "Lumina",
	description: "",
	images: [],
};

describe("ShadeSwatch", () => {
	it("renders the stored hex verbatim", () => {
		const el = ShadeSwatch({ shade: matte("#A1B2C3"), index: 0 });
		const chip = el.querySelector(".base-chip") as HTMLElement;
		expect(chip.dataset.hex).toBe("#A1B2C3");
		expect(el.querySelector(".hex-label")?.textContent).toBe("#A1B2C3");
	});

	it("shows the reflective chip only for glitter", () => {
		const matteEl = ShadeSwatch({ shade: matte("#A1B2C3"), index: 0 });
		expect(matteEl.querySelector(".reflective-chip")).toBeNull();

		const glitterEl = ShadeSwatch({ shade: glitter("#A1B2C3", "#FFEEDD"), index: 0 });
		const reflective = glitterEl.querySelector(".reflective-chip") as HTMLElement;
		expect(reflective).not.toBeNull();
		expect(reflective.dataset.hex).toBe("#FFEEDD");
	});

	it("clicking the chip reports the shade index", () => {
		let selected = -1;
		const el = ShadeSwatch({ shade: matte("#A1B2C3"), index: 3, onSelect: (i) => (selected = i) });
		(el.querySelector(".base-chip") as HTMLElement).click();
		expect(selected).toBe(3);
	});
});

describe("ProductCard", () => {
	const properties: MaterialProperties = {
		format: "Powder",
		best_image_position: 0,
		provenance: "Override",
		shades: [matte("#A1B2C3"), glitter("#443322", "#FFEEDD")],
	};

	it("shows the provenance badge and one swatch per shade", () => {
		const card = ProductCard({ product, properties });
		const badge = card.querySelector(".provenance-badge") as HTMLElement;
		expect(badge.textContent).toBe("Override");
		expect(badge.classList.contains("provenance-override")).toBe(true);
		expect(card.querySelectorAll(".shade-swatch")).toHaveLength(2);
	});

	it("renders an empty note without properties", () => {
		const card = ProductCard({ product, properties: null });
		expect(card.querySelector(".empty-note")).not.toBeNull();
		expect(card.querySelector(".provenance-badge")).toBeNull();
	});
});
