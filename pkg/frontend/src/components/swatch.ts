// Swatch rendering. The chip background and data attribute carry the stored
// hex verbatim; a reflective chip exists exactly for glitter shades.

import { MaterialProperties, ProductRecord, ShadeProperties } from "../types.js";

export interface ShadeSwatchProps {
	shade: ShadeProperties;
	index: number;
	onSelect?: (index: number) => void;
}

export function ShadeSwatch(props: ShadeSwatchProps): HTMLElement {
	const { shade } = props;
	const root = document.createElement("div");
	root.className = "shade-swatch";

	const chip = document.createElement("button");
	chip.type = "button";
	chip.className = "color-chip base-chip";
	chip.style.background = shade.base_color;
	chip.dataset.hex = shade.base_color;
	chip.title = `${shade.base_color} (${shade.finish})`;
	chip.addEventListener("click", () => props.onSelect?.(props.index));
	root.appendChild(chip);

	const label = document.createElement("span");
	label.className = "hex-label";
	label.textContent = shade.base_color;
	root.appendChild(label);

	const badge = document.createElement("span");
	badge.className = `finish-badge finish-${shade.finish.toLowerCase()}`;
	badge.textContent = shade.finish;
	root.appendChild(badge);

	if (shade.finish === "Glitter" && shade.reflective_color) {
		const reflective = document.createElement("span");
		reflective.className = "color-chip reflective-chip";
		reflective.style.background = shade.reflective_color;
		reflective.dataset.hex = shade.reflective_color;
		reflective.title = `reflective ${shade.reflective_color}`;
		root.appendChild(reflective);
	}
	return root;
}

export interface ProductCardProps {
	product: ProductRecord;
	properties: MaterialProperties | null;
	onEdit?: (productId: string) => void;
	onExplore?: (productId: string, shadeIndex: number) => void;
}

export function ProductCard(props: ProductCardProps): HTMLElement {
	const { product, properties } = props;
	const card = document.createElement("section");
	card.className = "product-card";
	card.dataset.productId = product.product_id;

	const header = document.createElement("header");
	const title = document.createElement("h3");
	title.textContent = product.title;
	header.appendChild(title);

	const meta = document.createElement("p");
	meta.className = "product-meta";
	meta.textContent = `${product.brand || "unbranded"} | ${product.category}`;
	header.appendChild(meta);

	if (properties) {
		const provenance = document.createElement("span");
		provenance.className = `provenance-badge provenance-${properties.provenance.toLowerCase()}`;
		provenance.textContent = properties.provenance;
		header.appendChild(provenance);

		const format = document.createElement("span");
		format.className = "format-badge";
		format.textContent = properties.format;
		header.appendChild(format);
	}
	card.appendChild(header);

	const shades = document.createElement("div");
	shades.className = "shade-row";
	if (properties) {
		properties.shades.forEach((shade, i) => {
			shades.appendChild(
				ShadeSwatch({
					shade,
					index: i,
					onSelect: (idx) => props.onExplore?.(product.product_id, idx),
				}),
			);
		});
	} else {
		const empty = document.createElement("p");
		empty.className = "empty-note";
		empty.textContent = "no extracted properties yet";
		shades.appendChild(empty);
	}
	card.appendChild(shades);

	if (props.onEdit && properties) {
		const edit = document.createElement("button");
		edit.type = "button";
		edit.className = "edit-button";
		edit.textContent = "Review / override";
		edit.addEventListener("click", () => props.onEdit?.(product.product_id));
		card.appendChild(edit);
	}
	return card;
}
