// Match explorer panel: distance slider, filter chips, harmony toggle, and
// the ranked result list. Scores always come from the service; clicking a
// result pins it as a curated association.

import { MatchExplorer } from "../state.js";
import { FORMATS, OutfitProfile, Recommendation } from "../types.js";

export interface MatchExplorerViewParams {
	explorer: MatchExplorer;
	author: string;
	onError?: (message: string) => void;
}

export class MatchExplorerView {
	readonly element: HTMLElement;
	private slider!: HTMLInputElement;
	private sliderValue!: HTMLElement;
	private harmonyToggle!: HTMLInputElement;
	private resultsList!: HTMLElement;
	private statusLine!: HTMLElement;
	private formatChips: HTMLButtonElement[] = [];

	constructor(private readonly params: MatchExplorerViewParams) {
		this.element = this.render();
	}

	private render(): HTMLElement {
		const root = document.createElement("section");
		root.className = "match-explorer";

		const controls = document.createElement("div");
		controls.className = "explorer-controls";

		const sliderLabel = document.createElement("label");
		sliderLabel.textContent = "max deltaE ";
		this.slider = document.createElement("input");
		this.slider.type = "range";
		this.slider.min = "1";
		this.slider.max = "30";
		this.slider.step = "1";
		this.slider.value = String(this.params.explorer.maxDeltaE);
		this.slider.className = "delta-e-slider";
		this.sliderValue = document.createElement("span");
		this.sliderValue.className = "delta-e-value";
		this.sliderValue.textContent = this.slider.value;
		this.slider.addEventListener("input", () => {
			this.sliderValue.textContent = this.slider.value;
		});
		this.slider.addEventListener("change", () => {
			this.params.explorer.maxDeltaE = Number(this.slider.value);
			void this.refresh();
		});
		sliderLabel.appendChild(this.slider);
		sliderLabel.appendChild(this.sliderValue);
		controls.appendChild(sliderLabel);

		const chipRow = document.createElement("div");
		chipRow.className = "filter-chips";
		for (const format of FORMATS) {
			const chip = document.createElement("button");
			chip.type = "button";
			chip.className = "filter-chip";
			chip.dataset.format = format;
			chip.textContent = format;
			chip.addEventListener("click", () => {
				const active = chip.classList.toggle("active");
				for (const other of this.formatChips) {
					if (other !== chip) other.classList.remove("active");
				}
				this.params.explorer.filters.format = active ? format : undefined;
				void this.refresh();
			});
			this.formatChips.push(chip);
			chipRow.appendChild(chip);
		}
		controls.appendChild(chipRow);

		const harmonyLabel = document.createElement("label");
		harmonyLabel.className = "harmony-toggle";
		this.harmonyToggle = document.createElement("input");
		this.harmonyToggle.type = "checkbox";
		this.harmonyToggle.addEventListener("change", () => {
			this.params.explorer.harmony = this.harmonyToggle.checked ? "Complementary" : "Exact";
			void this.refresh();
		});
		harmonyLabel.appendChild(this.harmonyToggle);
		harmonyLabel.appendChild(document.createTextNode(" complementary harmony"));
		controls.appendChild(harmonyLabel);

		root.appendChild(controls);

		this.statusLine = document.createElement("p");
		this.statusLine.className = "explorer-status";
		root.appendChild(this.statusLine);

		this.resultsList = document.createElement("ul");
		this.resultsList.className = "result-list";
		root.appendChild(this.resultsList);
		return root;
	}

	/** Re-query with the current knobs and re-render the committed results. */
	async refresh(): Promise<void> {
		const explorer = this.params.explorer;
		if (explorer.source === null) {
			this.statusLine.textContent = "Pick a shade, color, or outfit profile to explore.";
			return;
		}
		this.statusLine.textContent = "querying...";
		try {
			const response = await explorer.run();
			if (response === null) {
				return; // superseded by a newer query
			}
			this.renderResults();
		} catch (error) {
			this.statusLine.textContent = "";
			this.params.onError?.(String(error));
		}
	}

	renderResults(): void {
		const explorer = this.params.explorer;
		this.resultsList.replaceChildren();
		if (explorer.results.length === 0) {
			this.statusLine.textContent =
				`No matches within deltaE ${explorer.maxDeltaE}. Try raising the limit.`;
			return;
		}
		this.statusLine.textContent = `${explorer.results.length} matches`;
		const pinnedKeys = new Set(
			explorer.pinned.map((p) => `${p.product_id}:${p.shade_index}`),
		);
		for (const result of explorer.results) {
			this.resultsList.appendChild(this.renderResult(result, pinnedKeys));
		}
	}

	private renderResult(result: Recommendation, pinnedKeys: Set<string>): HTMLElement {
		const li = document.createElement("li");
		li.className = "result-row";
		li.dataset.productId = result.product_id;
		li.dataset.shadeIndex = String(result.shade_index);

		const chip = document.createElement("span");
		chip.className = "color-chip result-chip";
		chip.style.background = result.matched_color;
		chip.dataset.hex = result.matched_color;
		li.appendChild(chip);

		const label = document.createElement("span");
		label.className = "result-label";
		label.textContent = `${result.product_id} / shade ${result.shade_index}`;
		li.appendChild(label);

		const score = document.createElement("span");
		score.className = "result-score";
		score.textContent = `deltaE ${result.score.toFixed(2)}`;
		li.appendChild(score);

		for (const name of result.satisfied_filters) {
			const tag = document.createElement("span");
			tag.className = "satisfied-filter";
			tag.textContent = name;
			li.appendChild(tag);
		}

		const pin = document.createElement("button");
		pin.type = "button";
		pin.className = "pin-button";
		const already = pinnedKeys.has(`${result.product_id}:${result.shade_index}`);
		pin.textContent = already ? "pinned" : "pin";
		pin.disabled = already;
		pin.addEventListener("click", async () => {
			try {
				await this.params.explorer.pinResult(result, this.params.author);
				pin.textContent = "pinned";
				pin.disabled = true;
			} catch (error) {
				this.params.onError?.(String(error));
			}
		});
		li.appendChild(pin);
		return li;
	}

	/** Load an uploaded outfit profile JSON as the query source. */
	useProfile(profile: OutfitProfile): void {
		this.params.explorer.source = { kind: "profile", profile };
		void this.refresh();
	}
}
