// Per-product override editor. Edits are validated client-side (the
// glitter/reflective pairing above all) before any PUT; a stale revision
// surfaces as a conflict banner with a reload action, and a successful save
// re-reads the effective properties so the provenance badge reflects the
// store, not our optimism.

import { ApiClient, ApiError } from "../api.js";
import { FINISHES, FORMATS, FinishType, Format, MaterialProperties } from "../types.js";
import { normalizeHex, validateProperties } from "../validation.js";

export interface OverrideEditorParams {
	api: ApiClient;
	productId: string;
	initial: MaterialProperties;
	/** Latest known override revision (0 when none). */
	revision: number;
	author: string;
	onSaved?: (effective: MaterialProperties, revision: number) => void;
	onReload?: () => void;
}

interface ShadeInputs {
	color: HTMLInputElement;
	finish: HTMLSelectElement;
	reflective: HTMLInputElement;
	reflectiveEnabled: HTMLInputElement;
}

export class OverrideEditor {
	readonly element: HTMLElement;
	private formatSelect!: HTMLSelectElement;
	private shadeInputs: ShadeInputs[] = [];
	private banner!: HTMLElement;
	private issueList!: HTMLElement;
	private revision: number;

	constructor(private readonly params: OverrideEditorParams) {
		this.revision = params.revision;
		this.element = this.render(params.initial);
	}

	private render(initial: MaterialProperties): HTMLElement {
		const root = document.createElement("form");
		root.className = "override-editor";
		root.addEventListener("submit", (event) => {
			event.preventDefault();
			void this.submit();
		});

		this.banner = document.createElement("div");
		this.banner.className = "banner hidden";
		root.appendChild(this.banner);

		const formatRow = document.createElement("label");
		formatRow.textContent = "Format ";
		this.formatSelect = document.createElement("select");
		this.formatSelect.className = "format-select";
		for (const format of FORMATS) {
			const option = document.createElement("option");
			option.value = format;
			option.textContent = format;
			option.selected = format === initial.format;
			this.formatSelect.appendChild(option);
		}
		formatRow.appendChild(this.formatSelect);
		root.appendChild(formatRow);

		initial.shades.forEach((shade, i) => {
			const row = document.createElement("fieldset");
			row.className = "shade-editor";
			const legend = document.createElement("legend");
			legend.textContent = `Shade ${i}`;
			row.appendChild(legend);

			const color = document.createElement("input");
			color.type = "color";
			color.className = "base-color-input";
			color.value = shade.base_color;
			row.appendChild(color);

			const finish = document.createElement("select");
			finish.className = "finish-select";
			for (const value of FINISHES) {
				const option = document.createElement("option");
				option.value = value;
				option.textContent = value;
				option.selected = value === shade.finish;
				finish.appendChild(option);
			}
			row.appendChild(finish);

			const reflectiveEnabled = document.createElement("input");
			reflectiveEnabled.type = "checkbox";
			reflectiveEnabled.className = "reflective-enabled";
			reflectiveEnabled.checked = shade.reflective_color !== null;
			row.appendChild(reflectiveEnabled);

			const reflective = document.createElement("input");
			reflective.type = "color";
			reflective.className = "reflective-color-input";
			reflective.value = shade.reflective_color ?? "#FFFFFF";
			reflective.disabled = shade.reflective_color === null;
			row.appendChild(reflective);

			reflectiveEnabled.addEventListener("change", () => {
				reflective.disabled = !reflectiveEnabled.checked;
			});
			finish.addEventListener("change", () => {
				// glitter implies a reflective color; turning it on here keeps
				// the common path one click shorter
				if (finish.value === "Glitter" && !reflectiveEnabled.checked) {
					reflectiveEnabled.checked = true;
					reflective.disabled = false;
				}
			});

			this.shadeInputs.push({ color, finish, reflective, reflectiveEnabled });
			root.appendChild(row);
		});

		this.issueList = document.createElement("ul");
		this.issueList.className = "issues hidden";
		root.appendChild(this.issueList);

		const save = document.createElement("button");
		save.type = "submit";
		save.className = "save-button";
		save.textContent = "Save override";
		root.appendChild(save);
		return root;
	}

	/** Current form content as wire properties; hexes normalized uppercase. */
	collect(): MaterialProperties {
		return {
			format: this.formatSelect.value as Format,
			best_image_position: this.params.initial.best_image_position,
			provenance: "Override",
			shades: this.params.initial.shades.map((shade, i) => {
				const inputs = this.shadeInputs[i];
				const wantsReflective = !inputs.reflective.disabled && inputs.reflectiveEnabled.checked;
				return {
					region: shade.region,
					base_color: normalizeHex(inputs.color.value) ?? inputs.color.value,
					finish: inputs.finish.value as FinishType,
					reflective_color: wantsReflective
						? normalizeHex(inputs.reflective.value) ?? inputs.reflective.value
						: null,
				};
			}),
		};
	}

	/** Validate and PUT; returns the new revision or null when blocked. */
	async submit(): Promise<number | null> {
		this.hideBanner();
		const props = this.collect();
		const issues = validateProperties(props);
		if (issues.length > 0) {
			this.issueList.classList.remove("hidden");
			this.issueList.replaceChildren(
				...issues.map((issue) => {
					const li = document.createElement("li");
					li.textContent = `${issue.field}: ${issue.message}`;
					return li;
				}),
			);
			return null;
		}
		this.issueList.classList.add("hidden");
		try {
			const saved = await this.params.api.putProperties(
				this.params.productId,
				props,
				this.params.author,
				this.revision,
			);
			this.revision = saved.revision;
			const effective = await this.params.api.getProperties(this.params.productId);
			this.params.onSaved?.(effective, saved.revision);
			this.showBanner(`Saved revision ${saved.revision}; provenance ${effective.provenance}`, "ok");
			return saved.revision;
		} catch (error) {
			if (error instanceof ApiError && error.code === "Conflict") {
				this.showConflict(error.message);
			} else if (error instanceof ApiError) {
				this.showBanner(`${error.code}: ${error.message}`, "error");
			} else {
				this.showBanner(String(error), "error");
			}
			return null;
		}
	}

	private showConflict(message: string): void {
		this.showBanner(`Conflict: ${message}`, "error");
		const reload = document.createElement("button");
		reload.type = "button";
		reload.className = "reload-button";
		reload.textContent = "Reload latest";
		reload.addEventListener("click", () => this.params.onReload?.());
		this.banner.appendChild(reload);
	}

	private showBanner(message: string, tone: "ok" | "error"): void {
		this.banner.textContent = message;
		this.banner.className = `banner banner-${tone}`;
	}

	private hideBanner(): void {
		this.banner.className = "banner hidden";
		this.banner.replaceChildren();
	}
}
