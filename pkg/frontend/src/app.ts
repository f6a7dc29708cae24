// Application shell: product browser on the left, override editor and match
// explorer for the selected product on the right.

import { ApiClient, ApiError } from "./api.js";
import { MatchExplorerView } from "./components/matchExplorer.js";
import { OverrideEditor } from "./components/overrideEditor.js";
import { ProductCard } from "./components/swatch.js";
import { MatchExplorer } from "./state.js";
import { MaterialProperties, OutfitProfile } from "./types.js";
import { normalizeHex } from "./validation.js";

const AUTHOR = "curator";

function errorBanner(root: HTMLElement, message: string): void {
	const banner = document.createElement("div");
	banner.className = "banner banner-error";
	banner.textContent = message;
	const dismiss = document.createElement("button");
	dismiss.type = "button";
	dismiss.textContent = "dismiss";
	dismiss.addEventListener("click", () => banner.remove());
	banner.appendChild(dismiss);
	root.prepend(banner);
}

export async function mount(root: HTMLElement, api: ApiClient): Promise<void> {
	root.replaceChildren();
	const layout = document.createElement("div");
	layout.className = "layout";
	const browser = document.createElement("div");
	browser.className = "browser-pane";
	const detail = document.createElement("div");
	detail.className = "detail-pane";
	layout.appendChild(browser);
	layout.appendChild(detail);
	root.appendChild(layout);

	const explorer = new MatchExplorer(api);
	const explorerView = new MatchExplorerView({
		explorer,
		author: AUTHOR,
		onError: (message) => errorBanner(detail, message),
	});

	const sourceBar = document.createElement("div");
	sourceBar.className = "source-bar";
	const picker = document.createElement("input");
	picker.type = "color";
	picker.className = "query-color-picker";
	picker.value = "#336699";
	const pickButton = document.createElement("button");
	pickButton.type = "button";
	pickButton.textContent = "Match picked color";
	pickButton.addEventListener("click", () => {
		const hex = normalizeHex(picker.value);
		if (!hex) {
			errorBanner(detail, `not a color: ${picker.value}`);
			return;
		}
		explorer.source = { kind: "color", hex };
		void explorerView.refresh();
	});
	sourceBar.appendChild(picker);
	sourceBar.appendChild(pickButton);

	const upload = document.createElement("input");
	upload.type = "file";
	upload.accept = "application/json";
	upload.className = "profile-upload";
	upload.addEventListener("change", async () => {
		const file = upload.files?.[0];
		if (!file) return;
		try {
			const profile = JSON.parse(await file.text()) as OutfitProfile;
			explorerView.useProfile(profile);
		} catch (error) {
			errorBanner(detail, `profile file unreadable: ${error}`);
		}
	});
	sourceBar.appendChild(upload);
	detail.appendChild(sourceBar);
	detail.appendChild(explorerView.element);

	const editorHost = document.createElement("div");
	editorHost.className = "editor-host";
	detail.appendChild(editorHost);

	async function openEditor(productId: string): Promise<void> {
		editorHost.replaceChildren();
		try {
			const [properties, revisions] = await Promise.all([
				api.getProperties(productId),
				api.getRevisions(productId),
			]);
			const latest = revisions.revisions.length
				? revisions.revisions[revisions.revisions.length - 1].revision
				: 0;
			const editor = new OverrideEditor({
				api,
				productId,
				initial: properties,
				revision: latest,
				author: AUTHOR,
				onSaved: () => void renderBrowser(),
				onReload: () => void openEditor(productId),
			});
			editorHost.appendChild(editor.element);
		} catch (error) {
			const message = error instanceof ApiError ? error.message : String(error);
			errorBanner(detail, message);
		}
	}

	async function renderBrowser(): Promise<void> {
		browser.replaceChildren();
		const { ids } = await api.listProducts();
		for (const id of ids) {
			const [product, properties] = await Promise.all([
				api.getProduct(id),
				api.getProperties(id).catch((error) => {
					if (error instanceof ApiError && error.code === "NotFound") {
						return null;
					}
					throw error;
				}),
			]);
			browser.appendChild(
				ProductCard({
					product,
					properties: properties as MaterialProperties | null,
					onEdit: (pid) => void openEditor(pid),
					onExplore: (pid, shadeIndex) => {
						explorer.source = { kind: "shade", productId: pid, shadeIndex };
						void explorerView.refresh();
					},
				}),
			);
		}
	}

	await renderBrowser();
}

declare global {
	interface Window {
		mpeMount?: typeof mount;
	}
}

if (typeof document !== "undefined" && document.getElementById("app")) {
	window.mpeMount = mount;
	void mount(document.getElementById("app") as HTMLElement, new ApiClient(""));
}
