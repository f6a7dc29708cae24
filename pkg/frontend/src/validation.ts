// Client-side checks mirroring the service's property invariants, so bad
// edits are blocked before a PUT ever leaves the browser.

import { FINISHES, FORMATS, MaterialProperties } from "./types.js";

const HEX_RE = /^#[0-9A-F]{6}$/;

// The service stores reflective colors post-scaling, so every channel is at
// least 153 (0.6 of full scale).
const REFLECTIVE_MIN_CHANNEL = 153;

export interface ValidationIssue {
	field: string;
	message: string;
}

/** Uppercase a user-picked color to the wire format; null when not a color. */
export function normalizeHex(input: string): string | null {
	const candidate = input.trim().toUpperCase();
	return HEX_RE.test(candidate) ? candidate : null;
}

function channels(hex: string): [number, number, number] {
	return [
		parseInt(hex.slice(1, 3), 16),
		parseInt(hex.slice(3, 5), 16),
		parseInt(hex.slice(5, 7), 16),
	];
}

export function validateProperties(props: MaterialProperties): ValidationIssue[] {
	const issues: ValidationIssue[] = [];
	if (!FORMATS.includes(props.format)) {
		issues.push({ field: "format", message: `unknown format "${props.format}"` });
	}
	if (!props.shades.length) {
		issues.push({ field: "shades", message: "a product needs at least one shade" });
	}
	props.shades.forEach((shade, i) => {
		const at = `shades[${i}]`;
		if (!HEX_RE.test(shade.base_color)) {
			issues.push({ field: `${at}.base_color`, message: `"${shade.base_color}" is not #RRGGBB` });
		}
		if (!FINISHES.includes(shade.finish)) {
			issues.push({ field: `${at}.finish`, message: `unknown finish "${shade.finish}"` });
		}
		if (shade.finish === "Glitter") {
			if (!shade.reflective_color) {
				issues.push({
					field: `${at}.reflective_color`,
					message: "a glitter shade needs a reflective color",
				});
			} else if (!HEX_RE.test(shade.reflective_color)) {
				issues.push({
					field: `${at}.reflective_color`,
					message: `"${shade.reflective_color}" is not #RRGGBB`,
				});
			} else if (channels(shade.reflective_color).some((c) => c < REFLECTIVE_MIN_CHANNEL)) {
				issues.push({
					field: `${at}.reflective_color`,
					message: `reflective channels must be at least ${REFLECTIVE_MIN_CHANNEL} (bright sparkle)`,
				});
			}
		} else if (shade.reflective_color) {
			issues.push({
				field: `${at}.reflective_color`,
				message: `a ${shade.finish.toLowerCase()} shade must not carry a reflective color`,
			});
		}
	});
	return issues;
}
