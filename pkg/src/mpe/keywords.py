"""Title keyword screening.

Products whose titles advertise unsupported goods (multichrome or iridescent
shades, neon pigments, kits, organizers and similar non-product listings) are
screened out before extraction. Matching is case-insensitive and tolerant of
punctuation, hyphen/space spelling variants, and simple plurals.

The rule list ships with a built-in default and can be replaced from a JSON
config file so curators can extend it without touching code.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from typing import Optional, Sequence

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class EligibilityVerdict:
    eligible: bool
    matched_keyword: Optional[str] = None

    def __post_init__(self) -> None:
        if self.eligible and self.matched_keyword is not None:
            raise ValueError("eligible verdict must not carry a keyword")
        if not self.eligible and self.matched_keyword is None:
            raise ValueError("ineligible verdict must name the matched keyword")


@dataclass(frozen=True)
class KeywordRule:
    """One exclusion rule.

    kind:
      - "compound": parts match joined ("multichrome"), hyphenated or spaced,
        with a simple plural allowed on the last part
      - "phrase":   parts match as consecutive words, plural on the last
      - "stem":     any word starting with the stem matches
      - "word":     exact word (or its plural)
      - "adjacent": word matches only when directly next to one of the anchors
    keyword: the canonical term reported when the rule fires.
    """

    kind: str
    keyword: str
    parts: tuple[str, ...] = ()
    stem: str = ""
    word: str = ""
    anchors: tuple[str, ...] = ()

    def matches(self, tokens: Sequence[str]) -> bool:
        if self.kind == "compound":
            joined = "".join(self.parts)
            if any(t in (joined, joined + "s") for t in tokens):
                return True
            return _phrase_in(tokens, self.parts)
        if self.kind == "phrase":
            return _phrase_in(tokens, self.parts)
        if self.kind == "stem":
            return any(t.startswith(self.stem) for t in tokens)
        if self.kind == "word":
            return any(t in (self.word, self.word + "s") for t in tokens)
        if self.kind == "adjacent":
            for i, t in enumerate(tokens):
                if t not in (self.word, self.word + "s"):
                    continue
                if i > 0 and tokens[i - 1] in self.anchors:
                    return True
                if i + 1 < len(tokens) and tokens[i + 1] in self.anchors:
                    return True
            return False
        raise ValueError(f"unknown rule kind {self.kind!r}")

    def to_json_dict(self) -> dict:
        d: dict = {"kind": self.kind, "keyword": self.keyword}
        if self.parts:
            d["parts"] = list(self.parts)
        if self.stem:
            d["stem"] = self.stem
        if self.word:
            d["word"] = self.word
        if self.anchors:
            d["anchors"] = list(self.anchors)
        return d

    @classmethod
    def from_json_dict(cls, data: dict) -> "KeywordRule":
        return cls(
            kind=data["kind"],
            keyword=data["keyword"],
            parts=tuple(data.get("parts", ())),
            stem=data.get("stem", ""),
            word=data.get("word", ""),
            anchors=tuple(data.get("anchors", ())),
        )


def _phrase_in(tokens: Sequence[str], parts: Sequence[str]) -> bool:
    n = len(parts)
    for i in range(len(tokens) - n + 1):
        window = tokens[i : i + n]
        if all(window[j] == parts[j] for j in range(n - 1)) and window[n - 1] in (
            parts[n - 1],
            parts[n - 1] + "s",
        ):
            return True
    return False


_CONTAINER_WORDS = ("kit", "organizer", "bundle", "case")
_CONTAINER_ANCHORS = ("makeup", "eyeshadow", "eye", "cosmetic", "cosmetics")


def default_rules() -> list[KeywordRule]:
    rules = [
        KeywordRule(kind="compound", keyword="multichrome", parts=("multi", "chrome")),
        KeywordRule(kind="stem", keyword="iridescence", stem="iridescen"),
        KeywordRule(kind="stem", keyword="fluorescent", stem="fluorescen"),
        KeywordRule(kind="stem", keyword="fluorescent", stem="florescen"),
        KeywordRule(kind="word", keyword="neon", word="neon"),
        KeywordRule(kind="compound", keyword="duochrome", parts=("duo", "chrome")),
    ]
    for word in _CONTAINER_WORDS:
        rules.append(
            KeywordRule(
                kind="adjacent",
                keyword=f"makeup {word}",
                word=word,
                anchors=_CONTAINER_ANCHORS,
            )
        )
    return rules


@dataclass(frozen=True)
class KeywordConfig:
    rules: tuple[KeywordRule, ...]
    scan_description: bool = False

    @classmethod
    def default(cls) -> "KeywordConfig":
        return cls(rules=tuple(default_rules()))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "KeywordConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(
            rules=tuple(KeywordRule.from_json_dict(r) for r in data["rules"]),
            scan_description=bool(data.get("scan_description", False)),
        )

    def save(self, path: str | os.PathLike) -> None:
        data = {
            "scan_description": self.scan_description,
            "rules": [r.to_json_dict() for r in self.rules],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2)
            fh.write("\n")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def eligibility_filter(title: str, rules: Sequence[KeywordRule]) -> EligibilityVerdict:
    """Screen a product title against the exclusion rules.

    Returns an ineligible verdict naming the canonical keyword of the first
    rule that fires; otherwise the product is eligible for extraction.
    """
    tokens = tokenize(title)
    for rule in rules:
        if rule.matches(tokens):
            return EligibilityVerdict(eligible=False, matched_keyword=rule.keyword)
    return EligibilityVerdict(eligible=True)
