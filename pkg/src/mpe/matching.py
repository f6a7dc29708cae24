"""Color-driven recommendation across the catalog.

Candidates are ranked by CIE76 distance between the query color and each
shade's base color, cut off at the query's distance limit (default 10, past
which two colors stop reading as "the same color"), optionally pre-filtered
by structured attributes. Outfit profiles rank by the minimum distance over
the profile's dominant colors, and a complementary harmony rule maps each
query color to its hue opposite (180 degree HSL rotation, lightness kept)
before ranking.

Curator-pinned matches are stored in the catalog and surfaced separately:
they annotate, never silently re-rank, the algorithmic results.
"""

from __future__ import annotations

import colorsys
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .catalog import CatalogStore, Category, PinnedAssociation
from .clothes import OutfitColorProfile
from .colors import LabColor, NormalizedRgb, RgbColor, delta_e, srgb_to_lab
from .properties import FinishType, Format

DEFAULT_MAX_DELTA_E = 10.0
GRID_CELL = 10.0  # Lab units per grid cell; equals the default distance limit


class MatchError(Exception):
    pass


class NoExtractedProperties(MatchError):
    pass


class EmptyProfile(MatchError):
    pass


class Harmony(enum.Enum):
    EXACT = "Exact"
    COMPLEMENTARY = "Complementary"


@dataclass(frozen=True)
class ShadeRef:
    product_id: str
    shade_index: int


@dataclass(frozen=True)
class AttributeFilter:
    brand: Optional[str] = None
    format: Optional[Format] = None
    finish: Optional[FinishType] = None

    def names(self) -> tuple[str, ...]:
        out = []
        if self.brand is not None:
            out.append("brand")
        if self.format is not None:
            out.append("format")
        if self.finish is not None:
            out.append("finish")
        return tuple(out)

    @property
    def empty(self) -> bool:
        return not self.names()


MatchSource = Union[ShadeRef, RgbColor, OutfitColorProfile]


@dataclass(frozen=True)
class MatchQuery:
    source: MatchSource
    target_category: Category
    max_delta_e: float = DEFAULT_MAX_DELTA_E
    attribute_filter: AttributeFilter = field(default_factory=AttributeFilter)
    harmony: Harmony = Harmony.EXACT
    limit: int = 10

    def __post_init__(self) -> None:
        if self.max_delta_e <= 0:
            raise ValueError("max_delta_e must be positive")
        if self.limit < 1:
            raise ValueError("limit must be >= 1")


@dataclass(frozen=True)
class Recommendation:
    product_id: str
    shade_index: int
    score: float  # deltaE to the query target, lower is better
    matched_color: RgbColor
    satisfied_filters: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "product_id": self.product_id,
            "shade_index": self.shade_index,
            "score": self.score,
            "matched_color": self.matched_color.hex,
            "satisfied_filters": list(self.satisfied_filters),
        }


def complement(color: RgbColor) -> RgbColor:
    """Hue-opposite of a color: 180 degree rotation in HSL, lightness kept."""
    h, l, s = colorsys.rgb_to_hls(color.r / 255.0, color.g / 255.0, color.b / 255.0)
    r, g, b = colorsys.hls_to_rgb((h + 0.5) % 1.0, l, s)
    return NormalizedRgb(r, g, b).to_rgb()


@dataclass(frozen=True)
class _Candidate:
    product_id: str
    shade_index: int
    color: RgbColor
    lab: LabColor


class _LabGridIndex:
    """Exact nearest-color lookup over Lab space, bucketed into 10-unit cells.

    Queries scan every cell the search ball's bounding box touches, then
    filter by true distance, so results are identical to a linear scan.
    """

    def __init__(self, candidates: list[_Candidate]):
        self._cells: dict[tuple[int, int, int], list[_Candidate]] = {}
        for cand in candidates:
            key = self._cell(cand.lab)
            self._cells.setdefault(key, []).append(cand)

    @staticmethod
    def _cell(lab: LabColor) -> tuple[int, int, int]:
        return (
            math.floor(lab.L / GRID_CELL),
            math.floor(lab.a / GRID_CELL),
            math.floor(lab.b / GRID_CELL),
        )

    def within(self, target: LabColor, radius: float) -> list[_Candidate]:
        lo = [math.floor((v - radius) / GRID_CELL) for v in (target.L, target.a, target.b)]
        hi = [math.floor((v + radius) / GRID_CELL) for v in (target.L, target.a, target.b)]
        out = []
        for i in range(lo[0], hi[0] + 1):
            for j in range(lo[1], hi[1] + 1):
                for k in range(lo[2], hi[2] + 1):
                    out.extend(self._cells.get((i, j, k), ()))
        return out


class MatchMaker:
    """Ranks catalog shades against color queries.

    Uses a linear scan below ``index_threshold`` candidate shades and the
    lossless Lab grid index above it.
    """

    def __init__(self, store: CatalogStore, index_threshold: int = 100_000):
        self._store = store
        self._index_threshold = index_threshold

    # -- candidate enumeration -------------------------------------------------

    def _candidates(self, query: MatchQuery, exclude_product: Optional[str]) -> list[_Candidate]:
        filt = query.attribute_filter
        out = []
        for pid in self._store.query(category=query.target_category, brand=filt.brand,
                                     format=filt.format):
            if pid == exclude_product:
                continue
            props = self._store.effective_properties(pid)
            if props is None:
                continue
            for idx, shade in enumerate(props.shades):
                if filt.finish is not None and shade.finish is not filt.finish:
                    continue
                out.append(_Candidate(pid, idx, shade.base_color,
                                      srgb_to_lab(shade.base_color)))
        return out

    def _rank(
        self,
        targets: list[tuple[LabColor, float]],
        query: MatchQuery,
        exclude_product: Optional[str],
    ) -> list[Recommendation]:
        """Score candidates by min deltaE over the targets; weights break ties."""
        candidates = self._candidates(query, exclude_product)
        if len(candidates) > self._index_threshold:
            index = _LabGridIndex(candidates)
            pool: list[_Candidate] = []
            seen = set()
            for lab, _w in targets:
                for cand in index.within(lab, query.max_delta_e):
                    key = (cand.product_id, cand.shade_index)
                    if key not in seen:
                        seen.add(key)
                        pool.append(cand)
            candidates = pool

        names = query.attribute_filter.names()
        scored = []
        for cand in candidates:
            best_score = math.inf
            best_weight = 0.0
            for lab, weight in targets:
                d = delta_e(lab, cand.lab)
                if d < best_score or (d == best_score and weight > best_weight):
                    best_score = d
                    best_weight = weight
            if best_score <= query.max_delta_e:
                scored.append((best_score, -best_weight, cand.product_id, cand.shade_index, cand))
        scored.sort(key=lambda t: t[:4])
        return [
            Recommendation(
                product_id=cand.product_id,
                shade_index=cand.shade_index,
                score=score,
                matched_color=cand.color,
                satisfied_filters=names,
            )
            for score, _nw, _pid, _idx, cand in scored[: query.limit]
        ]

    # -- source resolution ---------------------------------------------------

    def _resolve_color(self, source: MatchSource) -> tuple[RgbColor, Optional[str]]:
        if isinstance(source, RgbColor):
            return source, None
        if isinstance(source, ShadeRef):
            props = self._store.effective_properties(source.product_id)
            if props is None:
                raise NoExtractedProperties(
                    f"product {source.product_id!r} has no extracted properties"
                )
            if not 0 <= source.shade_index < len(props.shades):
                raise NoExtractedProperties(
                    f"product {source.product_id!r} has no shade {source.shade_index}"
                )
            return props.shades[source.shade_index].base_color, source.product_id
        raise MatchError(f"not a shade or color source: {type(source).__name__}")

    @staticmethod
    def _apply_harmony(color: RgbColor, harmony: Harmony) -> RgbColor:
        return complement(color) if harmony is Harmony.COMPLEMENTARY else color

    # -- public operations -------------------------------------------------------

    def similar_shades(self, query: MatchQuery) -> list[Recommendation]:
        """Rank shades of the target category by distance to the query color."""
        color, exclude = self._resolve_color(query.source)
        target = self._apply_harmony(color, query.harmony)
        return self._rank([(srgb_to_lab(target), 1.0)], query, exclude)

    def attribute_combined(self, query: MatchQuery) -> list[Recommendation]:
        """Color ranking over candidates that satisfy every structured filter.

        With an empty filter this is exactly similar_shades.
        """
        return self.similar_shades(query)

    def outfit_match(self, profile: OutfitColorProfile, query: MatchQuery) -> list[Recommendation]:
        """Rank shades against an outfit's dominant colors.

        Each profile color is queried independently; a candidate's score is
        its minimum distance over the profile colors, and profile weight
        breaks exact ties. Complementary harmony rotates every profile color
        to its hue opposite first.
        """
        if not profile.colors:
            raise EmptyProfile("outfit profile has no colors")
        targets = [
            (srgb_to_lab(self._apply_harmony(wc.color, query.harmony)), wc.weight)
            for wc in profile.colors
        ]
        return self._rank(targets, query, exclude_product=None)

    # -- curator pins ------------------------------------------------------------

    @staticmethod
    def source_key(source: MatchSource) -> str:
        if isinstance(source, ShadeRef):
            return f"shade:{source.product_id}:{source.shade_index}"
        if isinstance(source, RgbColor):
            return f"color:{source.hex}"
        if isinstance(source, OutfitColorProfile):
            return "profile:" + "+".join(wc.color.hex for wc in source.colors)
        raise MatchError(f"cannot key source {type(source).__name__}")

    def pin(self, source: MatchSource, product_id: str, shade_index: int, author: str) -> int:
        return self._store.pin_association(self.source_key(source), product_id,
                                           shade_index, author)

    def pinned(self, source: MatchSource) -> list[PinnedAssociation]:
        return self._store.associations(self.source_key(source))
