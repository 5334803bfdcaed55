"""Product catalog: ingest, code/category indexes, and alternatives.

The catalog is rebuilt from its source document and held immutable in
memory; re-ingesting produces a new catalog that a CatalogHandle swaps in
atomically, so concurrent readers see either the old or the new catalog,
never a blend.

Source format: delimited text with a header row. Required columns ``code,
name, category, unit_weight_kg, carbon_factor, nitrogen_factor,
water_factor``; optional ``measures_applied``, ``measures_possible``
(semicolon-separated measure identifiers) and ``image_ref``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

from greenbasket.errors import ConfigError, NotFoundError, ValidationError
from greenbasket.footprint import (
    DIMENSIONS,
    DailyReference,
    Dimension,
    FootprintFactor,
    SustainabilityChecklist,
    assess,
    footprint_weight,
)

REQUIRED_COLUMNS = (
    "code",
    "name",
    "category",
    "unit_weight_kg",
    "carbon_factor",
    "nitrogen_factor",
    "water_factor",
)
OPTIONAL_COLUMNS = ("measures_applied", "measures_possible", "image_ref")

_FACTOR_COLUMNS = dict(zip(DIMENSIONS, ("carbon_factor", "nitrogen_factor", "water_factor")))


@dataclass(frozen=True)
class Product:
    """One catalog entry; ``code`` is the scannable identification string."""

    product_id: str
    name: str
    category: str
    code: str
    unit_weight_kg: float
    factors: Mapping[Dimension, FootprintFactor]
    checklist: SustainabilityChecklist | None = None
    image_ref: str | None = None

    def __post_init__(self):
        for attr in ("product_id", "name", "category", "code"):
            if not getattr(self, attr):
                raise ValidationError(f"{attr} must not be empty", field=attr)
        if not isinstance(self.unit_weight_kg, (int, float)) \
                or not math.isfinite(self.unit_weight_kg) or self.unit_weight_kg <= 0:
            raise ValidationError(
                f"unit_weight_kg must be > 0, got {self.unit_weight_kg!r}",
                field="unit_weight_kg",
            )
        missing = [d.value for d in DIMENSIONS if d not in self.factors]
        if missing:
            raise ValidationError(
                f"missing footprint factors: {', '.join(missing)}", field="factors"
            )


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str


@dataclass(frozen=True)
class IngestReport:
    accepted: int
    rejected: tuple[RejectedRow, ...]

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


class Catalog:
    """Immutable product collection with code and category indexes."""

    def __init__(self, products: Iterable[Product] = ()):
        self._by_id: dict[str, Product] = {}
        self._by_code: dict[str, str] = {}
        self._by_category: dict[str, list[str]] = {}
        for product in products:
            if product.code in self._by_code:
                raise ValidationError(
                    f"duplicate code {product.code!r}", field="code"
                )
            if product.product_id in self._by_id:
                raise ValidationError(
                    f"duplicate product_id {product.product_id!r}", field="product_id"
                )
            self._by_id[product.product_id] = product
            self._by_code[product.code] = product.product_id
            self._by_category.setdefault(product.category, []).append(product.product_id)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self):
        return iter(self._by_id.values())

    def __contains__(self, product_id: str) -> bool:
        return product_id in self._by_id

    def get(self, product_id: str) -> Product | None:
        return self._by_id.get(product_id)

    @property
    def categories(self) -> tuple[str, ...]:
        return tuple(self._by_category)

    def in_category(self, category: str) -> list[Product]:
        return [self._by_id[pid] for pid in self._by_category.get(category, [])]


def lookup_by_code(catalog: Catalog, code: str) -> Product | None:
    """Exact-match code lookup; an unknown code is a normal None result."""
    product_id = catalog._by_code.get(code)
    return None if product_id is None else catalog._by_id[product_id]


def stars_for(
    product: Product, references: Mapping[Dimension, DailyReference]
) -> float:
    """Star rating of one retail unit of the product."""
    return assess(product, product.unit_weight_kg, references).stars


def suggest_alternative(
    catalog: Catalog,
    product: Product,
    references: Mapping[Dimension, DailyReference],
) -> Product | None:
    """Best same-category product strictly better than the given one.

    "Better" is the star rating of one retail unit; ties break on lower
    carbon footprint weight, then ascending product_id. None when nothing
    in the category is strictly better.
    """
    if catalog.get(product.product_id) is None:
        raise NotFoundError(f"product {product.product_id!r} is not in the catalog")
    base_stars = stars_for(product, references)
    best: Product | None = None
    best_key = None
    for candidate in catalog.in_category(product.category):
        if candidate.product_id == product.product_id:
            continue
        candidate_stars = stars_for(candidate, references)
        if candidate_stars <= base_stars:
            continue
        carbon = footprint_weight(
            candidate.unit_weight_kg, candidate.factors[Dimension.CARBON]
        )
        key = (-candidate_stars, carbon, candidate.product_id)
        if best_key is None or key < best_key:
            best, best_key = candidate, key
    return best


def search_by_prefix_or_substring(
    catalog: Catalog, query: str, limit: int
) -> list[Product]:
    """Case-insensitive substring match over product names, alphabetical.

    History-aware ranking lives in the list service; this is the raw
    catalog order (name, then product_id).
    """
    if limit < 1:
        raise ValidationError(f"limit must be >= 1, got {limit!r}", field="limit")
    needle = query.strip().lower()
    if not needle:
        return []
    matches = [p for p in catalog if needle in p.name.lower()]
    matches.sort(key=lambda p: (p.name.lower(), p.product_id))
    return matches[:limit]


def category_median_stars(
    catalog: Catalog, category: str, references: Mapping[Dimension, DailyReference]
) -> float | None:
    """Median unit star rating across a category; None for unknown category."""
    products = catalog.in_category(category)
    if not products:
        return None
    return statistics.median(stars_for(p, references) for p in products)


# --- ingest ------------------------------------------------------------------


def _parse_measures(raw: str | None) -> frozenset[str]:
    if not raw:
        return frozenset()
    return frozenset(part.strip() for part in raw.split(";") if part.strip())


def ingest(source: str | Path | io.TextIOBase) -> tuple[Catalog, IngestReport]:
    """Load a catalog document; every rejected row is reported with its line.

    Rejection reasons include duplicate codes (first row wins), missing or
    non-numeric factors, nonpositive weights and malformed rows. The result
    is deterministic: the same document yields the same catalog and report.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            handle = path.open("r", encoding="utf-8", newline="")
        except OSError as exc:
            raise ConfigError(f"cannot read catalog: {exc}", source=str(path)) from exc
        with handle:
            return _ingest_stream(handle, source=str(path))
    return _ingest_stream(source, source="<stream>")


def _ingest_stream(stream, source: str) -> tuple[Catalog, IngestReport]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return Catalog(), IngestReport(accepted=0, rejected=())
    header = [column.strip() for column in header]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise ConfigError(
            f"{source}: header is missing required columns: {', '.join(missing)}",
            source=source,
        )
    unknown = [c for c in header if c not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        raise ConfigError(
            f"{source}: header has unknown columns: {', '.join(unknown)}",
            source=source,
        )
    col = {name: header.index(name) for name in header}
    has_applied = "measures_applied" in col
    has_possible = "measures_possible" in col
    has_image = "image_ref" in col

    products: list[Product] = []
    seen_codes: set[str] = set()
    rejected: list[RejectedRow] = []

    def cell(row, name):
        value = row[col[name]].strip()
        return value

    for row in reader:
        line = reader.line_num
        if not row or all(not field.strip() for field in row):
            continue
        if len(row) != len(header):
            rejected.append(RejectedRow(line, f"malformed row: expected {len(header)} fields, got {len(row)}"))
            continue
        code = cell(row, "code")
        name = cell(row, "name")
        category = cell(row, "category")
        if not code or not name or not category:
            empty = next(c for c in ("code", "name", "category") if not cell(row, c))
            rejected.append(RejectedRow(line, f"empty required field {empty!r}"))
            continue
        if code in seen_codes:
            rejected.append(RejectedRow(line, f"duplicate code {code!r}"))
            continue
        try:
            weight = float(cell(row, "unit_weight_kg"))
        except ValueError:
            rejected.append(RejectedRow(line, f"unit_weight_kg is not a number: {cell(row, 'unit_weight_kg')!r}"))
            continue
        if not math.isfinite(weight) or weight <= 0:
            rejected.append(RejectedRow(line, f"nonpositive weight {weight!r}"))
            continue
        factors: dict[Dimension, FootprintFactor] = {}
        problem = None
        for dimension, column in _FACTOR_COLUMNS.items():
            raw = cell(row, column)
            if not raw:
                problem = f"missing factor {column!r}"
                break
            try:
                value = float(raw)
            except ValueError:
                problem = f"{column} is not a number: {raw!r}"
                break
            if not math.isfinite(value) or value < 0:
                problem = f"{column} must be >= 0, got {value!r}"
                break
            factors[dimension] = FootprintFactor(dimension, value)
        if problem is not None:
            rejected.append(RejectedRow(line, problem))
            continue
        applied = _parse_measures(row[col["measures_applied"]] if has_applied else None)
        possible = _parse_measures(row[col["measures_possible"]] if has_possible else None)
        checklist = None
        if possible:
            try:
                checklist = SustainabilityChecklist(applied, possible)
            except ValidationError as exc:
                rejected.append(RejectedRow(line, f"bad sustainability measures: {exc}"))
                continue
        elif applied:
            rejected.append(RejectedRow(line, "measures_applied given without measures_possible"))
            continue
        image_ref = (row[col["image_ref"]].strip() or None) if has_image else None
        products.append(
            Product(
                product_id=f"prod-{code}",
                name=name,
                category=category,
                code=code,
                unit_weight_kg=weight,
                factors=factors,
                checklist=checklist,
                image_ref=image_ref,
            )
        )
        seen_codes.add(code)

    return Catalog(products), IngestReport(accepted=len(products), rejected=tuple(rejected))


# --- snapshot ------------------------------------------------------------------


def save_snapshot(catalog: Catalog, path: str | Path) -> None:
    """Write a parsed-catalog snapshot so startup can skip CSV parsing."""
    payload = {
        "version": 1,
        "products": [
            {
                "product_id": p.product_id,
                "name": p.name,
                "category": p.category,
                "code": p.code,
                "unit_weight_kg": p.unit_weight_kg,
                "factors": {d.value: p.factors[d].value for d in DIMENSIONS},
                "measures_applied": sorted(p.checklist.applied) if p.checklist else None,
                "measures_possible": sorted(p.checklist.possible) if p.checklist else None,
                "image_ref": p.image_ref,
            }
            for p in catalog
        ],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_snapshot(path: str | Path) -> Catalog:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read catalog snapshot: {exc}", source=str(path)) from exc
    if payload.get("version") != 1:
        raise ConfigError(
            f"unsupported snapshot version {payload.get('version')!r}", source=str(path)
        )
    products = []
    for item in payload["products"]:
        checklist = None
        if item.get("measures_possible"):
            checklist = SustainabilityChecklist(
                frozenset(item.get("measures_applied") or ()),
                frozenset(item["measures_possible"]),
            )
        products.append(
            Product(
                product_id=item["product_id"],
                name=item["name"],
                category=item["category"],
                code=item["code"],
                unit_weight_kg=item["unit_weight_kg"],
                factors={
                    d: FootprintFactor(d, item["factors"][d.value]) for d in DIMENSIONS
                },
                checklist=checklist,
                image_ref=item.get("image_ref"),
            )
        )
    return Catalog(products)


class CatalogHandle:
    """Mutable reference to the current catalog.

    Reference assignment is atomic in CPython, so readers always observe a
    complete catalog; re-ingest builds the new one off to the side and then
    swaps.
    """

    def __init__(self, catalog: Catalog):
        self._catalog = catalog

    def get(self) -> Catalog:
        return self._catalog

    def replace(self, catalog: Catalog) -> None:
        self._catalog = catalog
