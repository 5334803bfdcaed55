"""Shopping lists, scan check-off, purchase history and the community feed.

All state lives in the embedded store; a ListKeeper instance is the only
writer. Scanning a code is the central operation: it resolves the product,
checks off (or appends) a list item, attaches the footprint assessment,
proposes a lower-footprint alternative, appends purchase history and feeds
the gamification engine — atomically.
"""

from __future__ import annotations

import json
import time
import uuid
from collections.abc import Callable, Mapping
from dataclasses import dataclass

from greenbasket import gamify
from greenbasket.catalog import (
    Catalog,
    CatalogHandle,
    Product,
    category_median_stars,
    lookup_by_code,
    search_by_prefix_or_substring,
    stars_for,
    suggest_alternative,
)
from greenbasket.errors import AuthorizationError, NotFoundError, ValidationError
from greenbasket.footprint import (
    DailyReference,
    Dimension,
    FootprintAssessment,
    assess,
    assessment_from_dict,
    assessment_to_dict,
)
from greenbasket.gamify import (
    EventKind,
    GamificationEvent,
    GamifyConfig,
    PlayerProfile,
    apply_event,
    profile_from_dict,
    profile_to_dict,
)
from greenbasket.store import Store

MAX_SEED_SUGGESTIONS = 10


class DuplicateListNameError(ValidationError):
    code = "duplicate_list_name"


class ListNotFoundError(NotFoundError):
    code = "list_not_found"


class ItemNotFoundError(NotFoundError):
    code = "item_not_found"


class NotListOwnerError(AuthorizationError):
    code = "list_foreign"


class UnknownProductError(NotFoundError):
    code = "product_unknown"


class NoPurchaseProvenanceError(ValidationError):
    code = "no_purchase_provenance"

    def __init__(self, product_id: str):
        super().__init__(
            f"no purchase provenance: {product_id!r} was never scanned by this user",
            field="product_id",
        )


class InvalidAlternativeError(ValidationError):
    code = "invalid_alternative"


@dataclass(frozen=True)
class ListItem:
    item_id: str
    label: str
    position: int
    linked_product: str | None
    checked: bool
    manual_check: bool
    scan_code: str | None
    assessment: FootprintAssessment | None


@dataclass(frozen=True)
class ShoppingList:
    list_id: str
    owner: str
    name: str
    items: tuple[ListItem, ...]
    created_at: float
    updated_at: float


@dataclass(frozen=True)
class SharedRecommendation:
    seq: int
    author: str
    product_id: str
    stars: float
    note: str | None
    shared_at: float


@dataclass(frozen=True)
class SeedSuggestion:
    """A list-creation suggestion; alternatives are flagged as such."""

    product: Product
    is_alternative: bool = False
    alternative_to: str | None = None


@dataclass(frozen=True)
class ScanResult:
    item: ListItem
    product: Product
    assessment: FootprintAssessment
    alternative: Product | None
    events: tuple[GamificationEvent, ...]
    new_badges: tuple[str, ...]
    profile: PlayerProfile


@dataclass(frozen=True)
class AcceptResult:
    item: ListItem
    product: Product
    assessment: FootprintAssessment
    events: tuple[GamificationEvent, ...]
    new_badges: tuple[str, ...]
    profile: PlayerProfile


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class ListKeeper:
    """Single writer over the embedded store.

    ``clock`` is injectable for deterministic tests; production uses
    time.time. Catalog access goes through a CatalogHandle, so re-ingest
    swaps are picked up between operations but never mid-operation.
    """

    def __init__(
        self,
        store: Store,
        catalog: CatalogHandle | Catalog,
        references: Mapping[Dimension, DailyReference],
        gamify_config: GamifyConfig,
        clock: Callable[[], float] = time.time,
    ):
        self._store = store
        self._handle = catalog if isinstance(catalog, CatalogHandle) else CatalogHandle(catalog)
        self._references = references
        self._config = gamify_config
        self._clock = clock

    @property
    def catalog(self) -> Catalog:
        return self._handle.get()

    @property
    def references(self) -> Mapping[Dimension, DailyReference]:
        return self._references

    @property
    def gamify_config(self) -> GamifyConfig:
        return self._config

    # -- time and rows ------------------------------------------------------

    def _now(self) -> float:
        return float(self._clock())

    def _item_from_row(self, row) -> ListItem:
        assessment = None
        if row["assessment"] is not None:
            assessment = assessment_from_dict(json.loads(row["assessment"]))
        return ListItem(
            item_id=row["item_id"],
            label=row["label"],
            position=row["position"],
            linked_product=row["linked_product"],
            checked=bool(row["checked"]),
            manual_check=bool(row["manual_check"]),
            scan_code=row["scan_code"],
            assessment=assessment,
        )

    def _list_from_row(self, conn, row) -> ShoppingList:
        items = conn.execute(
            "SELECT * FROM items WHERE list_id = ? ORDER BY position", (row["list_id"],)
        ).fetchall()
        return ShoppingList(
            list_id=row["list_id"],
            owner=row["owner"],
            name=row["name"],
            items=tuple(self._item_from_row(r) for r in items),
            created_at=row["created_at"],
            updated_at=row["updated_at"],
        )

    def _owned_list_row(self, conn, owner: str, list_id: str):
        row = conn.execute("SELECT * FROM lists WHERE list_id = ?", (list_id,)).fetchone()
        if row is None:
            raise ListNotFoundError(f"no list {list_id!r}")
        if row["owner"] != owner:
            raise NotListOwnerError(f"list {list_id!r} belongs to another user")
        return row

    def _touch(self, conn, list_id: str) -> None:
        conn.execute(
            "UPDATE lists SET updated_at = ? WHERE list_id = ?", (self._now(), list_id)
        )

    # -- profiles -------------------------------------------------------------

    def get_profile(self, user: str) -> PlayerProfile:
        row = self._store.conn.execute(
            "SELECT payload FROM profiles WHERE user = ?", (user,)
        ).fetchone()
        if row is None:
            return PlayerProfile(user=user)
        return profile_from_dict(json.loads(row["payload"]))

    def all_profiles(self) -> list[PlayerProfile]:
        rows = self._store.conn.execute("SELECT payload FROM profiles").fetchall()
        return [profile_from_dict(json.loads(r["payload"])) for r in rows]

    def leaderboard(self, limit: int) -> list[gamify.LeaderboardEntry]:
        return gamify.leaderboard(self.all_profiles(), limit)

    def _apply_events(
        self, conn, user: str, events: tuple[GamificationEvent, ...]
    ) -> tuple[PlayerProfile, tuple[str, ...]]:
        profile = self.get_profile(user)
        badges: list[str] = []
        for event in events:
            profile, new = apply_event(profile, event, self._config)
            badges.extend(new)
        conn.execute(
            "INSERT OR REPLACE INTO profiles (user, payload) VALUES (?, ?)",
            (user, json.dumps(profile_to_dict(profile))),
        )
        return profile, tuple(badges)

    # -- history ----------------------------------------------------------------

    def history_for(self, user: str) -> list[tuple[str, float]]:
        """(product_id, timestamp) pairs in append order."""
        rows = self._store.conn.execute(
            "SELECT product_id, ts FROM history WHERE user = ? ORDER BY seq", (user,)
        ).fetchall()
        return [(r["product_id"], r["ts"]) for r in rows]

    def _append_history(self, conn, user: str, product_id: str, ts: float) -> float:
        last = conn.execute(
            "SELECT ts FROM history WHERE user = ? ORDER BY seq DESC LIMIT 1", (user,)
        ).fetchone()
        if last is not None and last["ts"] > ts:
            ts = last["ts"]  # keep per-user timestamps monotone
        conn.execute(
            "INSERT INTO history (user, product_id, ts) VALUES (?, ?, ?)",
            (user, product_id, ts),
        )
        return ts

    def _history_stats(self, user: str) -> dict[str, tuple[int, float]]:
        """product_id -> (frequency, latest timestamp)."""
        stats: dict[str, tuple[int, float]] = {}
        for product_id, ts in self.history_for(user):
            count, latest = stats.get(product_id, (0, float("-inf")))
            stats[product_id] = (count + 1, max(latest, ts))
        return stats

    def _scanned_by_others(self, user: str, product_id: str) -> bool:
        row = self._store.conn.execute(
            "SELECT 1 FROM history WHERE product_id = ? AND user != ? LIMIT 1",
            (product_id, user),
        ).fetchone()
        return row is not None

    # -- lists ---------------------------------------------------------------------

    def create_list(
        self, owner: str, name: str, seed_suggestions: bool = False
    ) -> tuple[ShoppingList, list[SeedSuggestion]]:
        """Create an empty named list, optionally with seeded suggestions.

        Suggestions rank the user's purchase history by frequency then
        recency; a strictly better same-category alternative that other
        users have bought is inserted after its base product, flagged.
        """
        if not name or not name.strip():
            raise ValidationError("list name must not be empty", field="name")
        name = name.strip()
        with self._store.transaction() as conn:
            exists = conn.execute(
                "SELECT 1 FROM lists WHERE owner = ? AND name = ?", (owner, name)
            ).fetchone()
            if exists is not None:
                raise DuplicateListNameError(
                    f"user already has a list named {name!r}", field="name"
                )
            now = self._now()
            list_id = _new_id("list")
            conn.execute(
                "INSERT INTO lists (list_id, owner, name, created_at, updated_at) "
                "VALUES (?, ?, ?, ?, ?)",
                (list_id, owner, name, now, now),
            )
            created = self._list_from_row(
                conn, conn.execute("SELECT * FROM lists WHERE list_id = ?", (list_id,)).fetchone()
            )
        suggestions = self._seed_suggestions(owner) if seed_suggestions else []
        return created, suggestions

    def _seed_suggestions(self, owner: str) -> list[SeedSuggestion]:
        catalog = self.catalog
        stats = self._history_stats(owner)
        ranked = sorted(
            (pid for pid in stats if catalog.get(pid) is not None),
            key=lambda pid: (-stats[pid][0], -stats[pid][1], pid),
        )
        suggestions: list[SeedSuggestion] = []
        for product_id in ranked:
            if len(suggestions) >= MAX_SEED_SUGGESTIONS:
                break
            product = catalog.get(product_id)
            suggestions.append(SeedSuggestion(product=product))
            alternative = suggest_alternative(catalog, product, self._references)
            if (
                alternative is not None
                and len(suggestions) < MAX_SEED_SUGGESTIONS
                and self._scanned_by_others(owner, alternative.product_id)
                and all(s.product.product_id != alternative.product_id for s in suggestions)
            ):
                suggestions.append(
                    SeedSuggestion(
                        product=alternative,
                        is_alternative=True,
                        alternative_to=product.product_id,
                    )
                )
        return suggestions

    def get_lists(self, owner: str) -> list[ShoppingList]:
        with self._store.transaction() as conn:
            rows = conn.execute(
                "SELECT * FROM lists WHERE owner = ? ORDER BY created_at, list_id", (owner,)
            ).fetchall()
            return [self._list_from_row(conn, row) for row in rows]

    def get_list(self, owner: str, list_id: str) -> ShoppingList:
        with self._store.transaction() as conn:
            return self._list_from_row(conn, self._owned_list_row(conn, owner, list_id))

    def add_item(
        self, owner: str, list_id: str, label: str, product_id: str | None = None
    ) -> ListItem:
        """Append an unchecked item; linking a product attaches its assessment."""
        if not label or not label.strip():
            raise ValidationError("item label must not be empty", field="label")
        assessment_json = None
        if product_id is not None:
            product = self.catalog.get(product_id)
            if product is None:
                raise UnknownProductError(f"unknown product {product_id!r}")
            assessment_json = json.dumps(
                assessment_to_dict(assess(product, product.unit_weight_kg, self._references))
            )
        with self._store.transaction() as conn:
            self._owned_list_row(conn, owner, list_id)
            position = conn.execute(
                "SELECT COALESCE(MAX(position), -1) + 1 AS next FROM items WHERE list_id = ?",
                (list_id,),
            ).fetchone()["next"]
            item_id = _new_id("item")
            conn.execute(
                "INSERT INTO items (item_id, list_id, position, label, linked_product, "
                "checked, manual_check, scan_code, assessment) "
                "VALUES (?, ?, ?, ?, ?, 0, 0, NULL, ?)",
                (item_id, list_id, position, label.strip(), product_id, assessment_json),
            )
            self._touch(conn, list_id)
            row = conn.execute("SELECT * FROM items WHERE item_id = ?", (item_id,)).fetchone()
            return self._item_from_row(row)

    def check_item(self, owner: str, list_id: str, item_id: str) -> ListItem:
        """Manual check-off: allowed for fixing mistakes, earns no points."""
        with self._store.transaction() as conn:
            self._owned_list_row(conn, owner, list_id)
            row = conn.execute(
                "SELECT * FROM items WHERE item_id = ? AND list_id = ?", (item_id, list_id)
            ).fetchone()
            if row is None:
                raise ItemNotFoundError(f"no item {item_id!r} in list {list_id!r}")
            conn.execute(
                "UPDATE items SET checked = 1, manual_check = 1 WHERE item_id = ?", (item_id,)
            )
            self._touch(conn, list_id)
            row = conn.execute("SELECT * FROM items WHERE item_id = ?", (item_id,)).fetchone()
            return self._item_from_row(row)

    # -- typing suggestions -----------------------------------------------------------

    def suggest_while_typing(self, owner: str, partial_text: str, limit: int) -> list[Product]:
        """Catalog matches ranked by the user's habits.

        Rank: history frequency desc, then latest purchase desc, then the
        catalog's alphabetical order. Empty input returns the user's
        frequent-and-latest products.
        """
        if limit < 1:
            raise ValidationError(f"limit must be >= 1, got {limit!r}", field="limit")
        catalog = self.catalog
        stats = self._history_stats(owner)
        text = partial_text.strip()
        if not text:
            candidates = [catalog.get(pid) for pid in stats]
            candidates = [p for p in candidates if p is not None]
        else:
            candidates = search_by_prefix_or_substring(catalog, text, limit=max(len(catalog), 1))
        ranked = sorted(
            candidates,
            key=lambda p: (
                -stats.get(p.product_id, (0, float("-inf")))[0],
                -stats.get(p.product_id, (0, float("-inf")))[1],
                p.name.lower(),
                p.product_id,
            ),
        )
        return ranked[:limit]

    # -- scanning -----------------------------------------------------------------------

    def _match_item_for_product(self, conn, list_id: str, product: Product):
        """The item a scan checks off: linked match, then label match, else None."""
        rows = conn.execute(
            "SELECT * FROM items WHERE list_id = ? AND checked = 0 ORDER BY position",
            (list_id,),
        ).fetchall()
        for row in rows:
            if row["linked_product"] == product.product_id:
                return row
        name = product.name.lower()
        labeled = [
            row for row in rows
            if row["label"].lower() in name or name in row["label"].lower()
        ]
        if labeled:
            return min(labeled, key=lambda r: (r["label"].lower(), r["label"], r["position"]))
        return None

    def scan_check_off(self, owner: str, list_id: str, code: str) -> ScanResult:
        """Check off (or append) the item for a scanned code, atomically.

        Resolves the code, attaches the footprint assessment, proposes a
        lower-footprint alternative when one exists, appends purchase
        history and applies the scan's gamification event. An unknown code
        mutates nothing.
        """
        catalog = self.catalog
        product = lookup_by_code(catalog, code)
        if product is None:
            raise UnknownProductError(f"unknown product code {code!r}")
        assessment = assess(product, product.unit_weight_kg, self._references)
        alternative = suggest_alternative(catalog, product, self._references)
        median = category_median_stars(catalog, product.category, self._references)
        with self._store.transaction() as conn:
            self._owned_list_row(conn, owner, list_id)
            now = self._now()
            row = self._match_item_for_product(conn, list_id, product)
            assessment_json = json.dumps(assessment_to_dict(assessment))
            if row is not None:
                conn.execute(
                    "UPDATE items SET checked = 1, manual_check = 0, scan_code = ?, "
                    "linked_product = ?, assessment = ? WHERE item_id = ?",
                    (code, product.product_id, assessment_json, row["item_id"]),
                )
                item_id = row["item_id"]
            else:
                position = conn.execute(
                    "SELECT COALESCE(MAX(position), -1) + 1 AS next FROM items "
                    "WHERE list_id = ?",
                    (list_id,),
                ).fetchone()["next"]
                item_id = _new_id("item")
                conn.execute(
                    "INSERT INTO items (item_id, list_id, position, label, linked_product, "
                    "checked, manual_check, scan_code, assessment) "
                    "VALUES (?, ?, ?, ?, ?, 1, 0, ?, ?)",
                    (item_id, list_id, position, product.name, product.product_id,
                     code, assessment_json),
                )
            ts = self._append_history(conn, owner, product.product_id, now)
            event = GamificationEvent(
                kind=EventKind.SCAN,
                user=owner,
                product_id=product.product_id,
                stars=assessment.stars,
                timestamp=ts,
                category=product.category,
                category_median_stars=median,
            )
            profile, badges = self._apply_events(conn, owner, (event,))
            self._touch(conn, list_id)
            item = self._item_from_row(
                conn.execute("SELECT * FROM items WHERE item_id = ?", (item_id,)).fetchone()
            )
        return ScanResult(
            item=item,
            product=product,
            assessment=assessment,
            alternative=alternative,
            events=(event,),
            new_badges=badges,
            profile=profile,
        )

    def accept_alternative(
        self, owner: str, list_id: str, item_id: str, product_id: str
    ) -> AcceptResult:
        """Swap a checked item's product for an accepted lower-footprint one.

        The replacement must be a valid alternative for the item's current
        product (same category, strictly better star rating). The original
        scan_code stays as check-off provenance; history and the
        acceptance event record the swapped-in product.
        """
        catalog = self.catalog
        replacement = catalog.get(product_id)
        if replacement is None:
            raise UnknownProductError(f"unknown product {product_id!r}")
        with self._store.transaction() as conn:
            self._owned_list_row(conn, owner, list_id)
            row = conn.execute(
                "SELECT * FROM items WHERE item_id = ? AND list_id = ?", (item_id, list_id)
            ).fetchone()
            if row is None:
                raise ItemNotFoundError(f"no item {item_id!r} in list {list_id!r}")
            if row["linked_product"] is None:
                raise InvalidAlternativeError(
                    "item has no linked product to replace", field="item_id"
                )
            current = catalog.get(row["linked_product"])
            if current is None:
                raise UnknownProductError(
                    f"item's product {row['linked_product']!r} is gone from the catalog"
                )
            if replacement.category != current.category or not (
                stars_for(replacement, self._references) > stars_for(current, self._references)
            ):
                raise InvalidAlternativeError(
                    f"{product_id!r} is not a strictly better same-category "
                    f"alternative for {current.product_id!r}",
                    field="product_id",
                )
            assessment = assess(replacement, replacement.unit_weight_kg, self._references)
            conn.execute(
                "UPDATE items SET label = ?, linked_product = ?, assessment = ? "
                "WHERE item_id = ?",
                (replacement.name, replacement.product_id,
                 json.dumps(assessment_to_dict(assessment)), item_id),
            )
            ts = self._append_history(conn, owner, replacement.product_id, self._now())
            event = GamificationEvent(
                kind=EventKind.ACCEPTED_ALTERNATIVE,
                user=owner,
                product_id=replacement.product_id,
                stars=assessment.stars,
                timestamp=ts,
                category=replacement.category,
                category_median_stars=category_median_stars(
                    catalog, replacement.category, self._references
                ),
            )
            profile, badges = self._apply_events(conn, owner, (event,))
            self._touch(conn, list_id)
            item = self._item_from_row(
                conn.execute("SELECT * FROM items WHERE item_id = ?", (item_id,)).fetchone()
            )
        return AcceptResult(
            item=item,
            product=replacement,
            assessment=assessment,
            events=(event,),
            new_badges=badges,
            profile=profile,
        )

    # -- sharing -----------------------------------------------------------------------

    def share_recommendation(
        self, owner: str, product_id: str, note: str | None = None
    ) -> SharedRecommendation:
        """Publish a recommendation; requires purchase provenance."""
        product = self.catalog.get(product_id)
        if product is None:
            raise UnknownProductError(f"unknown product {product_id!r}")
        if not any(pid == product_id for pid, _ in self.history_for(owner)):
            raise NoPurchaseProvenanceError(product_id)
        stars = stars_for(product, self._references)
        with self._store.transaction() as conn:
            shared_at = self._now()
            cursor = conn.execute(
                "INSERT INTO feed (author, product_id, stars, note, shared_at) "
                "VALUES (?, ?, ?, ?, ?)",
                (owner, product_id, stars, note, shared_at),
            )
            seq = cursor.lastrowid
            event = GamificationEvent(
                kind=EventKind.SHARED_RECOMMENDATION,
                user=owner,
                product_id=product_id,
                stars=stars,
                timestamp=shared_at,
                category=product.category,
                category_median_stars=category_median_stars(
                    self.catalog, product.category, self._references
                ),
            )
            self._apply_events(conn, owner, (event,))
        return SharedRecommendation(
            seq=seq,
            author=owner,
            product_id=product_id,
            stars=stars,
            note=note,
            shared_at=shared_at,
        )

    def community_feed(
        self, viewer: str, limit: int, after_seq: int | None = None
    ) -> list[SharedRecommendation]:
        """Newest-first feed; ``after_seq`` returns only newer entries
        (ascending), which gives pollers a monotone cursor."""
        if limit < 1:
            raise ValidationError(f"limit must be >= 1, got {limit!r}", field="limit")
        if after_seq is None:
            rows = self._store.conn.execute(
                "SELECT * FROM feed ORDER BY shared_at DESC, seq DESC LIMIT ?", (limit,)
            ).fetchall()
        else:
            rows = self._store.conn.execute(
                "SELECT * FROM feed WHERE seq > ? ORDER BY seq LIMIT ?", (after_seq, limit)
            ).fetchall()
        return [
            SharedRecommendation(
                seq=r["seq"],
                author=r["author"],
                product_id=r["product_id"],
                stars=r["stars"],
                note=r["note"],
                shared_at=r["shared_at"],
            )
            for r in rows
        ]
