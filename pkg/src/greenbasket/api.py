"""Versioned JSON-over-HTTP gateway composing the primary subsystems.

All footprint numbers in responses come straight from the footprint
engine's objects; the gateway only serializes. State-changing endpoints
require a bearer token and honor an Idempotency-Key header: the response
of the first attempt is recorded in the same transaction as the mutation,
so a retried request replays the recorded response instead of mutating
again.

Error bodies are ``{"error": {"code", "message", "field"}}`` with stable
machine codes; the full code list lives in the README's API reference.
"""

from __future__ import annotations

import json
import time
from collections.abc import Callable

from fastapi import Depends, FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from greenbasket.catalog import (
    Catalog,
    CatalogHandle,
    Product,
    ingest,
    load_snapshot,
    lookup_by_code,
    save_snapshot,
    search_by_prefix_or_substring,
    stars_for,
)
from greenbasket.config import ServiceConfig
from greenbasket.errors import (
    AuthorizationError,
    ConfigError,
    GreenBasketError,
    NotFoundError,
    ValidationError,
)
from greenbasket.footprint import (
    FootprintAssessment,
    assessment_to_dict,
    load_daily_references,
)
from greenbasket.gamify import load_gamify_config, mission_progress
from greenbasket.listkeeper import (
    ListItem,
    ListKeeper,
    ScanResult,
    SeedSuggestion,
    SharedRecommendation,
    ShoppingList,
    UnknownProductError,
)
from greenbasket.store import Store

API_PREFIX = "/v1"


class AuthError(AuthorizationError):
    """Missing, unknown or expired bearer token; one uniform code."""

    code = "auth_invalid"


_STATUS_BY_CODE = {
    "auth_invalid": 401,
    "duplicate_list_name": 409,
}


def _status_for(error: GreenBasketError) -> int:
    if error.code in _STATUS_BY_CODE:
        return _STATUS_BY_CODE[error.code]
    if isinstance(error, NotFoundError):
        return 404
    if isinstance(error, AuthorizationError):
        return 403
    if isinstance(error, ValidationError):
        return 400
    if isinstance(error, ConfigError):
        return 500
    return 400


# --- request bodies -----------------------------------------------------------


class CreateListBody(BaseModel):
    name: str
    seed_suggestions: bool = False


class AddItemBody(BaseModel):
    label: str
    product_id: str | None = None


class ScanBody(BaseModel):
    code: str


class AcceptAlternativeBody(BaseModel):
    product_id: str


class ShareBody(BaseModel):
    product_id: str
    note: str | None = None


# --- serializers ----------------------------------------------------------------


def product_payload(product: Product, keeper: ListKeeper) -> dict:
    return {
        "product_id": product.product_id,
        "name": product.name,
        "category": product.category,
        "code": product.code,
        "unit_weight_kg": product.unit_weight_kg,
        "image_ref": product.image_ref,
        "stars": stars_for(product, keeper.references),
    }


def assessment_payload(assessment: FootprintAssessment) -> dict:
    return assessment_to_dict(assessment)


def item_payload(item: ListItem) -> dict:
    return {
        "item_id": item.item_id,
        "label": item.label,
        "position": item.position,
        "linked_product": item.linked_product,
        "checked": item.checked,
        "manual_check": item.manual_check,
        "scan_code": item.scan_code,
        "assessment": assessment_payload(item.assessment) if item.assessment else None,
    }


def list_payload(shopping_list: ShoppingList) -> dict:
    return {
        "list_id": shopping_list.list_id,
        "owner": shopping_list.owner,
        "name": shopping_list.name,
        "created_at": shopping_list.created_at,
        "updated_at": shopping_list.updated_at,
        "items": [item_payload(i) for i in shopping_list.items],
    }


def suggestion_payload(suggestion: SeedSuggestion, keeper: ListKeeper) -> dict:
    return {
        "product": product_payload(suggestion.product, keeper),
        "is_alternative": suggestion.is_alternative,
        "alternative_to": suggestion.alternative_to,
    }


def share_payload(shared: SharedRecommendation, keeper: ListKeeper) -> dict:
    product = keeper.catalog.get(shared.product_id)
    return {
        "seq": shared.seq,
        "author": shared.author,
        "product_id": shared.product_id,
        "product_name": product.name if product else None,
        "stars": shared.stars,
        "note": shared.note,
        "shared_at": shared.shared_at,
    }


def profile_payload(keeper: ListKeeper, user: str) -> dict:
    profile = keeper.get_profile(user)
    statuses, warnings = mission_progress(profile, keeper.gamify_config.missions)
    return {
        "user": profile.user,
        "points": profile.points,
        "level": profile.level,
        "badges": sorted(profile.badges),
        "missions": [
            {
                "mission_id": s.mission_id,
                "title": s.title,
                "current": s.current,
                "required": s.required,
                "completed": s.completed,
            }
            for s in statuses
        ],
        "warnings": warnings,
    }


def scan_result_payload(result: ScanResult, keeper: ListKeeper) -> dict:
    return {
        "item": item_payload(result.item),
        "product": product_payload(result.product, keeper),
        "assessment": assessment_payload(result.assessment),
        "alternative": (
            product_payload(result.alternative, keeper) if result.alternative else None
        ),
        "new_badges": list(result.new_badges),
        "profile": profile_payload(keeper, result.profile.user),
    }


# --- users file ---------------------------------------------------------------------

DEFAULT_USERS = {
    "tokens": {
        "maria-token": {"user": "maria", "expires_at": None},
        "olivia-token": {"user": "olivia", "expires_at": None},
    }
}


def load_users(config: ServiceConfig) -> dict[str, dict]:
    """Token table from data_dir/users.json; a default file is written when
    absent so a fresh instance is usable immediately."""
    path = config.data_dir / "users.json"
    if not path.exists():
        path.write_text(json.dumps(DEFAULT_USERS, indent=2), encoding="utf-8")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        tokens = payload["tokens"]
        if not isinstance(tokens, dict):
            raise TypeError("tokens must be a mapping")
        for record in tokens.values():
            record["user"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad users file {path}: {exc!r}", source=str(path)) from exc
    return tokens


def load_catalog_cached(config: ServiceConfig) -> Catalog:
    """Ingest the catalog document, using a parsed snapshot when fresh."""
    snapshot = config.data_dir / "catalog.snapshot.json"
    source_mtime = config.catalog_path.stat().st_mtime
    if snapshot.exists() and snapshot.stat().st_mtime >= source_mtime:
        return load_snapshot(snapshot)
    catalog, _report = ingest(config.catalog_path)
    save_snapshot(catalog, snapshot)
    return catalog


# --- application factory ----------------------------------------------------------


def create_app(
    config: ServiceConfig,
    *,
    store: Store | None = None,
    clock: Callable[[], float] = time.time,
) -> FastAPI:
    """Build the service; fails fast on any missing or invalid input file."""
    catalog = load_catalog_cached(config)
    references = load_daily_references(config.references_path)
    gamify_config = load_gamify_config(config.gamify_config_path)
    tokens = load_users(config)
    store = store if store is not None else Store(config.data_dir / "greenbasket.db")
    handle = CatalogHandle(catalog)
    keeper = ListKeeper(
        store=store,
        catalog=handle,
        references=references,
        gamify_config=gamify_config,
        clock=clock,
    )

    app = FastAPI(title="greenbasket", version="0.1.0", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.keeper = keeper
    app.state.store = store
    app.state.catalog_handle = handle
    app.state.tokens = tokens
    app.state.clock = clock

    @app.exception_handler(GreenBasketError)
    async def domain_error(request: Request, exc: GreenBasketError):
        return JSONResponse(
            status_code=_status_for(exc),
            content={
                "error": {
                    "code": exc.code,
                    "message": str(exc),
                    "field": getattr(exc, "field", None),
                }
            },
        )

    @app.exception_handler(RequestValidationError)
    async def body_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(p) for p in first.get("loc", ()) if p != "body") or None
        return JSONResponse(
            status_code=400,
            content={
                "error": {
                    "code": "validation_error",
                    "message": first.get("msg", "invalid request body"),
                    "field": field,
                }
            },
        )

    def current_user(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthError("missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        record = tokens.get(token)
        if record is None:
            raise AuthError("unknown token")
        expires_at = record.get("expires_at")
        if expires_at is not None and clock() >= float(expires_at):
            raise AuthError("token expired")
        return record["user"]

    def idempotent(user: str, key: str | None, producer: Callable[[], dict]) -> dict:
        """Replay the recorded response for a repeated Idempotency-Key.

        The record is written inside the same transaction as the mutation,
        so either both or neither land.
        """
        if key is None:
            return producer()
        with store.transaction():
            cached = store.get_idempotent(user, key)
            if cached is not None:
                return json.loads(cached)
            payload = producer()
            store.put_idempotent(user, key, json.dumps(payload))
            return payload

    # -- public endpoints --

    @app.get(f"{API_PREFIX}/health")
    def health():
        return {"status": "ok", "products": len(handle.get())}

    @app.get(f"{API_PREFIX}/products")
    def product_index(q: str = "", limit: int = 50):
        """Catalog browse/search; an empty query enumerates alphabetically."""
        catalog = handle.get()
        if q.strip():
            products = search_by_prefix_or_substring(catalog, q, limit=limit)
        else:
            if limit < 1:
                raise ValidationError(f"limit must be >= 1, got {limit!r}", field="limit")
            products = sorted(catalog, key=lambda p: (p.name.lower(), p.product_id))[:limit]
        return {"products": [product_payload(p, keeper) for p in products]}

    @app.get(f"{API_PREFIX}/products/{{code}}")
    def product_lookup(code: str):
        product = lookup_by_code(handle.get(), code)
        if product is None:
            raise UnknownProductError(f"unknown product code {code!r}")
        return product_payload(product, keeper)

    @app.get(f"{API_PREFIX}/feed")
    def feed(limit: int = 20, after: int | None = None):
        entries = keeper.community_feed("anonymous", limit=limit, after_seq=after)
        cursor = max((e.seq for e in entries), default=after or 0)
        return {"entries": [share_payload(e, keeper) for e in entries], "cursor": cursor}

    @app.get(f"{API_PREFIX}/leaderboard")
    def board(limit: int = 10):
        entries = keeper.leaderboard(limit=limit)
        return {
            "entries": [
                {"rank": e.rank, "user": e.user, "points": e.points, "level": e.level}
                for e in entries
            ]
        }

    # -- authenticated endpoints --

    @app.get(f"{API_PREFIX}/profile")
    def profile(user: str = Depends(current_user)):
        return profile_payload(keeper, user)

    @app.get(f"{API_PREFIX}/lists")
    def lists(user: str = Depends(current_user)):
        return {"lists": [list_payload(l) for l in keeper.get_lists(user)]}

    @app.get(f"{API_PREFIX}/lists/{{list_id}}")
    def fetch_list(list_id: str, user: str = Depends(current_user)):
        return list_payload(keeper.get_list(user, list_id))

    @app.get(f"{API_PREFIX}/suggestions")
    def suggestions(q: str = "", limit: int = 10, user: str = Depends(current_user)):
        products = keeper.suggest_while_typing(user, q, limit=limit)
        return {"products": [product_payload(p, keeper) for p in products]}

    @app.post(f"{API_PREFIX}/lists", status_code=201)
    def create_list(
        body: CreateListBody,
        user: str = Depends(current_user),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            created, seeds = keeper.create_list(user, body.name, body.seed_suggestions)
            return {
                "list": list_payload(created),
                "suggestions": [suggestion_payload(s, keeper) for s in seeds],
            }

        return idempotent(user, idempotency_key, run)

    @app.post(f"{API_PREFIX}/lists/{{list_id}}/items", status_code=201)
    def add_item(
        list_id: str,
        body: AddItemBody,
        user: str = Depends(current_user),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            item = keeper.add_item(user, list_id, body.label, body.product_id)
            return {"item": item_payload(item)}

        return idempotent(user, idempotency_key, run)

    @app.post(f"{API_PREFIX}/lists/{{list_id}}/items/{{item_id}}/check")
    def manual_check(
        list_id: str,
        item_id: str,
        user: str = Depends(current_user),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            return {"item": item_payload(keeper.check_item(user, list_id, item_id))}

        return idempotent(user, idempotency_key, run)

    @app.post(f"{API_PREFIX}/lists/{{list_id}}/scan")
    def scan(
        list_id: str,
        body: ScanBody,
        user: str = Depends(current_user),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            result = keeper.scan_check_off(user, list_id, body.code)
            return scan_result_payload(result, keeper)

        return idempotent(user, idempotency_key, run)

    @app.post(f"{API_PREFIX}/lists/{{list_id}}/items/{{item_id}}/accept-alternative")
    def accept_alternative(
        list_id: str,
        item_id: str,
        body: AcceptAlternativeBody,
        user: str = Depends(current_user),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            result = keeper.accept_alternative(user, list_id, item_id, body.product_id)
            return {
                "item": item_payload(result.item),
                "product": product_payload(result.product, keeper),
                "assessment": assessment_payload(result.assessment),
                "new_badges": list(result.new_badges),
                "profile": profile_payload(keeper, user),
            }

        return idempotent(user, idempotency_key, run)

    @app.post(f"{API_PREFIX}/recommendations", status_code=201)
    def share(
        body: ShareBody,
        user: str = Depends(current_user),
        idempotency_key: str | None = Header(default=None, alias="Idempotency-Key"),
    ):
        def run():
            shared = keeper.share_recommendation(user, body.product_id, body.note)
            return {"recommendation": share_payload(shared, keeper)}

        return idempotent(user, idempotency_key, run)

    return app
