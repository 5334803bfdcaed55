// HTML renderers: pure functions from API payloads to markup strings.
// Interactivity is declared with data-action attributes on native buttons
// and inputs only, so keyboard traversal works without extra wiring. Star
// values render at half-star display precision; the raw API value rides
// along in data-stars and the tooltip.

import {
  formatPoints,
  formatStars,
  severity,
  severityIcon,
  starGlyphs,
} from "./format.js";
import type {
  FeedEntryPayload,
  ItemPayload,
  LeaderboardEntryPayload,
  ListPayload,
  ProductPayload,
  ProfilePayload,
  ScanResponse,
} from "./types.js";
import type { ViewState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function starBadge(stars: number): string {
  const badge = severity(stars);
  return (
    `<span class="stars stars-${badge}" data-stars="${stars}" ` +
    `title="${stars} of 3 stars" aria-label="${formatStars(stars)} of 3 stars">` +
    `<span aria-hidden="true">${severityIcon(stars)} ${starGlyphs(stars)}</span>` +
    `</span>`
  );
}

function productThumb(product: ProductPayload): string {
  const letter = escapeHtml(product.name.charAt(0).toUpperCase());
  if (product.image_ref) {
    return (
      `<img class="thumb" src="${escapeHtml(product.image_ref)}" ` +
      `alt="${escapeHtml(product.name)}" ` +
      `onerror="this.outerHTML='<span class=&quot;thumb thumb-letter&quot; aria-hidden=&quot;true&quot;>${letter}</span>'">`
    );
  }
  return `<span class="thumb thumb-letter" aria-hidden="true">${letter}</span>`;
}

export function renderTabs(active: string): string {
  const tabs: [string, string][] = [
    ["lists", "Lists"],
    ["scan", "Scan"],
    ["profile", "Profile"],
    ["leaderboard", "Leaderboard"],
  ];
  return (
    `<nav class="tabs" aria-label="Main">` +
    tabs
      .map(([screen, label]) => {
        const current = screen === active || (screen === "lists" && active === "list-detail");
        return (
          `<button type="button" data-action="navigate" data-screen="${screen}" ` +
          `class="tab${current ? " tab-active" : ""}" ` +
          `aria-current="${current ? "page" : "false"}">${label}</button>`
        );
      })
      .join("") +
    `</nav>`
  );
}

export function renderBanner(message: string, kind: "error" | "info" = "error"): string {
  return (
    `<div class="banner banner-${kind}" role="alert">${escapeHtml(message)} ` +
    `<button type="button" data-action="retry">Retry</button></div>`
  );
}

export function renderListsScreen(lists: ListPayload[], banner = ""): string {
  const rows = lists
    .map((list) => {
      const done = list.items.filter((i) => i.checked).length;
      return (
        `<li><button type="button" class="list-row" data-action="open-list" ` +
        `data-list="${escapeHtml(list.list_id)}">` +
        `<strong>${escapeHtml(list.name)}</strong>` +
        `<span class="muted">${done}/${list.items.length} checked</span>` +
        `</button></li>`
      );
    })
    .join("");
  const empty =
    lists.length === 0
      ? `<p class="empty">No lists yet. Name one and start shopping.</p>`
      : "";
  return (
    banner +
    `<section aria-label="Shopping lists">` +
    `<h2>Your lists</h2>` +
    `<form data-action="create-list" class="row">` +
    `<label>New list name <input name="name" required placeholder="weekly shop"></label>` +
    `<button type="submit">Create</button>` +
    `</form>` +
    empty +
    `<ul class="plain">${rows}</ul>` +
    `</section>`
  );
}

export function renderItem(item: ItemPayload): string {
  const stars = item.assessment ? starBadge(item.assessment.stars) : "";
  const checkButton = item.checked
    ? ""
    : `<button type="button" data-action="check-item" data-item="${escapeHtml(item.item_id)}" ` +
      `aria-label="Check off ${escapeHtml(item.label)}">✓</button>`;
  return (
    `<li class="item${item.checked ? " item-checked" : ""}">` +
    `<span class="item-label">${escapeHtml(item.label)}</span>` +
    stars +
    checkButton +
    `</li>`
  );
}

export function renderListDetail(
  list: ListPayload,
  suggestions: ProductPayload[],
  banner = "",
): string {
  const suggestionRows = suggestions
    .map(
      (p) =>
        `<li><button type="button" data-action="add-product" ` +
        `data-product="${escapeHtml(p.product_id)}" data-label="${escapeHtml(p.name)}">` +
        `${productThumb(p)} ${escapeHtml(p.name)} ${starBadge(p.stars)}</button></li>`,
    )
    .join("");
  return (
    banner +
    `<section aria-label="List ${escapeHtml(list.name)}">` +
    `<h2>${escapeHtml(list.name)}</h2>` +
    `<form data-action="add-item" class="row">` +
    `<label>Add item <input name="label" required autocomplete="off" ` +
    `data-action="typing" placeholder="start typing..."></label>` +
    `<button type="submit">Add</button>` +
    `</form>` +
    `<ul class="plain" id="typing-suggestions" aria-label="Suggestions">${suggestionRows}</ul>` +
    `<ul class="plain items">${list.items.map(renderItem).join("")}</ul>` +
    `<button type="button" data-action="navigate" data-screen="scan">Scan a product</button>` +
    `</section>`
  );
}

export function renderAlternativeCard(result: ScanResponse): string {
  if (!result.alternative) return "";
  const alt = result.alternative;
  return (
    `<div class="alternative" role="group" aria-label="Lower footprint alternative">` +
    `<p>Lower-footprint pick in ${escapeHtml(alt.category)}:</p>` +
    `<p>${productThumb(alt)} <strong>${escapeHtml(alt.name)}</strong> ${starBadge(alt.stars)}</p>` +
    `<button type="button" data-action="accept-alternative" ` +
    `data-item="${escapeHtml(result.item.item_id)}" ` +
    `data-product="${escapeHtml(alt.product_id)}">Swap it in</button>` +
    `<button type="button" data-action="dismiss-scan">Keep original</button>` +
    `</div>`
  );
}

export function renderScanResult(result: ScanResponse): string {
  const badges =
    result.new_badges.length > 0
      ? `<p class="badges-won">Badge earned: ${result.new_badges.map(escapeHtml).join(", ")}</p>`
      : "";
  const share =
    `<button type="button" data-action="share" ` +
    `data-product="${escapeHtml(result.product.product_id)}">Share this pick</button>`;
  const dismiss = result.alternative
    ? ""
    : `<button type="button" data-action="dismiss-scan">Done</button>`;
  return (
    `<div class="scan-result">` +
    `<p>${productThumb(result.product)} <strong>${escapeHtml(result.product.name)}</strong> ` +
    `checked off.</p>` +
    `<p class="big">${starBadge(result.assessment.stars)}</p>` +
    badges +
    renderAlternativeCard(result) +
    share +
    dismiss +
    `</div>`
  );
}

export function renderScanScreen(
  state: ViewState,
  pad: ProductPayload[],
  lists: ListPayload[],
): string {
  const listOptions = lists
    .map(
      (l) =>
        `<option value="${escapeHtml(l.list_id)}"` +
        `${l.list_id === state.currentListId ? " selected" : ""}>${escapeHtml(l.name)}</option>`,
    )
    .join("");
  const padButtons = pad
    .map(
      (p) =>
        `<button type="button" data-action="pad-scan" data-code="${escapeHtml(p.code)}" ` +
        `title="${escapeHtml(p.name)}">${productThumb(p)}<span>${escapeHtml(p.name)}</span></button>`,
    )
    .join("");
  const error = state.scanError
    ? `<p class="inline-error" role="alert">${escapeHtml(state.scanError)} ` +
      `— you can check the item off manually from the list.</p>`
    : "";
  const offline =
    state.offlineQueue.length > 0
      ? `<p class="offline" role="status">${state.offlineQueue.length} scan(s) queued offline ` +
        `<button type="button" data-action="drain-offline">Retry now</button></p>`
      : "";
  const busy = state.scanBusy ? `<p role="status">Scanning…</p>` : "";
  return (
    `<section aria-label="Scan">` +
    `<h2>Scan a code</h2>` +
    `<label>Into list <select id="scan-list" data-action="select-list">${listOptions}</select></label>` +
    `<form data-action="code-scan" class="row">` +
    `<label>Code <input name="code" required autocomplete="off" ` +
    `placeholder="8400000000086"></label>` +
    `<button type="submit">Scan</button>` +
    `</form>` +
    error +
    offline +
    busy +
    (state.pendingScan ? renderScanResult(state.pendingScan) : "") +
    `<h3>Scan pad</h3>` +
    `<p class="muted">Tap a product to simulate scanning its code.</p>` +
    `<div class="pad">${padButtons}</div>` +
    `</section>`
  );
}

export function renderProfile(profile: ProfilePayload, banner = ""): string {
  const badges =
    profile.badges.length === 0
      ? `<p class="empty">No badges yet.</p>`
      : `<ul class="badges">` +
        profile.badges.map((b) => `<li class="badge">🏅 ${escapeHtml(b)}</li>`).join("") +
        `</ul>`;
  const missions = profile.missions
    .map((m) => {
      const pct = Math.round((m.current / m.required) * 100);
      return (
        `<li class="mission${m.completed ? " mission-done" : ""}">` +
        `<span>${escapeHtml(m.title)}</span>` +
        `<progress max="${m.required}" value="${m.current}" ` +
        `aria-label="${escapeHtml(m.title)}: ${m.current} of ${m.required}"></progress>` +
        `<span class="muted">${m.current}/${m.required} (${pct}%)</span>` +
        `</li>`
      );
    })
    .join("");
  return (
    banner +
    `<section aria-label="Profile">` +
    `<h2>${escapeHtml(profile.user)}</h2>` +
    `<p class="big">Level ${profile.level} · ${formatPoints(profile.points)} points</p>` +
    `<h3>Badges</h3>` +
    badges +
    `<h3>Missions</h3>` +
    `<ul class="plain">${missions}</ul>` +
    `</section>`
  );
}

export function renderLeaderboard(
  entries: LeaderboardEntryPayload[],
  viewer: string,
  banner = "",
): string {
  const rows = entries
    .map(
      (e) =>
        `<tr class="${e.user === viewer ? "me" : ""}">` +
        `<td>${e.rank}</td><td>${escapeHtml(e.user)}</td>` +
        `<td>${formatPoints(e.points)}</td><td>${e.level}</td></tr>`,
    )
    .join("");
  return (
    banner +
    `<section aria-label="Leaderboard">` +
    `<h2>Leaderboard</h2>` +
    `<table><thead><tr><th>#</th><th>Player</th><th>Points</th><th>Level</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `</section>`
  );
}

export function renderFeed(entries: FeedEntryPayload[]): string {
  const rows = entries
    .map(
      (e) =>
        `<li><strong>${escapeHtml(e.author)}</strong> recommends ` +
        `${escapeHtml(e.product_name ?? e.product_id)} ${starBadge(e.stars)}` +
        (e.note ? ` — “${escapeHtml(e.note)}”` : "") +
        `</li>`,
    )
    .join("");
  return `<section aria-label="Community feed"><h3>Community feed</h3>` +
    `<ul class="plain feed">${rows}</ul></section>`;
}
