// Bootstrap and DOM wiring. All interactivity is delegated through
// data-action attributes on native controls; rendering is innerHTML from
// the pure builders in render.ts.

import { ApiClient, ApiError } from "./api.js";
import {
  renderBanner,
  renderFeed,
  renderLeaderboard,
  renderListDetail,
  renderListsScreen,
  renderProfile,
  renderScanScreen,
  renderTabs,
} from "./render.js";
import { initialState, reduce, type Action, type Screen, type ViewState } from "./state.js";
import type { LeaderboardEntryPayload, ListPayload, ProductPayload, ProfilePayload, FeedEntryPayload } from "./types.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "http://127.0.0.1:8765";

const TOKENS: Record<string, string> = {
  maria: "maria-token",
  olivia: "olivia-token",
};

let user = params.get("user") ?? "maria";
const api = new ApiClient(apiBase, TOKENS[user] ?? TOKENS["maria"]);

let state: ViewState = initialState;
let lists: ListPayload[] = [];
let pad: ProductPayload[] = [];
let suggestions: ProductPayload[] = [];
let lastProfile: ProfilePayload | null = null;
let lastBoard: LeaderboardEntryPayload[] = [];
let lastFeed: FeedEntryPayload[] = [];
let banner = "";
let stale = false;

const app = document.getElementById("app") as HTMLElement;
const who = document.getElementById("who") as HTMLSelectElement;

function dispatch(action: Action): void {
  state = reduce(state, action);
  draw();
}

function currentList(): ListPayload | null {
  return lists.find((l) => l.list_id === state.currentListId) ?? null;
}

function draw(): void {
  const staleNote = stale
    ? `<p class="muted" role="status">Showing last known data (connection trouble).</p>`
    : "";
  let body = "";
  switch (state.screen) {
    case "lists":
      body = renderListsScreen(lists, banner);
      break;
    case "list-detail": {
      const list = currentList();
      body = list ? renderListDetail(list, suggestions, banner) : renderListsScreen(lists, banner);
      break;
    }
    case "scan":
      body = renderScanScreen(state, pad, lists);
      break;
    case "profile":
      body = lastProfile
        ? staleNote + renderProfile(lastProfile, banner)
        : banner || `<p>Loading profile…</p>`;
      break;
    case "leaderboard":
      body = lastBoard.length || lastFeed.length || !banner
        ? staleNote + renderLeaderboard(lastBoard, user, banner) + renderFeed(lastFeed)
        : banner;
      break;
  }
  app.innerHTML = renderTabs(state.screen) + `<main>${body}</main>`;
}

function failureBanner(err: unknown): string {
  if (err instanceof ApiError) return renderBanner(`${err.message} [${err.code}]`);
  return renderBanner(String(err));
}

async function refreshLists(): Promise<void> {
  try {
    lists = (await api.lists()).lists;
    banner = "";
    stale = false;
  } catch (err) {
    banner = failureBanner(err);
    stale = true;
  }
}

async function refreshPad(): Promise<void> {
  try {
    pad = (await api.products("", 50)).products;
  } catch {
    pad = [];
  }
}

async function refreshProfileBoards(): Promise<void> {
  try {
    [lastProfile, lastBoard, lastFeed] = [
      await api.profile(),
      (await api.leaderboard(10)).entries,
      (await api.feed()).entries,
    ];
    banner = "";
    stale = false;
  } catch (err) {
    banner = failureBanner(err);
    stale = true;
  }
}

async function navigate(screen: Screen): Promise<void> {
  if (screen === "lists" || screen === "list-detail") await refreshLists();
  if (screen === "scan") {
    await refreshLists();
    if (!state.currentListId && lists.length > 0) {
      dispatch({ type: "open-list", listId: lists[0].list_id });
    }
    if (pad.length === 0) await refreshPad();
  }
  if (screen === "profile" || screen === "leaderboard") await refreshProfileBoards();
  dispatch({ type: "navigate", screen });
}

async function runScan(listId: string, code: string): Promise<void> {
  if (state.scanBusy) return;
  dispatch({ type: "scan-started" });
  try {
    const result = await api.scan(listId, code, crypto.randomUUID());
    await refreshLists();
    dispatch({ type: "scan-resolved", result });
  } catch (err) {
    if (err instanceof ApiError && err.isNetwork) {
      dispatch({ type: "scan-offline", queued: { listId, code } });
    } else {
      dispatch({ type: "scan-failed", message: err instanceof Error ? err.message : String(err) });
    }
  }
}

async function drainOffline(): Promise<void> {
  const queue = [...state.offlineQueue];
  const remaining: typeof queue = [];
  for (const entry of queue) {
    try {
      await api.scan(entry.listId, entry.code, crypto.randomUUID());
    } catch {
      remaining.push(entry);
    }
  }
  dispatch({ type: "offline-drained", remaining });
  await refreshLists();
  draw();
}

let typingTimer: ReturnType<typeof setTimeout> | undefined;

async function onTyping(text: string): Promise<void> {
  clearTimeout(typingTimer);
  typingTimer = setTimeout(async () => {
    try {
      suggestions = text.trim()
        ? (await api.suggestions(text, 6)).products
        : [];
    } catch {
      suggestions = [];
    }
    draw();
    const input = app.querySelector<HTMLInputElement>('input[name="label"]');
    if (input) {
      input.value = text;
      input.focus();
      input.setSelectionRange(text.length, text.length);
    }
  }, 120);
}

app.addEventListener("click", async (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target || target.dataset.action === "typing") return;
  const action = target.dataset.action!;
  switch (action) {
    case "navigate":
      await navigate(target.dataset.screen as Screen);
      break;
    case "open-list":
      await refreshLists();
      suggestions = [];
      dispatch({ type: "open-list", listId: target.dataset.list! });
      break;
    case "retry":
      await navigate(state.screen === "list-detail" ? "lists" : state.screen);
      break;
    case "check-item": {
      const list = currentList();
      if (!list) break;
      try {
        await api.checkItem(list.list_id, target.dataset.item!);
        await refreshLists();
      } catch (err) {
        banner = failureBanner(err);
      }
      draw();
      break;
    }
    case "add-product": {
      const list = currentList();
      if (!list) break;
      try {
        await api.addItem(list.list_id, target.dataset.label!, target.dataset.product);
        suggestions = [];
        await refreshLists();
      } catch (err) {
        banner = failureBanner(err);
      }
      draw();
      break;
    }
    case "pad-scan": {
      const select = app.querySelector<HTMLSelectElement>("#scan-list");
      const listId = select?.value ?? state.currentListId;
      if (listId) await runScan(listId, target.dataset.code!);
      break;
    }
    case "accept-alternative": {
      const select = app.querySelector<HTMLSelectElement>("#scan-list");
      const listId = select?.value ?? state.currentListId;
      if (!listId) break;
      try {
        await api.acceptAlternative(
          listId,
          target.dataset.item!,
          target.dataset.product!,
          crypto.randomUUID(),
        );
        await refreshLists();
        dispatch({ type: "dismiss-scan" });
      } catch (err) {
        dispatch({ type: "scan-failed", message: err instanceof Error ? err.message : String(err) });
      }
      break;
    }
    case "share": {
      try {
        await api.share(target.dataset.product!);
        target.textContent = "Shared ✓";
        (target as HTMLButtonElement).disabled = true;
      } catch (err) {
        dispatch({ type: "scan-failed", message: err instanceof Error ? err.message : String(err) });
      }
      break;
    }
    case "dismiss-scan":
      dispatch({ type: "dismiss-scan" });
      break;
    case "drain-offline":
      await drainOffline();
      break;
  }
});

app.addEventListener("submit", async (event) => {
  const form = event.target as HTMLFormElement;
  if (!form.dataset.action) return;
  event.preventDefault();
  const data = new FormData(form);
  switch (form.dataset.action) {
    case "create-list": {
      try {
        await api.createList(String(data.get("name") ?? ""), true);
        await refreshLists();
      } catch (err) {
        banner = failureBanner(err);
      }
      draw();
      break;
    }
    case "add-item": {
      const list = currentList();
      if (!list) break;
      try {
        await api.addItem(list.list_id, String(data.get("label") ?? ""));
        suggestions = [];
        await refreshLists();
      } catch (err) {
        banner = failureBanner(err);
      }
      draw();
      break;
    }
    case "code-scan": {
      const select = app.querySelector<HTMLSelectElement>("#scan-list");
      const listId = select?.value ?? state.currentListId;
      if (listId) await runScan(listId, String(data.get("code") ?? ""));
      break;
    }
  }
});

app.addEventListener("input", (event) => {
  const input = event.target as HTMLInputElement;
  if (input.dataset.action === "typing") void onTyping(input.value);
  if (input.id === "scan-list") {
    dispatch({ type: "open-list", listId: input.value });
    dispatch({ type: "navigate", screen: "scan" });
  }
});

who.addEventListener("change", async () => {
  user = who.value;
  api.setToken(TOKENS[user]);
  lastProfile = null;
  lastBoard = [];
  await navigate("lists");
});

void navigate("lists");
