// View state and reducer. Two invariants live here: at most one pending
// scan result at a time, and at most one in-flight scan request.

import type { ScanResponse } from "./types.js";

export type Screen = "lists" | "list-detail" | "scan" | "profile" | "leaderboard";

export const TABS: readonly Screen[] = ["lists", "scan", "profile", "leaderboard"];

export interface QueuedScan {
  listId: string;
  code: string;
}

export interface ViewState {
  screen: Screen;
  currentListId: string | null;
  pendingScan: ScanResponse | null;
  scanBusy: boolean;
  scanError: string | null;
  offlineQueue: readonly QueuedScan[];
}

export const initialState: ViewState = {
  screen: "lists",
  currentListId: null,
  pendingScan: null,
  scanBusy: false,
  scanError: null,
  offlineQueue: [],
};

export type Action =
  | { type: "navigate"; screen: Screen }
  | { type: "open-list"; listId: string }
  | { type: "scan-started" }
  | { type: "scan-resolved"; result: ScanResponse }
  | { type: "scan-failed"; message: string }
  | { type: "scan-offline"; queued: QueuedScan }
  | { type: "offline-drained"; remaining: readonly QueuedScan[] }
  | { type: "dismiss-scan" };

export function reduce(state: ViewState, action: Action): ViewState {
  switch (action.type) {
    case "navigate":
      // leaving the scan context drops any pending result
      return {
        ...state,
        screen: action.screen,
        currentListId: action.screen === "lists" ? null : state.currentListId,
        pendingScan: action.screen === "scan" ? state.pendingScan : null,
        scanError: action.screen === "scan" ? state.scanError : null,
      };
    case "open-list":
      return { ...state, screen: "list-detail", currentListId: action.listId, pendingScan: null };
    case "scan-started":
      if (state.scanBusy) return state; // one in-flight request at most
      return { ...state, scanBusy: true, scanError: null };
    case "scan-resolved":
      // replaces, never stacks: the single pending slot
      return { ...state, scanBusy: false, pendingScan: action.result, scanError: null };
    case "scan-failed":
      return { ...state, scanBusy: false, pendingScan: null, scanError: action.message };
    case "scan-offline":
      return {
        ...state,
        scanBusy: false,
        scanError: null,
        offlineQueue: [...state.offlineQueue, action.queued],
      };
    case "offline-drained":
      return { ...state, offlineQueue: action.remaining };
    case "dismiss-scan":
      return { ...state, pendingScan: null, scanError: null };
  }
}
