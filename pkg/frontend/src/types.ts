// Shapes of the /v1 API payloads the UI consumes. The UI never computes
// footprint numbers itself; every star value on screen comes from one of
// these fields.

export interface ProductPayload {
  product_id: string;
  name: string;
  category: string;
  code: string;
  unit_weight_kg: number;
  image_ref: string | null;
  stars: number;
}

export interface AssessmentPayload {
  weights: Record<string, number>;
  daily_value: Record<string, number>;
  sustainability_score: number | null;
  stars: number;
}

export interface ItemPayload {
  item_id: string;
  label: string;
  position: number;
  linked_product: string | null;
  checked: boolean;
  manual_check: boolean;
  scan_code: string | null;
  assessment: AssessmentPayload | null;
}

export interface ListPayload {
  list_id: string;
  owner: string;
  name: string;
  created_at: number;
  updated_at: number;
  items: ItemPayload[];
}

export interface MissionPayload {
  mission_id: string;
  title: string;
  current: number;
  required: number;
  completed: boolean;
}

export interface ProfilePayload {
  user: string;
  points: number;
  level: number;
  badges: string[];
  missions: MissionPayload[];
  warnings: string[];
}

export interface LeaderboardEntryPayload {
  rank: number;
  user: string;
  points: number;
  level: number;
}

export interface FeedEntryPayload {
  seq: number;
  author: string;
  product_id: string;
  product_name: string | null;
  stars: number;
  note: string | null;
  shared_at: number;
}

export interface ScanResponse {
  item: ItemPayload;
  product: ProductPayload;
  assessment: AssessmentPayload;
  alternative: ProductPayload | null;
  new_badges: string[];
  profile: ProfilePayload;
}

export interface AcceptResponse {
  item: ItemPayload;
  product: ProductPayload;
  assessment: AssessmentPayload;
  new_badges: string[];
  profile: ProfilePayload;
}

export interface CreateListResponse {
  list: ListPayload;
  suggestions: {
    product: ProductPayload;
    is_alternative: boolean;
    alternative_to: string | null;
  }[];
}
