/** Payload shapes of the review-service API. */

export interface WindowSpan {
  start: string;
  end: string;
}

export interface ParcelSummary {
  parcel_id: string;
  crop_category: string;
  crop_code: string;
  treated: boolean;
  anchor: string | null;
  window: WindowSpan | null;
  annotation_status: "annotated" | "unannotated";
  change_visible: boolean | null;
  n_observations: number;
  chip_dates: string[];
}

export interface SeriesRecord {
  date: string;
  valid_fraction: number;
  values: Record<string, number | null>;
}

export interface TimeseriesResponse {
  parcel_id: string;
  anchor: string;
  window: WindowSpan;
  series: SeriesRecord[];
}

export interface GroupShare {
  visible_pct: number;
  not_visible_pct: number;
  count: number;
}

export interface StatsResponse {
  treated: number;
  annotated: number;
  visible: number;
  recall: number | null;
  recall_percent: number | null;
  coverage: number;
  partial_coverage: boolean;
  by_category: Record<string, GroupShare>;
  by_season: Record<string, GroupShare>;
  notes: string[];
}

export interface AnnotationRecord {
  parcel_id: string;
  change_visible: boolean;
  annotator: string;
  timestamp: string;
}

export type ChipLayer = "rgb" | "ndvi" | "eomi2";

export const CHIP_LAYERS: ChipLayer[] = ["rgb", "ndvi", "eomi2"];
