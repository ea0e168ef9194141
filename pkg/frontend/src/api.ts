/** Thin fetch client; URL builders are pure so tests cover them directly. */

import type {
  AnnotationRecord,
  ChipLayer,
  ParcelSummary,
  StatsResponse,
  TimeseriesResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

export function parcelsUrl(base: string): string {
  return `${base}/api/parcels`;
}

export function timeseriesUrl(base: string, parcelId: string): string {
  return `${base}/api/parcels/${encodeURIComponent(parcelId)}/timeseries`;
}

export function annotationUrl(base: string, parcelId: string): string {
  return `${base}/api/parcels/${encodeURIComponent(parcelId)}/annotation`;
}

export function statsUrl(base: string): string {
  return `${base}/api/stats/photo-interpretation`;
}

export function chipUrl(
  base: string,
  parcelId: string,
  date: string,
  layer: ChipLayer,
  scale = 16,
): string {
  const params = new URLSearchParams({ date, layer, scale: String(scale) });
  return `${base}/api/parcels/${encodeURIComponent(parcelId)}/chip?${params.toString()}`;
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    throw new ApiError(response.status, await detailOf(response));
  }
  return (await response.json()) as T;
}

async function detailOf(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    return body.detail ?? `HTTP ${response.status}`;
  } catch {
    return `HTTP ${response.status}`;
  }
}

export function fetchParcels(base: string): Promise<ParcelSummary[]> {
  return getJson(parcelsUrl(base));
}

export function fetchTimeseries(base: string, parcelId: string): Promise<TimeseriesResponse> {
  return getJson(timeseriesUrl(base, parcelId));
}

export function fetchStats(base: string): Promise<StatsResponse> {
  return getJson(statsUrl(base));
}

export async function postAnnotation(
  base: string,
  parcelId: string,
  changeVisible: boolean,
  annotator: string,
): Promise<AnnotationRecord> {
  const response = await fetch(annotationUrl(base, parcelId), {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ change_visible: changeVisible, annotator }),
  });
  if (!response.ok) {
    throw new ApiError(response.status, await detailOf(response));
  }
  return (await response.json()) as AnnotationRecord;
}
