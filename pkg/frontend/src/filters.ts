/** Parcel-table filtering; everything derives from the API payload alone. */

import { seasonOf, type Season } from "./season.js";
import type { ParcelSummary } from "./types.js";

export interface ParcelFilters {
  category: string | "all";
  season: Season | "all";
  status: "annotated" | "unannotated" | "all";
  treatment: "treated" | "control" | "all";
}

export const DEFAULT_FILTERS: ParcelFilters = {
  category: "all",
  season: "all",
  status: "all",
  treatment: "all",
};

export function parcelSeason(parcel: ParcelSummary): Season | null {
  return parcel.anchor ? seasonOf(parcel.anchor) : null;
}

export function matchesFilters(parcel: ParcelSummary, filters: ParcelFilters): boolean {
  if (filters.category !== "all" && parcel.crop_category !== filters.category) {
    return false;
  }
  if (filters.season !== "all" && parcelSeason(parcel) !== filters.season) {
    return false;
  }
  if (filters.status !== "all" && parcel.annotation_status !== filters.status) {
    return false;
  }
  if (filters.treatment === "treated" && !parcel.treated) {
    return false;
  }
  if (filters.treatment === "control" && parcel.treated) {
    return false;
  }
  return true;
}

export function filterParcels(
  parcels: ParcelSummary[],
  filters: ParcelFilters,
): ParcelSummary[] {
  return parcels.filter((p) => matchesFilters(p, filters));
}

export function categoriesOf(parcels: ParcelSummary[]): string[] {
  return [...new Set(parcels.map((p) => p.crop_category))].sort();
}
