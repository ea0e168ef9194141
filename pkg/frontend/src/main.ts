/** DOM wiring for the review app. All durable state lives in the API and the
 * location hash (#/parcel/<id>?date=<iso>), so a refresh reconstructs the
 * exact view. */

import {
  ApiError,
  chipUrl,
  fetchParcels,
  fetchStats,
  fetchTimeseries,
  postAnnotation,
} from "./api.js";
import { buildChartSvg, INDEX_NAMES, RATIO_NAMES, type ChartSeries } from "./chart.js";
import { categoriesOf, DEFAULT_FILTERS, filterParcels, parcelSeason, type ParcelFilters } from "./filters.js";
import { SEASONS } from "./season.js";
import { initialIndex, stepIndex } from "./slider.js";
import {
  beginSubmit,
  initialAnnotationState,
  submitFailed,
  submitSucceeded,
  type AnnotationState,
} from "./state.js";
import { barRows, recallLine } from "./stats.js";
import { CHIP_LAYERS, type ParcelSummary, type TimeseriesResponse } from "./types.js";

const API_BASE = "";
const SERIES_COLORS = ["#1565c0", "#c62828", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f", "#5d4037"];

interface AppState {
  parcels: ParcelSummary[];
  filters: ParcelFilters;
  selectedId: string | null;
  dateIndex: number;
  timeseries: TimeseriesResponse | null;
  chartGroup: "eom" | "vegetation" | "ratios";
  annotation: AnnotationState | null;
  annotator: string;
}

const state: AppState = {
  parcels: [],
  filters: { ...DEFAULT_FILTERS },
  selectedId: null,
  dateIndex: -1,
  timeseries: null,
  chartGroup: "eom",
  annotation: null,
  annotator: localStorage.getItem("eomwatch.annotator") ?? "reviewer",
};

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

function selectedParcel(): ParcelSummary | null {
  return state.parcels.find((p) => p.parcel_id === state.selectedId) ?? null;
}

// ---------------------------------------------------------------- routing

function readHash(): void {
  const match = location.hash.match(/^#\/parcel\/([^?]+)(?:\?(.*))?$/);
  if (!match) {
    state.selectedId = null;
    return;
  }
  state.selectedId = decodeURIComponent(match[1] ?? "");
  const params = new URLSearchParams(match[2] ?? "");
  const parcel = selectedParcel();
  const date = params.get("date");
  if (parcel && date) {
    const at = parcel.chip_dates.indexOf(date);
    state.dateIndex = at >= 0 ? at : initialIndex(parcel.chip_dates, parcel.anchor);
  }
}

function writeHash(): void {
  if (!state.selectedId) {
    history.replaceState(null, "", "#/");
    return;
  }
  const parcel = selectedParcel();
  const date = parcel?.chip_dates[state.dateIndex];
  const suffix = date ? `?date=${date}` : "";
  history.replaceState(null, "", `#/parcel/${encodeURIComponent(state.selectedId)}${suffix}`);
}

// ------------------------------------------------------------ parcel table

function renderFilterOptions(): void {
  const category = $("filter-category") as HTMLSelectElement;
  const current = category.value || "all";
  category.innerHTML =
    '<option value="all">all categories</option>' +
    categoriesOf(state.parcels)
      .map((c) => `<option value="${c}">${c}</option>`)
      .join("");
  category.value = current;

  const season = $("filter-season") as HTMLSelectElement;
  if (season.options.length <= 1) {
    season.innerHTML =
      '<option value="all">all seasons</option>' +
      SEASONS.map((s) => `<option value="${s}">${s}</option>`).join("");
  }
}

function renderTable(): void {
  const rows = filterParcels(state.parcels, state.filters);
  const body = $("parcel-rows");
  if (rows.length === 0) {
    body.innerHTML = '<tr><td colspan="6" class="empty">No parcels match the filters.</td></tr>';
    return;
  }
  body.innerHTML = rows
    .map((p) => {
      const verdict =
        p.change_visible === null ? "—" : p.change_visible ? "visible" : "not visible";
      const selected = p.parcel_id === state.selectedId ? " selected" : "";
      return (
        `<tr class="parcel-row${selected}" data-id="${p.parcel_id}">` +
        `<td>${p.parcel_id}</td><td>${p.crop_category}</td>` +
        `<td>${parcelSeason(p) ?? "—"}</td>` +
        `<td>${p.treated ? "treated" : "control"}</td>` +
        `<td class="${p.annotation_status}">${p.annotation_status}</td>` +
        `<td>${verdict}</td></tr>`
      );
    })
    .join("");
  for (const row of body.querySelectorAll<HTMLTableRowElement>(".parcel-row")) {
    row.addEventListener("click", () => selectParcel(row.dataset.id ?? null));
  }
}

// ------------------------------------------------------------- detail view

async function selectParcel(parcelId: string | null): Promise<void> {
  state.selectedId = parcelId;
  state.timeseries = null;
  const parcel = selectedParcel();
  if (!parcel) {
    state.annotation = null;
    writeHash();
    render();
    return;
  }
  state.dateIndex = initialIndex(parcel.chip_dates, parcel.anchor);
  state.annotation = initialAnnotationState(parcel.annotation_status, parcel.change_visible);
  writeHash();
  render();
  try {
    state.timeseries = await fetchTimeseries(API_BASE, parcel.parcel_id);
  } catch (error) {
    showBanner(`Failed to load time series: ${messageOf(error)}`);
  }
  render();
}

function renderChips(parcel: ParcelSummary): void {
  const container = $("chips");
  const date = parcel.chip_dates[state.dateIndex];
  if (!date) {
    container.innerHTML = '<p class="empty">No scenes available in this window.</p>';
    return;
  }
  container.innerHTML = CHIP_LAYERS.map(
    (layer) =>
      `<figure class="chip"><img alt="${layer} chip for ${parcel.parcel_id} on ${date}" ` +
      `src="${chipUrl(API_BASE, parcel.parcel_id, date, layer)}" ` +
      `onerror="this.closest('figure').classList.add('missing')"/>` +
      `<figcaption>${layer}</figcaption></figure>`,
  ).join("");

  const slider = $("date-slider") as HTMLInputElement;
  slider.max = String(parcel.chip_dates.length - 1);
  slider.value = String(state.dateIndex);
  const anchorAt = parcel.anchor ? parcel.chip_dates.findIndex((d) => d >= parcel.anchor!) : -1;
  $("date-label").textContent =
    date + (anchorAt === state.dateIndex && anchorAt >= 0 ? " (anchor)" : "");
  $("anchor-label").textContent = parcel.anchor ? `application anchor: ${parcel.anchor}` : "";
}

function chartSeriesNames(): string[] {
  switch (state.chartGroup) {
    case "eom":
      return INDEX_NAMES.filter((n) => n !== "ndvi" && n !== "evi");
    case "vegetation":
      return ["ndvi", "evi"];
    case "ratios":
      return RATIO_NAMES.slice(0, 4);
  }
}

function renderChart(): void {
  const container = $("chart");
  const ts = state.timeseries;
  if (!ts || ts.series.length === 0) {
    container.innerHTML = '<p class="empty">No observations for this parcel.</p>';
    return;
  }
  const dates = ts.series.map((r) => r.date);
  const names = chartSeriesNames();
  const series: ChartSeries[] = names.map((name, i) => ({
    name,
    values: ts.series.map((r) => r.values[name] ?? null),
    color: SERIES_COLORS[i % SERIES_COLORS.length]!,
  }));
  container.innerHTML =
    buildChartSvg(dates, series, ts.anchor) +
    `<div class="legend">${series
      .map((s) => `<span><i style="background:${s.color}"></i>${s.name}</span>`)
      .join("")}</div>`;
}

function renderAnnotationPanel(parcel: ParcelSummary): void {
  const panel = $("annotation-panel");
  const a = state.annotation;
  if (!a) {
    panel.innerHTML = "";
    return;
  }
  if (!parcel.treated) {
    panel.innerHTML =
      '<p class="control-note">Control parcel — no digestate was applied, so photo-' +
      "interpretation verdicts are disabled. Only treated parcels are annotated.</p>";
    return;
  }
  const verdict =
    a.changeVisible === null ? "no verdict yet" : a.changeVisible ? "change visible" : "no change visible";
  panel.innerHTML =
    `<p>Status: <strong class="${a.status}">${a.status}</strong> (${verdict})` +
    (a.pending ? " — saving…" : "") +
    "</p>" +
    '<div class="verdict-buttons">' +
    '<button id="mark-visible" title="shortcut: V">Change visible (V)</button>' +
    '<button id="mark-not-visible" title="shortcut: N">Not visible (N)</button>' +
    "</div>" +
    (a.error
      ? `<p class="error">${a.error}${a.retryable ? ' <button id="retry">Retry</button>' : ""}</p>`
      : "");
  $("mark-visible").addEventListener("click", () => submitVerdict(true));
  $("mark-not-visible").addEventListener("click", () => submitVerdict(false));
  const retry = document.getElementById("retry");
  if (retry && a.draft !== null) {
    retry.addEventListener("click", () => submitVerdict(a.draft!));
  }
}

async function submitVerdict(verdict: boolean): Promise<void> {
  const parcel = selectedParcel();
  if (!parcel || !state.annotation || state.annotation.pending) return;
  const previous = state.annotation;
  state.annotation = beginSubmit(previous, verdict);
  render();
  try {
    await postAnnotation(API_BASE, parcel.parcel_id, verdict, state.annotator);
    state.annotation = submitSucceeded(state.annotation);
    parcel.annotation_status = "annotated";
    parcel.change_visible = verdict;
    await refreshStats(); // the stats panel updates right after each verdict
  } catch (error) {
    const status = error instanceof ApiError ? error.status : undefined;
    state.annotation = submitFailed(state.annotation, previous, messageOf(error), status);
  }
  render();
}

// ------------------------------------------------------------- stats panel

async function refreshStats(): Promise<void> {
  try {
    const stats = await fetchStats(API_BASE);
    $("recall-line").textContent = recallLine(stats);
    renderBars("category-bars", barRows(stats.by_category));
    renderBars("season-bars", barRows(stats.by_season));
  } catch (error) {
    $("recall-line").textContent = `Stats unavailable: ${messageOf(error)}`;
  }
}

function renderBars(elementId: string, rows: ReturnType<typeof barRows>): void {
  $(elementId).innerHTML = rows.length
    ? rows
        .map(
          (r) =>
            `<div class="bar-row"><span class="bar-label">${r.label} (${r.count})</span>` +
            `<div class="bar"><i class="visible" style="width:${r.visiblePct}%"></i>` +
            `<i class="not-visible" style="width:${r.notVisiblePct}%"></i></div>` +
            `<span class="bar-pct">${r.visiblePct.toFixed(0)}%</span></div>`,
        )
        .join("")
    : '<p class="empty">No annotated parcels yet.</p>';
}

// ---------------------------------------------------------------- keyboard

function onKeyDown(event: KeyboardEvent): void {
  if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
    return;
  }
  const parcel = selectedParcel();
  if (!parcel) return;
  if (event.key === "ArrowLeft" || event.key === "ArrowRight") {
    const delta = event.key === "ArrowLeft" ? -1 : 1;
    state.dateIndex = stepIndex(state.dateIndex, delta, parcel.chip_dates.length);
    writeHash();
    renderChips(parcel);
    event.preventDefault();
  } else if (event.key === "v" || event.key === "V") {
    void submitVerdict(true);
  } else if (event.key === "n" || event.key === "N") {
    void submitVerdict(false);
  }
}

// ---------------------------------------------------------------- plumbing

function messageOf(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}

function showBanner(message: string): void {
  const banner = $("banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
  setTimeout(() => banner.classList.add("hidden"), 6000);
}

function render(): void {
  renderFilterOptions();
  renderTable();
  const parcel = selectedParcel();
  const detail = $("detail");
  if (!parcel) {
    detail.classList.add("hidden");
    return;
  }
  detail.classList.remove("hidden");
  $("detail-title").textContent =
    `${parcel.parcel_id} — ${parcel.crop_category}, ${parcel.treated ? "treated" : "control"}`;
  renderChips(parcel);
  renderChart();
  renderAnnotationPanel(parcel);
}

async function boot(): Promise<void> {
  const annotatorInput = $("annotator") as HTMLInputElement;
  annotatorInput.value = state.annotator;
  annotatorInput.addEventListener("change", () => {
    state.annotator = annotatorInput.value || "reviewer";
    localStorage.setItem("eomwatch.annotator", state.annotator);
  });

  for (const [id, key] of [
    ["filter-category", "category"],
    ["filter-season", "season"],
    ["filter-status", "status"],
    ["filter-treatment", "treatment"],
  ] as const) {
    $(id).addEventListener("change", (event) => {
      state.filters = { ...state.filters, [key]: (event.target as HTMLSelectElement).value };
      renderTable();
    });
  }

  ($("date-slider") as HTMLInputElement).addEventListener("input", (event) => {
    const parcel = selectedParcel();
    if (!parcel) return;
    state.dateIndex = Number((event.target as HTMLInputElement).value);
    writeHash();
    renderChips(parcel);
  });

  for (const group of ["eom", "vegetation", "ratios"] as const) {
    $(`chart-${group}`).addEventListener("click", () => {
      state.chartGroup = group;
      renderChart();
    });
  }

  document.addEventListener("keydown", onKeyDown);

  try {
    state.parcels = await fetchParcels(API_BASE);
  } catch (error) {
    showBanner(`Failed to load parcels: ${messageOf(error)}`);
    state.parcels = [];
  }
  readHash();
  const fromHash = selectedParcel();
  if (fromHash) {
    await selectParcel(fromHash.parcel_id);
  } else {
    render();
  }
  await refreshStats();
}

void boot();
