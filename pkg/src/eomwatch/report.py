"""Evaluation report rendering: markdown metric tables and SVG bar charts.

The SVG writer is deliberately hand-rolled: chart libraries embed creation
timestamps or generator ids in their SVG output, which would break the
byte-identical rerun guarantee the pipeline makes for its artifacts.
"""

from __future__ import annotations

from .evaluation import (
    CVResult,
    DistributionTables,
    FoldMetrics,
    GroupShare,
    PhotoInterpStats,
    truncated_percent,
)

MODEL_DISPLAY_NAMES = {
    "rf": "Random Forest",
    "knn": "k-NN",
    "gb": "Gradient Boosting",
    "nn": "Feed-Forward Neural Network",
}


def _row(model: str, cls: int, m) -> str:
    return f"| {model} | {cls} | {m.precision:.2f} | {m.recall:.2f} | {m.f1:.2f} |"


def render_holdout_table(holdout: dict[str, FoldMetrics]) -> str:
    lines = [
        "| Model | Class | Precision | Recall | F1 Score |",
        "| --- | --- | --- | --- | --- |",
    ]
    for kind, metrics in holdout.items():
        name = MODEL_DISPLAY_NAMES.get(kind, kind)
        lines.append(_row(name, 0, metrics.per_class[0]))
        lines.append(_row("", 1, metrics.per_class[1]))
    return "\n".join(lines)


def render_cv_table(cv: dict[str, CVResult]) -> str:
    lines = [
        "| Model | Class | Precision | Recall | F1 Score |",
        "| --- | --- | --- | --- | --- |",
    ]
    for kind, result in cv.items():
        name = MODEL_DISPLAY_NAMES.get(kind, kind)
        for cls in (0, 1):
            mean, std = result.mean[cls], result.std[cls]
            lines.append(
                f"| {name if cls == 0 else ''} | {cls} "
                f"| {mean.precision:.2f} ± {std.precision:.2f} "
                f"| {mean.recall:.2f} ± {std.recall:.2f} "
                f"| {mean.f1:.2f} ± {std.f1:.2f} |"
            )
    return "\n".join(lines)


def render_distribution_markdown(tables: DistributionTables) -> str:
    lines = []
    for title, table in (("crop category", tables.by_category),
                         ("season", tables.by_season)):
        lines.append(f"### Change visibility per {title}")
        lines.append("")
        lines.append("| Group | Visible % | Not visible % | Parcels |")
        lines.append("| --- | --- | --- | --- |")
        for group, share in table.items():
            lines.append(
                f"| {group} | {share.visible_pct:.2f} | {share.not_visible_pct:.2f} "
                f"| {share.count} |"
            )
        lines.append("")
    for note in tables.notes:
        lines.append(f"- {note}")
    return "\n".join(lines).rstrip() + "\n"


def render_distribution_svg(table: dict[str, GroupShare], title: str) -> str:
    """Grouped bar chart (visible vs not visible, percent) as an SVG string."""
    groups = list(table.items())
    width, height = 640, 320
    margin_left, margin_bottom, margin_top = 50, 60, 30
    plot_w = width - margin_left - 20
    plot_h = height - margin_top - margin_bottom
    slot = plot_w / max(len(groups), 1)
    bar_w = min(40.0, slot / 3)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    # y axis with gridlines every 25%
    for pct in (0, 25, 50, 75, 100):
        y = margin_top + plot_h * (1 - pct / 100)
        parts.append(
            f'<line x1="{margin_left}" y1="{y:.1f}" x2="{width - 20}" y2="{y:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{margin_left - 6}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{pct}</text>'
        )
    for i, (group, share) in enumerate(groups):
        cx = margin_left + slot * (i + 0.5)
        for j, (value, color) in enumerate(
            ((share.visible_pct, "#2e7d32"), (share.not_visible_pct, "#9e9e9e"))
        ):
            bar_h = plot_h * value / 100
            x = cx - bar_w + j * bar_w
            y = margin_top + plot_h - bar_h
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" height="{bar_h:.1f}" '
                f'fill="{color}"/>'
            )
            parts.append(
                f'<text x="{x + bar_w / 2:.1f}" y="{y - 3:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="9">{value:.1f}</text>'
            )
        parts.append(
            f'<text x="{cx:.1f}" y="{margin_top + plot_h + 14:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{group} (n={share.count})</text>'
        )
    legend_y = height - 18
    parts.append(
        f'<rect x="{margin_left}" y="{legend_y - 9}" width="10" height="10" fill="#2e7d32"/>'
        f'<text x="{margin_left + 14}" y="{legend_y}" font-family="sans-serif" '
        f'font-size="11">change visible</text>'
    )
    parts.append(
        f'<rect x="{margin_left + 130}" y="{legend_y - 9}" width="10" height="10" fill="#9e9e9e"/>'
        f'<text x="{margin_left + 144}" y="{legend_y}" font-family="sans-serif" '
        f'font-size="11">not visible</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_report_markdown(
    holdout: dict[str, FoldMetrics],
    cv: dict[str, CVResult],
    cv_mode: str,
    photo: PhotoInterpStats | None,
    tables: DistributionTables | None,
    config_hash: str,
    seed: int,
) -> str:
    parts = [
        "# Digestate-detection evaluation report",
        "",
        f"Config hash `{config_hash}`, seed {seed}.",
        "",
        "## Held-out test metrics",
        "",
        render_holdout_table(holdout),
        "",
        f"## 5-fold cross-validation metrics (mean ± std, folds over the {cv_mode} split)",
        "",
        render_cv_table(cv),
        "",
        "## Photo interpretation",
        "",
    ]
    if photo is None or photo.annotated_count == 0:
        parts.append("No annotations recorded yet.")
    else:
        recall_pct = truncated_percent(photo.recall)
        parts.append(
            f"Recall of detecting the change by photo interpretation: "
            f"**{recall_pct:.2f}%** ({photo.visible_count}/{photo.annotated_count} "
            f"annotated treated parcels; coverage "
            f"{100.0 * photo.coverage:.1f}% of {photo.treated_count})."
        )
        if photo.partial_coverage:
            parts.append("")
            parts.append(
                "Warning: partial coverage; recall is computed over the annotated subset."
            )
        if tables is not None:
            parts.append("")
            parts.append(render_distribution_markdown(tables))
    return "\n".join(parts).rstrip() + "\n"
