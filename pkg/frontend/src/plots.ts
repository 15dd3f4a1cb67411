/**
 * SVG plot helpers for the native CSV schemas: annotated care-matrix
 * heatmaps (cells below 0.01 are left blank for readability) and training
 * curves with shaded confidence bands.
 */

import * as fs from "node:fs";
import { parseCareMatrixCsv, parseCurvesCsv } from "./csv.js";

export const HEATMAP_SUPPRESS_BELOW = 0.01;

const SERIES_COLORS = ["#2b6cb0", "#c05621", "#2f855a", "#805ad5", "#b83280"];

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function heatColor(v: number, vmax: number): string {
  // White to deep blue ramp.
  const t = vmax > 0 ? Math.min(1, v / vmax) : 0;
  const r = Math.round(255 - 210 * t);
  const g = Math.round(255 - 170 * t);
  const b = Math.round(255 - 60 * t);
  return `rgb(${r},${g},${b})`;
}

/** Render an N x N care-matrix heatmap; returns the output path. */
export function plotCareMatrix(csvPath: string, outImage: string): string {
  const matrix = parseCareMatrixCsv(fs.readFileSync(csvPath, "utf8"));
  const n = matrix.n;
  const cell = 64;
  const margin = 56;
  const size = margin + n * cell + 16;
  const vmax = Math.max(...matrix.values.flat());
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${size}" height="${size + 24}" ` +
      `viewBox="0 0 ${size} ${size + 24}" font-family="sans-serif" font-size="12">`,
  );
  const title = matrix.normalized ? "care matrix (per breakage)" : "care matrix (raw counts)";
  parts.push(`<text x="${margin}" y="18" font-size="14">${esc(title)}</text>`);
  parts.push(`<text x="${margin - 44}" y="${margin - 14}">carer</text>`);
  parts.push(`<text x="${margin}" y="${margin - 28}">receiver</text>`);
  for (let i = 0; i < n; i++) {
    parts.push(
      `<text x="${margin - 16}" y="${margin + i * cell + cell / 2 + 4}" text-anchor="middle">${i + 1}</text>`,
    );
    parts.push(
      `<text x="${margin + i * cell + cell / 2}" y="${margin - 6}" text-anchor="middle">${i + 1}</text>`,
    );
  }
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const v = matrix.values[i][j];
      const x = margin + j * cell;
      const y = margin + i * cell;
      const suppressed = v < HEATMAP_SUPPRESS_BELOW;
      const fill = suppressed ? "#ffffff" : heatColor(v, vmax);
      parts.push(
        `<rect x="${x}" y="${y}" width="${cell}" height="${cell}" fill="${fill}" stroke="#999"/>`,
      );
      if (!suppressed) {
        const dark = v / (vmax || 1) > 0.55;
        parts.push(
          `<text x="${x + cell / 2}" y="${y + cell / 2 + 4}" text-anchor="middle" ` +
            `fill="${dark ? "#fff" : "#222"}">${v.toFixed(2)}</text>`,
        );
      }
    }
  }
  parts.push("</svg>");
  fs.writeFileSync(outImage, parts.join("\n") + "\n");
  return outImage;
}

/** Render training/sweep curves with shaded 95% CI bands; returns the path. */
export function plotCurves(csvPath: string, outImage: string): string {
  const curves = parseCurvesCsv(fs.readFileSync(csvPath, "utf8"));
  const w = 640;
  const h = 400;
  const ml = 64;
  const mr = 16;
  const mt = 28;
  const mb = 44;
  const xs = curves.x;
  const xmin = Math.min(...xs);
  const xmax = Math.max(...xs);
  let ymin = Infinity;
  let ymax = -Infinity;
  for (const s of curves.series) {
    for (let i = 0; i < s.values.length; i++) {
      const lo = s.values[i] - (s.ci?.[i] ?? 0);
      const hi = s.values[i] + (s.ci?.[i] ?? 0);
      ymin = Math.min(ymin, lo);
      ymax = Math.max(ymax, hi);
    }
  }
  if (ymin === ymax) {
    ymin -= 1;
    ymax += 1;
  }
  const sx = (x: number) => ml + ((x - xmin) / (xmax - xmin || 1)) * (w - ml - mr);
  const sy = (y: number) => h - mb - ((y - ymin) / (ymax - ymin)) * (h - mt - mb);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${w}" height="${h}" viewBox="0 0 ${w} ${h}" ` +
      `font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect x="0" y="0" width="${w}" height="${h}" fill="#ffffff"/>`);
  // axes
  parts.push(
    `<line x1="${ml}" y1="${h - mb}" x2="${w - mr}" y2="${h - mb}" stroke="#333"/>`,
    `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${h - mb}" stroke="#333"/>`,
  );
  const xticks = 5;
  for (let k = 0; k <= xticks; k++) {
    const xv = xmin + ((xmax - xmin) * k) / xticks;
    parts.push(
      `<text x="${sx(xv)}" y="${h - mb + 16}" text-anchor="middle">${Math.round(xv)}</text>`,
    );
  }
  for (let k = 0; k <= 4; k++) {
    const yv = ymin + ((ymax - ymin) * k) / 4;
    parts.push(
      `<text x="${ml - 6}" y="${sy(yv) + 4}" text-anchor="end">${yv.toFixed(2)}</text>`,
    );
  }
  parts.push(`<text x="${(ml + w - mr) / 2}" y="${h - 8}" text-anchor="middle">step</text>`);

  curves.series.forEach((s, si) => {
    const color = SERIES_COLORS[si % SERIES_COLORS.length];
    if (s.ci) {
      const upper = xs.map((x, i) => `${sx(x)},${sy(s.values[i] + s.ci![i])}`);
      const lower = xs
        .map((x, i) => `${sx(x)},${sy(s.values[i] - s.ci![i])}`)
        .reverse();
      parts.push(
        `<polygon class="ci-band" points="${upper.join(" ")} ${lower.join(" ")}" ` +
          `fill="${color}" fill-opacity="0.18" stroke="none"/>`,
      );
    }
    const pts = xs.map((x, i) => `${sx(x)},${sy(s.values[i])}`).join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    parts.push(
      `<text x="${w - mr - 8}" y="${mt + 16 * si + 4}" text-anchor="end" fill="${color}">${esc(s.name)}</text>`,
    );
  });
  parts.push("</svg>");
  fs.writeFileSync(outImage, parts.join("\n") + "\n");
  return outImage;
}
