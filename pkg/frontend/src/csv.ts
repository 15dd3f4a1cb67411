/** Minimal CSV reading for the native metrics schemas (comment lines start
 * with '#'; fields never contain commas or quotes). */

export class SchemaMismatchError extends Error {}

export interface CsvTable {
  comment: string | null;
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  let comment: string | null = null;
  let i = 0;
  if (lines[i]?.startsWith("#")) {
    comment = lines[i];
    i += 1;
  }
  if (i >= lines.length) throw new SchemaMismatchError("CSV has no header row");
  const header = lines[i].split(",");
  const rows = lines.slice(i + 1).map((l) => l.split(","));
  for (const r of rows) {
    if (r.length !== header.length) {
      throw new SchemaMismatchError(
        `row width ${r.length} != header width ${header.length}`,
      );
    }
  }
  return { comment, header, rows };
}

export interface CareMatrix {
  n: number;
  values: number[][]; // carer row -> receiver column
  normalized: boolean;
}

export function parseCareMatrixCsv(text: string): CareMatrix {
  const t = parseCsv(text);
  if (!t.comment || !t.comment.includes("care-matrix")) {
    throw new SchemaMismatchError("not a care-matrix CSV (missing schema comment)");
  }
  const n = t.header.length - 1;
  if (n < 1 || t.rows.length !== n) {
    throw new SchemaMismatchError(`expected an ${n}x${n} matrix body`);
  }
  const values = t.rows.map((row, i) => {
    if (row[0] !== String(i + 1)) {
      throw new SchemaMismatchError(`row label ${row[0]} != ${i + 1}`);
    }
    return row.slice(1).map((v) => {
      const x = Number(v);
      if (!Number.isFinite(x)) throw new SchemaMismatchError(`bad number ${v}`);
      return x;
    });
  });
  return { n, values, normalized: t.comment.includes("normalized=true") };
}

export interface CurveSeries {
  name: string;
  values: number[];
  ci?: number[]; // half-width, drawn as a shaded band
}

export interface Curves {
  x: number[];
  series: CurveSeries[];
}

export function parseCurvesCsv(text: string): Curves {
  const t = parseCsv(text);
  if (t.header.length < 2) throw new SchemaMismatchError("curves CSV needs an x column and data");
  if (t.rows.length === 0) throw new SchemaMismatchError("curves CSV has no data rows");
  const cols = t.header.map((_, c) =>
    t.rows.map((r) => {
      const x = Number(r[c]);
      if (!Number.isFinite(x)) throw new SchemaMismatchError(`bad number ${r[c]}`);
      return x;
    }),
  );
  const x = cols[0];
  const series: CurveSeries[] = [];
  for (let c = 1; c < t.header.length; c++) {
    const name = t.header[c];
    if (name.endsWith("_ci")) continue;
    const ciIdx = t.header.indexOf(`${name}_ci`);
    series.push({
      name,
      values: cols[c],
      ci: ciIdx >= 0 ? cols[ciIdx] : undefined,
    });
  }
  return { x, series };
}
