import { escapeHtml, num } from './format.js';
import type { StatsRow } from './types.js';

export interface ChartPoint {
  day: string;
  /** the API value, untouched; x/y are only screen placement */
  value: number;
  x: number;
  y: number;
}

export type Metric = 'reports' | 'sentences' | 'payout';

const WIDTH = 640;
const HEIGHT = 180;
const PAD = 28;

/**
 * Screen coordinates for one metric of the daily series. Days spread evenly
 * over the x axis in series order; y scales linearly from 0 to the series
 * maximum. The value field stays exactly what the API returned.
 */
export function chartPoints(series: StatsRow[], metric: Metric): ChartPoint[] {
  const max = Math.max(1, ...series.map((row) => row[metric]));
  const step = series.length > 1 ? (WIDTH - 2 * PAD) / (series.length - 1) : 0;
  return series.map((row, i) => ({
    day: row.day,
    value: row[metric],
    x: PAD + (series.length > 1 ? i * step : (WIDTH - 2 * PAD) / 2),
    y: HEIGHT - PAD - (row[metric] / max) * (HEIGHT - 2 * PAD),
  }));
}

const METRIC_CLASSES: Record<Metric, string> = {
  reports: 'line-reports',
  sentences: 'line-sentences',
  payout: 'line-payout',
};

export function renderChart(series: StatsRow[]): string {
  if (series.length === 0) {
    return '<p class="empty">No completed reports yet.</p>';
  }
  const parts: string[] = [
    `<svg class="chart" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">`,
  ];
  for (const metric of Object.keys(METRIC_CLASSES) as Metric[]) {
    const points = chartPoints(series, metric);
    const path = points.map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`).join(' ');
    parts.push(`<polyline class="${METRIC_CLASSES[metric]}" points="${path}"/>`);
    for (const p of points) {
      parts.push(
        `<circle class="${METRIC_CLASSES[metric]}" cx="${p.x.toFixed(1)}"` +
          ` cy="${p.y.toFixed(1)}" r="3" data-metric="${metric}"` +
          ` data-day="${escapeHtml(p.day)}" data-value="${num(p.value)}"/>`,
      );
    }
  }
  parts.push('</svg>');
  return parts.join('');
}
