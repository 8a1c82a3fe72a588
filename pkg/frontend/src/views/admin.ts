import { renderChart } from '../chart.js';
import { escapeHtml, num, shortId, timestamp } from '../format.js';
import type { Campaign, Ledger, StatsRow } from '../types.js';

/**
 * Admin dashboard views. Same contract as the worker views: every number a
 * cell shows is the API's own text, so the dashboard can be diffed against
 * the CLI's CSV export byte for byte.
 */

export function renderStatsTable(series: StatsRow[]): string {
  if (series.length === 0) return '<p class="empty">No completed reports yet.</p>';
  // column order matches the CSV export so the two can be compared directly
  const rows = series.map(
    (r) => `<tr data-day="${escapeHtml(r.day)}">
      <td>${escapeHtml(r.day)}</td>
      <td class="reports">${num(r.reports)}</td>
      <td class="sentences">${num(r.sentences)}</td>
      <td class="cumulative-sentences">${num(r.cumulative_sentences)}</td>
      <td class="payout">${num(r.payout)}</td>
    </tr>`,
  );
  return `<table class="listing stats">
    <thead><tr><th>day</th><th>reports</th><th>sentences</th><th>cumulative_sentences</th><th>payout</th></tr></thead>
    <tbody>${rows.join('')}</tbody>
  </table>`;
}

export function renderStatsSection(campaign: Campaign, series: StatsRow[]): string {
  return `<section class="stats" data-campaign="${campaign.id}">
    <h2>${escapeHtml(campaign.name)}</h2>
    ${renderChart(series)}
    ${renderStatsTable(series)}
  </section>`;
}

export function renderPayoutLookupForm(): string {
  return `<form class="payout-lookup">
    <label>Worker id <input name="worker_id" placeholder="worker id" required></label>
    <button type="submit">Show ledger</button>
    <div class="form-error" role="alert"></div>
  </form>`;
}

export interface PayoutRow {
  workerId: string;
  ledger: Ledger;
}

export function renderPayoutTable(rows: PayoutRow[]): string {
  if (rows.length === 0) {
    return '<p class="empty">Look up a worker id to see its payouts.</p>';
  }
  const body = rows.map(
    (r) => `<tr data-worker="${escapeHtml(r.workerId)}">
      <td>${shortId(r.workerId)}</td>
      <td class="entries">${num(r.ledger.entries.length)}</td>
      <td class="total">${num(r.ledger.total)}</td>
      <td>${r.ledger.entries.length > 0 ? timestamp(r.ledger.entries[r.ledger.entries.length - 1].created_at) : ''}</td>
    </tr>`,
  );
  return `<table class="listing payouts">
    <thead><tr><th>Worker</th><th>Payouts</th><th>Total</th><th>Last paid</th></tr></thead>
    <tbody>${body.join('')}</tbody>
  </table>`;
}

export interface CohortEntry {
  campaign: Campaign;
  last: StatsRow | null;
}

export interface DomainCohort {
  domain: string;
  fixed: CohortEntry[];
  variable: CohortEntry[];
}

export function groupCohorts(entries: CohortEntry[]): DomainCohort[] {
  const byDomain = new Map<string, DomainCohort>();
  for (const entry of entries) {
    const domain = entry.campaign.domain;
    let cohort = byDomain.get(domain);
    if (!cohort) {
      cohort = { domain, fixed: [], variable: [] };
      byDomain.set(domain, cohort);
    }
    (entry.campaign.reward.mode === 'fixed' ? cohort.fixed : cohort.variable).push(entry);
  }
  return [...byDomain.values()];
}

function cohortCell(entries: CohortEntry[]): string {
  if (entries.length === 0) return '<td class="cohort-empty" colspan="2">&mdash;</td>';
  const lines = entries.map((e) => {
    const sentences = e.last ? num(e.last.cumulative_sentences) : '0';
    const payout = e.last ? num(e.last.cumulative_payout) : '0';
    return `<div class="cohort-line" data-campaign="${e.campaign.id}">
      <span class="cohort-name">${escapeHtml(e.campaign.name)}</span>
      <span class="cohort-sentences">${sentences}</span> sentences for
      <span class="cohort-payout">${payout}</span>
    </div>`;
  });
  return `<td colspan="2">${lines.join('')}</td>`;
}

/** Fixed-reward vs variable-reward campaigns side by side, per domain. */
export function renderCohorts(cohorts: DomainCohort[]): string {
  if (cohorts.length === 0) return '<p class="empty">No campaigns yet.</p>';
  const rows = cohorts.map(
    (c) => `<tr data-domain="${escapeHtml(c.domain)}">
      <td>${escapeHtml(c.domain)}</td>
      ${cohortCell(c.fixed)}
      ${cohortCell(c.variable)}
    </tr>`,
  );
  return `<table class="listing cohorts">
    <thead><tr><th rowspan="2">Domain</th><th colspan="2">Fixed reward</th><th colspan="2">Variable reward</th></tr>
    <tr><th colspan="2">cumulative sentences / payout</th><th colspan="2">cumulative sentences / payout</th></tr></thead>
    <tbody>${rows.join('')}</tbody>
  </table>`;
}

export function renderExportSection(campaign: Campaign, href: string): string {
  return `<p class="export">
    <a class="export-link" href="${escapeHtml(href)}" download="${campaign.id}.tsv">
      Download mined pairs (cost &le; ${num(campaign.cost_threshold)}) as TSV
    </a>
  </p>`;
}
