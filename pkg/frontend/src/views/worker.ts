import { ApiError } from '../api.js';
import { escapeHtml, num, shortId, timestamp } from '../format.js';
import type { Campaign, ExamplePair, Ledger, ReportView } from '../types.js';

/**
 * Pure render functions: API JSON in, HTML string out. The browser shell
 * (main.ts) only wires events and swaps innerHTML, so everything a worker
 * sees is testable as plain strings and survives a reload unchanged.
 */

export function renderCampaignList(campaigns: Campaign[]): string {
  if (campaigns.length === 0) return '<p class="empty">No campaigns yet.</p>';
  const rows = campaigns.map(
    (c) => `<tr>
      <td><a href="#/campaigns/${c.id}">${escapeHtml(c.name)}</a></td>
      <td>${escapeHtml(c.domain)}</td>
      <td>${escapeHtml(c.src_lang)} &rarr; ${escapeHtml(c.tgt_lang)}</td>
      <td>${escapeHtml(c.reward.mode)}</td>
    </tr>`,
  );
  return `<table class="listing">
    <thead><tr><th>Campaign</th><th>Domain</th><th>Languages</th><th>Reward</th></tr></thead>
    <tbody>${rows.join('')}</tbody>
  </table>`;
}

export function renderBrief(campaign: Campaign, examples: ExamplePair[]): string {
  const reward =
    campaign.reward.mode === 'fixed'
      ? `fixed: ${num(campaign.reward.fixed_amount)} per accepted report`
      : `variable: ${num(campaign.reward.r_min)} to ${num(campaign.reward.r_max)},` +
        ' growing with every good pair'
  const exampleRows = examples.map(
    (ex) => `<tr><td>${escapeHtml(ex.src)}</td><td>${escapeHtml(ex.tgt)}</td></tr>`,
  );
  return `<section class="brief">
    <h2>${escapeHtml(campaign.name)}</h2>
    <p>Find pairs of web pages in the <strong>${escapeHtml(campaign.domain)}</strong>
    domain where the ${escapeHtml(campaign.src_lang)} page and the
    ${escapeHtml(campaign.tgt_lang)} page are translations of each other, then
    submit both URLs below. Pairs aligning with cost above
    ${num(campaign.cost_threshold)} are discarded.</p>
    <p class="reward-note">Reward ${reward}.</p>
    <h3>What the sentences look like</h3>
    <table class="examples">
      <thead><tr><th>${escapeHtml(campaign.src_lang)}</th><th>${escapeHtml(campaign.tgt_lang)}</th></tr></thead>
      <tbody>${exampleRows.join('')}</tbody>
    </table>
  </section>`;
}

export function renderSubmitForm(campaignId: string): string {
  return `<form class="submit-form" data-campaign="${campaignId}">
    <label>First page URL <input name="url_a" type="url" placeholder="https://..." required></label>
    <label>Second page URL <input name="url_b" type="url" placeholder="https://..." required></label>
    <button type="submit">Submit report</button>
    <div class="form-error" role="alert"></div>
  </form>`;
}

const BADGE_CLASSES: Record<string, string> = {
  pending: 'badge-pending',
  processing: 'badge-processing',
  done: 'badge-done',
  failed: 'badge-failed',
};

export function renderStatusBadge(status: string): string {
  const cls = BADGE_CLASSES[status] ?? 'badge-pending';
  return `<span class="badge ${cls}">${escapeHtml(status)}</span>`;
}

export function renderReportRow(report: ReportView): string {
  const reward = report.reward ? num(report.reward.final) : '';
  return `<tr data-report="${report.id}" data-status="${report.status}">
    <td><a href="#/reports/${report.id}">${shortId(report.id)}</a></td>
    <td>${renderStatusBadge(report.status)}</td>
    <td class="pair-count">${num(report.pair_count)}</td>
    <td class="reward">${reward}</td>
    <td>${timestamp(report.submitted_at)}</td>
  </tr>`;
}

export function renderReportList(reports: ReportView[]): string {
  if (reports.length === 0) return '<p class="empty">No reports submitted yet.</p>';
  return `<table class="listing reports">
    <thead><tr><th>Report</th><th>Status</th><th>Sentences</th><th>Reward</th><th>Submitted</th></tr></thead>
    <tbody>${reports.map(renderReportRow).join('')}</tbody>
  </table>`;
}

export function renderReportDetail(report: ReportView): string {
  const head = `<section class="report-detail" data-report="${report.id}">
    <h2>Report ${shortId(report.id)} ${renderStatusBadge(report.status)}</h2>
    <p class="urls">${escapeHtml(report.url_a)}<br>${escapeHtml(report.url_b)}</p>`;
  if (report.status === 'failed') {
    return `${head}
      <p class="failure">Failed: <code>${escapeHtml(report.failure_reason ?? '')}</code>.
      Nothing was extracted and no reward was paid.</p>
    </section>`;
  }
  if (report.status !== 'done') {
    return `${head}<p class="waiting">Fetching and aligning the pages; this view
      refreshes itself.</p></section>`;
  }
  const pairRows = (report.pairs ?? []).map(
    (p) => `<tr>
      <td>${escapeHtml(p.src)}</td>
      <td>${escapeHtml(p.tgt)}</td>
      <td class="cost">${num(p.cost)}</td>
      <td class="s-a">${num(p.s_a)}</td>
      <td class="s-d">${num(p.s_d)}</td>
    </tr>`,
  );
  const reward = report.reward;
  const rewardBlock = reward
    ? `<p class="reward-line">Reward: <strong class="reward-final">${num(reward.final)}</strong>
       (${escapeHtml(reward.mode)}${reward.mode === 'variable' ? `, term sum ${num(reward.sum_terms)}` : ''})</p>`
    : '';
  return `${head}
    <p class="summary"><span class="pair-count">${num(report.pair_count)}</span> sentence pairs extracted.</p>
    ${rewardBlock}
    <table class="pairs">
      <thead><tr><th>Source</th><th>Target</th><th>cost</th><th>s_a</th><th>s_d</th></tr></thead>
      <tbody>${pairRows.join('')}</tbody>
    </table>
  </section>`;
}

export function renderEarnings(ledger: Ledger): string {
  const rows = ledger.entries.map(
    (e) => `<tr>
      <td>${num(e.seq)}</td>
      <td><a href="#/reports/${e.report_id}">${shortId(e.report_id)}</a></td>
      <td class="amount">${num(e.amount)}</td>
      <td>${timestamp(e.created_at)}</td>
    </tr>`,
  );
  return `<section class="earnings">
    <h2>Earnings</h2>
    <p>Total: <strong class="ledger-total">${num(ledger.total)}</strong></p>
    <table class="listing">
      <thead><tr><th>#</th><th>Report</th><th>Amount</th><th>Paid</th></tr></thead>
      <tbody>${rows.join('')}</tbody>
    </table>
  </section>`;
}

/** API errors verbatim: machine code + message, duplicate with a link back. */
export function renderApiError(err: ApiError): string {
  const duplicate = err.reportId
    ? ` <a class="prior-report" href="#/reports/${err.reportId}">See the earlier
       report ${shortId(err.reportId)}</a>.`
    : '';
  return `<div class="error" data-code="${escapeHtml(err.code)}">
    <code>${escapeHtml(err.code)}</code>: ${escapeHtml(err.message)}${duplicate}
  </div>`;
}
