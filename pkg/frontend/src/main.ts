import { ApiError, Client, validateUrlPair } from './api.js';
import { escapeHtml } from './format.js';
import { pollReport } from './poll.js';
import type { Campaign, ReportView } from './types.js';
import {
  groupCohorts,
  renderCohorts,
  renderExportSection,
  renderPayoutLookupForm,
  renderPayoutTable,
  renderStatsSection,
  type CohortEntry,
  type PayoutRow,
} from './views/admin.js';
import {
  renderApiError,
  renderBrief,
  renderCampaignList,
  renderEarnings,
  renderReportDetail,
  renderReportList,
  renderSubmitForm,
} from './views/worker.js';

/**
 * Imperative shell: routes on location.hash, renders with the pure view
 * functions, wires form events. All state lives in the server plus one
 * localStorage slot for the bearer token.
 */

const TOKEN_KEY = 'crowdbitext.token';
const client = new Client(window.location.origin, localStorage.getItem(TOKEN_KEY) ?? '');

const app = document.getElementById('app') as HTMLElement;
const payoutRows: PayoutRow[] = [];

function setToken(token: string): void {
  localStorage.setItem(TOKEN_KEY, token);
  client.setToken(token);
}

function showError(target: Element, err: unknown): void {
  if (err instanceof ApiError) {
    target.innerHTML = renderApiError(err);
  } else {
    target.innerHTML = `<div class="error" data-code="network_error"><code>network_error</code>: ${escapeHtml(String(err))}</div>`;
  }
}

function renderShell(body: string): void {
  app.innerHTML = `<nav>
    <a href="#/">Campaigns</a>
    <a href="#/me">My earnings</a>
    <a href="#/admin">Admin</a>
    <a href="#/token">Token</a>
  </nav>
  <main>${body}</main>`;
}

async function viewHome(): Promise<void> {
  const campaigns = await client.campaigns();
  renderShell(`<h1>Open campaigns</h1>${renderCampaignList(campaigns)}`);
}

function wireSubmitForm(campaign: Campaign): void {
  const form = app.querySelector<HTMLFormElement>('form.submit-form');
  if (!form) return;
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const errorBox = form.querySelector('.form-error') as HTMLElement;
    const urlA = (form.elements.namedItem('url_a') as HTMLInputElement).value.trim();
    const urlB = (form.elements.namedItem('url_b') as HTMLInputElement).value.trim();
    // quick local check; the server re-validates and stays the authority
    const problem = validateUrlPair(urlA, urlB);
    if (problem) {
      errorBox.innerHTML = `<div class="error" data-code="invalid_url"><code>invalid_url</code>: ${escapeHtml(problem)}</div>`;
      return;
    }
    errorBox.textContent = 'Submitting...';
    client
      .submitReport(campaign.id, urlA, urlB)
      .then((report) => {
        window.location.hash = `#/reports/${report.id}`;
      })
      .catch((err) => showError(errorBox, err));
  });
}

async function viewCampaign(campaignId: string): Promise<void> {
  const [campaign, examples] = await Promise.all([
    client.campaign(campaignId),
    client.examples(campaignId),
  ]);
  let mine: ReportView[] = [];
  try {
    const me = await client.me();
    mine = (await client.workerReports(me.id)).filter((r) => r.campaign_id === campaignId);
  } catch {
    // not registered yet; the brief is still useful
  }
  renderShell(`${renderBrief(campaign, examples)}
    <h3>Submit a page pair</h3>
    ${renderSubmitForm(campaign.id)}
    <h3>Your reports here</h3>
    <div id="report-list">${renderReportList(mine)}</div>`);
  wireSubmitForm(campaign);
}

async function viewReport(reportId: string): Promise<void> {
  const report = await client.report(reportId);
  renderShell(`<div id="report-root">${renderReportDetail(report)}</div>`);
  if (report.status === 'pending' || report.status === 'processing') {
    const root = document.getElementById('report-root') as HTMLElement;
    pollReport(client, reportId, 5000, (view) => {
      root.innerHTML = renderReportDetail(view);
    })
      .then((view) => {
        root.innerHTML = renderReportDetail(view);
      })
      .catch((err) => showError(root, err));
  }
}

async function viewEarnings(): Promise<void> {
  const me = await client.me();
  const [ledger, reports] = await Promise.all([
    client.ledger(me.id),
    client.workerReports(me.id),
  ]);
  renderShell(`${renderEarnings(ledger)}
    <h3>All reports</h3>
    ${renderReportList(reports)}`);
}

async function viewAdmin(): Promise<void> {
  const campaigns = await client.campaigns();
  const sections: string[] = [];
  const cohortEntries: CohortEntry[] = [];
  for (const campaign of campaigns) {
    const series = await client.stats(campaign.id);
    sections.push(renderStatsSection(campaign, series));
    sections.push(
      renderExportSection(campaign, client.exportUrl(campaign.id, campaign.cost_threshold)),
    );
    cohortEntries.push({ campaign, last: series.length > 0 ? series[series.length - 1] : null });
  }
  renderShell(`<h1>Dashboard</h1>
    ${sections.join('')}
    <h2>Cohorts</h2>
    ${renderCohorts(groupCohorts(cohortEntries))}
    <h2>Worker payouts</h2>
    ${renderPayoutLookupForm()}
    <div id="payout-table">${renderPayoutTable(payoutRows)}</div>`);
  const form = app.querySelector<HTMLFormElement>('form.payout-lookup');
  form?.addEventListener('submit', (event) => {
    event.preventDefault();
    const errorBox = form.querySelector('.form-error') as HTMLElement;
    const workerId = (form.elements.namedItem('worker_id') as HTMLInputElement).value.trim();
    client
      .ledger(workerId)
      .then((ledger) => {
        const existing = payoutRows.findIndex((r) => r.workerId === workerId);
        if (existing >= 0) payoutRows[existing] = { workerId, ledger };
        else payoutRows.push({ workerId, ledger });
        errorBox.textContent = '';
        const table = document.getElementById('payout-table') as HTMLElement;
        table.innerHTML = renderPayoutTable(payoutRows);
      })
      .catch((err) => showError(errorBox, err));
  });
}

function viewToken(): void {
  renderShell(`<h2>Worker token</h2>
    <p>Register once to get a token, or paste one you saved. The token is shown
    a single time at registration; it never leaves this browser except as the
    Authorization header.</p>
    <form class="register-form">
      <label>Name <input name="name" required></label>
      <button type="submit">Register</button>
    </form>
    <form class="token-form">
      <label>Existing token <input name="token"></label>
      <button type="submit">Use token</button>
    </form>
    <div class="form-error" role="alert"></div>`);
  const errorBox = app.querySelector('.form-error') as HTMLElement;
  app.querySelector<HTMLFormElement>('form.register-form')?.addEventListener('submit', (event) => {
    event.preventDefault();
    const form = event.currentTarget as HTMLFormElement;
    const name = (form.elements.namedItem('name') as HTMLInputElement).value.trim();
    client
      .register(name)
      .then((worker) => {
        if (worker.token) setToken(worker.token);
        errorBox.innerHTML = `<p class="token-note">Registered. Save this token:
          <code>${escapeHtml(worker.token ?? '')}</code></p>`;
      })
      .catch((err) => showError(errorBox, err));
  });
  app.querySelector<HTMLFormElement>('form.token-form')?.addEventListener('submit', (event) => {
    event.preventDefault();
    const form = event.currentTarget as HTMLFormElement;
    const token = (form.elements.namedItem('token') as HTMLInputElement).value.trim();
    if (token) setToken(token);
    errorBox.innerHTML = '<p class="token-note">Token stored.</p>';
  });
}

async function route(): Promise<void> {
  const hash = window.location.hash || '#/';
  const parts = hash.slice(2).split('/').filter((p) => p.length > 0);
  try {
    if (parts.length === 0) await viewHome();
    else if (parts[0] === 'campaigns' && parts.length === 2) await viewCampaign(parts[1]);
    else if (parts[0] === 'reports' && parts.length === 2) await viewReport(parts[1]);
    else if (parts[0] === 'me') await viewEarnings();
    else if (parts[0] === 'admin') await viewAdmin();
    else if (parts[0] === 'token') viewToken();
    else renderShell('<p class="empty">Nothing here.</p>');
  } catch (err) {
    renderShell('<div id="route-error"></div>');
    showError(document.getElementById('route-error') as HTMLElement, err);
  }
}

window.addEventListener('hashchange', () => {
  void route();
});
void route();
