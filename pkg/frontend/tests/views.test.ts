import { expect, test } from 'vitest';

import { ApiError } from '../src/api.js';
import type { Campaign, Ledger, ReportView, StatsRow } from '../src/types.js';
import {
  groupCohorts,
  renderCohorts,
  renderExportSection,
  renderPayoutTable,
  renderStatsSection,
  renderStatsTable,
} from '../src/views/admin.js';
import {
  renderApiError,
  renderBrief,
  renderEarnings,
  renderReportDetail,
  renderReportList,
} from '../src/views/worker.js';

function campaign(overrides: Partial<Campaign> = {}): Campaign {
  return {
    id: 'c-1111',
    name: 'medical en-de',
    domain: 'medical',
    src_lang: 'en',
    tgt_lang: 'de',
    created_at: 1755302400,
    reward: { mode: 'variable', fixed_amount: 25, r_min: 10, r_max: 100, domain_sign: 1 },
    cost_threshold: 0.7,
    ...overrides,
  };
}

// wire-realistic fixture: full-precision doubles as JSON.parse would yield
const DONE_REPORT: ReportView = {
  id: 'abcdef0123456789',
  campaign_id: 'c-1111',
  worker_id: 'w-2222',
  url_a: 'http://pages.example/src?a=1&b=2',
  url_b: 'http://pages.example/tgt',
  status: 'done',
  failure_reason: null,
  pair_count: 2,
  submitted_at: 1755302400,
  completed_at: 1755302460,
  reward: {
    mode: 'variable',
    per_pair: [
      [0.8175744761936437, 0.7310585786300049],
      [0.5, 0.30000000000000004],
    ],
    sum_terms: 2.3486330548236486,
    raw: 12.348633054823649,
    final: 12,
  },
  pairs: [
    {
      src: 'the dose was increased.',
      tgt: 'die dosis wurde erhoht.',
      cost: 0.08175744761936437,
      s_a: 0.8175744761936437,
      s_d: 0.7310585786300049,
    },
    {
      src: 'no adverse events <observed>.',
      tgt: 'keine nebenwirkungen beobachtet.',
      cost: 0.30000000000000004,
      s_a: 0.5,
      s_d: 0.30000000000000004,
    },
  ],
};

test('report detail shows every pair number exactly as the API sent it', () => {
  const html = renderReportDetail(DONE_REPORT);
  for (const p of DONE_REPORT.pairs ?? []) {
    expect(html).toContain(`<td class="cost">${String(p.cost)}</td>`);
    expect(html).toContain(`<td class="s-a">${String(p.s_a)}</td>`);
    expect(html).toContain(`<td class="s-d">${String(p.s_d)}</td>`);
  }
  expect(html).toContain(`<span class="pair-count">2</span>`);
  expect(html).toContain(`class="reward-final">12<`);
  expect(html).toContain(`term sum ${String(DONE_REPORT.reward?.sum_terms)}`);
  // markup in sentences stays inert
  expect(html).toContain('&lt;observed&gt;');
  expect(html).not.toContain('<observed>');
});

test('failed report names its reason and pays nothing', () => {
  const failed: ReportView = {
    ...DONE_REPORT,
    status: 'failed',
    failure_reason: 'robots_denied',
    pair_count: 0,
    reward: null,
    pairs: undefined,
  };
  const html = renderReportDetail(failed);
  expect(html).toContain('badge-failed');
  expect(html).toContain('robots_denied');
  expect(html).toContain('no reward was paid');
  expect(html).not.toContain('table class="pairs"');
});

test('pending report renders a waiting notice, no pair table', () => {
  const pending: ReportView = { ...DONE_REPORT, status: 'pending', reward: null, pairs: undefined };
  const html = renderReportDetail(pending);
  expect(html).toContain('badge-pending');
  expect(html).toContain('refreshes itself');
  expect(html).not.toContain('table class="pairs"');
});

test('report list rows carry status and link to the detail page', () => {
  const html = renderReportList([DONE_REPORT]);
  expect(html).toContain('href="#/reports/abcdef0123456789"');
  expect(html).toContain('data-status="done"');
  expect(html).toContain('<td class="reward">12</td>');
  expect(renderReportList([])).toContain('No reports submitted yet');
});

test('brief states domain, languages, threshold and reward scheme', () => {
  const html = renderBrief(campaign(), [{ src: 'a <b>', tgt: 'b' }]);
  expect(html).toContain('medical');
  expect(html).toContain('variable: 10 to 100');
  expect(html).toContain('0.7');
  expect(html).toContain('a &lt;b&gt;');
  const fixed = renderBrief(
    campaign({ reward: { mode: 'fixed', fixed_amount: 25, r_min: 10, r_max: 100, domain_sign: 1 } }),
    [],
  );
  expect(fixed).toContain('fixed: 25 per accepted report');
});

test('earnings pass the ledger total through untouched', () => {
  const ledger: Ledger = {
    entries: [
      {
        seq: 1,
        worker_id: 'w-2222',
        report_id: 'abcdef0123456789',
        campaign_id: 'c-1111',
        amount: 12,
        created_at: 1755302460,
      },
    ],
    total: 12,
  };
  const html = renderEarnings(ledger);
  expect(html).toContain('class="ledger-total">12<');
  expect(html).toContain('<td class="amount">12</td>');
  expect(html).toContain('href="#/reports/abcdef0123456789"');
});

test('api errors render the machine code and message verbatim', () => {
  const html = renderApiError(new ApiError(422, 'invalid_url', 'scheme must be http or https'));
  expect(html).toContain('data-code="invalid_url"');
  expect(html).toContain('<code>invalid_url</code>');
  expect(html).toContain('scheme must be http or https');
});

test('duplicate errors link back to the earlier report', () => {
  const err = new ApiError(409, 'duplicate_report', 'already submitted', {
    report_id: 'r-earlier',
  });
  const html = renderApiError(err);
  expect(html).toContain('data-code="duplicate_report"');
  expect(html).toContain('href="#/reports/r-earlier"');
});

const SERIES: StatsRow[] = [
  {
    day: '2026-08-14',
    reports: 3,
    sentences: 41,
    payout: 61,
    cumulative_sentences: 41,
    cumulative_payout: 61,
  },
  {
    day: '2026-08-15',
    reports: 1,
    sentences: 9,
    payout: 19,
    cumulative_sentences: 50,
    cumulative_payout: 80,
  },
];

test('stats table keeps the export column order and verbatim values', () => {
  const html = renderStatsTable(SERIES);
  const headers = [...html.matchAll(/<th>([^<]+)<\/th>/g)].map((m) => m[1]);
  expect(headers).toEqual(['day', 'reports', 'sentences', 'cumulative_sentences', 'payout']);
  expect(html).toContain('<td class="reports">3</td>');
  expect(html).toContain('<td class="cumulative-sentences">50</td>');
  expect(html).toContain('data-day="2026-08-15"');
});

test('chart circles carry the raw values in data attributes', () => {
  const html = renderStatsSection(campaign(), SERIES);
  expect(html).toContain('data-metric="payout" data-day="2026-08-14" data-value="61"');
  expect(html).toContain('data-metric="sentences" data-day="2026-08-15" data-value="9"');
  expect(html).toContain('polyline class="line-reports"');
});

test('cohorts group campaigns by domain and split by reward mode', () => {
  const fixedReward = { mode: 'fixed' as const, fixed_amount: 25, r_min: 10, r_max: 100, domain_sign: 1 };
  const entries = [
    { campaign: campaign({ id: 'c-var' }), last: SERIES[1] },
    {
      campaign: campaign({ id: 'c-fix', name: 'medical en-de fixed', reward: fixedReward }),
      last: SERIES[0],
    },
    { campaign: campaign({ id: 'c-other', name: 'legal en-de', domain: 'legal' }), last: null },
  ];
  const cohorts = groupCohorts(entries);
  expect(cohorts.map((c) => c.domain)).toEqual(['medical', 'legal']);
  expect(cohorts[0].fixed.map((e) => e.campaign.id)).toEqual(['c-fix']);
  expect(cohorts[0].variable.map((e) => e.campaign.id)).toEqual(['c-var']);
  const html = renderCohorts(cohorts);
  expect(html).toContain('data-domain="medical"');
  // variable cohort shows the last cumulative row: 50 sentences for 80
  expect(html).toContain('class="cohort-sentences">50<');
  expect(html).toContain('class="cohort-payout">80<');
  // fixed cohort sits on its own cumulative numbers
  expect(html).toContain('class="cohort-sentences">41<');
  expect(html).toContain('class="cohort-payout">61<');
});

test('payout table shows one row per looked-up worker', () => {
  const ledger: Ledger = {
    entries: [
      {
        seq: 1,
        worker_id: 'w-2222',
        report_id: 'r-1',
        campaign_id: 'c-1111',
        amount: 19,
        created_at: 1755302460,
      },
    ],
    total: 19,
  };
  const html = renderPayoutTable([{ workerId: 'w-2222', ledger }]);
  expect(html).toContain('data-worker="w-2222"');
  expect(html).toContain('<td class="total">19</td>');
  expect(renderPayoutTable([])).toContain('Look up a worker id');
});

test('export link escapes the query string for HTML', () => {
  const html = renderExportSection(campaign(), 'http://api.test/v1/campaigns/c-1111/export?max_cost=0.7');
  expect(html).toContain('href="http://api.test/v1/campaigns/c-1111/export?max_cost=0.7"');
  expect(html).toContain('download="c-1111.tsv"');
});
