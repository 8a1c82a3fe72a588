/**
 * Response shapes of the /v1 API, field for field.
 *
 * The UI never derives numbers from these: every score, count and payout it
 * shows is one of these fields passed through unchanged.
 */

export interface Worker {
  id: string;
  name: string;
  role: 'worker' | 'admin';
  /** present only in the registration response */
  token?: string;
}

export interface RewardConfig {
  mode: 'variable' | 'fixed';
  fixed_amount: number;
  r_min: number;
  r_max: number;
  domain_sign: number;
}

export interface Campaign {
  id: string;
  name: string;
  domain: string;
  src_lang: string;
  tgt_lang: string;
  created_at: number;
  reward: RewardConfig;
  cost_threshold: number;
}

export interface ExamplePair {
  src: string;
  tgt: string;
}

export interface PairView {
  src: string;
  tgt: string;
  cost: number;
  s_a: number;
  s_d: number;
}

export interface RewardBreakdown {
  mode: string;
  per_pair: number[][];
  sum_terms: number;
  raw: number;
  final: number;
}

export type ReportStatus = 'pending' | 'processing' | 'done' | 'failed';

export interface ReportView {
  id: string;
  campaign_id: string;
  worker_id: string;
  url_a: string;
  url_b: string;
  status: ReportStatus;
  failure_reason: string | null;
  pair_count: number;
  submitted_at: number;
  completed_at: number | null;
  reward: RewardBreakdown | null;
  /** present once the report is done */
  pairs?: PairView[];
}

export interface LedgerEntry {
  seq: number;
  worker_id: string;
  report_id: string;
  campaign_id: string;
  amount: number;
  created_at: number;
}

export interface Ledger {
  entries: LedgerEntry[];
  total: number;
}

export interface StatsRow {
  day: string;
  reports: number;
  sentences: number;
  payout: number;
  cumulative_sentences: number;
  cumulative_payout: number;
}
