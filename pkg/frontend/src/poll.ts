import type { Client } from './api.js';
import type { ReportView } from './types.js';

export const TERMINAL_STATES = new Set(['done', 'failed']);

/**
 * Poll a report until it reaches a terminal state (done / failed).
 * Resolves with the final view; onUpdate fires on every intermediate one so
 * the page can refresh the status badge without a reload.
 */
export function pollReport(
  client: Client,
  reportId: string,
  intervalMs = 5000,
  onUpdate?: (report: ReportView) => void,
): Promise<ReportView> {
  return new Promise((resolve, reject) => {
    let timer: ReturnType<typeof setInterval> | null = null;
    const stop = () => {
      if (timer !== null) clearInterval(timer);
    };
    const poll = async () => {
      try {
        const report = await client.report(reportId);
        if (TERMINAL_STATES.has(report.status)) {
          stop();
          resolve(report);
          return;
        }
        onUpdate?.(report);
      } catch (err) {
        stop();
        reject(err);
      }
    };
    timer = setInterval(poll, intervalMs);
    void poll();
  });
}
