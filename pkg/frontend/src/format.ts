/** Display helpers. None of them do arithmetic on API values. */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/**
 * A number exactly as the API sent it: scores, costs and payouts render
 * from String() so no rounding or reformatting can creep in.
 */
export function num(value: number | null | undefined): string {
  return value === null || value === undefined ? '' : String(value);
}

export function timestamp(epochSeconds: number | null): string {
  if (epochSeconds === null) return '';
  return new Date(epochSeconds * 1000).toISOString().replace('T', ' ').slice(0, 19);
}

/** First 8 characters are enough to tell report ids apart on screen. */
export function shortId(id: string): string {
  return id.slice(0, 8);
}
