import { afterEach, expect, test, vi } from 'vitest';

import { ApiError, Client, toApiError, validateUrlPair } from '../src/api.js';

interface Call {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: string | undefined;
}

function stubFetch(status: number, bodyText: string): Call[] {
  const calls: Call[] = [];
  vi.stubGlobal('fetch', async (url: string, init?: RequestInit) => {
    calls.push({
      url,
      method: init?.method ?? 'GET',
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: init?.body as string | undefined,
    });
    return {
      ok: status >= 200 && status < 300,
      status,
      text: async () => bodyText,
    };
  });
  return calls;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

test('request sends bearer token and JSON body', async () => {
  const calls = stubFetch(200, '{"id":"r1","status":"pending"}');
  const client = new Client('http://api.test', 'tok-123');
  await client.submitReport('c1', 'http://a.example/x', 'http://b.example/y');
  expect(calls.length).toBe(1);
  expect(calls[0].url).toBe('http://api.test/v1/campaigns/c1/reports');
  expect(calls[0].method).toBe('POST');
  expect(calls[0].headers['Authorization']).toBe('Bearer tok-123');
  expect(calls[0].headers['Content-Type']).toBe('application/json');
  expect(JSON.parse(calls[0].body as string)).toEqual({
    url_a: 'http://a.example/x',
    url_b: 'http://b.example/y',
  });
});

test('list endpoints unwrap their envelope key', async () => {
  stubFetch(200, '{"campaigns":[{"id":"c1"},{"id":"c2"}]}');
  const client = new Client('http://api.test', 't');
  const campaigns = await client.campaigns();
  expect(campaigns.map((c) => c.id)).toEqual(['c1', 'c2']);

  stubFetch(200, '{"series":[{"day":"2026-08-14","reports":3}]}');
  const series = await client.stats('c1');
  expect(series.length).toBe(1);
  expect(series[0].day).toBe('2026-08-14');
});

test('error envelope becomes an ApiError with code and message', async () => {
  stubFetch(401, '{"error":{"code":"unauthorized","message":"missing bearer token"}}');
  const client = new Client('http://api.test');
  let caught: unknown;
  try {
    await client.me();
  } catch (err) {
    caught = err;
  }
  expect(caught).toBeInstanceOf(ApiError);
  const apiErr = caught as ApiError;
  expect(apiErr.status).toBe(401);
  expect(apiErr.code).toBe('unauthorized');
  expect(apiErr.message).toBe('missing bearer token');
  expect(apiErr.reportId).toBeUndefined();
});

test('duplicate_report carries the prior report id', () => {
  const err = toApiError(
    409,
    '{"error":{"code":"duplicate_report","message":"already submitted","report_id":"r-first"}}',
  );
  expect(err.code).toBe('duplicate_report');
  expect(err.reportId).toBe('r-first');
  expect(err.extra['report_id']).toBe('r-first');
});

test('non-envelope bodies fall back to a generic http_error', () => {
  expect(toApiError(502, '<html>Bad Gateway</html>').code).toBe('http_error');
  expect(toApiError(500, '{"detail":"boom"}').code).toBe('http_error');
  expect(toApiError(500, '').message).toBe('HTTP 500');
});

test('exportUrl builds the href the download link uses', () => {
  const client = new Client('http://api.test', 't');
  expect(client.exportUrl('c9', 0.7)).toBe('http://api.test/v1/campaigns/c9/export?max_cost=0.7');
});

test('exportTsv returns the body verbatim and fails loudly on 403', async () => {
  stubFetch(200, 'src\ttgt\tcost\na\tb\t0.123457\n');
  const client = new Client('http://api.test', 't');
  expect(await client.exportTsv('c1', 0.7)).toBe('src\ttgt\tcost\na\tb\t0.123457\n');

  stubFetch(403, '{"error":{"code":"forbidden","message":"admin only"}}');
  await expect(client.exportTsv('c1', 0.7)).rejects.toMatchObject({ code: 'forbidden' });
});

test('validateUrlPair catches what the browser can see', () => {
  expect(validateUrlPair('http://a.example/x', 'https://b.example/y')).toBeNull();
  expect(validateUrlPair('not a url', 'http://b.example/')).toMatch(/not an absolute URL/);
  expect(validateUrlPair('', 'http://b.example/')).toMatch(/not an absolute URL/);
  expect(validateUrlPair('ftp://a.example/x', 'http://b.example/')).toMatch(/not an http/);
  expect(validateUrlPair('javascript:alert(1)', 'http://b.example/')).toMatch(/not an http/);
  expect(validateUrlPair('http://a.example/x', 'http://a.example/x')).toMatch(/same URL/);
  // fragments do not make two URLs distinct
  expect(validateUrlPair('http://a.example/x#one', 'http://a.example/x#two')).toMatch(/same URL/);
  // distinct paths on one host are a legitimate pair
  expect(validateUrlPair('http://a.example/x', 'http://a.example/y')).toBeNull();
});
