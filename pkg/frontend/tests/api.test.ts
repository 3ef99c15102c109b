import { afterEach, describe, expect, it, vi } from 'vitest';
import { ApiError, CurationApi } from '../src/api.js';

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('CurationApi', () => {
  it('lists candidates from /candidates', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse([{ id: 'c0' }]));
    vi.stubGlobal('fetch', fetchMock);

    const api = new CurationApi('http://host:9000');
    const got = await api.listCandidates();

    expect(got).toEqual([{ id: 'c0' }]);
    expect(fetchMock).toHaveBeenCalledWith('http://host:9000/candidates', undefined);
  });

  it('passes the state filter as a query parameter', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse([]));
    vi.stubGlobal('fetch', fetchMock);

    await new CurationApi().listCandidates('accepted');

    expect(fetchMock).toHaveBeenCalledWith('/candidates?state=accepted', undefined);
  });

  it('posts decisions as JSON with the annotator', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ id: 'c0', decision: 'accepted' }));
    vi.stubGlobal('fetch', fetchMock);

    const got = await new CurationApi().postDecision('c0', 'accepted', 'me');

    expect(got.decision).toBe('accepted');
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('/candidates/c0/decision');
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body)).toEqual({ decision: 'accepted', annotator: 'me' });
  });

  it('url-encodes candidate ids', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ id: 'a/b' }));
    vi.stubGlobal('fetch', fetchMock);

    await new CurationApi().getCandidate('a/b');

    expect(fetchMock.mock.calls[0][0]).toBe('/candidates/a%2Fb');
  });

  it('posts the export directory to /export', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ exported: 2, manifest: 'm' }));
    vi.stubGlobal('fetch', fetchMock);

    const got = await new CurationApi().exportAccepted('out/pseudo');

    expect(got.exported).toBe(2);
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('/export');
    expect(JSON.parse(init.body)).toEqual({ out_dir: 'out/pseudo' });
  });

  it('raises ApiError carrying the server detail on non-2xx', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn().mockResolvedValue(jsonResponse({ detail: 'unknown candidate' }, 404)),
    );

    const err = await new CurationApi()
      .getCandidate('nope')
      .then(() => null)
      .catch((e: unknown) => e);

    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).detail).toBe('unknown candidate');
  });

  it('falls back to the status text when the error body is not JSON', async () => {
    vi.stubGlobal(
      'fetch',
      vi.fn().mockResolvedValue(new Response('boom', { status: 500, statusText: 'Server Error' })),
    );

    const err = await new CurationApi()
      .getStats()
      .then(() => null)
      .catch((e: unknown) => e);

    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).detail).toBe('Server Error');
  });

  it('prefixes asset paths with the base url', () => {
    const api = new CurationApi('http://host:9000');
    expect(api.assetUrl('/assets/images/c0.png')).toBe('http://host:9000/assets/images/c0.png');
  });
});
