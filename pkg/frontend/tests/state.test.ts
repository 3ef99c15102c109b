import { describe, expect, it } from 'vitest';
import { ApiError, CandidateView, CurationApi, Decision } from '../src/api.js';
import { ReviewSession } from '../src/state.js';

function candidate(id: string, decision: Decision = 'undecided'): CandidateView {
  return {
    id,
    source_id: `frame_${id}`,
    model_tag: 'seg_v1',
    auto_stats: { fg_fraction: 0.25, mean_fg_conf: 0.9 },
    decision,
    image_url: `/assets/images/${id}.png`,
    mask_url: `/assets/masks/${id}.png`,
    probmap_url: `/assets/probmaps/${id}.png`,
  };
}

interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (err: unknown) => void;
}

function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** In-memory stand-in for the HTTP client. */
function fakeApi(candidates: CandidateView[]) {
  const calls: Array<{ id: string; decision: Decision; annotator: string }> = [];
  let nextDecision: Deferred<CandidateView> | null = null;
  const api = {
    listCandidates: async () => candidates.map((c) => ({ ...c })),
    postDecision: async (id: string, decision: Decision, annotator = '') => {
      calls.push({ id, decision, annotator });
      if (nextDecision) return nextDecision.promise;
      return { ...candidates.find((c) => c.id === id)!, decision };
    },
    exportAccepted: async (outDir: string) => ({ exported: 2, manifest: `${outDir}/manifest.jsonl` }),
  };
  return {
    api: api as unknown as CurationApi,
    calls,
    holdNextDecision: () => {
      nextDecision = deferred<CandidateView>();
      return nextDecision;
    },
  };
}

describe('ReviewSession', () => {
  it('loads candidates and notifies subscribers', async () => {
    const { api } = fakeApi([candidate('c0'), candidate('c1')]);
    const session = new ReviewSession(api);
    let notified = 0;
    session.subscribe(() => (notified += 1));

    await session.load();

    expect(session.candidates.map((c) => c.id)).toEqual(['c0', 'c1']);
    expect(notified).toBe(1);
  });

  it('filters the visible list without losing the full set', async () => {
    const { api } = fakeApi([candidate('c0', 'accepted'), candidate('c1'), candidate('c2')]);
    const session = new ReviewSession(api);
    await session.load();

    session.setFilter('accepted');
    expect(session.visible().map((c) => c.id)).toEqual(['c0']);
    session.setFilter('undecided');
    expect(session.visible().map((c) => c.id)).toEqual(['c1', 'c2']);
    session.setFilter('all');
    expect(session.visible()).toHaveLength(3);
  });

  it('applies decisions optimistically and confirms from the server', async () => {
    const fake = fakeApi([candidate('c0')]);
    const session = new ReviewSession(fake.api, { annotator: 'me' });
    await session.load();

    const held = fake.holdNextDecision();
    const done = session.decide('c0', 'accepted');

    expect(session.candidates[0].decision).toBe('accepted');
    expect(session.isPending('c0')).toBe(true);

    held.resolve(candidate('c0', 'accepted'));
    await done;

    expect(session.candidates[0].decision).toBe('accepted');
    expect(session.isPending('c0')).toBe(false);
    expect(fake.calls).toEqual([{ id: 'c0', decision: 'accepted', annotator: 'me' }]);
  });

  it('rolls back and surfaces the detail when the POST fails', async () => {
    const fake = fakeApi([candidate('c0', 'rejected')]);
    const session = new ReviewSession(fake.api);
    await session.load();

    const held = fake.holdNextDecision();
    const done = session.decide('c0', 'accepted');
    expect(session.candidates[0].decision).toBe('accepted');

    held.reject(new ApiError(404, 'unknown candidate'));
    await done;

    expect(session.candidates[0].decision).toBe('rejected');
    expect(session.error).toBe('unknown candidate');
  });

  it('ignores repeat decisions while one is in flight', async () => {
    const fake = fakeApi([candidate('c0')]);
    const session = new ReviewSession(fake.api);
    await session.load();

    const held = fake.holdNextDecision();
    const first = session.decide('c0', 'accepted');
    await session.decide('c0', 'rejected');

    held.resolve(candidate('c0', 'accepted'));
    await first;

    expect(fake.calls).toHaveLength(1);
    expect(session.candidates[0].decision).toBe('accepted');
  });

  it('whenIdle resolves only after in-flight decisions settle', async () => {
    const fake = fakeApi([candidate('c0')]);
    const session = new ReviewSession(fake.api);
    await session.load();

    await session.whenIdle();

    const held = fake.holdNextDecision();
    void session.decide('c0', 'accepted');
    let idle = false;
    const waiting = session.whenIdle().then(() => (idle = true));

    await Promise.resolve();
    expect(idle).toBe(false);

    held.resolve(candidate('c0', 'accepted'));
    await waiting;
    expect(idle).toBe(true);
  });

  it('clamps the cursor to the visible list', async () => {
    const { api } = fakeApi([candidate('c0'), candidate('c1'), candidate('c2')]);
    const session = new ReviewSession(api);
    await session.load();

    session.select(99);
    expect(session.selected()?.id).toBe('c2');
    session.prev();
    expect(session.selected()?.id).toBe('c1');
    session.select(-5);
    expect(session.selected()?.id).toBe('c0');
    session.prev();
    expect(session.selected()?.id).toBe('c0');
    session.next();
    expect(session.selected()?.id).toBe('c1');
  });

  it('resets the cursor when the filter changes', async () => {
    const { api } = fakeApi([candidate('c0'), candidate('c1', 'accepted'), candidate('c2')]);
    const session = new ReviewSession(api);
    await session.load();

    session.select(2);
    session.setFilter('accepted');
    expect(session.cursor).toBe(0);
    expect(session.selected()?.id).toBe('c1');
  });

  it('decideSelected routes through the cursor', async () => {
    const fake = fakeApi([candidate('c0'), candidate('c1')]);
    const session = new ReviewSession(fake.api);
    await session.load();

    session.next();
    await session.decideSelected('rejected');

    expect(fake.calls[0].id).toBe('c1');
    expect(session.candidates[1].decision).toBe('rejected');
  });

  it('computes stats from the loaded list', async () => {
    const { api } = fakeApi([
      candidate('c0', 'accepted'),
      candidate('c1', 'accepted'),
      candidate('c2', 'rejected'),
      candidate('c3'),
    ]);
    const session = new ReviewSession(api);
    await session.load();

    expect(session.stats()).toEqual({ total: 4, accepted: 2, rejected: 1, undecided: 1 });
  });

  it('reports the export summary', async () => {
    const { api } = fakeApi([candidate('c0', 'accepted')]);
    const session = new ReviewSession(api);
    await session.load();

    const message = await session.exportAccepted('out');
    expect(message).toBe('exported 2 pairs to out/manifest.jsonl');
  });
});
