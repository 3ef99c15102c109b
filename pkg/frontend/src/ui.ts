/**
 * Review UI: a gallery of pseudo-label candidates with accept/reject
 * controls, a detail pane with a mask overlay, and keyboard shortcuts.
 *
 * The whole view re-renders from ReviewSession state on every change.
 * Candidate volumes are small (dozens per curation round), so there is
 * no need for incremental DOM updates.
 */

import { CurationApi, CandidateView, Decision, DECISIONS } from './api.js';
import { ReviewSession, Filter } from './state.js';
import { MaskOverlay } from './overlay.js';

const FILTERS: Filter[] = ['all', 'undecided', 'accepted', 'rejected'];

const DECISION_KEYS: Record<string, Decision> = {
  a: 'accepted',
  r: 'rejected',
  u: 'undecided',
};

export interface AppOptions {
  api: CurationApi;
  annotator?: string;
}

export interface App {
  session: ReviewSession;
  render(): void;
  destroy(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fgPercent(candidate: CandidateView): string {
  const frac = candidate.auto_stats['fg_fraction'];
  if (typeof frac !== 'number' || Number.isNaN(frac)) return '';
  return `${(frac * 100).toFixed(1)}% heads`;
}

export function createApp(root: HTMLElement, options: AppOptions): App {
  const api = options.api;
  const session = new ReviewSession(api, { annotator: options.annotator ?? 'reviewer' });
  let overlay: MaskOverlay | null = null;
  let exportDir = 'export';
  let exportMessage = '';

  function renderHeader(): HTMLElement {
    const header = el('header', 'topbar');
    header.appendChild(el('h1', 'title', 'Candidate review'));

    const stats = session.stats();
    const counts = el('div', 'stats');
    counts.appendChild(el('span', 'stat', `${stats.total} total`));
    counts.appendChild(el('span', 'stat stat-accepted', `${stats.accepted} accepted`));
    counts.appendChild(el('span', 'stat stat-rejected', `${stats.rejected} rejected`));
    counts.appendChild(el('span', 'stat stat-undecided', `${stats.undecided} undecided`));
    header.appendChild(counts);

    const filters = el('nav', 'filters');
    for (const filter of FILTERS) {
      const button = el('button', 'filter', filter);
      button.dataset.filter = filter;
      if (filter === session.filter) button.classList.add('active');
      button.addEventListener('click', () => {
        session.setFilter(filter);
      });
      filters.appendChild(button);
    }
    header.appendChild(filters);

    const exporter = el('div', 'exporter');
    const dirInput = el('input', 'export-dir') as HTMLInputElement;
    dirInput.value = exportDir;
    dirInput.addEventListener('input', () => {
      exportDir = dirInput.value;
    });
    const exportButton = el('button', 'export', 'Export accepted');
    exportButton.dataset.action = 'export';
    exportButton.addEventListener('click', () => {
      void runExport();
    });
    exporter.appendChild(dirInput);
    exporter.appendChild(exportButton);
    if (exportMessage) exporter.appendChild(el('span', 'export-note', exportMessage));
    header.appendChild(exporter);

    if (session.error) header.appendChild(el('div', 'error', session.error));
    return header;
  }

  async function runExport(): Promise<void> {
    try {
      exportMessage = await session.exportAccepted(exportDir);
    } catch {
      exportMessage = '';
    }
    render();
  }

  function renderCard(candidate: CandidateView, index: number): HTMLElement {
    const card = el('article', 'card');
    card.dataset.cardId = candidate.id;
    card.dataset.decision = candidate.decision;
    if (index === session.cursor) card.classList.add('selected');
    card.addEventListener('click', () => {
      session.select(index);
    });

    const thumb = el('img', 'thumb') as HTMLImageElement;
    thumb.src = api.assetUrl(candidate.image_url);
    thumb.alt = candidate.id;
    card.appendChild(thumb);

    const meta = el('div', 'meta');
    meta.appendChild(el('span', 'card-id', candidate.id));
    meta.appendChild(el('span', `badge badge-${candidate.decision}`, candidate.decision));
    const fg = fgPercent(candidate);
    if (fg) meta.appendChild(el('span', 'fg', fg));
    card.appendChild(meta);

    const actions = el('div', 'actions');
    for (const decision of DECISIONS) {
      const button = el('button', `act act-${decision}`, decision);
      button.dataset.action = decision;
      button.disabled = session.isPending(candidate.id);
      button.addEventListener('click', (event) => {
        event.stopPropagation();
        void session.decide(candidate.id, decision);
      });
      actions.appendChild(button);
    }
    card.appendChild(actions);
    return card;
  }

  function renderGallery(candidates: CandidateView[]): HTMLElement {
    const gallery = el('section', 'gallery');
    if (candidates.length === 0) {
      gallery.appendChild(el('p', 'empty', 'No candidates match this filter.'));
      return gallery;
    }
    candidates.forEach((candidate, index) => {
      gallery.appendChild(renderCard(candidate, index));
    });
    return gallery;
  }

  function renderDetail(candidate: CandidateView | null): HTMLElement {
    const pane = el('aside', 'detail');
    if (!candidate) {
      pane.appendChild(el('p', 'empty', 'Select a candidate.'));
      overlay = null;
      return pane;
    }
    pane.appendChild(el('h2', 'detail-id', candidate.id));
    pane.appendChild(el('p', 'detail-source', `from ${candidate.source_id} (${candidate.model_tag})`));

    const canvas = el('canvas', 'overlay') as HTMLCanvasElement;
    pane.appendChild(canvas);
    overlay = new MaskOverlay(canvas);
    overlay.setSources(api.assetUrl(candidate.image_url), api.assetUrl(candidate.mask_url));

    const slider = el('input', 'opacity') as HTMLInputElement;
    slider.type = 'range';
    slider.min = '0';
    slider.max = '100';
    slider.value = String(Math.round((overlay?.opacity ?? 0.45) * 100));
    slider.addEventListener('input', () => {
      overlay?.setOpacity(Number(slider.value) / 100);
    });
    const sliderRow = el('label', 'opacity-row', 'mask opacity ');
    sliderRow.appendChild(slider);
    pane.appendChild(sliderRow);

    const statList = el('dl', 'auto-stats');
    for (const [key, value] of Object.entries(candidate.auto_stats)) {
      statList.appendChild(el('dt', undefined, key));
      statList.appendChild(el('dd', undefined, value.toFixed(4)));
    }
    pane.appendChild(statList);
    return pane;
  }

  function render(): void {
    const visible = session.visible();
    root.textContent = '';
    root.appendChild(renderHeader());
    const body = el('main', 'layout');
    body.appendChild(renderGallery(visible));
    body.appendChild(renderDetail(session.selected()));
    root.appendChild(body);
  }

  function onKeyDown(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    if (target && (target.tagName === 'INPUT' || target.tagName === 'TEXTAREA')) return;
    const decision = DECISION_KEYS[event.key];
    if (decision) {
      void session.decideSelected(decision);
      return;
    }
    if (event.key === 'j' || event.key === 'ArrowRight') session.next();
    if (event.key === 'k' || event.key === 'ArrowLeft') session.prev();
  }

  const unsubscribe = session.subscribe(render);
  document.addEventListener('keydown', onKeyDown);
  render();
  void session.load();

  return {
    session,
    render,
    destroy(): void {
      unsubscribe();
      document.removeEventListener('keydown', onKeyDown);
      root.textContent = '';
    },
  };
}
