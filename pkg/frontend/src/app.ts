import { PredictClient } from './client.js';
import { DraftStudio, StudioState } from './studio.js';
import { toBadges } from './studio.js';
import type { LinkKind } from './types.js';

// Base URL: ?service=... query param wins, then a window global, then
// same-origin (the service can host dist/ as static assets).
function serviceBaseUrl(): string {
  const param = new URLSearchParams(window.location.search).get('service');
  if (param) return param.replace(/\/$/, '');
  const injected = (window as unknown as { SERVICE_URL?: string }).SERVICE_URL;
  return injected ? injected.replace(/\/$/, '') : '';
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render(state: StudioState): void {
  const badges = el<HTMLDivElement>('badges');
  const banner = el<HTMLDivElement>('offline-banner');
  const spinner = el<HTMLSpanElement>('in-flight');
  const echo = el<HTMLDivElement>('feature-echo');

  banner.hidden = !state.offline;
  spinner.hidden = !state.requestInFlight;

  if (!state.forecast) {
    badges.innerHTML = '';
    echo.textContent = '';
    return;
  }

  badges.classList.toggle('stale', state.stale);
  badges.innerHTML = toBadges(state.forecast)
    .map(
      (b) => `
      <div class="badge ${b.label}">
        <span class="metric">${b.title}</span>
        <span class="verdict">${b.label === 'high' ? 'High' : 'Low'} · ${b.percent}%</span>
      </div>`,
    )
    .join('');

  const f = state.forecast.features;
  echo.textContent =
    `model saw: emojis: ${f.behavioral.emojis}, hashtags: ${f.behavioral.hashtags}, ` +
    `mentions: ${f.behavioral.mentions}, links: ${f.behavioral.links}, ` +
    `words: ${f.style.words}`;
}

export function start(): void {
  const client = new PredictClient(serviceBaseUrl());
  const studio = new DraftStudio(client, render);

  el<HTMLTextAreaElement>('draft-text').addEventListener('input', (e) => {
    studio.setText((e.target as HTMLTextAreaElement).value);
  });
  el<HTMLSelectElement>('link-kind').addEventListener('change', (e) => {
    studio.setLinkKind((e.target as HTMLSelectElement).value as LinkKind);
  });
  el<HTMLInputElement>('published-at').addEventListener('change', (e) => {
    const value = (e.target as HTMLInputElement).value;
    studio.setPublishedAt(value ? value : null);
  });

  client
    .health()
    .then((h) => {
      el<HTMLSpanElement>('status').textContent =
        `service ok · ${Object.keys(h.models).length} models`;
    })
    .catch(() => {
      el<HTMLSpanElement>('status').textContent = 'service unreachable';
      el<HTMLDivElement>('offline-banner').hidden = false;
    });
}

start();
