import { ApiClient } from './api.js';
import { buildDeltaBars, buildRangeBars, deltaBarHtml, rangeBarHtml } from './render.js';
import { ExplorerState, TRAIT_MAX, TRAIT_MIN, TRAIT_NAMES } from './state.js';
import { ModelInfo } from './types.js';

const CLASSIFY_DEBOUNCE_MS = 150;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function debounce<A extends unknown[]>(fn: (...args: A) => void, ms: number) {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (timer) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), ms);
  };
}

export async function boot(): Promise<void> {
  const baseUrl =
    new URLSearchParams(location.search).get('service') ?? 'http://127.0.0.1:8080';
  const state = new ExplorerState(new ApiClient(baseUrl));
  let info: ModelInfo;
  try {
    info = await state.init();
  } catch {
    el('banner').textContent = `cannot reach service at ${baseUrl}`;
    el('banner').hidden = false;
    return;
  }
  const ids = info.taxonomy_categories.map((c) => c.id);

  const traitsBox = el('traits');
  TRAIT_NAMES.forEach((name, i) => {
    const row = document.createElement('label');
    row.className = 'slider-row';
    row.innerHTML = `<span>${name}</span>
      <input type="range" min="${TRAIT_MIN}" max="${TRAIT_MAX}" step="1" value="${state.traits[i]}">
      <output>${state.traits[i]}</output>`;
    const input = row.querySelector('input')!;
    input.addEventListener('input', () => {
      state.setTrait(i, Number(input.value));
      requestClassify();
    });
    traitsBox.appendChild(row);
  });

  const actBox = el('activities');
  info.taxonomy_categories.forEach((cat, i) => {
    const row = document.createElement('label');
    row.className = 'slider-row';
    row.innerHTML = `<span>${cat.name}</span>
      <input type="range" min="0" max="${state.totalUnits}" step="1" value="${state.units[i]}">
      <output></output>`;
    const input = row.querySelector('input')!;
    input.addEventListener('change', () => {
      state.setActivityUnits(i, Number(input.value));
      requestClassify();
    });
    actBox.appendChild(row);
  });

  el<HTMLButtonElement>('fetch-ranges').addEventListener('click', () => state.fetchRanges());

  const requestClassify = debounce(() => void state.classifyNow(), CLASSIFY_DEBOUNCE_MS);

  state.onChange((view) => {
    // sliders reflect renormalization
    actBox.querySelectorAll('input').forEach((input, i) => {
      input.value = String(view.units[i]);
      input.nextElementSibling!.textContent = view.proportions[i].toFixed(2);
    });
    traitsBox.querySelectorAll('output').forEach((out, i) => {
      out.textContent = String(view.traits[i]);
    });

    const banner = el('banner');
    banner.hidden = view.banner === null;
    banner.textContent = view.banner ?? '';

    const badge = el('label-badge');
    if (view.classify) {
      badge.textContent = view.classify.label + (view.classifyStale ? ' (stale)' : '');
      badge.className = `badge ${view.classify.label}${view.classifyStale ? ' stale' : ''}`;
      el('margin').textContent = view.classify.margin.toFixed(4);
      el('deltas').innerHTML = buildDeltaBars(view.classify).map(deltaBarHtml).join('');
    }

    const rangesBox = el('ranges');
    if (view.ranges) {
      const bars = buildRangeBars(view.ranges, ids, view.proportions);
      rangesBox.innerHTML =
        bars.map(rangeBarHtml).join('') +
        `<p class="grid-meta${view.rangesStale ? ' stale' : ''}">` +
        `${view.ranges.grid.grid_count} mixes checked, ` +
        `${view.ranges.grid.high_count} high / ${view.ranges.grid.low_count} low` +
        `${view.rangesStale ? ' (inputs changed since)' : ''}</p>`;
    }
    el<HTMLButtonElement>('fetch-ranges').disabled = view.rangesBusy;
  });

  void state.classifyNow();
}

if (typeof document !== 'undefined' && document.getElementById('traits')) {
  void boot();
}
