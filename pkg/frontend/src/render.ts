import { ClassifyResponse, RangeReport } from './types.js';
import { TRAIT_NAMES } from './state.js';

const RANGE_ATOL = 1e-9;

export type RangeBar = {
  id: string;
  name: string;
  white: [number, number] | null;
  black: [number, number] | null;
  marker: number;
  inWhite: boolean;
  inBlack: boolean;
};

export function within(value: number, range: [number, number] | null): boolean {
  if (!range) return false;
  return range[0] - RANGE_ATOL <= value && value <= range[1] + RANGE_ATOL;
}

/**
 * Join the range payload with the user's current proportions.  The bar
 * numbers are copied verbatim from the service response; only the marker
 * position and its containment flags are computed here.
 */
export function buildRangeBars(
  report: RangeReport,
  categoryIds: string[],
  proportions: number[],
): RangeBar[] {
  return report.activities.map((a) => {
    const idx = categoryIds.indexOf(a.id);
    const marker = idx >= 0 ? proportions[idx] : 0;
    return {
      id: a.id,
      name: a.name,
      white: a.white,
      black: a.black,
      marker,
      inWhite: within(marker, a.white),
      inBlack: within(marker, a.black),
    };
  });
}

export type DeltaBar = { trait: string; value: number; width: number };

export function buildDeltaBars(response: ClassifyResponse): DeltaBar[] {
  const maxAbs = Math.max(1e-9, ...response.delta.map((v) => Math.abs(v)));
  return response.delta.map((v, i) => ({
    trait: TRAIT_NAMES[i],
    value: v,
    width: Math.abs(v) / maxAbs,
  }));
}

const pct = (v: number) => `${(100 * v).toFixed(1)}%`;

export function rangeBarHtml(bar: RangeBar): string {
  const seg = (range: [number, number] | null, cls: string) =>
    range
      ? `<div class="seg ${cls}" style="left:${pct(range[0])};width:${pct(range[1] - range[0])}"></div>`
      : '';
  const markerCls = bar.inWhite ? 'in-white' : bar.inBlack ? 'in-black' : 'outside';
  return `
    <div class="range-row" data-id="${bar.id}">
      <span class="range-name">${bar.name}</span>
      <div class="range-track">
        ${seg(bar.white, 'white-seg')}${seg(bar.black, 'black-seg')}
        <div class="marker ${markerCls}" style="left:${pct(bar.marker)}" title="${bar.marker.toFixed(2)}"></div>
      </div>
      <span class="range-bounds">${bar.white ? `good ${bar.white[0].toFixed(2)}-${bar.white[1].toFixed(2)}` : 'no high-SWB region found'}
        ${bar.black ? ` / avoid ${bar.black[0].toFixed(2)}-${bar.black[1].toFixed(2)}` : ' / no low-SWB region found'}</span>
    </div>`;
}

export function deltaBarHtml(bar: DeltaBar): string {
  const side = bar.value >= 0 ? 'pos' : 'neg';
  return `
    <div class="delta-row">
      <span class="delta-name">${bar.trait}</span>
      <div class="delta-track"><div class="delta-fill ${side}" style="width:${pct(bar.width)}"></div></div>
      <span class="delta-value">${bar.value.toFixed(3)}</span>
    </div>`;
}
