import { ApiClient } from './api.js';
import { ClassifyResponse, ModelInfo, RangeReport, ServiceError } from './types.js';

export const TRAIT_NAMES = [
  'extraversion',
  'agreeableness',
  'conscientiousness',
  'neuroticism',
  'openness',
] as const;

export const TRAIT_MIN = 10;
export const TRAIT_MAX = 50;

/**
 * Redistribute the unit budget after one slider moves, preserving the
 * ratios of the untouched sliders as closely as integer units allow
 * (largest-remainder rounding, ties to the lower index).
 */
export function renormalizeUnits(units: number[], changed: number, value: number): number[] {
  const total = units.reduce((a, b) => a + b, 0);
  const clamped = Math.max(0, Math.min(total, Math.round(value)));
  const next = units.slice();
  next[changed] = clamped;
  const others = units.map((_, i) => i).filter((i) => i !== changed);
  const remaining = total - clamped;
  const pool = others.reduce((a, i) => a + units[i], 0);
  if (pool === 0) {
    // nothing to scale; spread evenly, one unit at a time
    for (const i of others) next[i] = 0;
    for (let k = 0; k < remaining; k++) next[others[k % others.length]] += 1;
    return next;
  }
  const targets = others.map((i) => (units[i] * remaining) / pool);
  const floors = targets.map(Math.floor);
  let leftover = remaining - floors.reduce((a, b) => a + b, 0);
  const order = others
    .map((i, j) => ({ i, j, frac: targets[j] - floors[j] }))
    .sort((a, b) => b.frac - a.frac || a.i - b.i);
  others.forEach((i, j) => (next[i] = floors[j]));
  for (let k = 0; k < leftover; k++) next[order[k].i] += 1;
  return next;
}

export type ExplorerView = {
  traits: number[];
  units: number[];
  proportions: number[];
  totalUnits: number;
  step: number;
  classify: ClassifyResponse | null;
  classifyStale: boolean;
  ranges: RangeReport | null;
  rangesStale: boolean;
  banner: string | null;
  rangesBusy: boolean;
};

/**
 * All explorer behavior that does not touch the DOM: slider state in grid
 * units, debounced-classification bookkeeping with sequence numbers so a
 * late response can never overwrite a newer one, and single-flight range
 * fetching.  Every displayed number comes from a service response.
 */
export class ExplorerState {
  traits: number[] = [30, 30, 30, 30, 30];
  units: number[] = [];
  step = 0.1;
  totalUnits = 10;

  lastClassify: ClassifyResponse | null = null;
  classifyStale = false;
  lastRanges: RangeReport | null = null;
  rangesStale = false;
  banner: string | null = null;
  rangesBusy = false;

  private classifySeq = 0;
  private displayedSeq = 0;
  private listeners: Array<(view: ExplorerView) => void> = [];

  constructor(public api: ApiClient) {}

  async init(): Promise<ModelInfo> {
    const info = await this.api.modelInfo();
    this.step = info.config.step;
    this.totalUnits = Math.round(1 / this.step);
    const n = info.taxonomy_categories.length;
    // even spread to start with; remainder goes to the first categories
    const base = Math.floor(this.totalUnits / n);
    this.units = new Array(n).fill(base);
    let leftover = this.totalUnits - base * n;
    for (let i = 0; i < leftover; i++) this.units[i] += 1;
    this.traits = info.p_median.map((v) => Math.round(v));
    this.emit();
    return info;
  }

  onChange(listener: (view: ExplorerView) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const view = this.view();
    for (const l of this.listeners) l(view);
  }

  view(): ExplorerView {
    return {
      traits: this.traits.slice(),
      units: this.units.slice(),
      proportions: this.proportions(),
      totalUnits: this.totalUnits,
      step: this.step,
      classify: this.lastClassify,
      classifyStale: this.classifyStale,
      ranges: this.lastRanges,
      rangesStale: this.rangesStale,
      banner: this.banner,
      rangesBusy: this.rangesBusy,
    };
  }

  proportions(): number[] {
    return this.units.map((u) => u * this.step);
  }

  setTrait(index: number, value: number): void {
    const v = Math.max(TRAIT_MIN, Math.min(TRAIT_MAX, Math.round(value)));
    this.traits[index] = v;
    this.markInputsChanged();
  }

  setActivityUnits(index: number, value: number): void {
    this.units = renormalizeUnits(this.units, index, value);
    this.markInputsChanged();
  }

  private markInputsChanged(): void {
    // whatever is on screen no longer matches the inputs
    this.classifyStale = this.lastClassify !== null;
    this.rangesStale = this.lastRanges !== null;
    this.emit();
  }

  /**
   * Fire a classification for the current inputs.  The sequence number
   * taken at call time decides whether the response may be displayed;
   * responses arriving out of order are dropped.
   */
  async classifyNow(): Promise<void> {
    const seq = ++this.classifySeq;
    try {
      const response = await this.api.classify({
        personality: this.traits.slice(),
        activity_distribution: this.proportions(),
      });
      if (seq <= this.displayedSeq || seq < this.classifySeq) return; // stale
      this.displayedSeq = seq;
      this.lastClassify = response;
      this.classifyStale = false;
      this.banner = null;
    } catch (err) {
      if (seq < this.classifySeq) return; // a newer request is in flight
      this.banner = err instanceof ServiceError && err.status === 0
        ? 'service unreachable; showing last good values'
        : `classification failed: ${err instanceof Error ? err.message : String(err)}`;
      this.classifyStale = this.lastClassify !== null;
    }
    this.emit();
  }

  /** Fetch ranges on explicit request; at most one call in flight. */
  async fetchRanges(): Promise<void> {
    if (this.rangesBusy) return;
    this.rangesBusy = true;
    this.emit();
    try {
      const report = await this.api.recommend({
        personality: this.traits.slice(),
        activity_distribution: this.proportions(),
      });
      this.lastRanges = report;
      this.rangesStale = false;
      this.banner = null;
    } catch (err) {
      if (err instanceof ServiceError && err.status === 413) {
        this.banner = 'grid too large; try a larger step';
      } else if (err instanceof ServiceError && err.status === 0) {
        this.banner = 'service unreachable; showing last good values';
      } else {
        this.banner = `range request failed: ${err instanceof Error ? err.message : String(err)}`;
      }
    } finally {
      this.rangesBusy = false;
    }
    this.emit();
  }
}
