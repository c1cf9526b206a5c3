/** Wire types mirroring the service's JSON bodies. */

export type ClassifyRequest = {
  personality: number[];
  activity_distribution: number[];
};

export type ClassifyResponse = {
  label: 'high' | 'low';
  margin: number;
  delta: number[];
  exhibited: number[];
};

export type RecommendRequest = {
  personality: number[];
  activity_distribution?: number[];
  step?: number;
  lambda?: number;
  m?: number;
};

export type ActivityRange = {
  id: string;
  name: string;
  white: [number, number] | null;
  black: [number, number] | null;
};

export type RangeReport = {
  format_version: number;
  grid: {
    m: number;
    lambda: number;
    step: number;
    grid_count: number;
    high_count: number;
    low_count: number;
    model_hash: string;
  };
  activities: ActivityRange[];
};

export type ModelInfo = {
  feature_kind: string;
  algorithm: string;
  p_median: number[];
  swb_threshold: number;
  taxonomy_categories: { id: string; name: string }[];
  config: { step: number; lambda: number; m: number; variance_threshold: number; grid_cap: number };
  n_users: number;
};

export type FieldError = { field: string; message: string };

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public fields: FieldError[] = [],
  ) {
    super(message);
  }
}
