// Wire types for the prediction service.

export const PROBLEMS = ['R', 'R+', 'R-', 'R0', 'C', 'S'] as const;
export type Problem = (typeof PROBLEMS)[number];

export const PROBLEM_TITLES: Record<Problem, string> = {
  R: 'Total reactions',
  'R+': 'Positive reactions',
  'R-': 'Negative reactions',
  R0: 'Neutral reactions',
  C: 'Comments',
  S: 'Shares',
};

export type LinkKind = 'image' | 'album' | 'video' | 'other' | 'none';

export interface DraftRequest {
  text: string;
  link_kind: LinkKind;
  published_at?: string; // ISO-8601; omitted -> service uses request time
}

export interface PredictionOut {
  label: 'high' | 'low';
  score: number;
}

export interface ForecastResponse {
  predictions: Record<string, PredictionOut>;
  model_versions: Record<string, string>;
  features: {
    style: Record<string, number>;
    behavioral: Record<string, number>;
  };
}

export interface HealthResponse {
  status: string;
  models: Record<string, string>;
}
