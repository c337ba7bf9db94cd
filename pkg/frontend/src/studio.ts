import { Debouncer } from './debounce.js';
import {
  DraftRequest,
  ForecastResponse,
  LinkKind,
  PROBLEMS,
  PROBLEM_TITLES,
  Problem,
} from './types.js';

/** The slice of the service client the studio depends on. */
export interface PredictApi {
  predict(draft: DraftRequest, signal?: AbortSignal): Promise<ForecastResponse>;
}

export interface Badge {
  problem: Problem;
  title: string;
  label: 'high' | 'low';
  percent: number; // high-impact confidence, 0-100
}

export interface StudioState {
  text: string;
  linkKind: LinkKind;
  publishedAt: string | null; // null -> let the service use request time
  forecast: ForecastResponse | null;
  /** forecast no longer matches the current draft (offline, or edit pending) */
  stale: boolean;
  offline: boolean;
  requestInFlight: boolean;
}

/** Exactly one badge per problem, in fixed problem order. */
export function toBadges(forecast: ForecastResponse): Badge[] {
  return PROBLEMS.map((problem) => {
    const pred = forecast.predictions[problem];
    return {
      problem,
      title: PROBLEM_TITLES[problem],
      label: pred.label,
      percent: Math.round(pred.score * 100),
    };
  });
}

/**
 * Drives the what-if loop: edits are debounced into at most one prediction
 * request per quiet period; responses carry monotonically increasing request
 * ids and anything but the latest issued id is dropped, so a slow early
 * response can never overwrite a newer forecast. A superseded request is
 * also aborted, keeping at most one in flight.
 */
export class DraftStudio {
  private readonly debouncer: Debouncer;
  private controller: AbortController | null = null;
  private latestRequestId = 0;

  readonly state: StudioState = {
    text: '',
    linkKind: 'none',
    publishedAt: null,
    forecast: null,
    stale: false,
    offline: false,
    requestInFlight: false,
  };

  constructor(
    private readonly client: PredictApi,
    private readonly onChange: (state: StudioState) => void = () => {},
    debounceMs = 400,
  ) {
    this.debouncer = new Debouncer(debounceMs);
  }

  setText(text: string): void {
    this.state.text = text;
    this.edited();
  }

  setLinkKind(kind: LinkKind): void {
    this.state.linkKind = kind;
    this.edited();
  }

  setPublishedAt(iso: string | null): void {
    this.state.publishedAt = iso;
    this.edited();
  }

  private edited(): void {
    if (!this.state.text.trim()) {
      // nothing to score: clear everything and make sure no request fires
      this.debouncer.cancel();
      this.abortInFlight();
      this.state.forecast = null;
      this.state.stale = false;
      this.state.requestInFlight = false;
      this.notify();
      return;
    }
    this.state.stale = this.state.forecast !== null;
    this.debouncer.schedule(() => void this.issueRequest());
    this.notify();
  }

  private async issueRequest(): Promise<void> {
    const requestId = ++this.latestRequestId;
    this.abortInFlight();
    this.controller = new AbortController();
    this.state.requestInFlight = true;
    this.notify();

    try {
      const forecast = await this.client.predict(
        {
          text: this.state.text,
          link_kind: this.state.linkKind,
          ...(this.state.publishedAt ? { published_at: this.state.publishedAt } : {}),
        },
        this.controller.signal,
      );
      if (requestId !== this.latestRequestId) return; // late arrival, drop
      this.state.forecast = forecast;
      this.state.stale = false;
      this.state.offline = false;
    } catch (err) {
      if ((err as Error).name === 'AbortError') return;
      if (requestId !== this.latestRequestId) return;
      // keep the last forecast, but flag it and show the banner
      this.state.offline = true;
      this.state.stale = this.state.forecast !== null;
    } finally {
      if (requestId === this.latestRequestId) {
        this.state.requestInFlight = false;
        this.controller = null;
        this.notify();
      }
    }
  }

  private abortInFlight(): void {
    if (this.controller) {
      this.controller.abort();
      this.controller = null;
    }
  }

  private notify(): void {
    this.onChange(this.state);
  }

  badges(): Badge[] {
    return this.state.forecast ? toBadges(this.state.forecast) : [];
  }
}
