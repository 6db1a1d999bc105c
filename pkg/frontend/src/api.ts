// Typed client for the four study-service endpoints.

export type SessionOpened = {
  session: string;
  scenario_count: number;
  total_answer_steps: number;
};

export type ImageCell = { id: string; x: number; y: number; kind: string };

export type ImageObject = {
  id: string;
  shape: "circle" | "square" | "triangle";
  color: "red" | "blue";
  cell: string;
};

export type ImageDoor = { id: string; name: string; x: number; y: number };

export type ImageModel = {
  width: number;
  height: number;
  cells: ImageCell[];
  objects: ImageObject[];
  doors: ImageDoor[];
  station: string;
  robot: string;
};

export type ActiveStep = {
  session: string;
  done: false;
  scenario_index: number;
  scenario_count: number;
  step: number;
  total_steps: number;
  image: ImageModel;
  sentences: string[];
  options: string[];
  dont_know_allowed: boolean;
};

export type FinishedStep = { session: string; done: true; scenario_count: number };

export type StepPayload = ActiveStep | FinishedStep;

// answer is a goal index or null for "I don't know"
export type AnswerChoice = number | null;

export type AnswerBody = {
  answer: AnswerChoice;
  scenario_index: number;
  step: number;
  client_elapsed_ms: number;
};

export type AnswerResult = {
  accepted: boolean;
  done: boolean;
  scenario_index: number | null;
  step: number | null;
};

export type StudyResults = {
  session: string;
  complete: boolean;
  answered_steps: number;
  hit_ratio_curve: Record<string, Record<string, number>>;
  hit_ratio_curve_excluding_dont_know: Record<string, Record<string, number>>;
  earliest_correct: Record<string, number[]>;
  pairwise_p: Record<string, number | null>;
  mean_plan_length: number | null;
};

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class StudyApi {
  // baseUrl "" means same origin
  constructor(readonly baseUrl: string = "") {}

  async createSession(): Promise<SessionOpened> {
    return this.request<SessionOpened>("POST", "/sessions");
  }

  async step(sessionId: string): Promise<StepPayload> {
    return this.request<StepPayload>("GET", `/sessions/${sessionId}/step`);
  }

  async answer(sessionId: string, body: AnswerBody): Promise<AnswerResult> {
    return this.request<AnswerResult>("POST", `/sessions/${sessionId}/answer`, body);
  }

  async results(sessionId: string): Promise<StudyResults> {
    return this.request<StudyResults>("GET", `/sessions/${sessionId}/results`);
  }

  // raw response text, byte-exact as served (results comparisons)
  async resultsText(sessionId: string): Promise<string> {
    const res = await this.send("GET", `/sessions/${sessionId}/results`);
    if (!res.ok) {
      throw new ApiError(res.status, `HTTP ${res.status}`);
    }
    return res.text();
  }

  private async send(method: string, path: string, body?: unknown): Promise<Response> {
    try {
      return await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.send(method, path, body);
    if (!res.ok) {
      const info = await res.json().catch(() => ({}) as { error?: string });
      throw new ApiError(res.status, info?.error ?? `HTTP ${res.status}`);
    }
    return (await res.json()) as T;
  }
}
