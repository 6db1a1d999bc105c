// Session state machine: the server owns all state, this driver just walks
// the step/answer protocol and measures how long the participant looked at
// a step before answering.

import { ApiError } from "./api.js";
import type {
  ActiveStep,
  AnswerChoice,
  AnswerResult,
  StepPayload,
  StudyApi,
} from "./api.js";

export type SubmitOutcome =
  | { status: "accepted"; result: AnswerResult }
  | { status: "stale" };

export class SessionDriver {
  private renderedAt = Date.now();

  constructor(
    private readonly api: StudyApi,
    readonly sessionId: string
  ) {}

  static async open(api: StudyApi): Promise<SessionDriver> {
    const opened = await api.createSession();
    return new SessionDriver(api, opened.session);
  }

  /** Reuse a stored session id if the server still knows it. */
  static async resume(api: StudyApi, sessionId: string | null): Promise<SessionDriver> {
    if (sessionId) {
      try {
        await api.step(sessionId);
        return new SessionDriver(api, sessionId);
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 404)) {
          throw err;
        }
      }
    }
    return SessionDriver.open(api);
  }

  async currentStep(): Promise<StepPayload> {
    const step = await this.api.step(this.sessionId);
    this.renderedAt = Date.now();
    return step;
  }

  /** Call when the step is actually visible; latency counts from here. */
  markRendered(): void {
    this.renderedAt = Date.now();
  }

  /**
   * Post an answer for the given step.  A 409 means our view of the session
   * is stale (double submit, another tab): report it so the caller can
   * refetch instead of crashing.
   */
  async submit(step: ActiveStep, answer: AnswerChoice): Promise<SubmitOutcome> {
    const elapsed = Math.max(0, Date.now() - this.renderedAt);
    try {
      const result = await this.api.answer(this.sessionId, {
        answer,
        scenario_index: step.scenario_index,
        step: step.step,
        client_elapsed_ms: elapsed,
      });
      return { status: "accepted", result };
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return { status: "stale" };
      }
      throw err;
    }
  }

  /**
   * Drive the whole session with a scripted answer policy.  Network errors
   * are retried a few times; stale answers trigger a step refetch.  Returns
   * the number of accepted answers.
   */
  async run(
    choose: (step: ActiveStep) => AnswerChoice,
    onStep?: (step: ActiveStep) => void,
    retryDelayMs = 250
  ): Promise<number> {
    let accepted = 0;
    let failures = 0;
    for (;;) {
      try {
        const step = await this.currentStep();
        if (step.done) {
          return accepted;
        }
        onStep?.(step);
        const outcome = await this.submit(step, choose(step));
        if (outcome.status === "accepted") {
          accepted += 1;
        }
        failures = 0;
      } catch (err) {
        if (err instanceof ApiError && err.status === 0 && failures < 5) {
          failures += 1;
          await new Promise((resolve) => setTimeout(resolve, retryDelayMs));
          continue;
        }
        throw err;
      }
    }
  }
}
