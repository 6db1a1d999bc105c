// Page wiring: fetch the current step, draw it, collect one answer, repeat.
// All study state lives on the server; reloading the page only needs the
// session id kept in the URL hash.

import { StudyApi } from "./api.js";
import type { ActiveStep, AnswerChoice } from "./api.js";
import { buildScene, drawScene } from "./scene.js";
import { SessionDriver } from "./session.js";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const progressEl = document.getElementById("progress") as HTMLElement;
const sentencesEl = document.getElementById("sentences") as HTMLOListElement;
const optionsEl = document.getElementById("options") as HTMLElement;
const completeEl = document.getElementById("complete") as HTMLElement;
const errorEl = document.getElementById("error") as HTMLElement;

function showError(message: string): void {
  errorEl.textContent = message;
  errorEl.hidden = false;
}

function renderStep(driver: SessionDriver, step: ActiveStep): void {
  progressEl.textContent =
    `Scenario ${step.scenario_index + 1} of ${step.scenario_count}, ` +
    `step ${step.step} of ${step.total_steps}`;

  const scene = buildScene(step.image);
  canvas.width = scene.width;
  canvas.height = scene.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    showError("This browser does not support canvas rendering.");
    return;
  }
  drawScene(ctx, scene);

  sentencesEl.replaceChildren(
    ...step.sentences.map((sentence) => {
      const li = document.createElement("li");
      li.textContent = sentence;
      return li;
    })
  );

  const choices: { label: string; answer: AnswerChoice }[] = step.options.map(
    (option, index) => ({ label: option, answer: index })
  );
  if (step.dont_know_allowed) {
    choices.push({ label: "I don't know", answer: null });
  }
  const buttons = choices.map(({ label, answer }) => {
    const button = document.createElement("button");
    button.textContent = label;
    button.disabled = true;
    button.addEventListener("click", () => {
      void submit(driver, step, answer, buttons);
    });
    return button;
  });
  optionsEl.replaceChildren(...buttons);

  // answers open up only once everything is visible; the latency clock
  // starts at the same moment
  driver.markRendered();
  for (const button of buttons) {
    button.disabled = false;
  }
}

async function submit(
  driver: SessionDriver,
  step: ActiveStep,
  answer: AnswerChoice,
  buttons: HTMLButtonElement[]
): Promise<void> {
  for (const button of buttons) {
    button.disabled = true;
  }
  try {
    await driver.submit(step, answer);
    // stale outcomes need no special casing: refetching shows the truth
    await showCurrent(driver);
  } catch (err) {
    showError(`Could not record the answer, please retry. (${String(err)})`);
    for (const button of buttons) {
      button.disabled = false;
    }
  }
}

async function showCurrent(driver: SessionDriver): Promise<void> {
  errorEl.hidden = true;
  const step = await driver.currentStep();
  if (step.done) {
    completeEl.hidden = false;
    progressEl.textContent = "";
    sentencesEl.replaceChildren();
    optionsEl.replaceChildren();
    canvas.hidden = true;
    return;
  }
  renderStep(driver, step);
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new StudyApi(params.get("api") ?? "");
  const storedId = window.location.hash.replace(/^#/, "") || null;
  try {
    const driver = await SessionDriver.resume(api, storedId);
    window.location.hash = driver.sessionId;
    await showCurrent(driver);
  } catch (err) {
    showError(`Could not reach the study service. (${String(err)})`);
  }
}

void start();
