/**
 * DOM layer. Builds the console markup once, forwards control events to the
 * view-model, and re-renders whenever it announces a change.
 */

import type { FaderConsole } from "./console.js";

export interface AudioSink {
  play(buffer: ArrayBuffer): void;
}

/** Default sink: wrap the WAV bytes in a blob URL and hand them to <audio>. */
export function blobAudioSink(): AudioSink {
  const element = new Audio();
  return {
    play(buffer: ArrayBuffer): void {
      const url = URL.createObjectURL(new Blob([buffer], { type: "audio/wav" }));
      element.src = url;
      void element.play();
    },
  };
}

const MARKUP = `
  <div class="session-form">
    <input id="source-prompt" type="text" placeholder="source prompt">
    <input id="target-prompt" type="text" placeholder="target prompt">
    <button id="create-session" type="button">Create session</button>
    <span id="session-status" class="status">idle</span>
  </div>
  <div id="banner" class="banner" hidden></div>
  <section id="console" hidden>
    <div class="fader-row">
      <button id="play-source" type="button" title="audition the source clip">source</button>
      <input id="fader" type="range" min="0" max="1" step="0.01" value="0">
      <button id="play-target" type="button" title="audition the target clip">target</button>
      <span id="alpha-readout">0.00</span>
      <button id="play-morph" type="button" disabled>play morph</button>
    </div>
    <section id="weights" class="weights">
      <div id="source-weights" class="weight-column"></div>
      <div id="target-weights" class="weight-column"></div>
    </section>
    <div class="sweep-row">
      <button id="run-sweep" type="button">sweep</button>
      <div id="sweep-strip" class="sweep-strip"></div>
    </div>
  </section>
`;

export function mountConsole(root: HTMLElement, vm: FaderConsole, sink: AudioSink): void {
  root.innerHTML = MARKUP;
  const pick = <T extends HTMLElement>(id: string): T => {
    const el = root.querySelector<T>(`#${id}`);
    if (el === null) throw new Error(`markup is missing #${id}`);
    return el;
  };

  const sourcePrompt = pick<HTMLInputElement>("source-prompt");
  const targetPrompt = pick<HTMLInputElement>("target-prompt");
  const statusLine = pick<HTMLSpanElement>("session-status");
  const banner = pick<HTMLDivElement>("banner");
  const consoleSection = pick<HTMLElement>("console");
  const fader = pick<HTMLInputElement>("fader");
  const readout = pick<HTMLSpanElement>("alpha-readout");
  const playMorph = pick<HTMLButtonElement>("play-morph");
  const sourceWeights = pick<HTMLDivElement>("source-weights");
  const targetWeights = pick<HTMLDivElement>("target-weights");
  const sweepStrip = pick<HTMLDivElement>("sweep-strip");

  pick<HTMLButtonElement>("create-session").addEventListener("click", () => {
    void vm.createSession(sourcePrompt.value, targetPrompt.value);
  });

  // Dragging only moves the readout; the render request fires on release.
  fader.addEventListener("input", () => {
    readout.textContent = Number(fader.value).toFixed(2);
  });
  fader.addEventListener("change", () => {
    void vm.onFaderChange(Number(fader.value));
  });

  playMorph.addEventListener("click", () => {
    if (vm.clip !== null) sink.play(vm.clip);
  });

  pick<HTMLButtonElement>("play-source").addEventListener("click", () => {
    void vm.previewClip("source").then((audio) => sink.play(audio));
  });
  pick<HTMLButtonElement>("play-target").addEventListener("click", () => {
    void vm.previewClip("target").then((audio) => sink.play(audio));
  });

  pick<HTMLButtonElement>("run-sweep").addEventListener("click", () => {
    void vm.renderSweep();
  });

  const weightSlider = (side: "source" | "target", index: number, token: string, value: number) => {
    const row = document.createElement("label");
    row.className = "weight-row";
    const caption = document.createElement("span");
    caption.textContent = token;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "-2";
    slider.max = "3";
    slider.step = "1";
    slider.value = String(value);
    slider.dataset.side = side;
    slider.dataset.index = String(index);
    slider.addEventListener("change", () => {
      void vm.onWeightChange(side, index, Number(slider.value));
    });
    row.append(caption, slider);
    return row;
  };

  // Token knobs exist only once the backend has tokenized the prompts, i.e.
  // after the session polls ready.
  let renderedSessionId: string | null = null;
  const renderWeights = () => {
    const session = vm.session;
    if (session === null) {
      renderedSessionId = null;
      sourceWeights.replaceChildren();
      targetWeights.replaceChildren();
      return;
    }
    if (session.sessionId === renderedSessionId) return;
    renderedSessionId = session.sessionId;
    sourceWeights.replaceChildren(
      ...session.sourceTokens.map((token, i) =>
        weightSlider("source", i, token, session.sourceWeights[i] ?? 1),
      ),
    );
    targetWeights.replaceChildren(
      ...session.targetTokens.map((token, i) =>
        weightSlider("target", i, token, session.targetWeights[i] ?? 1),
      ),
    );
  };

  const renderSweepStrip = () => {
    sweepStrip.replaceChildren(
      ...vm.sweepCells.map((cell) => {
        const button = document.createElement("button");
        button.type = "button";
        button.className = "sweep-cell";
        button.textContent = cell.label;
        button.addEventListener("click", () => {
          void vm.cellAudio(cell.morphId).then((audio) => sink.play(audio));
        });
        return button;
      }),
    );
  };

  const render = () => {
    statusLine.textContent = vm.status;
    banner.hidden = vm.banner === null;
    banner.textContent = vm.banner ?? "";
    consoleSection.hidden = vm.status !== "ready";
    playMorph.disabled = !vm.playEnabled;
    renderWeights();
    renderSweepStrip();
  };

  vm.onChange(render);
  render();
}
