"use strict";
/** Browser UI: sliders per blind stimulus, instant switching, segment looping. */
const state = {
    session: null,
    trialIndex: 0,
    players: new Map(),
    active: null,
    loop: { start: 0, end: 0, enabled: false },
};
function $(id) {
    const el = document.getElementById(id);
    if (!el)
        throw new Error(`missing element #${id}`);
    return el;
}
function playerFor(token) {
    let audio = state.players.get(token);
    if (!audio) {
        audio = new Audio(`/audio/${token}`);
        audio.preload = "auto";
        audio.addEventListener("timeupdate", () => {
            if (state.loop.enabled && audio.currentTime >= state.loop.end) {
                audio.currentTime = state.loop.start;
            }
        });
        state.players.set(token, audio);
    }
    return audio;
}
/** Switch playback instantly, carrying the position across stimuli. */
function switchTo(token) {
    const next = playerFor(token);
    const position = state.active ? state.active.currentTime : 0;
    if (state.active && state.active !== next) {
        state.active.pause();
    }
    next.currentTime = position;
    void next.play();
    state.active = next;
}
function stopPlayback() {
    if (state.active) {
        state.active.pause();
        state.active = null;
    }
}
function renderTrial() {
    const session = state.session;
    const trial = session.trials[state.trialIndex];
    stopPlayback();
    state.players.clear();
    $("progress").textContent =
        `Trial ${state.trialIndex + 1} of ${session.trials.length} - item ${trial.itemId}`;
    const refButton = $("play-reference");
    refButton.onclick = () => switchTo(trial.referenceToken);
    const list = $("stimuli");
    list.innerHTML = "";
    for (const stimulus of trial.stimuli) {
        const row = document.createElement("div");
        row.className = "stimulus";
        const play = document.createElement("button");
        play.textContent = `Play ${stimulus.label}`;
        play.onclick = () => switchTo(stimulus.token);
        const slider = document.createElement("input");
        slider.type = "range";
        slider.min = "0";
        slider.max = "100";
        slider.step = "1";
        slider.value = "0";
        slider.dataset.label = stimulus.label;
        slider.dataset.touched = "false";
        slider.oninput = () => {
            slider.dataset.touched = "true";
            value.textContent = slider.value;
        };
        const value = document.createElement("span");
        value.className = "value";
        value.textContent = "-";
        row.append(play, slider, value);
        list.append(row);
    }
    $("status").textContent = "";
}
function collectRatings() {
    const sliders = document.querySelectorAll("#stimuli input[type=range]");
    const ratings = [];
    const untouched = [];
    sliders.forEach((slider) => {
        if (slider.dataset.touched !== "true") {
            untouched.push(slider.dataset.label);
        }
        else {
            ratings.push({ label: slider.dataset.label, score: Number(slider.value) });
        }
    });
    if (untouched.length > 0) {
        $("status").textContent = `Rate every stimulus before submitting (missing: ${untouched.join(", ")})`;
        return null;
    }
    return ratings;
}
async function submitTrial() {
    const ratings = collectRatings();
    if (!ratings)
        return;
    const session = state.session;
    const trial = session.trials[state.trialIndex];
    const response = await fetch("/ratings", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ raterId: session.raterId, itemId: trial.itemId, ratings }),
    });
    const body = await response.json();
    if (!body.accepted) {
        $("status").textContent = `Rejected: ${body.reason}`;
        return;
    }
    state.trialIndex += 1;
    if (state.trialIndex >= session.trials.length) {
        stopPlayback();
        $("trial").hidden = true;
        $("done").hidden = false;
    }
    else {
        renderTrial();
    }
}
function setupLoopControls() {
    const loopStart = $("loop-start");
    const loopEnd = $("loop-end");
    const loopToggle = $("loop-enabled");
    const update = () => {
        state.loop = {
            start: Number(loopStart.value),
            end: Math.max(Number(loopEnd.value), Number(loopStart.value) + 0.05),
            enabled: loopToggle.checked,
        };
    };
    loopStart.onchange = loopEnd.onchange = loopToggle.onchange = update;
    update();
}
async function init() {
    const rater = new URLSearchParams(window.location.search).get("rater");
    if (!rater) {
        $("progress").textContent = "Open this page as /?rater=<your id>";
        return;
    }
    const response = await fetch(`/session?rater=${encodeURIComponent(rater)}`);
    if (!response.ok) {
        $("progress").textContent = `Could not load a session: ${await response.text()}`;
        return;
    }
    state.session = (await response.json());
    setupLoopControls();
    $("submit").onclick = () => void submitTrial();
    $("stop").onclick = stopPlayback;
    renderTrial();
}
document.addEventListener("DOMContentLoaded", () => void init());
