import init, { Resonance, asymmetricOnset } from "./pkg/kirkwood_web.js";

const $ = (id) => document.getElementById(id);
const TAU = 2 * Math.PI;
const COLORS = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"];

let resonance = null;
let lambdaRange = 1;
let orbitCount = 0;

function status(text, error = false) {
  $("status").textContent = text;
  $("status").className = error ? "err" : "";
}

function drawPhi(values) {
  const c = $("phi");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const max = Math.max(...values.map(Math.abs)) || 1;
  const x = (k) => (k / (values.length - 1)) * c.width;
  const y = (v) => c.height / 2 - (v / max) * (c.height / 2 - 10);
  g.strokeStyle = "#999";
  g.beginPath();
  g.moveTo(0, c.height / 2);
  g.lineTo(c.width, c.height / 2);
  g.stroke();
  g.strokeStyle = "#1f77b4";
  g.lineWidth = 1.5;
  g.beginPath();
  values.forEach((v, k) => (k ? g.lineTo(x(k), y(v)) : g.moveTo(x(k), y(v))));
  g.stroke();
  g.fillStyle = "#222";
  g.fillText(`max |φ| = ${max.toExponential(3)}`, 8, 14);
}

const px = (l) => (l / TAU) * $("portrait").width;
const py = (lam) => $("portrait").height / 2 - (lam / lambdaRange) * ($("portrait").height / 2);

function clearPortrait() {
  const c = $("portrait");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  g.strokeStyle = "#ccc";
  g.beginPath();
  g.moveTo(0, c.height / 2);
  g.lineTo(c.width, c.height / 2);
  g.stroke();
  g.fillStyle = "#222";
  g.fillText(`λ ∈ ±${lambdaRange.toPrecision(3)}`, 8, 14);
  orbitCount = 0;
  if (!resonance) return;
  const fps = resonance.fixedPoints(Number($("mu").value));
  for (let i = 0; i < fps.length; i += 3) {
    const [X, Y] = [px(fps[i]), py(fps[i + 1])];
    if (fps[i + 2]) {
      g.strokeStyle = "#d62728";
      g.beginPath();
      g.moveTo(X - 5, Y - 5); g.lineTo(X + 5, Y + 5);
      g.moveTo(X - 5, Y + 5); g.lineTo(X + 5, Y - 5);
      g.stroke();
    } else {
      g.fillStyle = "#1f77b4";
      g.beginPath();
      g.arc(X, Y, 4, 0, TAU);
      g.fill();
    }
  }
}

function build() {
  status("computing…");
  // let the status repaint before the blocking call
  setTimeout(() => {
    try {
      resonance?.free();
      resonance = new Resonance(Number($("p").value), Number($("q").value), Number($("e").value), $("section").value === "pi");
      drawPhi(Array.from(resonance.phi(600)));
      lambdaRange = 2 * resonance.librationWidth();
      clearPortrait();
      status("");
    } catch (err) {
      resonance = null;
      status(String(err.message ?? err), true);
    }
  }, 10);
}

function orbit(event) {
  if (!resonance) return;
  const c = $("portrait");
  const rect = c.getBoundingClientRect();
  const l = ((event.clientX - rect.left) / rect.width) * TAU;
  const lam = (0.5 - (event.clientY - rect.top) / rect.height) * 2 * lambdaRange;
  try {
    const pts = resonance.orbit(Number($("mu").value), l, lam, 4000, 4 * lambdaRange);
    const g = c.getContext("2d");
    g.fillStyle = COLORS[orbitCount++ % COLORS.length];
    for (let i = 0; i < pts.length; i += 2) g.fillRect(px(pts[i]), py(pts[i + 1]), 1.2, 1.2);
  } catch (err) {
    status(String(err.message ?? err), true);
  }
}

function onset() {
  $("onset-out").textContent = "computing…";
  setTimeout(() => {
    try {
      const p = Number($("onset-p").value);
      $("onset-out").textContent = `e* = ${asymmetricOnset(p).toFixed(6)} for 1/${p}`;
    } catch (err) {
      $("onset-out").textContent = String(err.message ?? err);
    }
  }, 10);
}

await init();
$("build").addEventListener("click", build);
$("clear").addEventListener("click", clearPortrait);
$("portrait").addEventListener("click", orbit);
$("onset").addEventListener("click", onset);
build();
