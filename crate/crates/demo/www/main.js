import init, { rateCurve, worstCaseTrajectory, competingCurves, gammaStar } from "./pkg/proxsplit_demo.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#000000"];
const PAD = 40;

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function rows(flat, width) {
  const out = [];
  for (let i = 0; i + width <= flat.length; i += width) out.push(Array.from(flat.slice(i, i + width)));
  return out;
}

// series: [{xs, ys, color}]; logX/logY plot log10 of the coordinate
function plot(canvas, series, { logX = false, logY = false, xMin, xMax, yMin, yMax } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(Math.max(v, 1e-300)) : v);
  const xs = series.flatMap((s) => s.xs.map(tx));
  const ys = series.flatMap((s) => s.ys.map(ty));
  const x0 = xMin ?? Math.min(...xs), x1 = xMax ?? Math.max(...xs);
  const y0 = yMin ?? Math.min(...ys), y1 = yMax ?? Math.max(...ys);
  const sx = (v) => PAD + ((tx(v) - x0) / (x1 - x0 || 1)) * (w - 2 * PAD);
  const sy = (v) => h - PAD - ((ty(v) - y0) / (y1 - y0 || 1)) * (h - 2 * PAD);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(PAD, PAD, w - 2 * PAD, h - 2 * PAD);
  ctx.fillStyle = "#444";
  ctx.fillText((logX ? "1e" : "") + x0.toFixed(2), PAD, h - PAD + 14);
  ctx.fillText((logX ? "1e" : "") + x1.toFixed(2), w - PAD - 30, h - PAD + 14);
  ctx.fillText((logY ? "1e" : "") + y1.toFixed(2), 2, PAD + 4);
  ctx.fillText((logY ? "1e" : "") + y0.toFixed(2), 2, h - PAD);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dash ?? []);
    ctx.beginPath();
    s.xs.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(s.ys[i])) : ctx.moveTo(sx(x), sy(s.ys[i]))));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  return { sx, sy };
}

function guarded(fn) {
  return () => {
    try {
      fn();
      $("status").textContent = "";
      $("status").className = "";
    } catch (e) {
      $("status").textContent = e.message ?? String(e);
      $("status").className = "err";
    }
  };
}

const drawRateCurve = guarded(() => {
  const sigma = num("rc-sigma"), beta = num("rc-beta"), alpha = num("rc-alpha");
  $("rc-alpha-v").textContent = alpha.toFixed(2);
  const gs = gammaStar(sigma, beta);
  const r = rows(rateCurve(sigma, beta, alpha, gs / 100, gs * 100, 301), 3);
  const xs = r.map((p) => p[0]);
  plot($("rc"), [
    { xs, ys: r.map((p) => p[1]), color: COLORS[0] },
    { xs, ys: r.map((p) => p[2]), color: COLORS[1], dash: [4, 4] },
  ], { logX: true, yMin: 0, yMax: Math.max(1, ...r.map((p) => p[1])) });
  const best = r.reduce((a, b) => (b[1] < a[1] ? b : a));
  $("rc-info").textContent = `γ* = ${gs.toPrecision(4)}, min bound ${best[1].toPrecision(4)}`;
});

const drawTrajectory = guarded(() => {
  const sigma = num("tr-sigma"), beta = num("tr-beta"), alpha = num("tr-alpha");
  const gamma = gammaStar(sigma, beta) * 10 ** num("tr-gamma");
  $("tr-gamma-v").textContent = `γ = ${gamma.toPrecision(3)}`;
  $("tr-alpha-v").textContent = alpha.toFixed(2);
  const flat = worstCaseTrajectory(sigma, beta, gamma, alpha, 60);
  const rate = flat[flat.length - 1];
  const r = rows(flat.subarray(0, flat.length - 1), 3);
  const lim = Math.max(...r.map((p) => Math.max(Math.abs(p[0]), Math.abs(p[1]))));
  const { sx, sy } = plot($("tr-plane"), [{ xs: r.map((p) => p[0]), ys: r.map((p) => p[1]), color: COLORS[0] }], {
    xMin: -lim, xMax: lim, yMin: -lim, yMax: lim,
  });
  const ctx = $("tr-plane").getContext("2d");
  ctx.fillStyle = COLORS[0];
  for (const p of r) ctx.fillRect(sx(p[0]) - 2, sy(p[1]) - 2, 4, 4);
  const ks = r.map((_, k) => k);
  plot($("tr-norm"), [
    { xs: ks, ys: r.map((p) => Math.hypot(p[0], p[1])), color: COLORS[0] },
    { xs: ks, ys: r.map((p) => p[2]), color: COLORS[1], dash: [4, 4] },
  ], { logY: true });
  $("tr-info").textContent = `rate bound ${rate.toPrecision(4)}` + (rate >= 1 ? " (no contraction)" : "");
});

const NAMES = ["Lions-Mercier", "Davis-Yin", "Deng-Yin", "Ghadimi QP", "tight"];
$("cr-legend").innerHTML = NAMES.map((n, i) => `<span style="color:${COLORS[i + 1]}">${n}</span>`).join("");

const drawCompeting = guarded(() => {
  const kmax = 10 ** num("cr-kmax");
  $("cr-kmax-v").textContent = kmax.toExponential(0);
  const r = rows(competingCurves(1, kmax, 200), 6);
  const xs = r.map((p) => p[0]);
  plot($("cr"), NAMES.map((_, i) => ({
    xs, ys: r.map((p) => p[i + 1]), color: COLORS[i + 1], dash: i === 3 ? [6, 4] : [],
  })), { logX: true, yMin: 0, yMax: 1 });
});

await init();
for (const id of ["rc-sigma", "rc-beta", "rc-alpha"]) $(id).addEventListener("input", drawRateCurve);
for (const id of ["tr-sigma", "tr-beta", "tr-gamma", "tr-alpha"]) $(id).addEventListener("input", drawTrajectory);
$("cr-kmax").addEventListener("input", drawCompeting);
drawRateCurve();
drawTrajectory();
drawCompeting();
