import init, { train_curve, knapsack, ladder } from "./pkg/relsvm_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(out, fn) {
  out.classList.remove("err");
  try {
    return fn();
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message || e);
    return null;
  }
}

// series: [{points: [[x, y]], color, step}]
function plot(canvas, series, xlabel, ylabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 44;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.points);
  if (all.length === 0) return;
  let [x0, x1] = [Math.min(...all.map((p) => p[0])), Math.max(...all.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...all.map((p) => p[1])), Math.max(...all.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (y) => h - pad + ((y0 - y) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px system-ui";
  ctx.fillText(y1.toPrecision(4), 2, pad + 4);
  ctx.fillText(y0.toPrecision(4), 2, h - pad);
  ctx.fillText(String(x0.toPrecision(3)), pad, h - pad + 16);
  ctx.fillText(String(x1.toPrecision(3)), w - pad - 30, h - pad + 16);
  ctx.fillText(xlabel, w / 2 - 20, h - 8);
  ctx.fillText(ylabel, pad + 4, pad - 8);
  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.points.forEach(([x, y], i) => {
      if (s.step && i > 0) ctx.lineTo(sx(x), sy(s.points[i - 1][1]));
      i === 0 ? ctx.moveTo(sx(x), sy(y)) : ctx.lineTo(sx(x), sy(y));
    });
    ctx.stroke();
  }
}

function runTrain() {
  const out = $("t-out");
  const r = show(out, () => JSON.parse(train_curve(
    num("t-d"), num("t-m"), num("t-n"), num("t-margin"), num("t-noise"), BigInt(num("t-seed")),
    num("t-lambda"), num("t-eps"), num("t-steps"), $("t-mode").value)));
  if (!r) return;
  plot($("t-plot"), [{ points: r.fhat.map((f, t) => [t, f]), color: "#1f5fbf" }], "step", "F̂");
  out.textContent =
    `|J| = ${r.join_size}, best step ${r.selected}, F̂ = ${r.fhat_hat.toFixed(6)}` +
    (r.objective === null ? ", exact F skipped" : `, exact F = ${r.objective.toFixed(6)}`) +
    `\nβ̂ = [${r.beta_hat.map((b) => b.toFixed(4)).join(", ")}]` +
    `\nlargest distribution: ${r.peak_dist_size} entries`;
}

function runKnapsack() {
  const out = $("k-out");
  const r = show(out, () => JSON.parse(knapsack($("k-w").value, num("k-l"), BigInt(num("k-k")))));
  if (!r) return;
  out.textContent =
    `${r.items} items, |J| = ${r.join_size}\n` +
    `fitting subsets: ${r.fitting_subsets}\nG2 = ${r.g2} (${r.sign}; fitting subsets minus k = ${r.fitting_subsets - r.k})`;
}

function runLadder() {
  const out = $("q-out");
  const r = show(out, () => JSON.parse(ladder(
    num("q-d"), num("q-m"), num("q-n"), BigInt(num("q-seed")), num("q-eps"), num("q-label"), $("q-mode").value)));
  if (!r) return;
  const series = [{ points: r.thresholds.map((t, i) => [t, r.targets[i]]), color: "#1f5fbf", step: true }];
  if (r.exact) series.push({ points: r.thresholds.map((t, i) => [t, r.exact[i]]), color: "#c0392b" });
  plot($("q-plot"), series, "threshold", "rows at or above");
  out.textContent =
    `|J| = ${r.join_size}, rows with this label = ${r.n_label}, ratio 1 + ${r.step.toFixed(4)}, ` +
    `${r.thresholds.length} rungs` + (r.exact ? "\nblue: ladder targets, red: exact counts" : "\nexact counts skipped");
}

await init();
$("t-run").onclick = runTrain;
$("k-run").onclick = runKnapsack;
$("q-run").onclick = runLadder;
runTrain();
runKnapsack();
runLadder();
