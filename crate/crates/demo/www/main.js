import init, { cluster, anneal_trace, n_convergence } from "./pkg/cohort_forge_demo.js";

const $ = (id) => document.getElementById(id);

function numbers(fieldset) {
  const out = {};
  for (const input of fieldset.querySelectorAll("input")) out[input.name] = Number(input.value);
  return out;
}

function request(extra) {
  const p = numbers($("params"));
  const { max_size, mc_runs, seed, ...network } = p;
  return JSON.stringify({ network: { ...network, seed }, max_size, mc_runs, seed, ...extra });
}

// Run an export, show its summary, and hand the parsed result to a plotter.
function run(fn, req, outId, plot) {
  const out = $(outId);
  out.className = "";
  out.textContent = "running...";
  // let the status paint before the synchronous call blocks
  setTimeout(() => {
    try {
      const t = performance.now();
      const result = JSON.parse(fn(req));
      out.textContent = plot(result) + `\n(${(performance.now() - t).toFixed(0)} ms)`;
    } catch (e) {
      out.className = "error";
      out.textContent = String(e);
    }
  }, 10);
}

function axes(canvas, xs, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 48;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.ys);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (lo === hi) { lo -= 1; hi += 1; }
  const x0 = Math.min(...xs), x1 = Math.max(...xs, x0 + 1);
  const px = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (y) => h - pad + ((lo - y) / (hi - lo)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(hi.toFixed(1), 2, pad + 4);
  ctx.fillText(lo.toFixed(1), 2, h - pad);
  ctx.fillText(String(x0), pad, h - pad + 14);
  ctx.fillText(String(x1), w - pad - 24, h - pad + 14);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.ys.forEach((y, i) => (i ? ctx.lineTo(px(xs[i]), py(y)) : ctx.moveTo(px(xs[i]), py(y))));
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, w - pad - 140, pad + 14 + 14 * k);
  });
  return { ctx, px, py };
}

function plotCluster(r) {
  const canvas = $("cluster-plot");
  const scores = r.best_choice.scores;
  const runs = scores.map((_, i) => i + 1);
  const { ctx, py } = axes(canvas, runs, [
    { ys: scores, color: "#1f77b4", label: "S_T per run" },
    { ys: scores.map(() => r.planted_score), color: "#2ca02c", label: "planted partition" },
  ]);
  ctx.strokeStyle = "#d62728";
  ctx.beginPath();
  ctx.moveTo(48, py(r.best_choice.best));
  ctx.lineTo(canvas.width - 48, py(r.best_choice.best));
  ctx.stroke();
  const bc = r.best_choice;
  return `${r.entities} entities, ${r.sections} sections, ${r.edges} edges\n` +
    `best S_T ${bc.best} (run ${bc.best_run + 1}), mean ${bc.mean.toFixed(2)}, std ${bc.std.toFixed(2)}\n` +
    `planted partition S_T ${r.planted_score}\n` +
    `${r.communities} communities, sizes ${r.sizes.join(" ")}`;
}

function plotAnneal(r) {
  axes($("anneal-plot"), r.move_index, [
    { ys: r.current, color: "#ff7f0e", label: "current S_T" },
    { ys: r.best, color: "#1f77b4", label: "best S_T" },
  ]);
  return `T0 ${r.t0.toFixed(3)}${r.t0_clamped ? " (floor)" : ""}, ${r.cooling_steps} cooling steps, ${r.moves} moves\n` +
    `accepted ${r.accepted}, rejected ${r.rejected}\n` +
    `S_T ${r.start_score} -> best ${r.refined_score}, last ${r.last_score}`;
}

function plotConvergence(r) {
  axes($("converge-plot"), r.n, [
    { ys: r.mean_trial_cost, color: "#9467bd", label: "mean trial cost" },
    { ys: r.n.map(() => r.initial_cost), color: "#7f7f7f", label: "initial cost" },
  ]);
  const last = r.mean_trial_cost[r.mean_trial_cost.length - 1];
  return `initial cost ${r.initial_cost}, mean trial cost after N=${r.n[r.n.length - 1]}: ${last.toFixed(2)}`;
}

await init();
$("run-cluster").onclick = () => run(cluster, request({}), "cluster-out", plotCluster);
$("run-anneal").onclick = () => run(anneal_trace, request({ sa: numbers($("sa")) }), "anneal-out", plotAnneal);
$("run-converge").onclick = () =>
  run(n_convergence, request({ max_n: Number($("max-n").value) }), "converge-out", plotConvergence);
