import init, { simulate_batch, explore_search, amplification_curve } from "./pkg/rallyline_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function run(outId, f) {
  const out = $(outId);
  out.classList.remove("err");
  out.textContent = "running…";
  setTimeout(() => {
    try {
      f(out);
    } catch (e) {
      out.classList.add("err");
      out.textContent = String(e.message || e);
    }
  }, 10);
}

function clear(canvas) {
  const g = canvas.getContext("2d");
  g.clearRect(0, 0, canvas.width, canvas.height);
  g.font = "12px system-ui";
  return g;
}

function bars(canvas, labels, values, maxValue, color) {
  const g = clear(canvas);
  const pad = 24, w = (canvas.width - 2 * pad) / labels.length, h = canvas.height - 2 * pad;
  labels.forEach((label, i) => {
    const v = values[i] ?? 0, bh = (h * v) / maxValue;
    g.fillStyle = color;
    g.fillRect(pad + i * w + 3, pad + h - bh, w - 6, bh);
    g.fillStyle = "#333";
    g.textAlign = "center";
    g.fillText(label, pad + i * w + w / 2, canvas.height - 6);
    if (v > 0) g.fillText(v.toFixed(1), pad + i * w + w / 2, pad + h - bh - 4);
  });
}

function lines(canvas, xs, series) {
  const g = clear(canvas);
  const pad = 36, w = canvas.width - 2 * pad, h = canvas.height - 2 * pad;
  const xmax = Math.max(...xs) || 1;
  const x = (v) => pad + (w * v) / xmax, y = (v) => pad + h - (h * v) / 100;
  g.strokeStyle = "#ccc";
  g.strokeRect(pad, pad, w, h);
  g.fillStyle = "#333";
  [0, 50, 100].forEach((t) => g.fillText(`${t}%`, 4, y(t) + 4));
  g.textAlign = "center";
  xs.forEach((v) => g.fillText(v.toFixed(2), x(v), canvas.height - 8));
  series.forEach(({ values, color, name }, k) => {
    g.strokeStyle = color;
    g.lineWidth = 2;
    g.beginPath();
    values.forEach((v, i) => (i ? g.lineTo(x(xs[i]), y(v)) : g.moveTo(x(xs[i]), y(v))));
    g.stroke();
    g.fillStyle = color;
    g.textAlign = "left";
    g.fillText(name, pad + 8, pad + 16 + 16 * k);
  });
}

await init();

$("b-run").onclick = () =>
  run("b-out", (out) => {
    const v = JSON.parse(simulate_batch(num("b-edge"), num("b-matches"), num("b-seed")));
    out.textContent =
      `point win ${v.point_win_rate.toFixed(2)}%   match win ${v.match_win_rate.toFixed(2)}% ` +
      `(95% CI ${v.match_win_ci[0].toFixed(1)}–${v.match_win_ci[1].toFixed(1)})\nrally length distribution (% of points):`;
    bars($("b-chart"), v.rally_labels, v.rally_percent, Math.max(...v.rally_percent), "#4a7bb7");
  });

$("s-run").onclick = () =>
  run("s-out", (out) => {
    const v = JSON.parse(explore_search(num("s-edge"), num("s-incoming"), num("s-iter"), num("s-c"), 7));
    out.textContent =
      `chosen direction ${v.choice}\n` +
      v.children
        .map((c) => `  ${c.direction}: ${c.visits} visits, value ${c.value == null ? "–" : c.value.toFixed(3)}`)
        .join("\n");
    bars($("s-chart"), v.children.map((c) => `dir ${c.direction}`), v.children.map((c) => (100 * c.visits) / v.iterations), 100, "#c77d2e");
  });

$("c-run").onclick = () =>
  run("c-out", (out) => {
    const rows = JSON.parse(amplification_curve(num("c-max"), num("c-steps"), num("c-matches"), 11));
    out.textContent = rows
      .map((r) => `edge ${r.edge.toFixed(3)}: points ${r.point_win_rate.toFixed(2)}%, matches ${r.match_win_rate.toFixed(2)}%`)
      .join("\n");
    lines($("c-chart"), rows.map((r) => r.edge), [
      { name: "point win %", color: "#4a7bb7", values: rows.map((r) => r.point_win_rate) },
      { name: "match win %", color: "#b74a4a", values: rows.map((r) => r.match_win_rate) },
    ]);
  });
