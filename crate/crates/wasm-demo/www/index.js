import init, { block_encode, transform, tanh_fit } from "./pkg/ntca_wasm.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => x.toFixed(6);
const cfmt = (z) => `${fmt(z[0])} ${z[1] < 0 ? "-" : "+"} ${fmt(Math.abs(z[1]))}i`;

function guard(out, f) {
  try {
    f();
  } catch (e) {
    $(out).innerHTML = `<p class="err">${e}</p>`;
  }
}

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const body = rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
  return `<table><tr>${th}</tr>${body}</table>`;
}

function encode() {
  const r = JSON.parse(block_encode($("be-input").value, $("be-part").value));
  const spectrum = r.spectrum.slice().sort((a, b) => a - b);
  $("be-out").innerHTML =
    `<p>${r.width} qubits, ${r.queries.u} queries to U, Hermiticity residual ${r.hermiticity_residual.toExponential(2)}</p>` +
    `<p>targets: ${r.targets.map(fmt).join(", ")}</p>` +
    `<pre>${spectrum.map(fmt).join("  ")}</pre>`;
}

function run() {
  const eps = parseFloat($("tr-eps").value);
  const r = JSON.parse(transform($("tr-input").value, $("tr-p").value, $("tr-q").value, eps));
  const rows = r.expected.map((e, k) => [k, cfmt(e), cfmt(r.output[k])]);
  $("tr-out").innerHTML =
    `<p>success probability ${fmt(r.success_probability)}, fidelity ${r.fidelity.toFixed(9)}, ` +
    `max error ${r.max_point_error.toExponential(2)} (bound ${r.error_bound.toExponential(2)}), ` +
    `${r.flag_qubits} flag qubits</p>` +
    table(["k", "exact", "prepared"], rows);
}

function plot(r) {
  const c = $("fit-plot");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const sx = (x) => ((x + 1) / 2) * (c.width - 20) + 10;
  const sy = (y) => c.height / 2 - y * (c.height / 2 - 10);
  const line = (ys, colour) => {
    g.strokeStyle = colour;
    g.beginPath();
    r.xs.forEach((x, i) => (i ? g.lineTo(sx(x), sy(ys[i])) : g.moveTo(sx(x), sy(ys[i]))));
    g.stroke();
  };
  g.strokeStyle = "#ddd";
  g.beginPath();
  g.moveTo(sx(-1), sy(0));
  g.lineTo(sx(1), sy(0));
  g.stroke();
  line(r.target, "#999");
  line(r.fit, "#c33");
  const scale = Math.max(...r.fit.map((f, i) => Math.abs(f - r.target[i]))) || 1;
  line(r.fit.map((f, i) => (0.8 * (f - r.target[i])) / scale), "#36c");
}

function fit() {
  const r = JSON.parse(tanh_fit(parseFloat($("fit-eps").value), $("fit-method").value));
  $("fit-out").innerHTML =
    `<p>degree ${r.degree}, certified error ${r.certified_error.toExponential(2)}. ` +
    `grey tanh, red fit, blue error rescaled to the plot</p>`;
  plot(r);
}

await init();
$("be-run").onclick = () => guard("be-out", encode);
$("tr-run").onclick = () => guard("tr-out", run);
$("fit-run").onclick = () => guard("fit-out", fit);
guard("be-out", encode);
guard("fit-out", fit);
