import init, { solveModel, exportLp, maxcutDemo } from "./pkg/cpmilp_web.js";

const $ = (id) => document.getElementById(id);
const out = $("out");

function show(text, isError = false) {
  out.textContent = text;
  out.className = isError ? "err" : "";
}

function run(action) {
  try {
    action();
  } catch (e) {
    show(String(e.message ?? e), true);
  }
}

function solve() {
  const r = JSON.parse(solveModel($("model").value, Number($("limit").value)));
  const lines = [`status: ${r.status}`];
  if (r.objective !== null) lines.push(`objective: ${r.objective}`);
  for (const [name, v] of Object.entries(r.assignment)) lines.push(`${name} = ${v}`);
  lines.push(
    `${r.vars} vars (${r.binaries} binary), ${r.constraints} constraints, ` +
      `${r.nodes} nodes, ${r.millis.toFixed(1)} ms`,
  );
  show(lines.join("\n"));
}

function drawCut(r) {
  const svg = $("graph");
  const ns = "http://www.w3.org/2000/svg";
  svg.replaceChildren();
  const pos = [...Array(r.n).keys()].map((i) => {
    const a = (2 * Math.PI * i) / r.n - Math.PI / 2;
    return [200 * Math.cos(a), 200 * Math.sin(a)];
  });
  const maxW = Math.max(1, ...r.edges.map((e) => Math.abs(e[2])));
  for (const [u, v, w] of r.edges) {
    const line = document.createElementNS(ns, "line");
    const cut = r.side[u] !== r.side[v];
    line.setAttribute("x1", pos[u][0]);
    line.setAttribute("y1", pos[u][1]);
    line.setAttribute("x2", pos[v][0]);
    line.setAttribute("y2", pos[v][1]);
    line.setAttribute("stroke", cut ? "#d33" : "#bbb");
    line.setAttribute("stroke-width", 0.5 + (3 * Math.abs(w)) / maxW);
    if (w < 0) line.setAttribute("stroke-dasharray", "4 3");
    const title = document.createElementNS(ns, "title");
    title.textContent = `${u}-${v}: ${w}${cut ? " (cut)" : ""}`;
    line.append(title);
    svg.append(line);
  }
  pos.forEach(([x, y], i) => {
    const c = document.createElementNS(ns, "circle");
    c.setAttribute("cx", x);
    c.setAttribute("cy", y);
    c.setAttribute("r", 11);
    c.setAttribute("fill", r.side[i] ? "#2a6fdb" : "#f2b705");
    const label = document.createElementNS(ns, "text");
    label.setAttribute("x", x);
    label.setAttribute("y", y + 4);
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("font-size", "11");
    label.setAttribute("fill", "#fff");
    label.textContent = i;
    svg.append(c, label);
  });
}

function maxcut() {
  const r = JSON.parse(
    maxcutDemo(Number($("n").value), Number($("density").value), Number($("seed").value), Number($("limit").value)),
  );
  const check = r.brute_force === null ? "" : `, brute force ${r.brute_force}`;
  $("cutinfo").textContent =
    `${r.status}: cut weight ${r.cut}${check}; ${r.edges.length} edges, ${r.nodes} nodes, ` +
    `${r.millis.toFixed(1)} ms. Red edges cross the cut, dashed edges have negative weight.`;
  drawCut(r);
}

await init();
show("Ready.");
$("solve").onclick = () => run(solve);
$("export").onclick = () => run(() => show(exportLp($("model").value)));
$("cut").onclick = () => run(maxcut);
