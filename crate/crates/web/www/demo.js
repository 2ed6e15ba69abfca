import init, { tile_demo, marker_demo, perturb_demo } from "./pkg/ergowin_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// label -> colour, stable per label
function hue(label) {
  return `hsl(${(label * 137.508) % 360} 55% 60%)`;
}

function drawTiling() {
  const side = num("t-side");
  let v;
  try {
    v = tile_demo(side, num("t-eta"), num("t-k"), BigInt(num("t-seed")));
  } catch (e) {
    $("t-stats").textContent = String(e);
    return;
  }
  const canvas = $("t-canvas");
  const ctx = canvas.getContext("2d");
  const cell = canvas.width / side;
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const labels = v.labels();
  for (let i = 0; i < labels.length; i++) {
    if (labels[i] === 0) continue;
    ctx.fillStyle = hue(labels[i]);
    ctx.fillRect((i % side) * cell, Math.floor(i / side) * cell, Math.ceil(cell), Math.ceil(cell));
  }
  $("t-stats").textContent =
    `tiles ${v.tiles}   shapes ${v.shapes}   interior density ${v.interior_density.toFixed(4)}   disjoint ${v.disjoint}`;
  v.free();
}

const MARKER_COLOURS = ["#f4f4f4", "#222", "#8ab6e8", "#f2c66d"];

function drawMarker() {
  let v;
  try {
    v = marker_demo(num("m-n"), num("m-s"), num("m-delta"), num("m-i"));
  } catch (e) {
    $("m-stats").textContent = String(e);
    return;
  }
  const canvas = $("m-canvas");
  const ctx = canvas.getContext("2d");
  const side = v.side;
  const cell = canvas.width / side;
  const cells = v.cells();
  for (let i = 0; i < cells.length; i++) {
    ctx.fillStyle = MARKER_COLOURS[Math.min(cells[i], 3)];
    ctx.fillRect((i % side) * cell, Math.floor(i / side) * cell, Math.ceil(cell), Math.ceil(cell));
  }
  $("m-i").max = v.count;
  $("m-stats").textContent =
    `markers ${v.count}   |D0| ${v.d0}   unique in D⁻¹D ${v.unique}\n` +
    `black = 1, blue = 2, yellow = guard (no 1 allowed)`;
  v.free();
}

function drawNoise() {
  const len = 512;
  let v;
  try {
    v = perturb_demo(num("p-p"), num("p-eps"), len, BigInt(num("p-seed")));
  } catch (e) {
    $("p-stats").textContent = String(e);
    return;
  }
  const ctx = $("p-canvas").getContext("2d");
  const rows = [v.before(), v.after()];
  rows.forEach((row, r) => {
    for (let i = 0; i < len; i++) {
      ctx.fillStyle = row[i] === 1 ? "#222" : "#eee";
      ctx.fillRect(i, r * 20, 1, 19);
    }
  });
  $("p-stats").textContent =
    `top: x, bottom: x after noise\n` +
    `ĥ before ${v.h_before.toFixed(4)}   after ${v.h_after.toFixed(4)}   ĥ + ε(1 − ĥ) = ${v.bound.toFixed(4)}`;
  v.free();
}

await init();
$("t-run").onclick = drawTiling;
$("m-run").onclick = drawMarker;
$("p-run").onclick = drawNoise;
drawTiling();
drawMarker();
drawNoise();
