import init, * as pf from "./pkg/perturb_forge_web.js";

const $ = (id) => document.getElementById(id);
const DEPTH_W = 160, DEPTH_H = 120;

function fill(select, values) {
  for (const v of values) select.add(new Option(v, v));
}

function report(e) {
  $("error").textContent = e ? String(e.message ?? e) : "";
}

function put(canvas, rgba, w, h) {
  canvas.width = w;
  canvas.height = h;
  canvas.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
}

function demoImage(canvas) {
  const w = 192, h = 144, ctx = canvas.getContext("2d");
  canvas.width = w;
  canvas.height = h;
  const g = ctx.createLinearGradient(0, 0, w, h);
  g.addColorStop(0, "#3a6ea5");
  g.addColorStop(1, "#f2c14e");
  ctx.fillStyle = g;
  ctx.fillRect(0, 0, w, h);
  ctx.fillStyle = "#222";
  for (let y = 0; y < h; y += 24) for (let x = (y / 24) % 2 * 24; x < w; x += 48) ctx.fillRect(x, y, 24, 24);
  ctx.fillStyle = "#e63946";
  ctx.beginPath();
  ctx.arc(w / 2, h / 2, 30, 0, 2 * Math.PI);
  ctx.fill();
}

function seed(id) {
  return BigInt(Math.max(0, parseInt($(id).value, 10) || 0));
}

function runRgb() {
  const src = $("rgb-in");
  const { width: w, height: h } = src;
  const rgba = src.getContext("2d").getImageData(0, 0, w, h).data;
  const out = pf.corrupt_image(new Uint8Array(rgba.buffer), w, h, $("rgb-kind").value, $("rgb-level").value,
    $("rgb-mode").value, seed("rgb-seed"), BigInt(parseInt($("rgb-frame").value, 10) || 0));
  put($("rgb-out"), out, w, h);
}

function runDepth() {
  put($("depth-out"), pf.corrupt_depth(DEPTH_W, DEPTH_H, $("depth-kind").value, $("depth-level").value, "static",
    seed("depth-seed")), DEPTH_W, DEPTH_H);
}

function runTrajectory() {
  const frames = Math.max(2, parseInt($("traj-frames").value, 10) || 2);
  const demo = pf.perturb_trajectory(frames, $("rot-level").value, $("trans-level").value, seed("traj-seed"));
  const clean = demo.clean(), noisy = demo.perturbed();
  const canvas = $("traj"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let lo = Infinity, hi = -Infinity;
  for (let i = 0; i < clean.length; i += 3) {
    for (const a of [clean, noisy]) {
      lo = Math.min(lo, a[i], a[i + 1]);
      hi = Math.max(hi, a[i], a[i + 1]);
    }
  }
  const s = 0.9 * Math.min(canvas.width, canvas.height) / (hi - lo || 1);
  const draw = (a, color) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    for (let i = 0; i < a.length; i += 3) {
      const x = canvas.width / 2 + s * (a[i] - (lo + hi) / 2);
      const y = canvas.height / 2 - s * (a[i + 1] - (lo + hi) / 2);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    }
    ctx.stroke();
  };
  draw(clean, "#2a9d8f");
  draw(noisy, "#e76f51");
  $("traj-metrics").textContent = `ATE ${demo.ate.toFixed(4)} m\nSR  ${demo.sr.toFixed(4)}`;
  demo.free();
}

function guarded(f) {
  return () => {
    try {
      f();
      report(null);
    } catch (e) {
      report(e);
    }
  };
}

async function main() {
  await init();
  fill($("rgb-kind"), pf.rgb_kinds());
  fill($("depth-kind"), pf.depth_kinds());
  for (const s of document.querySelectorAll("select.level")) {
    fill(s, (s.classList.contains("optional") ? ["none"] : []).concat(["low", "medium", "high"]));
  }
  demoImage($("rgb-in"));
  put($("depth-in"), pf.clean_depth(DEPTH_W, DEPTH_H), DEPTH_W, DEPTH_H);

  $("rgb-file").addEventListener("change", async (ev) => {
    const file = ev.target.files[0];
    if (!file) return;
    const bitmap = await createImageBitmap(file);
    const scale = Math.min(1, 512 / Math.max(bitmap.width, bitmap.height));
    const canvas = $("rgb-in");
    canvas.width = Math.round(bitmap.width * scale);
    canvas.height = Math.round(bitmap.height * scale);
    canvas.getContext("2d").drawImage(bitmap, 0, 0, canvas.width, canvas.height);
    guarded(runRgb)();
  });
  $("rgb-run").addEventListener("click", guarded(runRgb));
  $("depth-run").addEventListener("click", guarded(runDepth));
  $("traj-run").addEventListener("click", guarded(runTrajectory));
  guarded(runRgb)();
  guarded(runDepth)();
  guarded(runTrajectory)();
}

main().catch(report);
