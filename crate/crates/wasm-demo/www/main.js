import init, { length_pdf, stationary_acf, power_spectrum } from "./pkg/varlen_spectrum_wasm.js";

const $ = (id) => document.getElementById(id);

function plot(canvas, x, series, { log = false } = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const tf = (v) => (log ? Math.log10(Math.max(v, 1e-8)) : v);
  let lo = Infinity, hi = -Infinity;
  for (const s of series) for (const v of s.y) { lo = Math.min(lo, tf(v)); hi = Math.max(hi, tf(v)); }
  if (!log) lo = Math.min(lo, 0);
  if (hi <= lo) hi = lo + 1;
  const x0 = x[0], x1 = x[x.length - 1];
  const px = (v) => pad + ((v - x0) / (x1 - x0)) * (w - 2 * pad);
  const py = (v) => h - pad + ((lo - tf(v)) / (hi - lo)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad / 2, w - 2 * pad, h - 1.5 * pad);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toFixed(2), pad, h - pad / 2);
  ctx.fillText(x1.toFixed(2), w - pad - 24, h - pad / 2);
  ctx.fillText(log ? `1e${hi.toFixed(0)}` : hi.toPrecision(3), 2, pad / 2 + 8);
  ctx.fillText(log ? `1e${lo.toFixed(0)}` : lo.toPrecision(3), 2, h - pad);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.y.forEach((v, i) => (i ? ctx.lineTo(px(x[i]), py(v)) : ctx.moveTo(px(x[i]), py(v))));
    ctx.stroke();
  }
}

function redraw() {
  const db = Number($("snr").value);
  const tauMax = Number($("tau").value);
  $("snr-value").textContent = `${db} dB`;
  try {
    const pdf = length_pdf(db, 600);
    plot($("pdf"), pdf.x, [{ y: pdf.y, color: "#1f5fbf" }]);

    const acf = stationary_acf(db, tauMax, 400);
    plot($("acf"), acf.x, [
      { y: acf.reference, color: "#c0392b" },
      { y: acf.y, color: "#1f5fbf" },
    ]);

    const psd = power_spectrum(db, 6);
    plot($("psd"), psd.x, [
      { y: psd.reference, color: "#c0392b" },
      { y: psd.y, color: "#1f5fbf" },
    ], { log: $("logscale").checked });

    $("status").textContent =
      `L = ${pdf.threshold_l.toFixed(3)}   95% occupied bandwidth: ` +
      `${psd.obw.toFixed(3)} (fixed length ${psd.reference_obw.toFixed(3)})`;
  } catch (e) {
    $("status").textContent = `error: ${e.message ?? e}`;
  }
}

await init();
for (const id of ["snr", "tau", "logscale"]) $(id).addEventListener("input", redraw);
redraw();
