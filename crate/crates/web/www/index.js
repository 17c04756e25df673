import init, { sum_dimension, render_product_svg, projection_profile } from "./pkg/resonance_web.js";

const $ = (id) => document.getElementById(id);

// Scatter plot with optional reference line y = ref.
function plot(canvas, xs, ys, ref, xlabel, ylabel) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  ctx.clearRect(0, 0, w, h);
  const all = ref === null ? ys : ys.concat([ref]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...all), Math.max(...all)];
  if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
  const px = (x) => pad + (x - x0) / (x1 - x0 || 1) * (w - 2 * pad);
  const py = (y) => h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(xlabel, w / 2 - 20, h - 8);
  ctx.fillText(ylabel, 4, pad - 8);
  ctx.fillText(y0.toFixed(3), 2, py(y0));
  ctx.fillText(y1.toFixed(3), 2, py(y1) + 10);
  if (ref !== null) {
    ctx.strokeStyle = "#c33";
    ctx.beginPath();
    ctx.moveTo(pad, py(ref));
    ctx.lineTo(w - pad, py(ref));
    ctx.stroke();
  }
  ctx.fillStyle = "#1f4e9c";
  xs.forEach((x, i) => {
    ctx.beginPath();
    ctx.arc(px(x), py(ys[i]), 3, 0, 2 * Math.PI);
    ctx.fill();
  });
}

function guard(out, f) {
  try {
    f();
  } catch (e) {
    out.innerHTML = `<span class="err">${e}</span>`;
  }
}

function measureSum() {
  guard($("sum-out"), () => {
    const r = JSON.parse(sum_dimension($("sum-a").value, $("sum-b").value, $("sum-s").value,
      +$("sum-kmin").value, +$("sum-kmax").value));
    const xs = r.rows.map((row) => -Math.log(row.delta));
    const ys = r.rows.map((row) => Math.log(row.count));
    plot($("sum-plot"), xs, ys, null, "log 1/delta", "log N");
    $("sum-out").textContent =
      `slope            ${r.slope.toFixed(5)} ± ${r.stderr.toExponential(2)}\n` +
      `dim + dim        ${r.dimension_sum.toFixed(5)}\n` +
      `resonant         ${r.resonant}\n\n` +
      r.rows.map((row) => `k=${row.k}  N=${row.count}`).join("\n");
  });
}

function drawProduct() {
  guard($("prod-svg"), () => {
    $("prod-svg").innerHTML = render_product_svg($("prod-a").value, $("prod-b").value, +$("prod-depth").value);
  });
}

function runProfile() {
  guard($("pl-out"), () => {
    const r = JSON.parse(projection_profile(+$("pl-n").value, +$("pl-zeta").value, +$("pl-theta").value,
      +$("pl-steps").value, 3, 7));
    $("pl-svg").innerHTML = r.svg;
    const expected = Math.min(r.similarity_dimension, 1);
    plot($("pl-plot"), r.points.map((p) => p.xi), r.points.map((p) => p.value), expected, "direction", "slope");
    const vals = r.points.map((p) => p.value);
    $("pl-out").textContent =
      `similarity dimension ${r.similarity_dimension.toFixed(4)}; dense rotations: ${r.dense}\n` +
      `profile min ${Math.min(...vals).toFixed(4)}, max ${Math.max(...vals).toFixed(4)}`;
  });
}

await init();
$("sum-go").onclick = measureSum;
$("prod-go").onclick = drawProduct;
$("pl-go").onclick = runProfile;
measureSum();
drawProduct();
