import init, { constants, classify, spiralOrbit } from "./pkg/lane_emden_wasm.js";

function values(form) {
  const out = {};
  for (const input of form.querySelectorAll("input")) {
    out[input.name] = Number(input.value);
  }
  return out;
}

function show(el, fn) {
  try {
    const result = JSON.parse(fn());
    el.classList.remove("error");
    el.textContent = JSON.stringify(result, null, 2);
    return result;
  } catch (e) {
    el.classList.add("error");
    el.textContent = String(e.message ?? e);
    return null;
  }
}

function bind(id, handler) {
  const form = document.getElementById(id);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    handler(values(form));
  });
  handler(values(form));
}

function axes(ctx, w, h) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#bbb";
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.moveTo(w / 2, 0);
  ctx.lineTo(w / 2, h);
  ctx.stroke();
}

function circle(ctx, cx, cy, r, color) {
  ctx.strokeStyle = color;
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.arc(cx, cy, r, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawPlane(orbit) {
  const canvas = document.getElementById("plane");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  axes(ctx, w, h);
  const scale = (0.45 * w) / orbit.rho_max;
  circle(ctx, w / 2, h / 2, orbit.rho_min * scale, "#c66");
  circle(ctx, w / 2, h / 2, orbit.rho_max * scale, "#c66");
  ctx.strokeStyle = "#248";
  ctx.beginPath();
  orbit.v1.forEach((x, i) => {
    const px = w / 2 + x * scale;
    const py = h / 2 - orbit.v2[i] * scale;
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}

function drawRadius(orbit) {
  const canvas = document.getElementById("radius");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const t0 = orbit.t[0];
  const t1 = orbit.t[orbit.t.length - 1];
  const x = (t) => 30 + ((t - t0) / (t1 - t0)) * (w - 40);
  const y = (r) => h - 20 - (r / (1.1 * orbit.rho_max)) * (h - 40);
  ctx.strokeStyle = "#c66";
  ctx.setLineDash([4, 4]);
  for (const r of [orbit.rho_min, orbit.rho_max]) {
    ctx.beginPath();
    ctx.moveTo(x(t0), y(r));
    ctx.lineTo(x(t1), y(r));
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.strokeStyle = "#248";
  ctx.beginPath();
  orbit.t.forEach((t, i) => {
    if (i === 0) ctx.moveTo(x(t), y(orbit.rho[i]));
    else ctx.lineTo(x(t), y(orbit.rho[i]));
  });
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText("|v| against t = -log|x|", 34, 14);
}

await init();

bind("constants-form", ({ n, m, alpha }) => {
  show(document.getElementById("constants-out"), () => constants(n, m, alpha));
});

bind("classify-form", ({ n, kappa, kappaStar, tol }) => {
  show(document.getElementById("classify-out"), () => classify(n, kappa, kappaStar, tol));
});

bind("spiral-form", ({ n, kappa, kappaStar, span }) => {
  const out = document.getElementById("spiral-out");
  const orbit = show(out, () => spiralOrbit(n, kappa, kappaStar, span, 2000));
  if (orbit) {
    out.textContent = `band [${orbit.rho_min.toFixed(7)}, ${orbit.rho_max.toFixed(7)}], period ${orbit.period.toFixed(5)}`;
    drawPlane(orbit);
    drawRadius(orbit);
  }
});
