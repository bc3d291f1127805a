import init, { DemoSession, refineGrid, gridCoverage, cellAreaProfile } from "./pkg/viewsphere_wasm.js";

const RAW = "#2f6fd6";
const ADDED = "#d64040";
const EMPTY = "#f3f3f3";
const TICK_MS = 20;

const $ = (id) => document.getElementById(id);

function drawGrid(ctx, nTheta, nPhi, raw, refined) {
  const { width, height } = ctx.canvas;
  const cw = width / nTheta, ch = height / nPhi;
  for (let p = 0; p < nPhi; p++) {
    for (let t = 0; t < nTheta; t++) {
      const i = p * nTheta + t;
      ctx.fillStyle = raw[i] === "1" ? RAW : refined && refined[i] === "1" ? ADDED : EMPTY;
      // row 0 is the southernmost band, drawn at the bottom
      ctx.fillRect(t * cw, (nPhi - 1 - p) * ch, cw - 1, ch - 1);
    }
  }
}

function toMap(canvas, yaw, pitch) {
  return [((yaw + 180) / 360) * canvas.width, ((90 - pitch) / 180) * canvas.height];
}

function wrapYaw(y) {
  const w = ((y + 180) % 360 + 360) % 360 - 180;
  return w === -180 ? 180 : w;
}

// ---------- live session ----------

const live = {
  session: null,
  nTheta: 36,
  nPhi: 18,
  t: 0,
  yaw: 0,
  pitch: 0,
  prev: [0, 0],
  state: null,
  auto: null,
};

function newSession() {
  const [nt, np] = $("grid").value.split("x").map(Number);
  live.nTheta = nt;
  live.nPhi = np;
  live.session?.free();
  live.session = new DemoSession(nt, np);
  live.t = 0;
  live.yaw = 0;
  live.pitch = 0;
  live.prev = [0, 0];
  live.state = null;
  live.auto = null;
  $("spiral").textContent = "auto spiral";
}

function step(dtMs) {
  live.t += dtMs;
  const dYaw = wrapYaw(live.yaw - live.prev[0]);
  const dPitch = live.pitch - live.prev[1];
  live.prev = [live.yaw, live.pitch];
  const gyro = (Math.hypot(dYaw, dPitch) * Math.PI / 180) / (dtMs / 1000);
  const accel = Number($("accel").value);
  live.state = JSON.parse(live.session.step(live.t, live.yaw, live.pitch, accel, gyro));
}

function advanceAuto() {
  // 12°/s yaw, pole-to-pole over 36 turns, fast-forwarded 8×
  const a = live.auto;
  for (let k = 0; k < 8; k++) {
    if (a.settle > 0) {
      a.settle -= TICK_MS;
    } else {
      a.yaw += 12 * TICK_MS / 1000;
      a.pitch = Math.min(89.9, -89.9 + (a.yaw / (36 * 360)) * 179.8);
    }
    live.yaw = wrapYaw(a.yaw);
    live.pitch = a.pitch;
    step(TICK_MS);
    if (a.pitch >= 89.9) {
      live.auto = null;
      $("spiral").textContent = "auto spiral";
      break;
    }
  }
}

function renderLive() {
  const canvas = $("map");
  const ctx = canvas.getContext("2d");
  drawGrid(ctx, live.nTheta, live.nPhi, live.session.rawBits(), live.session.refinedBits());
  const [x, y] = toMap(canvas, live.yaw, live.pitch);
  ctx.strokeStyle = "#000";
  ctx.beginPath();
  ctx.arc(x, y, 7, 0, 2 * Math.PI);
  ctx.moveTo(x - 11, y); ctx.lineTo(x + 11, y);
  ctx.moveTo(x, y - 11); ctx.lineTo(x, y + 11);
  ctx.stroke();

  const st = live.state;
  if (!st) return;
  if (st.hint_yaw_deg !== null) {
    const [hx, hy] = toMap(canvas, wrapYaw(live.yaw + st.hint_yaw_deg), live.pitch + st.hint_pitch_deg);
    ctx.strokeStyle = "#f4a00d";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, y); ctx.lineTo(hx, hy);
    ctx.stroke();
    ctx.lineWidth = 1;
  }
  const gate = $("gate");
  gate.textContent = st.gate_status;
  gate.className = "badge " + st.gate_status;
  $("coverage").textContent = st.coverage_pct.toFixed(2) + " %";
  $("pose").textContent = `${live.yaw.toFixed(0)}° / ${live.pitch.toFixed(0)}°`;
  $("hint").textContent = st.hint_yaw_deg === null
    ? (st.coverage_pct >= 100 ? "complete" : "-")
    : `yaw ${st.hint_yaw_deg.toFixed(0)}°, pitch ${st.hint_pitch_deg.toFixed(0)}°`;
  canvas.classList.toggle("flash", st.captured);
}

function setupLive() {
  const canvas = $("map");
  let dragging = false;
  const aim = (ev) => {
    const r = canvas.getBoundingClientRect();
    live.yaw = wrapYaw(((ev.clientX - r.left) / r.width) * 360 - 180);
    live.pitch = Math.max(-89.9, Math.min(90, 90 - ((ev.clientY - r.top) / r.height) * 180));
  };
  canvas.addEventListener("pointerdown", (ev) => { dragging = true; live.auto = null; aim(ev); });
  canvas.addEventListener("pointermove", (ev) => { if (dragging) aim(ev); });
  window.addEventListener("pointerup", () => { dragging = false; });
  $("accel").addEventListener("input", () => { $("accel-val").textContent = Number($("accel").value).toFixed(2); });
  $("grid").addEventListener("change", newSession);
  $("reset").addEventListener("click", newSession);
  $("spiral").addEventListener("click", () => {
    if (live.auto) {
      live.auto = null;
      $("spiral").textContent = "auto spiral";
      return;
    }
    live.auto = { yaw: 0, pitch: -89.9, settle: 1000 };
    live.yaw = 0;
    live.pitch = -89.9;
    $("spiral").textContent = "stop";
  });

  newSession();
  setInterval(() => {
    if (live.auto) advanceAuto();
    else step(TICK_MS);
    renderLive();
  }, TICK_MS);
}

// ---------- refinement playground ----------

const PAINT_THETA = 36, PAINT_PHI = 18, POLE_ZONE = 30;
let paintBits = Array(PAINT_THETA * PAINT_PHI).fill("0");

function renderPaint() {
  const raw = paintBits.join("");
  const refined = refineGrid(PAINT_THETA, PAINT_PHI, POLE_ZONE, raw);
  drawGrid($("paint").getContext("2d"), PAINT_THETA, PAINT_PHI, raw, refined);
  $("paint-cov").textContent = gridCoverage(PAINT_THETA, PAINT_PHI, raw).toFixed(2) + " %";
  const count = (s) => [...s].filter((c) => c === "1").length;
  $("paint-count").textContent = `${count(raw)} / ${count(refined)}`;
}

function setupPaint() {
  const canvas = $("paint");
  canvas.addEventListener("click", (ev) => {
    const r = canvas.getBoundingClientRect();
    const t = Math.floor(((ev.clientX - r.left) / r.width) * PAINT_THETA);
    const p = PAINT_PHI - 1 - Math.floor(((ev.clientY - r.top) / r.height) * PAINT_PHI);
    const i = p * PAINT_THETA + t;
    paintBits[i] = paintBits[i] === "1" ? "0" : "1";
    renderPaint();
  });
  $("paint-clear").addEventListener("click", () => {
    paintBits.fill("0");
    renderPaint();
  });
  renderPaint();
}

// ---------- area profile ----------

function renderAreas() {
  const canvas = $("areas");
  const ctx = canvas.getContext("2d");
  const prof = cellAreaProfile(36, 18);
  const max = Math.max(...prof);
  const bw = canvas.width / prof.length;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.font = "10px system-ui";
  prof.forEach((a, p) => {
    const h = (a / max) * (canvas.height - 20);
    ctx.fillStyle = RAW;
    ctx.fillRect(p * bw + 1, canvas.height - 14 - h, bw - 2, h);
    ctx.fillStyle = "#444";
    ctx.fillText(String(-90 + p * 10), p * bw + 2, canvas.height - 2);
  });
}

await init();
setupLive();
setupPaint();
renderAreas();
