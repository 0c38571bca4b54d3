import init, { flux_rotation, star_modes, flux_group } from "./pkg/starflux_web.js";

const val = (id) => document.getElementById(id).value;
const order = () => Number(val("k"));

function show(id, f) {
  const out = document.getElementById(id);
  try {
    out.textContent = JSON.stringify(JSON.parse(f()), null, 2);
  } catch (e) {
    out.textContent = "error: " + e;
  }
}

await init();
document.getElementById("flux").onclick = () => show("flux-out", () => flux_rotation(val("v"), val("omega"), order()));
document.getElementById("star").onclick = () => show("star-out", () => star_modes(val("m"), val("n"), val("omega"), order()));
document.getElementById("gamma").onclick = () => show("gamma-out", () => flux_group(val("omega"), order()));
