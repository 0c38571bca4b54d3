//! Browser bindings: deformed flux of a rotation, products of exponentials and the flux group.

use std::sync::Arc;

use serde_json::json;
use starflux::config::{parse_int_list, parse_rational_list};
use starflux::fedosov::{default_dmax, FedosovData, FedosovProduct};
use starflux::flux::{flux_def_closed_form, flux_def_of_loop, gamma_generators, LoopDescriptor};
use starflux::star::{Moyal, StarProduct};
use starflux::torus::TorusFun;
use wasm_bindgen::prelude::*;

const MAX_ORDER: usize = 5;

fn product(omega: &str, k: usize) -> Result<FedosovProduct, String> {
    if k == 0 || k > MAX_ORDER {
        return Err(format!("K must lie between 1 and {MAX_ORDER}"));
    }
    let cs = parse_rational_list(omega).map_err(|e| e.to_string())?;
    let data = FedosovData::constant_omega(2, k, &cs, default_dmax(k)).map_err(|e| e.to_string())?;
    Ok(FedosovProduct::new(Arc::new(data), 1))
}

fn pair(s: &str) -> Result<Vec<i64>, String> {
    let v = parse_int_list(s).map_err(|e| e.to_string())?;
    if v.len() != 2 {
        return Err(format!("{s} is not a pair of integers"));
    }
    Ok(v)
}

pub fn flux_rotation_text(v: &str, omega: &str, k: usize) -> Result<String, String> {
    let p = product(omega, k)?;
    let l = LoopDescriptor::new(pair(v)?);
    let lift = flux_def_of_loop(&p, &l).map_err(|e| e.to_string())?;
    let closed = flux_def_closed_form(p.data(), &l).map_err(|e| e.to_string())?;
    Ok(json!({
        "classical": l.classical_flux(k).to_string(),
        "deformed": lift.to_string(),
        "closed_form": closed.to_string(),
        "match": lift == closed,
    })
    .to_string())
}

pub fn star_modes_text(m: &str, n: &str, omega: &str, k: usize) -> Result<String, String> {
    let p = product(omega, k)?;
    let (m, n) = (pair(m)?, pair(n)?);
    if m.iter().chain(&n).any(|x| x.abs() > 4) {
        return Err("modes are limited to |m| ≤ 4".into());
    }
    let (em, en) = (TorusFun::exp_mode(&m, k), TorusFun::exp_mode(&n, k));
    let moyal = Moyal::new(2, k);
    Ok(json!({
        "fedosov": p.star(&em, &en).to_string(),
        "moyal": moyal.star(&em, &en).to_string(),
    })
    .to_string())
}

pub fn flux_group_text(omega: &str, k: usize) -> Result<String, String> {
    let gens = gamma_generators(&product(omega, k)?).map_err(|e| e.to_string())?;
    Ok(json!(gens.iter().map(ToString::to_string).collect::<Vec<_>>()).to_string())
}

#[wasm_bindgen]
pub fn flux_rotation(v: &str, omega: &str, k: usize) -> Result<String, JsValue> {
    flux_rotation_text(v, omega, k).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn star_modes(m: &str, n: &str, omega: &str, k: usize) -> Result<String, JsValue> {
    star_modes_text(m, n, omega, k).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn flux_group(omega: &str, k: usize) -> Result<String, JsValue> {
    flux_group_text(omega, k).map_err(|e| JsValue::from_str(&e))
}
