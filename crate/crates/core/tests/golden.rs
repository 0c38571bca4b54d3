//! Golden values of the torus example.

use std::sync::Arc;

use serde_json::json;
use starflux::fedosov::{default_dmax, FedosovData, FedosovProduct};
use starflux::flux::{gamma_generators, rotation_report, LoopDescriptor};
use starflux::formal::rat;

fn product(c1: i64, c2: i64, k: usize) -> FedosovProduct {
    FedosovProduct::new(Arc::new(FedosovData::constant_omega(2, k, &[rat(c1, 1), rat(c2, 1)], default_dmax(k)).unwrap()), 1)
}

// [PAPER]
#[test]
fn rotation_report_for_two_five() {
    let r = rotation_report(&product(2, 5, 3), &LoopDescriptor::unit(2, 0)).unwrap();
    assert_eq!(r["match"], true);
    assert_eq!(r["deformed"][1]["re"], json!([[1, 1], [-2, 1], [-5, 1], [0, 1]]));
    assert_eq!(r["deformed"][0]["re"], json!([[0, 1], [0, 1], [0, 1], [0, 1]]));
    assert_eq!(r["classical"][1]["re"][0], json!([1, 1]));
    assert_eq!(r["closed_form"], r["deformed"]);
}

// [PAPER]
#[test]
fn generators_scale_by_the_same_series() {
    let g = gamma_generators(&product(-1, 3, 3)).unwrap();
    assert_eq!(g[0].periods[1], -&g[1].periods[0]);
    assert!(g[0].periods[0].is_zero() && g[1].periods[1].is_zero());
}
