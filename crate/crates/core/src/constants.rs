//! Closed forms and quoted decimals for the volumes, areas and normalization
//! constants of the two-qubit state space.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;
use crate::linalg::ipow;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceConstant {
    pub name: &'static str,
    pub closed_form: &'static str,
    pub decimal: f64,
    pub provenance: &'static str,
}

fn entry(name: &'static str, closed_form: &'static str, decimal: f64) -> ReferenceConstant {
    ReferenceConstant { name, closed_form, decimal, provenance: "paper" }
}

/// The full table, in a fixed order.
pub fn reference_constants() -> Vec<ReferenceConstant> {
    vec![
        entry("V_total", "pi^8/1680", ipow(PI, 8) / 1680.0),
        entry("V_sep_conjecture", "pi^6/2310", ipow(PI, 6) / 2310.0),
        entry("P_sep_conjecture", "8/(11*pi^2)", 8.0 / (11.0 * PI * PI)),
        entry("A_total", "142*pi^7/12285", 142.0 * ipow(PI, 7) / 12285.0),
        entry("A_sep_candidate_175", "pi^5/175", ipow(PI, 5) / 175.0),
        entry("A_sep_candidate_548", "pi^6/548", ipow(PI, 6) / 548.0),
        entry("haar_truncated", "pi^6/96", ipow(PI, 6) / 96.0),
        entry("haar_untruncated", "pi^9/(288*sqrt(2))", ipow(PI, 9) / (288.0 * SQRT_2)),
        entry("D2", "2*pi", 2.0 * PI),
        entry("D3", "64*pi/35", 64.0 * PI / 35.0),
        entry("D4", "2*pi^2/35", 2.0 * PI * PI / 35.0),
        entry("D5", "8388608*pi^2/156165009", 8388608.0 * PI * PI / 156165009.0),
        entry("D6_estimate", "2.16436e-6", 2.16436e-6),
        entry("boundary_integral_m4", "1136*pi/4095", 1136.0 * PI / 4095.0),
        entry("V_m2", "2*pi^2", 2.0 * PI * PI),
        entry("A_m2", "16*pi", 16.0 * PI),
        entry("A_m3", "256*pi^3/21", 256.0 * ipow(PI, 3) / 21.0),
        entry("A_m5", "0.187041154554", 0.187041154554),
        entry("A_m6", "1.874312e-5", 1.874312e-5),
        entry("min_scalar_curvature_m4", "570", 570.0),
        entry("unit_ball_volume_15", "256*pi^7/2027025", 256.0 * ipow(PI, 7) / 2027025.0),
    ]
}

pub fn lookup(name: &str) -> Option<ReferenceConstant> {
    reference_constants().into_iter().find(|c| c.name == name)
}

/// Volume of the truncated frame space (modulo column phases) for `m`
/// levels, for `m` in 2..=6.
pub fn haar_volume(m: usize) -> Option<f64> {
    match m {
        2 => Some(PI),
        3 => Some(ipow(PI, 3) / 2.0),
        4 => Some(ipow(PI, 6) / 96.0),
        5 => Some(ipow(PI, 10) / 18432.0),
        6 => Some(ipow(PI, 15) / 35389440.0),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(name: &str) -> f64 {
        lookup(name).unwrap().decimal
    }

    #[test]
    fn quoted_decimals() {
        let quoted = [
            ("V_total", 5.64794),
            ("V_sep_conjecture", 0.416186),
            ("P_sep_conjecture", 0.0736881),
            ("A_total", 34.9110002722),
            ("A_sep_candidate_175", 1.74868),
            ("A_sep_candidate_548", 1.75436),
            ("D4", 0.563977),
            ("D5", 0.530159),
            ("boundary_integral_m4", 0.871513859457),
            ("A_m3", 377.981),
        ];
        for (name, q) in quoted {
            let v = value(name);
            assert!(((v - q) / q).abs() < 5e-6, "{name}: {v} vs {q}");
        }
    }

    #[test]
    fn probability_times_total_is_separable_volume() {
        let p = value("P_sep_conjecture") * value("V_total");
        assert!((p / value("V_sep_conjecture") - 1.0).abs() < 1e-15);
    }

    #[test]
    fn total_area_from_boundary_integral() {
        let a = 4.0 * value("boundary_integral_m4") * value("haar_truncated");
        assert!((a / value("A_total") - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_table_matches_stored_volume() {
        assert_eq!(haar_volume(4), Some(value("haar_truncated")));
        assert!(haar_volume(7).is_none());
    }

    #[test]
    fn names_are_unique() {
        let t = reference_constants();
        for (i, a) in t.iter().enumerate() {
            assert!(t[i + 1..].iter().all(|b| b.name != a.name));
        }
        assert!(lookup("nope").is_none());
    }
}
