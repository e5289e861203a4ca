#![allow(dead_code)]

pub mod golden;
pub mod oracle;

use std::collections::HashMap;

use derivkit::expr::{eval_numeric, Expr, SymbolTable};
use derivkit::gen::{generate_dataset, GenConfig};
use derivkit::record::DerivationRecord;

pub fn records(seed: u64, n: usize) -> Vec<DerivationRecord> {
    let cfg = GenConfig {
        seed,
        ..GenConfig::default()
    };
    generate_dataset(&cfg, &SymbolTable::default(), n).unwrap().records
}

pub fn bind(pairs: &[(&str, f64)]) -> HashMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Value at `b`, or `None` outside the domain or when not finite.
pub fn value(e: &Expr, b: &HashMap<String, f64>) -> Option<f64> {
    eval_numeric(e, b).ok().filter(|v| v.is_finite())
}

/// Ridders' extrapolated central difference of `f` at `x` with its error
/// estimate.
pub fn ridders(f: impl Fn(f64) -> Option<f64>, x: f64, h0: f64) -> Option<(f64, f64)> {
    const N: usize = 10;
    const CON: f64 = 1.4;
    let mut a = [[0.0f64; N]; N];
    let mut h = h0;
    let mut best = (f64::NAN, f64::INFINITY);
    a[0][0] = (f(x + h)? - f(x - h)?) / (2.0 * h);
    for i in 1..N {
        h /= CON;
        a[0][i] = (f(x + h)? - f(x - h)?) / (2.0 * h);
        let mut fac = CON * CON;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON * CON;
            let err = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if err <= best.1 {
                best = (a[j][i], err);
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * best.1 {
            break;
        }
    }
    best.0.is_finite().then_some(best)
}
