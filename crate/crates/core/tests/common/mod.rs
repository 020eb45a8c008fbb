//! Test-side oracles, written independently of the production numerics.
#![allow(dead_code)]

use nh3_powertrain::adu::CatalystBed;
use nh3_powertrain::thermo::{equilibrium_constant, GAS_CONSTANT};

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Temkin–Pyzhev rate with pressure floors, mol/(m³·s).
pub fn oracle_rate(bed: &CatalystBed, t: f64, p: [f64; 3]) -> f64 {
    let (nh3, h2, n2) = (p[0].max(1e-6), p[1].max(1e-6), p[2]);
    let k = bed.pre_exponential * (-bed.activation_energy_kj_mol * 1e3 / (GAS_CONSTANT * t)).exp();
    let ks = equilibrium_constant(t).unwrap();
    let a = nh3 * nh3 / (h2 * h2 * h2);
    k * (a.powf(bed.beta) - n2 * ks * ks * a.powf(bed.beta - 1.0))
}

/// Species flows `[NH3, H2, N2]` after the bed, by classic RK4 on a mesh
/// graded as `z = L·(k/n)³` so the steep inlet layer is resolved.
pub fn oracle_pfr(bed: &CatalystBed, inlet: [f64; 3], steps: usize) -> [f64; 3] {
    let nu = [-1.0, 1.5, 0.5];
    let p_bar = bed.pressure_kpa / 100.0;
    let t = bed.temperature_k;
    let f = |n: [f64; 3]| {
        let tot = n[0] + n[1] + n[2];
        let r = oracle_rate(bed, t, n.map(|x| x / tot * p_bar)) * bed.area_m2;
        nu.map(|v| v * r)
    };
    let add = |n: [f64; 3], k: [f64; 3], h: f64| [n[0] + h * k[0], n[1] + h * k[1], n[2] + h * k[2]];
    let mut n = inlet;
    let mut z = 0.0;
    for k in 1..=steps {
        let zn = bed.length_m * (k as f64 / steps as f64).powi(3);
        let h = zn - z;
        let k1 = f(n);
        let k2 = f(add(n, k1, h / 2.0));
        let k3 = f(add(n, k2, h / 2.0));
        let k4 = f(add(n, k3, h));
        for i in 0..3 {
            n[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        z = zn;
    }
    n
}

/// Oracle conversion of the NH3 in `inlet`.
pub fn oracle_conversion(bed: &CatalystBed, inlet: [f64; 3], steps: usize) -> f64 {
    1.0 - oracle_pfr(bed, inlet, steps)[0] / inlet[0]
}

/// Equilibrium conversion of pure NH3 by bisection on the mass-action law
/// `K²·p_N2·p_H2³ = p_NH3²` (synthesis constant).
pub fn oracle_equilibrium_conversion(t: f64, p_bar: f64) -> f64 {
    let ks = equilibrium_constant(t).unwrap();
    let g = |x: f64| {
        let tot = 1.0 + x;
        let (a, b, c) = ((1.0 - x) / tot * p_bar, 1.5 * x / tot * p_bar, 0.5 * x / tot * p_bar);
        ks * ks * c * b.powi(3) - a * a
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
