//! Test oracles that do not go through the library's scanner.
#![allow(dead_code)]

use std::f64::consts::PI;

pub const RUBBER_E: f64 = 3.49e6;
pub const RUBBER_RHO: f64 = 1100.0;

/// Layer properties for ratios against rubber, unit cell width 1.
pub struct OracleCell {
    pub c1: f64,
    pub c2: f64,
    pub h1: f64,
    pub h2: f64,
    pub z: f64,
}

impl OracleCell {
    pub fn from_ratios(e: f64, rho: f64, h: f64) -> Self {
        let c2 = (RUBBER_E / RUBBER_RHO).sqrt();
        let c1 = (e * RUBBER_E / (rho * RUBBER_RHO)).sqrt();
        let z = (rho * RUBBER_RHO * c1) / (RUBBER_RHO * c2);
        OracleCell {
            c1,
            c2,
            h1: h / (1.0 + h),
            h2: 1.0 / (1.0 + h),
            z,
        }
    }

    pub fn rhs(&self, omega: f64) -> f64 {
        let a = omega * self.h1 / self.c1;
        let b = omega * self.h2 / self.c2;
        a.cos() * b.cos() - 0.5 * (self.z + 1.0 / self.z) * a.sin() * b.sin()
    }

    fn excess(&self, omega: f64) -> f64 {
        self.rhs(omega).abs() - 1.0
    }

    /// Brute-force gap list in Hz: `n` uniform samples on `[0, omega_max]`, each sign
    /// change of `|rhs| − 1` bisected inside its bracket.
    pub fn dense_gaps(&self, omega_max: f64, n: usize) -> Vec<(f64, f64)> {
        let step = omega_max / (n - 1) as f64;
        let mut gaps = Vec::new();
        let mut open: Option<f64> = None;
        let mut prev_w = 0.0;
        let mut prev_in = self.excess(0.0) > 0.0;
        for i in 1..n {
            let w = step * i as f64;
            let inside = self.excess(w) > 0.0;
            if inside != prev_in {
                let edge = self.bisect(prev_w, w);
                if inside {
                    open = Some(edge);
                } else if let Some(lo) = open.take() {
                    gaps.push((lo / (2.0 * PI), edge / (2.0 * PI)));
                }
            } else if inside && prev_in && self.rhs(w).signum() != self.rhs(prev_w).signum() {
                // Gap on both sides with opposite sign: a pass band hides inside the bracket.
                let (lo_edge, hi_edge) = self.hidden_band(prev_w, w);
                if let Some(lo) = open.take() {
                    gaps.push((lo / (2.0 * PI), lo_edge / (2.0 * PI)));
                }
                open = Some(hi_edge);
            }
            prev_w = w;
            prev_in = inside;
        }
        gaps
    }

    fn bisect(&self, mut a: f64, mut b: f64) -> f64 {
        let sa = self.excess(a) > 0.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if (self.excess(m) > 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn hidden_band(&self, a: f64, b: f64) -> (f64, f64) {
        // rhs crosses from one level to the other; |rhs| ≤ 1 between the two crossings.
        let sa = self.rhs(a).signum();
        let level = |w: f64| self.rhs(w) - sa;
        let root = |mut x: f64, mut y: f64, f: &dyn Fn(f64) -> f64| {
            let fx = f(x) > 0.0;
            for _ in 0..200 {
                let m = 0.5 * (x + y);
                if m <= x || m >= y {
                    break;
                }
                if (f(m) > 0.0) == fx {
                    x = m;
                } else {
                    y = m;
                }
            }
            0.5 * (x + y)
        };
        let first = root(a, b, &level);
        let second = root(first, b, &|w: f64| self.rhs(w) + sa);
        (first, second)
    }
}

/// Deterministic xorshift stream for randomised checks without pulling a crate into the oracle.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * self.next_f64()).exp()
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
