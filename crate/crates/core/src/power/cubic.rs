//! Real roots of the monic cubic x³ + h₁x² + h₂x + h₃ by Cardano's formula
//! (discriminant D ≥ 0) or the trigonometric form (D < 0).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Coefficients of the stationarity cubic for one relay's surrogate
/// `a/P_r + b/P_s² − c/(P_s² P_r)` under `P_s + P_r = P_tot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoefficients {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub p_tot: f64,
}

/// h₁ = −2b/a, h₂ = (4bP − 3c)/a, h₃ = (2cP − 2bP²)/a.
pub fn cubic_coefficients(a: f64, b: f64, c: f64, p_tot: f64) -> CubicCoefficients {
    CubicCoefficients {
        h1: -2.0 * b / a,
        h2: (4.0 * b * p_tot - 3.0 * c) / a,
        h3: (2.0 * c * p_tot - 2.0 * b * p_tot * p_tot) / a,
        a,
        b,
        c,
        p_tot,
    }
}

impl CubicCoefficients {
    /// Bare monic cubic without the power-allocation context.
    pub fn monic(h1: f64, h2: f64, h3: f64) -> Self {
        CubicCoefficients { h1, h2, h3, a: f64::NAN, b: f64::NAN, c: f64::NAN, p_tot: f64::NAN }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((x + self.h1) * x + self.h2) * x + self.h3
    }

    fn derivative(&self, x: f64) -> f64 {
        (3.0 * x + 2.0 * self.h1) * x + self.h2
    }

    /// |p(r)| / max(1, |r|³).
    pub fn relative_residual(&self, r: f64) -> f64 {
        self.eval(r).abs() / r.abs().powi(3).max(1.0)
    }

    /// Surrogate log-objective `ln(a/P_r + b/P_s² − c/(P_s² P_r))` at `P_s = x`,
    /// or `None` where the surrogate is not positive.
    pub fn surrogate_log_objective(&self, x: f64) -> Option<f64> {
        let y = self.p_tot - x;
        if !(x > 0.0 && y > 0.0) {
            return None;
        }
        let g = self.a / y + self.b / (x * x) - self.c / (x * x * y);
        (g > 0.0).then(|| g.ln())
    }

    /// Solves the cubic and picks the feasible root with the lowest surrogate
    /// objective inside `(margin, P_tot − margin)`.
    pub fn solve(&self) -> Result<CubicSolution> {
        let mut sol = solve_cubic(self);
        let margin = 1e-9 * self.p_tot;
        let best = sol
            .roots
            .iter()
            .copied()
            .filter(|&r| r > margin && r < self.p_tot - margin)
            .filter_map(|r| self.surrogate_log_objective(r).map(|f| (r, f)))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((r, _)) => {
                sol.selected_root = Some(r);
                Ok(sol)
            }
            None => Err(Error::Infeasible(format!(
                "no root of the power-allocation cubic lies in (0, {}) with a positive surrogate; roots {:?}; use the numerical search",
                self.p_tot, sol.roots
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSolution {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub d: f64,
    /// Present iff D < 0.
    pub theta: Option<f64>,
    /// Distinct real roots (a double root is listed once).
    pub roots: Vec<f64>,
    /// The trigonometric root on the (θ + 4π)/3 branch, when D < 0.
    pub trig_branch_root: Option<f64>,
    pub selected_root: Option<f64>,
}

/// Q = (3h₂ − h₁²)/9, R = (9h₁h₂ − 27h₃ − 2h₁³)/54, D = Q³ + R².
pub fn solve_cubic(h: &CubicCoefficients) -> CubicSolution {
    let (h1, h2, h3) = (h.h1, h.h2, h.h3);
    let q = (3.0 * h2 - h1 * h1) / 9.0;
    let r = (9.0 * h1 * h2 - 27.0 * h3 - 2.0 * h1 * h1 * h1) / 54.0;
    let d = q * q * q + r * r;
    let shift = -h1 / 3.0;

    if d >= 0.0 {
        let sq = d.sqrt();
        // S·T = −Q; take the cube root of the larger-magnitude sum and divide
        let (s, t) = if r >= 0.0 {
            let s = (r + sq).cbrt();
            (s, if s != 0.0 { -q / s } else { 0.0 })
        } else {
            let t = (r - sq).cbrt();
            (if t != 0.0 { -q / t } else { 0.0 }, t)
        };
        let mut roots = vec![polish(h, s + t + shift)];
        if d == 0.0 && s != 0.0 {
            let double = polish(h, -0.5 * (s + t) + shift);
            if double != roots[0] {
                roots.push(double);
            }
        }
        CubicSolution { q, r, s, t, d, theta: None, roots, trig_branch_root: None, selected_root: None }
    } else {
        let cos_theta = (r / (-q * q * q).sqrt()).clamp(-1.0, 1.0);
        let theta = cos_theta.acos();
        let amp = 2.0 * (-q).sqrt();
        let roots: Vec<f64> = (0..3)
            .map(|j| polish(h, amp * ((theta + 2.0 * PI * j as f64) / 3.0).cos() + shift))
            .collect();
        let trig_branch_root = Some(roots[2]);
        CubicSolution {
            q,
            r,
            s: f64::NAN,
            t: f64::NAN,
            d,
            theta: Some(theta),
            roots,
            trig_branch_root,
            selected_root: None,
        }
    }
}

/// A few Newton steps, kept only while they reduce the residual.
fn polish(h: &CubicCoefficients, mut x: f64) -> f64 {
    let mut res = h.eval(x).abs();
    for _ in 0..4 {
        let dp = h.derivative(x);
        if dp == 0.0 || res == 0.0 {
            break;
        }
        let next = x - h.eval(x) / dp;
        let next_res = h.eval(next).abs();
        if next_res < res {
            x = next;
            res = next_res;
        } else {
            break;
        }
    }
    x
}
