//! Gurevich pressure on the truncated induced shift, Bowen roots, and
//! pressure derivatives (Gibbs averages and variance).
//!
//! The pressure of a letter-indexed potential is the log spectral radius of
//! M[e,f] = exp(pot(e))·1{e→f}, computed by power iteration. The truncation
//! error of the cusp letters is reported through the Type II band: letters at
//! level l carry weight ≈ exp(−2β ln l + C) with β = s(a+b), so the omitted
//! mass is at most (#shapes)·e^C·L^{1−2β}/(2β − 1). Below β = 1/2 the full
//! series diverges (the phase transition), and requests there are refused.

use rayon::prelude::*;

use crate::coding::InducedShift;
use crate::error::{Error, Result};
use crate::num::{self, CompensatedSum};
use crate::potential::PotentialTable;

/// Weighted potential family −s(aτ + bκ).
#[derive(Debug, Clone, Copy)]
pub struct WeightedPotential<'a> {
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub tau: &'a PotentialTable,
    pub kappa: Option<&'a PotentialTable>,
}

impl<'a> WeightedPotential<'a> {
    pub fn new(
        a: f64,
        b: f64,
        s: f64,
        tau: &'a PotentialTable,
        kappa: Option<&'a PotentialTable>,
    ) -> Result<Self> {
        if a < 0.0 || b < 0.0 || a + b == 0.0 {
            return Err(Error::InvalidParameter(
                "weights must satisfy a, b ≥ 0 and a + b ≠ 0".into(),
            ));
        }
        if b != 0.0 && kappa.is_none() {
            return Err(Error::InvalidParameter("b ≠ 0 requires a κ table".into()));
        }
        Ok(Self { a, b, s, tau, kappa })
    }

    pub fn beta(&self) -> f64 {
        self.s * (self.a + self.b)
    }

    /// −s(aτ + bκ) per letter.
    pub fn letter_values(&self) -> Vec<f64> {
        let n = self.tau.len();
        let mut v = Vec::with_capacity(n);
        for e in 0..n {
            let mut w = self.a * self.tau.values[e];
            if let Some(k) = self.kappa {
                w += self.b * k.values[e];
            }
            v.push(-self.s * w);
        }
        v
    }
}

/// Observable for pressure derivatives: a bounded function of the letter, or
/// of the transition (aligned with the shift's successor array).
#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    Letter(&'a [f64]),
    Edge(&'a [f64]),
}

#[derive(Debug, Clone, Copy)]
pub struct PressureOptions {
    /// Tolerance used for the `converged` verdict (tail and increments).
    pub tol: f64,
    /// Rayleigh-quotient drift threshold for the power iteration.
    pub power_tol: f64,
    pub max_iter: usize,
    /// Margin above the phase-transition threshold, on the β = s(a+b) scale.
    pub eps_guard: f64,
    /// Restrict cusp letters to levels ≤ this (None: use the full alphabet).
    pub l_trunc: Option<u32>,
    /// Also compute the pressure at half the truncation level and record the
    /// increment (doubles the cost; used for final reports).
    pub check_increment: bool,
}

impl Default for PressureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            power_tol: 1e-12,
            max_iter: 50_000,
            eps_guard: 0.02,
            l_trunc: None,
            check_increment: false,
        }
    }
}

/// Pressure value with truncation diagnostics.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PressureResult {
    pub value: f64,
    pub l_max: u32,
    pub tail_bound: f64,
    pub spectral_gap: f64,
    pub iterations: usize,
    pub increment: Option<f64>,
    pub converged: bool,
}

fn power_iteration(
    shift: &InducedShift,
    weights: &[f64],
    edge_weights: Option<&[f64]>,
    opts: &PressureOptions,
) -> Result<(f64, f64, usize)> {
    let n = shift.n_letters();
    let matvec = |v: &[f64], out: &mut Vec<f64>| {
        *out = (0..n)
            .into_par_iter()
            .map(|e| {
                if weights[e] == 0.0 {
                    return 0.0;
                }
                let lo = shift.succ_offsets[e];
                let hi = shift.succ_offsets[e + 1];
                let mut acc = CompensatedSum::new();
                match edge_weights {
                    Some(ew) => {
                        for idx in lo..hi {
                            acc.add(ew[idx] * v[shift.succ[idx] as usize]);
                        }
                    }
                    None => {
                        for idx in lo..hi {
                            acc.add(v[shift.succ[idx] as usize]);
                        }
                    }
                }
                weights[e] * acc.value()
            })
            .collect();
    };
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0f64; n];
    // rough scale of the spectral radius, to shift the matrix by +cI: this
    // removes oscillatory (near-periodic) modes without changing the value
    matvec(&v, &mut next);
    let mut rough = CompensatedSum::new();
    for &x in &next {
        rough.add(x);
    }
    let c_shift = rough.value().max(1e-300);
    let mut lambdas: Vec<f64> = Vec::with_capacity(64);
    let mut prev_resid = f64::NAN;
    let mut gap = f64::NAN;
    for iter in 1..=opts.max_iter {
        matvec(&v, &mut next);
        let mut norm = CompensatedSum::new();
        for e in 0..n {
            next[e] += c_shift * v[e];
            norm.add(next[e]);
        }
        let lambda = norm.value();
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::NonConvergent(format!(
                "power iteration degenerated at step {iter}: \u{2016}Mv\u{2016} = {lambda}"
            )));
        }
        let mut resid = CompensatedSum::new();
        for e in 0..n {
            next[e] /= lambda;
            resid.add((next[e] - v[e]).abs());
        }
        let resid = resid.value();
        if prev_resid.is_finite() && prev_resid > 1e-300 {
            let r = resid / prev_resid;
            gap = if gap.is_nan() { r } else { 0.5 * (gap + r) };
        }
        prev_resid = resid;
        std::mem::swap(&mut v, &mut next);
        lambdas.push(lambda);
        if lambdas.len() >= 10 {
            let tail = &lambdas[lambdas.len() - 10..];
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if (hi - lo) / hi.abs().max(1e-300) < opts.power_tol {
                return Ok(((lambda - c_shift).ln(), gap, iter));
            }
        }
    }
    Err(Error::NonConvergent(format!(
        "power iteration did not settle within {} steps",
        opts.max_iter
    )))
}

fn letter_weights(
    shift: &InducedShift,
    values: &[f64],
    l_trunc: Option<u32>,
) -> Vec<f64> {
    (0..shift.n_letters())
        .map(|e| {
            if let (Some(cap), Some(level)) = (l_trunc, shift.level(e)) {
                if level > cap {
                    return 0.0;
                }
            }
            values[e].exp()
        })
        .collect()
}

/// Tail bound for the omitted cusp levels: (#shapes)·e^C·L^{1−2β}/(2β−1)
/// with C calibrated from the enumerated Type II letters.
fn tail_bound(shift: &InducedShift, values: &[f64], beta: f64, l_cap: u32) -> f64 {
    if shift.shapes.is_empty() {
        return 0.0;
    }
    if beta <= 0.5 {
        return f64::INFINITY;
    }
    let mut c_sup = f64::NEG_INFINITY;
    for e in shift.n_type1..shift.n_letters() {
        if let Some(level) = shift.level(e) {
            if level >= 1 {
                c_sup = c_sup.max(values[e] + 2.0 * beta * (level as f64).ln());
            }
        }
    }
    if !c_sup.is_finite() {
        return 0.0;
    }
    let l = l_cap as f64;
    (shift.shapes.len() as f64) * c_sup.exp() * l.powf(1.0 - 2.0 * beta) / (2.0 * beta - 1.0)
}

/// Gurevich pressure of the letter potential `values` (plus optional edge
/// weights aligned with the successor array). `beta` is s(a+b) for the phase
/// transition guard and tail bound; pass None for synthetic potentials with
/// no cusp family.
pub fn pressure(
    shift: &InducedShift,
    values: &[f64],
    edge_values: Option<&[f64]>,
    beta: Option<f64>,
    opts: &PressureOptions,
) -> Result<PressureResult> {
    assert_eq!(values.len(), shift.n_letters());
    let has_cusps = !shift.shapes.is_empty();
    if let Some(beta) = beta {
        if has_cusps && beta < 0.5 + opts.eps_guard {
            return Err(Error::Divergence {
                beta,
                guard: opts.eps_guard,
            });
        }
    }
    let l_cap = opts
        .l_trunc
        .unwrap_or(shift.params.l_max as u32)
        .min(shift.params.l_max as u32);
    let run = |cap: u32| -> Result<(f64, f64, usize)> {
        let weights = letter_weights(shift, values, Some(cap));
        if let Some(ev) = edge_values {
            assert_eq!(ev.len(), shift.succ.len());
            let ew: Vec<f64> = ev.iter().map(|&g| g.exp()).collect();
            power_iteration(shift, &weights, Some(&ew), opts)
        } else {
            power_iteration(shift, &weights, None, opts)
        }
    };
    let (value, gap, iterations) = run(l_cap)?;
    let tail = match beta {
        Some(beta) if has_cusps => tail_bound(shift, values, beta, l_cap),
        _ => 0.0,
    };
    let increment = if opts.check_increment && has_cusps && l_cap >= 2 {
        let (half, _, _) = run(l_cap / 2)?;
        Some(value - half)
    } else {
        None
    };
    let converged = tail <= opts.tol && increment.map_or(true, |d| d.abs() <= opts.tol);
    Ok(PressureResult {
        value,
        l_max: l_cap,
        tail_bound: tail,
        spectral_gap: gap,
        iterations,
        increment,
        converged,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BowenRoot {
    pub root: f64,
    pub residual: f64,
    pub pressure_evals: usize,
    pub bracket: (f64, f64),
    pub tail_bound: f64,
}

/// The unique zero of s ↦ P(−s(aτ + bκ)), bracketed from the guard edge and
/// solved by a bisection-safeguarded secant.
pub fn bowen_root(
    shift: &InducedShift,
    tau: &PotentialTable,
    kappa: Option<&PotentialTable>,
    a: f64,
    b: f64,
    tol_p: f64,
    opts: &PressureOptions,
) -> Result<BowenRoot> {
    if a < 0.0 || b < 0.0 || a + b == 0.0 {
        return Err(Error::InvalidParameter(
            "direction must satisfy a, b ≥ 0 and a + b ≠ 0".into(),
        ));
    }
    let combo: Vec<f64> = (0..shift.n_letters())
        .map(|e| {
            let mut w = a * tau.values[e];
            if let Some(k) = kappa {
                w += b * k.values[e];
            }
            w
        })
        .collect();
    let mut evals = 0usize;
    let mut eval = |s: f64| -> Result<f64> {
        evals += 1;
        let values: Vec<f64> = combo.iter().map(|&w| -s * w).collect();
        Ok(pressure(shift, &values, None, Some(s * (a + b)), opts)?.value)
    };
    let has_cusps = !shift.shapes.is_empty();
    let s_lo = if has_cusps {
        (0.5 + opts.eps_guard * 1.0001) / (a + b)
    } else {
        1e-6 / (a + b)
    };
    let f_lo = eval(s_lo)?;
    if f_lo <= 0.0 {
        return Err(Error::Bracketing(format!(
            "pressure is already {f_lo} at the guard edge s = {s_lo}; no root above the phase transition"
        )));
    }
    let mut s_hi = 2.0 * s_lo.max(0.5 / (a + b));
    let mut f_hi = eval(s_hi)?;
    let mut doublings = 0;
    while f_hi > 0.0 {
        s_hi *= 2.0;
        f_hi = eval(s_hi)?;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Bracketing(format!(
                "no sign change up to s = {s_hi}: P = {f_hi}"
            )));
        }
    }
    let r = num::secant_bisection(&mut eval, s_lo, s_hi, f_lo, f_hi, tol_p, 0.0, 200)?;
    let values: Vec<f64> = combo.iter().map(|&w| -r.x * w).collect();
    let tail = if has_cusps {
        tail_bound(
            shift,
            &values,
            r.x * (a + b),
            opts.l_trunc.unwrap_or(shift.params.l_max as u32),
        )
    } else {
        0.0
    };
    Ok(BowenRoot {
        root: r.x,
        residual: r.fx,
        pressure_evals: evals,
        bracket: (s_lo, s_hi),
        tail_bound: tail,
    })
}

fn perturbed(
    base: &[f64],
    obs: &Observable,
    t: f64,
) -> (Vec<f64>, Option<Vec<f64>>) {
    match obs {
        Observable::Letter(f) => {
            let v: Vec<f64> = base.iter().zip(f.iter()).map(|(&b, &x)| b + t * x).collect();
            (v, None)
        }
        Observable::Edge(g) => {
            let ev: Vec<f64> = g.iter().map(|&x| t * x).collect();
            (base.to_vec(), Some(ev))
        }
    }
}

/// ∫ f dν for the Gibbs state of the base potential: the first derivative of
/// t ↦ P(base + t·f) at 0, by Richardson-extrapolated central differences.
pub fn gibbs_average(
    shift: &InducedShift,
    base: &[f64],
    beta: Option<f64>,
    obs: &Observable,
    h: f64,
    opts: &PressureOptions,
) -> Result<f64> {
    num::richardson_d1(
        |t| {
            let (v, ev) = perturbed(base, obs, t);
            Ok(pressure(shift, &v, ev.as_deref(), beta, opts)?.value)
        },
        h,
    )
}

/// Var(f, ν_base): second derivative of t ↦ P(base + t·f̄) at 0 with the
/// observable centered for conditioning; tiny negatives are clamped to 0.
pub fn variance(
    shift: &InducedShift,
    base: &[f64],
    beta: Option<f64>,
    obs: &Observable,
    h: f64,
    opts: &PressureOptions,
) -> Result<f64> {
    let avg = gibbs_average(shift, base, beta, obs, h, opts)?;
    let centered_letter: Vec<f64>;
    let centered = match obs {
        Observable::Letter(f) => {
            centered_letter = f.iter().map(|&x| x - avg).collect();
            Observable::Letter(&centered_letter)
        }
        // edge observables are centered through the base letter values
        Observable::Edge(g) => {
            centered_letter = g.to_vec();
            Observable::Edge(&centered_letter)
        }
    };
    let shift_avg = if matches!(obs, Observable::Edge(_)) { avg } else { 0.0 };
    let v = num::richardson_d2(
        |t| {
            let (mut v, ev) = perturbed(base, &centered, t);
            if shift_avg != 0.0 {
                for x in v.iter_mut() {
                    *x -= t * shift_avg;
                }
            }
            Ok(pressure(shift, &v, ev.as_deref(), beta, opts)?.value)
        },
        h,
    )?;
    if v < -1e-6 {
        return Err(Error::NonConvergent(format!(
            "variance estimate {v} is negative beyond noise"
        )));
    }
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::build_induced;
    use crate::potential::evaluate_tau;
    use crate::rep::thrice_punctured_sphere;
    use approx::assert_abs_diff_eq;

    fn opts() -> PressureOptions {
        PressureOptions::default()
    }

    #[test]
    fn full_two_shift_zero_potential() {
        let shift = InducedShift::synthetic(2, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        let values = vec![0.0, 0.0];
        let p = pressure(&shift, &values, None, None, &opts()).unwrap();
        assert_abs_diff_eq!(p.value, 2.0f64.ln(), epsilon = 1e-11);
        assert_eq!(p.tail_bound, 0.0);
    }

    #[test]
    fn pressure_is_affine_in_constants() {
        let shift = InducedShift::synthetic(
            4,
            (0..4)
                .flat_map(|i| (0..4).filter(move |&j| j != (i ^ 1)).map(move |j| (i, j)))
                .collect(),
        );
        let base = vec![0.3, -0.1, 0.2, 0.05];
        let p0 = pressure(&shift, &base, None, None, &opts()).unwrap().value;
        for c in [-1.0, 0.5, 2.0] {
            let shifted: Vec<f64> = base.iter().map(|&v| v + c).collect();
            let pc = pressure(&shift, &shifted, None, None, &opts()).unwrap().value;
            assert_abs_diff_eq!(pc, p0 + c, epsilon = 1e-10);
        }
    }

    #[test]
    fn constant_potential_root_on_sigma1_fixture() {
        // classical shift with 2k = 4 states, 3 successors: spectral radius 3,
        // so the root of P(−s·c) = ln 3 − s·c is ln3/c
        let shift = InducedShift::synthetic(
            4,
            (0..4)
                .flat_map(|i| (0..4).filter(move |&j| j != (i ^ 1)).map(move |j| (i, j)))
                .collect(),
        );
        let c = 1.7;
        let tau = PotentialTable {
            values: vec![c; 4],
            diam: vec![0.0; 4],
            err: vec![0.0; 4],
            word_len: vec![1; 4],
            rep_params: serde_json::Value::Null,
            depth: 0,
        };
        let root = bowen_root(&shift, &tau, None, 1.0, 0.0, 1e-12, &opts()).unwrap();
        assert_abs_diff_eq!(root.root, 3.0f64.ln() / c, epsilon = 1e-9);
    }

    #[test]
    fn divergence_guard_refuses_subcritical_requests() {
        let rep = thrice_punctured_sphere().unwrap();
        let shift = build_induced(&rep, 1, 10, None).unwrap();
        let tau = evaluate_tau(&rep, &shift, 100).unwrap();
        let wp = WeightedPotential::new(1.0, 0.0, 0.4, &tau, None).unwrap();
        let values = wp.letter_values();
        match pressure(&shift, &values, None, Some(wp.beta()), &opts()) {
            Err(Error::Divergence { beta, .. }) => assert_abs_diff_eq!(beta, 0.4),
            other => panic!("expected divergence error, got {other:?}"),
        }
        // finite just above the guard
        let wp = WeightedPotential::new(1.0, 0.0, 0.55, &tau, None).unwrap();
        let p = pressure(&shift, &wp.letter_values(), None, Some(wp.beta()), &opts()).unwrap();
        assert!(p.value.is_finite());
        assert!(p.tail_bound.is_finite());
    }

    #[test]
    fn pressure_monotone_in_s_and_truncation() {
        let rep = thrice_punctured_sphere().unwrap();
        let shift = build_induced(&rep, 1, 40, None).unwrap();
        let tau = evaluate_tau(&rep, &shift, 100).unwrap();
        let mut prev = f64::INFINITY;
        for s in [0.6, 0.8, 1.0, 1.3] {
            let wp = WeightedPotential::new(1.0, 0.0, s, &tau, None).unwrap();
            let p = pressure(&shift, &wp.letter_values(), None, Some(wp.beta()), &opts())
                .unwrap()
                .value;
            assert!(p < prev, "pressure must strictly decrease in s");
            prev = p;
        }
        // truncation monotonicity: P non-decreasing in the level cap
        let wp = WeightedPotential::new(1.0, 0.0, 0.8, &tau, None).unwrap();
        let values = wp.letter_values();
        let mut prev = f64::NEG_INFINITY;
        for cap in [5u32, 10, 20, 40] {
            let o = PressureOptions {
                l_trunc: Some(cap),
                ..opts()
            };
            let p = pressure(&shift, &values, None, Some(wp.beta()), &o).unwrap().value;
            assert!(p >= prev - 1e-12);
            prev = p;
        }
    }

    #[test]
    fn gibbs_average_of_constant_and_linearity() {
        let rep = thrice_punctured_sphere().unwrap();
        let shift = build_induced(&rep, 1, 20, None).unwrap();
        let tau = evaluate_tau(&rep, &shift, 100).unwrap();
        let base: Vec<f64> = tau.values.iter().map(|&v| -v).collect();
        let ones = vec![1.0; shift.n_letters()];
        let avg = gibbs_average(
            &shift,
            &base,
            Some(1.0),
            &Observable::Letter(&ones),
            1e-3,
            &opts(),
        )
        .unwrap();
        assert_abs_diff_eq!(avg, 1.0, epsilon = 1e-6);
        // linearity on two random-ish observables
        let f: Vec<f64> = (0..shift.n_letters()).map(|e| ((e * 37) % 11) as f64 / 11.0).collect();
        let g: Vec<f64> = (0..shift.n_letters()).map(|e| ((e * 17) % 7) as f64 / 7.0).collect();
        let comb: Vec<f64> = f.iter().zip(&g).map(|(&x, &y)| 0.7 * x - 1.3 * y).collect();
        let af = gibbs_average(&shift, &base, Some(1.0), &Observable::Letter(&f), 1e-3, &opts()).unwrap();
        let ag = gibbs_average(&shift, &base, Some(1.0), &Observable::Letter(&g), 1e-3, &opts()).unwrap();
        let ac = gibbs_average(&shift, &base, Some(1.0), &Observable::Letter(&comb), 1e-3, &opts()).unwrap();
        assert_abs_diff_eq!(ac, 0.7 * af - 1.3 * ag, epsilon = 1e-6);
    }

    #[test]
    fn variance_degeneracies() {
        let rep = thrice_punctured_sphere().unwrap();
        let shift = build_induced(&rep, 1, 20, None).unwrap();
        let tau = evaluate_tau(&rep, &shift, 100).unwrap();
        let base: Vec<f64> = tau.values.iter().map(|&v| -v).collect();
        // constant observable: zero variance
        let ones = vec![1.0; shift.n_letters()];
        let var = variance(&shift, &base, Some(1.0), &Observable::Letter(&ones), 1e-3, &opts()).unwrap();
        assert!(var.abs() < 1e-6, "constant variance {var}");
        // synthetic coboundary h − h∘σ as an edge observable: zero variance
        let h: Vec<f64> = (0..shift.n_letters())
            .map(|e| ((e * 29) % 13) as f64 / 13.0)
            .collect();
        let mut edge = vec![0.0; shift.succ.len()];
        for e in 0..shift.n_letters() {
            for idx in shift.succ_offsets[e]..shift.succ_offsets[e + 1] {
                edge[idx] = h[e] - h[shift.succ[idx] as usize];
            }
        }
        let var = variance(&shift, &base, Some(1.0), &Observable::Edge(&edge), 1e-3, &opts()).unwrap();
        assert!(var.abs() < 1e-5, "coboundary variance {var}");
    }

    #[test]
    fn pressure_convex_in_perturbation() {
        let rep = thrice_punctured_sphere().unwrap();
        let shift = build_induced(&rep, 1, 20, None).unwrap();
        let tau = evaluate_tau(&rep, &shift, 100).unwrap();
        let base: Vec<f64> = tau.values.iter().map(|&v| -v).collect();
        let f: Vec<f64> = (0..shift.n_letters()).map(|e| ((e * 13) % 5) as f64 / 5.0).collect();
        let ts = [-0.2, -0.1, 0.0, 0.1, 0.2];
        let ps: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let v: Vec<f64> = base.iter().zip(&f).map(|(&b, &x)| b + t * x).collect();
                pressure(&shift, &v, None, Some(1.0), &opts()).unwrap().value
            })
            .collect();
        for w in ps.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
        }
    }

    #[test]
    fn bowen_root_for_s03_is_near_one() {
        let rep = thrice_punctured_sphere().unwrap();
        let shift = build_induced(&rep, 1, 60, None).unwrap();
        let tau = evaluate_tau(&rep, &shift, 200).unwrap();
        let root = bowen_root(&shift, &tau, None, 1.0, 0.0, 1e-10, &opts()).unwrap();
        assert!(
            (root.root - 1.0).abs() < 0.02,
            "critical exponent should be 1, got {}",
            root.root
        );
    }
}
