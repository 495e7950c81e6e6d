//! Quantum extremality test for 2-2-2 correlators and the extremal scans over
//! the Hardy and CL faces.
//!
//! For each setting pair the larger root `S_xy` of
//! `s² − (C_xy² − C_x² − C_y² + 1)s + (C_xy − C_x C_y)² = 0` plays the role of
//! the squared Schmidt weight product of a pure two-qubit model. A nonlocal
//! point is extremal when all four `S_xy` coincide, the scaled correlators
//! satisfy the arc condition
//! `C̄₁₁C̄₁₂ − C̄₂₁C̄₂₂ − √((1−C̄₁₁²)(1−C̄₁₂²)) − √((1−C̄₂₁²)(1−C̄₂₂²)) = 0`
//! and `∏ [(1 − S_xy)C_xy − C_x C_y] ≥ 0`.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::behavior::{guessing_probability, max_min_entropy, Behavior, Correlators, WitnessKind};
use crate::dd::{dd_config, local_solve, start_points, Objective, QuantumProblem};
use crate::error::{Error, Result};
use crate::math::{log2, sqrt};
use crate::quantum::{max_hardy, probs, Params, StateSign, MAX_CL};
use crate::vertices::{ld, pr_box, CL_LD, HARDY_LD};

/// Tolerance on the equality, product and common-`S` conditions.
pub const TOL_EQ: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalityReport {
    pub equality_residual: f64,
    pub product_value: f64,
    /// `max S_xy − min S_xy`.
    pub s_spread: f64,
    pub s: [[f64; 2]; 2],
    /// `None` outside the criterion's domain (local points, or a vanishing
    /// `S_xy` as at deterministic points).
    pub passes: Option<bool>,
}

fn s_root(cxy: f64, cx: f64, cy: f64) -> f64 {
    let q = cxy * cxy - cx * cx - cy * cy + 1.0;
    let d = q * q - 4.0 * (cxy - cx * cy) * (cxy - cx * cy);
    0.5 * (q + sqrt(d.max(0.0)))
}

pub fn extremality_check(c: &Correlators, tol_eq: f64) -> ExtremalityReport {
    let mut s = [[0.0; 2]; 2];
    let mut cbar = [[0.0; 2]; 2];
    let mut product = 1.0;
    let mut degenerate = false;
    for x in 0..2 {
        for y in 0..2 {
            let (cxy, cx, cy) = (c.axby[x][y], c.ax[x], c.by[y]);
            let sxy = s_root(cxy, cx, cy);
            let r = sqrt(sxy);
            let dx = cx * cx + r + sxy;
            let dy = cy * cy + r + sxy;
            if sxy <= tol_eq || dx <= tol_eq || dy <= tol_eq {
                degenerate = true;
            }
            s[x][y] = sxy;
            cbar[x][y] = (cxy * (1.0 + r) / sqrt(dx * dy)).clamp(-1.0, 1.0);
            product *= (1.0 - sxy) * cxy - cx * cy;
        }
    }
    let comp = |v: f64| sqrt((1.0 - v * v).max(0.0));
    let equality_residual = cbar[0][0] * cbar[0][1]
        - cbar[1][0] * cbar[1][1]
        - comp(cbar[0][0]) * comp(cbar[0][1])
        - comp(cbar[1][0]) * comp(cbar[1][1]);
    let flat = [s[0][0], s[0][1], s[1][0], s[1][1]];
    let s_spread = flat.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - flat.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let passes = if degenerate || c.chsh().abs() <= 2.0 {
        None
    } else {
        Some(equality_residual.abs() <= tol_eq && product >= -tol_eq && s_spread <= tol_eq)
    };
    ExtremalityReport {
        equality_residual,
        product_value: product,
        s_spread,
        s,
        passes,
    }
}

/// Vertices spanning the face of the witness: PR box 1 plus the LDs on it.
pub fn face_vertices(kind: WitnessKind) -> Result<Vec<Behavior>> {
    let lds: &[usize] = match kind {
        WitnessKind::Hardy => &HARDY_LD,
        WitnessKind::Cl => &CL_LD,
        WitnessKind::Chsh => return Err(Error::Invalid("extremal scan needs a Hardy or CL witness".into())),
    };
    let mut v = Vec::with_capacity(lds.len() + 1);
    v.push(pr_box(1));
    v.extend(lds.iter().map(|&k| ld(k)));
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub witness_value: f64,
    /// Min-entropy at the best setting pair.
    pub r_max_bits: f64,
    /// `−log₂` of the largest probability over all settings and outcomes.
    pub r_guaranteed_bits: f64,
    pub params: Params,
    pub sign: StateSign,
    pub residual_max: f64,
    pub report: ExtremalityReport,
}

impl ScanPoint {
    fn new(kind: WitnessKind, params: Params, sign: StateSign, residual_max: f64, tol_eq: f64) -> Self {
        let b = Behavior::from_array_unchecked(probs(&params, sign.value()));
        let w: f64 = kind.functional().iter().zip(b.probs()).map(|(f, p)| f * p).sum();
        ScanPoint {
            witness_value: w,
            r_max_bits: max_min_entropy(&b).1,
            r_guaranteed_bits: -log2(guessing_probability(&b).0),
            params,
            sign,
            residual_max,
            report: extremality_check(&b.correlators(), tol_eq),
        }
    }

    pub fn behavior(&self) -> Behavior {
        Behavior::from_array_unchecked(probs(&self.params, self.sign.value()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol_eq: f64,
    /// Re-optimize each survivor's min-entropy at its own witness value.
    pub refine: bool,
    /// Dirichlet concentration on PR box 1 (1 on each LD).
    pub pr_concentration: f64,
}

impl ScanConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        ScanConfig {
            samples,
            seed,
            tol_eq: TOL_EQ,
            refine: true,
            pr_concentration: 1.0,
        }
    }
}

fn quantum_max(kind: WitnessKind) -> f64 {
    match kind {
        WitnessKind::Cl => MAX_CL,
        _ => max_hardy(),
    }
}

// Dirichlet weights with concentration `lead` on the first vertex and 1 on the rest.
fn dirichlet(rng: &mut ChaCha8Rng, n: usize, lead: f64) -> Vec<f64> {
    let gamma = Gamma::new(lead, 1.0).expect("positive shape");
    let mut w: Vec<f64> = (0..n).map(|i| if i == 0 { gamma.sample(rng) } else { Exp1.sample(rng) }).collect();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// Samples mixtures of the face vertices and moves each onto the nearest pure
/// two-qubit realization obeying the zero constraints (at the mixture's
/// witness value when that is quantum-attainable). With `refine`, the
/// min-entropy is then maximized locally at that witness value. A sample
/// contributes the best of these points passing [`extremality_check`].
pub fn extremal_scan(kind: WitnessKind, samples: usize, seed: u64) -> Result<Vec<ScanPoint>> {
    extremal_scan_with(kind, &ScanConfig::new(samples, seed))
}

pub fn extremal_scan_with(kind: WitnessKind, cfg: &ScanConfig) -> Result<Vec<ScanPoint>> {
    let verts = face_vertices(kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let al = dd_config();
    let starts = start_points(cfg.samples, cfg.seed);
    let mut out = Vec::new();
    for start in &starts {
        let w = dirichlet(&mut rng, verts.len(), cfg.pr_concentration);
        let mut target = [0.0; 16];
        for (v, wi) in verts.iter().zip(&w) {
            for (t, p) in target.iter_mut().zip(v.probs()) {
                *t += wi * p;
            }
        }
        // nearest quantum point over both state signs, keeping the mixture's
        // witness value when a quantum point can carry it
        let w_mix: f64 = kind.functional().iter().zip(&target).map(|(f, p)| f * p).sum();
        let keep = (w_mix > 0.0 && w_mix < quantum_max(kind)).then_some(w_mix);
        let mut fit: Option<(Params, StateSign, f64)> = None;
        for sign in [StateSign::Minus, StateSign::Plus] {
            let prob = QuantumProblem::new(sign, kind, keep, Objective::Fit(target));
            let (p, f, ok) = local_solve(&prob, start, &al);
            if ok && fit.is_none_or(|b| f < b.2) {
                fit = Some((p, sign, f));
            }
        }
        let Some((p, sign, _)) = fit else { continue };
        let pt = ScanPoint::new(kind, p, sign, 0.0, cfg.tol_eq);
        if pt.witness_value <= cfg.tol_eq {
            continue;
        }
        let mut best = (pt.report.passes == Some(true)).then_some(pt.clone());
        if cfg.refine {
            if let Some(r) = refine(kind, &pt, cfg.tol_eq) {
                if best.as_ref().is_none_or(|b| r.r_max_bits > b.r_max_bits) {
                    best = Some(r);
                }
            }
        }
        out.extend(best);
    }
    Ok(out)
}

// Local min-entropy maximization at the point's witness value, started at the point.
fn refine(kind: WitnessKind, pt: &ScanPoint, tol_eq: f64) -> Option<ScanPoint> {
    let al = dd_config();
    let mut best: Option<ScanPoint> = None;
    for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let prob = QuantumProblem::new(pt.sign, kind, Some(pt.witness_value), Objective::Guess(x, y));
        let (p, _, ok) = local_solve(&prob, &pt.params, &al);
        if !ok {
            continue;
        }
        let res = prob.residuals(&p).iter().fold(0.0, |a: f64, r| a.max(r.abs()));
        let cand = ScanPoint::new(kind, p, pt.sign, res, tol_eq);
        if cand.report.passes == Some(true)
            && best.as_ref().is_none_or(|b| cand.r_max_bits > b.r_max_bits)
        {
            best = Some(cand);
        }
    }
    best
}

/// Scan point with the largest `r_max_bits`, optionally restricted to
/// witness values in `[lo, hi]`.
pub fn best_point(points: &[ScanPoint], window: Option<(f64, f64)>) -> Option<&ScanPoint> {
    points
        .iter()
        .filter(|p| window.is_none_or(|(lo, hi)| (lo..=hi).contains(&p.witness_value)))
        .fold(None, |b: Option<&ScanPoint>, p| match b {
            Some(q) if q.r_max_bits >= p.r_max_bits => Some(q),
            _ => Some(p),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{canonical_correlators, Family};
    use crate::vertices::VertexCatalog;
    use core::f64::consts::PI;

    fn check(f: Family) -> ExtremalityReport {
        extremality_check(&canonical_correlators(f).unwrap(), TOL_EQ)
    }

    #[test]
    fn max_hardy_is_extremal() {
        let r = check(Family::MaxHardy);
        assert_eq!(r.passes, Some(true));
        assert!(r.equality_residual.abs() < 1e-12);
        assert!(r.s_spread < 1e-12);
    }

    #[test]
    fn max_cl_is_extremal() {
        assert_eq!(check(Family::MaxCl).passes, Some(true));
    }

    #[test]
    fn tsirelson_point_is_extremal() {
        let r = check(Family::Case1);
        assert_eq!(r.passes, Some(true));
        assert!(r.equality_residual.abs() < 1e-12);
    }

    #[test]
    fn tilted_family_is_extremal_at_every_angle() {
        for k in 1..8 {
            let theta = PI / 4.0 * k as f64 / 8.0;
            assert_eq!(check(Family::Case3 { theta }).passes, Some(true), "theta {theta}");
            assert_eq!(check(Family::Case2 { t: 1.5, theta: PI / 4.0 }).passes, Some(true));
        }
    }

    #[test]
    fn vertices_are_outside_the_domain_or_fail() {
        let cat = VertexCatalog::new();
        for b in cat.ld {
            assert_eq!(extremality_check(&b.correlators(), TOL_EQ).passes, None);
        }
        for b in cat.pr {
            assert_ne!(extremality_check(&b.correlators(), TOL_EQ).passes, Some(true));
        }
    }

    #[test]
    fn noisy_point_fails() {
        let mut c = canonical_correlators(Family::MaxHardy).unwrap();
        for row in &mut c.axby {
            for v in row {
                *v *= 0.97;
            }
        }
        assert_eq!(extremality_check(&c, TOL_EQ).passes, Some(false));
    }

    #[test]
    fn face_sets() {
        assert_eq!(face_vertices(WitnessKind::Hardy).unwrap().len(), 6);
        assert_eq!(face_vertices(WitnessKind::Cl).unwrap().len(), 10);
        assert!(face_vertices(WitnessKind::Chsh).is_err());
    }

    #[test]
    fn scan_survivors_are_feasible_and_extremal() {
        let pts = extremal_scan(WitnessKind::Hardy, 12, 7).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert_eq!(p.report.passes, Some(true));
            assert!(p.residual_max <= 1e-8);
            let b = p.behavior();
            for &c in WitnessKind::Hardy.zero_cells() {
                assert!(b.probs()[c].abs() <= 1e-8);
            }
            assert!(p.r_guaranteed_bits <= p.r_max_bits + 1e-12);
        }
        assert_eq!(pts, extremal_scan(WitnessKind::Hardy, 12, 7).unwrap());
    }
}
