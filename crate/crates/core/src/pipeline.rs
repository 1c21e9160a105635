//! End-to-end reproduction: witness sweep, distances to the limit Gram
//! matrix, certificates at the finite and the target phase, and the
//! determinant obstruction, one row per dimension.

use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::{certificate, det_obstruction, scalar_factorization, ScalarFactorization, CERT_TOL};
use crate::error::Result;
use crate::gram::compute_gram;
use crate::witness::{build_symmetries, choose_parameters, limit_gram, witness_from_quadruple};

pub const DET_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub kappa: f64,
    pub dims: Vec<usize>,
    pub n: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            kappa: std::f64::consts::SQRT_2 - 1.0,
            dims: vec![64, 128, 256, 512],
            n: 8,
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineRow {
    pub d: usize,
    pub m: usize,
    pub theta: f64,
    /// `max_ij |G_d − G_∞|`.
    pub limit_error: f64,
    pub c1_theta: f64,
    pub c2_theta: f64,
    pub c3_theta: f64,
    pub c4_theta: f64,
    pub c1_kappa: f64,
    pub c2_kappa: f64,
    pub c3_kappa: f64,
    pub c4_kappa: f64,
    /// Determinant of `S₁S₂S₃S₄`.
    pub det_re: f64,
    pub det_im: f64,
    /// Whether `e^{2πiκ}I` is excluded as a product of symmetries in `M_d`.
    pub scalar_excluded: bool,
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub kappa: f64,
    pub rows: Vec<PipelineRow>,
    pub convergence_non_increasing: bool,
    pub certificates_at_theta: bool,
    pub determinants_pm_one: bool,
    pub obstruction_everywhere: bool,
}

impl PipelineReport {
    pub fn ok(&self) -> bool {
        self.convergence_non_increasing
            && self.certificates_at_theta
            && self.determinants_pm_one
            && self.obstruction_everywhere
    }
}

pub fn pipeline_check(opts: &PipelineOptions) -> Result<PipelineReport> {
    let limit = limit_gram(opts.kappa, opts.n)?;
    let rows = opts
        .dims
        .par_iter()
        .map(|&d| -> Result<PipelineRow> {
            let m = choose_parameters(opts.kappa, d)?;
            let q = build_symmetries(d, m)?;
            let g = compute_gram(&witness_from_quadruple(&q, opts.n)?);
            let limit_error = g.max_abs_diff(&limit)?;
            let at_theta = certificate(&g, m as f64 / (2 * d) as f64)?;
            let at_kappa = certificate(&g, opts.kappa)?;
            let det = det_obstruction(q.symmetries(), &q.algebra())?.per_block[0];
            let scalar_excluded = matches!(
                scalar_factorization(&[d], opts.kappa, DET_TOL),
                ScalarFactorization::Excluded { .. }
            );
            Ok(PipelineRow {
                d,
                m,
                theta: q.theta(),
                limit_error,
                c1_theta: at_theta.c[0],
                c2_theta: at_theta.c[1],
                c3_theta: at_theta.c[2],
                c4_theta: at_theta.c[3],
                c1_kappa: at_kappa.c[0],
                c2_kappa: at_kappa.c[1],
                c3_kappa: at_kappa.c[2],
                c4_kappa: at_kappa.c[3],
                det_re: det.re,
                det_im: det.im,
                scalar_excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let convergence_non_increasing = rows.windows(2).all(|w| w[1].limit_error <= w[0].limit_error);
    let certificates_at_theta = rows.iter().all(|r| {
        [r.c1_theta, r.c2_theta, r.c3_theta, r.c4_theta]
            .iter()
            .all(|c| (c - 2.0).abs() <= CERT_TOL)
    });
    let determinants_pm_one = rows.iter().all(|r| {
        let z = crate::algebra::C64::new(r.det_re, r.det_im);
        crate::witness::distance_to_sign(z) <= DET_TOL
    });
    let obstruction_everywhere = rows.iter().all(|r| r.scalar_excluded);
    Ok(PipelineReport {
        kappa: opts.kappa,
        rows,
        convergence_non_increasing,
        certificates_at_theta,
        determinants_pm_one,
        obstruction_everywhere,
    })
}
