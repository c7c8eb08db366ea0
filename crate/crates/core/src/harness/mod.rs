//! Experiment sweeps, cross-validation between the recurrence and the
//! surface, and report assembly.

mod report;
mod runs;

use std::path::Path;

pub use report::{
    emit_report, write_checks, write_ratio_csv, write_recurrence_csv, write_zeros_csv, VerificationReport,
};
pub use runs::*;

use crate::checks::Check;
use crate::error::Result;
use crate::limits::LimitTable;
use crate::measures::StarSystemConfig;
use crate::surface::solve_uniformization;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub lambda_max: u64,
    pub ratio_lambdas: Vec<u64>,
    pub ratio_points: usize,
    pub ratio_gap: f64,
    pub ratio_tolerance: f64,
    pub structure_n: u64,
    /// Indices n for the norm identity, each paired with k = n mod p.
    pub knorm_n: Vec<u64>,
    pub boundary_rhos: Vec<i64>,
    pub stability_bits: u32,
    pub counting_p: Vec<usize>,
    pub surface_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            lambda_max: 20,
            ratio_lambdas: vec![10, 15, 20],
            ratio_points: 20,
            ratio_gap: 0.5,
            ratio_tolerance: 1e-2,
            structure_n: 60,
            knorm_n: vec![12, 13, 14, 15, 20, 21],
            boundary_rhos: vec![0, 1, 2],
            stability_bits: 512,
            counting_p: vec![2, 3, 4],
            surface_samples: 100,
        }
    }
}

/// A finished verification with the data behind the plot files.
pub struct Verification {
    pub report: VerificationReport,
    pub convergence: Option<ConvergenceRun>,
    pub ratios: Vec<RatioRun>,
    pub structure: Option<StructureRun>,
}

impl Verification {
    /// checks.json plus recurrence.csv, ratio.csv and zeros.csv.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_checks(dir, &self.report)?;
        if let Some(c) = &self.convergence {
            write_recurrence_csv(&dir.join("recurrence.csv"), &c.data)?;
        }
        if !self.ratios.is_empty() {
            write_ratio_csv(&dir.join("ratio.csv"), &self.ratios)?;
        }
        if let Some(s) = &self.structure {
            write_zeros_csv(&dir.join("zeros.csv"), s)?;
        }
        Ok(())
    }
}

struct Collector {
    checks: Vec<Check>,
    warnings: Vec<String>,
}

impl Collector {
    fn take<T>(&mut self, stage: &str, anchor: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                log::error!("{stage}: {e}");
                self.warnings.push(format!("{stage}: {e}"));
                self.checks.push(Check::errored(stage, anchor, 0.0));
                None
            }
        }
    }
}

/// Ratio checks at the largest λ and monotone decay across λ.
pub fn ratio_checks(run: &RatioRun, lambdas: &[u64], tolerance: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let Some(&last) = lambdas.last() else { return out };
    let ks: Vec<usize> = run.rows.iter().filter(|r| r.lambda == last).map(|r| r.k).collect();
    for k in ks {
        let dev = run.deviation(last, k).unwrap_or(f64::NAN);
        out.push(Check::at_most(
            format!("ratio asymptotics rho={} k={k} lambda={last}", run.rho),
            "ratio asymptotics",
            dev,
            tolerance,
        ));
        let seq: Vec<f64> = lambdas.iter().map(|&l| run.deviation(l, k).unwrap_or(f64::NAN)).collect();
        let rises = seq.windows(2).filter(|w| !(w[1] < w[0])).count();
        out.push(Check::at_most(
            format!("ratio deviation decreasing in lambda rho={} k={k}", run.rho),
            "ratio asymptotics",
            rises as f64,
            0.0,
        ));
    }
    out
}

/// The whole suite for one configuration.
pub fn verify(config: &StarSystemConfig, options: &VerifyOptions) -> Result<Verification> {
    config.validate()?;
    let shape = config.shape();
    let p = shape.p();
    let per = shape.period() as i64;
    let mut col = Collector { checks: Vec::new(), warnings: Vec::new() };

    let counting = run_counting_suite(&options.counting_p)?;
    col.checks.push(counting.check());
    col.checks.push(counting.negative_control());

    let table = col.take("surface", "genus-zero surface", solve_uniformization(config).and_then(LimitTable::build));
    if let Some(table) = &table {
        if let Some(c) = col.take("surface certificate", "genus-zero surface", surface_checks(table, options.surface_samples)) {
            col.checks.extend(c);
        }
        if let Some(d) = col.take(
            "precision doubling",
            "genus-zero surface",
            precision_stability(config, table, options.stability_bits),
        ) {
            col.checks.push(Check::at_most(
                format!("surface stable under {} bits", options.stability_bits),
                "genus-zero surface",
                d,
                1e-10,
            ));
        }
        if let Some(c) = col.take("limit identities", "limits from the conformal maps", limit_checks(table)) {
            col.checks.extend(c);
        }
        if let Some(c) = col.take("boundary constancy", "boundary value equations", boundary_checks(table, &options.boundary_rhos)) {
            col.checks.extend(c);
        }
    }

    let convergence = col.take("convergence", "existence of the periodic limits", run_convergence(config, options.lambda_max));
    let mut ratios = Vec::new();
    if let Some(run) = &convergence {
        col.warnings.extend(run.data.warnings.iter().cloned());
        col.checks.extend(run.checks.iter().cloned());
        if let Some(table) = &table {
            col.checks.extend(crossval(run, table).checks);
            let grid = ratio_grid(table, options.ratio_points, options.ratio_gap);
            let mut rhos = vec![0, p, per as usize - 1];
            rhos.dedup();
            for rho in rhos {
                let r = ratio_deviations(&run.data, table, rho, &options.ratio_lambdas, &grid);
                if let Some(r) = col.take(&format!("ratio rho={rho}"), "ratio asymptotics", r) {
                    col.checks.extend(ratio_checks(&r, &options.ratio_lambdas, options.ratio_tolerance));
                    ratios.push(r);
                }
            }
        }
    }

    let structure_data =
        col.take("structure", "orthogonality conditions", RecurrenceData::prepare(config, options.structure_n, PrecisionPolicy::Keep));
    let mut structure = None;
    if let Some(data) = &structure_data {
        col.warnings.extend(data.warnings.iter().cloned());
        if let Some(s) = col.take("structure", "orthogonality conditions", structure_checks(data, options.structure_n)) {
            col.checks.extend(s.checks.iter().cloned());
            structure = Some(s);
        }
        let knorm_pairs: Vec<(u64, usize)> = options.knorm_n.iter().map(|&n| (n, (n % p as u64) as usize)).collect();
        if let Some(c) = col.take("K-norm", "recurrence coefficients from norms", knorm_checks(&data.set, &knorm_pairs)) {
            col.checks.extend(c);
        }
    }

    let report = VerificationReport {
        config_name: config.name.clone(),
        config_digest: config.digest(),
        precision_bits: config.precision_bits,
        quad_nodes: config.quad_nodes,
        lambda_max: options.lambda_max,
        seed: config.seed,
        checks: col.checks,
        warnings: col.warnings,
    };
    Ok(Verification { report, convergence, ratios, structure })
}
