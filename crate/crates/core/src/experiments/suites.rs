//! Seeded verification corpora for the harmonic-analysis estimates.
//!
//! Every suite is a deterministic function of its [`SuiteParams`]; the
//! default parameters are the ones whose maxima are frozen in
//! [`crate::calibration`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Table};
use crate::error::{arg, Error, Result};
use crate::field::random::{random_scalar, random_vector, SpectrumSpec};
use crate::field::{Grid, GridField};
use crate::lp_bank::{verify_low_freq_bound, LPFilterBank, Profile};
use crate::maximal::{hl_maximal, maximal_of_values, verify_fefferman_stein, verify_pointwise_bound, MaximalConfig, Window};
use crate::norms::kernel_l1_bound;
use crate::norms::{lp_norm, norm, verify_embedding, verify_equivalence, verify_lifting, NormSpec};
use crate::paraproduct::{
    counterexample_scan, verify_commutator_estimate, verify_moser, verify_moser_transport, CommutatorForm, ScanFamily,
    TransportForm,
};

/// Spectral envelope of the corpus fields: `|k|^{−2}` on `1 ≤ |k| ≤ n/6`,
/// so that factors of a product stay inside the dealiasing box.
pub fn corpus_spectrum(grid: &Grid, seed: u64) -> SpectrumSpec {
    let k_hi = (grid.dealias_cutoff() / 2).max(1) as f64;
    SpectrumSpec::new(2.0, 1.0, k_hi, seed)
}

pub fn corpus_scalar(grid: Grid, seed: u64) -> Result<GridField> {
    random_scalar(grid, &corpus_spectrum(&grid, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Moser,
    MoserTransport,
    MoserValue,
    Commutator,
    CommutatorNonendpoint,
    Equivalence,
    Embedding,
    Lifting,
    LowFrequency,
    Maximal,
    FeffermanStein,
    KernelL1,
    CounterexampleScan,
}

impl Suite {
    pub const ALL: [Suite; 13] = [
        Suite::Moser,
        Suite::MoserTransport,
        Suite::MoserValue,
        Suite::Commutator,
        Suite::CommutatorNonendpoint,
        Suite::Equivalence,
        Suite::Embedding,
        Suite::Lifting,
        Suite::LowFrequency,
        Suite::Maximal,
        Suite::FeffermanStein,
        Suite::KernelL1,
        Suite::CounterexampleScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Moser => "moser",
            Suite::MoserTransport => "moser-transport",
            Suite::MoserValue => "moser-value",
            Suite::Commutator => "commutator",
            Suite::CommutatorNonendpoint => "commutator-nonendpoint",
            Suite::Equivalence => "equivalence",
            Suite::Embedding => "embedding",
            Suite::Lifting => "lifting",
            Suite::LowFrequency => "low-frequency",
            Suite::Maximal => "maximal",
            Suite::FeffermanStein => "fefferman-stein",
            Suite::KernelL1 => "kernel-l1",
            Suite::CounterexampleScan => "counterexample-scan",
        }
    }

    /// Default corpus: grid `n = 64`, `d = 2`, seeds `7, 8, …`.
    pub fn default_params(self) -> SuiteParams {
        let (s, p, q, count) = match self {
            Suite::Moser => (3.0, 1.0, 1.0, 50),
            Suite::MoserTransport | Suite::MoserValue => (0.0, 1.0, 2.0, 50),
            Suite::Commutator => (3.0, 1.0, 1.0, 30),
            Suite::CommutatorNonendpoint => (2.5, 2.0, 2.0, 30),
            Suite::Equivalence => (2.0, 2.0, 2.0, 100),
            Suite::Embedding => (3.0, 1.0, 2.0, 50),
            Suite::Lifting => (1.0, 2.0, 2.0, 50),
            Suite::LowFrequency => (2.0, 2.0, 2.0, 50),
            Suite::Maximal => (0.0, 2.0, 2.0, 20),
            Suite::FeffermanStein => (0.0, 2.0, 2.0, 20),
            Suite::KernelL1 => (0.0, 1.0, 1.0, 1),
            Suite::CounterexampleScan => (1.5, 2.0, 2.0, 1),
        };
        SuiteParams { n: 64, dim: 2, s, p, q, seed: DEFAULT_SEED, count }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown suite '{s}'")))
    }
}

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub n: usize,
    pub dim: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
    pub count: usize,
}

impl SuiteParams {
    fn seeds(&self) -> impl Iterator<Item = u64> {
        let base = self.seed;
        (0..self.count as u64).map(move |i| base + i)
    }
}

fn report_for(suite: Suite, params: &SuiteParams) -> ExperimentReport {
    let mut r = ExperimentReport::new(suite.name(), params.s, params.p, params.q, params.dim, params.n);
    r.meta("count", params.count);
    r.meta("base_seed", params.seed);
    r
}

/// Run one suite.
pub fn run_suite(suite: Suite, params: &SuiteParams) -> Result<ExperimentReport> {
    if params.count == 0 {
        return arg("corpus size must be positive");
    }
    let grid = Grid::new(params.dim, params.n)?;
    let bank = LPFilterBank::new(grid, Profile::SmoothStep);
    let mut report = report_for(suite, params);
    match suite {
        Suite::Moser => {
            let spec = NormSpec::tl(params.s, params.p, params.q)?.homogeneous();
            for seed in params.seeds() {
                let f = corpus_scalar(grid, 2 * seed)?;
                let g = corpus_scalar(grid, 2 * seed + 1)?;
                report.record(seed, verify_moser(&bank, &f, &g, &spec)?);
            }
        }
        Suite::MoserTransport | Suite::MoserValue => {
            let spec = NormSpec::tl(params.s, params.p, params.q)?.homogeneous();
            let form = if suite == Suite::MoserTransport { TransportForm::GradientSup } else { TransportForm::ValueSup };
            for seed in params.seeds() {
                let u = random_vector(grid, &corpus_spectrum(&grid, 2 * seed))?;
                let v = corpus_scalar(grid, 2 * seed + 1)?;
                report.record(seed, verify_moser_transport(&bank, &u, &v, &spec, form)?);
            }
        }
        Suite::Commutator | Suite::CommutatorNonendpoint => {
            let spec = NormSpec::tl(params.s, params.p, params.q)?.homogeneous();
            for seed in params.seeds() {
                let f = random_vector(grid, &corpus_spectrum(&grid, 2 * seed))?;
                let g = corpus_scalar(grid, 2 * seed + 1)?;
                report.record(seed, verify_commutator_estimate(&bank, &f, &g, &spec, CommutatorForm::GradientSup)?);
            }
        }
        Suite::Equivalence => {
            // the L^∞ ≤ B^0_{∞,1} chain is checked on the same corpus
            let chain = NormSpec::besov(0.0, f64::INFINITY, 1.0)?;
            let mut violations = 0usize;
            let mut table = Table::new(&["seed", "r", "sup_over_besov"]);
            for seed in params.seeds() {
                let f = corpus_scalar(grid, seed)?;
                let (r, _) = verify_equivalence(&bank, &f, params.s, params.p, params.q)?;
                let sup = lp_norm(&f, f64::INFINITY);
                let b = norm(&bank, &f, &chain)?;
                if sup > b {
                    violations += 1;
                }
                report.record(seed, r);
                table.push(vec![seed as f64, r, sup / b]);
            }
            report.table = table;
            report.meta("chain_violations", violations);
        }
        Suite::Embedding => {
            let d = params.dim as f64;
            let p1 = 2.0 * params.p;
            let s1 = params.s - d / params.p + d / p1;
            report.meta("target", (s1, p1));
            for seed in params.seeds() {
                let f = corpus_scalar(grid, seed)?;
                report.record(seed, verify_embedding(&bank, &f, (params.s, params.p, params.q), (s1, p1))?);
            }
        }
        Suite::Lifting => {
            for seed in params.seeds() {
                let f = corpus_scalar(grid, seed)?;
                let (r, _) = verify_lifting(&bank, &f, params.s, params.p, params.q, 1)?;
                report.record(seed, r);
            }
        }
        Suite::LowFrequency => {
            for seed in params.seeds() {
                let f = corpus_scalar(grid, seed)?;
                report.record(seed, verify_low_freq_bound(&bank, &f, params.s, params.p, params.q, 3, 1.0)?);
            }
        }
        Suite::Maximal => run_maximal(&bank, params, &mut report)?,
        Suite::FeffermanStein => {
            let cfg = MaximalConfig::dyadic(grid, Window::Cube);
            for seed in params.seeds() {
                let f = corpus_scalar(grid, seed)?;
                let blocks: Vec<GridField> = bank.decompose(&f)?.blocks.into_iter().take(8).collect();
                report.record(seed, verify_fefferman_stein(&blocks, params.p, params.q, &cfg)?);
            }
        }
        Suite::KernelL1 => run_kernel(params, &mut report)?,
        Suite::CounterexampleScan => {
            let top = (grid.dealias_cutoff() as f64).log2().floor() as u32;
            let scales: Vec<u32> = (1..=top).collect();
            let mut scan =
                counterexample_scan(&bank, ScanFamily::Lacunary, params.s, params.p, params.q, &scales, params.seed)?;
            scan.meta("count", params.count);
            scan.meta("base_seed", params.seed);
            report = scan;
        }
    }
    Ok(report)
}

/// Lags `j − k ∈ {0,…,4}` at `j = 4`, `θ = 1`, `r = ½`, plus pointwise
/// sublinearity and monotonicity checks of the maximal operator.
fn run_maximal(bank: &LPFilterBank, params: &SuiteParams, report: &mut ExperimentReport) -> Result<()> {
    let grid = bank.grid();
    let cfg = MaximalConfig::dyadic(grid, Window::Cube);
    let j = 4usize;
    let mut table = Table::new(&["seed", "lag", "ratio"]);
    let mut violations = 0usize;
    for seed in params.seeds() {
        let f = random_scalar(grid, &SpectrumSpec::new(2.0, 1.0, 2f64.powi(j as i32), seed))?;
        for lag in 0..=4usize {
            let k = j - lag;
            let r = verify_pointwise_bound(bank, &f, j, k, 1.0, 0.5, &cfg)?;
            report.record(seed, r);
            table.push(vec![seed as f64, lag as f64, r]);
        }
        let g = corpus_scalar(grid, seed + 1_000)?;
        let mf = hl_maximal(&f, &cfg).real_values();
        let mg = hl_maximal(&g, &cfg).real_values();
        let mfg = hl_maximal(&f.add(&g), &cfg).real_values();
        let abs_sum: Vec<f64> = f.abs_values().iter().zip(g.abs_values()).map(|(a, b)| a + b).collect();
        let m_abs_sum = maximal_of_values(grid, &abs_sum, &cfg);
        for x in 0..grid.len() {
            if mfg[x] > mf[x] + mg[x] + 1e-12 * (mf[x] + mg[x]).max(1.0) {
                violations += 1;
            }
            if mf[x] > m_abs_sum[x] * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    report.table = table;
    report.meta("j", j);
    report.meta("theta", 1.0);
    report.meta("r", 0.5);
    report.meta("sublinearity_monotonicity_violations", violations);
    Ok(())
}

/// Box refinement of the kernel suite (box side `2^7`).
pub const KERNEL_REFINEMENT: u32 = 7;

/// Every index triple `(l, k, i)` at refinements 7 and 8; the recorded
/// ratio is the partial sum at refinement 7.
fn run_kernel(params: &SuiteParams, report: &mut ExperimentReport) -> Result<()> {
    let d = params.dim;
    let mut table = Table::new(&["l", "k", "i", "sum", "sum_refined", "relative_change", "worst_term_ratio"]);
    let mut worst_change: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut id = 0u64;
    for l in 1..=d {
        for k in 1..=d {
            for i in 1..=d {
                let a = kernel_l1_bound(Profile::SmoothStep, d, l, k, i, KERNEL_REFINEMENT)?;
                let b = kernel_l1_bound(Profile::SmoothStep, d, l, k, i, KERNEL_REFINEMENT + 1)?;
                let change = if a.value == 0.0 { 0.0 } else { (b.value - a.value).abs() / a.value };
                let term_ratio = a
                    .terms
                    .windows(2)
                    .filter(|w| w[1].0 <= -2 && w[0].1 > 0.0)
                    .map(|w| w[1].1 / w[0].1)
                    .fold(0.0, f64::max);
                worst_change = worst_change.max(change);
                worst_ratio = worst_ratio.max(term_ratio);
                report.record(id, a.value);
                id += 1;
                table.push(vec![l as f64, k as f64, i as f64, a.value, b.value, change, term_ratio]);
            }
        }
    }
    report.table = table;
    report.meta("worst_relative_change", worst_change);
    report.meta("worst_term_ratio", worst_ratio);
    report.note("seeds enumerate the index triples (l, k, i) in lexicographic order");
    Ok(())
}
