//! Frozen calibration brackets.
//!
//! Each entry is the `[min, max]` ratio range measured once by
//! `lpe calibrate` on a suite's default corpus (grid 64², base seed 7).
//! Regression checks accept a rerun whose maximum stays within twice the
//! stored maximum and, for two-sided brackets, whose minimum stays above
//! half the stored minimum.

use crate::experiments::report::ExperimentReport;
use crate::experiments::suites::{Suite, SuiteParams};

/// Regression factor applied to stored brackets.
pub const FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub suite: Suite,
    pub min: f64,
    pub max: f64,
    /// Whether the lower edge is checked too.
    pub two_sided: bool,
}

impl Calibration {
    pub fn accepts(&self, report: &ExperimentReport) -> bool {
        let upper = report.max <= FACTOR * self.max;
        let lower = !self.two_sided || report.min() >= self.min / FACTOR;
        upper && lower
    }
}

const TABLE: [Calibration; 13] = [
    Calibration { suite: Suite::Moser, min: 0.3104617101999525, max: 0.4973235786010071, two_sided: false },
    Calibration { suite: Suite::MoserTransport, min: 0.11026273292904588, max: 0.17368380955639842, two_sided: false },
    Calibration { suite: Suite::MoserValue, min: 0.09925184774425011, max: 0.1894013100568129, two_sided: false },
    Calibration { suite: Suite::Commutator, min: 0.38668596151727397, max: 0.5309292012485646, two_sided: false },
    Calibration { suite: Suite::CommutatorNonendpoint, min: 0.31107848710126396, max: 0.4273085570235212, two_sided: false },
    Calibration { suite: Suite::Equivalence, min: 0.7980415183258627, max: 0.9260656529303073, two_sided: true },
    Calibration { suite: Suite::Embedding, min: 0.041942671609236364, max: 0.04878941127850132, two_sided: false },
    Calibration { suite: Suite::Lifting, min: 0.9975818357756071, max: 1.0342604812820988, two_sided: true },
    Calibration { suite: Suite::LowFrequency, min: 0.2535782593545786, max: 0.33790540591193974, two_sided: false },
    Calibration { suite: Suite::Maximal, min: 1.9642182397580708e-05, max: 0.2881422026304129, two_sided: false },
    Calibration { suite: Suite::FeffermanStein, min: 1.127042604087988, max: 1.1551866442084466, two_sided: false },
    Calibration { suite: Suite::KernelL1, min: 1.175331573502441, max: 2.372394281563521, two_sided: false },
    Calibration { suite: Suite::CounterexampleScan, min: 0.05150276089791142, max: 0.1319643074415455, two_sided: false },
];

pub fn stored(suite: Suite) -> Calibration {
    *TABLE.iter().find(|c| c.suite == suite).expect("every suite is calibrated")
}

/// The stored bracket, provided `params` are the suite's calibrated
/// defaults (a larger corpus with the same base seed also qualifies, as it
/// contains the calibration corpus).
pub fn lookup(suite: Suite, params: &SuiteParams) -> Option<Calibration> {
    let d = suite.default_params();
    let same = params.n == d.n
        && params.dim == d.dim
        && params.s == d.s
        && params.p == d.p
        && params.q == d.q
        && params.seed == d.seed;
    (same && params.count >= d.count).then(|| stored(suite))
}
