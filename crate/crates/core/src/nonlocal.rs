//! Back-to-back two-photon interferometer: a path-entangled pair, one phase
//! shifter and one 50/50 splitter per side, two detectors per side.
//!
//! The source emits `(|s,s> + |d,d>)/√2` over solid/dashed paths. A's shifter
//! sits on A's dashed path and B's on B's solid path, so the pair acquires
//! the relative phase `φ_A - φ_B` and every joint statistic depends only on
//! `φ_B - φ_A`. B's detectors are labeled so that equal phases give perfect
//! agreement (`A1` with `B1`, `A2` with `B2`).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QError, Result};
use crate::optics::{beam_splitter, mzi_probabilities, MziConfig};
use crate::qcore::{partial_trace, phase, Basis, BipartiteState, CMatrix, Side};

pub const SOLID: &str = "s";
pub const DASHED: &str = "d";
pub const A1: &str = "A1";
pub const A2: &str = "A2";
pub const B1: &str = "B1";
pub const B2: &str = "B2";

/// Margins above this count as a violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-9;

/// Correlated-outcome transcription of the 1964 inequality.
pub const BELL_1964_CONVENTION: &str =
    "|E(a,b) - E(a,c)| <= 1 - E(b,c); E = +1 at equal settings, outcomes at B relabeled from the anticorrelated form";
pub const CHSH_CONVENTION: &str = "|E(a,b) - E(a,b') + E(a',b) + E(a',b')| <= 2";

pub fn path_basis() -> Basis {
    Basis::new([SOLID, DASHED]).expect("static labels")
}

pub fn detector_basis(side: Side) -> Basis {
    match side {
        Side::A => Basis::new([A1, A2]),
        Side::B => Basis::new([B1, B2]),
    }
    .expect("static labels")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RtoConfig {
    pub phi_a: f64,
    pub phi_b: f64,
}

impl RtoConfig {
    pub fn new(phi_a: f64, phi_b: f64) -> Self {
        RtoConfig { phi_a, phi_b }
    }

    /// `φ_B - φ_A`.
    pub fn difference(&self) -> f64 {
        self.phi_b - self.phi_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationStats {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
    pub p_corr: f64,
    pub p_anti: f64,
    pub e: f64,
}

impl CorrelationStats {
    pub fn from_joint(p11: f64, p12: f64, p21: f64, p22: f64) -> Result<Self> {
        for (name, p) in [("p11", p11), ("p12", p12), ("p21", p21), ("p22", p22)] {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(QError::DomainError {
                    name,
                    value: p,
                    range: "[0, 1]",
                });
            }
        }
        let total = p11 + p12 + p21 + p22;
        if (total - 1.0).abs() > 1e-12 {
            return Err(QError::DomainError {
                name: "p11 + p12 + p21 + p22",
                value: total,
                range: "{1}",
            });
        }
        let p_corr = p11 + p22;
        let p_anti = p12 + p21;
        Ok(CorrelationStats {
            p11,
            p12,
            p21,
            p22,
            p_corr,
            p_anti,
            e: p_corr - p_anti,
        })
    }

    /// Joint probabilities in `(A1,B1), (A1,B2), (A2,B1), (A2,B2)` order.
    pub fn joint(&self) -> [f64; 4] {
        [self.p11, self.p12, self.p21, self.p22]
    }
}

/// Post-splitter two-photon state over `{A1, A2} x {B1, B2}`.
pub fn rto_state(cfg: &RtoConfig) -> BipartiteState {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // rows: A path, cols: B path; B's shifter on solid, A's on dashed
    let source = CMatrix::from_row_slice(2, 2, &[h * phase(cfg.phi_b), zero, zero, h * phase(cfg.phi_a)]);
    let paths = BipartiteState::new(path_basis(), path_basis(), source).expect("unit source");
    let bs = beam_splitter();
    let out = paths.evolve_local(&bs, &bs).expect("2x2 splitters");
    // splitter ports 0,1 -> A1,A2 and B2,B1
    let swapped = CMatrix::from_fn(2, 2, |i, j| out.amplitudes()[(i, 1 - j)]);
    BipartiteState::new(detector_basis(Side::A), detector_basis(Side::B), swapped).expect("unit output")
}

pub fn joint_probs(cfg: &RtoConfig) -> CorrelationStats {
    let s = rto_state(cfg);
    let p = |a, b| s.probability(a, b).expect("detector labels");
    let (p11, p12, p21, p22) = (p(A1, B1), p(A1, B2), p(A2, B1), p(A2, B2));
    let p_corr = p11 + p22;
    let p_anti = p12 + p21;
    CorrelationStats {
        p11,
        p12,
        p21,
        p22,
        p_corr,
        p_anti,
        e: p_corr - p_anti,
    }
}

/// `P(correlated) - P(anticorrelated)`.
pub fn degree_of_correlation(cfg: &RtoConfig) -> f64 {
    joint_probs(cfg).e
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Marginals {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Single-side detection probabilities, read off the reduced states.
pub fn marginals(cfg: &RtoConfig) -> Marginals {
    let s = rto_state(cfg);
    let ra = partial_trace(&s, Side::A).expect("bipartite").populations();
    let rb = partial_trace(&s, Side::B).expect("bipartite").populations();
    Marginals {
        a1: ra[0],
        a2: ra[1],
        b1: rb[0],
        b2: rb[1],
    }
}

fn corr(x: f64, y: f64) -> f64 {
    degree_of_correlation(&RtoConfig::new(x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellResult {
    pub settings: Vec<f64>,
    /// Signed combination before taking the absolute value.
    pub value: f64,
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub violated: bool,
    pub convention: &'static str,
}

impl BellResult {
    fn new(settings: Vec<f64>, value: f64, bound: f64, convention: &'static str) -> Self {
        let lhs = value.abs();
        let margin = lhs - bound;
        BellResult {
            settings,
            value,
            lhs,
            bound,
            margin,
            violated: margin > VIOLATION_THRESHOLD,
            convention,
        }
    }
}

/// `|E(a,b) - E(a,c)| <= 1 - E(b,c)`.
pub fn bell_1964(a: f64, b: f64, c: f64) -> BellResult {
    let value = corr(a, b) - corr(a, c);
    BellResult::new(vec![a, b, c], value, 1.0 - corr(b, c), BELL_1964_CONVENTION)
}

/// `S = E(a,b) - E(a,b2) + E(a2,b) + E(a2,b2)` against the local bound 2.
pub fn chsh(a: f64, a2: f64, b: f64, b2: f64) -> BellResult {
    let s = corr(a, b) - corr(a, b2) + corr(a2, b) + corr(a2, b2);
    BellResult::new(vec![a, a2, b, b2], s, 2.0, CHSH_CONVENTION)
}

/// Largest `|S|` reachable by deterministic local strategies, by enumerating
/// every `±1` outcome assignment. Settings that coincide on one side must
/// receive the same outcome.
pub fn chsh_local_max(a: f64, a2: f64, b: f64, b2: f64) -> f64 {
    let signs = [-1.0, 1.0];
    let mut best = f64::NEG_INFINITY;
    for &xa in &signs {
        for &xa2 in &signs {
            if a == a2 && xa != xa2 {
                continue;
            }
            for &yb in &signs {
                for &yb2 in &signs {
                    if b == b2 && yb != yb2 {
                        continue;
                    }
                    let s: f64 = xa * yb - xa * yb2 + xa2 * yb + xa2 * yb2;
                    best = best.max(s.abs());
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellScanRow {
    pub dphi: f64,
    pub bell_1964_margin: f64,
    pub chsh_margin: f64,
    pub best_margin: f64,
    pub violated: bool,
}

/// For each step, evaluates the ladders `(0, Δ, 2Δ)` and `(0, 2Δ, Δ, 3Δ)`.
pub fn bell_scan(grid: &[f64]) -> Result<Vec<BellScanRow>> {
    if grid.is_empty() {
        return Err(QError::EmptyGrid);
    }
    Ok(grid
        .iter()
        .map(|&d| {
            let b = bell_1964(0.0, d, 2.0 * d).margin;
            let c = chsh(0.0, 2.0 * d, d, 3.0 * d).margin;
            let best = b.max(c);
            BellScanRow {
                dphi: d,
                bell_1964_margin: b,
                chsh_margin: c,
                best_margin: best,
                violated: best > VIOLATION_THRESHOLD,
            }
        })
        .collect())
}

/// Percentages printed in the published comparison table, per row.
pub const PUBLISHED_PERCENT: [f64; 5] = [100.0, 71.0, 50.0, 29.0, 0.0];

/// Rows agree with the printed percentages when within half a point.
pub const PUBLISHED_ROUNDING: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub phase: f64,
    pub simple_p1: f64,
    pub simple_p2: f64,
    pub marginals: Marginals,
    pub p_corr: f64,
    pub p_anti: f64,
    pub published_simple_p1: f64,
    pub published_p_corr: f64,
    pub matches_published: bool,
    pub note: Option<String>,
}

pub fn table1_phases() -> [f64; 5] {
    [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI]
}

/// Single-photon superposition versus entangled pair at five phases. The
/// simple column is the interferometer's `D1` probability with `φ1 = phase`;
/// the entangled columns use `φ_A = 0`, `φ_B = phase`.
pub fn table1() -> Vec<Table1Row> {
    table1_phases()
        .iter()
        .zip(PUBLISHED_PERCENT)
        .map(|(&phi, pct)| {
            let (simple_p1, simple_p2) = mzi_probabilities(&MziConfig::new(phi, 0.0, true));
            let cfg = RtoConfig::new(0.0, phi);
            let stats = joint_probs(&cfg);
            let published = pct / 100.0;
            let matches = (simple_p1 - published).abs() <= PUBLISHED_ROUNDING
                && (stats.p_corr - published).abs() <= PUBLISHED_ROUNDING;
            let note = (!matches).then(|| {
                format!(
                    "published row prints {:.0}% corr / {:.0}% anti (and {:.0}% / {:.0}% for the single photon); \
                     the joint-probability formula gives P_corr = (1 + cos Δφ)/2 = {:.5}, P_anti = {:.5}. \
                     The printed {:.2} equals |cos Δφ| = {:.5}, the degree of correlation, not a probability.",
                    pct,
                    100.0 - pct,
                    pct,
                    100.0 - pct,
                    stats.p_corr,
                    stats.p_anti,
                    published.max(1.0 - published),
                    stats.e.abs(),
                )
            });
            Table1Row {
                phase: phi,
                simple_p1,
                simple_p2,
                marginals: marginals(&cfg),
                p_corr: stats.p_corr,
                p_anti: stats.p_anti,
                published_simple_p1: published,
                published_p_corr: published,
                matches_published: matches,
                note,
            }
        })
        .collect()
}
