//! Two-mode linear optics: beam splitters, phase shifters and the
//! Mach–Zehnder interferometer assembled from them.
//!
//! Beam splitter convention is the symmetric one, transmission `1/√2` and
//! reflection `i/√2`. With that convention two consecutive splitters send a
//! photon entering port 1 out of port 2, so the interferometer labels the
//! second output of the closing splitter `D1`. That calibration puts all the
//! light at `D1` when both shifters read zero.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::error::{QError, Result};
use crate::qcore::{c, phase, Basis, CMatrix, Ket};
use crate::stochastic::stream_rng;

pub const PATH_1: &str = "path1";
pub const PATH_2: &str = "path2";
pub const DETECTOR_1: &str = "D1";
pub const DETECTOR_2: &str = "D2";

pub fn path_basis() -> Basis {
    Basis::new([PATH_1, PATH_2]).expect("static labels")
}

pub fn detector_basis() -> Basis {
    Basis::new([DETECTOR_1, DETECTOR_2]).expect("static labels")
}

/// Reduces a phase to `[0, 2π)` for reporting.
pub fn reduce_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The 50/50 splitter `[[t, r], [r, t]]` with `t = 1/√2`, `r = i/√2`.
pub fn beam_splitter() -> CMatrix {
    let t = c(FRAC_1_SQRT_2, 0.0);
    let r = c(0.0, FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[t, r, r, t])
}

/// Diagonal unitary multiplying the amplitude on `mode` by `e^{i phi}`.
pub fn phase_shifter(basis: &Basis, mode: &str, phi: f64) -> Result<CMatrix> {
    let idx = basis
        .index_of(mode)
        .ok_or_else(|| QError::UnknownMode(mode.to_string()))?;
    let n = basis.dim();
    let mut u = CMatrix::identity(n, n);
    u[(idx, idx)] = phase(phi);
    Ok(u)
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpticalElement {
    BeamSplitter {
        modes: [String; 2],
    },
    PhaseShifter {
        mode: String,
        phi: f64,
    },
    /// Fixed reflection phase is absorbed into the port calibration.
    Mirror {
        mode: String,
    },
}

impl OpticalElement {
    /// Matrix of this element embedded in `basis`.
    pub fn matrix(&self, basis: &Basis) -> Result<CMatrix> {
        let n = basis.dim();
        let find = |m: &str| basis.index_of(m).ok_or_else(|| QError::UnknownMode(m.to_string()));
        match self {
            OpticalElement::BeamSplitter { modes } => {
                let (i, j) = (find(&modes[0])?, find(&modes[1])?);
                let bs = beam_splitter();
                let mut u = CMatrix::identity(n, n);
                u[(i, i)] = bs[(0, 0)];
                u[(i, j)] = bs[(0, 1)];
                u[(j, i)] = bs[(1, 0)];
                u[(j, j)] = bs[(1, 1)];
                Ok(u)
            }
            OpticalElement::PhaseShifter { mode, phi } => phase_shifter(basis, mode, *phi),
            OpticalElement::Mirror { mode } => {
                find(mode)?;
                Ok(CMatrix::identity(n, n))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MziConfig {
    pub phi1: f64,
    pub phi2: f64,
    pub bs2_present: bool,
}

impl MziConfig {
    pub fn new(phi1: f64, phi2: f64, bs2_present: bool) -> Self {
        MziConfig {
            phi1,
            phi2,
            bs2_present,
        }
    }

    /// Phase difference `phi1 - phi2` reduced to `[0, 2π)`.
    pub fn reported_difference(&self) -> f64 {
        reduce_phase(self.phi1 - self.phi2)
    }

    /// Element sequence from the entry splitter to the detectors.
    pub fn elements(&self) -> Vec<OpticalElement> {
        let modes = [PATH_1.to_string(), PATH_2.to_string()];
        let mut els = vec![
            OpticalElement::BeamSplitter { modes: modes.clone() },
            OpticalElement::Mirror { mode: PATH_1.into() },
            OpticalElement::Mirror { mode: PATH_2.into() },
            OpticalElement::PhaseShifter {
                mode: PATH_1.into(),
                phi: self.phi1,
            },
            OpticalElement::PhaseShifter {
                mode: PATH_2.into(),
                phi: self.phi2,
            },
        ];
        if self.bs2_present {
            els.push(OpticalElement::BeamSplitter { modes });
        }
        els
    }

    /// Evolves a single photon entering on `path1` and returns its state over
    /// `{D1, D2}`.
    pub fn output_state(&self) -> Ket {
        let paths = path_basis();
        let mut ket = Ket::basis_state(&paths, PATH_1).expect("path1 in basis");
        for el in self.elements() {
            let u = el.matrix(&paths).expect("elements act on path modes");
            ket = ket.evolve(&u).expect("two-mode unitary");
        }
        // port calibration: see module docs
        let detectors = if self.bs2_present {
            Basis::new([DETECTOR_2, DETECTOR_1])
        } else {
            Basis::new([DETECTOR_1, DETECTOR_2])
        }
        .expect("static labels");
        ket.relabel(detectors).expect("two modes")
    }
}

/// `(P(D1), P(D2))` for one photon through the interferometer.
pub fn mzi_probabilities(cfg: &MziConfig) -> (f64, f64) {
    let out = cfg.output_state();
    let p1 = out.probability(DETECTOR_1).expect("D1 present");
    let p2 = out.probability(DETECTOR_2).expect("D2 present");
    (p1, p2)
}

/// Gaussian-enveloped two-path screen intensity,
/// `G(x) [1 + V cos(2πx / period)]` with `G(x) = exp(-x² / 2w²)`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
pub fn screen_pattern(x_grid: &[f64], envelope_width: f64, fringe_period: f64, visibility: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(QError::DomainError {
            name: "visibility",
            value: visibility,
            range: "[0, 1]",
        });
    }
    if !(envelope_width > 0.0) {
        return Err(QError::DomainError {
            name: "envelope_width",
            value: envelope_width,
            range: "(0, inf)",
        });
    }
    if !(fringe_period > 0.0) {
        return Err(QError::DomainError {
            name: "fringe_period",
            value: fringe_period,
            range: "(0, inf)",
        });
    }
    Ok(x_grid
        .iter()
        .map(|&x| {
            let envelope = (-x * x / (2.0 * envelope_width * envelope_width)).exp();
            envelope * (1.0 + visibility * (2.0 * PI * x / fringe_period).cos())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DetectorTally {
    pub d1: u64,
    pub d2: u64,
}

impl DetectorTally {
    pub fn total(&self) -> u64 {
        self.d1 + self.d2
    }

    pub fn d1_fraction(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.d1 as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DelayedChoiceTally {
    pub on: DetectorTally,
    pub off: DetectorTally,
}

/// Per trial, inserts the closing splitter with probability 1/2 and then
/// records which detector fires. `phi` is applied on `path1`.
pub fn delayed_choice(trials: u64, phi: f64, seed: u64) -> DelayedChoiceTally {
    let mut rng = stream_rng(seed, 0);
    let p_on = mzi_probabilities(&MziConfig::new(phi, 0.0, true)).0;
    let p_off = mzi_probabilities(&MziConfig::new(phi, 0.0, false)).0;
    let mut tally = DelayedChoiceTally::default();
    for _ in 0..trials {
        let bs2 = rng.random::<bool>();
        let (branch, p_d1) = if bs2 {
            (&mut tally.on, p_on)
        } else {
            (&mut tally.off, p_off)
        };
        if rng.random::<f64>() < p_d1 {
            branch.d1 += 1;
        } else {
            branch.d2 += 1;
        }
    }
    tally
}
