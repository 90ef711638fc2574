//! The ideal premeasurement map and diagnostics that separate a local
//! superposition from the improper mixture left behind by entanglement.

use num_complex::Complex64;

use crate::error::{QError, Result};
use crate::qcore::{
    density_of, partial_trace, phase, schmidt, Basis, BipartiteState, CMatrix, DensityOperator, Ket, Side,
};

pub const PSI_1: &str = "psi1";
pub const PSI_2: &str = "psi2";
pub const READY: &str = "ready";
pub const POINTER_1: &str = "1";
pub const POINTER_2: &str = "2";

/// Reduced states are compared to candidate projectors at this tolerance.
pub const CONSISTENCY_TOL: f64 = 1e-10;

pub fn system_basis() -> Basis {
    Basis::new([PSI_1, PSI_2]).expect("static labels")
}

pub fn detector_basis() -> Basis {
    Basis::new([READY, POINTER_1, POINTER_2]).expect("static labels")
}

pub fn pointer_basis() -> Basis {
    Basis::new([POINTER_1, POINTER_2]).expect("static labels")
}

/// System and detector bases plus the relative phase between the two
/// branches of the correlated output. An ideal measurement has phase zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetup {
    pub system_basis: Basis,
    pub detector_basis: Basis,
    pub correlation_phase: f64,
}

impl Default for MeasurementSetup {
    fn default() -> Self {
        MeasurementSetup {
            system_basis: system_basis(),
            detector_basis: detector_basis(),
            correlation_phase: 0.0,
        }
    }
}

impl MeasurementSetup {
    pub fn with_phase(correlation_phase: f64) -> Self {
        MeasurementSetup {
            correlation_phase,
            ..Default::default()
        }
    }

    /// The detector's initial state.
    pub fn ready(&self) -> Ket {
        Ket::basis_state(&self.detector_basis, READY).expect("ready label")
    }

    fn validate(&self) -> Result<()> {
        if self.system_basis.dim() != 2 {
            return Err(QError::DimensionError {
                expected: 2,
                found: self.system_basis.dim(),
            });
        }
        for label in [READY, POINTER_1, POINTER_2] {
            if self.detector_basis.index_of(label).is_none() {
                return Err(QError::UnknownLabel(label.to_string()));
            }
        }
        Ok(())
    }
}

/// `a|s1>|ready> + b|s2>|ready>  ->  a|s1>|1> + b e^{i theta}|s2>|2>`.
///
/// The `ready` component is identically zero afterwards, so the detector
/// factor of the output is the pointer basis `{1, 2}`.
pub fn premeasure(system: &Ket, setup: &MeasurementSetup) -> Result<BipartiteState> {
    setup.validate()?;
    if system.basis() != &setup.system_basis {
        return Err(QError::BasisMismatch {
            expected: setup.system_basis.to_string(),
            found: system.basis().to_string(),
        });
    }
    let a = system.amplitudes()[0];
    let b = system.amplitudes()[1] * phase(setup.correlation_phase);
    let zero = Complex64::new(0.0, 0.0);
    let amps = CMatrix::from_row_slice(2, 2, &[a, zero, zero, b]);
    BipartiteState::new(setup.system_basis.clone(), pointer_basis(), amps)
}

/// Same correlation map but with pointer states of real overlap
/// `<1|2> = overlap`, realised in a two-dimensional detector space. Only
/// meant for partial-measurement diagnostics such as [`cross_term_weight`].
pub fn premeasure_with_overlap(system: &Ket, overlap: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(QError::DomainError {
            name: "overlap",
            value: overlap,
            range: "[0, 1]",
        });
    }
    if system.dim() != 2 {
        return Err(QError::DimensionError {
            expected: 2,
            found: system.dim(),
        });
    }
    let a = system.amplitudes()[0];
    let b = system.amplitudes()[1];
    let d1 = [1.0, 0.0];
    let d2 = [overlap, (1.0 - overlap * overlap).sqrt()];
    let amps = CMatrix::from_fn(2, 2, |i, j| {
        a * (if i == 0 { d1[j] } else { 0.0 }) + b * (if i == 1 { d2[j] } else { 0.0 })
    });
    let detector = Basis::new(["e1", "e2"]).expect("static labels");
    BipartiteState::new(system.basis().clone(), detector, amps)
}

/// True iff the state has Schmidt rank one.
pub fn is_product(state: &BipartiteState) -> bool {
    schmidt(state).len() <= 1
}

/// True iff the chosen subsystem is actually in the pure state `candidate`.
pub fn local_pure_consistency(state: &BipartiteState, side: Side, candidate: &Ket) -> Result<bool> {
    let reduced = partial_trace(state, side)?;
    if candidate.basis() != reduced.basis() {
        return Err(QError::BasisMismatch {
            expected: reduced.basis().to_string(),
            found: candidate.basis().to_string(),
        });
    }
    let projector = density_of(candidate);
    Ok(reduced.max_deviation(&projector)? <= CONSISTENCY_TOL)
}

/// `2 |rho_01|` of a two-level density operator: 1 for an equal-weight
/// superposition, 0 for a diagonal mixture.
pub fn coherence(rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(QError::DimensionError {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(2.0 * rho.matrix()[(0, 1)].norm())
}

/// [`coherence`] of one side's reduced state.
pub fn cross_term_weight(state: &BipartiteState, side: Side) -> Result<f64> {
    coherence(&partial_trace(state, side)?)
}
