//! Exact receiver/selection complexity in real multiplications (RMs).
//!
//! Counting rules: a squared Frobenius norm of a complex scalar and a
//! product of two complex numbers each cost 4 RMs, a real division costs 1.
//! Everything is evaluated in exact integer arithmetic; the only formula
//! with a division (the single-antenna QAM/PSK baseline, whose bit budget
//! rescales the detector work by `1 + log2(n_s)/log2(M)`) is computed as a
//! rational and rejected if it does not come out integral.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::detection::Detector;
use crate::modem::log2_exact;
use crate::selection::binomial;

/// System families with complexity formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexitySystem {
    RisQamPsk,
    RisRsm,
    CoasRisRsm,
    AcasRisRsm,
    EdasRisRsm,
}

impl std::fmt::Display for ComplexitySystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ComplexitySystem::RisQamPsk => "RIS-QAM/PSK",
            ComplexitySystem::RisRsm => "RIS-RSM",
            ComplexitySystem::CoasRisRsm => "COAS-RIS-RSM",
            ComplexitySystem::AcasRisRsm => "ACAS-RIS-RSM",
            ComplexitySystem::EdasRisRsm => "EDAS-RIS-RSM",
        })
    }
}

/// Parameter set a complexity count is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub m: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub n_ris: usize,
}

impl ComplexityParams {
    fn validate(&self) -> Result<(), AnalysisError> {
        if log2_exact(self.m).is_none() || self.m < 2 {
            return Err(AnalysisError::InvalidParameters(format!(
                "modulation order {} must be a power of two ≥ 2",
                self.m
            )));
        }
        if log2_exact(self.n_s).is_none() {
            return Err(AnalysisError::InvalidParameters(format!(
                "selected antenna count {} must be a power of two",
                self.n_s
            )));
        }
        if self.n_s > self.n_r || self.n_r == 0 || self.n_ris == 0 {
            return Err(AnalysisError::InvalidParameters(format!(
                "need 1 ≤ n_s ≤ n_r and N ≥ 1, got n_s = {}, n_r = {}, N = {}",
                self.n_s, self.n_r, self.n_ris
            )));
        }
        Ok(())
    }
}

/// One row of a complexity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub system: ComplexitySystem,
    pub detector: Detector,
    pub params: ComplexityParams,
    pub rm_count: u128,
}

/// Exact RM count for one (system, detector) pair.
pub fn complexity_rm(
    system: ComplexitySystem,
    detector: Detector,
    params: &ComplexityParams,
) -> Result<u128, AnalysisError> {
    params.validate()?;
    let n = params.n_ris as u128;
    let m = params.m as u128;
    let n_r = params.n_r as u128;
    let n_s = params.n_s as u128;

    // Detector cost: (N + M)·n_s² for ML, M + n_s for the greedy stages.
    let detector_cost = match detector {
        Detector::Ml => (n + m) * n_s * n_s,
        Detector::Greedy => m + n_s,
    };
    // Selection cost per rule: norms for COAS, pairwise cosine similarities
    // over every subset for ACAS, symbol-pair distances for EDAS.
    let pair_scans =
        binomial(params.n_r as u64, params.n_s as u64) * binomial(params.n_s as u64, 2);
    let selection_cost = match system {
        ComplexitySystem::RisQamPsk | ComplexitySystem::RisRsm => 0,
        ComplexitySystem::CoasRisRsm => 4 * n * n_r,
        ComplexitySystem::AcasRisRsm => (12 * n + 1) * pair_scans,
        ComplexitySystem::EdasRisRsm => 4 * n * (m - 1) * pair_scans,
    };

    match (system, detector) {
        (ComplexitySystem::RisQamPsk, Detector::Ml) => {
            // (N + M)(1 + log2(n_s)/log2(M)), exact rational.
            let k_m = log2_exact(params.m).expect("validated") as u128;
            let k_s = log2_exact(params.n_s).expect("validated") as u128;
            let numerator = (n + m) * (k_m + k_s);
            if !numerator.is_multiple_of(k_m) {
                return Err(AnalysisError::NonIntegerResult);
            }
            Ok(numerator / k_m)
        }
        (ComplexitySystem::RisQamPsk, Detector::Greedy) => {
            Err(AnalysisError::InvalidCombination { system, detector })
        }
        _ => Ok(selection_cost + detector_cost),
    }
}

/// All nine (system, detector) rows at one parameter set, in the standard
/// presentation order.
pub fn complexity_table(params: &ComplexityParams) -> Result<Vec<ComplexityReport>, AnalysisError> {
    use ComplexitySystem::*;
    use Detector::*;
    let rows = [
        (RisQamPsk, Ml),
        (RisRsm, Ml),
        (RisRsm, Greedy),
        (CoasRisRsm, Ml),
        (CoasRisRsm, Greedy),
        (AcasRisRsm, Ml),
        (AcasRisRsm, Greedy),
        (EdasRisRsm, Ml),
        (EdasRisRsm, Greedy),
    ];
    rows.iter()
        .map(|&(system, detector)| {
            complexity_rm(system, detector, params).map(|rm_count| ComplexityReport {
                system,
                detector,
                params: *params,
                rm_count,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: usize, n_r: usize, n_s: usize, n_ris: usize) -> ComplexityParams {
        ComplexityParams { m, n_r, n_s, n_ris }
    }

    #[test]
    fn known_reference_counts() {
        let a = params(16, 8, 4, 32);
        assert_eq!(
            complexity_rm(ComplexitySystem::CoasRisRsm, Detector::Ml, &a).unwrap(),
            1792
        );
        let c = params(16, 16, 8, 256);
        assert_eq!(
            complexity_rm(ComplexitySystem::EdasRisRsm, Detector::Ml, &c).unwrap(),
            5_535_147_008
        );
        assert_eq!(
            complexity_rm(ComplexitySystem::RisRsm, Detector::Greedy, &c).unwrap(),
            24
        );
    }

    #[test]
    fn baseline_rational_evaluates_exactly() {
        assert_eq!(
            complexity_rm(
                ComplexitySystem::RisQamPsk,
                Detector::Ml,
                &params(16, 8, 4, 32)
            )
            .unwrap(),
            72
        );
        // (N + M)(1 + 1/2) with an odd N + M cannot be integral.
        assert_eq!(
            complexity_rm(
                ComplexitySystem::RisQamPsk,
                Detector::Ml,
                &params(4, 2, 2, 1)
            ),
            Err(AnalysisError::NonIntegerResult)
        );
    }

    #[test]
    fn greedy_baseline_is_rejected() {
        assert!(matches!(
            complexity_rm(
                ComplexitySystem::RisQamPsk,
                Detector::Greedy,
                &params(16, 8, 4, 32)
            ),
            Err(AnalysisError::InvalidCombination { .. })
        ));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(
            complexity_rm(ComplexitySystem::RisRsm, Detector::Ml, &params(3, 8, 4, 32)).is_err()
        );
        assert!(
            complexity_rm(ComplexitySystem::RisRsm, Detector::Ml, &params(4, 2, 4, 32)).is_err()
        );
    }

    #[test]
    fn table_has_nine_rows_in_order() {
        let table = complexity_table(&params(16, 8, 4, 32)).unwrap();
        assert_eq!(table.len(), 9);
        assert_eq!(table[0].system, ComplexitySystem::RisQamPsk);
        assert_eq!(table[8].system, ComplexitySystem::EdasRisRsm);
        assert_eq!(table[8].detector, Detector::Greedy);
    }
}
