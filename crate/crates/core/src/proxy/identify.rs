use nalgebra::DVector;

use super::MomentSet;
use crate::{Error, Result};

/// How the sign of the identified shock is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignConvention {
    /// `φ > 0`: the instrument co-moves positively with the target shock.
    #[default]
    PositiveRelevance,
    /// `B_11 > 0`: the shock raises the first variable on impact.
    PositiveImpact,
}

impl SignConvention {
    pub fn label(self) -> &'static str {
        match self {
            SignConvention::PositiveRelevance => "phi>0",
            SignConvention::PositiveImpact => "B11>0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifyOptions {
    /// Scalar moments below this are treated as an irrelevant instrument.
    pub relevance_floor: f64,
    pub sign: SignConvention,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        Self { relevance_floor: 1e-12, sign: SignConvention::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyIdentification {
    /// Relevance parameter φ.
    pub phi: f64,
    /// Impact column `B_•1`.
    pub b_col: DVector<f64>,
    /// Identity-weighted distance between the moments and their structural
    /// counterparts at the estimate.
    pub cmd_objective: f64,
    pub sign_convention: SignConvention,
}

pub fn identify(moments: &MomentSet) -> Result<ProxyIdentification> {
    identify_with(moments, &IdentifyOptions::default())
}

/// Closed-form solution `φ = ±√(Σ_zη Σ_η⁻¹ Σ_ηz)`, `B_•1 = Σ_ηz / φ`.
pub fn identify_with(moments: &MomentSet, options: &IdentifyOptions) -> Result<ProxyIdentification> {
    let s = moments.scalar_moment;
    if !(s >= options.relevance_floor) || s <= 0.0 {
        return Err(Error::IrrelevantInstrument { moment: s, floor: options.relevance_floor });
    }
    let mut phi = libm::sqrt(s);
    if options.sign == SignConvention::PositiveImpact && moments.sigma_z_eta[0] < 0.0 {
        phi = -phi;
    }
    let b_col = &moments.sigma_z_eta / phi;
    let cmd_objective = cmd_objective(moments, phi, &b_col);
    Ok(ProxyIdentification { phi, b_col, cmd_objective, sign_convention: options.sign })
}

/// `[σ - f(θ)]'[σ - f(θ)]` with `σ = (Σ_zη Σ_η⁻¹ Σ_ηz, Σ_zη)` and
/// `f(θ) = (φ², φ B_•1')`.
pub fn cmd_objective(moments: &MomentSet, phi: f64, b_col: &DVector<f64>) -> f64 {
    let first = moments.scalar_moment - phi * phi;
    let rest: f64 = moments
        .sigma_z_eta
        .iter()
        .zip(b_col.iter())
        .map(|(s, b)| {
            let d = s - phi * b;
            d * d
        })
        .sum();
    first * first + rest
}
