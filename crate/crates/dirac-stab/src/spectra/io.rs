//! CSV form of a spectrum.

use std::fmt::Write as _;
use std::path::Path;

use super::SpectrumResult;
use crate::error::Result;

/// One row per eigenpair: `Re λ, Im λ, ρ, Re⟨ζ,𝕃ζ⟩, label` (plus residual and sector).
pub fn spectrum_csv(s: &SpectrumResult) -> String {
    let mut out = String::from(
        "re_lambda[1/time],im_lambda[1/time],rho[dimensionless],re_krein_l[energy/norm^2],label,residual[relative],parity\n",
    );
    for p in &s.pairs {
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{:.6e},{:.10e},{},{:.3e},{}",
            p.lambda.re,
            p.lambda.im,
            p.rho,
            p.krein_l.re,
            p.label.map_or("unclassified", |l| l.as_str()),
            p.residual,
            p.sector.parity
        );
    }
    out
}

pub fn write_spectrum_csv(path: &Path, s: &SpectrumResult) -> Result<()> {
    std::fs::write(path, spectrum_csv(s))?;
    Ok(())
}
