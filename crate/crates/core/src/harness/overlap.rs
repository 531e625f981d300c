use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OverlapError {
    #[error("mask sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("both masks are empty")]
    BothEmpty,
}

/// Intersection over union, `|S ∩ G| / |S ∪ G|`, as an exact ratio.
pub fn overlap(mask_s: &[bool], mask_g: &[bool]) -> Result<Ratio<u64>, OverlapError> {
    if mask_s.len() != mask_g.len() {
        return Err(OverlapError::SizeMismatch(mask_s.len(), mask_g.len()));
    }
    let (mut inter, mut union) = (0u64, 0u64);
    for (&s, &g) in mask_s.iter().zip(mask_g) {
        inter += (s && g) as u64;
        union += (s || g) as u64;
    }
    if union == 0 {
        return Err(OverlapError::BothEmpty);
    }
    Ok(Ratio::new(inter, union))
}
