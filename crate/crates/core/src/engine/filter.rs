use thiserror::Error;

use crate::model::{ModelError, Wavelength, ENGINE_RANGE_NM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FilterError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no filter blocks the second order of {nm} nm")]
    UnsafeOrder { nm: f64 },
}

/// Order-sorting filter slot for `lambda`: the largest cut-on strictly between
/// lambda/2 and lambda. Slot 0 (open) is only safe when lambda/2 falls below
/// the source range.
pub fn select_filter(lambda: Wavelength, cutons: &[f64; 4]) -> Result<u8, FilterError> {
    lambda.ensure_in(ENGINE_RANGE_NM)?;
    let nm = lambda.nm();
    let half = nm / 2.0;
    let best = cutons
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > half && c < nm)
        .max_by(|a, b| a.1.total_cmp(b.1));
    match best {
        Some((i, _)) => Ok(i as u8 + 1),
        None if half < ENGINE_RANGE_NM.0 => Ok(0),
        None => Err(FilterError::UnsafeOrder { nm }),
    }
}
