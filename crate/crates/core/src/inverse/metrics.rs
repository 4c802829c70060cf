use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative squared-norm error in percent: `100 ‖x − x_ref‖² / ‖x_ref‖²`.
pub fn rne(x: &[Complex64], x_ref: &[Complex64]) -> Result<f64> {
    if x.len() != x_ref.len() {
        return Err(Error::Contract(format!(
            "rne: lengths differ ({} vs {})",
            x.len(),
            x_ref.len()
        )));
    }
    let reference: f64 = x_ref.iter().map(|z| z.norm_sqr()).sum();
    if reference == 0.0 {
        return Err(Error::Domain("rne: reference vector is zero".into()));
    }
    let diff: f64 = x.iter().zip(x_ref).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(100.0 * diff / reference)
}

/// Mean RNE over a set of (estimate, reference) pairs.
pub fn mrne<'a, I>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a [Complex64], &'a [Complex64])>,
{
    let mut total = 0.0;
    let mut count = 0usize;
    for (x, x_ref) in pairs {
        total += rne(x, x_ref)?;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Contract("mrne of an empty set".into()));
    }
    Ok(total / count as f64)
}
