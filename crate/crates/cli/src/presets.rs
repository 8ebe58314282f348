use std::fs;
use std::path::Path;

use pairtomo::io::density_matrix_from_json;
use pairtomo::state::{bell_state, werner};
use pairtomo::DensityMatrix;

use crate::commands::CliError;

/// `bell:<theta>`, `mixed`, `werner:<p>`, or a path to density-matrix JSON.
pub fn parse_state(spec: &str) -> Result<DensityMatrix, CliError> {
    let spec = spec.trim();
    if spec == "mixed" {
        return Ok(DensityMatrix::maximally_mixed());
    }
    if let Some((name, arg)) = spec.split_once(':') {
        let value = |label: &str| -> Result<f64, CliError> {
            arg.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{label} preset needs a number, got `{arg}`")))
        };
        match name {
            "bell" => return Ok(bell_state(value("bell")?)?),
            "werner" => return Ok(werner(value("werner")?)?),
            _ => {}
        }
    }
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(density_matrix_from_json(&fs::read_to_string(path)?)?);
    }
    Err(CliError::Usage(format!(
        "state `{spec}` is neither a preset (bell:<theta>, mixed, werner:<p>) nor a readable file"
    )))
}

/// `<n>x<m>` with both at least 2.
pub fn parse_grid(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("grid must look like <n>x<m> with n, m >= 2, got `{spec}`"));
    let (a, b) = spec.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let n: usize = a.trim().parse().map_err(|_| bad())?;
    let m: usize = b.trim().parse().map_err(|_| bad())?;
    if n < 2 || m < 2 {
        return Err(bad());
    }
    Ok((n, m))
}
