//! File formats: the versioned binary coefficient sidecar, shadow snapshot
//! files and CSV trajectory export.

use crate::basis::{BasisKind, BasisSystem};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::norms::ParametrizedOperator;
use crate::tomo::ShadowData;
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

pub const COEFF_FORMAT_MAGIC: &[u8; 4] = b"STCF";
pub const COEFF_FORMAT_VERSION: u16 = 1;
const DTYPE_COMPLEX128: u8 = 0;

/// Serialize an expansion into the binary sidecar: header (magic, version,
/// basis kind and parameter, label set, support, dtype, shapes) followed by
/// little-endian interleaved re/im doubles, coefficient by coefficient.
pub fn coefficients_to_bytes(expansion: &ParametrizedOperator) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(COEFF_FORMAT_MAGIC);
    out.extend_from_slice(&COEFF_FORMAT_VERSION.to_le_bytes());
    let basis = expansion.basis();
    let (kind, param): (u8, u64) = match basis.kind() {
        BasisKind::Fourier => (0, (*basis.labels().last().unwrap()) as u64),
        BasisKind::Chebyshev => (1, basis.dimension() as u64),
    };
    out.push(kind);
    out.push(DTYPE_COMPLEX128);
    out.extend_from_slice(&param.to_le_bytes());
    out.extend_from_slice(&(expansion.support().len() as u64).to_le_bytes());
    for &k in expansion.support() {
        out.extend_from_slice(&k.to_le_bytes());
    }
    let dim = expansion.dim() as u64;
    out.extend_from_slice(&dim.to_le_bytes());
    out.extend_from_slice(&dim.to_le_bytes());
    for c in expansion.coefficients() {
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                let z = c[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    out
}

pub fn coefficients_from_bytes(bytes: &[u8]) -> Result<ParametrizedOperator> {
    let need = |cond: bool, what: &str| -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::Malformed(format!("coefficient sidecar truncated at {what}")))
        }
    };
    need(bytes.len() >= 8, "header")?;
    if &bytes[0..4] != COEFF_FORMAT_MAGIC {
        return Err(Error::Malformed("missing coefficient sidecar magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != COEFF_FORMAT_VERSION {
        return Err(Error::Malformed(format!("unsupported sidecar version {version}")));
    }
    let kind = bytes[6];
    let dtype = bytes[7];
    if dtype != DTYPE_COMPLEX128 {
        return Err(Error::Malformed(format!("unsupported dtype {dtype}")));
    }
    let mut off = 8usize;
    let read_u64 = |off: &mut usize| -> Result<u64> {
        need(bytes.len() >= *off + 8, "u64")?;
        let v = u64::from_le_bytes(bytes[*off..*off + 8].try_into().unwrap());
        *off += 8;
        Ok(v)
    };
    let param = read_u64(&mut off)?;
    let count = read_u64(&mut off)? as usize;
    let mut support = Vec::with_capacity(count);
    for _ in 0..count {
        need(bytes.len() >= off + 8, "support label")?;
        support.push(i64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()));
        off += 8;
    }
    let mut off2 = off;
    let rows = read_u64(&mut off2)? as usize;
    let cols = read_u64(&mut off2)? as usize;
    off = off2;
    let basis = match kind {
        0 => BasisSystem::fourier(param as u32),
        1 => BasisSystem::chebyshev(param as usize),
        other => return Err(Error::Malformed(format!("unknown basis kind {other}"))),
    };
    let per = rows * cols * 16;
    need(bytes.len() == off + count * per, "payload")?;
    let mut coeffs = Vec::with_capacity(count);
    for c in 0..count {
        let base = off + c * per;
        let mat = CMat::from_fn(rows, cols, |i, j| {
            let o = base + (i * cols + j) * 16;
            let re = f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[o + 8..o + 16].try_into().unwrap());
            Complex64::new(re, im)
        });
        coeffs.push(mat);
    }
    ParametrizedOperator::new(basis, support, coeffs)
}

pub fn write_coefficients(path: &Path, expansion: &ParametrizedOperator) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&coefficients_to_bytes(expansion))?;
    Ok(())
}

pub fn read_coefficients(path: &Path) -> Result<ParametrizedOperator> {
    let bytes = std::fs::read(path)?;
    coefficients_from_bytes(&bytes)
}

pub fn write_shadows(path: &Path, data: &ShadowData) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&data.to_bytes())?;
    Ok(())
}

pub fn read_shadows(path: &Path) -> Result<ShadowData> {
    let bytes = std::fs::read(path)?;
    ShadowData::from_bytes(&bytes)
}

/// One prediction row of the trajectory export.
#[derive(Clone, Debug)]
pub struct TrajectoryRow {
    pub x: f64,
    pub observable: String,
    pub estimate: f64,
    /// Standard error for sampled estimates, empty field otherwise.
    pub std_error: Option<f64>,
    /// Exact reference and absolute error when an oracle is available.
    pub exact: Option<f64>,
}

/// CSV with columns x, observable, estimate, stderr, exact, abs_error; cells
/// without a value stay empty. Formatting is fixed so identical runs produce
/// byte-identical files.
pub fn trajectories_to_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("x,observable,estimate,stderr,exact,abs_error\n");
    for r in rows {
        let stderr = r.std_error.map(|v| format!("{v:.12e}")).unwrap_or_default();
        let (exact, err) = match r.exact {
            Some(e) => (format!("{e:.12e}"), format!("{:.12e}", (r.estimate - e).abs())),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{:.12e},{},{:.12e},{},{},{}\n",
            r.x, r.observable, r.estimate, stderr, exact, err
        ));
    }
    out
}

pub fn write_trajectories_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(trajectories_to_csv(rows).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, rng_from_seed};

    #[test]
    fn coefficient_sidecar_roundtrip() {
        let mut rng = rng_from_seed(120);
        for basis in [BasisSystem::fourier(2), BasisSystem::chebyshev(4)] {
            let support = basis.labels().to_vec();
            let coeffs: Vec<CMat> =
                support.iter().map(|_| random_hermitian(4, &mut rng)).collect();
            let exp = ParametrizedOperator::new(basis, support, coeffs).unwrap();
            let bytes = coefficients_to_bytes(&exp);
            let back = coefficients_from_bytes(&bytes).unwrap();
            assert_eq!(&exp, &back);
        }
    }

    #[test]
    fn sidecar_rejects_corruption() {
        let basis = BasisSystem::fourier(1);
        let exp = ParametrizedOperator::new(
            basis.clone(),
            basis.labels().to_vec(),
            vec![CMat::identity(2); 3],
        )
        .unwrap();
        let mut bytes = coefficients_to_bytes(&exp);
        bytes[0] = b'X';
        assert!(coefficients_from_bytes(&bytes).is_err());
        let bytes2 = coefficients_to_bytes(&exp);
        assert!(coefficients_from_bytes(&bytes2[..bytes2.len() - 4]).is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let rows = vec![
            TrajectoryRow {
                x: 0.25,
                observable: "ZI".into(),
                estimate: 0.5,
                std_error: Some(0.01),
                exact: Some(0.49),
            },
            TrajectoryRow {
                x: 0.5,
                observable: "ZI".into(),
                estimate: -0.25,
                std_error: None,
                exact: None,
            },
        ];
        let a = trajectories_to_csv(&rows);
        let b = trajectories_to_csv(&rows);
        assert_eq!(a, b);
        assert!(a.starts_with("x,observable,estimate,stderr,exact,abs_error\n"));
        assert!(a.contains("ZI"));
    }
}
