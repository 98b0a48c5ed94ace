//! Closed-form file-size bounds for regenerating codes and the twin
//! framework, with and without an eavesdropper.
//!
//! Integer-valued formulas return `u128`. Anything that can be fractional
//! (the MSR/MBR operating points and the secure MSR size, which carries a
//! `((d-k)/(d-k+1))^l2` factor) is an exact [`BigRational`]; rounding only
//! happens in [`format_rational`].

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decimal places used when a non-integer quantity is written out.
pub const CSV_DECIMALS: u32 = 6;

/// Header of every series file.
pub const CSV_HEADER: [&str; 6] = ["k", "l1", "l2", "s_twin", "s_mbr", "s_msr"];

/// Operating point of a regenerating code: `k` pieces, `d` helpers, `alpha`
/// symbols per node, `beta` symbols per helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub k: u64,
    pub d: u64,
    pub alpha: u64,
    pub beta: u64,
}

impl BoundParams {
    pub fn new(k: u64, d: u64, alpha: u64, beta: u64) -> Result<Self> {
        if k == 0 || k > d {
            return Err(Error::BadParams(format!("need 1 <= k <= d, got k={k}, d={d}")));
        }
        if beta > alpha {
            return Err(Error::BadParams(format!("need beta <= alpha, got beta={beta}, alpha={alpha}")));
        }
        Ok(BoundParams { k, d, alpha, beta })
    }

    /// Repair bandwidth `d · beta`.
    pub fn gamma(&self) -> u128 {
        self.d as u128 * self.beta as u128
    }

    fn term(&self, i: u64) -> u128 {
        (self.alpha as u128).min((self.d - i) as u128 * self.beta as u128)
    }
}

fn choose2(n: u64) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

fn ratio(n: u128, d: u128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Σ_{i=0}^{k-1} min(alpha, (d - i) beta)`.
pub fn capacity_bound(p: &BoundParams) -> u128 {
    (0..p.k).map(|i| p.term(i)).sum()
}

/// `Σ_{i=l}^{k-1} min(alpha, (d - i) beta)`; zero once `l >= k`.
pub fn secrecy_bound_pawar(p: &BoundParams, l: u64) -> u128 {
    (l..p.k).map(|i| p.term(i)).sum()
}

fn check_kd(k: u64, d: u64) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::BadParams(format!("need 1 <= k <= d, got k={k}, d={d}")));
    }
    Ok(())
}

/// Minimum-storage point `(alpha, gamma) = (S/k, S d / (k (d - k + 1)))`.
pub fn msr_point(s: u64, k: u64, d: u64) -> Result<(BigRational, BigRational)> {
    check_kd(k, d)?;
    let alpha = ratio(s as u128, k as u128);
    let gamma = &alpha * ratio(d as u128, (d - k + 1) as u128);
    Ok((alpha, gamma))
}

/// Minimum-bandwidth point, `alpha = gamma = 2 S d / (k (2d - k + 1))`.
pub fn mbr_point(s: u64, k: u64, d: u64) -> Result<(BigRational, BigRational)> {
    check_kd(k, d)?;
    let v = ratio(s as u128, k as u128) * ratio(2 * d as u128, (2 * d - k + 1) as u128);
    Ok((v.clone(), v))
}

/// MBR file size `(k d - C(k,2)) beta`.
pub fn mbr_file_size(k: u64, d: u64, beta: u64) -> Result<u128> {
    check_kd(k, d)?;
    Ok((k as u128 * d as u128 - choose2(k)) * beta as u128)
}

/// MSR file size and per-node storage: `alpha = (d - k + 1) beta`,
/// `S = k alpha`.
pub fn msr_file_size(k: u64, d: u64, beta: u64) -> Result<(u128, u128)> {
    check_kd(k, d)?;
    let alpha = (d - k + 1) as u128 * beta as u128;
    Ok((k as u128 * alpha, alpha))
}

/// `k²`.
pub fn twin_file_size(k: u64) -> u128 {
    k as u128 * k as u128
}

/// Secure twin size `k (k - l1 - l2)`.
pub fn secure_twin_size(k: u64, l1: u64, l2: u64) -> Result<u128> {
    if l1 + l2 >= k {
        return Err(Error::BudgetExceeded {
            l: (l1 + l2) as usize,
            k: k as usize,
        });
    }
    Ok(k as u128 * (k - l1 - l2) as u128)
}

/// Secure MBR size `(k d - C(k,2)) beta - (l d - C(l,2)) beta`.
pub fn secure_mbr_size(k: u64, d: u64, beta: u64, l: u64) -> Result<u128> {
    check_kd(k, d)?;
    if l > k {
        return Err(Error::BadParams(format!("l = {l} exceeds k = {k}")));
    }
    let full = k as u128 * d as u128 - choose2(k);
    let lost = l as u128 * d as u128 - choose2(l);
    Ok((full - lost) * beta as u128)
}

/// Secure MSR size `(k - l1 - l2) (1 - 1/(d - k + 1))^l2 alpha`, exact.
pub fn secure_msr_size(k: u64, d: u64, alpha: u64, l1: u64, l2: u64) -> Result<BigRational> {
    check_kd(k, d)?;
    if l1 + l2 > k {
        return Err(Error::BadParams(format!("l1 + l2 = {} exceeds k = {k}", l1 + l2)));
    }
    let m = (d - k + 1) as u128;
    let factor = ratio(m - 1, m);
    let mut acc = int((k - l1 - l2) as u128 * alpha as u128);
    for _ in 0..l2 {
        acc *= &factor;
    }
    Ok(acc)
}

/// Which comparison to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Plain file sizes at `beta = 1`: twin `k²`, MBR with `alpha = d = k`,
    /// MSR with `d = 2k - 1`, for `k` in `k_min..=k_max`.
    FileSize { k_min: u64, k_max: u64 },
    /// Storage-only eavesdropper (`l2 = 0`): twin `k(k - l)` vs secure MBR,
    /// for `l` in `l_min..=l_max`.
    SecureMbr { k: u64, l_min: u64, l_max: u64 },
    /// Mixed eavesdropper with fixed `l1`: twin vs secure MSR at
    /// `d = 2k - 1`, `alpha = k`, for `l2` in `l2_min..=l2_max`.
    SecureMsr { k: u64, l1: u64, l2_min: u64, l2_max: u64 },
}

impl SeriesKind {
    pub fn fig5(k_max: u64) -> Self {
        SeriesKind::FileSize { k_min: 3, k_max }
    }

    /// `l = 1..=k-1`.
    pub fn fig8(k: u64) -> Self {
        SeriesKind::SecureMbr {
            k,
            l_min: 1,
            l_max: k.saturating_sub(1),
        }
    }

    /// `l2 = 1..=k-l1-1`.
    pub fn fig9(k: u64, l1: u64) -> Self {
        SeriesKind::SecureMsr {
            k,
            l1,
            l2_min: 1,
            l2_max: k.saturating_sub(l1 + 1),
        }
    }
}

/// One line of a comparison series. `None` marks a quantity the series does
/// not report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRow {
    pub k: u64,
    pub l1: Option<u64>,
    pub l2: Option<u64>,
    pub s_twin: Option<BigRational>,
    pub s_mbr: Option<BigRational>,
    pub s_msr: Option<BigRational>,
}

pub fn comparison_series(kind: SeriesKind) -> Result<Vec<BoundRow>> {
    match kind {
        SeriesKind::FileSize { k_min, k_max } => {
            if k_min == 0 || k_min > k_max {
                return Err(Error::BadRange(format!("k range {k_min}..={k_max}")));
            }
            (k_min..=k_max)
                .map(|k| {
                    Ok(BoundRow {
                        k,
                        l1: None,
                        l2: None,
                        s_twin: Some(int(twin_file_size(k))),
                        s_mbr: Some(int(mbr_file_size(k, k, 1)?)),
                        s_msr: Some(int(msr_file_size(k, 2 * k - 1, 1)?.0)),
                    })
                })
                .collect()
        }
        SeriesKind::SecureMbr { k, l_min, l_max } => {
            if l_min == 0 || l_min > l_max || l_max >= k {
                return Err(Error::BadRange(format!("l range {l_min}..={l_max} for k = {k}")));
            }
            (l_min..=l_max)
                .map(|l| {
                    Ok(BoundRow {
                        k,
                        l1: Some(l),
                        l2: Some(0),
                        s_twin: Some(int(secure_twin_size(k, l, 0)?)),
                        s_mbr: Some(int(secure_mbr_size(k, k, 1, l)?)),
                        s_msr: None,
                    })
                })
                .collect()
        }
        SeriesKind::SecureMsr { k, l1, l2_min, l2_max } => {
            if l2_min == 0 || l2_min > l2_max || l1 + l2_max >= k {
                return Err(Error::BadRange(format!("l2 range {l2_min}..={l2_max} for k = {k}, l1 = {l1}")));
            }
            (l2_min..=l2_max)
                .map(|l2| {
                    Ok(BoundRow {
                        k,
                        l1: Some(l1),
                        l2: Some(l2),
                        s_twin: Some(int(secure_twin_size(k, l1, l2)?)),
                        s_mbr: None,
                        s_msr: Some(secure_msr_size(k, 2 * k - 1, k, l1, l2)?),
                    })
                })
                .collect()
        }
    }
}

/// Integers print bare; other values are rounded half away from zero to
/// [`CSV_DECIMALS`] places.
pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        return x.to_integer().to_string();
    }
    let scale = BigInt::from(10u32).pow(CSV_DECIMALS);
    let num: BigInt = x.numer().abs() * &scale * 2 + x.denom();
    let scaled = num.div_floor(&(x.denom() * 2));
    let (whole, frac) = scaled.div_rem(&scale);
    let sign = if x.is_negative() { "-" } else { "" };
    format!("{sign}{whole}.{:0width$}", frac, width = CSV_DECIMALS as usize)
}

/// Writes `rows` as CSV with [`CSV_HEADER`]; absent values are empty cells.
pub fn write_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_r = |v: &Option<BigRational>| v.as_ref().map(format_rational).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.k.to_string(),
            opt_u(r.l1),
            opt_u(r.l2),
            opt_r(&r.s_twin),
            opt_r(&r.s_mbr),
            opt_r(&r.s_msr),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV as a string.
pub fn series_csv(rows: &[BoundRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `true` when `x` is exactly the integer `n`.
pub fn rational_eq_int(x: &BigRational, n: u128) -> bool {
    x.is_integer() && x.to_integer() == BigInt::from(n)
}
