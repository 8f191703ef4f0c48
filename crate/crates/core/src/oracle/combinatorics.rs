use super::report::{timed, Check, VerificationReport};
use crate::math::{b_max, bucket, gallager_sandwich, h_d, log_choose, log_sum_exp, LogBase};
use crate::{Error, Result};

/// `Bucket(n, a, 0) = 1` for every `n ≤ n_max`, `a ≤ n`, both through
/// [`bucket`] and through an unclamped log-sum of the full Vandermonde range.
pub fn verify_vandermonde(n_max: u64) -> Result<VerificationReport> {
    let mut err: Option<Error> = None;
    let r = timed(|| {
        let mut report = VerificationReport::new("bucket_vandermonde").param("n_max", n_max);
        let (mut worst_bucket, mut worst_raw) = (0.0f64, 0.0f64);
        for n in 1..=n_max {
            for a in 0..=n {
                let res = (|| -> Result<(f64, f64)> {
                    let b = bucket(n, a, 0)?;
                    let denom = log_choose(2 * n, a)?;
                    let terms: Vec<f64> = (0..=a)
                        .map(|c| Ok(log_choose(n, c)? + log_choose(n, a - c)? - denom))
                        .collect::<Result<_>>()?;
                    Ok((b, log_sum_exp(&terms).exp()))
                })();
                match res {
                    Ok((b, raw)) => {
                        worst_bucket = worst_bucket.max((b - 1.0).abs());
                        worst_raw = worst_raw.max((raw - 1.0).abs());
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
        report.push(Check::new("bucket_at_zero_is_one", 1e-10 - worst_bucket, 0.0));
        report.push(Check::new("raw_vandermonde_sum", 1e-10 - worst_raw, 0.0));
        report
    });
    err.map_or(Ok(r), Err)
}

/// For every `n ≤ n_max`, `a ≤ n` and each `δ` on a fixed grid:
/// `Bucket(n, a, b_max) ≥ δ` and `Bucket(n, a, b) < δ` for all `b > b_max`.
pub fn verify_b_max(n_max: u64) -> Result<VerificationReport> {
    const DELTAS: [f64; 6] = [1.0, 0.5, 0.1, 0.05, 0.01, 0.001];
    let mut err: Option<Error> = None;
    let r = timed(|| {
        let mut report = VerificationReport::new("b_max_property").param("n_max", n_max).param("deltas", DELTAS);
        let (mut at, mut above) = (f64::INFINITY, f64::INFINITY);
        let mut strict = true;
        for n in 1..=n_max {
            for a in 0..=n {
                for &delta in &DELTAS {
                    let res = (|| -> Result<()> {
                        let b = b_max(n, a, delta)?;
                        at = at.min(bucket(n, a, b)? - delta);
                        for larger in b + 1..=n {
                            let gap = delta - bucket(n, a, larger)?;
                            above = above.min(gap);
                            strict &= gap > 0.0;
                        }
                        Ok(())
                    })();
                    if let Err(e) = res {
                        err = Some(e);
                    }
                }
            }
        }
        report.push(Check::new("bucket_at_b_max_reaches_delta", at, 1e-12));
        report.push(Check::verdict("bucket_above_b_max_below_delta", above, strict));
        report
    });
    err.map_or(Ok(r), Err)
}

/// `lower ≤ C(n,j)e^{−n h_b(j/n)} ≤ upper` for `1 ≤ j ≤ n−1`, `n ≤ n_max`.
/// Margins are relative to the value; the lower bound is attained at `(2, 1)`.
pub fn verify_gallager(n_max: u64) -> Result<VerificationReport> {
    let mut err: Option<Error> = None;
    let r = timed(|| {
        let mut report = VerificationReport::new("gallager_sandwich").param("n_max", n_max);
        let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
        for n in 2..=n_max {
            for j in 1..n {
                match gallager_sandwich(n, j) {
                    Ok(g) => {
                        lo = lo.min((g.value - g.lower) / g.value);
                        hi = hi.min((g.upper - g.value) / g.value);
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
        report.push(Check::new("lower", lo, 1e-12));
        report.push(Check::new("upper", hi, 1e-12));
        report
    });
    err.map_or(Ok(r), Err)
}

/// Per-`m` result of [`verify_bucket_asymptotics`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AsymptoticRow {
    pub m: u64,
    pub max_abs_error: f64,
}

/// `e_m(t) = −(1/mn)·ln[C(mn,mt) C(mn,m(a+b)−mt) / C(2mn,m(a+b))]`.
pub fn bucket_exponent(n: u64, a: u64, b: u64, m: u64, t: u64) -> Result<f64> {
    let s = a + b;
    let (mn, mt, ms) = (m * n, m * t, m * s);
    if t > n || t > s || s - t > n {
        return Err(Error::Domain(format!("t = {t} outside the support for n = {n}, a + b = {s}")));
    }
    Ok(-(log_choose(mn, mt)? + log_choose(mn, ms - mt)? - log_choose(2 * mn, ms)?) / mn as f64)
}

/// Convergence of the Bucket summand's exponent to `h_D(t/n, (a+b−t)/n)`:
/// the error at the largest `m` is at most 0.05, errors decrease along
/// `m_list`, the fitted constant `C = max_m err_m · m` is recorded, and the
/// summand's argmax over `t` matches the argmin of `h_D`.
pub fn verify_bucket_asymptotics(
    n: u64,
    a: u64,
    b: u64,
    m_list: &[u64],
) -> Result<(VerificationReport, Vec<AsymptoticRow>)> {
    if m_list.is_empty() {
        return Err(Error::Domain("m_list is empty".into()));
    }
    if m_list.iter().any(|&m| m.saturating_mul(n) > 1_000_000) {
        return Err(Error::Budget("m·n must stay below 10^6".into()));
    }
    let s = a + b;
    let ts: Vec<u64> = (s.saturating_sub(n)..=s.min(n)).collect();
    let limit: Vec<f64> = ts
        .iter()
        .map(|&t| h_d(t as f64 / n as f64, (s - t) as f64 / n as f64, LogBase::Natural))
        .collect::<Result<_>>()?;
    let start = std::time::Instant::now();
    let mut rows = Vec::new();
    let mut exponents_at_last = Vec::new();
    for &m in m_list {
        let e: Vec<f64> = ts.iter().map(|&t| bucket_exponent(n, a, b, m, t)).collect::<Result<_>>()?;
        let err = e.iter().zip(&limit).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        rows.push(AsymptoticRow { m, max_abs_error: err });
        exponents_at_last = e;
    }

    let mut report =
        VerificationReport::new("bucket_asymptotics").param("n", n).param("a", a).param("b", b).param("m_list", m_list);
    let last = rows.last().unwrap().max_abs_error;
    report.push(Check::new("error_at_largest_m", 0.05 - last, 0.0));
    let decrease = rows.windows(2).map(|w| w[0].max_abs_error - w[1].max_abs_error).fold(f64::INFINITY, f64::min);
    report.push(Check::verdict("error_decreases_in_m", decrease, rows.len() < 2 || decrease > 0.0));
    let c_fit = rows.iter().map(|r| r.max_abs_error * r.m as f64).fold(0.0, f64::max);
    report
        .push(Check::new("fitted_constant", c_fit, f64::INFINITY).informational().with_note(format!("C = {c_fit:.4}")));

    // the largest summand has the smallest exponent
    let pick = |v: &[f64]| -> Vec<u64> {
        let best = v.iter().cloned().fold(f64::INFINITY, f64::min);
        ts.iter().zip(v).filter(|(_, &x)| x - best <= 1e-9 * best.abs().max(1e-12)).map(|(&t, _)| t).collect()
    };
    let (arg_summand, arg_hd) = (pick(&exponents_at_last), pick(&limit));
    report.push(
        Check::verdict("dominant_term_location", 0.0, arg_summand == arg_hd)
            .with_note(format!("summand argmax {arg_summand:?}, h_D argmin {arg_hd:?}")),
    );
    report.runtime = start.elapsed();
    Ok((report, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_split_has_vanishing_limit() {
        // t/n = (a+b−t)/n gives h_D = 0, and the exponent shrinks with m
        let e10 = bucket_exponent(10, 2, 2, 10, 2).unwrap();
        let e250 = bucket_exponent(10, 2, 2, 250, 2).unwrap();
        assert!(e250.abs() < e10.abs());
        assert!(e250.abs() < 0.01);
    }

    #[test]
    fn small_grids_pass() {
        assert!(verify_vandermonde(30).unwrap().passed);
        assert!(verify_b_max(12).unwrap().passed);
        assert!(verify_gallager(60).unwrap().passed);
    }

    #[test]
    fn asymptotics_for_reference_case() {
        let (r, rows) = verify_bucket_asymptotics(10, 2, 1, &[10, 50, 250]).unwrap();
        assert!(r.passed, "{}", r.text());
        assert!(rows[2].max_abs_error <= 0.05);
    }
}
