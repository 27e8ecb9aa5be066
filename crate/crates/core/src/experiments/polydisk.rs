//! Pairs of polydisk maps: the unboundedness witness, lens diagonals at the
//! critical exponent, schedule-driven bounds and Shapiro–Taylor statistics.

use super::lens::{lens_ratio_sweep, MAX_J};
use super::shapiro::{hs_trend, st_spectrum};
use super::{slope, Check, ExperimentConfig, ExperimentOutput, Table};
use crate::error::{invalid, Result};
use crate::operator::{unboundedness_witness, Trend};
use crate::row;
use crate::special::geomspace;
use crate::spectra::{
    beta_estimate, schatten_membership, tensor_merge, upper_bound_plain, upper_bound_weighted, Membership, RhoSource,
    Schedule, SequenceSource, SingularSpectrum,
};

pub const WITNESS_RANGE: (f64, f64) = (10.0, 1e4);

/// Witness indices, geometrically spaced over [`WITNESS_RANGE`].
pub fn witness_indices() -> Vec<u64> {
    let mut v: Vec<u64> = geomspace(WITNESS_RANGE.0, WITNESS_RANGE.1, 61).iter().map(|x| x.round() as u64).collect();
    v.dedup();
    v
}

/// Log-log slope of `‖C f_n‖/‖f_n‖` against `n`.
pub fn witness_slope() -> Result<(Vec<(u64, f64)>, f64)> {
    let pts: Vec<(u64, f64)> =
        witness_indices().into_iter().map(|n| unboundedness_witness(n).map(|w| (n, w.ratio))).collect::<Result<_>>()?;
    let xs: Vec<f64> = pts.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, r)| r.ln()).collect();
    let s = slope(&xs, &ys);
    Ok((pts, s))
}

fn item_witness(out: &mut ExperimentOutput) -> Result<()> {
    let mut t = Table::new("witness", &["n", "norm_f", "norm_cf", "ratio"]);
    for n in witness_indices() {
        let w = unboundedness_witness(n)?;
        t.push(row![n, w.norm_f, w.norm_cf, w.ratio]);
    }
    let (_, s) = witness_slope()?;
    out.checks.push(Check::new("witness_slope", (s - 0.25).abs() <= 0.03, format!("slope {s:.5}")));
    out.tables.push(t);
    Ok(())
}

/// First `j` of the trailing window used for the flatness slope.
const LENS_TAIL_J: u32 = 16;

fn item_lens(out: &mut ExperimentOutput) -> Result<()> {
    let mut t = Table::new("lens_diagonal", &["n_dim", "theta", "j", "ratio", "limit"]);
    for n_dim in 2..=4usize {
        let theta = 1.0 / n_dim as f64;
        let s = lens_ratio_sweep(n_dim, theta, MAX_J)?;
        // With T = (1+r)/(1−r) the squared ratio is 4^{1−N}(T^θ+1)^{2N}/(T+1)²
        // at Nθ = 1, so it tends to 2^{1−N} with a correction ~ N T^{−θ}.
        let limit = 2f64.powi(1 - n_dim as i32);
        for (j, r) in s.j.iter().zip(&s.ratio) {
            t.push(row![n_dim, theta, *j, *r, limit]);
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            s.j.iter()
                .zip(&s.ratio)
                .filter(|(j, _)| **j >= LENS_TAIL_J)
                .map(|(j, r)| (*j as f64 * std::f64::consts::LN_2, r.ln()))
                .unzip();
        let tail = slope(&xs, &ys);
        let last = *s.ratio.last().expect("non-empty sweep");
        out.checks.push(Check::new(
            format!("lens_flat_n{n_dim}"),
            tail.abs() <= 0.02 && s.min >= 0.5 * s.median && (last / limit - 1.0).abs() <= 0.05,
            format!(
                "tail slope {tail:.4}, full slope {:.4}, min/median {:.4}, last/limit {:.4}",
                s.slope,
                s.min / s.median,
                last / limit
            ),
        ));
    }
    out.tables.push(t);
    Ok(())
}

const SCHEDULE_N: [u64; 8] = [1, 4, 16, 64, 256, 1024, 4096, 16384];
const MERGE_LEN: usize = 64;
const MERGE_MAX: usize = 4096;

fn item_schedules(out: &mut ExperimentOutput) -> Result<()> {
    let mut bounds =
        Table::new("schedule_bounds", &["n_dim", "n", "epsilon", "implied", "bound_plain", "bound_weighted"]);
    let mut merged_t = Table::new("schedule_merge", &["n_dim", "n", "merged", "factor_power"]);
    let mut summary =
        Table::new("schedule_summary", &["n_dim", "epsilon_exponent", "membership_p1", "beta_minus", "beta_plus"]);
    for n_dim in 3..=5usize {
        let eps = Schedule::polydisk_epsilon(n_dim)?;
        let p = 1.0 / (4.0 * n_dim as f64 - 7.0);
        let delta = Schedule::delta_matching(p)?;
        // ρ(h) = h δ(h)², so (ρ(h)/h)^{1/2} = δ(h) and h = ε_n gives 2e^{−nε_n}.
        let rho = |h: f64| h * delta.delta(h).expect("delta schedule").powi(2);
        let mut grid: Vec<f64> = SCHEDULE_N.iter().map(|&n| eps.epsilon(n).expect("epsilon schedule")).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let src = RhoSource::Function { rho: &rho, h_grid: &grid };
        let mut ok = true;
        for &n in &SCHEDULE_N {
            let implied = eps.implied_bound(n).expect("epsilon schedule");
            let plain = upper_bound_plain(&src, n)?;
            let weighted = upper_bound_weighted(&src, n, n_dim as f64 - 2.0)?;
            ok &= plain <= 2.0 * implied * (1.0 + 1e-12);
            bounds.push(row![n_dim, n, eps.epsilon(n).expect("epsilon schedule"), implied, plain, weighted]);
        }
        out.checks.push(Check::new(format!("plain_matches_schedule_n{n_dim}"), ok, "bound_plain <= 2 exp(-n eps_n)"));

        let factor = SingularSpectrum::from_fn(MERGE_LEN, |n| eps.implied_bound(n as u64).expect("epsilon schedule"))?;
        let refs: Vec<&SingularSpectrum> = (0..n_dim).map(|_| &factor).collect();
        let merged = tensor_merge(&refs, MERGE_MAX)?;
        let mut sm = true;
        let mut n = 1usize;
        while n.pow(n_dim as u32) <= merged.len() {
            let lhs = merged.get(n.pow(n_dim as u32)).expect("in range");
            let rhs = factor.get(n).expect("in range").powi(n_dim as i32);
            sm &= lhs >= rhs * (1.0 - 1e-13);
            merged_t.push(row![n_dim, n.pow(n_dim as u32), lhs, rhs]);
            n += 1;
        }
        out.checks.push(Check::new(format!("supermultiplicative_n{n_dim}"), sm, "merged[n^N] >= s_n^N"));
        let m = schatten_membership(&SequenceSource::Schedule(&eps), 1.0)?;
        out.checks.push(Check::new(format!("trace_class_n{n_dim}"), m == Membership::Summable, format!("{m:?}")));
        let b = beta_estimate(&merged, n_dim, None)?;
        summary.push(row![n_dim, p, format!("{m:?}").to_lowercase(), b.beta_minus_hat, b.beta_plus_hat]);
    }
    out.tables.extend([bounds, merged_t, summary]);
    Ok(())
}

fn item_shapiro_taylor(out: &mut ExperimentOutput) -> Result<()> {
    let mut beta = Table::new("st_beta", &["theta", "n_dim", "beta_minus", "beta_plus", "lo", "hi"]);
    let mut hs = Table::new("st_hs", &["theta", "partial", "block_exponent", "trend"]);
    for theta in [1.5, 2.0, 3.0] {
        let (s, _) = st_spectrum(theta)?;
        for n_dim in 1..=3 {
            let b = beta_estimate(&s, n_dim, None)?;
            beta.push(row![theta, n_dim, b.beta_minus_hat, b.beta_plus_hat, b.window.0, b.window.1]);
        }
        let r = hs_trend(theta)?;
        hs.push(row![theta, r.partial, r.block_exponent.unwrap_or(f64::NAN), format!("{:?}", r.trend).to_lowercase()]);
        let expect = match theta {
            t if t < 2.0 => Some(Trend::Diverging),
            t if t > 2.0 => Some(Trend::Converging),
            _ => None,
        };
        if let Some(e) = expect {
            out.checks.push(Check::new(format!("hs_trend_theta{theta}"), r.trend == e, format!("{:?}", r.trend)));
        }
    }
    out.tables.extend([beta, hs]);
    Ok(())
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let items: Vec<u32> = match cfg.item {
        None => vec![1, 2, 3, 4],
        Some(i @ 1..=4) => vec![i],
        Some(i) => return Err(invalid(format!("item must lie in 1..=4, got {i}"))),
    };
    let mut out = ExperimentOutput::default();
    for i in items {
        match i {
            1 => item_witness(&mut out)?,
            2 => item_lens(&mut out)?,
            3 => item_schedules(&mut out)?,
            _ => item_shapiro_taylor(&mut out)?,
        }
    }
    Ok(out)
}
