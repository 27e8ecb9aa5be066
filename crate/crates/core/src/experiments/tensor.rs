//! Counting lemma for tensor products of geometric-level sequences, and the
//! merge against explicit Kronecker products.

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Check, ExperimentConfig, ExperimentOutput, Table};
use crate::error::{Error, Result};
use crate::row;
use crate::spectra::{find_m, lemma_sum, level_sequence, nu_count, tensor_merge, Semantics, SingularSpectrum};

pub const LEMMA_N: u64 = 30;
const LEVEL_C: f64 = 1.0;

/// `(A, B)` pairs: two fixed ones plus `(2, N−2)` for `N = 3..=6`.
pub fn lemma_pairs() -> Vec<(f64, f64)> {
    let mut v = vec![(2.0, 1.0), (1.5, 2.25)];
    for n in 4..=6 {
        v.push((2.0, n as f64 - 2.0));
    }
    v
}

/// `ν_n` from level multiplicities: level `l` of `e^{−c⌈j^{1/A}⌉}` holds
/// `⌊l^A⌋ − ⌊(l−1)^A⌋` indices, and a product clears `e^{−cn}` iff the
/// two levels sum to less than `n`.
pub fn nu_by_levels(a: f64, b: f64, n: u64) -> u64 {
    let mult = |e: f64, l: u64| -> u64 {
        let f = |x: u64| ((x as f64).powf(e) + 1e-9).floor() as u64;
        f(l) - f(l - 1)
    };
    let mut total = 0;
    for l in 1..n {
        for m in 1..n - l {
            total += mult(a, l) * mult(b, m);
        }
    }
    total
}

/// One row of the lemma table.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaRow {
    pub a: f64,
    pub b: f64,
    pub m: u64,
    pub n: u64,
    pub nu: u64,
    pub nu_levels: u64,
    pub index: u64,
    pub sum_bound: f64,
}

impl LemmaRow {
    /// `merged[M⌊n^{A+B}⌋] ≤ e^{−cn}`, i.e. fewer than that many products
    /// exceed the threshold.
    pub fn holds(&self) -> bool {
        self.nu < self.index
    }
}

/// Lemma rows for `n = 1..=n_max` on the extremal level sequences.
pub fn lemma_rows(a: f64, b: f64, n_max: u64) -> Result<Vec<LemmaRow>> {
    let m = find_m(a, b, n_max)?.m;
    // Every index with level below n_max is present.
    let len = |e: f64| (n_max as f64).powf(e).ceil() as usize + 1;
    let s = level_sequence(a, LEVEL_C, len(a))?;
    let t = level_sequence(b, LEVEL_C, len(b))?;
    (1..=n_max)
        .map(|n| {
            Ok(LemmaRow {
                a,
                b,
                m,
                n,
                nu: nu_count(&s, &t, LEVEL_C, n)?,
                nu_levels: nu_by_levels(a, b, n),
                index: m * (n as f64).powf(a + b).floor() as u64,
                sum_bound: lemma_sum(a, b, n),
            })
        })
        .collect()
}

/// Outcome of one random Kronecker comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KroneckerTrial {
    pub trial: usize,
    pub max_abs_err: f64,
    /// `merged[i·j] ≥ s_i t_j` for every `i ≤ 5`, `j ≤ 6`, compared exactly.
    pub supermultiplicative: bool,
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat<Complex64> {
    Mat::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn sorted_singular_values(m: &Mat<Complex64>) -> Result<Vec<f64>> {
    let mut s = m.singular_values().map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Random `5×5 ⊗ 6×6` complex products: merged factor spectra against the
/// SVD of the explicit Kronecker matrix.
pub fn kronecker_trials(seed: u64, trials: usize) -> Result<Vec<KroneckerTrial>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for trial in 0..trials {
        let a = random_matrix(&mut rng, 5);
        let b = random_matrix(&mut rng, 6);
        let kron = Mat::from_fn(30, 30, |i, j| a[(i / 6, j / 6)] * b[(i % 6, j % 6)]);
        let sa = SingularSpectrum::new(sorted_singular_values(&a)?, 5, Semantics::Exact)?;
        let sb = SingularSpectrum::new(sorted_singular_values(&b)?, 6, Semantics::Exact)?;
        let merged = tensor_merge(&[&sa, &sb], 30)?;
        let direct = sorted_singular_values(&kron)?;
        let max_abs_err = merged.values().iter().zip(&direct).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let supermultiplicative = (1..=5).all(|i| {
            (1..=6).all(|j| merged.get(i * j).expect("in range") >= sa.get(i).expect("i") * sb.get(j).expect("j"))
        });
        out.push(KroneckerTrial { trial, max_abs_err, supermultiplicative });
    }
    Ok(out)
}

pub(super) fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut lemma = Table::new("lemma", &["A", "B", "M", "n", "nu", "nu_levels", "index", "sum_bound", "holds"]);
    let mut constants = Table::new("constants", &["A", "B", "M", "riemann_limit", "worst_ratio", "worst_n"]);
    let mut checks = Vec::new();
    for (a, b) in lemma_pairs() {
        let c = find_m(a, b, LEMMA_N)?;
        constants.push(row![a, b, c.m, c.riemann_limit, c.worst_ratio, c.worst_n]);
        let rows = lemma_rows(a, b, LEMMA_N)?;
        let mut all = true;
        let mut counts_agree = true;
        for r in &rows {
            all &= r.holds();
            counts_agree &= r.nu == r.nu_levels;
            lemma.push(row![a, b, r.m, r.n, r.nu, r.nu_levels, r.index, r.sum_bound, r.holds()]);
        }
        checks.push(Check::new(format!("lemma_A{a}_B{b}"), all, format!("M = {}, n <= {LEMMA_N}", c.m)));
        checks.push(Check::new(format!("nu_count_A{a}_B{b}"), counts_agree, "two-pointer count vs level histogram"));
    }

    let mut kron = Table::new("kronecker", &["trial", "max_abs_err", "supermultiplicative"]);
    let trials = kronecker_trials(cfg.seed, 10)?;
    for t in &trials {
        kron.push(row![t.trial, t.max_abs_err, t.supermultiplicative]);
    }
    let worst = trials.iter().map(|t| t.max_abs_err).fold(0.0, f64::max);
    checks.push(Check::new("merge_vs_kronecker", worst <= 1e-10, format!("max abs error {worst:.3e}")));
    checks.push(Check::new(
        "supermultiplicativity",
        trials.iter().all(|t| t.supermultiplicative),
        "merged[i*j] >= s_i t_j for i <= 5, j <= 6",
    ));
    Ok(ExperimentOutput { tables: vec![constants, lemma, kron], checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::count_products_above;

    #[test]
    fn level_count_matches_brute_force() {
        for (a, b) in [(2.0, 1.0), (1.5, 2.25)] {
            let s = level_sequence(a, 1.0, 400).unwrap();
            let t = level_sequence(b, 1.0, 400).unwrap();
            for n in 1..=8u64 {
                let x = (-(n as f64)).exp();
                let mut brute = 0;
                for &u in s.values() {
                    for &v in t.values() {
                        if u * v > x * (1.0 + 1e-9) {
                            brute += 1;
                        }
                    }
                }
                assert_eq!(brute, nu_by_levels(a, b, n), "A={a} B={b} n={n}");
                assert_eq!(count_products_above(s.values(), t.values(), x), brute);
            }
        }
    }

    #[test]
    fn lemma_holds_for_two_one() {
        assert!(lemma_rows(2.0, 1.0, LEMMA_N).unwrap().iter().all(LemmaRow::holds));
    }

    #[test]
    fn kronecker_trials_are_exact() {
        for t in kronecker_trials(9, 3).unwrap() {
            assert!(t.max_abs_err < 1e-10);
            assert!(t.supermultiplicative);
        }
    }
}
