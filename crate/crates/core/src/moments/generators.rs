//! Random point distributions with exact Gaussian-rational data.

use rand::{Rng, RngExt};

use super::point::PointDistribution;
use super::scalar::{gaussian_rational, GaussianRational};

/// Parameters of the random generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPointSpec {
    /// Degrees of `p` and `q` are drawn from `1..=max_degree`.
    pub max_degree: usize,
    /// Bound on `|a|`.
    pub max_support: f64,
}

impl Default for RandomPointSpec {
    fn default() -> Self {
        Self {
            max_degree: 8,
            max_support: 2.0,
        }
    }
}

const DENOMINATORS: [i64; 4] = [1, 2, 3, 4];

fn small_rational<R: Rng + ?Sized>(rng: &mut R) -> GaussianRational {
    let den = DENOMINATORS[rng.random_range(0..DENOMINATORS.len())];
    gaussian_rational(rng.random_range(-4..=4), rng.random_range(-4..=4), den)
}

fn support<R: Rng + ?Sized>(rng: &mut R, max_support: f64) -> GaussianRational {
    // Components k/8 with |k| <= K keep |a| <= sqrt(2) K / 8 <= max_support.
    let k = ((max_support * 8.0 / std::f64::consts::SQRT_2).floor() as i64).max(0);
    gaussian_rational(rng.random_range(-k..=k), rng.random_range(-k..=k), 8)
}

fn factors<R: Rng + ?Sized>(rng: &mut R, degree: usize) -> Vec<GaussianRational> {
    let mut v = vec![gaussian_rational(1, 0, 1)];
    v.extend((0..degree).map(|_| small_rational(rng)));
    v
}

/// `p(∂) q(∂̄) δ_a` with `p(0) = q(0) = 1`, so `c_{jk} = p_j q_k` and `c_00 = 1`.
pub fn random_rank_one<R: Rng + ?Sized>(
    rng: &mut R,
    spec: RandomPointSpec,
) -> PointDistribution<GaussianRational> {
    let max = spec.max_degree.max(1);
    let (dp, dq) = (rng.random_range(0..=max), rng.random_range(0..=max));
    let p = factors(rng, dp);
    let q = factors(rng, dq);
    let a = support(rng, spec.max_support);
    PointDistribution::from_factors(a, &p, &q).expect("factors are nonempty")
}

/// A rank-one table with one entry `c_{mn}`, `m, n >= 1`, moved off the
/// product `c_{m0} c_{0n}`.
pub fn random_non_rank_one<R: Rng + ?Sized>(
    rng: &mut R,
    spec: RandomPointSpec,
) -> PointDistribution<GaussianRational> {
    let max = spec.max_degree.max(1);
    let degree = rng.random_range(1..=max);
    let p = factors(rng, degree);
    let q = factors(rng, degree);
    let a = support(rng, spec.max_support);
    let mut c: Vec<Vec<GaussianRational>> = p
        .iter()
        .map(|pj| q.iter().map(|qk| pj.clone() * qk.clone()).collect())
        .collect();
    let (m, n) = (rng.random_range(1..=degree), rng.random_range(1..=degree));
    let bump = loop {
        let b = small_rational(rng);
        if b != gaussian_rational(0, 0, 1) {
            break b;
        }
    };
    c[m][n] = c[m][n].clone() + bump;
    PointDistribution::new(a, c).expect("table is nonempty")
}

#[cfg(test)]
mod tests {
    use super::super::{factorize, Factorization, MomentScalar};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_supports_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let d = random_rank_one(&mut rng, RandomPointSpec::default());
            assert!(d.support().modulus() <= 2.0);
            assert!(d.degree() <= 8);
            assert!(matches!(factorize(&d), Ok(Factorization::Product { .. })));
            let e = random_non_rank_one(&mut rng, RandomPointSpec::default());
            assert!(factorize(&e).is_err());
        }
    }
}
