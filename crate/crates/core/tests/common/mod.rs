#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solenoid::funcspace::SolenoidPoly;
use solenoid::rationals::Rational;
use solenoid::Complex64;

pub const CORPUS_SIZE: usize = 50;
pub const MAX_DEN: i64 = 12;
pub const MAX_TERMS: usize = 8;
pub const MAX_ABS_Q: i64 = 6;

/// Random solenoidal polynomial: up to 8 distinct frequencies `a/b` with
/// `b ≤ 12`, `|a/b| ≤ 6`, coefficient moduli in `[0.5, 2)`.
pub fn random_poly(rng: &mut ChaCha8Rng) -> SolenoidPoly {
    let n = rng.gen_range(1..=MAX_TERMS);
    let mut terms: Vec<(Rational, Complex64)> = Vec::new();
    while terms.len() < n {
        let b = rng.gen_range(1..=MAX_DEN);
        let q = Rational::new(rng.gen_range(-MAX_ABS_Q * b..=MAX_ABS_Q * b), b);
        if terms.iter().any(|(p, _)| *p == q) {
            continue;
        }
        let c = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
        terms.push((q, c));
    }
    SolenoidPoly::from_pairs(terms)
}

pub fn corpus() -> Vec<SolenoidPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    (0..CORPUS_SIZE).map(|_| random_poly(&mut rng)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
