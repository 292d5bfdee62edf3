//! Characters of ℝ, Ẑ, ℝ×Ẑ and the solenoid.
//!
//! Normalization: `χ_λ(x) = exp(2πiλx)` on ℝ and `χ_{a/b}(t) = exp(2πi·a·t/b)`
//! on Ẑ. A product character `χ_{λ,ϱ}` descends to the solenoid exactly when
//! it kills the diagonal generator `(−1, 1)`, i.e. when `ϱ = λ mod ℤ`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::unit;
use crate::profinite::ProfiniteInt;
use crate::rationals::{Rational, RationalAngle};

/// Phase of `χ_ϱ(t)` in turns, computed from the exact residue class.
pub fn zhat_phase(rho: &RationalAngle, t: &ProfiniteInt) -> Result<f64> {
    if rho.is_identity() {
        return Ok(0.0);
    }
    let r = t.residue(rho.b())?;
    let k: BigInt = (rho.a() * r).mod_floor(rho.b());
    Ok(ratio_to_f64(&k, rho.b()))
}

fn ratio_to_f64(k: &BigInt, b: &BigInt) -> f64 {
    match (k.to_f64(), b.to_f64()) {
        (Some(k), Some(b)) if b.is_finite() => k / b,
        _ => Rational::reduce(k.clone(), b.clone())
            .map(|q| q.to_f64())
            .unwrap_or(f64::NAN),
    }
}

/// `χ_ϱ(t) = exp(2πi·a·residue(t, b)/b)`.
pub fn eval_zhat(rho: &RationalAngle, t: &ProfiniteInt) -> Result<Complex64> {
    Ok(unit(zhat_phase(rho, t)?))
}

/// A character of Ẑ, indexed by ℚ/ℤ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZhatCharacter {
    pub rho: RationalAngle,
}

impl ZhatCharacter {
    pub fn new(rho: RationalAngle) -> Self {
        Self { rho }
    }

    pub fn eval(&self, t: &ProfiniteInt) -> Result<Complex64> {
        eval_zhat(&self.rho, t)
    }
}

/// `χ_{λ,ϱ}(x, t) = χ_λ(x)·χ_ϱ(t)` on ℝ×Ẑ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProductCharacter {
    pub lambda: Rational,
    pub rho: RationalAngle,
}

impl ProductCharacter {
    pub fn new(lambda: Rational, rho: RationalAngle) -> Self {
        Self { lambda, rho }
    }

    pub fn eval(&self, x: f64, t: &ProfiniteInt) -> Result<Complex64> {
        Ok(unit(self.lambda.to_f64() * x + zhat_phase(&self.rho, t)?))
    }

    /// True iff the character annihilates the diagonal copy of ℤ.
    pub fn descends(&self) -> bool {
        self.lambda.frac() == self.rho
    }

    /// `|χ(x+1, t−1) − χ(x, t)|`, which vanishes for every `(x, t)` iff the
    /// character descends.
    pub fn diagonal_residual(&self, x: f64, t: &ProfiniteInt) -> Result<f64> {
        let shifted = t.sub(&crate::profinite::embed_i64(1, t.tower()))?;
        Ok((self.eval(x + 1.0, &shifted)? - self.eval(x, t)?).norm())
    }

    /// The solenoid character this descends to, if it does.
    pub fn descend(&self) -> Option<SolenoidCharacter> {
        self.descends().then(|| SolenoidCharacter::new(self.lambda.clone()))
    }
}

impl fmt::Debug for ProductCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ({}, {})", self.lambda, self.rho)
    }
}

/// A character `χ_q` of the solenoid, `q ∈ ℚ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SolenoidCharacter {
    pub q: Rational,
}

impl SolenoidCharacter {
    pub fn new(q: Rational) -> Self {
        Self { q }
    }

    pub fn trivial() -> Self {
        Self::new(Rational::zero())
    }

    /// The lift `(λ, ϱ) = (q, q mod ℤ)` to ℝ×Ẑ.
    pub fn as_product(&self) -> ProductCharacter {
        ProductCharacter::new(self.q.clone(), self.q.frac())
    }

    /// The pair `(n, ϱ) ∈ ℤ × ℚ/ℤ` with `q = n + ϱ`.
    pub fn integer_and_angle(&self) -> (BigInt, RationalAngle) {
        self.q.frac_decompose()
    }

    pub fn eval(&self, x: f64, t: &ProfiniteInt) -> Result<Complex64> {
        self.as_product().eval(x, t)
    }
}

impl fmt::Debug for SolenoidCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ[{}]", self.q)
    }
}

pub fn eval_product(c: &ProductCharacter, x: f64, t: &ProfiniteInt) -> Result<Complex64> {
    c.eval(x, t)
}

pub fn descends(c: &ProductCharacter) -> bool {
    c.descends()
}

pub fn solenoid_character(q: Rational) -> SolenoidCharacter {
    SolenoidCharacter::new(q)
}

pub fn as_product(c: &SolenoidCharacter) -> ProductCharacter {
    c.as_product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profinite::{embed_i64, haar_average, ModulusTower};
    use crate::exec::ExecPolicy;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn angle(a: i64, b: i64) -> RationalAngle {
        RationalAngle::new(a, b).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn eval_zhat_examples() {
        let t = ModulusTower::default();
        assert!(close(eval_zhat(&angle(1, 2), &embed_i64(3, &t)).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
        assert_eq!(eval_zhat(&RationalAngle::identity(), &embed_i64(12345, &t)).unwrap(), Complex64::new(1.0, 0.0));
        let expected = Complex64::from_polar(1.0, 4.0 * PI / 3.0);
        let two = embed_i64(2, &t);
        assert!(close(eval_zhat(&angle(1, 3), &two).unwrap(), expected, 1e-15));
        // cross-check: exp(2πi·t_k/3) along the approximating integers
        for k in 3..=16 {
            let tk = two.approx_sequence(k).unwrap() as f64;
            assert!(close(Complex64::from_polar(1.0, 2.0 * PI * tk / 3.0), expected, 1e-12));
        }
    }

    #[test]
    fn eval_product_examples() {
        let t = ModulusTower::default();
        let zero = embed_i64(0, &t);
        let trivial = ProductCharacter::new(q(0, 1), RationalAngle::identity());
        assert_eq!(trivial.eval(0.37, &embed_i64(5, &t)).unwrap(), Complex64::new(1.0, 0.0));
        let c = ProductCharacter::new(q(1, 1), RationalAngle::identity());
        assert!(close(c.eval(0.5, &embed_i64(9, &t)).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
        let c = ProductCharacter::new(q(3, 2), angle(1, 2));
        assert!(close(c.eval(1.0, &zero).unwrap(), Complex64::new(-1.0, 0.0), 1e-15));
    }

    fn random_point(rng: &mut impl Rng, tower: &ModulusTower) -> (f64, ProfiniteInt) {
        let x = rng.gen_range(-50.0..50.0);
        let t = ProfiniteInt::from_top_residue(tower.clone(), rng.gen::<u64>() as u128);
        (x, t)
    }

    #[test]
    fn descends_examples_with_numeric_annihilation() {
        let tower = ModulusTower::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = ProductCharacter::new(q(3, 2), angle(1, 2));
        assert!(c.descends());
        for _ in 0..100 {
            let (x, t) = random_point(&mut rng, &tower);
            assert!(c.diagonal_residual(x, &t).unwrap() < 1e-12);
        }
        assert!(!ProductCharacter::new(q(1, 2), angle(1, 3)).descends());
        for n in -5..=5 {
            assert!(ProductCharacter::new(q(n, 1), RationalAngle::identity()).descends());
        }
    }

    #[test]
    fn solenoid_character_round_trip() {
        let p = solenoid_character(q(5, 3)).as_product();
        assert_eq!((p.lambda.clone(), p.rho.clone()), (q(5, 3), angle(2, 3)));
        let p = solenoid_character(q(-2, 1)).as_product();
        assert_eq!((p.lambda.clone(), p.rho.clone()), (q(-2, 1), RationalAngle::identity()));
        let p = solenoid_character(q(1, 2)).as_product();
        assert_eq!((p.lambda.clone(), p.rho.clone()), (q(1, 2), angle(1, 2)));
        assert_eq!(p.descend().unwrap().q, q(1, 2));
        let (n, rho) = solenoid_character(q(-7, 3)).integer_and_angle();
        assert_eq!((n, rho), (BigInt::from(-3), angle(2, 3)));
    }

    #[test]
    fn zhat_homomorphism_and_unit_modulus() {
        let tower = ModulusTower::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let b: i64 = rng.gen_range(1..=16);
            let rho = angle(rng.gen_range(0..b), b);
            let (_, s) = random_point(&mut rng, &tower);
            let (x, t) = random_point(&mut rng, &tower);
            let lhs = eval_zhat(&rho, &s.add(&t).unwrap()).unwrap();
            let rhs = eval_zhat(&rho, &s).unwrap() * eval_zhat(&rho, &t).unwrap();
            assert!(close(lhs, rhs, 1e-12));
            let lambda = q(rng.gen_range(-60..60), rng.gen_range(1..=12));
            let c = ProductCharacter::new(lambda, rho);
            assert!((c.eval(x, &t).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn descent_matches_numeric_annihilation() {
        let tower = ModulusTower::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let lambda = q(rng.gen_range(-40..40), rng.gen_range(1..=12));
            let b: i64 = rng.gen_range(1..=12);
            let rho = if rng.gen_bool(0.4) { lambda.frac() } else { angle(rng.gen_range(0..b), b) };
            let c = ProductCharacter::new(lambda, rho);
            let worst = (0..100)
                .map(|_| {
                    let (x, t) = random_point(&mut rng, &tower);
                    c.diagonal_residual(x, &t).unwrap()
                })
                .fold(0.0, f64::max);
            assert_eq!(c.descends(), worst < 1e-10, "{c:?} residual {worst}");
        }
    }

    #[test]
    fn orthogonality_by_cylinder_enumeration() {
        let tower = ModulusTower::default();
        let angles: Vec<RationalAngle> = (1..=12i64)
            .flat_map(|b| (0..b).map(move |a| angle(a, b)))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        for r in &angles {
            for s in &angles {
                let m = num_integer::lcm(r.b().to_u128().unwrap(), s.b().to_u128().unwrap());
                let avg = haar_average(m, &tower, ExecPolicy::Sequential, |t| {
                    eval_zhat(r, t).unwrap() * eval_zhat(s, t).unwrap().conj()
                })
                .unwrap();
                let expected = if r == s { 1.0 } else { 0.0 };
                assert!(close(avg, Complex64::new(expected, 0.0), 1e-12), "{r:?} {s:?}");
            }
        }
    }

    #[test]
    fn json_shapes() {
        let c = ProductCharacter::new(q(3, 2), angle(1, 2));
        assert_eq!(
            serde_json::to_value(&c).unwrap(),
            serde_json::json!({"lambda": {"num": 3, "den": 2}, "rho": {"a": 1, "b": 2}})
        );
        let s = SolenoidCharacter::new(q(-1, 3));
        assert_eq!(serde_json::to_value(&s).unwrap(), serde_json::json!({"q": {"num": -1, "den": 3}}));
    }
}
