mod common;

use proptest::prelude::*;
use solenoid::characters::{ProductCharacter, SolenoidCharacter};
use solenoid::fourier::{
    descend_spectrum, parseval_check, partial_sum, product_spectrum, spectrum, spectrum_blackbox, transform,
    transform_factorized, uniqueness_check, BlackBoxOptions, Candidates, FareyGrid, SpectrumJson,
};
use solenoid::funcspace::{check_invariance, sample_points, SolenoidPoly};
use solenoid::meanval::{mean_numeric, solenoid_mean, solenoid_mean_enumerated};
use solenoid::profinite::{haar_average, ModulusTower};
use solenoid::quadrature::Kernel;
use solenoid::rationals::{Rational, RationalAngle};
use solenoid::{Complex64, ExecPolicy};

fn poly_strategy() -> impl Strategy<Value = SolenoidPoly> {
    prop::collection::vec(((1i64..=12), (-72i64..=72), (0.5f64..2.0), (0.0f64..6.28)), 0..=8).prop_map(|terms| {
        SolenoidPoly::from_pairs(
            terms
                .into_iter()
                .map(|(b, a, r, th)| (Rational::new(a.clamp(-6 * b, 6 * b), b), Complex64::from_polar(r, th))),
        )
    })
}

fn angle_strategy() -> impl Strategy<Value = RationalAngle> {
    (1i64..=12).prop_flat_map(|b| (0..b).prop_map(move |a| RationalAngle::new(a, b).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_reads_coefficients(phi in poly_strategy()) {
        for (q, c) in phi.pairs() {
            prop_assert_eq!(transform(&phi, &SolenoidCharacter::new(q.clone()).as_product()), *c);
        }
    }

    #[test]
    fn transform_selection_rule(phi in poly_strategy(), rho in angle_strategy(), pick in 0usize..8) {
        if let Some((lam, _)) = phi.pairs().nth(pick % phi.len().max(1)) {
            let ch = ProductCharacter::new(lam.clone(), rho);
            let v = transform(&phi, &ch);
            if !ch.descends() {
                prop_assert_eq!(v, Complex64::new(0.0, 0.0));
            }
            prop_assert!((v - transform_factorized(&phi, &ch).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_exact(phi in poly_strategy()) {
        let r = parseval_check(&phi);
        prop_assert!(r.gap < 1e-12);
        let s = spectrum(&phi, &Candidates::Terms);
        prop_assert!(s.residual_power.abs() < 1e-12);
    }

    #[test]
    fn spectrum_json_round_trip(phi in poly_strategy()) {
        let s = spectrum(&phi, &Candidates::Terms);
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back: SpectrumJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.into_spectrum().unwrap(), s.clone());
        prop_assert_eq!(partial_sum(&s, usize::MAX), phi);
    }

    #[test]
    fn descent_of_computed_spectrum(phi in poly_strategy()) {
        let ps = product_spectrum(&phi.as_raw()).unwrap();
        let down = descend_spectrum(&ps).unwrap();
        prop_assert_eq!(down.to_poly(), phi);
    }

    #[test]
    fn partial_sums_take_leading_terms(phi in poly_strategy(), n in 0usize..9) {
        let s = spectrum(&phi, &Candidates::Terms);
        let p = partial_sum(&s, n);
        prop_assert_eq!(p.len(), n.min(phi.len()));
        let kept_min = p.pairs().map(|(_, c)| c.norm()).fold(f64::INFINITY, f64::min);
        let dropped_max = phi.pairs().filter(|(q, _)| p.coefficient(q) == Complex64::new(0.0, 0.0)).map(|(_, c)| c.norm()).fold(0.0, f64::max);
        prop_assert!(p.is_empty() || kept_min >= dropped_max);
    }
}

#[test]
fn uniqueness_over_corpus() {
    let tower = ModulusTower::default();
    let corpus = common::corpus();
    for (i, phi) in corpus.iter().enumerate().take(10) {
        assert!(uniqueness_check(phi, phi, &tower, ExecPolicy::default()).unwrap().equal);
        let other = &corpus[(i + 1) % corpus.len()];
        let r = uniqueness_check(phi, other, &tower, ExecPolicy::default()).unwrap();
        assert!(!r.equal && r.sampled_gap > 1e-3);
    }
}

#[test]
fn symbolic_and_enumerated_means_agree_on_corpus() {
    let tower = ModulusTower::default();
    for phi in common::corpus().iter().take(10) {
        let a = solenoid_mean(phi).value;
        let b = solenoid_mean_enumerated(phi, &tower, ExecPolicy::default()).unwrap().value;
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn sequential_and_parallel_are_bit_identical() {
    let tower = ModulusTower::default();
    let phi = &common::corpus()[7];
    let leaf = phi.base_leaf();
    let seq = ExecPolicy::Sequential;
    let par = ExecPolicy::Parallel;

    for kernel in [Kernel::Window, Kernel::Cesaro] {
        assert_eq!(
            mean_numeric(&leaf, kernel, 3e3, seq).unwrap(),
            mean_numeric(&leaf, kernel, 3e3, par).unwrap()
        );
    }
    let f = |t: &solenoid::profinite::ProfiniteInt| phi.leaf_restrict(t).unwrap().poly.eval(0.3);
    assert_eq!(haar_average(2520, &tower, seq, f).unwrap(), haar_average(2520, &tower, par, f).unwrap());

    let samples = sample_points(&tower, 200, 11, 20.0);
    assert_eq!(
        check_invariance(phi, &[-2, 3], &samples, seq).unwrap(),
        check_invariance(phi, &[-2, 3], &samples, par).unwrap()
    );

    let opts = |exec| BlackBoxOptions {
        grid: FareyGrid::new(6, Rational::from_integer(6)),
        kernel: Kernel::Cesaro,
        horizon: 1e3,
        threshold_factor: 5.0,
        exec,
    };
    assert_eq!(
        spectrum_blackbox(|x| leaf.eval(x), &opts(seq)).unwrap(),
        spectrum_blackbox(|x| leaf.eval(x), &opts(par)).unwrap()
    );
}

#[test]
fn corpus_shape() {
    let corpus = common::corpus();
    assert_eq!(corpus.len(), common::CORPUS_SIZE);
    for phi in &corpus {
        assert!(!phi.is_empty() && phi.len() <= common::MAX_TERMS);
        for (q, c) in phi.pairs() {
            assert!(q.denom() <= &common::MAX_DEN.into());
            assert!(q.abs() <= Rational::from_integer(common::MAX_ABS_Q));
            assert!((0.5..2.0).contains(&c.norm()));
        }
    }
}
