use std::sync::OnceLock;

use teich_scaling::bowen_series::MarkovSystem;
use teich_scaling::thermo::*;

fn g2() -> &'static MarkovSystem {
    static S: OnceLock<MarkovSystem> = OnceLock::new();
    S.get_or_init(|| MarkovSystem::standard(2).unwrap())
}

fn gibbs_of_scaling(len: usize) -> (WordTable, GibbsApprox) {
    let t = WordTable::of_system(g2(), len).unwrap();
    let phi = potential_from_scaling(g2(), &t).unwrap();
    let g = gibbs(&t, &phi).unwrap();
    (t, g)
}

#[test]
fn gibbs_measures_are_consistent_across_lengths() {
    let mut prev = gibbs_of_scaling(2);
    let mut gaps = Vec::new();
    for len in 3..=5 {
        let next = gibbs_of_scaling(len);
        let coarse = next.1.marginal(&next.0, len - 1);
        let gap = coarse.iter().zip(&prev.1.measure).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        gaps.push(gap);
        prev = next;
    }
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[2] < 1e-5, "{gaps:?}");
}

#[test]
fn parent_mass_is_the_sum_of_children() {
    let (t, g) = gibbs_of_scaling(4);
    let m3 = g.marginal(&t, 3);
    let m2 = g.marginal(&t, 2);
    let t2 = WordTable::of_system(g2(), 2).unwrap();
    let mut up = vec![0.0; m2.len()];
    for (id, &x) in m3.iter().enumerate() {
        up[t2.id_of(&t.word_at(3, id)[..2]).unwrap()] += x;
    }
    for (a, b) in up.iter().zip(&m2) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!((m2.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_potential_counts_words() {
    let trans = Transitions::of_system(g2());
    let rho = trans.spectral_radius();
    for len in 1..=3 {
        let t = WordTable::new(trans.clone(), len).unwrap();
        let p = pressure(&t, &Potential::constant(&t, 0.0)).unwrap();
        assert!((p.pressure - rho.ln()).abs() < 1e-10);
    }
}

#[test]
fn pressure_is_monotone_and_shifts_by_constants() {
    let t = WordTable::of_system(g2(), 3).unwrap();
    let phi = potential_from_scaling(g2(), &t).unwrap();
    let p0 = pressure(&t, &phi).unwrap().pressure;
    for c in [-1.0, 0.25, 2.0] {
        let p = pressure(&t, &phi.shifted(c)).unwrap().pressure;
        assert!((p - p0 - c).abs() < 1e-11);
    }
    let bump = Potential::random(&t, 11).shifted(1.0);
    let q = pressure(&t, &phi.add_scaled(&bump, 0.05).unwrap()).unwrap().pressure;
    assert!(q > p0);
}

#[test]
fn zero_pressure_at_several_lengths() {
    for (_, p) in check_zero_pressure(g2(), &[2, 3, 4]).unwrap() {
        assert!(p.abs() < 1e-10);
    }
}

#[test]
fn constant_path_has_zero_pressure_metric() {
    let t = WordTable::of_system(g2(), 3).unwrap();
    let m = pressure_metric(&t, g2(), g2(), g2(), 0.01).unwrap();
    assert_eq!(m.psi_norm, 0.0);
    assert!(m.value.abs() < 1e-12);
    assert!(m.denominator > 0.0);
}

#[test]
fn twist_has_positive_pressure_metric() {
    let m = twist_pressure_metric(g2(), 1, 3, 0.01).unwrap();
    assert!(m.value > 0.0);
    assert!(m.mean_residual < 1e-6 * m.psi_norm.max(1.0));
}

#[test]
fn variance_estimators_agree() {
    let t = WordTable::of_system(g2(), 3).unwrap();
    let phi = potential_from_scaling(g2(), &t).unwrap();
    let psi = Potential::random(&t, 3);
    let a = variance(&t, &phi, &psi, VarianceMethod::default()).unwrap();
    let b = variance(
        &t,
        &phi,
        &psi,
        VarianceMethod::Birkhoff { segments: 4000, length: 200, seed: 1 },
    )
    .unwrap();
    assert!((a - b).abs() < 0.05 * a, "{a} {b}");
}
