use teich_scaling::bowen_series::{conjugated_system, BranchRule, BuildOptions, MarkovSystem};
use teich_scaling::fuchsian::{conjugate_rep, twist_deform, Marking};
use teich_scaling::mobius::{Complex, DiskMobius};
use teich_scaling::precision::Precision;
use teich_scaling::scaling::prescaling;
use teich_scaling::symbolic::{partition_codes, random_dual_word, predecessors, transport_point};
use teich_scaling::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check_markov(s: &MarkovSystem) {
    let k = s.len();
    assert!(s.markov_residual < 1e-10);
    for j in 0..k {
        let img = s.image_arc(j);
        for end in [img.start, img.end] {
            let x = s.points.iter().map(|p| p.distance(end)).fold(f64::INFINITY, f64::min);
            assert!(x < 1e-10);
        }
        assert!(s.out_degree(j) >= 1);
    }
    let e = &s.expansion;
    assert!(e.minima[e.depth_used - 1] > 1.0);
    assert!(s.n_mix >= 1);
}

#[test]
fn genus_three_partition() {
    let s = MarkovSystem::standard(3).unwrap();
    assert_eq!(s.len(), 1320);
    check_markov(&s);
    assert!(s.lambda0 > 1.0);
}

#[test]
fn largest_derivative_rule_picks_the_steepest_branch() {
    let s = MarkovSystem::standard(2).unwrap();
    let mut switched = 0;
    for j in 0..s.len() {
        let arc = s.interval(j);
        let own = s.branch_map(j).derivative_range_on_arc(&arc).0;
        for &t in &s.alternatives[j] {
            assert!(s.rep.generators[t].derivative_range_on_arc(&arc).0 <= own + 1e-12);
        }
        let domain = (0..s.rep.sides())
            .find(|&v| {
                let (a, b) = (s.jv[v].start, s.jv[(v + 1) % s.rep.sides()].start);
                (j + s.len() - a) % s.len() < (b + s.len() - a) % s.len()
            })
            .unwrap();
        if domain != s.branch[j] {
            switched += 1;
        }
    }
    assert!(switched > 0);
    let d = MarkovSystem::standard_with(2, &BuildOptions { branch_rule: BranchRule::Domain, ..BuildOptions::default() })
        .unwrap();
    check_markov(&d);
    assert_eq!(d.points, s.points);
}

#[test]
fn identity_marking_reproduces_the_standard_system() {
    let s = MarkovSystem::standard(2).unwrap();
    let x = conjugated_system(&s, &Marking::identity(&s.rep)).unwrap();
    for (p, q) in s.points.iter().zip(&x.points) {
        assert!(p.distance(*q) < 1e-12);
    }
    assert_eq!(x.image, s.image);
    let pred = predecessors(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let w = random_dual_word(&s, &pred, 5, &mut rng);
        let a = prescaling(&s, &w, Precision::Double).unwrap();
        let b = prescaling(&x, &w, Precision::Double).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn transport_commutes_with_conjugation() {
    let s = MarkovSystem::standard(2).unwrap();
    let h = DiskMobius::moving_to_origin(Complex::new(-0.25, 0.4));
    let (_, mk) = conjugate_rep(&s.rep, &h);
    let codes = partition_codes(&s).unwrap();
    for c in &codes {
        let moved = transport_point(c, &mk).unwrap();
        assert!(moved.distance(h.apply_point(c.point)) < 1e-9, "point {}", c.index);
    }
    let x = conjugated_system(&s, &mk).unwrap();
    check_markov(&x);
}

#[test]
fn twisted_systems_keep_the_order() {
    let s = MarkovSystem::standard(2).unwrap();
    for (h, t) in [(1, 0.2), (1, 0.4), (2, -0.3)] {
        let (_, mk) = twist_deform(&s.rep, h, t).unwrap();
        let x = conjugated_system(&s, &mk).unwrap();
        check_markov(&x);
        assert_eq!(x.image, s.image);
        let moved = x.points.iter().zip(&s.points).map(|(p, q)| p.distance(*q)).fold(0.0, f64::max);
        assert!(moved > 1e-3);
    }
}

#[test]
fn tight_tolerance_is_a_certificate_failure() {
    let r = MarkovSystem::standard_with(2, &BuildOptions { markov_tol: 1e-20, ..BuildOptions::default() });
    assert!(matches!(r, Err(Error::MarkovFailure(_))));
}
