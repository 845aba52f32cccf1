use teich_scaling::fuchsian::{
    build_standard_group, conjugate_rep, evaluate_word, relator_word, twist_deform, Label, LabelKind,
};
use teich_scaling::mobius::{Complex, DiskMobius};
use teich_scaling::Error;

#[test]
fn standard_groups_close_up() {
    for g in 2..=4 {
        let (rep, poly) = build_standard_group(g).unwrap();
        assert_eq!(rep.sides(), 4 * g);
        assert!(rep.relation_residual < 1e-9, "g={g}");
        let target = std::f64::consts::PI / (2.0 * g as f64);
        for v in 0..poly.sides() {
            assert!((poly.vertex_angle(v) - target).abs() < 1e-9);
        }
        let r = evaluate_word(&rep, &relator_word(g)).unwrap();
        assert!(r.distance_from_identity() < 1e-9);
    }
}

#[test]
fn generators_are_hyperbolic_side_pairings() {
    let (rep, _) = build_standard_group(2).unwrap();
    for s in 0..rep.sides() {
        let g = &rep.generators[s];
        assert!(g.trace().abs() > 2.0);
        let inv = &rep.generators[Label::from_side(s).inverse().side()];
        assert!(g.compose(inv).distance_from_identity() < 1e-12);
    }
}

#[test]
fn deformations_keep_the_relation() {
    let (rep, _) = build_standard_group(2).unwrap();
    for t in [-0.5, 0.1, 0.4, 1.0] {
        for h in 1..=2 {
            let (tw, _) = twist_deform(&rep, h, t).unwrap();
            assert!(tw.relation_residual < 1e-9);
            assert!(!tw.is_standard);
        }
    }
    let m = DiskMobius::moving_to_origin(Complex::new(0.3, -0.2));
    let (c, mk) = conjugate_rep(&rep, &m);
    assert!(c.relation_residual < 1e-9);
    for s in 0..rep.sides() {
        let expect = rep.generators[s].conjugate_by(&m);
        assert!(mk.image(s).compose(&expect.inverse()).distance_from_identity() < 1e-12);
    }
}

#[test]
fn twist_fixes_a_and_moves_b() {
    let (rep, _) = build_standard_group(2).unwrap();
    let (tw, _) = twist_deform(&rep, 1, 0.3).unwrap();
    let a = Label { handle: 1, kind: LabelKind::A };
    let b = Label { handle: 1, kind: LabelKind::B };
    assert!(tw.generator(a).compose(&rep.generator(a).inverse()).distance_from_identity() < 1e-12);
    assert!(tw.generator(b).compose(&rep.generator(b).inverse()).distance_from_identity() > 1e-3);
}

#[test]
fn labels_and_errors() {
    assert_eq!(Label::parse("a1inv", 2).unwrap(), Label { handle: 1, kind: LabelKind::AInv });
    assert_eq!(Label::parse("b2^-1", 2).unwrap().to_string(), Label { handle: 2, kind: LabelKind::BInv }.to_string());
    assert!(matches!(Label::parse("c1", 2), Err(Error::UnknownLabel(_))));
    assert!(matches!(Label::parse("a3", 2), Err(Error::UnknownLabel(_))));
    assert!(matches!(build_standard_group(1), Err(Error::InvalidGenus(1))));
}
